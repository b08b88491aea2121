#include "relex/entity_classifier.hpp"

#include "relex/errors.hpp"

namespace relex {

using nn::Graph;
using nn::Var;

EntityClassifier::EntityClassifier(const ModelConfig& cfg,
                                   nn::ParameterStore& params,
                                   std::mt19937_64& init_rng)
    : hidden_(cfg.encoder_hidden),
      num_types_(static_cast<int>(cfg.entity_types.size())) {
  const int ffnn_hidden = cfg.resolved_ffnn_hidden();
  w1_ = &params.create("entity.w1", hidden_, ffnn_hidden);
  nn::init_normal(w1_->value, init_rng);
  b1_ = &params.create("entity.b1", 1, ffnn_hidden);
  b1_->decay = false;
  w2_ = &params.create("entity.w2", ffnn_hidden, num_types_);
  nn::init_normal(w2_->value, init_rng);
  b2_ = &params.create("entity.b2", 1, num_types_);
  b2_->decay = false;
}

Var EntityClassifier::entity_representations(
    Graph& g, Var mention_reprs,
    const std::vector<std::vector<int>>& clusters) const {
  for (const auto& cluster : clusters) {
    if (cluster.empty()) throw ModelError("cannot represent an empty cluster");
  }
  return g.segment_max(mention_reprs, clusters);
}

Var EntityClassifier::entity_logits(Graph& g, Var entity_reprs,
                                    double dropout) const {
  Var inner = g.relu(g.linear(g.dropout(entity_reprs, dropout), *w1_, *b1_));
  return g.linear(inner, *w2_, *b2_);
}

std::vector<EntityTypeDecision> EntityClassifier::classify(
    Graph& g, Var entity_reprs) const {
  Var probs = g.softmax_rows(entity_logits(g, entity_reprs));
  const nn::Matrix& p = g.value(probs);
  std::vector<EntityTypeDecision> out;
  out.reserve(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    EntityTypeDecision decision;
    decision.distribution.resize(static_cast<std::size_t>(num_types_));
    int best = 0;
    for (int t = 0; t < num_types_; ++t) {
      decision.distribution[static_cast<std::size_t>(t)] = p(r, t);
      if (p(r, t) > p(r, best)) best = t;  // ties keep the smaller index
    }
    decision.type_index = best;
    out.push_back(std::move(decision));
  }
  return out;
}

}  // namespace relex
