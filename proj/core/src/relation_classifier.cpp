#include "relex/relation_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "relex/errors.hpp"

namespace relex {

using nn::Graph;
using nn::Var;

int token_distance(const Span& a, const Span& b) {
  if (b.start >= a.end) return b.start - a.end;
  if (a.start >= b.end) return a.start - b.end;
  return 0;
}

std::pair<int, int> between_range(const Span& a, const Span& b) {
  if (b.start >= a.end) return {a.end, b.start};
  if (a.start >= b.end) return {b.end, a.start};
  return {0, 0};  // overlapping: empty
}

RelationClassifier::RelationClassifier(const ModelConfig& cfg,
                                       nn::ParameterStore& params,
                                       std::mt19937_64& init_rng)
    : hidden_(cfg.encoder_hidden),
      num_relations_(static_cast<int>(cfg.relation_types.size())),
      ablate_entity_repr_(cfg.rel_ablate_entity_repr),
      ablate_local_context_(cfg.rel_ablate_local_context),
      intra_sentence_only_(cfg.rel_intra_sentence_only),
      max_sentence_distance_(cfg.rel_max_sentence_distance),
      max_token_distance_(cfg.rel_max_token_distance) {
  if (num_relations_ <= 0) {
    throw ConfigError("relation type set is empty; resolve rel.types first");
  }
  const int ffnn_hidden = cfg.resolved_ffnn_hidden();
  const int num_entity_types = static_cast<int>(cfg.entity_types.size());
  auto weight = [&](const char* name, int rows, int cols) {
    nn::Parameter& p = params.create(name, rows, cols);
    nn::init_normal(p.value, init_rng);
    return &p;
  };
  auto bias = [&](const char* name, int cols) {
    nn::Parameter& p = params.create(name, 1, cols);
    p.decay = false;
    return &p;
  };
  type_table_ = weight("rel.type_table", num_entity_types, kMetaEmbeddingSize);
  sent_dist_table_ = weight("rel.sent_dist_table", max_sentence_distance_ + 1,
                            kMetaEmbeddingSize);
  tok_dist_table_ = weight("rel.tok_dist_table", max_token_distance_ + 1,
                           kMetaEmbeddingSize);
  grc_w1_ = weight("rel.grc_w1", grc_feature_width(), ffnn_hidden);
  grc_b1_ = bias("rel.grc_b1", ffnn_hidden);
  grc_w2_ = weight("rel.grc_w2", ffnn_hidden, num_relations_);
  grc_b2_ = bias("rel.grc_b2", num_relations_);
  pair_w_ = weight("rel.pair_w", mrc_pair_feature_width(), hidden_);
  pair_b_ = bias("rel.pair_b", hidden_);
  mrc_w1_ = weight("rel.mrc_w1", mrc_final_feature_width(), ffnn_hidden);
  mrc_b1_ = bias("rel.mrc_b1", ffnn_hidden);
  mrc_w2_ = weight("rel.mrc_w2", ffnn_hidden, num_relations_);
  mrc_b2_ = bias("rel.mrc_b2", num_relations_);
}

int RelationClassifier::mrc_pair_feature_width() const {
  int width = 2 * hidden_;  // e(s1), e(s2)
  if (!ablate_entity_repr_) width += 2 * hidden_;  // x^e_1, x^e_2
  if (!ablate_local_context_) width += hidden_;    // c(s1, s2)
  width += 2 * kMetaEmbeddingSize;                 // sentence + token distance
  return width;
}

Var RelationClassifier::grc_logits(
    Graph& g, Var entity_reprs, const std::vector<std::pair<int, int>>& pairs,
    const std::vector<std::pair<int, int>>& pair_types, double dropout) const {
  std::vector<int> heads;
  std::vector<int> tails;
  std::vector<int> head_types;
  std::vector<int> tail_types;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    heads.push_back(pairs[i].first);
    tails.push_back(pairs[i].second);
    head_types.push_back(pair_types[i].first);
    tail_types.push_back(pair_types[i].second);
  }
  Var type_params = g.param(*type_table_);
  Var features = g.concat_cols({
      g.select_rows(entity_reprs, std::move(heads)),
      g.select_rows(type_params, std::move(head_types)),
      g.select_rows(entity_reprs, std::move(tails)),
      g.select_rows(type_params, std::move(tail_types)),
  });
  Var inner = g.relu(g.linear(g.dropout(features, dropout), *grc_w1_, *grc_b1_));
  return g.linear(inner, *grc_w2_, *grc_b2_);
}

std::vector<std::pair<int, int>> RelationClassifier::select_instances(
    const std::vector<Span>& spans, const Document& doc,
    const std::vector<int>& head_mentions,
    const std::vector<int>& tail_mentions) const {
  std::vector<std::pair<int, int>> all;
  all.reserve(head_mentions.size() * tail_mentions.size());
  for (int a : head_mentions) {
    for (int b : tail_mentions) {
      all.emplace_back(a, b);
    }
  }
  if (!intra_sentence_only_) return all;

  std::vector<std::pair<int, int>> intra;
  for (const auto& [a, b] : all) {
    const int sa = doc.sentence_of(spans[static_cast<std::size_t>(a)]);
    const int sb = doc.sentence_of(spans[static_cast<std::size_t>(b)]);
    if (sa == sb) intra.push_back({a, b});
  }
  if (!intra.empty()) return intra;
  // No intra-sentence instance: fall back to the single closest pair in
  // token distance (ties: smallest mention index pair).
  std::pair<int, int> best = all.front();
  int best_dist = std::numeric_limits<int>::max();
  for (const auto& [a, b] : all) {
    const int d = token_distance(spans[static_cast<std::size_t>(a)],
                                 spans[static_cast<std::size_t>(b)]);
    if (d < best_dist ||
        (d == best_dist && std::pair(a, b) < best)) {
      best_dist = d;
      best = {a, b};
    }
  }
  return {best};
}

Var RelationClassifier::mention_pair_representations(
    Graph& g, const EncodedDocument& encoded, Var mention_reprs,
    const std::vector<Span>& spans, const Document& doc, Var entity_reprs,
    const std::vector<std::pair<int, int>>& mention_pairs,
    const std::vector<std::pair<int, int>>& pair_entities,
    double dropout) const {
  std::vector<int> heads;
  std::vector<int> tails;
  std::vector<int> head_entities;
  std::vector<int> tail_entities;
  std::vector<std::vector<int>> context_groups;
  std::vector<int> sent_dists;
  std::vector<int> tok_dists;
  for (std::size_t i = 0; i < mention_pairs.size(); ++i) {
    const auto& [a, b] = mention_pairs[i];
    const Span& sa = spans[static_cast<std::size_t>(a)];
    const Span& sb = spans[static_cast<std::size_t>(b)];
    heads.push_back(a);
    tails.push_back(b);
    head_entities.push_back(pair_entities[i].first);
    tail_entities.push_back(pair_entities[i].second);
    const auto [lo, hi] = between_range(sa, sb);
    std::vector<int> ctx(static_cast<std::size_t>(std::max(0, hi - lo)));
    std::iota(ctx.begin(), ctx.end(), lo);
    context_groups.push_back(std::move(ctx));
    sent_dists.push_back(std::min(
        std::abs(doc.sentence_of(sa) - doc.sentence_of(sb)),
        max_sentence_distance_));
    tok_dists.push_back(std::min(token_distance(sa, sb), max_token_distance_));
  }

  std::vector<Var> parts;
  // u := (e(s1) . x^e_1) . (e(s2) . x^e_2); the entity blocks drop out under
  // the entity-representation ablation.
  parts.push_back(g.select_rows(mention_reprs, std::move(heads)));
  if (!ablate_entity_repr_) {
    parts.push_back(g.select_rows(entity_reprs, std::move(head_entities)));
  }
  parts.push_back(g.select_rows(mention_reprs, std::move(tails)));
  if (!ablate_entity_repr_) {
    parts.push_back(g.select_rows(entity_reprs, std::move(tail_entities)));
  }
  if (!ablate_local_context_) {
    // Max-pool over the tokens strictly between the mentions; empty context
    // (adjacent or overlapping mentions) yields the zero vector.
    parts.push_back(
        g.segment_max(encoded.token_embeddings, std::move(context_groups)));
  }
  parts.push_back(g.select_rows(g.param(*sent_dist_table_), std::move(sent_dists)));
  parts.push_back(g.select_rows(g.param(*tok_dist_table_), std::move(tok_dists)));
  Var u_prime = g.dropout(g.concat_cols(parts), dropout);
  return g.linear(u_prime, *pair_w_, *pair_b_);  // single layer to width h
}

RelationClassifier::MrcForward RelationClassifier::mrc_forward(
    Graph& g, const EncodedDocument& encoded, Var mention_reprs,
    const std::vector<Span>& spans, const Document& doc, Var entity_reprs,
    const std::vector<std::vector<int>>& clusters,
    const std::vector<std::pair<int, int>>& pairs,
    const std::vector<std::pair<int, int>>& pair_types, double dropout) const {
  MrcForward fwd;
  std::vector<std::pair<int, int>> all_pairs;
  std::vector<std::pair<int, int>> all_entities;
  fwd.instance_rows.resize(pairs.size());
  fwd.instance_pairs.resize(pairs.size());
  for (std::size_t s = 0; s < pairs.size(); ++s) {
    const auto& [head, tail] = pairs[s];
    if (clusters[static_cast<std::size_t>(head)].empty() ||
        clusters[static_cast<std::size_t>(tail)].empty()) {
      throw ModelError("relation sample references an empty cluster");
    }
    const auto instances = select_instances(
        spans, doc, clusters[static_cast<std::size_t>(head)],
        clusters[static_cast<std::size_t>(tail)]);
    for (const auto& mp : instances) {
      fwd.instance_rows[s].push_back(static_cast<int>(all_pairs.size()));
      fwd.instance_pairs[s].push_back(mp);
      all_pairs.push_back(mp);
      all_entities.push_back(pairs[s]);
    }
  }
  fwd.instance_reprs = mention_pair_representations(
      g, encoded, mention_reprs, spans, doc, entity_reprs, all_pairs,
      all_entities, dropout);
  fwd.pooled = g.segment_max(fwd.instance_reprs, fwd.instance_rows);

  std::vector<int> head_types;
  std::vector<int> tail_types;
  for (const auto& [ht, tt] : pair_types) {
    head_types.push_back(ht);
    tail_types.push_back(tt);
  }
  Var type_params = g.param(*type_table_);
  Var features = g.concat_cols({
      fwd.pooled,
      g.select_rows(type_params, std::move(head_types)),
      g.select_rows(type_params, std::move(tail_types)),
  });
  Var inner = g.relu(g.linear(g.dropout(features, dropout), *mrc_w1_, *mrc_b1_));
  fwd.logits = g.linear(inner, *mrc_w2_, *mrc_b2_);
  return fwd;
}

std::vector<InstanceContribution> RelationClassifier::top_instances(
    Graph& g, const MrcForward& fwd, int sample, int k,
    const std::vector<Span>& spans) const {
  const nn::Matrix& reprs = g.value(fwd.instance_reprs);
  const nn::Matrix& pooled = g.value(fwd.pooled);
  const auto& rows = fwd.instance_rows[static_cast<std::size_t>(sample)];
  const auto& pairs = fwd.instance_pairs[static_cast<std::size_t>(sample)];
  const int width = static_cast<int>(reprs.cols());
  std::vector<InstanceContribution> contributions;
  contributions.reserve(pairs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int attained = 0;
    for (int c = 0; c < width; ++c) {
      if (reprs(rows[i], c) >= pooled(sample, c)) ++attained;
    }
    InstanceContribution ic;
    ic.head_mention = pairs[i].first;
    ic.tail_mention = pairs[i].second;
    ic.contribution = static_cast<double>(attained) / static_cast<double>(width);
    ic.token_dist =
        token_distance(spans[static_cast<std::size_t>(pairs[i].first)],
                       spans[static_cast<std::size_t>(pairs[i].second)]);
    contributions.push_back(ic);
  }
  std::sort(contributions.begin(), contributions.end(),
            [](const InstanceContribution& a, const InstanceContribution& b) {
              if (a.contribution != b.contribution) {
                return a.contribution > b.contribution;
              }
              if (a.token_dist != b.token_dist) return a.token_dist < b.token_dist;
              return std::pair(a.head_mention, a.tail_mention) <
                     std::pair(b.head_mention, b.tail_mention);
            });
  if (k >= 0 && static_cast<std::size_t>(k) < contributions.size()) {
    contributions.resize(static_cast<std::size_t>(k));
  }
  return contributions;
}

}  // namespace relex
