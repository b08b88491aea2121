#pragma once

#include <random>
#include <string>
#include <vector>

#include "relex/config.hpp"
#include "relex/nn/graph.hpp"

namespace relex {

struct EntityTypeDecision {
  int type_index = 0;
  std::vector<double> distribution;  // over the configured type order

  double score() const { return distribution[static_cast<std::size_t>(type_index)]; }
};

// Types entity clusters from the max-pool over their mention span
// representations; softmax classifier with argmax decision, ties broken by
// the smallest type index in the configured order.
class EntityClassifier {
 public:
  EntityClassifier(const ModelConfig& cfg, nn::ParameterStore& params,
                   std::mt19937_64& init_rng);

  int num_types() const { return num_types_; }

  // Row k = coordinatewise max over the mention representation rows listed
  // in clusters[k]; clusters must be non-empty.
  nn::Var entity_representations(nn::Graph& g, nn::Var mention_reprs,
                                 const std::vector<std::vector<int>>& clusters) const;

  nn::Var entity_logits(nn::Graph& g, nn::Var entity_reprs,
                        double dropout = 0.0) const;

  std::vector<EntityTypeDecision> classify(nn::Graph& g, nn::Var entity_reprs) const;

 private:
  int hidden_;
  int num_types_;
  nn::Parameter* w1_;
  nn::Parameter* b1_;
  nn::Parameter* w2_;
  nn::Parameter* b2_;
};

}  // namespace relex
