#pragma once

#include <random>
#include <utility>
#include <vector>

#include "relex/config.hpp"
#include "relex/encoder.hpp"
#include "relex/nn/graph.hpp"
#include "relex/types.hpp"

namespace relex {

// Boundary gap between two spans in tokens; 0 when they overlap or touch.
int token_distance(const Span& a, const Span& b);
// Token range strictly between the two spans (empty when adjacent/overlapping).
std::pair<int, int> between_range(const Span& a, const Span& b);

struct InstanceContribution {
  int head_mention = 0;  // global mention index
  int tail_mention = 0;
  double contribution = 0.0;  // fraction of pooled coordinates this pair attains
  int token_dist = 0;
};

// Multi-label scoring of directed entity pairs over the relation type set.
// Two heads: GRC consumes global entity representations only; MRC fuses
// per-mention-pair representations (local spans, localized context, distance
// embeddings) by max-pooling. Supports dropping the entity representations,
// dropping the localized context, and restricting to intra-sentence pairs.
class RelationClassifier {
 public:
  RelationClassifier(const ModelConfig& cfg, nn::ParameterStore& params,
                     std::mt19937_64& init_rng);

  int num_relation_types() const { return num_relations_; }
  int grc_feature_width() const { return 2 * (hidden_ + kMetaEmbeddingSize); }
  // u' width: mention pair block + localized context + two distance embeddings.
  int mrc_pair_feature_width() const;
  int mrc_pair_repr_width() const { return hidden_; }  // u'' width
  int mrc_final_feature_width() const { return hidden_ + 2 * kMetaEmbeddingSize; }

  // GRC logits for ordered cluster pairs; pair_types holds (head, tail)
  // entity type indices.
  nn::Var grc_logits(nn::Graph& g, nn::Var entity_reprs,
                     const std::vector<std::pair<int, int>>& pairs,
                     const std::vector<std::pair<int, int>>& pair_types,
                     double dropout = 0.0) const;

  // Mention pairs fused per sample under the configured pairing policy:
  // full cross product, or intra-sentence pairs with a closest-pair
  // fallback. head/tail are mention index lists of the two clusters.
  std::vector<std::pair<int, int>> select_instances(
      const std::vector<Span>& spans, const Document& doc,
      const std::vector<int>& head_mentions,
      const std::vector<int>& tail_mentions) const;

  // u'' rows (one per mention pair); pair_entities maps each mention pair to
  // its (head cluster, tail cluster) rows in entity_reprs.
  nn::Var mention_pair_representations(
      nn::Graph& g, const EncodedDocument& encoded, nn::Var mention_reprs,
      const std::vector<Span>& spans, const Document& doc,
      nn::Var entity_reprs,
      const std::vector<std::pair<int, int>>& mention_pairs,
      const std::vector<std::pair<int, int>>& pair_entities,
      double dropout = 0.0) const;

  struct MrcForward {
    nn::Var logits;   // samples x relation types
    nn::Var pooled;   // samples x hidden (fused mention pair representation)
    nn::Var instance_reprs;  // total instances x hidden
    std::vector<std::vector<int>> instance_rows;  // per sample, rows in instance_reprs
    std::vector<std::vector<std::pair<int, int>>> instance_pairs;  // per sample
  };

  MrcForward mrc_forward(nn::Graph& g, const EncodedDocument& encoded,
                         nn::Var mention_reprs, const std::vector<Span>& spans,
                         const Document& doc, nn::Var entity_reprs,
                         const std::vector<std::vector<int>>& clusters,
                         const std::vector<std::pair<int, int>>& pairs,
                         const std::vector<std::pair<int, int>>& pair_types,
                         double dropout = 0.0) const;

  // Mention pairs of one sample ranked by their contribution to the pooled
  // representation (fraction of coordinates where the pair attains the max;
  // tied coordinates count for every attaining pair). Ordered by
  // contribution descending, then token distance ascending, then mention
  // indices. k < 0 or k > pair count returns all pairs.
  std::vector<InstanceContribution> top_instances(nn::Graph& g,
                                                  const MrcForward& fwd,
                                                  int sample, int k,
                                                  const std::vector<Span>& spans) const;

 private:
  int hidden_;
  int num_relations_;
  bool ablate_entity_repr_;
  bool ablate_local_context_;
  bool intra_sentence_only_;
  int max_sentence_distance_;
  int max_token_distance_;

  nn::Parameter* type_table_;       // entity type embeddings (shared GRC/MRC)
  nn::Parameter* sent_dist_table_;  // rows: clipped sentence distance
  nn::Parameter* tok_dist_table_;   // rows: clipped token distance
  // GRC two-layer FFNN
  nn::Parameter* grc_w1_;
  nn::Parameter* grc_b1_;
  nn::Parameter* grc_w2_;
  nn::Parameter* grc_b2_;
  // MRC: single projection to hidden, then two-layer FFNN
  nn::Parameter* pair_w_;
  nn::Parameter* pair_b_;
  nn::Parameter* mrc_w1_;
  nn::Parameter* mrc_b1_;
  nn::Parameter* mrc_w2_;
  nn::Parameter* mrc_b2_;
};

}  // namespace relex
