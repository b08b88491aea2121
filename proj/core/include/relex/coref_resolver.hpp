#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "relex/config.hpp"
#include "relex/encoder.hpp"
#include "relex/nn/graph.hpp"
#include "relex/types.hpp"

namespace relex {

// Standard edit distance with unit insert/delete/substitute costs.
int levenshtein(const std::string& a, const std::string& b);

// Pairwise mention similarity plus complete-linkage agglomeration into
// entity clusters. The pair classifier consumes both span representations
// and an embedded, clipped Levenshtein distance between the mention
// surfaces (space-joined dataset tokens, case-sensitive).
class CorefResolver {
 public:
  CorefResolver(const ModelConfig& cfg, nn::ParameterStore& params,
                std::mt19937_64& init_rng);

  int feature_width() const { return 2 * hidden_ + kMetaEmbeddingSize; }
  int max_edit_distance() const { return max_edit_distance_; }

  // Logits for ordered mention pairs; `distances` holds the unclipped edit
  // distance per pair (clipping to the table happens here).
  nn::Var pair_logits(nn::Graph& g, nn::Var mention_reprs,
                      const std::vector<std::pair<int, int>>& pairs,
                      const std::vector<int>& distances,
                      double dropout = 0.0) const;

  // m x m symmetrized similarity matrix over the given mention spans:
  // the classifier is not symmetric in its arguments, so each unordered
  // pair is scored in both orders and averaged. Diagonal is 1.
  Eigen::MatrixXd build_similarity_matrix(nn::Graph& g, nn::Var mention_reprs,
                                          const Document& doc,
                                          const std::vector<Span>& spans) const;

  // Complete-linkage agglomeration on similarities: cluster pairs merge
  // greedily by highest linkage (the minimum pairwise similarity between
  // them) until none reaches the threshold. Equal linkages are broken by
  // the lexicographically smallest pair of cluster representatives (each
  // cluster's minimum mention index). Returns a partition; clusters are
  // sorted by smallest member, members ascending.
  static std::vector<std::vector<int>> cluster(const Eigen::MatrixXd& sims,
                                               double threshold);

 private:
  int hidden_;
  int max_edit_distance_;
  nn::Parameter* distance_table_;  // rows: distance 0..D_max (clipped)
  nn::Parameter* w1_;
  nn::Parameter* b1_;
  nn::Parameter* w2_;
  nn::Parameter* b2_;
};

}  // namespace relex
