#include "relex/coref_resolver.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace relex {

using nn::Graph;
using nn::Var;

int levenshtein(const std::string& a, const std::string& b) {
  const std::size_t n = b.size();
  if (a.empty()) return static_cast<int>(n);
  if (b.empty()) return static_cast<int>(a.size());
  std::vector<int> costs(n + 1);
  for (std::size_t j = 0; j <= n; ++j) costs[j] = static_cast<int>(j);
  for (std::size_t i = 0; i < a.size(); ++i) {
    int corner = costs[0];
    costs[0] = static_cast<int>(i) + 1;
    for (std::size_t j = 0; j < n; ++j) {
      const int upper = costs[j + 1];
      if (a[i] == b[j]) {
        costs[j + 1] = corner;
      } else {
        costs[j + 1] = std::min({upper, corner, costs[j]}) + 1;
      }
      corner = upper;
    }
  }
  return costs[n];
}

CorefResolver::CorefResolver(const ModelConfig& cfg,
                             nn::ParameterStore& params,
                             std::mt19937_64& init_rng)
    : hidden_(cfg.encoder_hidden),
      max_edit_distance_(cfg.coref_max_edit_distance) {
  const int ffnn_hidden = cfg.resolved_ffnn_hidden();
  distance_table_ = &params.create("coref.distance_table",
                                   max_edit_distance_ + 1, kMetaEmbeddingSize);
  nn::init_normal(distance_table_->value, init_rng);
  w1_ = &params.create("coref.w1", feature_width(), ffnn_hidden);
  nn::init_normal(w1_->value, init_rng);
  b1_ = &params.create("coref.b1", 1, ffnn_hidden);
  b1_->decay = false;
  w2_ = &params.create("coref.w2", ffnn_hidden, 1);
  nn::init_normal(w2_->value, init_rng);
  b2_ = &params.create("coref.b2", 1, 1);
  b2_->decay = false;
}

Var CorefResolver::pair_logits(Graph& g, Var mention_reprs,
                               const std::vector<std::pair<int, int>>& pairs,
                               const std::vector<int>& distances,
                               double dropout) const {
  std::vector<int> firsts;
  std::vector<int> seconds;
  std::vector<int> dist_ids;
  firsts.reserve(pairs.size());
  seconds.reserve(pairs.size());
  dist_ids.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    firsts.push_back(pairs[i].first);
    seconds.push_back(pairs[i].second);
    dist_ids.push_back(std::min(distances[i], max_edit_distance_));
  }
  Var e1 = g.select_rows(mention_reprs, std::move(firsts));
  Var e2 = g.select_rows(mention_reprs, std::move(seconds));
  Var dist_emb = g.select_rows(g.param(*distance_table_), std::move(dist_ids));
  Var features = g.dropout(g.concat_cols({e1, e2, dist_emb}), dropout);
  Var inner = g.relu(g.linear(features, *w1_, *b1_));
  return g.linear(inner, *w2_, *b2_);
}

Eigen::MatrixXd CorefResolver::build_similarity_matrix(
    Graph& g, Var mention_reprs, const Document& doc,
    const std::vector<Span>& spans) const {
  const int m = static_cast<int>(spans.size());
  Eigen::MatrixXd sims = Eigen::MatrixXd::Identity(m, m);
  if (m < 2) return sims;

  // Levenshtein memoized per surface pair within the document.
  std::vector<std::string> surfaces;
  surfaces.reserve(spans.size());
  for (const Span& span : spans) surfaces.push_back(doc.span_surface(span));
  std::map<std::pair<std::string, std::string>, int> memo;
  auto distance = [&](int i, int j) {
    std::pair<std::string, std::string> key(surfaces[static_cast<std::size_t>(i)],
                                            surfaces[static_cast<std::size_t>(j)]);
    if (key.first > key.second) std::swap(key.first, key.second);
    const auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const int d = levenshtein(key.first, key.second);
    memo.emplace(std::move(key), d);
    return d;
  };

  std::vector<std::pair<int, int>> pairs;
  std::vector<int> distances;
  pairs.reserve(static_cast<std::size_t>(m) * (m - 1));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      pairs.emplace_back(i, j);
      distances.push_back(distance(i, j));
    }
  }
  Var probs = g.sigmoid(pair_logits(g, mention_reprs, pairs, distances));
  const nn::Matrix& p = g.value(probs);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    sims(pairs[k].first, pairs[k].second) =
        p(static_cast<Eigen::Index>(k), 0);
  }
  // Mean of the two orderings keeps clustering well-defined.
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double s = 0.5 * (sims(i, j) + sims(j, i));
      sims(i, j) = s;
      sims(j, i) = s;
    }
  }
  return sims;
}

std::vector<std::vector<int>> CorefResolver::cluster(
    const Eigen::MatrixXd& sims, double threshold) {
  const int m = static_cast<int>(sims.rows());
  std::vector<std::vector<int>> clusters;
  clusters.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) clusters.push_back({i});
  if (m < 2) return clusters;

  // linkage[a][b] = min pairwise similarity between clusters a and b;
  // maintained incrementally (complete linkage: min of the merged rows).
  std::vector<std::vector<double>> linkage(
      static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m)));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) linkage[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = sims(i, j);
  }
  std::vector<bool> alive(static_cast<std::size_t>(m), true);
  // Each cluster's representative is its minimum mention index; since
  // clusters start as singletons {i} and merges keep the smaller
  // representative, cluster index == representative.
  while (true) {
    double best_sim = -std::numeric_limits<double>::infinity();
    int best_a = -1;
    int best_b = -1;
    for (int a = 0; a < m; ++a) {
      if (!alive[static_cast<std::size_t>(a)]) continue;
      for (int b = a + 1; b < m; ++b) {
        if (!alive[static_cast<std::size_t>(b)]) continue;
        const double link = linkage[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        // Ties: lexicographically smallest (representative a, b) pair wins;
        // the scan order visits pairs in exactly that order, so strict
        // improvement implements the tie-break.
        if (link > best_sim) {
          best_sim = link;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (best_a < 0 || best_sim < threshold) break;
    auto& target = clusters[static_cast<std::size_t>(best_a)];
    auto& source = clusters[static_cast<std::size_t>(best_b)];
    target.insert(target.end(), source.begin(), source.end());
    source.clear();
    alive[static_cast<std::size_t>(best_b)] = false;
    for (int c = 0; c < m; ++c) {
      if (!alive[static_cast<std::size_t>(c)] || c == best_a) continue;
      const double merged =
          std::min(linkage[static_cast<std::size_t>(best_a)][static_cast<std::size_t>(c)],
                   linkage[static_cast<std::size_t>(best_b)][static_cast<std::size_t>(c)]);
      linkage[static_cast<std::size_t>(best_a)][static_cast<std::size_t>(c)] = merged;
      linkage[static_cast<std::size_t>(c)][static_cast<std::size_t>(best_a)] = merged;
    }
  }

  std::vector<std::vector<int>> out;
  for (auto& cluster : clusters) {
    if (cluster.empty()) continue;
    std::sort(cluster.begin(), cluster.end());
    out.push_back(std::move(cluster));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

}  // namespace relex
