#pragma once

// Independent reference implementations used as oracles by the unit and
// acceptance suites. These deliberately favor directness over speed and
// share no code with the library paths they check.

#include <algorithm>
#include <limits>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "relex/evaluator.hpp"
#include "relex/types.hpp"

namespace oracle {

// Full-matrix Levenshtein (the library uses a two-row rolling variant).
inline int levenshtein(const std::string& a, const std::string& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[n][m];
}

// Greedy complete-linkage agglomeration, recomputed from scratch at every
// step straight from the definition: linkage = min pairwise similarity over
// the cross product, merge the highest linkage >= threshold, ties broken by
// the smallest (min representative, max representative) pair.
inline std::vector<std::vector<int>> complete_linkage(
    const Eigen::MatrixXd& sims, double threshold) {
  const int m = static_cast<int>(sims.rows());
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < m; ++i) clusters.push_back({i});
  while (clusters.size() > 1) {
    double best = -std::numeric_limits<double>::infinity();
    std::pair<int, int> best_key{-1, -1};
    std::pair<std::size_t, std::size_t> best_pair{0, 0};
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double link = std::numeric_limits<double>::infinity();
        for (int i : clusters[a]) {
          for (int j : clusters[b]) {
            link = std::min(link, sims(i, j));
          }
        }
        const int rep_a = *std::min_element(clusters[a].begin(), clusters[a].end());
        const int rep_b = *std::min_element(clusters[b].begin(), clusters[b].end());
        const std::pair<int, int> key{std::min(rep_a, rep_b), std::max(rep_a, rep_b)};
        if (link > best || (link == best && key < best_key)) {
          best = link;
          best_key = key;
          best_pair = {a, b};
        }
      }
    }
    if (best < threshold) break;
    auto& target = clusters[best_pair.first];
    auto& source = clusters[best_pair.second];
    target.insert(target.end(), source.begin(), source.end());
    clusters.erase(clusters.begin() + static_cast<long>(best_pair.second));
  }
  for (auto& cluster : clusters) std::sort(cluster.begin(), cluster.end());
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return clusters;
}

// Brute-force strict matcher: every count is a nested scan, no hashing.
struct BruteCounts {
  long predicted = 0;
  long gold = 0;
  long matched = 0;
};

inline bool same_cluster(const relex::DocAnnotation& pa, const std::vector<int>& ca,
                         const relex::DocAnnotation& pb, const std::vector<int>& cb) {
  std::vector<relex::Span> sa;
  std::vector<relex::Span> sb;
  for (int m : ca) sa.push_back(pa.mentions[static_cast<std::size_t>(m)]);
  for (int m : cb) sb.push_back(pb.mentions[static_cast<std::size_t>(m)]);
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  return sa == sb;
}

inline BruteCounts match_mentions(const relex::DocAnnotation& pred,
                                  const relex::DocAnnotation& gold) {
  std::vector<relex::Span> p = pred.mentions;
  std::vector<relex::Span> g = gold.mentions;
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  BruteCounts c;
  c.predicted = static_cast<long>(p.size());
  c.gold = static_cast<long>(g.size());
  for (const relex::Span& s : p) {
    for (const relex::Span& t : g) {
      if (s == t) {
        ++c.matched;
        break;
      }
    }
  }
  return c;
}

inline BruteCounts match_clusters(const relex::DocAnnotation& pred,
                                  const relex::DocAnnotation& gold,
                                  bool with_types) {
  BruteCounts c;
  c.predicted = static_cast<long>(pred.clusters.size());
  c.gold = static_cast<long>(gold.clusters.size());
  for (std::size_t i = 0; i < pred.clusters.size(); ++i) {
    for (std::size_t j = 0; j < gold.clusters.size(); ++j) {
      if (!same_cluster(pred, pred.clusters[i], gold, gold.clusters[j])) continue;
      if (with_types && pred.cluster_types[i] != gold.cluster_types[j]) continue;
      ++c.matched;
      break;
    }
  }
  return c;
}

inline BruteCounts match_relations(const relex::DocAnnotation& pred,
                                   const relex::DocAnnotation& gold) {
  auto entity_equal = [&](int pc, int gc) {
    return same_cluster(pred, pred.clusters[static_cast<std::size_t>(pc)], gold,
                        gold.clusters[static_cast<std::size_t>(gc)]) &&
           pred.cluster_types[static_cast<std::size_t>(pc)] ==
               gold.cluster_types[static_cast<std::size_t>(gc)];
  };
  auto dedup = [](std::vector<relex::RelationTriple> rels) {
    std::sort(rels.begin(), rels.end());
    rels.erase(std::unique(rels.begin(), rels.end()), rels.end());
    return rels;
  };
  const auto p = dedup(pred.relations);
  const auto g = dedup(gold.relations);
  BruteCounts c;
  c.predicted = static_cast<long>(p.size());
  c.gold = static_cast<long>(g.size());
  for (const relex::RelationTriple& pr : p) {
    for (const relex::RelationTriple& gr : g) {
      if (pr.relation_type == gr.relation_type &&
          entity_equal(pr.head, gr.head) && entity_equal(pr.tail, gr.tail)) {
        ++c.matched;
        break;
      }
    }
  }
  return c;
}

// Spans of length 1..max_len inside one sentence of n tokens.
inline long span_count_closed_form(long n, long max_len) {
  const long l = std::min(n, max_len);
  return n * l - l * (l - 1) / 2;
}

}  // namespace oracle
