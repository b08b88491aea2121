#pragma once

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "relex/types.hpp"

namespace relex {

// Predicted structure of one document in evaluator-normal form.
struct DocAnnotation {
  std::string doc_id;
  std::vector<Span> mentions;
  std::vector<std::vector<int>> clusters;  // mention indices
  std::vector<std::string> cluster_types;  // parallel to clusters
  std::vector<RelationTriple> relations;   // cluster indices

  static DocAnnotation from_gold(const Document& doc);
};

struct MatchCounts {
  long predicted = 0;
  long gold = 0;
  long matched = 0;

  MatchCounts& operator+=(const MatchCounts& other);
};

struct LevelMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long predicted = 0;
  long gold = 0;
  long matched = 0;
};

// Zero-denominator precision/recall are 0; F1 of (0, 0) is 0.
LevelMetrics metrics_from_counts(const MatchCounts& counts);

struct MetricReport {
  std::map<std::string, LevelMetrics> levels;
  nlohmann::json to_json() const;
};

// Strict per-document matching. Mentions: exact span sets. Clusters: exact
// set-of-spans equality. Entities: cluster plus type. Relations
// (end-to-end): both argument entities correct plus the relation type; gold
// duplicates are removed before counting.
MatchCounts count_mentions(const DocAnnotation& pred, const DocAnnotation& gold);
MatchCounts count_clusters(const DocAnnotation& pred, const DocAnnotation& gold);
MatchCounts count_entities(const DocAnnotation& pred, const DocAnnotation& gold);
MatchCounts count_relations(const DocAnnotation& pred, const DocAnnotation& gold);

// Micro-averaged strict report over parallel prediction/gold lists at the
// four levels: mention, coref, entity, relation.
MetricReport evaluate_end_to_end(const std::vector<DocAnnotation>& preds,
                                 const std::vector<Document>& gold);

// Relation predictions against gold entity indices (the dataset's
// (h_idx, t_idx, r) convention); one list per document.
struct GoldEntityRelations {
  std::string doc_id;
  std::vector<RelationTriple> relations;
};

// Facts seen in the train split: (head name, relation, tail name) over all
// mention-name combinations of the argument entities. Used for Ign-F1.
class TrainFactIndex {
 public:
  static TrainFactIndex build(const std::vector<Document>& train_docs);
  bool contains(const std::set<std::string>& head_names, const std::string& rel,
                const std::set<std::string>& tail_names) const;
  std::size_t size() const { return facts_.size(); }

 private:
  std::set<std::tuple<std::string, std::string, std::string>> facts_;
};

struct RelationOnlyMetrics {
  LevelMetrics f1;
  LevelMetrics ign_f1;  // correct predictions of train-set facts ignored
};

RelationOnlyMetrics evaluate_gold_entities(
    const std::vector<GoldEntityRelations>& preds,
    const std::vector<Document>& gold, const TrainFactIndex* train_facts);

// DocRED submission format: [{title, h_idx, t_idx, r}, ...].
nlohmann::json submission_json(const std::vector<GoldEntityRelations>& preds);

}  // namespace relex
