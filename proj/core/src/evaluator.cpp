#include "relex/evaluator.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "relex/errors.hpp"

namespace relex {

using nlohmann::json;

DocAnnotation DocAnnotation::from_gold(const Document& doc) {
  DocAnnotation ann;
  ann.doc_id = doc.doc_id;
  for (const Mention& m : doc.gold_mentions) ann.mentions.push_back(m.span);
  for (const EntityCluster& c : doc.gold_clusters) {
    ann.clusters.push_back(c.mentions);
    ann.cluster_types.push_back(c.entity_type);
  }
  ann.relations = doc.deduplicated_relations();
  return ann;
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& other) {
  predicted += other.predicted;
  gold += other.gold;
  matched += other.matched;
  return *this;
}

LevelMetrics metrics_from_counts(const MatchCounts& c) {
  LevelMetrics m;
  m.predicted = c.predicted;
  m.gold = c.gold;
  m.matched = c.matched;
  m.precision = c.predicted == 0
                    ? 0.0
                    : static_cast<double>(c.matched) / static_cast<double>(c.predicted);
  m.recall = c.gold == 0
                 ? 0.0
                 : static_cast<double>(c.matched) / static_cast<double>(c.gold);
  m.f1 = (m.precision + m.recall) == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

json MetricReport::to_json() const {
  json j;
  for (const auto& [level, m] : levels) {
    j[level] = {{"precision", m.precision}, {"recall", m.recall},
                {"f1", m.f1},               {"predicted", m.predicted},
                {"gold", m.gold},           {"matched", m.matched}};
  }
  return j;
}

namespace {

using SpanSet = std::set<Span>;
using EntityKey = std::pair<SpanSet, std::string>;

std::set<Span> mention_set(const DocAnnotation& ann) {
  return {ann.mentions.begin(), ann.mentions.end()};
}

SpanSet cluster_spans(const DocAnnotation& ann, const std::vector<int>& cluster) {
  SpanSet spans;
  for (int m : cluster) spans.insert(ann.mentions[static_cast<std::size_t>(m)]);
  return spans;
}

std::vector<SpanSet> all_cluster_spans(const DocAnnotation& ann) {
  std::vector<SpanSet> out;
  out.reserve(ann.clusters.size());
  for (const auto& cluster : ann.clusters) {
    out.push_back(cluster_spans(ann, cluster));
  }
  return out;
}

std::vector<RelationTriple> dedup_relations(const std::vector<RelationTriple>& rels) {
  std::set<RelationTriple> seen(rels.begin(), rels.end());
  return {seen.begin(), seen.end()};
}

}  // namespace

MatchCounts count_mentions(const DocAnnotation& pred, const DocAnnotation& gold) {
  const std::set<Span> p = mention_set(pred);
  const std::set<Span> g = mention_set(gold);
  MatchCounts c;
  c.predicted = static_cast<long>(p.size());
  c.gold = static_cast<long>(g.size());
  for (const Span& span : p) c.matched += g.count(span);
  return c;
}

MatchCounts count_clusters(const DocAnnotation& pred, const DocAnnotation& gold) {
  const std::set<SpanSet> g = [&] {
    const auto v = all_cluster_spans(gold);
    return std::set<SpanSet>(v.begin(), v.end());
  }();
  MatchCounts c;
  c.predicted = static_cast<long>(pred.clusters.size());
  c.gold = static_cast<long>(gold.clusters.size());
  for (const SpanSet& spans : all_cluster_spans(pred)) {
    c.matched += g.count(spans);
  }
  return c;
}

MatchCounts count_entities(const DocAnnotation& pred, const DocAnnotation& gold) {
  std::set<EntityKey> g;
  for (std::size_t i = 0; i < gold.clusters.size(); ++i) {
    g.insert({cluster_spans(gold, gold.clusters[i]), gold.cluster_types[i]});
  }
  MatchCounts c;
  c.predicted = static_cast<long>(pred.clusters.size());
  c.gold = static_cast<long>(gold.clusters.size());
  for (std::size_t i = 0; i < pred.clusters.size(); ++i) {
    c.matched += g.count({cluster_spans(pred, pred.clusters[i]),
                          pred.cluster_types[i]});
  }
  return c;
}

MatchCounts count_relations(const DocAnnotation& pred, const DocAnnotation& gold) {
  // A relation is correct when both argument entities (cluster AND type)
  // are correct and the relation type matches.
  using RelKey = std::tuple<EntityKey, std::string, EntityKey>;
  auto keys = [](const DocAnnotation& ann,
                 const std::vector<RelationTriple>& rels) {
    std::set<RelKey> out;
    for (const RelationTriple& rel : rels) {
      out.insert({{cluster_spans(ann, ann.clusters[static_cast<std::size_t>(rel.head)]),
                   ann.cluster_types[static_cast<std::size_t>(rel.head)]},
                  rel.relation_type,
                  {cluster_spans(ann, ann.clusters[static_cast<std::size_t>(rel.tail)]),
                   ann.cluster_types[static_cast<std::size_t>(rel.tail)]}});
    }
    return out;
  };
  const std::set<RelKey> p = keys(pred, dedup_relations(pred.relations));
  const std::set<RelKey> g = keys(gold, dedup_relations(gold.relations));
  MatchCounts c;
  c.predicted = static_cast<long>(p.size());
  c.gold = static_cast<long>(g.size());
  for (const RelKey& key : p) c.matched += g.count(key);
  return c;
}

MetricReport evaluate_end_to_end(const std::vector<DocAnnotation>& preds,
                                 const std::vector<Document>& gold) {
  if (preds.size() != gold.size()) {
    throw DataError("prediction/gold document count mismatch");
  }
  MatchCounts mention_counts;
  MatchCounts cluster_counts;
  MatchCounts entity_counts;
  MatchCounts relation_counts;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const DocAnnotation gold_ann = DocAnnotation::from_gold(gold[i]);
    mention_counts += count_mentions(preds[i], gold_ann);
    cluster_counts += count_clusters(preds[i], gold_ann);
    entity_counts += count_entities(preds[i], gold_ann);
    relation_counts += count_relations(preds[i], gold_ann);
  }
  MetricReport report;
  report.levels["mention"] = metrics_from_counts(mention_counts);
  report.levels["coref"] = metrics_from_counts(cluster_counts);
  report.levels["entity"] = metrics_from_counts(entity_counts);
  report.levels["relation"] = metrics_from_counts(relation_counts);
  return report;
}

TrainFactIndex TrainFactIndex::build(const std::vector<Document>& train_docs) {
  TrainFactIndex index;
  for (const Document& doc : train_docs) {
    for (const RelationTriple& rel : doc.deduplicated_relations()) {
      const EntityCluster& head =
          doc.gold_clusters[static_cast<std::size_t>(rel.head)];
      const EntityCluster& tail =
          doc.gold_clusters[static_cast<std::size_t>(rel.tail)];
      for (int hm : head.mentions) {
        for (int tm : tail.mentions) {
          index.facts_.insert(
              {doc.span_surface(doc.gold_mentions[static_cast<std::size_t>(hm)].span),
               rel.relation_type,
               doc.span_surface(doc.gold_mentions[static_cast<std::size_t>(tm)].span)});
        }
      }
    }
  }
  return index;
}

bool TrainFactIndex::contains(const std::set<std::string>& head_names,
                              const std::string& rel,
                              const std::set<std::string>& tail_names) const {
  for (const std::string& h : head_names) {
    for (const std::string& t : tail_names) {
      if (facts_.count({h, rel, t}) > 0) return true;
    }
  }
  return false;
}

RelationOnlyMetrics evaluate_gold_entities(
    const std::vector<GoldEntityRelations>& preds,
    const std::vector<Document>& gold, const TrainFactIndex* train_facts) {
  if (preds.size() != gold.size()) {
    throw DataError("prediction/gold document count mismatch");
  }
  long predicted = 0;
  long gold_count = 0;
  long matched = 0;
  long matched_in_train = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Document& doc = gold[i];
    const auto gold_rels = dedup_relations(doc.gold_relations);
    const std::set<RelationTriple> gold_set(gold_rels.begin(), gold_rels.end());
    const auto pred_rels = dedup_relations(preds[i].relations);
    predicted += static_cast<long>(pred_rels.size());
    gold_count += static_cast<long>(gold_rels.size());
    for (const RelationTriple& rel : pred_rels) {
      if (gold_set.count(rel) == 0) continue;
      ++matched;
      if (train_facts != nullptr) {
        auto names = [&](int cluster) {
          std::set<std::string> out;
          for (int m :
               doc.gold_clusters[static_cast<std::size_t>(cluster)].mentions) {
            out.insert(doc.span_surface(
                doc.gold_mentions[static_cast<std::size_t>(m)].span));
          }
          return out;
        };
        if (train_facts->contains(names(rel.head), rel.relation_type,
                                  names(rel.tail))) {
          ++matched_in_train;
        }
      }
    }
  }
  RelationOnlyMetrics out;
  out.f1 = metrics_from_counts({predicted, gold_count, matched});
  // Mirrors the reference scorer: correct predictions of facts already seen
  // in training are removed from the precision's numerator and denominator;
  // recall is unchanged.
  LevelMetrics ign;
  ign.predicted = predicted - matched_in_train;
  ign.gold = gold_count;
  ign.matched = matched - matched_in_train;
  ign.precision = ign.predicted == 0
                      ? 0.0
                      : static_cast<double>(ign.matched) /
                            static_cast<double>(ign.predicted);
  ign.recall = out.f1.recall;
  ign.f1 = (ign.precision + ign.recall) == 0.0
               ? 0.0
               : 2.0 * ign.precision * ign.recall / (ign.precision + ign.recall);
  out.ign_f1 = ign;
  return out;
}

json submission_json(const std::vector<GoldEntityRelations>& preds) {
  json out = json::array();
  for (const GoldEntityRelations& doc : preds) {
    for (const RelationTriple& rel : dedup_relations(doc.relations)) {
      out.push_back({{"title", doc.doc_id},
                     {"h_idx", rel.head},
                     {"t_idx", rel.tail},
                     {"r", rel.relation_type}});
    }
  }
  return out;
}

}  // namespace relex
