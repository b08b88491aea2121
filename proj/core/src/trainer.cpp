#include "relex/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>

#include "relex/docred.hpp"
#include "relex/errors.hpp"
#include "relex/inference.hpp"
#include "relex/nn/optimizer.hpp"

namespace relex {

using nn::Graph;
using nn::Matrix;
using nn::Var;

uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
  // splitmix64 over the combined words
  uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1) + 0xbf58476d1ce4e5b9ULL * (c + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::vector<Span> sample_mention_negatives(const Document& doc, int n_s,
                                           int max_len, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::set<Span> gold;
  for (const Mention& m : doc.gold_mentions) gold.insert(m.span);

  std::set<Span> chosen;
  std::vector<Span> out;
  auto push = [&](const Span& s) {
    if (gold.count(s) > 0 || !chosen.insert(s).second) return false;
    out.push_back(s);
    return true;
  };

  // Intra-mention negatives: strict sub-spans of gold mentions.
  std::vector<Span> sub_spans;
  {
    std::set<Span> seen;
    for (const Mention& m : doc.gold_mentions) {
      for (int start = m.span.start; start < m.span.end; ++start) {
        for (int end = start + 1; end <= m.span.end; ++end) {
          const Span s{start, end};
          if (s == m.span || s.length() > max_len) continue;
          if (gold.count(s) > 0) continue;
          if (seen.insert(s).second) sub_spans.push_back(s);
        }
      }
    }
  }
  std::shuffle(sub_spans.begin(), sub_spans.end(), rng);
  const int max_intra = n_s / 2;
  int intra_taken = 0;
  for (const Span& s : sub_spans) {
    if (intra_taken >= max_intra) break;
    if (push(s)) ++intra_taken;
  }

  // Fill to n_s with random intra-sentence spans.
  std::vector<Span> candidates;
  for (const Sentence& sent : doc.sentences) {
    for (int start = sent.start; start < sent.end; ++start) {
      const int limit = std::min(sent.end, start + max_len);
      for (int end = start + 1; end <= limit; ++end) {
        const Span s{start, end};
        if (gold.count(s) == 0 && chosen.count(s) == 0) candidates.push_back(s);
      }
    }
  }
  std::shuffle(candidates.begin(), candidates.end(), rng);
  for (const Span& s : candidates) {
    if (static_cast<int>(out.size()) >= n_s) break;
    push(s);
  }
  return out;
}

CorefSamples sample_coref_pairs(const Document& doc, int n_c, uint64_t seed) {
  CorefSamples samples;
  for (const EntityCluster& cluster : doc.gold_clusters) {
    for (std::size_t i = 0; i < cluster.mentions.size(); ++i) {
      for (std::size_t j = i + 1; j < cluster.mentions.size(); ++j) {
        samples.positives.emplace_back(
            std::min(cluster.mentions[i], cluster.mentions[j]),
            std::max(cluster.mentions[i], cluster.mentions[j]));
      }
    }
  }
  std::vector<int> owner(doc.gold_mentions.size(), -1);
  for (std::size_t c = 0; c < doc.gold_clusters.size(); ++c) {
    for (int m : doc.gold_clusters[c].mentions) {
      owner[static_cast<std::size_t>(m)] = static_cast<int>(c);
    }
  }
  std::vector<std::pair<int, int>> cross;
  const int m = static_cast<int>(doc.gold_mentions.size());
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (owner[static_cast<std::size_t>(i)] != owner[static_cast<std::size_t>(j)]) {
        cross.emplace_back(i, j);
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(cross.begin(), cross.end(), rng);
  if (static_cast<int>(cross.size()) > n_c) cross.resize(static_cast<std::size_t>(n_c));
  samples.negatives = std::move(cross);
  return samples;
}

std::vector<std::pair<int, int>> sample_relation_negatives(const Document& doc,
                                                           int n_r,
                                                           uint64_t seed) {
  std::set<std::pair<int, int>> related;
  for (const RelationTriple& rel : doc.gold_relations) {
    related.insert({rel.head, rel.tail});
  }
  std::vector<std::pair<int, int>> candidates;
  const int e = static_cast<int>(doc.gold_clusters.size());
  for (int i = 0; i < e; ++i) {
    for (int j = 0; j < e; ++j) {
      if (i != j && related.count({i, j}) == 0) candidates.emplace_back(i, j);
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  if (static_cast<int>(candidates.size()) > n_r) {
    candidates.resize(static_cast<std::size_t>(n_r));
  }
  return candidates;
}

Var joint_loss(Graph& g, const TaskLosses& losses, const TrainConfig& cfg) {
  std::vector<std::pair<Var, double>> terms;
  if (losses.span) terms.emplace_back(*losses.span, cfg.beta_span);
  if (losses.coref) terms.emplace_back(*losses.coref, cfg.beta_coref);
  if (losses.entity) terms.emplace_back(*losses.entity, cfg.beta_entity);
  if (losses.relation) terms.emplace_back(*losses.relation, cfg.beta_relation);
  if (terms.empty()) return g.constant(Matrix::Zero(1, 1));
  return g.weighted_sum(terms);
}

TaskLosses document_losses(const JointModel& model, Graph& g,
                           const Document& doc, const TrainConfig& cfg,
                           const TaskMask& mask, uint64_t sample_seed) {
  TaskLosses losses;
  const ModelConfig& mcfg = model.config();
  const double dropout = cfg.dropout;
  const int max_len = mcfg.mention_max_span_len;

  const EncodedDocument encoded = model.encoder().encode(g, doc, dropout);

  // Gold mention spans and their representations, shared by all heads.
  std::vector<Span> gold_spans;
  gold_spans.reserve(doc.gold_mentions.size());
  for (const Mention& m : doc.gold_mentions) gold_spans.push_back(m.span);

  if (mask.span) {
    std::vector<Span> spans;
    std::set<Span> seen;
    for (const Span& s : gold_spans) {
      // Spans longer than the size table cannot be scored; the trainer
      // reports their count in the manifest.
      if (s.length() > max_len) continue;
      if (seen.insert(s).second) spans.push_back(s);
    }
    const std::size_t positive_count = spans.size();
    for (const Span& s : sample_mention_negatives(
             doc, cfg.neg_mention_count, max_len, mix_seed(sample_seed, 1, 0))) {
      spans.push_back(s);
    }
    if (!spans.empty()) {
      Matrix targets = Matrix::Zero(static_cast<Eigen::Index>(spans.size()), 1);
      targets.topRows(static_cast<Eigen::Index>(positive_count)).setOnes();
      Var reprs =
          model.mention_localizer().span_representations(g, encoded, spans);
      Var logits = model.mention_localizer().span_logits(g, reprs, spans, dropout);
      losses.span = g.bce_with_logits(logits, std::move(targets));
    }
  }

  const bool need_mention_reprs = mask.coref || mask.entity || mask.relation;
  Var mention_reprs;
  if (need_mention_reprs && !gold_spans.empty()) {
    mention_reprs =
        model.mention_localizer().span_representations(g, encoded, gold_spans);
  }

  if (mask.coref && !gold_spans.empty()) {
    const CorefSamples samples =
        sample_coref_pairs(doc, cfg.neg_coref_count, mix_seed(sample_seed, 2, 0));
    // Each sampled pair is scored in both orders (the classifier is not
    // symmetric in its arguments).
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> distances;
    std::vector<double> labels;
    auto add = [&](const std::pair<int, int>& pr, double label) {
      const std::string a = doc.span_surface(gold_spans[static_cast<std::size_t>(pr.first)]);
      const std::string b = doc.span_surface(gold_spans[static_cast<std::size_t>(pr.second)]);
      const int d = levenshtein(a, b);
      pairs.push_back(pr);
      distances.push_back(d);
      labels.push_back(label);
      pairs.emplace_back(pr.second, pr.first);
      distances.push_back(d);
      labels.push_back(label);
    };
    for (const auto& pr : samples.positives) add(pr, 1.0);
    for (const auto& pr : samples.negatives) add(pr, 0.0);
    if (!pairs.empty()) {
      Matrix targets(static_cast<Eigen::Index>(labels.size()), 1);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        targets(static_cast<Eigen::Index>(i), 0) = labels[i];
      }
      Var logits = model.coref_resolver().pair_logits(g, mention_reprs, pairs,
                                                      distances, dropout);
      losses.coref = g.bce_with_logits(logits, std::move(targets));
    }
  }

  std::vector<std::vector<int>> gold_clusters;
  std::vector<int> gold_types;
  if ((mask.entity || mask.relation) && !doc.gold_clusters.empty()) {
    for (const EntityCluster& c : doc.gold_clusters) {
      gold_clusters.push_back(c.mentions);
      const int idx = mcfg.entity_type_index(c.entity_type);
      if (idx < 0) {
        throw ConfigError("entity type '" + c.entity_type +
                          "' missing from entity.types (document '" +
                          doc.doc_id + "')");
      }
      gold_types.push_back(idx);
    }
  }

  Var entity_reprs;
  if (!gold_clusters.empty() && (mask.entity || mask.relation)) {
    entity_reprs = model.entity_classifier().entity_representations(
        g, mention_reprs, gold_clusters);
  }

  if (mask.entity && !gold_clusters.empty()) {
    Var logits = model.entity_classifier().entity_logits(g, entity_reprs, dropout);
    losses.entity = g.softmax_cross_entropy(logits, gold_types);
  }

  if (mask.relation && gold_clusters.size() >= 2) {
    // Positives: distinct related ordered pairs with multi-hot targets.
    std::map<std::pair<int, int>, std::vector<int>> positives;
    for (const RelationTriple& rel : doc.deduplicated_relations()) {
      const int idx = mcfg.relation_type_index(rel.relation_type);
      if (idx < 0) {
        throw ConfigError("relation type '" + rel.relation_type +
                          "' missing from the resolved type set (document '" +
                          doc.doc_id + "')");
      }
      positives[{rel.head, rel.tail}].push_back(idx);
    }
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::pair<int, int>> pair_types;
    const int num_rel = model.relation_classifier().num_relation_types();
    std::vector<std::vector<int>> hot;
    for (const auto& [pr, types] : positives) {
      pairs.push_back(pr);
      hot.push_back(types);
    }
    for (const auto& pr : sample_relation_negatives(
             doc, cfg.neg_relation_count, mix_seed(sample_seed, 3, 0))) {
      pairs.push_back(pr);
      hot.push_back({});
    }
    for (const auto& pr : pairs) {
      pair_types.emplace_back(gold_types[static_cast<std::size_t>(pr.first)],
                              gold_types[static_cast<std::size_t>(pr.second)]);
    }
    if (!pairs.empty()) {
      Matrix targets = Matrix::Zero(static_cast<Eigen::Index>(pairs.size()), num_rel);
      for (std::size_t i = 0; i < hot.size(); ++i) {
        for (int t : hot[i]) targets(static_cast<Eigen::Index>(i), t) = 1.0;
      }
      Var logits;
      if (mcfg.rel_head == RelationHead::kMrc) {
        logits = model.relation_classifier()
                     .mrc_forward(g, encoded, mention_reprs, gold_spans, doc,
                                  entity_reprs, gold_clusters, pairs, pair_types,
                                  dropout)
                     .logits;
      } else {
        logits = model.relation_classifier().grc_logits(g, entity_reprs, pairs,
                                                        pair_types, dropout);
      }
      losses.relation = g.bce_with_logits(logits, std::move(targets));
    }
  }
  return losses;
}

namespace {

// FNV-1a, reported in the manifest to identify the training data.
std::string data_fingerprint(const std::vector<Document>& train,
                             const std::vector<Document>& dev) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto* docs : {&train, &dev}) {
    for (const Document& doc : *docs) {
      mix(doc.doc_id);
      for (const Token& t : doc.tokens) mix(t.surface);
      mix(std::to_string(doc.gold_mentions.size()));
      mix(std::to_string(doc.gold_relations.size()));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> resolve_relation_types(
    const ModelConfig& cfg, const std::vector<Document>& train_docs) {
  if (!cfg.relation_types.empty()) return cfg.relation_types;
  std::set<std::string> types;
  for (const Document& doc : train_docs) {
    for (const RelationTriple& rel : doc.gold_relations) {
      types.insert(rel.relation_type);
    }
  }
  if (types.empty()) {
    throw DataError("train split contains no relations; cannot resolve rel.types");
  }
  return {types.begin(), types.end()};
}

int count_long_gold_mentions(const std::vector<Document>& docs, int max_len) {
  int count = 0;
  for (const Document& doc : docs) {
    for (const Mention& m : doc.gold_mentions) {
      if (m.span.length() > max_len) ++count;
    }
  }
  return count;
}

struct ComponentRun {
  std::string name;
  TaskMask mask;
};

double selection_metric_joint(const MetricReport& report) {
  return report.levels.at("relation").f1;
}

}  // namespace

TrainResult Trainer::train(const std::vector<Document>& train_docs,
                           const std::vector<Document>& dev_docs,
                           const std::filesystem::path& out_dir) {
  if (train_docs.empty()) throw DataError("empty train set");
  validate_config(cfg_);

  Config cfg = cfg_;
  cfg.model.relation_types = resolve_relation_types(cfg.model, train_docs);
  for (const Document& doc : train_docs) {
    for (const EntityCluster& c : doc.gold_clusters) {
      if (cfg.model.entity_type_index(c.entity_type) < 0) {
        throw ConfigError("entity type '" + c.entity_type +
                          "' in train data is missing from entity.types");
      }
    }
  }

  const SubwordVocab vocab = SubwordVocab::build(
      train_docs, cfg.model.encoder_vocab_max, cfg.model.encoder_vocab_min_freq);

  const TrainConfig& tc = cfg.train;
  std::filesystem::create_directories(out_dir);

  TrainResult result;
  result.checkpoint_dir = out_dir;

  nlohmann::json manifest;
  manifest["config"] = config_entries(cfg);
  manifest["seed"] = tc.seed;
  manifest["data_fingerprint"] = data_fingerprint(train_docs, dev_docs);
  manifest["train_documents"] = train_docs.size();
  manifest["dev_documents"] = dev_docs.size();
  manifest["relation_types"] = cfg.model.relation_types.size();
  manifest["subword_vocab"] = vocab.size();
  manifest["notes"] = {
      "warmup fraction is a default, not taken from the source work",
      "subword-to-token pooling: " + to_string(cfg.model.encoder_subword_pool),
      "empty in-between context pools to the zero vector",
      "new position rows initialized from N(0, 0.02^2)",
      "optimizer: Adam, decoupled weight decay, linear warmup/decay"};
  const int long_mentions =
      count_long_gold_mentions(train_docs, cfg.model.mention_max_span_len);
  if (long_mentions > 0) {
    manifest["warnings"].push_back(
        std::to_string(long_mentions) +
        " gold mentions exceed mention.max_span_len and cannot be predicted");
  }

  auto train_one = [&](JointModel& model, const TaskMask& mask,
                       const std::string& component,
                       const std::filesystem::path& model_dir,
                       std::vector<EpochRecord>& records, int& best_epoch,
                       double& best_metric) {
    // Extend positions once so every train/dev document encodes in one pass.
    int max_pieces = 0;
    for (const auto* docs : {&train_docs, &dev_docs}) {
      for (const Document& doc : *docs) {
        max_pieces = std::max(max_pieces, model.encoder().required_positions(doc));
      }
    }
    model.encoder().extend_positions(max_pieces);

    const long steps_per_epoch =
        (static_cast<long>(train_docs.size()) + tc.grad_accumulation - 1) /
        tc.grad_accumulation;
    nn::AdamConfig adam;
    adam.peak_lr = tc.peak_lr;
    adam.beta1 = tc.adam_beta1;
    adam.beta2 = tc.adam_beta2;
    adam.eps = tc.adam_eps;
    adam.weight_decay = tc.weight_decay;
    adam.total_steps = steps_per_epoch * tc.epochs;
    adam.warmup_steps = static_cast<long>(tc.warmup_fraction *
                                          static_cast<double>(adam.total_steps));
    nn::AdamOptimizer optimizer(adam);
    const std::vector<nn::Parameter*> params = model.params().all();

    std::vector<std::size_t> order(train_docs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    best_epoch = -1;
    best_metric = -1.0;
    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
      std::mt19937_64 shuffle_rng(mix_seed(tc.seed, 0xe90c, static_cast<uint64_t>(epoch)));
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      double epoch_loss = 0.0;
      int accumulated = 0;
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const Document& doc = train_docs[order[pos]];
        const uint64_t doc_seed =
            mix_seed(tc.seed, static_cast<uint64_t>(epoch), order[pos]);
        Graph g(/*training=*/true, mix_seed(doc_seed, 0xd70, 0));
        const TaskLosses losses =
            document_losses(model, g, doc, tc, mask, doc_seed);
        Var loss = joint_loss(g, losses, tc);
        epoch_loss += g.scalar(loss);
        if (g.scalar(loss) != 0.0) {
          g.backward(loss);
        }
        if (++accumulated == tc.grad_accumulation || pos + 1 == order.size()) {
          optimizer.step(params);
          accumulated = 0;
        }
      }
      epoch_loss /= static_cast<double>(order.size());

      EpochRecord record;
      record.epoch = epoch;
      record.train_loss = epoch_loss;
      if (!dev_docs.empty() && (epoch % tc.eval_every == 0 || epoch == tc.epochs)) {
        const ModelSet probe = ModelSet::borrow_joint(model);
        double metric = 0.0;
        if (component == "joint") {
          const auto preds = extract_corpus(probe, dev_docs);
          std::vector<DocAnnotation> anns;
          anns.reserve(preds.size());
          for (const DocPrediction& p : preds) anns.push_back(p.annotation());
          const MetricReport report = evaluate_end_to_end(anns, dev_docs);
          record.dev_metrics = report.to_json();
          metric = selection_metric_joint(report);
        } else if (component == "mention") {
          MatchCounts counts;
          for (const Document& doc : dev_docs) {
            Graph g;
            const EncodedDocument encoded = model.encoder().encode(g, doc);
            DocAnnotation ann;
            ann.doc_id = doc.doc_id;
            for (const SpanScore& s : model.mention_localizer().localize(
                     g, encoded, doc, cfg.model.mention_threshold)) {
              ann.mentions.push_back(s.span);
            }
            counts += count_mentions(ann, DocAnnotation::from_gold(doc));
          }
          const LevelMetrics m = metrics_from_counts(counts);
          record.dev_metrics = {{"mention_f1", m.f1}};
          metric = m.f1;
        } else {
          const auto gold_preds = predict_with_gold_inputs(probe, dev_docs);
          if (component == "coref") {
            MatchCounts counts;
            for (std::size_t i = 0; i < dev_docs.size(); ++i) {
              counts += count_clusters(gold_preds.coref_on_gold_mentions[i],
                                       DocAnnotation::from_gold(dev_docs[i]));
            }
            const LevelMetrics m = metrics_from_counts(counts);
            record.dev_metrics = {{"coref_f1", m.f1}};
            metric = m.f1;
          } else if (component == "entity") {
            MatchCounts counts;
            for (std::size_t i = 0; i < dev_docs.size(); ++i) {
              counts += count_entities(gold_preds.entities_on_gold_clusters[i],
                                       DocAnnotation::from_gold(dev_docs[i]));
            }
            const LevelMetrics m = metrics_from_counts(counts);
            record.dev_metrics = {{"entity_f1", m.f1}};
            metric = m.f1;
          } else {
            const RelationOnlyMetrics m = evaluate_gold_entities(
                gold_preds.relations_on_gold_entities, dev_docs, nullptr);
            record.dev_metrics = {{"relation_f1", m.f1.f1}};
            metric = m.f1.f1;
          }
        }
        record.selection_metric = metric;
        if (metric > best_metric) {
          best_metric = metric;
          best_epoch = epoch;
          model.save(model_dir);
        }
      }
      records.push_back(std::move(record));
    }
    if (best_epoch < 0) {
      // No dev evaluation ran; keep the final state.
      model.save(model_dir);
      best_epoch = tc.epochs;
    }
  };

  if (tc.mode == TrainMode::kJoint) {
    JointModel model(cfg.model, vocab, tc.seed);
    train_one(model, TaskMask{}, "joint", out_dir / "joint", result.epochs,
              result.best_epoch, result.best_metric);
    manifest["mode"] = "joint";
  } else {
    const std::vector<ComponentRun> runs = {
        {"mention", {true, false, false, false}},
        {"coref", {false, true, false, false}},
        {"entity", {false, false, true, false}},
        {"relation", {false, false, false, true}},
    };
    nlohmann::json components = nlohmann::json::object();
    for (std::size_t c = 0; c < runs.size(); ++c) {
      const ComponentRun& run = runs[c];
      JointModel model(cfg.model, vocab, mix_seed(tc.seed, 0xc0de, c));
      std::vector<EpochRecord> records;
      int best_epoch = -1;
      double best_metric = 0.0;
      train_one(model, run.mask, run.name, out_dir / run.name, records,
                best_epoch, best_metric);
      nlohmann::json epochs_json = nlohmann::json::array();
      for (const EpochRecord& r : records) {
        epochs_json.push_back({{"epoch", r.epoch},
                               {"train_loss", r.train_loss},
                               {"dev", r.dev_metrics},
                               {"selection_metric", r.selection_metric}});
      }
      components[run.name] = {{"best_epoch", best_epoch},
                              {"best_metric", best_metric},
                              {"epochs", std::move(epochs_json)}};
      // Report the relation component as the run's headline numbers.
      result.best_epoch = best_epoch;
      result.best_metric = best_metric;
      result.epochs = std::move(records);
    }
    manifest["mode"] = "pipeline";
    manifest["components"] = std::move(components);
  }

  {
    std::ofstream marker(out_dir / "mode");
    marker << to_string(tc.mode) << "\n";
  }

  nlohmann::json epochs_json = nlohmann::json::array();
  for (const EpochRecord& r : result.epochs) {
    epochs_json.push_back({{"epoch", r.epoch},
                           {"train_loss", r.train_loss},
                           {"dev", r.dev_metrics},
                           {"selection_metric", r.selection_metric}});
  }
  manifest["epochs"] = std::move(epochs_json);
  manifest["best_epoch"] = result.best_epoch;
  manifest["best_metric"] = result.best_metric;
  result.manifest = manifest;
  {
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw DataError("cannot write manifest to " + out_dir.string());
    out << manifest.dump(2) << "\n";
  }
  return result;
}

}  // namespace relex
