#include "relex/inference.hpp"

#include <algorithm>
#include <future>
#include <thread>

#include <nlohmann/json.hpp>

#include "relex/errors.hpp"

namespace relex {

using nlohmann::json;
using nn::Graph;
using nn::Var;

json DocPrediction::to_json() const {
  json j;
  j["doc_id"] = doc_id;
  json mentions_json = json::array();
  for (const SpanScore& m : mentions) {
    mentions_json.push_back(
        {{"start", m.span.start}, {"end", m.span.end}, {"score", m.probability}});
  }
  j["mentions"] = std::move(mentions_json);
  j["clusters"] = clusters;
  json entities_json = json::array();
  for (std::size_t i = 0; i < entity_types.size(); ++i) {
    entities_json.push_back(
        {{"type", entity_types[i]}, {"score", entity_scores[i]}});
  }
  j["entities"] = std::move(entities_json);
  json relations_json = json::array();
  for (const PredictedRelation& rel : relations) {
    json r = {{"head", rel.head},
              {"tail", rel.tail},
              {"type", rel.relation_type},
              {"score", rel.score}};
    if (!rel.instances.empty()) {
      json instances = json::array();
      for (const InstanceDetail& inst : rel.instances) {
        instances.push_back({{"head_mention", inst.head_mention},
                             {"tail_mention", inst.tail_mention},
                             {"contribution", inst.contribution},
                             {"token_distance", inst.token_dist},
                             {"head_sentence", inst.head_sentence},
                             {"tail_sentence", inst.tail_sentence},
                             {"head_surface", inst.head_surface},
                             {"tail_surface", inst.tail_surface}});
      }
      r["instances"] = std::move(instances);
    }
    relations_json.push_back(std::move(r));
  }
  j["relations"] = std::move(relations_json);
  j["encoder_passes"] = encoder_passes;
  return j;
}

DocAnnotation DocPrediction::annotation() const {
  DocAnnotation ann;
  ann.doc_id = doc_id;
  for (const SpanScore& m : mentions) ann.mentions.push_back(m.span);
  ann.clusters = clusters;
  ann.cluster_types = entity_types;
  for (const PredictedRelation& rel : relations) {
    ann.relations.push_back({rel.head, rel.tail, rel.relation_type});
  }
  return ann;
}

namespace {

struct Stage {
  const JointModel* model = nullptr;
  Graph graph{false};
  EncodedDocument encoded;
  bool encoded_ready = false;
};

// Encodes lazily so pipeline stages whose input is empty skip the pass.
const EncodedDocument& ensure_encoded(Stage& stage, const Document& doc,
                                      int& passes) {
  if (!stage.encoded_ready) {
    stage.encoded = stage.model->encoder().encode(stage.graph, doc);
    stage.encoded_ready = true;
    ++passes;
  }
  return stage.encoded;
}

std::vector<Span> spans_of(const std::vector<SpanScore>& scored) {
  std::vector<Span> spans;
  spans.reserve(scored.size());
  for (const SpanScore& s : scored) spans.push_back(s.span);
  return spans;
}

// Scores ordered cluster pairs in chunks (bounding the mention-pair batch
// size) and appends kept triples to `out`.
void score_relations(Stage& stage, const Document& doc,
                     const std::vector<Span>& spans,
                     const std::vector<std::vector<int>>& clusters,
                     const std::vector<int>& type_ids, double threshold,
                     int explain_k, int pair_chunk, int& passes,
                     std::vector<PredictedRelation>& out) {
  const std::size_t n = clusters.size();
  if (n < 2) return;
  const ModelConfig& cfg = stage.model->config();
  const RelationClassifier& rel = stage.model->relation_classifier();
  const std::vector<std::string>& rel_types = cfg.relation_types;
  const bool mrc = cfg.rel_head == RelationHead::kMrc;
  if (explain_k > 0 && !mrc) {
    throw ModelError("top instance reporting requires the mrc relation head");
  }

  const EncodedDocument& encoded = ensure_encoded(stage, doc, passes);
  Graph& g = stage.graph;
  Var mention_reprs =
      stage.model->mention_localizer().span_representations(g, encoded, spans);
  Var entity_reprs = stage.model->entity_classifier().entity_representations(
      g, mention_reprs, clusters);

  std::vector<std::pair<int, int>> all_pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) all_pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }

  std::size_t at = 0;
  while (at < all_pairs.size()) {
    // Grow the chunk until the mention-pair budget is spent.
    std::vector<std::pair<int, int>> chunk;
    long instance_budget = 0;
    while (at < all_pairs.size() && (chunk.empty() || instance_budget < pair_chunk)) {
      const auto& [h, t] = all_pairs[at];
      instance_budget += static_cast<long>(clusters[static_cast<std::size_t>(h)].size()) *
                         static_cast<long>(clusters[static_cast<std::size_t>(t)].size());
      chunk.push_back(all_pairs[at]);
      ++at;
    }
    std::vector<std::pair<int, int>> chunk_types;
    chunk_types.reserve(chunk.size());
    for (const auto& [h, t] : chunk) {
      chunk_types.emplace_back(type_ids[static_cast<std::size_t>(h)],
                               type_ids[static_cast<std::size_t>(t)]);
    }
    RelationClassifier::MrcForward fwd;
    Var probs;
    if (mrc) {
      fwd = rel.mrc_forward(g, encoded, mention_reprs, spans, doc, entity_reprs,
                            clusters, chunk, chunk_types);
      probs = g.sigmoid(fwd.logits);
    } else {
      probs = g.sigmoid(rel.grc_logits(g, entity_reprs, chunk, chunk_types));
    }
    const nn::Matrix& p = g.value(probs);
    for (std::size_t s = 0; s < chunk.size(); ++s) {
      std::vector<InstanceDetail> instances;
      bool instances_ready = false;
      for (int r = 0; r < rel.num_relation_types(); ++r) {
        const double score = p(static_cast<Eigen::Index>(s), r);
        if (score < threshold) continue;
        PredictedRelation triple;
        triple.head = chunk[s].first;
        triple.tail = chunk[s].second;
        triple.relation_type = rel_types[static_cast<std::size_t>(r)];
        triple.score = score;
        if (mrc && explain_k > 0) {
          if (!instances_ready) {
            for (const InstanceContribution& ic : rel.top_instances(
                     g, fwd, static_cast<int>(s), explain_k, spans)) {
              InstanceDetail detail;
              detail.head_mention = ic.head_mention;
              detail.tail_mention = ic.tail_mention;
              detail.contribution = ic.contribution;
              detail.token_dist = ic.token_dist;
              const Span& hs = spans[static_cast<std::size_t>(ic.head_mention)];
              const Span& ts = spans[static_cast<std::size_t>(ic.tail_mention)];
              detail.head_sentence = doc.sentence_of(hs);
              detail.tail_sentence = doc.sentence_of(ts);
              detail.head_surface = doc.span_surface(hs);
              detail.tail_surface = doc.span_surface(ts);
              instances.push_back(std::move(detail));
            }
            instances_ready = true;
          }
          triple.instances = instances;
        }
        out.push_back(std::move(triple));
      }
    }
  }
}

}  // namespace

DocPrediction extract(const ModelSet& models, const Document& doc,
                      const ExtractOptions& options) {
  DocPrediction pred;
  pred.doc_id = doc.doc_id;

  // Joint mode: every component works on the same stage, so the document is
  // encoded exactly once. Pipeline mode: one stage (and encoder pass) per
  // component model.
  const bool pipeline = models.mode == TrainMode::kPipeline;
  Stage mention_stage{pipeline ? models.mention.get() : models.joint.get()};
  Stage coref_stage{pipeline ? models.coref.get() : nullptr};
  Stage entity_stage{pipeline ? models.entity.get() : nullptr};
  Stage relation_stage{pipeline ? models.relation.get() : nullptr};
  Stage* coref_ptr = pipeline ? &coref_stage : &mention_stage;
  Stage* entity_ptr = pipeline ? &entity_stage : &mention_stage;
  Stage* relation_ptr = pipeline ? &relation_stage : &mention_stage;

  // (a) mention localization
  {
    const ModelConfig& cfg = mention_stage.model->config();
    const double threshold = options.mention_threshold >= 0.0
                                 ? options.mention_threshold
                                 : cfg.mention_threshold;
    const EncodedDocument& encoded =
        ensure_encoded(mention_stage, doc, pred.encoder_passes);
    pred.mentions = mention_stage.model->mention_localizer().localize(
        mention_stage.graph, encoded, doc, threshold);
  }
  const std::vector<Span> spans = spans_of(pred.mentions);
  if (spans.empty()) return pred;

  // (b) coreference resolution
  {
    const ModelConfig& cfg = coref_ptr->model->config();
    const double threshold = options.coref_threshold >= 0.0
                                 ? options.coref_threshold
                                 : cfg.coref_threshold;
    const EncodedDocument& encoded =
        ensure_encoded(*coref_ptr, doc, pred.encoder_passes);
    Var mention_reprs = coref_ptr->model->mention_localizer().span_representations(
        coref_ptr->graph, encoded, spans);
    const Eigen::MatrixXd sims =
        coref_ptr->model->coref_resolver().build_similarity_matrix(
            coref_ptr->graph, mention_reprs, doc, spans);
    pred.clusters = CorefResolver::cluster(sims, threshold);
  }

  // (c) entity classification
  std::vector<int> type_ids;
  {
    const EncodedDocument& encoded =
        ensure_encoded(*entity_ptr, doc, pred.encoder_passes);
    Var mention_reprs = entity_ptr->model->mention_localizer().span_representations(
        entity_ptr->graph, encoded, spans);
    Var entity_reprs = entity_ptr->model->entity_classifier().entity_representations(
        entity_ptr->graph, mention_reprs, pred.clusters);
    const auto decisions = entity_ptr->model->entity_classifier().classify(
        entity_ptr->graph, entity_reprs);
    const auto& types = entity_ptr->model->config().entity_types;
    for (const EntityTypeDecision& d : decisions) {
      type_ids.push_back(d.type_index);
      pred.entity_types.push_back(types[static_cast<std::size_t>(d.type_index)]);
      pred.entity_scores.push_back(d.score());
    }
  }

  // (d) relation classification, both directions per pair
  {
    const ModelConfig& cfg = relation_ptr->model->config();
    const double threshold = options.rel_threshold >= 0.0
                                 ? options.rel_threshold
                                 : cfg.resolved_rel_threshold();
    score_relations(*relation_ptr, doc, spans, pred.clusters, type_ids,
                    threshold, options.explain_k, cfg.rel_pair_chunk,
                    pred.encoder_passes, pred.relations);
  }
  return pred;
}

std::vector<DocPrediction> extract_corpus(const ModelSet& models,
                                          const std::vector<Document>& docs,
                                          const ExtractOptions& options,
                                          int workers) {
  std::vector<DocPrediction> out(docs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      out[i] = extract(models, docs[i], options);
    }
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= docs.size()) break;
      out[i] = extract(models, docs[i], options);
    }
  };
  std::vector<std::thread> threads;
  const int n_threads = std::min<int>(workers, static_cast<int>(docs.size()));
  threads.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(run);
  for (std::thread& t : threads) t.join();
  return out;
}

std::vector<InstanceDetail> explain(const ModelSet& models, const Document& doc,
                                    const DocPrediction& prediction,
                                    std::size_t relation_index, int k,
                                    const ExtractOptions& options) {
  if (relation_index >= prediction.relations.size()) {
    throw DataError("relation index out of range");
  }
  if (k == 0) return {};
  ExtractOptions rerun_options = options;
  rerun_options.explain_k = k;
  const DocPrediction rerun = extract(models, doc, rerun_options);
  const PredictedRelation& wanted = prediction.relations[relation_index];
  for (const PredictedRelation& rel : rerun.relations) {
    if (rel.head == wanted.head && rel.tail == wanted.tail &&
        rel.relation_type == wanted.relation_type) {
      return rel.instances;
    }
  }
  throw DataError("triple not reproduced by the model; cannot explain");
}

GoldInputPredictions predict_with_gold_inputs(const ModelSet& models,
                                              const std::vector<Document>& docs,
                                              const ExtractOptions& options,
                                              int workers) {
  GoldInputPredictions out;
  out.coref_on_gold_mentions.resize(docs.size());
  out.entities_on_gold_clusters.resize(docs.size());
  out.relations_on_gold_entities.resize(docs.size());

  const bool pipeline = models.mode == TrainMode::kPipeline;
  auto process = [&](std::size_t i) {
    const Document& doc = docs[i];
    int passes = 0;
    Stage coref_stage{pipeline ? models.coref.get() : models.joint.get()};
    Stage entity_stage{pipeline ? models.entity.get() : models.joint.get()};
    Stage relation_stage{pipeline ? models.relation.get() : models.joint.get()};
    Stage* entity_ptr = pipeline ? &entity_stage : &coref_stage;
    Stage* relation_ptr = pipeline ? &relation_stage : &coref_stage;

    std::vector<Span> gold_spans;
    for (const Mention& m : doc.gold_mentions) gold_spans.push_back(m.span);

    // coreference on gold mentions
    {
      DocAnnotation& ann = out.coref_on_gold_mentions[i];
      ann.doc_id = doc.doc_id;
      ann.mentions = gold_spans;
      if (!gold_spans.empty()) {
        const ModelConfig& cfg = coref_stage.model->config();
        const double threshold = options.coref_threshold >= 0.0
                                     ? options.coref_threshold
                                     : cfg.coref_threshold;
        const EncodedDocument& encoded = ensure_encoded(coref_stage, doc, passes);
        Var reprs = coref_stage.model->mention_localizer().span_representations(
            coref_stage.graph, encoded, gold_spans);
        const Eigen::MatrixXd sims =
            coref_stage.model->coref_resolver().build_similarity_matrix(
                coref_stage.graph, reprs, doc, gold_spans);
        ann.clusters = CorefResolver::cluster(sims, threshold);
        ann.cluster_types.assign(ann.clusters.size(), "");
      }
    }

    std::vector<std::vector<int>> gold_clusters;
    std::vector<int> gold_type_ids;
    const auto& entity_types = entity_ptr->model->config().entity_types;
    for (const EntityCluster& c : doc.gold_clusters) {
      gold_clusters.push_back(c.mentions);
      const int idx = entity_ptr->model->config().entity_type_index(c.entity_type);
      gold_type_ids.push_back(std::max(0, idx));
    }

    // entity typing on gold clusters
    {
      DocAnnotation& ann = out.entities_on_gold_clusters[i];
      ann.doc_id = doc.doc_id;
      ann.mentions = gold_spans;
      ann.clusters = gold_clusters;
      if (!gold_clusters.empty()) {
        const EncodedDocument& encoded = ensure_encoded(*entity_ptr, doc, passes);
        Var reprs = entity_ptr->model->mention_localizer().span_representations(
            entity_ptr->graph, encoded, gold_spans);
        Var entity_reprs =
            entity_ptr->model->entity_classifier().entity_representations(
                entity_ptr->graph, reprs, gold_clusters);
        for (const EntityTypeDecision& d :
             entity_ptr->model->entity_classifier().classify(entity_ptr->graph,
                                                             entity_reprs)) {
          ann.cluster_types.push_back(
              entity_types[static_cast<std::size_t>(d.type_index)]);
        }
      }
    }

    // relations on gold clusters with gold types
    {
      GoldEntityRelations& rels = out.relations_on_gold_entities[i];
      rels.doc_id = doc.doc_id;
      if (gold_clusters.size() >= 2) {
        const ModelConfig& cfg = relation_ptr->model->config();
        const double threshold = options.rel_threshold >= 0.0
                                     ? options.rel_threshold
                                     : cfg.resolved_rel_threshold();
        std::vector<PredictedRelation> triples;
        score_relations(*relation_ptr, doc, gold_spans, gold_clusters,
                        gold_type_ids, threshold, /*explain_k=*/0,
                        cfg.rel_pair_chunk, passes, triples);
        for (const PredictedRelation& t : triples) {
          rels.relations.push_back({t.head, t.tail, t.relation_type});
        }
      }
    }
  };

  if (workers <= 1) {
    for (std::size_t i = 0; i < docs.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto run = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= docs.size()) break;
        process(i);
      }
    };
    std::vector<std::thread> threads;
    const int n_threads = std::min<int>(workers, static_cast<int>(docs.size()));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(run);
    for (std::thread& t : threads) t.join();
  }
  return out;
}

}  // namespace relex
