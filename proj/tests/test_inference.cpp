#include <doctest.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "synthetic.hpp"
#include "relex/errors.hpp"
#include "relex/inference.hpp"
#include "relex/text.hpp"

using namespace relex;

namespace {

ModelSet fresh_models(const std::vector<Document>& corpus, TrainMode mode,
                      RelationHead head = RelationHead::kMrc) {
  ModelConfig cfg = fixtures::small_model_config();
  cfg.rel_head = head;
  const SubwordVocab vocab = fixtures::vocab_for(corpus);
  ModelSet set;
  set.mode = mode;
  if (mode == TrainMode::kJoint) {
    set.joint = std::make_shared<JointModel>(cfg, vocab, 21);
  } else {
    set.mention = std::make_shared<JointModel>(cfg, vocab, 22);
    set.coref = std::make_shared<JointModel>(cfg, vocab, 23);
    set.entity = std::make_shared<JointModel>(cfg, vocab, 24);
    set.relation = std::make_shared<JointModel>(cfg, vocab, 25);
  }
  return set;
}

}  // namespace

TEST_CASE("zero detected mentions leave entities and relations empty") {
  const auto corpus = synthetic::overfit_corpus(1);
  const ModelSet models = fresh_models(corpus, TrainMode::kJoint);
  ExtractOptions options;
  options.mention_threshold = 1.0;  // untrained scores stay below 1
  const DocPrediction pred = extract(models, corpus[0], options);
  CHECK(pred.mentions.empty());
  CHECK(pred.clusters.empty());
  CHECK(pred.entity_types.empty());
  CHECK(pred.relations.empty());
  CHECK(pred.encoder_passes == 1);
}

TEST_CASE("joint extraction encodes exactly once; pipeline once per stage") {
  const auto corpus = synthetic::overfit_corpus(1);
  ExtractOptions options;
  options.mention_threshold = 0.0;  // keep every span
  options.coref_threshold = 1.0;    // singletons
  options.rel_threshold = 0.0;      // every pair fires

  const ModelSet joint = fresh_models(corpus, TrainMode::kJoint);
  const DocPrediction jp = extract(joint, corpus[0], options);
  CHECK(jp.encoder_passes == 1);
  CHECK(!jp.mentions.empty());
  CHECK(!jp.clusters.empty());
  CHECK(!jp.relations.empty());

  const ModelSet pipeline = fresh_models(corpus, TrainMode::kPipeline);
  const DocPrediction pp = extract(pipeline, corpus[0], options);
  CHECK(pp.encoder_passes == 4);
}

TEST_CASE("every mention lands in exactly one cluster; triples reference clusters") {
  const auto corpus = synthetic::overfit_corpus(2);
  const ModelSet models = fresh_models(corpus, TrainMode::kJoint);
  ExtractOptions options;
  options.mention_threshold = 0.0;
  options.coref_threshold = 0.5;
  options.rel_threshold = 0.45;
  const DocPrediction pred = extract(models, corpus[1], options);
  std::vector<int> owner(pred.mentions.size(), -1);
  for (std::size_t c = 0; c < pred.clusters.size(); ++c) {
    for (int m : pred.clusters[c]) {
      CHECK(owner[static_cast<std::size_t>(m)] == -1);
      owner[static_cast<std::size_t>(m)] = static_cast<int>(c);
    }
  }
  for (int o : owner) CHECK(o >= 0);
  CHECK(pred.entity_types.size() == pred.clusters.size());
  for (const PredictedRelation& rel : pred.relations) {
    CHECK(rel.head >= 0);
    CHECK(rel.head < static_cast<int>(pred.clusters.size()));
    CHECK(rel.tail >= 0);
    CHECK(rel.tail < static_cast<int>(pred.clusters.size()));
    CHECK(rel.head != rel.tail);
    CHECK(rel.score >= options.rel_threshold);
  }
}

TEST_CASE("extraction is deterministic") {
  const auto corpus = synthetic::overfit_corpus(1);
  const ModelSet models = fresh_models(corpus, TrainMode::kJoint);
  ExtractOptions options;
  options.mention_threshold = 0.0;
  options.coref_threshold = 0.5;
  options.rel_threshold = 0.4;
  const DocPrediction a = extract(models, corpus[0], options);
  const DocPrediction b = extract(models, corpus[0], options);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("explain: top instances with surfaces, k bounds, GRC unsupported") {
  const auto corpus = synthetic::overfit_corpus(1);
  const ModelSet models = fresh_models(corpus, TrainMode::kJoint);
  ExtractOptions options;
  options.mention_threshold = 0.0;
  options.coref_threshold = 1.0;
  options.rel_threshold = 0.0;
  options.explain_k = 2;
  const DocPrediction pred = extract(models, corpus[0], options);
  REQUIRE(!pred.relations.empty());
  const PredictedRelation& rel = pred.relations.front();
  REQUIRE(!rel.instances.empty());
  CHECK(rel.instances.size() <= 2);
  for (const InstanceDetail& inst : rel.instances) {
    CHECK(!inst.head_surface.empty());
    CHECK(inst.head_sentence >= 0);
  }
  // Singleton clusters: contribution 1 for the only pair.
  CHECK(rel.instances.front().contribution == doctest::Approx(1.0));

  // k = 0: empty list.
  CHECK(explain(models, corpus[0], pred, 0, 0, options).empty());
  // k beyond the pair count returns the single pair.
  CHECK(explain(models, corpus[0], pred, 0, 50, options).size() == 1);
  CHECK_THROWS_AS(explain(models, corpus[0], pred, pred.relations.size(), 1, options),
                  DataError);

  const ModelSet grc = fresh_models(corpus, TrainMode::kJoint, RelationHead::kGrc);
  CHECK_THROWS_AS(extract(grc, corpus[0], options), ModelError);
}

TEST_CASE("prediction JSON carries the documented fields") {
  const auto corpus = synthetic::overfit_corpus(1);
  const ModelSet models = fresh_models(corpus, TrainMode::kJoint);
  ExtractOptions options;
  options.mention_threshold = 0.0;
  options.coref_threshold = 0.5;
  options.rel_threshold = 0.3;
  const nlohmann::json j = extract(models, corpus[0], options).to_json();
  CHECK(j.contains("doc_id"));
  CHECK(j.contains("mentions"));
  CHECK(j.contains("clusters"));
  CHECK(j.contains("entities"));
  CHECK(j.contains("relations"));
  if (!j["mentions"].empty()) {
    CHECK(j["mentions"][0].contains("start"));
    CHECK(j["mentions"][0].contains("end"));
    CHECK(j["mentions"][0].contains("score"));
  }
  if (!j["entities"].empty()) {
    CHECK(j["entities"][0].contains("type"));
    CHECK(j["entities"][0].contains("score"));
  }
}

TEST_CASE("gold-input predictions cover the three downstream components") {
  const auto corpus = synthetic::overfit_corpus(2);
  const ModelSet models = fresh_models(corpus, TrainMode::kJoint);
  const GoldInputPredictions preds = predict_with_gold_inputs(models, corpus);
  REQUIRE(preds.coref_on_gold_mentions.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(preds.coref_on_gold_mentions[i].mentions.size() ==
          corpus[i].gold_mentions.size());
    CHECK(preds.entities_on_gold_clusters[i].clusters.size() ==
          corpus[i].gold_clusters.size());
    CHECK(preds.entities_on_gold_clusters[i].cluster_types.size() ==
          corpus[i].gold_clusters.size());
  }
}

TEST_CASE("parallel extraction equals sequential") {
  const auto corpus = synthetic::overfit_corpus(6);
  const ModelSet models = fresh_models(corpus, TrainMode::kJoint);
  ExtractOptions options;
  options.mention_threshold = 0.0;
  options.coref_threshold = 0.5;
  options.rel_threshold = 0.4;
  const auto seq = extract_corpus(models, corpus, options, 1);
  const auto par = extract_corpus(models, corpus, options, 4);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].to_json() == par[i].to_json());
  }
}

TEST_CASE("plain text tokenizer splits sentences and tokens deterministically") {
  const Document doc = tokenize_plain_text(
      "Ann founded Acme. It's in Paris! Right?", "t");
  REQUIRE(doc.sentences.size() == 3);
  CHECK(doc.tokens[0].surface == "Ann");
  CHECK(doc.tokens[3].surface == ".");
  CHECK(doc.tokens[4].surface == "It's");
  CHECK(doc.sentences[0].end == 4);
  const Document again = tokenize_plain_text(
      "Ann founded Acme. It's in Paris! Right?", "t");
  CHECK(doc.num_tokens() == again.num_tokens());
  CHECK(tokenize_plain_text("", "e").num_tokens() == 0);
}
