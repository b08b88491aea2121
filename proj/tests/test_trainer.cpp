#include <doctest.h>

#include <filesystem>
#include <set>

#include "fixtures.hpp"
#include "synthetic.hpp"
#include "relex/errors.hpp"
#include "relex/trainer.hpp"

using namespace relex;

namespace {

Document sampling_doc() {
  Document doc = fixtures::make_document(
      {{"Ann", "Smith", "founded", "Acme", "Corp", "today"},
       {"Smith", "likes", "Paris", "a", "lot", "."}});
  fixtures::add_cluster(doc, "PER", {{0, 2}, {6, 7}});
  fixtures::add_cluster(doc, "ORG", {{3, 5}});
  fixtures::add_cluster(doc, "LOC", {{8, 9}});
  doc.gold_relations.push_back({0, 1, "r:founded"});
  return doc;
}

}  // namespace

TEST_CASE("mention negative sampling respects the contracts") {
  const Document doc = sampling_doc();
  const auto negatives = sample_mention_negatives(doc, 20, 4, 123);
  CHECK(negatives.size() <= 20);
  std::set<Span> gold;
  for (const Mention& m : doc.gold_mentions) gold.insert(m.span);
  std::set<Span> seen;
  int intra = 0;
  for (const Span& s : negatives) {
    CHECK(gold.count(s) == 0);            // never a gold span
    CHECK(seen.insert(s).second);         // distinct
    CHECK(s.length() <= 4);
    CHECK(doc.tokens[static_cast<std::size_t>(s.start)].sentence_index ==
          doc.tokens[static_cast<std::size_t>(s.end - 1)].sentence_index);
    for (const Mention& m : doc.gold_mentions) {
      if (s.start >= m.span.start && s.end <= m.span.end) {
        ++intra;
        break;
      }
    }
  }
  CHECK(intra <= 10);  // up to N_s / 2 intra-mention spans
  CHECK(intra > 0);    // sub-spans of multi-token gold mentions exist

  // Determinism.
  CHECK(sample_mention_negatives(doc, 20, 4, 123) == negatives);
  CHECK(sample_mention_negatives(doc, 20, 4, 124) != negatives);
}

TEST_CASE("mention sampling edge cases") {
  // No gold mentions: all negatives are random non-mention spans.
  Document plain = fixtures::make_document({{"just", "some", "words", "here"}});
  const auto negs = sample_mention_negatives(plain, 6, 3, 5);
  CHECK(negs.size() == 6);

  // A gold mention of length 1 contributes no strict sub-span.
  Document unit = fixtures::make_document({{"Ann", "runs"}});
  fixtures::add_cluster(unit, "PER", {{0, 1}});
  for (const Span& s : sample_mention_negatives(unit, 10, 2, 5)) {
    const bool inside = s.start >= 0 && s.end <= 1;
    CHECK_FALSE(inside);
  }
}

TEST_CASE("coref pair sampling: combinatorics and disjointness") {
  const Document doc = sampling_doc();
  const CorefSamples samples = sample_coref_pairs(doc, 3, 9);
  // One cluster of 2 mentions: 1 positive pair; singletons contribute none.
  CHECK(samples.positives.size() == 1);
  CHECK(samples.positives[0] == std::pair(0, 1));
  CHECK(samples.negatives.size() == 3);  // capped at N_c
  std::set<std::pair<int, int>> pos(samples.positives.begin(),
                                    samples.positives.end());
  for (const auto& neg : samples.negatives) {
    CHECK(pos.count(neg) == 0);
  }

  // Single-cluster document: zero negatives available.
  Document one = fixtures::make_document({{"a", "b", "c"}});
  fixtures::add_cluster(one, "PER", {{0, 1}, {1, 2}, {2, 3}});
  const CorefSamples only = sample_coref_pairs(one, 10, 1);
  CHECK(only.positives.size() == 3);  // t(t-1)/2 with t = 3
  CHECK(only.negatives.empty());

  // Singleton clusters only: zero positives.
  Document singles = fixtures::make_document({{"a", "b"}});
  fixtures::add_cluster(singles, "PER", {{0, 1}});
  fixtures::add_cluster(singles, "ORG", {{1, 2}});
  const CorefSamples none = sample_coref_pairs(singles, 10, 1);
  CHECK(none.positives.empty());
  CHECK(none.negatives.size() == 1);
}

TEST_CASE("relation negative sampling") {
  const Document doc = sampling_doc();  // 3 clusters, relation 0 -> 1
  const auto negatives = sample_relation_negatives(doc, 100, 3);
  // 3 * 2 ordered pairs minus the related one.
  CHECK(negatives.size() == 5);
  for (const auto& [h, t] : negatives) {
    CHECK(h != t);
    CHECK(std::pair(h, t) != std::pair(0, 1));
  }

  // Fully connected: zero negatives.
  Document full = fixtures::make_document({{"a", "b"}});
  fixtures::add_cluster(full, "PER", {{0, 1}});
  fixtures::add_cluster(full, "ORG", {{1, 2}});
  full.gold_relations.push_back({0, 1, "r"});
  full.gold_relations.push_back({1, 0, "r"});
  CHECK(sample_relation_negatives(full, 10, 3).empty());

  // 3 clusters, no relations: all 6 ordered pairs are candidates.
  Document open = fixtures::make_document({{"a", "b", "c"}});
  fixtures::add_cluster(open, "PER", {{0, 1}});
  fixtures::add_cluster(open, "ORG", {{1, 2}});
  fixtures::add_cluster(open, "LOC", {{2, 3}});
  CHECK(sample_relation_negatives(open, 100, 3).size() == 6);
  CHECK(sample_relation_negatives(open, 4, 3).size() == 4);  // capped
}

TEST_CASE("joint loss arithmetic with the reference weights") {
  nn::Graph g;
  TaskLosses losses;
  losses.span = g.constant(nn::Matrix::Ones(1, 1));
  losses.coref = g.constant(nn::Matrix::Ones(1, 1));
  losses.entity = g.constant(nn::Matrix::Ones(1, 1));
  losses.relation = g.constant(nn::Matrix::Ones(1, 1));
  TrainConfig cfg;  // beta_s = beta_c = beta_r = 1, beta_e = 0.25
  CHECK(g.scalar(joint_loss(g, losses, cfg)) == doctest::Approx(3.25));

  // Tasks with zero samples contribute zero.
  TaskLosses partial;
  partial.span = g.constant(nn::Matrix::Ones(1, 1));
  CHECK(g.scalar(joint_loss(g, partial, cfg)) == doctest::Approx(1.0));
  CHECK(g.scalar(joint_loss(g, TaskLosses{}, cfg)) == doctest::Approx(0.0));
}

TEST_CASE("loss weights gate and scale gradients per head") {
  const auto corpus = synthetic::overfit_corpus(2);
  ModelConfig mcfg = fixtures::small_model_config();
  JointModel model(mcfg, fixtures::vocab_for(corpus), 3);
  TrainConfig tc;
  tc.dropout = 0.0;
  tc.neg_mention_count = 8;
  tc.neg_coref_count = 8;
  tc.neg_relation_count = 8;

  auto relation_grad = [&](double beta_relation, double beta_entity) {
    model.params().zero_grads();
    tc.beta_relation = beta_relation;
    tc.beta_entity = beta_entity;
    nn::Graph g(true, 7);
    const TaskLosses losses = document_losses(model, g, corpus[0], tc, {}, 99);
    g.backward(joint_loss(g, losses, tc));
    nn::Parameter* rel_w = model.params().find("rel.mrc_w1");
    nn::Parameter* ent_w = model.params().find("entity.w1");
    return std::pair(rel_w->grad.size() ? rel_w->grad : nn::Matrix{},
                     ent_w->grad.size() ? ent_w->grad : nn::Matrix{});
  };

  const auto [rel1, ent1] = relation_grad(1.0, 0.25);
  CHECK(rel1.size() > 0);
  CHECK(ent1.size() > 0);
  // beta_e = 0: the entity head receives zero gradient.
  const auto [rel_e0, ent_e0] = relation_grad(1.0, 0.0);
  CHECK(ent_e0.norm() == 0.0);
  CHECK(rel_e0.norm() > 0.0);
  // Doubling beta_r doubles the relation-head gradient.
  const auto [rel2, unused] = relation_grad(2.0, 0.25);
  CHECK(rel2.isApprox(2.0 * rel1, 1e-9));
}

TEST_CASE("teacher forcing: negatives and positives stay disjoint") {
  const Document doc = sampling_doc();
  for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto mention_negs =
        sample_mention_negatives(doc, 50, 4, seed);
    std::set<Span> gold;
    for (const Mention& m : doc.gold_mentions) gold.insert(m.span);
    for (const Span& s : mention_negs) CHECK(gold.count(s) == 0);

    const auto rel_negs = sample_relation_negatives(doc, 50, seed);
    for (const auto& pr : rel_negs) CHECK(pr != std::pair(0, 1));
  }
}

TEST_CASE("training on a tiny corpus overfits and saves the best checkpoint") {
  const auto corpus = synthetic::overfit_corpus(3);
  Config cfg;
  cfg.model = fixtures::small_model_config();
  cfg.model.relation_types.clear();  // resolve from data
  cfg.train.epochs = 120;
  cfg.train.peak_lr = 1e-3;
  cfg.train.dropout = 0.0;
  cfg.train.neg_mention_count = 30;
  cfg.train.neg_coref_count = 30;
  cfg.train.neg_relation_count = 30;
  cfg.train.eval_every = 10;
  cfg.train.seed = 1;

  const std::filesystem::path out = std::filesystem::temp_directory_path() /
                                    "relex_trainer_test";
  std::filesystem::remove_all(out);
  Trainer trainer(cfg);
  const TrainResult result = trainer.train(corpus, corpus, out);
  CHECK(result.best_epoch > 0);
  CHECK(result.best_metric > 0.9);  // overfits the three documents
  CHECK(std::filesystem::exists(out / "joint" / "weights.bin"));
  CHECK(std::filesystem::exists(out / "manifest.json"));
  CHECK(result.epochs.size() == 120);
  // Loss decreased over training.
  CHECK(result.epochs.back().train_loss < result.epochs.front().train_loss);

  // The checkpoint reloads and the empty-train-set contract holds.
  const ModelSet restored = ModelSet::load(out);
  CHECK(restored.joint != nullptr);
  CHECK_THROWS_AS(trainer.train({}, corpus, out), DataError);
}
