#include <doctest.h>

#include "fixtures.hpp"
#include "relex/entity_classifier.hpp"
#include "relex/errors.hpp"
#include "relex/model.hpp"

using namespace relex;

namespace {

struct HeadFixture {
  ModelConfig cfg;
  nn::ParameterStore params;
  std::mt19937_64 rng{4};
  std::unique_ptr<EntityClassifier> head;

  explicit HeadFixture(int hidden = 6) {
    cfg = fixtures::small_model_config();
    cfg.encoder_hidden = hidden;
    cfg.ffnn_hidden = 8;
    head = std::make_unique<EntityClassifier>(cfg, params, rng);
  }
};

}  // namespace

TEST_CASE("entity representation is the max-pool over mention rows") {
  HeadFixture fx(2);
  nn::Graph g;
  nn::Matrix mentions(2, 2);
  mentions << 1, -2, 0, 4;
  nn::Var reprs = fx.head->entity_representations(g, g.constant(mentions),
                                                  {{0, 1}, {1}, {1, 0}});
  CHECK(g.value(reprs)(0, 0) == doctest::Approx(1.0));
  CHECK(g.value(reprs)(0, 1) == doctest::Approx(4.0));
  // Singleton cluster: its mention's representation.
  CHECK(g.value(reprs)(1, 0) == doctest::Approx(0.0));
  CHECK(g.value(reprs)(1, 1) == doctest::Approx(4.0));
  // Invariant to mention ordering.
  CHECK(g.value(reprs).row(2) == g.value(reprs).row(0));

  CHECK_THROWS_AS(fx.head->entity_representations(g, g.constant(mentions), {{}}),
                  ModelError);
}

TEST_CASE("dominated mentions leave the representation unchanged") {
  HeadFixture fx(3);
  nn::Graph g;
  nn::Matrix mentions(2, 3);
  mentions << 5, 6, 7,
              4, 5, 6;  // dominated coordinatewise
  nn::Var with = fx.head->entity_representations(g, g.constant(mentions), {{0, 1}});
  nn::Var without = fx.head->entity_representations(g, g.constant(mentions), {{0}});
  CHECK(g.value(with).row(0) == g.value(without).row(0));
}

TEST_CASE("distribution sums to one and argmax ties break to smaller index") {
  HeadFixture fx;
  // Zero classifier output: uniform distribution over the 3 small-config types.
  fx.params.find("entity.w2")->value.setZero();
  fx.params.find("entity.b2")->value.setZero();
  nn::Graph g;
  nn::Var reprs = g.constant(nn::Matrix::Random(4, fx.cfg.encoder_hidden));
  const auto decisions = fx.head->classify(g, reprs);
  REQUIRE(decisions.size() == 4);
  for (const EntityTypeDecision& d : decisions) {
    double sum = 0.0;
    for (double p : d.distribution) {
      sum += p;
      CHECK(p == doctest::Approx(1.0 / 3.0));
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(d.type_index == 0);  // uniform: smallest index wins
  }
}

TEST_CASE("softmax is shift invariant") {
  HeadFixture fx;
  nn::Graph g;
  nn::Matrix logits = nn::Matrix::Random(3, fx.head->num_types());
  nn::Var base = g.softmax_rows(g.constant(logits));
  nn::Matrix shifted = logits.array() + 10.0;
  nn::Var moved = g.softmax_rows(g.constant(shifted));
  CHECK(g.value(base).isApprox(g.value(moved), 1e-9));
}

TEST_CASE("six output classes at the reference configuration") {
  ModelConfig cfg;  // DocRED defaults
  cfg.relation_types = {"r"};
  nn::ParameterStore params;
  std::mt19937_64 rng(1);
  EntityClassifier head(cfg, params, rng);
  CHECK(head.num_types() == 6);
  CHECK(params.find("entity.w2")->cols() == 6);
}
