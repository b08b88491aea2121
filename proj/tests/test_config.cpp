#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "relex/config.hpp"
#include "relex/errors.hpp"

using namespace relex;

namespace {

std::string write_temp_config(const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / "relex_cfg_test.relex";
  std::ofstream out(path);
  out << body;
  return path.string();
}

}  // namespace

TEST_CASE("config file parsing: comments, whitespace, key = value") {
  const std::string path = write_temp_config(
      "# a comment\n"
      "mention.threshold = 0.9\n"
      "rel.head=grc\n"
      "entity.types = PER, ORG , LOC\n"
      "\n");
  const auto entries = read_config_file(path);
  Config cfg;
  apply_config_entries(entries, cfg);
  CHECK(cfg.model.mention_threshold == doctest::Approx(0.9));
  CHECK(cfg.model.rel_head == RelationHead::kGrc);
  CHECK(cfg.model.entity_types == std::vector<std::string>{"PER", "ORG", "LOC"});
}

TEST_CASE("unknown keys are hard errors; all problems reported at once") {
  Config cfg;
  try {
    apply_config_entries({{"mention.treshold", "0.9"},
                          {"rel.head", "mrcc"},
                          {"train.epochs", "abc"}},
                         cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("mention.treshold") != std::string::npos);
    CHECK(what.find("mrcc") != std::string::npos);
    CHECK(what.find("train.epochs") != std::string::npos);
  }
}

TEST_CASE("validation rejects out-of-range values exhaustively") {
  Config cfg;
  cfg.model.mention_threshold = 1.2;
  cfg.model.coref_threshold = -0.1;
  cfg.train.epochs = 0;
  try {
    validate_config(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("mention.threshold") != std::string::npos);
    CHECK(what.find("coref.threshold") != std::string::npos);
    CHECK(what.find("train.epochs") != std::string::npos);
  }
}

TEST_CASE("defaults carry the reference hyperparameters") {
  const Config cfg;
  CHECK(cfg.model.mention_threshold == doctest::Approx(0.85));
  CHECK(cfg.model.coref_threshold == doctest::Approx(0.85));
  CHECK(cfg.model.rel_head == RelationHead::kMrc);
  CHECK(cfg.model.resolved_rel_threshold() == doctest::Approx(0.6));
  ModelConfig grc = cfg.model;
  grc.rel_head = RelationHead::kGrc;
  CHECK(grc.resolved_rel_threshold() == doctest::Approx(0.55));
  CHECK(cfg.model.mention_max_span_len == 10);
  CHECK(cfg.model.encoder_hidden == 768);
  CHECK(cfg.model.entity_types.size() == 6);
  CHECK(cfg.train.epochs == 20);
  CHECK(cfg.train.peak_lr == doctest::Approx(5e-5));
  CHECK(cfg.train.dropout == doctest::Approx(0.1));
  CHECK(cfg.train.neg_mention_count == 200);
  CHECK(cfg.train.neg_coref_count == 200);
  CHECK(cfg.train.neg_relation_count == 200);
  CHECK(cfg.train.beta_span == doctest::Approx(1.0));
  CHECK(cfg.train.beta_coref == doctest::Approx(1.0));
  CHECK(cfg.train.beta_entity == doctest::Approx(0.25));
  CHECK(cfg.train.beta_relation == doctest::Approx(1.0));
}

TEST_CASE("effective config round-trips through its own entry format") {
  Config cfg;
  cfg.model.mention_threshold = 0.7;
  cfg.model.relation_types = {"P1", "P2"};
  cfg.train.seed = 99;
  const auto entries = config_entries(cfg);
  Config restored;
  apply_config_entries(entries, restored);
  CHECK(restored.model.mention_threshold == doctest::Approx(0.7));
  CHECK(restored.model.relation_types == cfg.model.relation_types);
  CHECK(restored.train.seed == 99);
}
