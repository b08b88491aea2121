#include "relex/model.hpp"

#include <fstream>
#include <random>

#include "relex/errors.hpp"

namespace relex {

namespace fs = std::filesystem;

JointModel::JointModel(ModelConfig cfg, SubwordVocab vocab, uint64_t init_seed)
    : cfg_(std::move(cfg)) {
  if (cfg_.relation_types.empty()) {
    throw ConfigError(
        "model construction requires a resolved relation type set (rel.types)");
  }
  std::mt19937_64 rng(init_seed);
  encoder_ = std::make_unique<TransformerEncoder>(cfg_, std::move(vocab),
                                                  params_, rng);
  mention_ = std::make_unique<MentionLocalizer>(cfg_, params_, rng);
  coref_ = std::make_unique<CorefResolver>(cfg_, params_, rng);
  entity_ = std::make_unique<EntityClassifier>(cfg_, params_, rng);
  relation_ = std::make_unique<RelationClassifier>(cfg_, params_, rng);
  check_dimensions();
}

void JointModel::check_dimensions() const {
  const int h = cfg_.encoder_hidden;
  auto expect = [](int actual, int wanted, const std::string& what) {
    if (actual != wanted) {
      throw ModelError("dimensional contract violated: " + what + " is " +
                       std::to_string(actual) + ", expected " +
                       std::to_string(wanted));
    }
  };
  expect(mention_->feature_width(), h + kMetaEmbeddingSize,
         "mention classifier input width");
  expect(coref_->feature_width(), 2 * h + kMetaEmbeddingSize,
         "coreference classifier input width");
  expect(relation_->grc_feature_width(), 2 * (h + kMetaEmbeddingSize),
         "GRC pair width");
  int u_prime = 4 * h + h + 2 * kMetaEmbeddingSize;
  if (cfg_.rel_ablate_entity_repr) u_prime -= 2 * h;
  if (cfg_.rel_ablate_local_context) u_prime -= h;
  expect(relation_->mrc_pair_feature_width(), u_prime, "MRC u' width");
  expect(relation_->mrc_pair_repr_width(), h, "MRC u'' width");
  expect(relation_->mrc_final_feature_width(), h + 2 * kMetaEmbeddingSize,
         "MRC classifier input width");
}

void JointModel::save(const fs::path& dir) const {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "config.relex");
    if (!out) throw DataError("cannot write " + (dir / "config.relex").string());
    Config full;
    full.model = cfg_;
    // Position capacity may exceed the configured value after extension.
    full.model.encoder_max_subwords = encoder_->position_capacity();
    for (const auto& [key, value] : config_entries(full)) {
      if (key.rfind("train.", 0) == 0) continue;  // model config only
      out << key << " = " << value << "\n";
    }
  }
  {
    std::ofstream out(dir / "vocab.txt");
    if (!out) throw DataError("cannot write " + (dir / "vocab.txt").string());
    encoder_->vocab().save(out);
  }
  {
    std::ofstream out(dir / "weights.bin", std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / "weights.bin").string());
    params_.save(out);
  }
}

std::unique_ptr<JointModel> JointModel::load(const fs::path& dir) {
  const fs::path cfg_path = dir / "config.relex";
  if (!fs::exists(cfg_path)) {
    throw DataError("no model at " + dir.string() + " (missing config.relex)");
  }
  Config full;
  apply_config_entries(read_config_file(cfg_path.string()), full);
  validate_config(full);
  std::ifstream vocab_in(dir / "vocab.txt");
  if (!vocab_in) throw DataError("cannot read " + (dir / "vocab.txt").string());
  SubwordVocab vocab = SubwordVocab::load(vocab_in);
  auto model =
      std::make_unique<JointModel>(full.model, std::move(vocab), /*seed=*/0);
  std::ifstream weights_in(dir / "weights.bin", std::ios::binary);
  if (!weights_in) {
    throw DataError("cannot read " + (dir / "weights.bin").string());
  }
  model->params_.load(weights_in);
  return model;
}

const ModelConfig& ModelSet::primary_config() const {
  if (mode == TrainMode::kJoint) return joint->config();
  return relation->config();
}

void ModelSet::save(const fs::path& dir) const {
  fs::create_directories(dir);
  std::ofstream marker(dir / "mode");
  marker << to_string(mode) << "\n";
  marker.close();
  if (mode == TrainMode::kJoint) {
    joint->save(dir / "joint");
  } else {
    mention->save(dir / "mention");
    coref->save(dir / "coref");
    entity->save(dir / "entity");
    relation->save(dir / "relation");
  }
}

ModelSet ModelSet::load(const fs::path& dir) {
  ModelSet set;
  std::ifstream marker(dir / "mode");
  std::string mode_str;
  if (marker && std::getline(marker, mode_str) && mode_str == "pipeline") {
    set.mode = TrainMode::kPipeline;
    set.mention = JointModel::load(dir / "mention");
    set.coref = JointModel::load(dir / "coref");
    set.entity = JointModel::load(dir / "entity");
    set.relation = JointModel::load(dir / "relation");
  } else {
    set.mode = TrainMode::kJoint;
    // Either a bundle directory with joint/ inside, or a bare model dir.
    const fs::path joint_dir =
        fs::exists(dir / "joint" / "config.relex") ? dir / "joint" : dir;
    set.joint = JointModel::load(joint_dir);
  }
  return set;
}

ModelSet ModelSet::borrow_joint(JointModel& model) {
  ModelSet set;
  set.mode = TrainMode::kJoint;
  set.joint = std::shared_ptr<JointModel>(&model, [](JointModel*) {});
  return set;
}

}  // namespace relex
