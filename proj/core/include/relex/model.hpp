#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "relex/config.hpp"
#include "relex/coref_resolver.hpp"
#include "relex/encoder.hpp"
#include "relex/entity_classifier.hpp"
#include "relex/mention_localizer.hpp"
#include "relex/nn/parameters.hpp"
#include "relex/relation_classifier.hpp"
#include "relex/subword.hpp"

namespace relex {

// Encoder plus the four task heads over one parameter store. Construction
// checks the dimensional contracts of every head and throws ModelError on
// violation. Checkpoint directory layout:
//   config.relex   effective model config (key/value format)
//   vocab.txt      subword vocabulary
//   weights.bin    parameter values
class JointModel {
 public:
  JointModel(ModelConfig cfg, SubwordVocab vocab, uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }

  TransformerEncoder& encoder() { return *encoder_; }
  const TransformerEncoder& encoder() const { return *encoder_; }
  MentionLocalizer& mention_localizer() { return *mention_; }
  const MentionLocalizer& mention_localizer() const { return *mention_; }
  CorefResolver& coref_resolver() { return *coref_; }
  const CorefResolver& coref_resolver() const { return *coref_; }
  EntityClassifier& entity_classifier() { return *entity_; }
  const EntityClassifier& entity_classifier() const { return *entity_; }
  RelationClassifier& relation_classifier() { return *relation_; }
  const RelationClassifier& relation_classifier() const { return *relation_; }

  void save(const std::filesystem::path& dir) const;
  static std::unique_ptr<JointModel> load(const std::filesystem::path& dir);

 private:
  void check_dimensions() const;

  ModelConfig cfg_;
  nn::ParameterStore params_;
  std::unique_ptr<TransformerEncoder> encoder_;
  std::unique_ptr<MentionLocalizer> mention_;
  std::unique_ptr<CorefResolver> coref_;
  std::unique_ptr<EntityClassifier> entity_;
  std::unique_ptr<RelationClassifier> relation_;
};

// The trained artifact handled by inference and the CLI: a single joint
// model, or four per-task models arranged in a pipeline (each with its own
// encoder).
struct ModelSet {
  TrainMode mode = TrainMode::kJoint;
  std::shared_ptr<JointModel> joint;
  std::shared_ptr<JointModel> mention;
  std::shared_ptr<JointModel> coref;
  std::shared_ptr<JointModel> entity;
  std::shared_ptr<JointModel> relation;

  const ModelConfig& primary_config() const;
  void save(const std::filesystem::path& dir) const;
  static ModelSet load(const std::filesystem::path& dir);
  // Non-owning view of a single model evaluated as a joint system.
  static ModelSet borrow_joint(JointModel& model);
};

}  // namespace relex
