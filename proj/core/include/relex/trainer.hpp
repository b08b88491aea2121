#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "relex/config.hpp"
#include "relex/evaluator.hpp"
#include "relex/model.hpp"
#include "relex/nn/graph.hpp"
#include "relex/types.hpp"

namespace relex {

uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c);

// Up to n_s negative spans for mention training: up to n_s/2 strict
// sub-spans of gold mentions, the rest random intra-sentence spans of
// length <= max_len. None equals a gold mention span. Deterministic given
// the seed.
std::vector<Span> sample_mention_negatives(const Document& doc, int n_s,
                                           int max_len, uint64_t seed);

struct CorefSamples {
  std::vector<std::pair<int, int>> positives;  // all intra-cluster pairs, i < j
  std::vector<std::pair<int, int>> negatives;  // cross-cluster, up to n_c
};
CorefSamples sample_coref_pairs(const Document& doc, int n_c, uint64_t seed);

// Up to n_r ordered gold-cluster pairs with no gold relation in that
// direction.
std::vector<std::pair<int, int>> sample_relation_negatives(const Document& doc,
                                                           int n_r,
                                                           uint64_t seed);

struct TaskLosses {
  std::optional<nn::Var> span;
  std::optional<nn::Var> coref;
  std::optional<nn::Var> entity;
  std::optional<nn::Var> relation;
};

// Weighted sum of the per-task sample-mean losses; absent tasks contribute 0.
nn::Var joint_loss(nn::Graph& g, const TaskLosses& losses,
                   const TrainConfig& cfg);

struct TaskMask {
  bool span = true;
  bool coref = true;
  bool entity = true;
  bool relation = true;
};

// Teacher-forced per-task losses for one document: every head consumes gold
// structure from the previous stage; negatives are sampled per document.
TaskLosses document_losses(const JointModel& model, nn::Graph& g,
                           const Document& doc, const TrainConfig& cfg,
                           const TaskMask& mask, uint64_t sample_seed);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  nlohmann::json dev_metrics;
  double selection_metric = 0.0;
};

struct TrainResult {
  std::filesystem::path checkpoint_dir;
  int best_epoch = -1;
  double best_metric = 0.0;
  std::vector<EpochRecord> epochs;
  nlohmann::json manifest;
};

// Joint or pipeline supervised training. Joint mode trains one model on the
// weighted multi-task loss; pipeline mode trains four per-task models, each
// with its own encoder. The best-dev checkpoint (by relation F1 for the
// joint model, per-task F1 for pipeline components) is kept in out_dir
// together with the run manifest.
class Trainer {
 public:
  explicit Trainer(Config cfg) : cfg_(std::move(cfg)) {}

  TrainResult train(const std::vector<Document>& train_docs,
                    const std::vector<Document>& dev_docs,
                    const std::filesystem::path& out_dir);

 private:
  Config cfg_;
};

}  // namespace relex
