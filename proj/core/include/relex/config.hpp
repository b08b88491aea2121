#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace relex {

constexpr int kMetaEmbeddingSize = 25;  // span size, edit distance, entity type, mention distances

enum class RelationHead { kGrc, kMrc };
enum class TrainMode { kJoint, kPipeline };
enum class SubwordPool { kMax, kFirst };

struct ModelConfig {
  // encoder.*
  std::string encoder_name = "scratch-transformer";
  int encoder_hidden = 768;
  int encoder_layers = 12;
  int encoder_heads = 12;
  int encoder_ffn = 3072;
  int encoder_max_subwords = 512;  // native position capacity
  SubwordPool encoder_subword_pool = SubwordPool::kMax;
  int encoder_vocab_max = 30000;
  int encoder_vocab_min_freq = 1;

  // mention.*
  int mention_max_span_len = 10;
  double mention_threshold = 0.85;

  // coref.*
  double coref_threshold = 0.85;
  int coref_max_edit_distance = 50;

  // entity.* (ordered list; order defines type indices and tie-breaks)
  std::vector<std::string> entity_types = {"LOC", "MISC", "NUM",
                                           "ORG", "PER", "TIME"};

  // rel.*
  RelationHead rel_head = RelationHead::kMrc;
  double rel_threshold = -1.0;  // < 0: resolved per head (MRC 0.6, GRC 0.55)
  bool rel_ablate_entity_repr = false;
  bool rel_ablate_local_context = false;
  bool rel_intra_sentence_only = false;
  int rel_max_sentence_distance = 30;
  int rel_max_token_distance = 500;
  int rel_pair_chunk = 1024;
  // Resolved from the train split when empty; sorted for stable indices.
  std::vector<std::string> relation_types;

  // ffnn.* (two-layer classifier heads; inner width, <=0 means encoder_hidden)
  int ffnn_hidden = -1;

  double resolved_rel_threshold() const {
    if (rel_threshold >= 0.0) return rel_threshold;
    return rel_head == RelationHead::kMrc ? 0.6 : 0.55;
  }
  int resolved_ffnn_hidden() const {
    return ffnn_hidden > 0 ? ffnn_hidden : encoder_hidden;
  }
  int entity_type_index(const std::string& type) const;    // -1 if unknown
  int relation_type_index(const std::string& type) const;  // -1 if unknown
};

struct TrainConfig {
  TrainMode mode = TrainMode::kJoint;
  int epochs = 20;
  double peak_lr = 5e-5;
  double warmup_fraction = 0.1;  // not stated in the source work; see manifest
  double dropout = 0.1;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-6;
  int grad_accumulation = 1;
  uint64_t seed = 42;

  // negative sample counts per document
  int neg_mention_count = 200;  // N_s
  int neg_coref_count = 200;    // N_c
  int neg_relation_count = 200; // N_r

  // multi-task loss weights
  double beta_span = 1.0;
  double beta_coref = 1.0;
  double beta_entity = 0.25;
  double beta_relation = 1.0;

  int eval_every = 1;  // dev evaluation cadence in epochs
};

struct Config {
  ModelConfig model;
  TrainConfig train;
};

// Key/value config file: one `key = value` per line, `#` starts a comment.
// Unknown keys are hard errors; all validation failures are reported at once.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Applies `entries` on top of `cfg`. Throws ConfigError listing every unknown
// key and invalid value.
void apply_config_entries(const std::map<std::string, std::string>& entries,
                          Config& cfg);

// Range/consistency checks independent of where values came from.
void validate_config(const Config& cfg);

// Full effective config as config-file entries (for manifests).
std::map<std::string, std::string> config_entries(const Config& cfg);

std::string to_string(RelationHead head);
std::string to_string(TrainMode mode);
std::string to_string(SubwordPool pool);

}  // namespace relex
