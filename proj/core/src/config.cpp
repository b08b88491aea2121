#include "relex/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

#include "relex/errors.hpp"

namespace relex {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Applier {
  std::vector<std::string> errors;

  void fail(const std::string& key, const std::string& what) {
    errors.push_back(key + ": " + what);
  }

  bool parse_int(const std::string& key, const std::string& v, int& out) {
    try {
      std::size_t used = 0;
      const int parsed = std::stoi(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      out = parsed;
      return true;
    } catch (const std::exception&) {
      fail(key, "expected an integer, got '" + v + "'");
      return false;
    }
  }

  bool parse_u64(const std::string& key, const std::string& v, uint64_t& out) {
    try {
      std::size_t used = 0;
      const unsigned long long parsed = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      out = parsed;
      return true;
    } catch (const std::exception&) {
      fail(key, "expected an unsigned integer, got '" + v + "'");
      return false;
    }
  }

  bool parse_double(const std::string& key, const std::string& v, double& out) {
    try {
      std::size_t used = 0;
      const double parsed = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      out = parsed;
      return true;
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + v + "'");
      return false;
    }
  }

  bool parse_bool(const std::string& key, const std::string& v, bool& out) {
    if (v == "true" || v == "1" || v == "yes") {
      out = true;
      return true;
    }
    if (v == "false" || v == "0" || v == "no") {
      out = false;
      return true;
    }
    fail(key, "expected true/false, got '" + v + "'");
    return false;
  }
};

}  // namespace

int ModelConfig::entity_type_index(const std::string& type) const {
  const auto it = std::find(entity_types.begin(), entity_types.end(), type);
  return it == entity_types.end()
             ? -1
             : static_cast<int>(it - entity_types.begin());
}

int ModelConfig::relation_type_index(const std::string& type) const {
  const auto it = std::find(relation_types.begin(), relation_types.end(), type);
  return it == relation_types.end()
             ? -1
             : static_cast<int>(it - relation_types.begin());
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    }
    entries[key] = value;
  }
  return entries;
}

void apply_config_entries(const std::map<std::string, std::string>& entries,
                          Config& cfg) {
  Applier ap;
  for (const auto& [key, value] : entries) {
    if (key == "encoder.name") {
      cfg.model.encoder_name = value;
    } else if (key == "encoder.hidden") {
      ap.parse_int(key, value, cfg.model.encoder_hidden);
    } else if (key == "encoder.layers") {
      ap.parse_int(key, value, cfg.model.encoder_layers);
    } else if (key == "encoder.heads") {
      ap.parse_int(key, value, cfg.model.encoder_heads);
    } else if (key == "encoder.ffn") {
      ap.parse_int(key, value, cfg.model.encoder_ffn);
    } else if (key == "encoder.max_subwords") {
      ap.parse_int(key, value, cfg.model.encoder_max_subwords);
    } else if (key == "encoder.subword_pool") {
      if (value == "max") {
        cfg.model.encoder_subword_pool = SubwordPool::kMax;
      } else if (value == "first") {
        cfg.model.encoder_subword_pool = SubwordPool::kFirst;
      } else {
        ap.fail(key, "expected max|first, got '" + value + "'");
      }
    } else if (key == "encoder.vocab_max") {
      ap.parse_int(key, value, cfg.model.encoder_vocab_max);
    } else if (key == "encoder.vocab_min_freq") {
      ap.parse_int(key, value, cfg.model.encoder_vocab_min_freq);
    } else if (key == "mention.max_span_len") {
      ap.parse_int(key, value, cfg.model.mention_max_span_len);
    } else if (key == "mention.threshold") {
      ap.parse_double(key, value, cfg.model.mention_threshold);
    } else if (key == "coref.threshold") {
      ap.parse_double(key, value, cfg.model.coref_threshold);
    } else if (key == "coref.max_edit_distance") {
      ap.parse_int(key, value, cfg.model.coref_max_edit_distance);
    } else if (key == "entity.types") {
      cfg.model.entity_types = split_list(value);
    } else if (key == "rel.head") {
      if (value == "grc") {
        cfg.model.rel_head = RelationHead::kGrc;
      } else if (value == "mrc") {
        cfg.model.rel_head = RelationHead::kMrc;
      } else {
        ap.fail(key, "expected grc|mrc, got '" + value + "'");
      }
    } else if (key == "rel.threshold") {
      ap.parse_double(key, value, cfg.model.rel_threshold);
    } else if (key == "rel.ablate_entity_repr") {
      ap.parse_bool(key, value, cfg.model.rel_ablate_entity_repr);
    } else if (key == "rel.ablate_local_context") {
      ap.parse_bool(key, value, cfg.model.rel_ablate_local_context);
    } else if (key == "rel.intra_sentence_only") {
      ap.parse_bool(key, value, cfg.model.rel_intra_sentence_only);
    } else if (key == "rel.max_sentence_distance") {
      ap.parse_int(key, value, cfg.model.rel_max_sentence_distance);
    } else if (key == "rel.max_token_distance") {
      ap.parse_int(key, value, cfg.model.rel_max_token_distance);
    } else if (key == "rel.pair_chunk") {
      ap.parse_int(key, value, cfg.model.rel_pair_chunk);
    } else if (key == "rel.types") {
      cfg.model.relation_types = split_list(value);
    } else if (key == "ffnn.hidden") {
      ap.parse_int(key, value, cfg.model.ffnn_hidden);
    } else if (key == "train.mode") {
      if (value == "joint") {
        cfg.train.mode = TrainMode::kJoint;
      } else if (value == "pipeline") {
        cfg.train.mode = TrainMode::kPipeline;
      } else {
        ap.fail(key, "expected joint|pipeline, got '" + value + "'");
      }
    } else if (key == "train.epochs") {
      ap.parse_int(key, value, cfg.train.epochs);
    } else if (key == "train.peak_lr") {
      ap.parse_double(key, value, cfg.train.peak_lr);
    } else if (key == "train.warmup_fraction") {
      ap.parse_double(key, value, cfg.train.warmup_fraction);
    } else if (key == "train.dropout") {
      ap.parse_double(key, value, cfg.train.dropout);
    } else if (key == "train.weight_decay") {
      ap.parse_double(key, value, cfg.train.weight_decay);
    } else if (key == "train.adam_beta1") {
      ap.parse_double(key, value, cfg.train.adam_beta1);
    } else if (key == "train.adam_beta2") {
      ap.parse_double(key, value, cfg.train.adam_beta2);
    } else if (key == "train.adam_eps") {
      ap.parse_double(key, value, cfg.train.adam_eps);
    } else if (key == "train.grad_accumulation") {
      ap.parse_int(key, value, cfg.train.grad_accumulation);
    } else if (key == "train.seed") {
      ap.parse_u64(key, value, cfg.train.seed);
    } else if (key == "train.neg_mentions") {
      ap.parse_int(key, value, cfg.train.neg_mention_count);
    } else if (key == "train.neg_corefs") {
      ap.parse_int(key, value, cfg.train.neg_coref_count);
    } else if (key == "train.neg_relations") {
      ap.parse_int(key, value, cfg.train.neg_relation_count);
    } else if (key == "train.beta_span") {
      ap.parse_double(key, value, cfg.train.beta_span);
    } else if (key == "train.beta_coref") {
      ap.parse_double(key, value, cfg.train.beta_coref);
    } else if (key == "train.beta_entity") {
      ap.parse_double(key, value, cfg.train.beta_entity);
    } else if (key == "train.beta_relation") {
      ap.parse_double(key, value, cfg.train.beta_relation);
    } else if (key == "train.eval_every") {
      ap.parse_int(key, value, cfg.train.eval_every);
    } else {
      ap.fail(key, "unknown configuration key");
    }
  }
  if (!ap.errors.empty()) {
    std::string msg = "configuration errors:";
    for (const std::string& e : ap.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
}

void validate_config(const Config& cfg) {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) errors.push_back(what);
  };
  const ModelConfig& m = cfg.model;
  check(m.encoder_hidden > 0, "encoder.hidden must be positive");
  check(m.encoder_layers > 0, "encoder.layers must be positive");
  check(m.encoder_heads > 0, "encoder.heads must be positive");
  check(m.encoder_hidden % std::max(1, m.encoder_heads) == 0,
        "encoder.hidden must be divisible by encoder.heads");
  check(m.encoder_ffn > 0, "encoder.ffn must be positive");
  check(m.encoder_max_subwords > 0, "encoder.max_subwords must be positive");
  check(m.mention_max_span_len >= 1, "mention.max_span_len must be >= 1");
  check(m.mention_threshold >= 0.0 && m.mention_threshold <= 1.0,
        "mention.threshold must be in [0, 1]");
  check(m.coref_threshold >= 0.0 && m.coref_threshold <= 1.0,
        "coref.threshold must be in [0, 1]");
  check(m.coref_max_edit_distance >= 0, "coref.max_edit_distance must be >= 0");
  check(!m.entity_types.empty(), "entity.types must be non-empty");
  check(m.rel_threshold < 0.0 ||
            (m.rel_threshold >= 0.0 && m.rel_threshold <= 1.0),
        "rel.threshold must be in [0, 1]");
  check(m.rel_max_sentence_distance >= 0,
        "rel.max_sentence_distance must be >= 0");
  check(m.rel_max_token_distance >= 0, "rel.max_token_distance must be >= 0");
  check(m.rel_pair_chunk > 0, "rel.pair_chunk must be positive");
  const TrainConfig& t = cfg.train;
  check(t.epochs > 0, "train.epochs must be positive");
  check(t.peak_lr > 0.0, "train.peak_lr must be positive");
  check(t.warmup_fraction >= 0.0 && t.warmup_fraction <= 1.0,
        "train.warmup_fraction must be in [0, 1]");
  check(t.dropout >= 0.0 && t.dropout < 1.0, "train.dropout must be in [0, 1)");
  check(t.weight_decay >= 0.0, "train.weight_decay must be >= 0");
  check(t.grad_accumulation >= 1, "train.grad_accumulation must be >= 1");
  check(t.neg_mention_count >= 0, "train.neg_mentions must be >= 0");
  check(t.neg_coref_count >= 0, "train.neg_corefs must be >= 0");
  check(t.neg_relation_count >= 0, "train.neg_relations must be >= 0");
  check(t.beta_span >= 0.0 && t.beta_coref >= 0.0 && t.beta_entity >= 0.0 &&
            t.beta_relation >= 0.0,
        "loss weights must be >= 0");
  check(t.eval_every >= 1, "train.eval_every must be >= 1");
  if (!errors.empty()) {
    std::string msg = "configuration errors:";
    for (const std::string& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
}

namespace {

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (const std::string& item : items) {
    if (!out.empty()) out += ",";
    out += item;
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

std::map<std::string, std::string> config_entries(const Config& cfg) {
  const ModelConfig& m = cfg.model;
  const TrainConfig& t = cfg.train;
  std::map<std::string, std::string> e;
  e["encoder.name"] = m.encoder_name;
  e["encoder.hidden"] = std::to_string(m.encoder_hidden);
  e["encoder.layers"] = std::to_string(m.encoder_layers);
  e["encoder.heads"] = std::to_string(m.encoder_heads);
  e["encoder.ffn"] = std::to_string(m.encoder_ffn);
  e["encoder.max_subwords"] = std::to_string(m.encoder_max_subwords);
  e["encoder.subword_pool"] = to_string(m.encoder_subword_pool);
  e["encoder.vocab_max"] = std::to_string(m.encoder_vocab_max);
  e["encoder.vocab_min_freq"] = std::to_string(m.encoder_vocab_min_freq);
  e["mention.max_span_len"] = std::to_string(m.mention_max_span_len);
  e["mention.threshold"] = fmt(m.mention_threshold);
  e["coref.threshold"] = fmt(m.coref_threshold);
  e["coref.max_edit_distance"] = std::to_string(m.coref_max_edit_distance);
  e["entity.types"] = join_list(m.entity_types);
  e["rel.head"] = to_string(m.rel_head);
  e["rel.threshold"] = fmt(m.resolved_rel_threshold());
  e["rel.ablate_entity_repr"] = m.rel_ablate_entity_repr ? "true" : "false";
  e["rel.ablate_local_context"] = m.rel_ablate_local_context ? "true" : "false";
  e["rel.intra_sentence_only"] = m.rel_intra_sentence_only ? "true" : "false";
  e["rel.max_sentence_distance"] = std::to_string(m.rel_max_sentence_distance);
  e["rel.max_token_distance"] = std::to_string(m.rel_max_token_distance);
  e["rel.pair_chunk"] = std::to_string(m.rel_pair_chunk);
  e["rel.types"] = join_list(m.relation_types);
  e["ffnn.hidden"] = std::to_string(m.resolved_ffnn_hidden());
  e["train.mode"] = to_string(t.mode);
  e["train.epochs"] = std::to_string(t.epochs);
  e["train.peak_lr"] = fmt(t.peak_lr);
  e["train.warmup_fraction"] = fmt(t.warmup_fraction);
  e["train.dropout"] = fmt(t.dropout);
  e["train.weight_decay"] = fmt(t.weight_decay);
  e["train.adam_beta1"] = fmt(t.adam_beta1);
  e["train.adam_beta2"] = fmt(t.adam_beta2);
  e["train.adam_eps"] = fmt(t.adam_eps);
  e["train.grad_accumulation"] = std::to_string(t.grad_accumulation);
  e["train.seed"] = std::to_string(t.seed);
  e["train.neg_mentions"] = std::to_string(t.neg_mention_count);
  e["train.neg_corefs"] = std::to_string(t.neg_coref_count);
  e["train.neg_relations"] = std::to_string(t.neg_relation_count);
  e["train.beta_span"] = fmt(t.beta_span);
  e["train.beta_coref"] = fmt(t.beta_coref);
  e["train.beta_entity"] = fmt(t.beta_entity);
  e["train.beta_relation"] = fmt(t.beta_relation);
  e["train.eval_every"] = std::to_string(t.eval_every);
  return e;
}

std::string to_string(RelationHead head) {
  return head == RelationHead::kGrc ? "grc" : "mrc";
}

std::string to_string(TrainMode mode) {
  return mode == TrainMode::kJoint ? "joint" : "pipeline";
}

std::string to_string(SubwordPool pool) {
  return pool == SubwordPool::kMax ? "max" : "first";
}

}  // namespace relex
