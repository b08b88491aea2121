#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "relex/config.hpp"
#include "relex/docred.hpp"
#include "relex/errors.hpp"
#include "relex/evaluator.hpp"
#include "relex/inference.hpp"
#include "relex/model.hpp"
#include "relex/text.hpp"
#include "relex/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

json config_json(const relex::Config& cfg) {
  json j = json::object();
  for (const auto& [key, value] : relex::config_entries(cfg)) j[key] = value;
  return j;
}

void write_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw relex::DataError("cannot write " + path);
  out << j.dump(2) << "\n";
}

struct ConfigCli {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value pairs from --set

  relex::Config resolve() const {
    relex::Config cfg;
    if (!config_path.empty()) {
      relex::apply_config_entries(relex::read_config_file(config_path), cfg);
    }
    std::map<std::string, std::string> entries;
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw relex::ConfigError("--set expects key=value, got '" + kv + "'");
      }
      entries[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    relex::apply_config_entries(entries, cfg);
    return cfg;
  }
};

void add_config_options(CLI::App* cmd, ConfigCli& cc) {
  cmd->add_option("--config", cc.config_path,
                  "key = value config file (unknown keys are errors)");
  cmd->add_option("--set", cc.overrides,
                  "config override, key=value (repeatable; wins over --config)");
}

std::vector<relex::Document> load_inputs(const std::vector<std::string>& paths) {
  std::vector<relex::Document> docs;
  for (const std::string& path : paths) {
    auto part = relex::load_docred(path);
    docs.insert(docs.end(), std::make_move_iterator(part.begin()),
                std::make_move_iterator(part.end()));
  }
  return docs;
}

int cmd_split(const std::vector<std::string>& inputs, uint64_t seed,
              const std::string& out_dir, int train_size, int dev_size,
              int test_size) {
  const auto docs = load_inputs(inputs);
  relex::SplitSizes sizes;
  sizes.train = train_size;
  sizes.dev = dev_size;
  sizes.test = test_size;
  const relex::SplitResult split = relex::make_end_to_end_split(docs, seed, sizes);
  for (const std::string& warning : split.warnings) {
    std::cerr << "warning: " << warning << "\n";
  }
  fs::create_directories(out_dir);
  relex::save_docred(split.train, (fs::path(out_dir) / "end_to_end_train.json").string());
  relex::save_docred(split.dev, (fs::path(out_dir) / "end_to_end_dev.json").string());
  relex::save_docred(split.test, (fs::path(out_dir) / "end_to_end_test.json").string());

  json manifest;
  manifest["seed"] = seed;
  manifest["input_documents"] = docs.size();
  manifest["filtered"] = split.filtered_ids.size();
  manifest["filtered_doc_ids"] = split.filtered_ids;
  manifest["warnings"] = split.warnings;
  auto stats_json = [](const std::vector<relex::Document>& part) {
    const relex::CorpusStatistics s = relex::corpus_statistics(part);
    return json{{"documents", s.documents},
                {"mentions", s.mentions},
                {"entities", s.entities},
                {"relations", s.relations}};
  };
  manifest["train"] = stats_json(split.train);
  manifest["dev"] = stats_json(split.dev);
  manifest["test"] = stats_json(split.test);
  write_json(manifest, (fs::path(out_dir) / "split_manifest.json").string());
  std::cout << "split written to " << out_dir << " (train "
            << split.train.size() << ", dev " << split.dev.size() << ", test "
            << split.test.size() << ", filtered " << split.filtered_ids.size()
            << ")\n";
  return kExitOk;
}

int cmd_train(const ConfigCli& cc, const std::string& train_path,
              const std::string& dev_path, const std::string& out_dir) {
  relex::Config cfg = cc.resolve();
  relex::validate_config(cfg);
  const auto train_docs = relex::load_docred(train_path);
  std::vector<relex::Document> dev_docs;
  if (!dev_path.empty()) dev_docs = relex::load_docred(dev_path);
  relex::Trainer trainer(cfg);
  const relex::TrainResult result = trainer.train(train_docs, dev_docs, out_dir);
  std::cout << "training done; best epoch " << result.best_epoch
            << " (selection metric " << result.best_metric << ")\n"
            << "checkpoint: " << result.checkpoint_dir.string() << "\n";
  return kExitOk;
}

relex::DocAnnotation annotation_from_json(const json& j) {
  relex::DocAnnotation ann;
  ann.doc_id = j.value("doc_id", "");
  for (const json& m : j.value("mentions", json::array())) {
    ann.mentions.push_back({m.at("start").get<int>(), m.at("end").get<int>()});
  }
  for (const json& c : j.value("clusters", json::array())) {
    ann.clusters.push_back(c.get<std::vector<int>>());
  }
  for (const json& e : j.value("entities", json::array())) {
    ann.cluster_types.push_back(e.value("type", ""));
  }
  ann.cluster_types.resize(ann.clusters.size());
  for (const json& r : j.value("relations", json::array())) {
    ann.relations.push_back({r.at("head").get<int>(), r.at("tail").get<int>(),
                             r.at("type").get<std::string>()});
  }
  return ann;
}

int cmd_eval(const ConfigCli& cc, const std::string& model_dir,
             const std::string& predictions_path, const std::string& data_path,
             bool gold_inputs, bool relation_only,
             const std::string& submission_path, const std::string& train_path,
             const std::string& report_path, int workers, double rel_threshold) {
  const auto gold = relex::load_docred(data_path);
  json report;
  report["data"] = data_path;

  if (!predictions_path.empty()) {
    std::ifstream in(predictions_path);
    if (!in) throw relex::DataError("cannot open " + predictions_path);
    json preds_json;
    in >> preds_json;
    if (relation_only) {
      // Submission format: [{title, h_idx, t_idx, r}]
      std::map<std::string, std::size_t> by_title;
      for (std::size_t i = 0; i < gold.size(); ++i) by_title[gold[i].doc_id] = i;
      std::vector<relex::GoldEntityRelations> preds(gold.size());
      for (std::size_t i = 0; i < gold.size(); ++i) preds[i].doc_id = gold[i].doc_id;
      for (const json& item : preds_json) {
        const auto it = by_title.find(item.at("title").get<std::string>());
        if (it == by_title.end()) {
          throw relex::DataError("prediction for unknown document '" +
                                 item.at("title").get<std::string>() + "'");
        }
        preds[it->second].relations.push_back(
            {item.at("h_idx").get<int>(), item.at("t_idx").get<int>(),
             item.at("r").get<std::string>()});
      }
      std::optional<relex::TrainFactIndex> facts;
      if (!train_path.empty()) {
        facts = relex::TrainFactIndex::build(relex::load_docred(train_path));
      }
      const relex::RelationOnlyMetrics metrics = relex::evaluate_gold_entities(
          preds, gold, facts ? &*facts : nullptr);
      report["relation_only"] = {
          {"precision", metrics.f1.precision},
          {"recall", metrics.f1.recall},
          {"f1", metrics.f1.f1},
          {"ign_precision", metrics.ign_f1.precision},
          {"ign_recall", metrics.ign_f1.recall},
          {"ign_f1", metrics.ign_f1.f1},
      };
      write_json(report, report_path);
      return kExitOk;
    }
    if (!preds_json.is_array() || preds_json.size() != gold.size()) {
      throw relex::DataError(
          "predictions must be an array parallel to the gold documents");
    }
    std::vector<relex::DocAnnotation> anns;
    for (const json& p : preds_json) anns.push_back(annotation_from_json(p));
    const relex::MetricReport metric_report = relex::evaluate_end_to_end(anns, gold);
    report["levels"] = metric_report.to_json();
    write_json(report, report_path);
    return kExitOk;
  }

  if (model_dir.empty()) {
    throw relex::ConfigError("eval needs --model or --predictions");
  }
  const relex::ModelSet models = relex::ModelSet::load(model_dir);
  relex::Config effective;
  effective.model = models.primary_config();
  report["config"] = config_json(effective);
  relex::ExtractOptions options;
  options.rel_threshold = rel_threshold;

  if (relation_only) {
    const auto gold_preds =
        relex::predict_with_gold_inputs(models, gold, options, workers);
    std::optional<relex::TrainFactIndex> facts;
    if (!train_path.empty()) {
      facts = relex::TrainFactIndex::build(relex::load_docred(train_path));
    }
    const relex::RelationOnlyMetrics metrics = relex::evaluate_gold_entities(
        gold_preds.relations_on_gold_entities, gold, facts ? &*facts : nullptr);
    report["relation_only"] = {
        {"precision", metrics.f1.precision},
        {"recall", metrics.f1.recall},
        {"f1", metrics.f1.f1},
        {"ign_precision", metrics.ign_f1.precision},
        {"ign_recall", metrics.ign_f1.recall},
        {"ign_f1", metrics.ign_f1.f1},
    };
    if (!submission_path.empty()) {
      write_json(relex::submission_json(gold_preds.relations_on_gold_entities),
                 submission_path);
    }
    write_json(report, report_path);
    return kExitOk;
  }

  if (gold_inputs) {
    const auto gold_preds =
        relex::predict_with_gold_inputs(models, gold, options, workers);
    relex::MatchCounts coref_counts;
    relex::MatchCounts entity_counts;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const relex::DocAnnotation gold_ann = relex::DocAnnotation::from_gold(gold[i]);
      coref_counts += relex::count_clusters(gold_preds.coref_on_gold_mentions[i], gold_ann);
      entity_counts += relex::count_entities(gold_preds.entities_on_gold_clusters[i], gold_ann);
    }
    const relex::RelationOnlyMetrics rel_metrics = relex::evaluate_gold_entities(
        gold_preds.relations_on_gold_entities, gold, nullptr);
    auto level_json = [](const relex::LevelMetrics& m) {
      return json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                  {"predicted", m.predicted}, {"gold", m.gold}, {"matched", m.matched}};
    };
    report["gold_inputs"] = {
        {"coref", level_json(relex::metrics_from_counts(coref_counts))},
        {"entity", level_json(relex::metrics_from_counts(entity_counts))},
        {"relation", level_json(rel_metrics.f1)},
    };
    write_json(report, report_path);
    return kExitOk;
  }

  const auto preds = relex::extract_corpus(models, gold, options, workers);
  std::vector<relex::DocAnnotation> anns;
  anns.reserve(preds.size());
  for (const relex::DocPrediction& p : preds) anns.push_back(p.annotation());
  const relex::MetricReport metric_report = relex::evaluate_end_to_end(anns, gold);
  report["levels"] = metric_report.to_json();
  write_json(report, report_path);
  return kExitOk;
}

int cmd_extract(const std::string& model_dir, const std::string& input_path,
                const std::string& out_path, int explain_k, bool as_text,
                int workers, double mention_threshold, double coref_threshold,
                double rel_threshold) {
  std::vector<relex::Document> docs;
  const bool text_mode =
      as_text || (input_path.size() > 4 &&
                  input_path.substr(input_path.size() - 4) == ".txt");
  if (text_mode) {
    std::ifstream in(input_path);
    if (!in) throw relex::DataError("cannot open " + input_path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    // Blank lines separate documents.
    std::vector<std::string> chunks;
    std::string current;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) {
        if (!current.empty()) chunks.push_back(current);
        current.clear();
      } else {
        current += line + "\n";
      }
    }
    if (!current.empty()) chunks.push_back(current);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      relex::Document doc = relex::tokenize_plain_text(
          chunks[i], input_path + "#" + std::to_string(i));
      if (doc.num_tokens() > 0) docs.push_back(std::move(doc));
    }
  } else {
    std::ifstream in(input_path);
    if (!in) throw relex::DataError("cannot open " + input_path);
    json root;
    try {
      in >> root;
    } catch (const json::exception& e) {
      throw relex::DataError(input_path + ": JSON parse failure: " + e.what());
    }
    // Annotations are optional on extraction inputs.
    for (json& doc : root) {
      if (!doc.contains("vertexSet")) doc["vertexSet"] = json::array();
      if (!doc.contains("labels")) doc["labels"] = json::array();
    }
    docs = relex::parse_docred(root, input_path);
  }

  json out = json::array();
  if (!docs.empty()) {
    const relex::ModelSet models = relex::ModelSet::load(model_dir);
    relex::ExtractOptions options;
    options.explain_k = explain_k;
    options.mention_threshold = mention_threshold;
    options.coref_threshold = coref_threshold;
    options.rel_threshold = rel_threshold;
    for (const relex::DocPrediction& pred :
         relex::extract_corpus(models, docs, options, workers)) {
      out.push_back(pred.to_json());
    }
  }
  write_json(out, out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entity-level relation extraction: split / train / eval / extract"};
  app.require_subcommand(1);

  // split
  auto* split = app.add_subcommand("split", "build the end-to-end corpus split");
  std::vector<std::string> split_inputs;
  uint64_t split_seed = 42;
  std::string split_out;
  int split_train = 3008;
  int split_dev = 300;
  int split_test = 700;
  split->add_option("--input", split_inputs, "DocRED JSON file(s) to merge")
      ->required()
      ->expected(-1);
  split->add_option("--seed", split_seed, "shuffle seed");
  split->add_option("--out", split_out, "output directory")->required();
  split->add_option("--train-size", split_train, "train partition size");
  split->add_option("--dev-size", split_dev, "dev partition size");
  split->add_option("--test-size", split_test, "test partition size");

  // train
  auto* train = app.add_subcommand("train", "train a joint or pipeline model");
  ConfigCli train_cfg;
  std::string train_data;
  std::string train_dev;
  std::string train_out = "checkpoint";
  std::string train_mode;
  std::string train_rel_head;
  add_config_options(train, train_cfg);
  train->add_option("--train", train_data, "train split (DocRED JSON)")->required();
  train->add_option("--dev", train_dev, "dev split for per-epoch evaluation");
  train->add_option("--out", train_out, "checkpoint directory");
  train->add_option("--mode", train_mode, "joint|pipeline (overrides config)");
  train->add_option("--rel-head", train_rel_head, "grc|mrc (overrides config)");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a model or stored predictions");
  ConfigCli eval_cfg;
  std::string eval_model;
  std::string eval_predictions;
  std::string eval_data;
  std::string eval_submission;
  std::string eval_train_data;
  std::string eval_report;
  std::string eval_level = "all";
  bool eval_gold_inputs = false;
  bool eval_relation_only = false;
  int eval_workers = 1;
  double eval_rel_threshold = -1.0;
  add_config_options(eval, eval_cfg);
  eval->add_option("--model", eval_model, "checkpoint directory");
  eval->add_option("--predictions", eval_predictions,
                   "stored predictions JSON instead of running a model");
  eval->add_option("--data", eval_data, "gold documents (DocRED JSON)")->required();
  eval->add_option("--level", eval_level, "all (four-level strict report)");
  eval->add_flag("--gold-inputs", eval_gold_inputs,
                 "evaluate each component on gold inputs");
  eval->add_flag("--relation-only", eval_relation_only,
                 "relation extraction with gold entities (plus Ign-F1)");
  eval->add_option("--export-submission", eval_submission,
                   "write submission-format JSON (relation-only mode)");
  eval->add_option("--train-data", eval_train_data,
                   "train split for the Ign-F1 fact index");
  eval->add_option("--out", eval_report, "report path (default: stdout)");
  eval->add_option("--workers", eval_workers, "parallel workers (default 1)");
  eval->add_option("--rel-threshold", eval_rel_threshold,
                   "override the relation threshold");

  // extract
  auto* extract = app.add_subcommand("extract", "run the end-to-end pipeline");
  std::string ex_model;
  std::string ex_input;
  std::string ex_out;
  int ex_explain = 0;
  bool ex_text = false;
  int ex_workers = 1;
  double ex_mention_threshold = -1.0;
  double ex_coref_threshold = -1.0;
  double ex_rel_threshold = -1.0;
  extract->add_option("--model", ex_model, "checkpoint directory")->required();
  extract->add_option("--input", ex_input, "DocRED JSON or plain text (.txt)")
      ->required();
  extract->add_option("--out", ex_out, "predictions path (default: stdout)");
  extract->add_option("--explain", ex_explain,
                      "attach up to K supporting mention pairs per triple (MRC)");
  extract->add_flag("--text", ex_text, "force plain-text input");
  extract->add_option("--workers", ex_workers, "parallel workers (default 1)");
  extract->add_option("--mention-threshold", ex_mention_threshold, "");
  extract->add_option("--coref-threshold", ex_coref_threshold, "");
  extract->add_option("--rel-threshold", ex_rel_threshold, "");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (split->parsed()) {
      return cmd_split(split_inputs, split_seed, split_out, split_train,
                       split_dev, split_test);
    }
    if (train->parsed()) {
      if (!train_mode.empty()) train_cfg.overrides.push_back("train.mode=" + train_mode);
      if (!train_rel_head.empty()) train_cfg.overrides.push_back("rel.head=" + train_rel_head);
      return cmd_train(train_cfg, train_data, train_dev, train_out);
    }
    if (eval->parsed()) {
      if (eval_level != "all") {
        throw relex::ConfigError("unsupported --level '" + eval_level + "'");
      }
      return cmd_eval(eval_cfg, eval_model, eval_predictions, eval_data,
                      eval_gold_inputs, eval_relation_only, eval_submission,
                      eval_train_data, eval_report, eval_workers,
                      eval_rel_threshold);
    }
    if (extract->parsed()) {
      return cmd_extract(ex_model, ex_input, ex_out, ex_explain, ex_text,
                         ex_workers, ex_mention_threshold, ex_coref_threshold,
                         ex_rel_threshold);
    }
  } catch (const relex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const relex::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
