#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "relex/evaluator.hpp"
#include "relex/model.hpp"
#include "relex/types.hpp"

namespace relex {

struct InstanceDetail {
  int head_mention = 0;  // index into the prediction's mention list
  int tail_mention = 0;
  double contribution = 0.0;
  int token_dist = 0;
  int head_sentence = 0;
  int tail_sentence = 0;
  std::string head_surface;
  std::string tail_surface;
};

struct PredictedRelation {
  int head = 0;  // cluster index
  int tail = 0;
  std::string relation_type;
  double score = 0.0;
  std::vector<InstanceDetail> instances;  // populated for MRC when requested
};

struct DocPrediction {
  std::string doc_id;
  std::vector<SpanScore> mentions;
  std::vector<std::vector<int>> clusters;
  std::vector<std::string> entity_types;
  std::vector<double> entity_scores;
  std::vector<PredictedRelation> relations;
  int encoder_passes = 0;

  nlohmann::json to_json() const;
  DocAnnotation annotation() const;
};

struct ExtractOptions {
  // < 0: use the model's configured thresholds
  double mention_threshold = -1.0;
  double coref_threshold = -1.0;
  double rel_threshold = -1.0;
  int explain_k = 0;  // per-triple top instances to attach (MRC only)
};

// Full document -> structured prediction. The joint model encodes the
// document exactly once; a pipeline runs one pass per component model.
DocPrediction extract(const ModelSet& models, const Document& doc,
                      const ExtractOptions& options = {});

std::vector<DocPrediction> extract_corpus(const ModelSet& models,
                                          const std::vector<Document>& docs,
                                          const ExtractOptions& options = {},
                                          int workers = 1);

// Top-k supporting mention pairs for one predicted triple, with sentence
// indices and surfaces attached. MRC only. `options` must be the options the
// prediction was made with, so the rerun reproduces the triple.
std::vector<InstanceDetail> explain(const ModelSet& models, const Document& doc,
                                    const DocPrediction& prediction,
                                    std::size_t relation_index, int k,
                                    const ExtractOptions& options = {});

// Component predictions on gold inputs (each stage consumes ground truth
// from the previous one): used for the gold-input evaluation setting.
struct GoldInputPredictions {
  std::vector<DocAnnotation> coref_on_gold_mentions;
  std::vector<DocAnnotation> entities_on_gold_clusters;
  std::vector<GoldEntityRelations> relations_on_gold_entities;
};

GoldInputPredictions predict_with_gold_inputs(const ModelSet& models,
                                              const std::vector<Document>& docs,
                                              const ExtractOptions& options = {},
                                              int workers = 1);

}  // namespace relex
