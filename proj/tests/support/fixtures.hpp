#pragma once

// Shared builders for unit and acceptance tests: tiny documents, a small
// model configuration, deterministic synthetic corpora, and a finite
// difference gradient checker.

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "relex/config.hpp"
#include "relex/model.hpp"
#include "relex/nn/graph.hpp"
#include "relex/subword.hpp"
#include "relex/types.hpp"

namespace fixtures {

// Document from sentence token lists, e.g. {{"Ann", "works"}, {"She", "left"}}.
inline relex::Document make_document(
    const std::vector<std::vector<std::string>>& sentences,
    const std::string& doc_id = "doc") {
  relex::Document doc;
  doc.doc_id = doc_id;
  for (const auto& sentence : sentences) {
    relex::Sentence sent;
    sent.start = doc.num_tokens();
    for (const std::string& surface : sentence) {
      relex::Token tok;
      tok.index = doc.num_tokens();
      tok.sentence_index = static_cast<int>(doc.sentences.size());
      tok.surface = surface;
      doc.tokens.push_back(tok);
    }
    sent.end = doc.num_tokens();
    doc.sentences.push_back(sent);
  }
  return doc;
}

// Adds a cluster of mentions (document-level spans) with one entity type.
inline int add_cluster(relex::Document& doc, const std::string& type,
                       const std::vector<relex::Span>& spans) {
  relex::EntityCluster cluster;
  cluster.entity_type = type;
  for (const relex::Span& span : spans) {
    cluster.mentions.push_back(static_cast<int>(doc.gold_mentions.size()));
    doc.gold_mentions.push_back({span, type});
  }
  doc.gold_clusters.push_back(cluster);
  return static_cast<int>(doc.gold_clusters.size()) - 1;
}

inline relex::ModelConfig small_model_config() {
  relex::ModelConfig cfg;
  cfg.encoder_hidden = 32;
  cfg.encoder_layers = 2;
  cfg.encoder_heads = 4;
  cfg.encoder_ffn = 64;
  cfg.encoder_max_subwords = 128;
  cfg.ffnn_hidden = 32;
  cfg.mention_max_span_len = 5;
  cfg.relation_types = {"r:based_in", "r:founded", "r:part_of"};
  cfg.entity_types = {"LOC", "ORG", "PER"};
  return cfg;
}

inline relex::SubwordVocab vocab_for(const std::vector<relex::Document>& docs) {
  return relex::SubwordVocab::build(docs, /*max_words=*/4096, /*min_freq=*/1);
}

// Relative-error finite difference check of d(loss)/d(parameter) for a
// sample of coordinates. `loss` must rebuild the forward pass from scratch
// (it is called repeatedly with perturbed parameter values).
struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
};

inline GradCheckResult check_gradients(
    relex::nn::ParameterStore& params,
    const std::function<double(bool with_grad)>& loss, int max_coords_per_param = 4,
    double step = 1e-5, uint64_t seed = 7) {
  params.zero_grads();
  loss(/*with_grad=*/true);
  std::mt19937_64 rng(seed);
  GradCheckResult result;
  // Central differences with this step carry ~1e-10 absolute noise, so the
  // relative comparison is only resolvable for gradients >= 1e-6; the
  // denominator floor encodes that.
  const double floor = 1e-6;
  for (relex::nn::Parameter* p : params.all()) {
    if (!p->trainable || p->grad.size() == 0) continue;
    const int total = static_cast<int>(p->value.size());
    for (int k = 0; k < std::min(max_coords_per_param, total); ++k) {
      const int idx = static_cast<int>(rng() % static_cast<uint64_t>(total));
      const double analytic = p->grad.data()[idx];
      const double original = p->value.data()[idx];
      p->value.data()[idx] = original + step;
      const double up = loss(false);
      p->value.data()[idx] = original - step;
      const double down = loss(false);
      p->value.data()[idx] = original;
      const double numeric = (up - down) / (2.0 * step);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      result.max_rel_error =
          std::max(result.max_rel_error, std::abs(analytic - numeric) / denom);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace fixtures
