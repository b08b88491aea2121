#pragma once

#include <random>
#include <vector>

#include "relex/config.hpp"
#include "relex/encoder.hpp"
#include "relex/nn/graph.hpp"
#include "relex/types.hpp"

namespace relex {

struct SpanScore {
  Span span;
  double probability = 0.0;
};

// Scores candidate spans as mention / non-mention: a span is represented by
// max-pooling its token embeddings, concatenated with a learned span size
// embedding, and classified by a two-layer feedforward net with inner ReLU.
class MentionLocalizer {
 public:
  MentionLocalizer(const ModelConfig& cfg, nn::ParameterStore& params,
                   std::mt19937_64& init_rng);

  int max_span_length() const { return max_span_len_; }
  int feature_width() const { return hidden_ + kMetaEmbeddingSize; }

  // All intra-sentence spans of length 1..max_len, ordered by (start, end).
  static std::vector<Span> enumerate_spans(const Document& doc, int max_len);

  // Max-pool over the span's token embedding rows; spans must be non-empty
  // and in bounds.
  nn::Var span_representations(nn::Graph& g, const EncodedDocument& encoded,
                               const std::vector<Span>& spans) const;

  // Classifier logits, one row per span. Span lengths must not exceed
  // max_span_length().
  nn::Var span_logits(nn::Graph& g, nn::Var span_reprs,
                      const std::vector<Span>& spans, double dropout = 0.0) const;

  std::vector<SpanScore> score_spans(nn::Graph& g,
                                     const EncodedDocument& encoded,
                                     const std::vector<Span>& spans) const;

  // Enumerates, scores, and keeps spans with probability >= threshold.
  std::vector<SpanScore> localize(nn::Graph& g, const EncodedDocument& encoded,
                                  const Document& doc, double threshold) const;

 private:
  int hidden_;
  int max_span_len_;
  nn::Parameter* size_table_;  // one row per span length 1..L_s
  nn::Parameter* w1_;
  nn::Parameter* b1_;
  nn::Parameter* w2_;
  nn::Parameter* b2_;
};

}  // namespace relex
