#include "relex/mention_localizer.hpp"

#include <numeric>
#include <stdexcept>

#include "relex/errors.hpp"

namespace relex {

using nn::Graph;
using nn::Var;

MentionLocalizer::MentionLocalizer(const ModelConfig& cfg,
                                   nn::ParameterStore& params,
                                   std::mt19937_64& init_rng)
    : hidden_(cfg.encoder_hidden), max_span_len_(cfg.mention_max_span_len) {
  const int ffnn_hidden = cfg.resolved_ffnn_hidden();
  size_table_ = &params.create("mention.size_table", max_span_len_,
                               kMetaEmbeddingSize);
  nn::init_normal(size_table_->value, init_rng);
  w1_ = &params.create("mention.w1", feature_width(), ffnn_hidden);
  nn::init_normal(w1_->value, init_rng);
  b1_ = &params.create("mention.b1", 1, ffnn_hidden);
  b1_->decay = false;
  w2_ = &params.create("mention.w2", ffnn_hidden, 1);
  nn::init_normal(w2_->value, init_rng);
  b2_ = &params.create("mention.b2", 1, 1);
  b2_->decay = false;
}

std::vector<Span> MentionLocalizer::enumerate_spans(const Document& doc,
                                                    int max_len) {
  if (max_len < 1) throw std::invalid_argument("max span length must be >= 1");
  std::vector<Span> spans;
  for (const Sentence& sent : doc.sentences) {
    for (int start = sent.start; start < sent.end; ++start) {
      const int limit = std::min(sent.end, start + max_len);
      for (int end = start + 1; end <= limit; ++end) {
        spans.push_back(Span{start, end});
      }
    }
  }
  return spans;
}

Var MentionLocalizer::span_representations(Graph& g,
                                           const EncodedDocument& encoded,
                                           const std::vector<Span>& spans) const {
  const int n_tokens =
      static_cast<int>(g.value(encoded.token_embeddings).rows());
  std::vector<std::vector<int>> groups;
  groups.reserve(spans.size());
  for (const Span& span : spans) {
    if (span.start < 0 || span.start >= span.end || span.end > n_tokens) {
      throw ModelError("span [" + std::to_string(span.start) + ", " +
                       std::to_string(span.end) + ") out of bounds");
    }
    std::vector<int> group(static_cast<std::size_t>(span.length()));
    std::iota(group.begin(), group.end(), span.start);
    groups.push_back(std::move(group));
  }
  return g.segment_max(encoded.token_embeddings, std::move(groups));
}

Var MentionLocalizer::span_logits(Graph& g, Var span_reprs,
                                  const std::vector<Span>& spans,
                                  double dropout) const {
  std::vector<int> size_ids;
  size_ids.reserve(spans.size());
  for (const Span& span : spans) {
    if (span.length() > max_span_len_) {
      throw ModelError("span length " + std::to_string(span.length()) +
                       " exceeds the size table (max " +
                       std::to_string(max_span_len_) + ")");
    }
    size_ids.push_back(span.length() - 1);
  }
  Var size_emb = g.select_rows(g.param(*size_table_), std::move(size_ids));
  Var features = g.dropout(g.concat_cols({span_reprs, size_emb}), dropout);
  Var inner = g.relu(g.linear(features, *w1_, *b1_));
  return g.linear(inner, *w2_, *b2_);
}

std::vector<SpanScore> MentionLocalizer::score_spans(
    Graph& g, const EncodedDocument& encoded,
    const std::vector<Span>& spans) const {
  std::vector<SpanScore> out;
  if (spans.empty()) return out;
  Var reprs = span_representations(g, encoded, spans);
  Var probs = g.sigmoid(span_logits(g, reprs, spans));
  const nn::Matrix& p = g.value(probs);
  out.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    out.push_back(SpanScore{spans[i], p(static_cast<Eigen::Index>(i), 0)});
  }
  return out;
}

std::vector<SpanScore> MentionLocalizer::localize(Graph& g,
                                                  const EncodedDocument& encoded,
                                                  const Document& doc,
                                                  double threshold) const {
  std::vector<SpanScore> kept;
  const std::vector<Span> spans = enumerate_spans(doc, max_span_len_);
  for (const SpanScore& scored : score_spans(g, encoded, spans)) {
    if (scored.probability >= threshold) kept.push_back(scored);
  }
  return kept;
}

}  // namespace relex
