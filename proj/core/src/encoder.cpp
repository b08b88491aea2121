#include "relex/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "relex/errors.hpp"

namespace relex {

using nn::Graph;
using nn::Matrix;
using nn::Parameter;
using nn::Var;

TransformerEncoder::TransformerEncoder(const ModelConfig& cfg,
                                       SubwordVocab vocab,
                                       nn::ParameterStore& params,
                                       std::mt19937_64& init_rng)
    : vocab_(std::move(vocab)),
      hidden_(cfg.encoder_hidden),
      layers_(cfg.encoder_layers),
      heads_(cfg.encoder_heads),
      ffn_dim_(cfg.encoder_ffn),
      native_positions_(cfg.encoder_max_subwords),
      pool_(cfg.encoder_subword_pool),
      extension_seed_(init_rng()) {
  auto weight = [&](const std::string& name, int rows, int cols) {
    Parameter& p = params.create(name, rows, cols);
    nn::init_normal(p.value, init_rng);
    return &p;
  };
  auto bias = [&](const std::string& name, int cols) {
    Parameter& p = params.create(name, 1, cols);
    p.decay = false;
    return &p;
  };
  auto ln = [&](const std::string& name) {
    Parameter& gain = params.create(name + ".gain", 1, hidden_);
    gain.value.setOnes();
    gain.decay = false;
    Parameter& b = params.create(name + ".bias", 1, hidden_);
    b.decay = false;
    return std::make_pair(&gain, &b);
  };

  token_table_ =
      weight("encoder.token_table", std::max(1, vocab_.size()), hidden_);
  positions_ = weight("encoder.positions", native_positions_, hidden_);
  std::tie(embed_ln_gain_, embed_ln_bias_) = ln("encoder.embed_ln");
  layer_params_.resize(static_cast<std::size_t>(layers_));
  for (int l = 0; l < layers_; ++l) {
    const std::string prefix = "encoder.layer" + std::to_string(l);
    LayerParams& lp = layer_params_[static_cast<std::size_t>(l)];
    lp.wq = weight(prefix + ".wq", hidden_, hidden_);
    lp.bq = bias(prefix + ".bq", hidden_);
    lp.wk = weight(prefix + ".wk", hidden_, hidden_);
    lp.bk = bias(prefix + ".bk", hidden_);
    lp.wv = weight(prefix + ".wv", hidden_, hidden_);
    lp.bv = bias(prefix + ".bv", hidden_);
    lp.wo = weight(prefix + ".wo", hidden_, hidden_);
    lp.bo = bias(prefix + ".bo", hidden_);
    std::tie(lp.attn_ln_gain, lp.attn_ln_bias) = ln(prefix + ".attn_ln");
    lp.ffn_w1 = weight(prefix + ".ffn_w1", hidden_, ffn_dim_);
    lp.ffn_b1 = bias(prefix + ".ffn_b1", ffn_dim_);
    lp.ffn_w2 = weight(prefix + ".ffn_w2", ffn_dim_, hidden_);
    lp.ffn_b2 = bias(prefix + ".ffn_b2", hidden_);
    std::tie(lp.ffn_ln_gain, lp.ffn_ln_bias) = ln(prefix + ".ffn_ln");
  }
}

int TransformerEncoder::required_positions(const Document& doc) const {
  int total = 0;
  for (const Token& tok : doc.tokens) {
    total += static_cast<int>(vocab_.tokenize(tok.surface).size());
  }
  return total;
}

void TransformerEncoder::extend_positions(int max_needed) {
  if (max_needed <= position_capacity()) return;
  // Fresh rows use the standard initializer, seeded deterministically per
  // extension so repeated runs agree.
  std::mt19937_64 rng(extension_seed_ ^
                      (0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(max_needed)));
  std::normal_distribution<double> dist(0.0, 0.02);
  positions_->extend_rows(max_needed, [&](Eigen::Ref<Eigen::RowVectorXd> row) {
    for (Eigen::Index i = 0; i < row.size(); ++i) row(i) = dist(rng);
  });
}

Var TransformerEncoder::encoder_layer(Graph& g, Var x, int layer,
                                      double dropout) const {
  const LayerParams& lp = layer_params_[static_cast<std::size_t>(layer)];
  const int head_dim = hidden_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  Var q = g.linear(x, *lp.wq, *lp.bq);
  Var k = g.linear(x, *lp.wk, *lp.bk);
  Var v = g.linear(x, *lp.wv, *lp.bv);
  std::vector<Var> head_outputs;
  head_outputs.reserve(static_cast<std::size_t>(heads_));
  for (int h = 0; h < heads_; ++h) {
    Var qh = g.slice_cols(q, h * head_dim, head_dim);
    Var kh = g.slice_cols(k, h * head_dim, head_dim);
    Var vh = g.slice_cols(v, h * head_dim, head_dim);
    Var attn = g.softmax_rows(g.scale(g.matmul_nt(qh, kh), scale));
    attn = g.dropout(attn, dropout);
    head_outputs.push_back(g.matmul(attn, vh));
  }
  Var attn_out = g.linear(g.concat_cols(head_outputs), *lp.wo, *lp.bo);
  attn_out = g.dropout(attn_out, dropout);
  Var x1 = g.layer_norm(g.add(x, attn_out), *lp.attn_ln_gain, *lp.attn_ln_bias);

  Var ffn = g.linear(g.gelu(g.linear(x1, *lp.ffn_w1, *lp.ffn_b1)), *lp.ffn_w2,
                     *lp.ffn_b2);
  ffn = g.dropout(ffn, dropout);
  return g.layer_norm(g.add(x1, ffn), *lp.ffn_ln_gain, *lp.ffn_ln_bias);
}

EncodedDocument TransformerEncoder::encode(Graph& g, const Document& doc,
                                           double dropout) const {
  if (doc.tokens.empty()) {
    throw DataError("document '" + doc.doc_id + "' is empty");
  }
  std::vector<int> piece_ids;
  std::vector<std::pair<int, int>> ranges;
  ranges.reserve(doc.tokens.size());
  for (const Token& tok : doc.tokens) {
    const std::vector<int> pieces = vocab_.tokenize(tok.surface);
    const int first = static_cast<int>(piece_ids.size());
    for (int id : pieces) {
      if (id >= token_table_->rows()) id = SubwordVocab::kUnkId;
      piece_ids.push_back(id);
    }
    ranges.emplace_back(first, static_cast<int>(piece_ids.size()));
  }
  const int n_pieces = static_cast<int>(piece_ids.size());
  if (n_pieces > position_capacity()) {
    throw ModelError("document '" + doc.doc_id + "' needs " +
                     std::to_string(n_pieces) +
                     " positions but the table holds " +
                     std::to_string(position_capacity()) +
                     "; extend positions before encoding");
  }

  std::vector<int> position_ids(static_cast<std::size_t>(n_pieces));
  std::iota(position_ids.begin(), position_ids.end(), 0);
  Var tok_emb = g.select_rows(g.param(*token_table_), piece_ids);
  Var pos_emb = g.select_rows(g.param(*positions_), position_ids);
  Var x = g.layer_norm(g.add(tok_emb, pos_emb), *embed_ln_gain_, *embed_ln_bias_);
  x = g.dropout(x, dropout);
  for (int l = 0; l < layers_; ++l) {
    x = encoder_layer(g, x, l, dropout);
  }

  // Bridge subwords back to dataset tokens.
  EncodedDocument out;
  out.hidden = hidden_;
  out.subword_ranges = ranges;
  if (pool_ == SubwordPool::kFirst) {
    std::vector<int> firsts;
    firsts.reserve(ranges.size());
    for (const auto& [first, last] : ranges) firsts.push_back(first);
    out.token_embeddings = g.select_rows(x, firsts);
  } else {
    std::vector<std::vector<int>> groups;
    groups.reserve(ranges.size());
    for (const auto& [first, last] : ranges) {
      std::vector<int> group(static_cast<std::size_t>(last - first));
      std::iota(group.begin(), group.end(), first);
      groups.push_back(std::move(group));
    }
    out.token_embeddings = g.segment_max(x, std::move(groups));
  }
  return out;
}

}  // namespace relex
