#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "relex/config.hpp"
#include "relex/nn/graph.hpp"
#include "relex/subword.hpp"
#include "relex/types.hpp"

namespace relex {

// Contextualized embeddings for one document, one row per *dataset* token.
// Lives inside the Graph that produced it.
struct EncodedDocument {
  nn::Var token_embeddings;  // n_tokens x hidden
  std::vector<std::pair<int, int>> subword_ranges;  // dataset token -> [first, last) piece
  int hidden = 0;
};

// Bidirectional Transformer encoder trained within the model (the encoder
// identity is a config string; anything producing fixed-width per-subword
// vectors fits the contract). Dataset-token embeddings are pooled from the
// token's subword pieces.
class TransformerEncoder {
 public:
  TransformerEncoder(const ModelConfig& cfg, SubwordVocab vocab,
                     nn::ParameterStore& params, std::mt19937_64& init_rng);

  const SubwordVocab& vocab() const { return vocab_; }

  // Full forward pass; throws DataError for empty documents and ModelError
  // (naming the required length) when the piece sequence exceeds the
  // position capacity.
  EncodedDocument encode(nn::Graph& g, const Document& doc,
                         double dropout = 0.0) const;

  // Subword piece count the document needs.
  int required_positions(const Document& doc) const;

  // Enlarges the position table; rows beyond the current capacity are newly
  // initialized and trainable, existing rows are untouched. No-op when
  // max_needed <= capacity.
  void extend_positions(int max_needed);

  int position_capacity() const { return positions_->rows(); }
  int native_positions() const { return native_positions_; }
  int hidden() const { return hidden_; }

 private:
  nn::Var encoder_layer(nn::Graph& g, nn::Var x, int layer, double dropout) const;

  SubwordVocab vocab_;
  int hidden_ = 0;
  int layers_ = 0;
  int heads_ = 0;
  int ffn_dim_ = 0;
  int native_positions_ = 0;
  SubwordPool pool_ = SubwordPool::kMax;
  uint64_t extension_seed_ = 0;

  nn::Parameter* token_table_ = nullptr;
  nn::Parameter* positions_ = nullptr;
  nn::Parameter* embed_ln_gain_ = nullptr;
  nn::Parameter* embed_ln_bias_ = nullptr;
  struct LayerParams {
    nn::Parameter* wq;
    nn::Parameter* bq;
    nn::Parameter* wk;
    nn::Parameter* bk;
    nn::Parameter* wv;
    nn::Parameter* bv;
    nn::Parameter* wo;
    nn::Parameter* bo;
    nn::Parameter* attn_ln_gain;
    nn::Parameter* attn_ln_bias;
    nn::Parameter* ffn_w1;
    nn::Parameter* ffn_b1;
    nn::Parameter* ffn_w2;
    nn::Parameter* ffn_b2;
    nn::Parameter* ffn_ln_gain;
    nn::Parameter* ffn_ln_bias;
  };
  std::vector<LayerParams> layer_params_;
};

}  // namespace relex
