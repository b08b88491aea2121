#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "relex/nn/parameters.hpp"

namespace relex::nn {

// Reverse-mode autodiff on a per-forward-pass tape. Values are dense
// double matrices; a row vector models a single sample, an n x d matrix a
// batch. Losses are 1x1 nodes. Backward walks the tape in reverse creation
// order and accumulates into node grads and, for leaves, parameter grads.
class Graph {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  explicit Graph(bool training = false, uint64_t dropout_seed = 0);

  bool training() const { return training_; }

  Var constant(Matrix value);
  Var param(Parameter& p);

  Var matmul(Var a, Var b);     // A * B
  Var matmul_nt(Var a, Var b);  // A * B^T
  Var add(Var a, Var b);        // same shape
  Var add_rowvec(Var a, Var row);
  Var scale(Var a, double s);
  Var linear(Var x, Parameter& weight, Parameter& bias);  // x*W + b

  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  Var slice_cols(Var a, int start, int count);
  Var select_rows(Var a, std::vector<int> indices);

  // Row k of the result is the coordinatewise max over the rows of `a`
  // listed in groups[k]; an empty group yields a zero row (and routes no
  // gradient). Ties route gradient to the first attaining row.
  Var segment_max(Var a, std::vector<std::vector<int>> groups);

  Var relu(Var a);
  Var gelu(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var softmax_rows(Var a);
  Var layer_norm(Var x, Parameter& gain, Parameter& bias, double eps = 1e-12);
  Var dropout(Var a, double rate);  // identity unless training

  // Mean over rows of the summed per-element binary cross entropy, computed
  // from logits (numerically stable). `targets` must match the logits shape.
  Var bce_with_logits(Var logits, Matrix targets);
  // Mean over rows of softmax cross entropy against integer class targets.
  Var softmax_cross_entropy(Var logits, std::vector<int> targets);

  // Linear combination of 1x1 nodes.
  Var weighted_sum(const std::vector<std::pair<Var, double>>& terms);

  const Matrix& value(Var v) const;
  double scalar(Var v) const;

  // Seeds d(root)/d(root) = 1 and propagates; root must be 1x1.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Graph&, Node&)> backprop;
    Parameter* source = nullptr;
  };

  Var emplace(Matrix value, std::function<void(Graph&, Node&)> backprop,
              Parameter* source = nullptr);
  Node& node(Var v) { return nodes_[v.id]; }
  Matrix& grad_of(int id);

  std::vector<Node> nodes_;
  bool training_ = false;
  std::mt19937_64 dropout_rng_;
};

using Var = Graph::Var;

}  // namespace relex::nn
