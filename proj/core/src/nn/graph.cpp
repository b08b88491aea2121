#include "relex/nn/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace relex::nn {

namespace {

double stable_sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

}  // namespace

Graph::Graph(bool training, uint64_t dropout_seed)
    : training_(training), dropout_rng_(dropout_seed) {}

Graph::Var Graph::emplace(Matrix value,
                          std::function<void(Graph&, Node&)> backprop,
                          Parameter* source) {
  Node n;
  n.value = std::move(value);
  n.backprop = std::move(backprop);
  n.source = source;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Matrix& Graph::grad_of(int id) {
  Node& n = nodes_[id];
  if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols()) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

const Matrix& Graph::value(Var v) const { return nodes_.at(v.id).value; }

double Graph::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) {
    throw std::logic_error("scalar() on non-1x1 node");
  }
  return m(0, 0);
}

Var Graph::constant(Matrix value) { return emplace(std::move(value), nullptr); }

Var Graph::param(Parameter& p) {
  return emplace(p.value, nullptr, &p);
}

Var Graph::matmul(Var a, Var b) {
  Matrix out = nodes_[a.id].value * nodes_[b.id].value;
  return emplace(std::move(out), [a, b](Graph& g, Node& n) {
    g.grad_of(a.id).noalias() += n.grad * g.nodes_[b.id].value.transpose();
    g.grad_of(b.id).noalias() += g.nodes_[a.id].value.transpose() * n.grad;
  });
}

Var Graph::matmul_nt(Var a, Var b) {
  Matrix out = nodes_[a.id].value * nodes_[b.id].value.transpose();
  return emplace(std::move(out), [a, b](Graph& g, Node& n) {
    g.grad_of(a.id).noalias() += n.grad * g.nodes_[b.id].value;
    g.grad_of(b.id).noalias() += n.grad.transpose() * g.nodes_[a.id].value;
  });
}

Var Graph::add(Var a, Var b) {
  Matrix out = nodes_[a.id].value + nodes_[b.id].value;
  return emplace(std::move(out), [a, b](Graph& g, Node& n) {
    g.grad_of(a.id) += n.grad;
    g.grad_of(b.id) += n.grad;
  });
}

Var Graph::add_rowvec(Var a, Var row) {
  const Matrix& r = nodes_[row.id].value;
  if (r.rows() != 1) throw std::logic_error("add_rowvec: rhs must be 1 x d");
  Matrix out = nodes_[a.id].value.rowwise() + r.row(0);
  return emplace(std::move(out), [a, row](Graph& g, Node& n) {
    g.grad_of(a.id) += n.grad;
    g.grad_of(row.id).row(0) += n.grad.colwise().sum();
  });
}

Var Graph::scale(Var a, double s) {
  Matrix out = nodes_[a.id].value * s;
  return emplace(std::move(out), [a, s](Graph& g, Node& n) {
    g.grad_of(a.id) += n.grad * s;
  });
}

Var Graph::linear(Var x, Parameter& weight, Parameter& bias) {
  return add_rowvec(matmul(x, param(weight)), param(bias));
}

Var Graph::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::logic_error("concat_cols: no parts");
  const Eigen::Index rows = nodes_[parts.front().id].value.rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    if (nodes_[p.id].value.rows() != rows) {
      throw std::logic_error("concat_cols: row mismatch");
    }
    cols += nodes_[p.id].value.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& v = nodes_[p.id].value;
    out.middleCols(at, v.cols()) = v;
    at += v.cols();
  }
  std::vector<Var> held = parts;
  return emplace(std::move(out), [held](Graph& g, Node& n) {
    Eigen::Index at = 0;
    for (Var p : held) {
      const Eigen::Index w = g.nodes_[p.id].value.cols();
      g.grad_of(p.id) += n.grad.middleCols(at, w);
      at += w;
    }
  });
}

Var Graph::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::logic_error("concat_rows: no parts");
  const Eigen::Index cols = nodes_[parts.front().id].value.cols();
  Eigen::Index rows = 0;
  for (Var p : parts) {
    if (nodes_[p.id].value.cols() != cols) {
      throw std::logic_error("concat_rows: column mismatch");
    }
    rows += nodes_[p.id].value.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& v = nodes_[p.id].value;
    out.middleRows(at, v.rows()) = v;
    at += v.rows();
  }
  std::vector<Var> held = parts;
  return emplace(std::move(out), [held](Graph& g, Node& n) {
    Eigen::Index at = 0;
    for (Var p : held) {
      const Eigen::Index h = g.nodes_[p.id].value.rows();
      g.grad_of(p.id) += n.grad.middleRows(at, h);
      at += h;
    }
  });
}

Var Graph::slice_cols(Var a, int start, int count) {
  Matrix out = nodes_[a.id].value.middleCols(start, count);
  return emplace(std::move(out), [a, start, count](Graph& g, Node& n) {
    g.grad_of(a.id).middleCols(start, count) += n.grad;
  });
}

Var Graph::select_rows(Var a, std::vector<int> indices) {
  const Matrix& v = nodes_[a.id].value;
  Matrix out(static_cast<Eigen::Index>(indices.size()), v.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = v.row(indices[i]);
  }
  return emplace(std::move(out),
                 [a, idx = std::move(indices)](Graph& g, Node& n) {
                   Matrix& da = g.grad_of(a.id);
                   for (std::size_t i = 0; i < idx.size(); ++i) {
                     da.row(idx[i]) += n.grad.row(static_cast<Eigen::Index>(i));
                   }
                 });
}

Var Graph::segment_max(Var a, std::vector<std::vector<int>> groups) {
  const Matrix& v = nodes_[a.id].value;
  const Eigen::Index cols = v.cols();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(groups.size()), cols);
  // argmax[k][c] = value row attaining the max, -1 for empty groups
  Eigen::MatrixXi argmax =
      Eigen::MatrixXi::Constant(static_cast<Eigen::Index>(groups.size()), cols, -1);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const auto& group = groups[k];
    if (group.empty()) continue;
    for (Eigen::Index c = 0; c < cols; ++c) {
      int best = group[0];
      double best_v = v(group[0], c);
      for (std::size_t i = 1; i < group.size(); ++i) {
        const double cand = v(group[i], c);
        if (cand > best_v) {
          best_v = cand;
          best = group[i];
        }
      }
      out(static_cast<Eigen::Index>(k), c) = best_v;
      argmax(static_cast<Eigen::Index>(k), c) = best;
    }
  }
  return emplace(std::move(out),
                 [a, am = std::move(argmax)](Graph& g, Node& n) {
                   Matrix& da = g.grad_of(a.id);
                   for (Eigen::Index k = 0; k < am.rows(); ++k) {
                     for (Eigen::Index c = 0; c < am.cols(); ++c) {
                       const int r = am(k, c);
                       if (r >= 0) da(r, c) += n.grad(k, c);
                     }
                   }
                 });
}

Var Graph::relu(Var a) {
  Matrix out = nodes_[a.id].value.cwiseMax(0.0);
  return emplace(std::move(out), [a](Graph& g, Node& n) {
    const Matrix& x = g.nodes_[a.id].value;
    g.grad_of(a.id).array() +=
        n.grad.array() * (x.array() > 0.0).cast<double>();
  });
}

Var Graph::gelu(Var a) {
  const Matrix& x = nodes_[a.id].value;
  Matrix out = x.unaryExpr(
      [](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); });
  return emplace(std::move(out), [a](Graph& g, Node& n) {
    const Matrix& x = g.nodes_[a.id].value;
    Matrix d = x.unaryExpr([](double v) {
      const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      return cdf + v * pdf;
    });
    g.grad_of(a.id).array() += n.grad.array() * d.array();
  });
}

Var Graph::sigmoid(Var a) {
  Matrix out = nodes_[a.id].value.unaryExpr(&stable_sigmoid);
  return emplace(std::move(out), [a](Graph& g, Node& n) {
    const Matrix& y = n.value;
    g.grad_of(a.id).array() +=
        n.grad.array() * y.array() * (1.0 - y.array());
  });
}

Var Graph::tanh(Var a) {
  Matrix out = nodes_[a.id].value.array().tanh();
  return emplace(std::move(out), [a](Graph& g, Node& n) {
    g.grad_of(a.id).array() +=
        n.grad.array() * (1.0 - n.value.array().square());
  });
}

Var Graph::softmax_rows(Var a) {
  const Matrix& x = nodes_[a.id].value;
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    Eigen::RowVectorXd e = (x.row(r).array() - m).exp();
    out.row(r) = e / e.sum();
  }
  return emplace(std::move(out), [a](Graph& g, Node& n) {
    Matrix& da = g.grad_of(a.id);
    for (Eigen::Index r = 0; r < n.value.rows(); ++r) {
      const double dot = n.grad.row(r).cwiseProduct(n.value.row(r)).sum();
      da.row(r).array() +=
          n.value.row(r).array() * (n.grad.row(r).array() - dot);
    }
  });
}

Var Graph::layer_norm(Var x, Parameter& gain, Parameter& bias, double eps) {
  Var g_var = param(gain);
  Var b_var = param(bias);
  const Matrix& v = nodes_[x.id].value;
  const Eigen::Index d = v.cols();
  Matrix normalized(v.rows(), d);
  Eigen::VectorXd inv_std(v.rows());
  const Eigen::RowVectorXd gval = nodes_[g_var.id].value.row(0);
  const Eigen::RowVectorXd bval = nodes_[b_var.id].value.row(0);
  Matrix out(v.rows(), d);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const double mean = v.row(r).mean();
    const double var = (v.row(r).array() - mean).square().mean();
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std(r) = is;
    normalized.row(r) = (v.row(r).array() - mean) * is;
    out.row(r) = normalized.row(r).cwiseProduct(gval) + bval;
  }
  return emplace(
      std::move(out),
      [x, g_var, b_var, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](Graph& g, Node& n) {
        const Eigen::RowVectorXd gval = g.nodes_[g_var.id].value.row(0);
        Matrix& dx = g.grad_of(x.id);
        Matrix& dg = g.grad_of(g_var.id);
        Matrix& db = g.grad_of(b_var.id);
        for (Eigen::Index r = 0; r < n.grad.rows(); ++r) {
          const Eigen::RowVectorXd dy = n.grad.row(r);
          const Eigen::RowVectorXd xhat = normalized.row(r);
          dg.row(0) += dy.cwiseProduct(xhat);
          db.row(0) += dy;
          const Eigen::RowVectorXd dyg = dy.cwiseProduct(gval);
          const double mean_dyg = dyg.mean();
          const double mean_dyg_xhat = dyg.cwiseProduct(xhat).mean();
          dx.row(r) += (dyg.array() - mean_dyg - xhat.array() * mean_dyg_xhat)
                           .matrix() *
                       inv_std(r);
        }
      });
}

Var Graph::dropout(Var a, double rate) {
  if (!training_ || rate <= 0.0) return a;
  const Matrix& v = nodes_[a.id].value;
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(v.rows(), v.cols());
  const double inv_keep = 1.0 / (1.0 - rate);
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      mask(r, c) = keep(dropout_rng_) ? inv_keep : 0.0;
    }
  }
  Matrix out = v.cwiseProduct(mask);
  return emplace(std::move(out), [a, mask = std::move(mask)](Graph& g, Node& n) {
    g.grad_of(a.id) += n.grad.cwiseProduct(mask);
  });
}

Var Graph::bce_with_logits(Var logits, Matrix targets) {
  const Matrix& z = nodes_[logits.id].value;
  if (z.rows() != targets.rows() || z.cols() != targets.cols()) {
    throw std::logic_error("bce_with_logits: shape mismatch");
  }
  if (z.rows() == 0) {
    return constant(Matrix::Zero(1, 1));
  }
  double total = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      const double zv = z(r, c);
      const double y = targets(r, c);
      total += std::max(zv, 0.0) - zv * y + std::log1p(std::exp(-std::abs(zv)));
    }
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(z.rows());
  return emplace(std::move(out),
                 [logits, t = std::move(targets)](Graph& g, Node& n) {
                   const Matrix& z = g.nodes_[logits.id].value;
                   const double scale = n.grad(0, 0) / static_cast<double>(z.rows());
                   Matrix& dz = g.grad_of(logits.id);
                   for (Eigen::Index r = 0; r < z.rows(); ++r) {
                     for (Eigen::Index c = 0; c < z.cols(); ++c) {
                       dz(r, c) += scale * (stable_sigmoid(z(r, c)) - t(r, c));
                     }
                   }
                 });
}

Var Graph::softmax_cross_entropy(Var logits, std::vector<int> targets) {
  const Matrix& z = nodes_[logits.id].value;
  if (static_cast<std::size_t>(z.rows()) != targets.size()) {
    throw std::logic_error("softmax_cross_entropy: target count mismatch");
  }
  if (z.rows() == 0) {
    return constant(Matrix::Zero(1, 1));
  }
  double total = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double m = z.row(r).maxCoeff();
    const double lse = m + std::log((z.row(r).array() - m).exp().sum());
    total += lse - z(r, targets[static_cast<std::size_t>(r)]);
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(z.rows());
  return emplace(std::move(out),
                 [logits, t = std::move(targets)](Graph& g, Node& n) {
                   const Matrix& z = g.nodes_[logits.id].value;
                   const double scale = n.grad(0, 0) / static_cast<double>(z.rows());
                   Matrix& dz = g.grad_of(logits.id);
                   for (Eigen::Index r = 0; r < z.rows(); ++r) {
                     const double m = z.row(r).maxCoeff();
                     Eigen::RowVectorXd p = (z.row(r).array() - m).exp();
                     p /= p.sum();
                     dz.row(r) += scale * p;
                     dz(r, t[static_cast<std::size_t>(r)]) -= scale;
                   }
                 });
}

Var Graph::weighted_sum(const std::vector<std::pair<Var, double>>& terms) {
  double total = 0.0;
  for (const auto& [v, w] : terms) {
    total += w * scalar(v);
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  std::vector<std::pair<Var, double>> held = terms;
  return emplace(std::move(out), [held](Graph& g, Node& n) {
    for (const auto& [v, w] : held) {
      g.grad_of(v.id)(0, 0) += w * n.grad(0, 0);
    }
  });
}

void Graph::backward(Var root) {
  const Matrix& r = value(root);
  if (r.rows() != 1 || r.cols() != 1) {
    throw std::logic_error("backward: root must be 1x1");
  }
  grad_of(root.id)(0, 0) = 1.0;
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) continue;  // no gradient reached this node
    if (n.source != nullptr && n.source->trainable) {
      n.source->ensure_grad();
      n.source->grad += n.grad;
    }
    if (n.backprop) n.backprop(*this, n);
  }
}

}  // namespace relex::nn
