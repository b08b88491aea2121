#include "relex/nn/parameters.hpp"

#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "relex/errors.hpp"

namespace relex::nn {

void Parameter::ensure_grad() {
  if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
    grad = Matrix::Zero(value.rows(), value.cols());
  }
}

void Parameter::zero_grad() {
  if (grad.size() > 0) grad.setZero();
}

void Parameter::extend_rows(
    int new_rows,
    const std::function<void(Eigen::Ref<Eigen::RowVectorXd>)>& init) {
  const int old_rows = rows();
  if (new_rows <= old_rows) return;
  const int ncols = cols();
  auto grow = [&](Matrix& m) {
    if (m.size() == 0) return;
    Matrix grown = Matrix::Zero(new_rows, ncols);
    grown.topRows(m.rows()) = m;
    m = std::move(grown);
  };
  Matrix grown = Matrix::Zero(new_rows, ncols);
  grown.topRows(old_rows) = value;
  Eigen::RowVectorXd fresh(ncols);
  for (int r = old_rows; r < new_rows; ++r) {
    init(fresh);
    grown.row(r) = fresh;
  }
  value = std::move(grown);
  grow(grad);
  grow(adam_m);
  grow(adam_v);
}

Parameter& ParameterStore::create(const std::string& name, int rows, int cols) {
  if (by_name_.count(name) > 0) {
    throw std::logic_error("duplicate parameter name: " + name);
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Matrix::Zero(rows, cols);
  Parameter* raw = p.get();
  by_name_.emplace(name, std::move(p));
  order_.push_back(raw);
  return *raw;
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second.get();
}

const Parameter* ParameterStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second.get();
}

std::vector<Parameter*> ParameterStore::all() { return order_; }

std::vector<const Parameter*> ParameterStore::all() const {
  return {order_.begin(), order_.end()};
}

long ParameterStore::total_values() const {
  long n = 0;
  for (const Parameter* p : order_) n += static_cast<long>(p->value.size());
  return n;
}

void ParameterStore::zero_grads() {
  for (Parameter* p : order_) p->zero_grad();
}

namespace {

constexpr char kMagic[8] = {'R', 'L', 'X', 'W', 'T', '0', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("weight file truncated");
  return v;
}

}  // namespace

void ParameterStore::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  write_pod<uint64_t>(out, order_.size());
  for (const Parameter* p : order_) {
    write_pod<uint32_t>(out, static_cast<uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_pod<int64_t>(out, p->value.rows());
    write_pod<int64_t>(out, p->value.cols());
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(double) * p->value.size()));
  }
}

void ParameterStore::load(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a weight file (bad magic)");
  }
  const auto count = read_pod<uint64_t>(in);
  for (uint64_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = read_pod<int64_t>(in);
    const auto cols = read_pod<int64_t>(in);
    Matrix stored(rows, cols);
    in.read(reinterpret_cast<char*>(stored.data()),
            static_cast<std::streamsize>(sizeof(double) * stored.size()));
    if (!in) throw DataError("weight file truncated in " + name);
    Parameter* p = find(name);
    if (p == nullptr) {
      throw DataError("weight file contains unknown parameter: " + name);
    }
    if (cols != p->value.cols()) {
      throw DataError("shape mismatch for " + name);
    }
    if (rows > p->value.rows()) {
      // Stored table was extended (e.g. position embeddings); grow to fit.
      p->extend_rows(static_cast<int>(rows),
                     [](Eigen::Ref<Eigen::RowVectorXd> row) { row.setZero(); });
    } else if (rows < p->value.rows()) {
      throw DataError("shape mismatch for " + name);
    }
    p->value = std::move(stored);
  }
}

void init_normal(Matrix& m, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, c) = dist(rng);
    }
  }
}

void init_zeros(Matrix& m) { m.setZero(); }

void init_ones(Matrix& m) { m.setOnes(); }

}  // namespace relex::nn
