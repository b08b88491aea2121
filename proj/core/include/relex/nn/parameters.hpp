#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace relex::nn {

using Matrix = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // empty until first use
  bool trainable = true;
  bool decay = true;  // excluded for biases and layer-norm parameters
  // Adam state, lazily sized
  Matrix adam_m;
  Matrix adam_v;

  int rows() const { return static_cast<int>(value.rows()); }
  int cols() const { return static_cast<int>(value.cols()); }

  void ensure_grad();
  void zero_grad();

  // Grows the row count, keeping existing rows (values and Adam state)
  // untouched; `init` fills each new row. No-op when new_rows <= rows().
  void extend_rows(int new_rows, const std::function<void(Eigen::Ref<Eigen::RowVectorXd>)>& init);
};

// Owns parameters at stable addresses; lookup by unique name.
class ParameterStore {
 public:
  Parameter& create(const std::string& name, int rows, int cols);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t size() const { return order_.size(); }
  long total_values() const;

  void zero_grads();

  // Binary snapshot of all parameter values (names + shapes + doubles).
  void save(std::ostream& out) const;
  // Restores values by name; shapes must match except that stored tables may
  // have more rows than created ones (position extension), in which case the
  // parameter is grown first.
  void load(std::istream& in);

 private:
  std::map<std::string, std::unique_ptr<Parameter>> by_name_;
  std::vector<Parameter*> order_;
};

// Initialization used across the model (matches common Transformer practice).
void init_normal(Matrix& m, std::mt19937_64& rng, double stddev = 0.02);
void init_zeros(Matrix& m);
void init_ones(Matrix& m);

}  // namespace relex::nn
