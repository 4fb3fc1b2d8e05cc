#pragma once

#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hgcml/autodiff.hpp"
#include "hgcml/rng.hpp"

namespace hgcml {

/// Owns every trainable tensor. Insertion order is the serialization order,
/// and references stay valid for the store's lifetime.
class ParamStore {
 public:
  Parameter& add(const std::string& name, Matrix value);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.contains(name); }

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::vector<Parameter*> pointers();
  void zero_grad();
  bool all_finite() const;

  /// Copies values only; both stores must hold the same names and shapes.
  void copy_values_from(const ParamStore& other);

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

/// Uniform in +-sqrt(6 / (fan_in + fan_out)) with fan_in = rows, fan_out = cols.
Matrix xavier_init(std::size_t rows, std::size_t cols, Rng& rng);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::map<std::string, Matrix> first_moment;
  std::map<std::string, Matrix> second_moment;
};

/// One bias-corrected Adam update over every parameter, using its grad slot.
void adam_step(ParamStore& params, AdamState& state);

/// "HGM1" | count u32 | per tensor: name len u16, name, rows u32, cols u32, f64 row-major.
void save_checkpoint(const std::filesystem::path& path, const ParamStore& params);
ParamStore load_checkpoint(const std::filesystem::path& path);

}  // namespace hgcml
