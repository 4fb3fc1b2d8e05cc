#include "hgcml/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "hgcml/binio.hpp"
#include "hgcml/error.hpp"

namespace hgcml {

Parameter& ParamStore::add(const std::string& name, Matrix value) {
  if (index_.contains(name)) throw Error(ErrorKind::Config, "duplicate parameter " + name);
  index_[name] = params_.size();
  return params_.emplace_back(name, std::move(value));
}

Parameter& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::Config, "unknown parameter " + name);
  return params_[it->second];
}

const Parameter& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::Config, "unknown parameter " + name);
  return params_[it->second];
}

std::vector<Parameter*> ParamStore::pointers() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

bool ParamStore::all_finite() const {
  for (const auto& p : params_)
    if (!p.value.all_finite()) return false;
  return true;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  for (auto& p : params_) {
    const Parameter& src = other.at(p.name);
    if (!src.value.same_shape(p.value)) throw Error(ErrorKind::ShapeMismatch, "parameter " + p.name);
    p.value = src.value;
  }
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.params_.size() != b.params_.size()) return false;
  for (std::size_t i = 0; i < a.params_.size(); ++i) {
    if (a.params_[i].name != b.params_[i].name || !(a.params_[i].value == b.params_[i].value)) return false;
  }
  return true;
}

Matrix xavier_init(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-bound, bound);
  return m;
}

void adam_step(ParamStore& params, AdamState& state) {
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (Parameter& p : params) {
    Matrix& m = state.first_moment[p.name];
    Matrix& v = state.second_moment[p.name];
    if (!m.same_shape(p.value)) m = Matrix(p.value.rows(), p.value.cols());
    if (!v.same_shape(p.value)) v = Matrix(p.value.rows(), p.value.cols());
    if (!p.grad.same_shape(p.value)) throw Error(ErrorKind::ShapeMismatch, "gradient shape of " + p.name);
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad.data()[k];
      double& mk = m.data()[k];
      double& vk = v.data()[k];
      mk = c.beta1 * mk + (1.0 - c.beta1) * g;
      vk = c.beta2 * vk + (1.0 - c.beta2) * g * g;
      const double m_hat = mk / correction1;
      const double v_hat = vk / correction2;
      p.value.data()[k] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

namespace {
constexpr char kCheckpointMagic[4] = {'H', 'G', 'M', '1'};
}

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(kCheckpointMagic, 4);
  write_u32_le(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter& p : params) {
    write_u16_le(out, static_cast<std::uint16_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_u32_le(out, static_cast<std::uint32_t>(p.value.rows()));
    write_u32_le(out, static_cast<std::uint32_t>(p.value.cols()));
    for (double v : p.value.data()) write_f64_le(out, v);
  }
  if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw Error(ErrorKind::MalformedRecord, path.string() + ": missing HGM1 magic");
  ParamStore store;
  const std::uint32_t count = read_u32_le(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(read_u16_le(in), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    const std::uint32_t rows = read_u32_le(in);
    const std::uint32_t cols = read_u32_le(in);
    Matrix m(rows, cols);
    for (double& v : m.data()) v = read_f64_le(in);
    store.add(name, std::move(m));
  }
  return store;
}

}  // namespace hgcml
