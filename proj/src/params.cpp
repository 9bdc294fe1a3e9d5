#include "cogsl/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "cogsl/error.hpp"

namespace cogsl {

const char* to_string(Group g) {
  switch (g) {
    case Group::theta: return "theta";
    case Group::phi: return "phi";
    case Group::omega: return "omega";
  }
  return "?";
}

void ParamSet::add(const std::string& name, Tensor value, Group group) {
  if (!entries_.emplace(name, Entry{std::move(value), group}).second) {
    throw ArgumentError("duplicate parameter name '" + name + "'");
  }
}

const Tensor& ParamSet::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ArgumentError("unknown parameter '" + name + "'");
  return it->second.value;
}

Tensor& ParamSet::value(const std::string& name) {
  return const_cast<Tensor&>(static_cast<const ParamSet&>(*this).value(name));
}

Group ParamSet::group(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ArgumentError("unknown parameter '" + name + "'");
  return it->second.group;
}

nd::Var ParamSet::bind(nd::Tape& tape, const std::string& name, bool trainable) const {
  return trainable ? tape.leaf(value(name), name) : tape.constant(value(name));
}

bool ParamSet::operator==(const ParamSet& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  for (const auto& [k, e] : entries_) {
    auto it = o.entries_.find(k);
    if (it == o.entries_.end() || it->second.group != e.group || !(it->second.value == e.value)) return false;
  }
  return true;
}

void adam_step(ParamSet& params, const GradMap& grads, AdamState& st, double lr, Group group,
               double weight_decay) {
  for (const auto& [name, e] : params.entries()) {
    if (e.group != group) continue;
    if (!grads.count(name)) throw ArgumentError("adam_step: no gradient for '" + name + "'");
    if (!grads.at(name).same_shape(e.value)) throw ArgumentError("adam_step: gradient shape for '" + name + "'");
  }
  ++st.step;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (const auto& [name, e] : params.entries()) {
    if (e.group != group) continue;
    Tensor& w = params.value(name);
    const Tensor& g = grads.at(name);
    auto [it, fresh] = st.moments.try_emplace(name, Tensor(w.rows(), w.cols()), Tensor(w.rows(), w.cols()));
    Tensor& m = it->second.first;
    Tensor& v = it->second.second;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] + weight_decay * w[i];
      m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * gi;
      v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * gi * gi;
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      w[i] -= lr * mh / (std::sqrt(vh) + st.eps);
    }
  }
}

Tensor glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor t(rows, cols);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes a little-endian host");

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw LoadError("checkpoint truncated");
  return v;
}

constexpr char kMagic[8] = {'C', 'O', 'G', 'S', 'L', 'C', 'K', '1'};

}  // namespace

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, params.size());
  for (const auto& [name, e] : params.entries()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(e.group));
    put<std::uint64_t>(out, e.value.rows());
    put<std::uint64_t>(out, e.value.cols());
    out.write(reinterpret_cast<const char*>(e.value.data().data()),
              static_cast<std::streamsize>(e.value.size() * sizeof(double)));
  }
}

ParamSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw LoadError("not a checkpoint: " + path.string());
  ParamSet ps;
  const auto count = get<std::uint64_t>(in);
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto len = get<std::uint32_t>(in);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw LoadError("checkpoint truncated");
    const auto group = get<std::uint8_t>(in);
    if (group > 2) throw LoadError("checkpoint: bad group tag");
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    std::vector<double> data(rows * cols);
    if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)))) {
      throw LoadError("checkpoint truncated");
    }
    ps.add(name, Tensor(rows, cols, std::move(data)), static_cast<Group>(group));
  }
  return ps;
}

}  // namespace cogsl
