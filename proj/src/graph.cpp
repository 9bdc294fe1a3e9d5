#include "cogsl/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "cogsl/error.hpp"

namespace cogsl {

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Graph::Graph(Tensor features, std::vector<int> labels, std::vector<Edge> edges,
             std::array<std::vector<std::size_t>, 3> splits)
    : features_(std::move(features)), labels_(std::move(labels)), splits_(std::move(splits)) {
  const std::size_t n = features_.rows();
  if (labels_.size() != n) {
    throw ValidationError("labels has " + std::to_string(labels_.size()) + " rows, features has " +
                          std::to_string(n));
  }
  std::vector<Edge> canon;
  canon.reserve(edges.size());
  for (std::size_t row = 0; row < edges.size(); ++row) {
    auto [a, b] = edges[row];
    if (a >= n || b >= n) {
      throw ValidationError("edge row " + std::to_string(row) + " (" + std::to_string(a) + "," +
                            std::to_string(b) + ") out of range [0," + std::to_string(n) + ")");
    }
    if (a == b) {
      ++dropped_self_loops_;
      continue;
    }
    canon.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(canon.begin(), canon.end());
  const auto before = canon.size();
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
  dropped_duplicates_ = before - canon.size();
  edges_ = std::move(canon);
  int max_label = -1;
  for (int l : labels_) max_label = std::max(max_label, l);
  n_classes_ = static_cast<std::size_t>(max_label + 1);
  validate(*this);
}

LabeledSet Graph::labeled(Split s) const {
  LabeledSet out;
  out.nodes = split(s);
  out.labels.reserve(out.nodes.size());
  for (auto i : out.nodes) out.labels.push_back(labels_[i]);
  return out;
}

Graph Graph::with_edges(std::vector<Edge> edges) const {
  return Graph(features_, labels_, std::move(edges), splits_);
}

Graph Graph::with_features(Tensor features) const {
  return Graph(std::move(features), labels_, edges_, splits_);
}

SplitReport validate(const Graph& g) {
  const std::size_t n = g.n_nodes();
  for (const auto& [a, b] : g.edges()) {
    if (a >= n || b >= n) throw ValidationError("edge endpoint out of range");
    if (a == b) throw ValidationError("self-loop in edge list");
  }
  for (std::size_t i = 1; i < g.edges().size(); ++i) {
    if (g.edges()[i] == g.edges()[i - 1]) throw ValidationError("duplicate edge");
  }
  const auto& labels = g.all_labels();
  std::set<int> seen;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      throw ValidationError("negative label " + std::to_string(labels[i]) + " at row " +
                            std::to_string(i));
    }
    seen.insert(labels[i]);
  }
  if (!seen.empty() && static_cast<std::size_t>(*seen.rbegin()) + 1 != seen.size()) {
    throw ValidationError("labels are not contiguous from 0: " + std::to_string(seen.size()) +
                          " distinct values, max " + std::to_string(*seen.rbegin()));
  }
  std::vector<int> owner(n, -1);
  SplitReport rep;
  for (int s = 0; s < 3; ++s) {
    const auto& idx = g.split(static_cast<Split>(s));
    rep.histogram[s].assign(g.n_classes(), 0);
    for (auto i : idx) {
      if (i >= n) {
        throw ValidationError(std::string(to_string(static_cast<Split>(s))) + " index " +
                              std::to_string(i) + " out of range");
      }
      if (owner[i] != -1) {
        throw ValidationError("index " + std::to_string(i) + " in " +
                              to_string(static_cast<Split>(owner[i])) + " and " +
                              to_string(static_cast<Split>(s)));
      }
      owner[i] = s;
      ++rep.histogram[s][labels[i]];
    }
    rep.counts[s] = idx.size();
  }
  if (g.split(Split::train).empty()) throw ValidationError("train split is empty");
  return rep;
}

namespace {

std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw LoadError("cannot open " + p.string());
  return in;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view tok, const std::string& where) {
  tok = trim(tok);
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ValidationError("cannot parse '" + std::string(tok) + "' at " + where);
  }
  return v;
}

}  // namespace

Graph load_dataset(const std::filesystem::path& dir, const LoadOptions& opts) {
  std::vector<double> feat;
  std::size_t n = 0, d = 0;
  {
    auto in = open_input(dir / "features.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      auto toks = split_commas(line);
      if (n == 0) d = toks.size();
      if (toks.size() != d) {
        throw ValidationError("features.csv row " + std::to_string(n) + " has " +
                              std::to_string(toks.size()) + " columns, expected " +
                              std::to_string(d));
      }
      for (auto t : toks) feat.push_back(parse_number<double>(t, "features.csv row " + std::to_string(n)));
      ++n;
    }
  }
  Tensor features(n, d, std::move(feat));
  if (opts.row_normalize) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (double v : features.row(i)) s += v;
      if (s != 0.0)
        for (double& v : features.row(i)) v /= s;
    }
  }

  std::vector<int> labels;
  {
    auto in = open_input(dir / "labels.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      labels.push_back(parse_number<int>(line, "labels.csv row " + std::to_string(labels.size())));
    }
  }

  std::vector<Edge> edges;
  std::size_t self_loops = 0;
  {
    auto in = open_input(dir / "edges.csv");
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      auto toks = split_commas(line);
      if (toks.size() != 2) {
        throw ValidationError("edges.csv row " + std::to_string(row) + ": expected 'i,j'");
      }
      const std::string where = "edges.csv row " + std::to_string(row);
      auto a = parse_number<long long>(toks[0], where);
      auto b = parse_number<long long>(toks[1], where);
      if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
        throw ValidationError(where + " (" + std::to_string(a) + "," + std::to_string(b) +
                              ") out of range [0," + std::to_string(n) + ")");
      }
      if (a == b) ++self_loops;
      edges.emplace_back(static_cast<Index>(a), static_cast<Index>(b));
      ++row;
    }
  }

  std::array<std::vector<std::size_t>, 3> splits;
  {
    auto in = open_input(dir / "splits.json");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw LoadError("splits.json: " + std::string(e.what()));
    }
    const char* keys[] = {"train", "val", "test"};
    for (int s = 0; s < 3; ++s) {
      if (!j.contains(keys[s])) throw ValidationError(std::string("splits.json missing key ") + keys[s]);
      for (const auto& v : j.at(keys[s])) {
        long long idx = v.get<long long>();
        if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
          throw ValidationError(std::string("splits.json ") + keys[s] + " index " +
                                std::to_string(idx) + " out of range");
        }
        splits[s].push_back(static_cast<std::size_t>(idx));
      }
    }
  }

  Graph g(std::move(features), std::move(labels), std::move(edges), std::move(splits));
  if (g.n_edges() == 0) spdlog::warn("{}: edge set is empty", dir.string());
  if (self_loops > 0) spdlog::info("{}: dropped {} self-loops", dir.string(), self_loops);
  if (g.dropped_duplicates() > 0) {
    spdlog::info("{}: merged {} duplicate/reversed edges", dir.string(), g.dropped_duplicates());
  }
  return g;
}

void save_dataset(const Graph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "features.csv");
    if (!out) throw LoadError("cannot write " + (dir / "features.csv").string());
    char buf[64];
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
      for (std::size_t k = 0; k < g.n_features(); ++k) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, g.features()(i, k));
        if (k) out << ',';
        out.write(buf, ptr - buf);
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.csv");
    for (int l : g.all_labels()) out << l << '\n';
  }
  {
    std::ofstream out(dir / "edges.csv");
    for (const auto& [a, b] : g.edges()) out << a << ',' << b << '\n';
  }
  {
    nlohmann::json j;
    j["train"] = g.split(Split::train);
    j["val"] = g.split(Split::val);
    j["test"] = g.split(Split::test);
    std::ofstream out(dir / "splits.json");
    out << j.dump() << '\n';
  }
}

CsrMatrix adjacency_matrix(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<CsrMatrix::Triplet> t;
  t.reserve(edges.size() * 2);
  for (const auto& [a, b] : edges) {
    if (a == b) continue;
    t.push_back({a, b, 1.0});
    t.push_back({b, a, 1.0});
  }
  auto m = CsrMatrix::from_triplets(n, n, std::move(t));
  for (double& v : m.values) v = 1.0;
  return m;
}

std::vector<Edge> support_edges(const CsrMatrix& m) {
  std::vector<Edge> out;
  const auto& p = *m.pattern;
  for (std::size_t r = 0; r < p.rows(); ++r)
    for (auto c : p.row_cols(r))
      if (r < c) out.emplace_back(static_cast<Index>(r), c);
  return out;
}

}  // namespace cogsl
