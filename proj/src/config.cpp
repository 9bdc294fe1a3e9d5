#include "cogsl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cogsl/error.hpp"

namespace cogsl {

using nlohmann::json;

BasicView parse_basic_view(std::string_view name) {
  if (name == "A") return BasicView::A;
  if (name == "S") return BasicView::S;
  if (name == "K") return BasicView::K;
  if (name == "A_sub") return BasicView::A_sub;
  throw ArgumentError("unknown view '" + std::string(name) + "' (expected A, S, K or A_sub)");
}

const char* to_string(BasicView v) {
  switch (v) {
    case BasicView::A: return "A";
    case BasicView::S: return "S";
    case BasicView::K: return "K";
    case BasicView::A_sub: return "A_sub";
  }
  return "?";
}

FeatureNorm parse_feature_norm(std::string_view name) {
  if (name == "none") return FeatureNorm::none;
  if (name == "row") return FeatureNorm::row;
  if (name == "standardize") return FeatureNorm::standardize;
  throw ArgumentError("unknown feature_norm '" + std::string(name) + "'");
}

const char* to_string(FeatureNorm f) {
  switch (f) {
    case FeatureNorm::none: return "none";
    case FeatureNorm::row: return "row";
    case FeatureNorm::standardize: return "standardize";
  }
  return "?";
}

namespace {

struct Row {
  const char* name;
  BasicView v1, v2;
  double ve_lr, ve_drop;
  std::size_t T, rho_theta, rho_phi, rho_omega, batch;
  double epsilon, lambda;
};

// clang-format off
constexpr Row kDefaults[] = {
  {"wine",     BasicView::S, BasicView::K,     0.001,  0.8, 100,  1,  5, 1,    0, 0.1, 0.5},
  {"cancer",   BasicView::S, BasicView::K,     0.1,    0.5, 150,  1,  5, 1,    0, 0.1, 0.9},
  {"digits",   BasicView::A, BasicView::S,     0.01,   0.5, 200, 10, 10, 1,    0, 0.1, 0.5},
  {"polblogs", BasicView::A, BasicView::S,     0.1,    0.8, 150,  5,  5, 1,    0, 0.1, 0.1},
  {"citeseer", BasicView::A, BasicView::S,     0.001,  0.2, 200,  5, 10, 5,    0, 0.1, 0.5},
  {"wikics",   BasicView::A, BasicView::A_sub, 0.01,   0.2, 200,  1,  5, 1, 1000, 0.1, 0.1},
  {"ms",       BasicView::A, BasicView::A_sub, 0.0001, 0.8, 200, 15, 10, 1, 1000, 1.0, 0.2},
};
// clang-format on

template <class T>
T get(const json& v, std::string_view key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ArgumentError("config key '" + std::string(key) + "' has the wrong type");
  }
}

void apply_keys(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  TrainConfig& t = c.train;
  for (const auto& [key, v] : j.items()) {
    if (key == "dataset") c.dataset = get<std::string>(v, key);
    else if (key == "data_dir") c.data_dir = get<std::string>(v, key);
    else if (key == "output_dir") c.output_dir = get<std::string>(v, key);
    else if (key == "views") {
      auto names = get<std::vector<std::string>>(v, key);
      if (names.size() != 2) throw ArgumentError("views must list exactly two views");
      c.views = {parse_basic_view(names[0]), parse_basic_view(names[1])};
    }
    else if (key == "feature_norm") c.feature_norm = parse_feature_norm(get<std::string>(v, key));
    else if (key == "ppr_alpha") c.view.ppr_alpha = get<double>(v, key);
    else if (key == "ppr_keep") c.view.ppr_keep = get<std::size_t>(v, key);
    else if (key == "knn_k") c.view.knn_k = get<std::size_t>(v, key);
    else if (key == "knn_init_k") c.view.knn_init_k = get<std::size_t>(v, key);
    else if (key == "subgraph_keep") c.view.subgraph_keep = get<double>(v, key);
    else if (key == "scope_k") c.view.scope_k = get<std::size_t>(v, key);
    else if (key == "scope_h") c.view.scope_h = get<std::size_t>(v, key);
    else if (key == "T") t.T = get<std::size_t>(v, key);
    else if (key == "rho_theta") t.rho_theta = get<std::size_t>(v, key);
    else if (key == "rho_phi") t.rho_phi = get<std::size_t>(v, key);
    else if (key == "rho_omega") t.rho_omega = get<std::size_t>(v, key);
    else if (key == "lr_theta") t.lr_theta = get<double>(v, key);
    else if (key == "lr_phi") t.lr_phi = get<double>(v, key);
    else if (key == "ve_lr" || key == "lr_omega") t.lr_omega = get<double>(v, key);
    else if (key == "ve_drop") t.est1.dropout = t.est2.dropout = get<double>(v, key);
    else if (key == "weight_decay") t.weight_decay_theta = c.baseline.weight_decay = get<double>(v, key);
    else if (key == "eta") t.eta = get<double>(v, key);
    else if (key == "mu") t.est1.mu = t.est2.mu = get<double>(v, key);
    else if (key == "mu1") t.est1.mu = get<double>(v, key);
    else if (key == "mu2") t.est2.mu = get<double>(v, key);
    else if (key == "hidden") t.d_es = t.classifier.hidden = t.mi.hidden = t.mi.proj_hidden = c.baseline.classifier.hidden = get<std::size_t>(v, key);
    else if (key == "dropout") t.classifier.dropout = c.baseline.classifier.dropout = get<double>(v, key);
    else if (key == "activation") t.classifier.activation = c.baseline.classifier.activation = nd::parse_activation(get<std::string>(v, key));
    else if (key == "epsilon") t.fusion.epsilon = get<double>(v, key);
    else if (key == "lambda") t.fusion.lambda = get<double>(v, key);
    else if (key == "delta") t.fusion.delta = get<double>(v, key);
    else if (key == "variant") t.fusion.variant = fusion::parse_variant(get<std::string>(v, key));
    else if (key == "tau") t.mi.tau = get<double>(v, key);
    else if (key == "batch") t.mi.batch = get<std::size_t>(v, key);
    else if (key == "patience") t.patience = get<std::size_t>(v, key);
    else if (key == "seed") t.seed = c.baseline.seed = get<std::uint64_t>(v, key);
    else if (key == "baseline_epochs") c.baseline.epochs = get<std::size_t>(v, key);
    else if (key == "baseline_patience") c.baseline.patience = get<std::size_t>(v, key);
    else if (key == "baseline_lr") c.baseline.lr = get<double>(v, key);
    else throw ArgumentError("unknown config key '" + key + "'");
  }
}

}  // namespace

RunConfig dataset_defaults(std::string_view name) {
  RunConfig c;
  c.dataset = std::string(name);
  for (const Row& r : kDefaults) {
    if (name != r.name) continue;
    c.views = {r.v1, r.v2};
    c.train.lr_omega = r.ve_lr;
    c.train.est1.dropout = c.train.est2.dropout = r.ve_drop;
    c.train.T = r.T;
    c.train.rho_theta = r.rho_theta;
    c.train.rho_phi = r.rho_phi;
    c.train.rho_omega = r.rho_omega;
    c.train.mi.batch = r.batch;
    c.train.fusion.epsilon = r.epsilon;
    c.train.fusion.lambda = r.lambda;
  }
  if (name == "wine" || name == "cancer" || name == "digits") {
    c.feature_norm = FeatureNorm::standardize;
    // KNN sizes that reproduce the published edge counts (N * k).
    c.view.knn_init_k = c.view.knn_k = name == "wine" ? 20 : name == "cancer" ? 40 : 24;
  }
  if (name == "citeseer") {
    c.feature_norm = FeatureNorm::row;
    c.view.scope_k = 2;
    c.view.scope_h = 40;
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw LoadError(path.string() + ": config must be a JSON object");
  RunConfig c = dataset_defaults(j.value("dataset", std::string{}));
  apply_keys(c, j);
  if (!c.data_dir.empty() && c.data_dir.is_relative()) c.data_dir = path.parent_path() / c.data_dir;
  if (!c.data_dir.empty() && !std::filesystem::exists(c.data_dir))
    throw LoadError(path.string() + ": data_dir " + c.data_dir.string() + " does not exist");
  c.train.validate();
  return c;
}

void apply_json(RunConfig& cfg, std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ArgumentError(std::string("invalid JSON: ") + e.what());
  }
  apply_keys(cfg, j);
}

void set_option(RunConfig& cfg, std::string_view key, std::string_view value) {
  json v = json::parse(value, nullptr, false);
  if (v.is_discarded()) v = std::string(value);
  json j;
  j[std::string(key)] = v;
  apply_keys(cfg, j);
}

std::string to_json(const RunConfig& c) {
  const TrainConfig& t = c.train;
  nlohmann::ordered_json j;
  j["dataset"] = c.dataset;
  j["data_dir"] = c.data_dir.string();
  j["output_dir"] = c.output_dir.string();
  j["views"] = {to_string(c.views[0]), to_string(c.views[1])};
  j["feature_norm"] = to_string(c.feature_norm);
  j["ppr_alpha"] = c.view.ppr_alpha;
  j["ppr_keep"] = c.view.ppr_keep;
  j["knn_k"] = c.view.knn_k;
  j["knn_init_k"] = c.view.knn_init_k;
  j["subgraph_keep"] = c.view.subgraph_keep;
  j["scope_k"] = c.view.scope_k;
  j["scope_h"] = c.view.scope_h;
  j["T"] = t.T;
  j["rho_theta"] = t.rho_theta;
  j["rho_phi"] = t.rho_phi;
  j["rho_omega"] = t.rho_omega;
  j["lr_theta"] = t.lr_theta;
  j["lr_phi"] = t.lr_phi;
  j["ve_lr"] = t.lr_omega;
  j["ve_drop"] = t.est1.dropout;
  j["weight_decay"] = t.weight_decay_theta;
  j["eta"] = t.eta;
  j["mu1"] = t.est1.mu;
  j["mu2"] = t.est2.mu;
  j["hidden"] = t.classifier.hidden;
  j["dropout"] = t.classifier.dropout;
  j["activation"] = nd::to_string(t.classifier.activation);
  j["epsilon"] = t.fusion.epsilon;
  j["lambda"] = t.fusion.lambda;
  j["delta"] = t.fusion.delta;
  j["variant"] = fusion::to_string(t.fusion.variant);
  j["tau"] = t.mi.tau;
  j["batch"] = t.mi.batch;
  j["patience"] = t.patience;
  j["seed"] = t.seed;
  j["baseline_epochs"] = c.baseline.epochs;
  j["baseline_patience"] = c.baseline.patience;
  j["baseline_lr"] = c.baseline.lr;
  return j.dump(2);
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  auto number = [&](std::string_view part) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty())
      throw ArgumentError("invalid seed '" + std::string(part) + "' in '" + std::string(text) + "'");
    return v;
  };
  std::vector<std::uint64_t> out;
  if (auto dots = text.find(".."); dots != std::string_view::npos) {
    std::uint64_t lo = number(text.substr(0, dots)), hi = number(text.substr(dots + 2));
    if (hi < lo) throw ArgumentError("empty seed range '" + std::string(text) + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::size_t start = 0;
  while (true) {
    std::size_t comma = text.find(',', start);
    out.push_back(number(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  for (double v : values) s.std += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(values.size()));
  return s;
}

}  // namespace cogsl
