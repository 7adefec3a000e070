#include "gcb/harness/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "gcb/errors.hpp"

namespace gcb::harness {

namespace {

using Json = nlohmann::json;

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigInvalid(path.empty() ? "<root>" : path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigInvalid(path.empty() ? key : path + "." + key, "unknown key");
  }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, const std::string& path, T& out) {
  const auto node = parent[key];
  if (!node || node.IsNull()) return;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigInvalid(path + "." + key, "wrong type");
  }
}

template <typename T>
void read_optional(const YAML::Node& parent, const char* key, const std::string& path, std::optional<T>& out) {
  const auto node = parent[key];
  if (!node || node.IsNull()) return;
  T v{};
  read(parent, key, path, v);
  out = v;
}

template <typename T>
void read_list(const YAML::Node& parent, const char* key, const std::string& path, std::vector<T>& out) {
  const auto node = parent[key];
  if (!node) return;
  const std::string where = path + "." + key;
  if (!node.IsSequence()) throw ConfigInvalid(where, "expected a list");
  if (node.size() == 0) throw ConfigInvalid(where, "must not be empty when present");
  out.clear();
  for (const auto& v : node) {
    try {
      out.push_back(v.as<T>());
    } catch (const YAML::Exception&) {
      throw ConfigInvalid(where, "wrong element type");
    }
  }
}

Json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string yaml_number(double v) {
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  return Json(v).dump();
}

}  // namespace

Family parse_family(const std::string& s) {
  if (s == "linear") return Family::Linear;
  if (s == "quadratic" || s == "poly" || s == "polynomial") return Family::Quadratic;
  if (s == "nn" || s == "neural") return Family::NeuralNet;
  throw ConfigInvalid("scm.family", "unknown family '" + s + "' (linear | quadratic | nn)");
}

AgentKind parse_agent(const std::string& s) {
  for (auto k : {AgentKind::GcbUcb, AgentKind::GcbTs, AgentKind::Ucb, AgentKind::LinSem, AgentKind::Constant,
                 AgentKind::Uniform})
    if (s == to_string(k)) return k;
  throw ConfigInvalid("agent.kind", "unknown agent '" + s + "' (gcb-ucb | gcb-ts | ucb | linsem | constant | uniform)");
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigInvalid("<root>", std::string("YAML syntax: ") + e.what());
  }
  ExperimentConfig cfg;
  if (!root || root.IsNull()) return cfg;
  check_keys(root, "", {"scm", "agent", "run", "sweep", "output"});

  if (const auto s = root["scm"]) {
    check_keys(s, "scm",
               {"family", "d", "L", "width", "mode", "lipschitz", "output_bound", "interval_space", "grid_resolution",
                "noise", "prior"});
    auto& sc = cfg.scm;
    std::string family = to_string(sc.family);
    read(s, "family", "scm", family);
    sc.family = parse_family(family);
    read(s, "d", "scm", sc.d);
    read(s, "L", "scm", sc.L);
    read(s, "width", "scm", sc.width);
    std::string mode = "soft";
    read(s, "mode", "scm", mode);
    if (mode == "soft")
      sc.mode = scm::InterventionMode::Soft;
    else if (mode == "do")
      sc.mode = scm::InterventionMode::Do;
    else
      throw ConfigInvalid("scm.mode", "expected soft or do");
    read(s, "lipschitz", "scm", sc.lipschitz);
    read(s, "output_bound", "scm", sc.output_bound);
    read(s, "interval_space", "scm", sc.interval_space);
    read(s, "grid_resolution", "scm", sc.grid_resolution);
    if (const auto n = s["noise"]) {
      check_keys(n, "scm.noise", {"variance", "mean"});
      read(n, "variance", "scm.noise", sc.noise_variance);
      read(n, "mean", "scm.noise", sc.noise_mean);
    }
    if (const auto p = s["prior"]) {
      check_keys(p, "scm.prior", {"mean", "mean_bar", "sd_ratio", "sd", "active"});
      read_optional(p, "mean", "scm.prior", sc.prior.mean);
      read_optional(p, "mean_bar", "scm.prior", sc.prior.mean_bar);
      read(p, "sd_ratio", "scm.prior", sc.prior.sd_ratio);
      read_optional(p, "sd", "scm.prior", sc.prior.sd);
      read(p, "active", "scm.prior", sc.prior.active);
    }
  }

  if (const auto a = root["agent"]) {
    check_keys(a, "agent",
               {"kind", "delta", "ridge", "candidates", "rollouts", "posterior_scale", "beta_scale", "constant_arm",
                "sgd"});
    std::string kind = to_string(cfg.agent);
    read(a, "kind", "agent", kind);
    cfg.agent = parse_agent(kind);
    auto& ac = cfg.agent_config;
    read(a, "delta", "agent", ac.delta);
    read(a, "ridge", "agent", ac.ridge);
    read(a, "candidates", "agent", ac.candidates);
    long long rollouts = static_cast<long long>(ac.rollouts);
    read(a, "rollouts", "agent", rollouts);
    if (rollouts < 1) throw ConfigInvalid("agent.rollouts", "must be at least 1");
    ac.rollouts = static_cast<std::size_t>(rollouts);
    read(a, "posterior_scale", "agent", ac.posterior_scale);
    read(a, "beta_scale", "agent", ac.beta_scale);
    long long arm = static_cast<long long>(cfg.constant_arm);
    read(a, "constant_arm", "agent", arm);
    if (arm < 0) throw ConfigInvalid("agent.constant_arm", "must be >= 0");
    cfg.constant_arm = static_cast<std::size_t>(arm);
    if (const auto g = a["sgd"]) {
      check_keys(g, "agent.sgd", {"epochs", "step_size", "batch_size", "warm_start"});
      read(g, "epochs", "agent.sgd", ac.sgd.epochs);
      read(g, "step_size", "agent.sgd", ac.sgd.step_size);
      read(g, "batch_size", "agent.sgd", ac.sgd.batch_size);
      read(g, "warm_start", "agent.sgd", ac.sgd.warm_start);
    }
  }

  if (const auto r = root["run"]) {
    check_keys(r, "run", {"horizon", "replicates", "seed", "oracle_rollouts", "workers"});
    read(r, "horizon", "run", cfg.horizon);
    read(r, "replicates", "run", cfg.replicates);
    read(r, "seed", "run", cfg.seed);
    long long oracle = static_cast<long long>(cfg.oracle_rollouts);
    read(r, "oracle_rollouts", "run", oracle);
    if (oracle < 1) throw ConfigInvalid("run.oracle_rollouts", "must be at least 1");
    cfg.oracle_rollouts = static_cast<std::size_t>(oracle);
    read(r, "workers", "run", cfg.workers);
  }

  if (const auto w = root["sweep"]) {
    check_keys(w, "sweep", {"T", "d", "L", "agent"});
    read_list(w, "T", "sweep", cfg.sweep_T);
    read_list(w, "d", "sweep", cfg.sweep_d);
    read_list(w, "L", "sweep", cfg.sweep_L);
    std::vector<std::string> names;
    read_list(w, "agent", "sweep", names);
    for (const auto& n : names) cfg.sweep_agent.push_back(parse_agent(n));
  }

  if (const auto o = root["output"]) {
    check_keys(o, "output", {"dir", "plots", "overlay"});
    read(o, "dir", "output", cfg.out_dir);
    read(o, "plots", "output", cfg.plots);
    read(o, "overlay", "output", cfg.overlay);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_json(const ExperimentConfig& cfg) {
  const auto& sc = cfg.scm;
  const auto& ac = cfg.agent_config;
  Json j;
  j["scm"] = {
      {"family", to_string(sc.family)},
      {"d", sc.d},
      {"L", sc.L},
      {"width", sc.width},
      {"mode", sc.mode == scm::InterventionMode::Soft ? "soft" : "do"},
      {"lipschitz", finite_or_string(sc.lipschitz)},
      {"output_bound", sc.output_bound},
      {"interval_space", sc.interval_space},
      {"grid_resolution", sc.grid_resolution},
      {"noise", {{"variance", sc.noise_variance}, {"mean", sc.noise_mean}}},
      {"prior",
       {{"mean", opt(sc.prior.mean)},
        {"mean_bar", opt(sc.prior.mean_bar)},
        {"sd_ratio", sc.prior.sd_ratio},
        {"sd", opt(sc.prior.sd)},
        {"active", sc.prior.active}}},
  };
  j["agent"] = {
      {"kind", to_string(cfg.agent)},
      {"delta", ac.delta},
      {"ridge", ac.ridge},
      {"candidates", ac.candidates},
      {"rollouts", ac.rollouts},
      {"posterior_scale", ac.posterior_scale},
      {"beta_scale", ac.beta_scale},
      {"constant_arm", cfg.constant_arm},
      {"sgd",
       {{"epochs", ac.sgd.epochs},
        {"step_size", ac.sgd.step_size},
        {"batch_size", ac.sgd.batch_size},
        {"warm_start", ac.sgd.warm_start}}},
  };
  j["run"] = {{"horizon", cfg.horizon}, {"replicates", cfg.replicates}, {"oracle_rollouts", cfg.oracle_rollouts}};
  Json agents = Json::array();
  for (auto k : cfg.sweep_agent) agents.push_back(to_string(k));
  j["sweep"] = {{"T", cfg.sweep_T}, {"d", cfg.sweep_d}, {"L", cfg.sweep_L}, {"agent", agents}};
  return j.dump();
}

std::string to_yaml(const ExperimentConfig& cfg) {
  const auto& sc = cfg.scm;
  const auto& ac = cfg.agent_config;
  auto opt_num = [](const std::optional<double>& v) { return v ? yaml_number(*v) : std::string("null"); };
  auto list = [](const auto& v, auto fmt) {
    std::string s = "[";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v[k]);
    return s + "]";
  };
  auto int_str = [](int v) { return std::to_string(v); };
  auto agent_str = [](AgentKind k) { return std::string(to_string(k)); };
  std::ostringstream o;
  o << "scm:\n"
    << "  family: " << to_string(sc.family) << "\n"
    << "  d: " << sc.d << "\n"
    << "  L: " << sc.L << "\n"
    << "  width: " << sc.width << "\n"
    << "  mode: " << (sc.mode == scm::InterventionMode::Soft ? "soft" : "do") << "\n"
    << "  lipschitz: " << yaml_number(sc.lipschitz) << "\n"
    << "  output_bound: " << yaml_number(sc.output_bound) << "\n"
    << "  interval_space: " << (sc.interval_space ? "true" : "false") << "\n"
    << "  grid_resolution: " << sc.grid_resolution << "\n"
    << "  noise: {variance: " << yaml_number(sc.noise_variance) << ", mean: " << yaml_number(sc.noise_mean) << "}\n"
    << "  prior: {mean: " << opt_num(sc.prior.mean) << ", mean_bar: " << opt_num(sc.prior.mean_bar)
    << ", sd_ratio: " << yaml_number(sc.prior.sd_ratio) << ", sd: " << opt_num(sc.prior.sd)
    << ", active: " << (sc.prior.active ? "true" : "false") << "}\n"
    << "agent:\n"
    << "  kind: " << to_string(cfg.agent) << "\n"
    << "  delta: " << yaml_number(ac.delta) << "\n"
    << "  ridge: " << yaml_number(ac.ridge) << "\n"
    << "  candidates: " << ac.candidates << "\n"
    << "  rollouts: " << ac.rollouts << "\n"
    << "  posterior_scale: " << yaml_number(ac.posterior_scale) << "\n"
    << "  beta_scale: " << yaml_number(ac.beta_scale) << "\n"
    << "  constant_arm: " << cfg.constant_arm << "\n"
    << "  sgd: {epochs: " << ac.sgd.epochs << ", step_size: " << yaml_number(ac.sgd.step_size)
    << ", batch_size: " << ac.sgd.batch_size << ", warm_start: " << (ac.sgd.warm_start ? "true" : "false") << "}\n"
    << "run:\n"
    << "  horizon: " << cfg.horizon << "\n"
    << "  replicates: " << cfg.replicates << "\n"
    << "  seed: " << cfg.seed << "\n"
    << "  oracle_rollouts: " << cfg.oracle_rollouts << "\n"
    << "  workers: " << cfg.workers << "\n";
  std::string sweep;
  if (!cfg.sweep_T.empty()) sweep += "  T: " + list(cfg.sweep_T, int_str) + "\n";
  if (!cfg.sweep_d.empty()) sweep += "  d: " + list(cfg.sweep_d, int_str) + "\n";
  if (!cfg.sweep_L.empty()) sweep += "  L: " + list(cfg.sweep_L, int_str) + "\n";
  if (!cfg.sweep_agent.empty()) sweep += "  agent: " + list(cfg.sweep_agent, agent_str) + "\n";
  if (!sweep.empty()) o << "sweep:\n" << sweep;
  o << "output:\n"
    << "  dir: " << Json(cfg.out_dir).dump() << "\n"
    << "  plots: " << (cfg.plots ? "true" : "false") << "\n"
    << "  overlay: " << (cfg.overlay ? "true" : "false") << "\n";
  return o.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = canonical_json(cfg);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(hex[digest[k] >> 4]);
    out.push_back(hex[digest[k] & 0xF]);
  }
  return out;
}

}  // namespace gcb::harness
