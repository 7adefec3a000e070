// Command-line front end: run, sweep, lowerbound, complexity, audit.

#include <CLI11.hpp>

#include <csignal>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "gcb/agents/agents.hpp"
#include "gcb/complexity/complexity.hpp"
#include "gcb/errors.hpp"
#include "gcb/graph/dag.hpp"
#include "gcb/harness/config.hpp"
#include "gcb/harness/report.hpp"
#include "gcb/lowerbound/pairs.hpp"

namespace fs = std::filesystem;
using namespace gcb;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void on_sigint(int) { harness::request_stop(); }

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  bool no_plots = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Base random seed");
    cmd->add_option("--workers", workers, "Replicates run in parallel");
    cmd->add_option("--out-dir", out_dir, "Output directory");
    cmd->add_flag("--no-plots", no_plots, "Skip SVG output");
  }

  void apply(harness::ExperimentConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out_dir) cfg.out_dir = *out_dir;
    if (no_plots) cfg.plots = false;
    cfg.validate();
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ";" : "") + fmt(v[k]);
  return s;
}

std::ofstream open_csv(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream f(dir / name);
  if (!f) throw IoError("cannot write " + (dir / name).string());
  return f;
}

int report_run(const harness::RunSummary& run) {
  for (const auto& p : run.points) {
    const auto& s = p.summary;
    std::cout << p.hash.substr(0, 12) << "  " << harness::to_string(s.family) << ' ' << harness::to_string(s.agent)
              << "  d=" << s.d << " L=" << s.L << " T=" << s.T << " R=" << s.replicates << "  R(T)=" << s.mean_final
              << " +- " << s.se_final << "  slope=" << s.slope << '\n';
  }
  std::cout << "wrote " << run.out_dir.string() << '\n';
  if (run.interrupted) {
    std::cerr << "interrupted: completed replicates were written\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_run(const std::string& path, const CommonFlags& flags, bool sweep) {
  auto cfg = harness::load_config(path);
  flags.apply(cfg);
  if (sweep) {
    if (cfg.sweep_T.empty() && cfg.sweep_d.empty() && cfg.sweep_L.empty() && cfg.sweep_agent.empty())
      throw ConfigInvalid("sweep", "no sweep axes given");
  } else {
    cfg.sweep_T.clear();
    cfg.sweep_d.clear();
    cfg.sweep_L.clear();
    cfg.sweep_agent.clear();
  }
  return report_run(harness::run_experiment(cfg));
}

struct LowerboundArgs {
  std::string kind = "linear";
  int d = 2;
  int L = 2;
  int T = 100;
  std::string agent = "gcb-ts";
  int replicates = 20;
  double K = 1.0;
  int degree = 2;
  int width = 1;
  double slope_pos = 1.0;
  double slope_neg = 0.1;
  int grid = 2;
  std::size_t rollouts = 16;
};

int cmd_lowerbound(const LowerboundArgs& a, const CommonFlags& flags) {
  if (a.T < 5) throw ConfigInvalid("T", "must be at least 5");
  if (a.replicates < 1) throw ConfigInvalid("replicates", "must be at least 1");
  const double delta = 1.0 / std::sqrt(static_cast<double>(a.T));
  const std::vector<double> K(static_cast<std::size_t>(std::max(a.L, 0)), a.K);
  auto build = [&]() -> lowerbound::InstancePair {
    if (a.kind == "linear") return lowerbound::build_linear_pair(a.d, a.L, K, delta);
    if (a.kind == "poly") return lowerbound::build_poly_pair(a.d, a.L, a.degree, delta, a.grid);
    if (a.kind == "nn") return lowerbound::build_nn_pair(a.d, a.L, a.width, a.slope_pos, a.slope_neg, K, delta, a.grid);
    throw ConfigInvalid("class", "expected linear, poly or nn");
  };
  const auto pair = build();
  const auto floor = lowerbound::regret_floor(pair, a.T);

  harness::ExperimentConfig agent_cfg;
  agent_cfg.agent = harness::parse_agent(a.agent);
  agent_cfg.horizon = a.T;
  agent_cfg.agent_config.rollouts = a.rollouts;
  const std::uint64_t seed = flags.seed.value_or(1);
  const auto stress = lowerbound::minimax_stress(
      [&](const scm::Scm& instance, int horizon) {
        auto c = agent_cfg;
        c.horizon = horizon;
        return harness::make_agent(c, instance);
      },
      pair, a.T, a.replicates, seed);

  std::cout << "class            " << lowerbound::to_string(pair.kind) << '\n'
            << "d, L, T          " << a.d << ", " << a.L << ", " << a.T << '\n'
            << "delta            " << fmt(delta) << '\n'
            << "gap              " << fmt(pair.gap) << "  (closed form " << fmt(pair.nominal_gap) << ")\n"
            << "best arm G1      " << join(pair.best_g1) << '\n'
            << "best arm G2      " << join(pair.best_g2) << '\n'
            << "KL bound         " << fmt(pair.kl_bound(a.T)) << '\n'
            << "floor (exact)    " << fmt(floor.exact) << '\n'
            << "floor (simple)   " << fmt(floor.simplified) << '\n'
            << "agent            " << a.agent << ", " << stress.replicates << " replicates\n"
            << "regret on G1     " << fmt(stress.mean_g1) << " +- " << fmt(stress.se_g1) << '\n'
            << "regret on G2     " << fmt(stress.mean_g2) << " +- " << fmt(stress.se_g2) << '\n'
            << "max >= floor     " << (stress.max_mean() >= floor.exact ? "yes" : "no") << "\n\n";

  std::ostringstream csv;
  csv << "class,d,L,T,delta,gap,nominal_gap,kl_bound,floor_exact,floor_simplified,agent,replicates,mean_g1,se_g1,"
         "mean_g2,se_g2\n"
      << lowerbound::to_string(pair.kind) << ',' << a.d << ',' << a.L << ',' << a.T << ',' << fmt(delta) << ','
      << fmt(pair.gap) << ',' << fmt(pair.nominal_gap) << ',' << fmt(pair.kl_bound(a.T)) << ',' << fmt(floor.exact)
      << ',' << fmt(floor.simplified) << ',' << a.agent << ',' << stress.replicates << ',' << fmt(stress.mean_g1)
      << ',' << fmt(stress.se_g1) << ',' << fmt(stress.mean_g2) << ',' << fmt(stress.se_g2) << '\n';
  std::cout << csv.str();
  if (flags.out_dir) open_csv(*flags.out_dir, "lowerbound.csv") << csv.str();
  return 0;
}

struct ComplexityArgs {
  std::string kind = "linear";
  int arity = 1;
  int functions = 8;
  int grid = 3;
  double eps = 0.1;
  double alpha = 0.1;
  int restarts = 16;
  int width = 2;
  double K = 1.0;
  int T = 1000;
};

/// Random members of the class with weights uniform on [-1, 1].
std::vector<scm::NodeFunction> random_members(const ComplexityArgs& a, Rng& rng) {
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  auto vec = [&](Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index k = 0; k < n; ++k) v[k] = w(rng);
    return v;
  };
  std::vector<scm::NodeFunction> out;
  for (int m = 0; m < a.functions; ++m) {
    if (a.kind == "linear") {
      auto theta = vec(a.arity);
      auto theta_bar = vec(a.arity);
      out.push_back(scm::NodeFunction::linear(theta, theta_bar));
    } else if (a.kind == "poly") {
      out.push_back(scm::NodeFunction::polynomial(vec(a.arity + 1), 2));
    } else if (a.kind == "nn") {
      Eigen::MatrixXd inner(a.width, a.arity + 1);
      for (Eigen::Index k = 0; k < inner.size(); ++k) inner.data()[k] = w(rng);
      auto outer = vec(a.width);
      out.push_back(scm::NodeFunction::neural(inner, outer));
    } else {
      throw ConfigInvalid("class", "expected linear, poly or nn");
    }
  }
  return out;
}

scm::FunctionClass class_of(const ComplexityArgs& a) {
  if (a.kind == "linear") return scm::FunctionClass::linear(a.arity, a.K);
  if (a.kind == "poly") return scm::FunctionClass::polynomial(a.arity, 2, a.K);
  if (a.kind == "nn") return scm::FunctionClass::neural(a.arity, a.width, {}, a.K);
  throw ConfigInvalid("class", "expected linear, poly or nn");
}

int cmd_complexity(const ComplexityArgs& a, const CommonFlags& flags) {
  if (a.arity < 0) throw ConfigInvalid("arity", "must be >= 0");
  if (a.functions < 1) throw ConfigInvalid("functions", "must be at least 1");
  if (a.grid < 1) throw ConfigInvalid("grid", "must be at least 1");
  if (!(a.eps > 0.0)) throw ConfigInvalid("eps", "must be positive");
  if (!(a.alpha >= 0.0)) throw ConfigInvalid("alpha", "must be >= 0");
  Rng rng = make_stream(flags.seed.value_or(1), 0, 0, StreamPurpose::Audit);
  const auto members = random_members(a, rng);

  // Inputs: grid points on [0, 1] for every parent and for the intervention.
  std::vector<complexity::Input> inputs;
  const int coords = a.arity + 1;
  std::vector<int> idx(static_cast<std::size_t>(coords), 0);
  const double step = a.grid > 1 ? 1.0 / (a.grid - 1) : 0.0;
  for (bool more = true; more;) {
    complexity::Input z;
    for (int j = 0; j < a.arity; ++j) z.x.push_back(idx[static_cast<std::size_t>(j)] * step);
    z.a = idx.back() * step;
    inputs.push_back(std::move(z));
    more = false;
    for (auto& i : idx) {
      if (++i < a.grid) {
        more = true;
        break;
      }
      i = 0;
    }
  }
  const auto sample = complexity::FiniteClassSample::from_functions(members, inputs);
  complexity::EluderOptions options;
  options.restarts = a.restarts;
  const auto eluder = complexity::eluder_dimension_search(sample, a.eps, options, rng);
  const auto cover = complexity::covering_number_greedy(sample, a.alpha);

  std::optional<complexity::TheoryEstimate> theory;
  if (std::isfinite(a.K)) theory = complexity::theoretical_dim_and_cn(class_of(a), a.T);

  std::cout << "class              " << a.kind << " (arity " << a.arity << ")\n"
            << "sample             " << sample.function_count() << " functions x " << sample.input_count()
            << " inputs\n"
            << "eluder dimension   >= " << eluder.eluder_lower_bound << " at eps " << fmt(a.eps) << " (scale used "
            << fmt(eluder.epsilon_used) << (eluder.exhaustive ? ", exhaustive" : ", greedy") << ")\n"
            << "covering number    <= " << cover.covering_upper_bound << " at alpha " << fmt(a.alpha)
            << (cover.exhaustive ? " (exact)" : " (greedy)") << '\n';
  if (theory)
    std::cout << "closed form at T=" << a.T << "  dim " << fmt(theory->dim) << ", ln N " << fmt(theory->log_cn)
              << " (template constant applied to dimension " << fmt(theory->effective_dim) << ")\n";
  std::cout << '\n';

  std::ostringstream csv;
  csv << "class,arity,functions,inputs,eps,eps_used,eluder_lower,eluder_exhaustive,alpha,covering_upper,"
         "covering_exact,theory_T,theory_dim,theory_log_cn\n"
      << a.kind << ',' << a.arity << ',' << sample.function_count() << ',' << sample.input_count() << ','
      << fmt(a.eps) << ',' << fmt(eluder.epsilon_used) << ',' << eluder.eluder_lower_bound << ','
      << (eluder.exhaustive ? 1 : 0) << ',' << fmt(a.alpha) << ',' << cover.covering_upper_bound << ','
      << (cover.exhaustive ? 1 : 0) << ',' << a.T << ',' << (theory ? fmt(theory->dim) : "") << ','
      << (theory ? fmt(theory->log_cn) : "") << '\n';
  std::cout << csv.str();
  if (flags.out_dir) open_csv(*flags.out_dir, "complexity.csv") << csv.str();
  return 0;
}

int cmd_audit(const std::string& path, const CommonFlags& flags) {
  auto cfg = harness::load_config(path);
  cfg.agent = harness::AgentKind::GcbUcb;
  flags.apply(cfg);
  const auto coverage = harness::coverage_audit(cfg);
  std::cout << "confidence-set misses  " << coverage.failures << " / " << coverage.checks << "  rate "
            << fmt(coverage.rate()) << " +- " << fmt(coverage.std_error()) << '\n';

  // Compounding error of the optimistic functions on replicate 0.
  const auto trace = harness::run_replicate(cfg, 0, true);
  const auto truth = harness::sample_instance(cfg.scm, cfg.seed, 0);
  Rng rng = make_stream(cfg.seed, 0, 0, StreamPurpose::Probe);
  const auto probe = agents::compounding_error_probe(truth, trace.arms, trace.optimistic, cfg.oracle_rollouts, rng);
  std::ostringstream csv;
  csv << "config_hash,node,depth,cumulative_error\n";
  const auto depths = graph::compute_stats(truth.dag()).depths;
  const std::string hash = harness::config_hash(cfg);
  std::cout << "cumulative |E[X_i | fbar] - E[X_i | f]| at T=" << cfg.horizon << ":\n";
  for (Eigen::Index i = 0; i < probe.cols(); ++i) {
    const double v = probe.rows() ? probe(probe.rows() - 1, i) : 0.0;
    const int depth = depths[static_cast<std::size_t>(i)];
    std::cout << "  node " << i + 1 << " (depth " << depth << ")  " << fmt(v) << '\n';
    csv << hash << ',' << i + 1 << ',' << depth << ',' << fmt(v) << '\n';
  }
  const fs::path dir = cfg.out_dir;
  open_csv(dir, "audit.csv") << csv.str();
  std::cout << "wrote " << (dir / "audit.csv").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal bandits over known graphs with unknown mechanisms"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, lb_flags, cx_flags, audit_flags;
  std::string run_path, sweep_path, audit_path;

  auto* run = app.add_subcommand("run", "Run one configuration (sweep lists ignored)");
  run->add_option("config", run_path, "YAML config")->required()->check(CLI::ExistingFile);
  run_flags.add_to(run);

  auto* sweep = app.add_subcommand("sweep", "Run the cross product of the config's sweep lists");
  sweep->add_option("config", sweep_path, "YAML config")->required()->check(CLI::ExistingFile);
  sweep_flags.add_to(sweep);

  LowerboundArgs lb;
  auto* lower = app.add_subcommand("lowerbound", "Build a hard instance pair and stress an agent on it");
  lower->add_option("--class", lb.kind, "linear | poly | nn")->check(CLI::IsMember({"linear", "poly", "nn"}));
  lower->add_option("--d", lb.d, "Nodes per layer");
  lower->add_option("--L", lb.L, "Layers");
  lower->add_option("--T", lb.T, "Horizon; delta is 1/sqrt(T)");
  lower->add_option("--agent", lb.agent, "gcb-ucb | gcb-ts | ucb | linsem | constant | uniform");
  lower->add_option("--replicates", lb.replicates, "Replicates per instance");
  lower->add_option("--K", lb.K, "Per-layer Lipschitz constant (linear, nn)");
  lower->add_option("--degree", lb.degree, "Polynomial degree (poly)");
  lower->add_option("--width", lb.width, "Hidden width (nn)");
  lower->add_option("--slopes", [&](const CLI::results_t& r) {
    if (r.size() != 2) return false;
    lb.slope_pos = std::stod(r[0]);
    lb.slope_neg = std::stod(r[1]);
    return true;
  }, "Leaky-ReLU slopes: positive negative (nn)")->expected(2);
  lower->add_option("--grid", lb.grid, "Intervention grid points (poly, nn)");
  lower->add_option("--rollouts", lb.rollouts, "Agent Monte-Carlo rollouts");
  lb_flags.add_to(lower);

  ComplexityArgs cx;
  auto* comp = app.add_subcommand("complexity", "Eluder dimension and covering number of a sampled class");
  comp->add_option("--class", cx.kind, "linear | poly | nn")->check(CLI::IsMember({"linear", "poly", "nn"}));
  comp->add_option("--arity", cx.arity, "Parent count");
  comp->add_option("--functions", cx.functions, "Sampled class members");
  comp->add_option("--grid", cx.grid, "Grid points per input coordinate on [0, 1]");
  comp->add_option("--eps", cx.eps, "Eluder scale");
  comp->add_option("--alpha", cx.alpha, "Covering radius");
  comp->add_option("--restarts", cx.restarts, "Greedy restarts");
  comp->add_option("--width", cx.width, "Hidden width (nn)");
  comp->add_option("--K", cx.K, "Norm bound for the closed-form estimates");
  comp->add_option("--T", cx.T, "Horizon for the closed-form estimates");
  cx_flags.add_to(comp);

  auto* audit = app.add_subcommand("audit", "Confidence-set coverage and compounding error of gcb-ucb");
  audit->add_option("config", audit_path, "YAML config")->required()->check(CLI::ExistingFile);
  audit_flags.add_to(audit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  std::signal(SIGINT, on_sigint);
  try {
    if (*run) return cmd_run(run_path, run_flags, false);
    if (*sweep) return cmd_run(sweep_path, sweep_flags, true);
    if (*lower) return cmd_lowerbound(lb, lb_flags);
    if (*comp) return cmd_complexity(cx, cx_flags);
    if (*audit) return cmd_audit(audit_path, audit_flags);
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidDelta& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidSlopes& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
