#include "gcb/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "gcb/complexity/complexity.hpp"
#include "gcb/errors.hpp"
#include "gcb/graph/dag.hpp"

namespace gcb::harness {

const char* to_string(Family f) {
  switch (f) {
    case Family::Linear:
      return "linear";
    case Family::Quadratic:
      return "quadratic";
    case Family::NeuralNet:
      return "nn";
  }
  return "?";
}

const char* to_string(AgentKind k) {
  switch (k) {
    case AgentKind::GcbUcb:
      return "gcb-ucb";
    case AgentKind::GcbTs:
      return "gcb-ts";
    case AgentKind::Ucb:
      return "ucb";
    case AgentKind::LinSem:
      return "linsem";
    case AgentKind::Constant:
      return "constant";
    case AgentKind::Uniform:
      return "uniform";
  }
  return "?";
}

void ScmSpec::validate() const {
  if (d < 1) throw ConfigInvalid("scm.d", "must be at least 1");
  if (L < 1) throw ConfigInvalid("scm.L", "must be at least 1");
  if (width < 0) throw ConfigInvalid("scm.width", "must be >= 0");
  if (!(prior.sd_ratio >= 0.0)) throw ConfigInvalid("scm.prior.sd_ratio", "must be >= 0");
  if (prior.sd && !(*prior.sd >= 0.0)) throw ConfigInvalid("scm.prior.sd", "must be >= 0");
  if (!(noise_variance >= 0.0)) throw ConfigInvalid("scm.noise.variance", "must be >= 0");
  if (interval_space && grid_resolution < 2) throw ConfigInvalid("scm.grid_resolution", "must be at least 2");
  if (!(lipschitz > 0.0)) throw ConfigInvalid("scm.lipschitz", "must be positive");
  if (!(output_bound > 0.0)) throw ConfigInvalid("scm.output_bound", "must be positive");
}

void ExperimentConfig::validate() const {
  scm.validate();
  agent_config.validate();
  if (horizon < 1) throw ConfigInvalid("run.horizon", "must be at least 1");
  if (replicates < 1) throw ConfigInvalid("run.replicates", "must be at least 1");
  if (oracle_rollouts < 1) throw ConfigInvalid("run.oracle_rollouts", "must be at least 1");
  if (workers < 1) throw ConfigInvalid("run.workers", "must be at least 1");
  const bool ucb = agent == AgentKind::GcbUcb ||
                   std::find(sweep_agent.begin(), sweep_agent.end(), AgentKind::GcbUcb) != sweep_agent.end();
  if (ucb && !std::isfinite(scm.lipschitz))
    throw ConfigInvalid("scm.lipschitz", "gcb-ucb needs a finite norm bound for its confidence radius");
  for (int t : sweep_T)
    if (t < 1) throw ConfigInvalid("sweep.T", "values must be at least 1");
  for (int d : sweep_d)
    if (d < 1) throw ConfigInvalid("sweep.d", "values must be at least 1");
  for (int l : sweep_L)
    if (l < 1) throw ConfigInvalid("sweep.L", "values must be at least 1");
}

namespace {

std::atomic<bool> g_stop{false};

class Interrupted : public Error {
 public:
  Interrupted() : Error("interrupted") {}
};

double default_mean(Family f, int d) {
  if (f == Family::NeuralNet) return 1.0 / (2.0 * std::sqrt(d + 1.0));
  return 1.0 / (d + 1.0);
}

struct Draw {
  double mean;
  double sd;
  Rng& rng;
  std::normal_distribution<double> normal{};
  double operator()() { return sd > 0.0 ? mean + sd * normal(rng) : mean; }
};

}  // namespace

void request_stop() { g_stop.store(true); }
bool stop_requested() { return g_stop.load(); }
void clear_stop() { g_stop.store(false); }

scm::Scm sample_instance(const ScmSpec& spec, std::uint64_t seed, int replicate) {
  spec.validate();
  auto dag = graph::hierarchical_graph(spec.d, spec.L);
  const int n = dag.node_count();
  const double mean = spec.prior.mean.value_or(default_mean(spec.family, spec.d));
  const double mean_bar = spec.prior.mean_bar.value_or(mean);
  auto sd_of = [&](double m) {
    if (!spec.prior.active) return 0.0;
    return spec.prior.sd.value_or(spec.prior.sd_ratio * std::abs(m));
  };
  const int width = spec.width > 0 ? spec.width : spec.d;
  const scm::LeakyRelu act{1.0, 0.1};

  std::vector<scm::FunctionClass> classes;
  std::vector<scm::NodeFunction> functions;
  std::vector<scm::NoiseModel> noise;
  std::vector<scm::InterventionSpace> spaces;
  for (graph::NodeId i = 1; i <= n; ++i) {
    const int arity = static_cast<int>(dag.parents(i).size());
    Rng rng = make_stream(seed, static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(i),
                          StreamPurpose::Prior);
    Draw w{mean, sd_of(mean), rng};
    switch (spec.family) {
      case Family::Linear: {
        Draw wb{mean_bar, sd_of(mean_bar), rng};
        Eigen::VectorXd theta(arity), theta_bar(arity);
        for (int j = 0; j < arity; ++j) theta[j] = w();
        for (int j = 0; j < arity; ++j) theta_bar[j] = wb();
        classes.push_back(scm::FunctionClass::linear(arity, spec.lipschitz, spec.output_bound));
        functions.push_back(scm::NodeFunction::linear(std::move(theta), std::move(theta_bar)));
        break;
      }
      case Family::Quadratic: {
        Eigen::VectorXd theta(arity + 1);
        for (int j = 0; j <= arity; ++j) theta[j] = w();
        classes.push_back(scm::FunctionClass::polynomial(arity, 2, spec.lipschitz, spec.output_bound, spec.d,
                                                         spec.output_bound));
        functions.push_back(scm::NodeFunction::polynomial(std::move(theta), 2));
        break;
      }
      case Family::NeuralNet: {
        Eigen::MatrixXd inner(width, arity + 1);
        Eigen::VectorXd outer(width);
        for (Eigen::Index k = 0; k < inner.size(); ++k) inner.data()[k] = w();
        for (int k = 0; k < width; ++k) outer[k] = w();
        classes.push_back(scm::FunctionClass::neural(arity, width, act, spec.lipschitz, spec.output_bound));
        functions.push_back(scm::NodeFunction::neural(std::move(inner), std::move(outer), act));
        break;
      }
    }
    noise.push_back(scm::NoiseModel::gaussian(spec.noise_variance, spec.noise_mean));
    spaces.push_back(spec.interval_space ? scm::InterventionSpace::interval(spec.grid_resolution)
                                         : scm::InterventionSpace::binary());
  }
  try {
    return scm::Scm(std::move(dag), std::move(classes), std::move(functions), std::move(noise), std::move(spaces),
                    spec.mode);
  } catch (const NormConstraintViolated& e) {
    throw ConfigInvalid("scm.lipschitz", std::string("a prior draw falls outside the declared class (") + e.what() +
                                             "); raise the bound or shrink the prior");
  }
}

scm::RewardTable oracle_table(const scm::Scm& instance, std::size_t rollouts, Rng& rng) {
  bool linear = true;
  for (const auto& f : instance.functions()) linear = linear && f.is_linear();
  if (linear) return scm::reward_table(instance, scm::RewardMethod::analytic(), rng);
  bool discrete = true;
  for (const auto& nz : instance.noise()) discrete = discrete && nz.is_discrete();
  if (discrete) {
    try {
      return scm::reward_table(instance, scm::RewardMethod::exact(), rng);
    } catch (const GridTooLarge&) {
    }
  }
  return scm::reward_table(instance, scm::RewardMethod::monte_carlo(rollouts), rng);
}

std::unique_ptr<agents::Agent> make_agent(const ExperimentConfig& cfg, const scm::Scm& instance) {
  switch (cfg.agent) {
    case AgentKind::GcbUcb:
      return std::make_unique<agents::GcbAgent>(instance, cfg.horizon, cfg.agent_config, agents::Exploration::Ucb);
    case AgentKind::GcbTs:
      return std::make_unique<agents::GcbAgent>(instance, cfg.horizon, cfg.agent_config,
                                                agents::Exploration::Thompson);
    case AgentKind::Ucb:
      return std::make_unique<agents::VanillaUcb>(instance.arm_grid().size(), instance.dag().reward_node());
    case AgentKind::LinSem:
      return std::make_unique<agents::LinSemUcb>(instance, cfg.horizon, cfg.agent_config);
    case AgentKind::Constant: {
      const std::size_t arms = instance.arm_grid().size();
      if (cfg.constant_arm >= arms) throw ConfigInvalid("agent.constant_arm", "exceeds the arm count");
      return std::make_unique<agents::ConstantPolicy>(cfg.constant_arm);
    }
    case AgentKind::Uniform:
      return std::make_unique<agents::UniformRandomPolicy>(instance.arm_grid().size());
  }
  throw std::logic_error("unknown agent kind");
}

RegretTrace run_replicate(const ExperimentConfig& cfg, int replicate, bool keep_functions) {
  const auto r = static_cast<std::uint32_t>(replicate);
  const scm::Scm instance = sample_instance(cfg.scm, cfg.seed, replicate);
  Rng oracle_rng = make_stream(cfg.seed, r, 0, StreamPurpose::Oracle);
  const scm::RewardTable table = oracle_table(instance, cfg.oracle_rollouts, oracle_rng);
  auto agent = make_agent(cfg, instance);
  Rng env = make_stream(cfg.seed, r, 0, StreamPurpose::Environment);
  Rng agent_rng = make_stream(cfg.seed, r, 0, StreamPurpose::Agent);

  RegretTrace trace;
  trace.seed = cfg.seed;
  trace.replicate = replicate;
  const auto T = static_cast<std::size_t>(cfg.horizon);
  trace.arms.reserve(T);
  trace.arm_values.reserve(T);
  trace.reward.reserve(T);
  trace.inst_regret.reserve(T);
  trace.cum_regret.reserve(T);
  const auto reward_index = static_cast<std::size_t>(instance.dag().reward_node() - 1);
  double cum = 0.0;
  for (int t = 1; t <= cfg.horizon; ++t) {
    if (stop_requested()) throw Interrupted();
    const std::size_t arm = agent->select(t, agent_rng);
    auto a = table.grid.arm(arm);
    const auto x = scm::sample_system(instance, a, env);
    agent->observe(arm, x);
    const double inst = table.regret(arm);
    cum += inst;
    trace.arms.push_back(arm);
    trace.arm_values.push_back(std::move(a));
    trace.reward.push_back(x[reward_index]);
    trace.inst_regret.push_back(inst);
    trace.cum_regret.push_back(cum);
    if (keep_functions) {
      const auto* f = agent->last_functions();
      trace.optimistic.push_back(f ? *f : std::vector<scm::NodeFunction>{});
    }
  }
  return trace;
}

std::vector<RegretTrace> run_replicates(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<RegretTrace> out(static_cast<std::size_t>(cfg.replicates));
  std::vector<char> done(out.size(), 0);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int r = next++; r < cfg.replicates; r = next++) {
      try {
        out[static_cast<std::size_t>(r)] = run_replicate(cfg, r);
        done[static_cast<std::size_t>(r)] = 1;
      } catch (const Interrupted&) {
        next = cfg.replicates;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.replicates;
      }
    }
  };
  const int workers = std::min(cfg.workers, cfg.replicates);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<RegretTrace> completed;
  for (std::size_t r = 0; r < out.size(); ++r)
    if (done[r]) completed.push_back(std::move(out[r]));
  return completed;
}

double loglog_slope(const std::vector<double>& cumulative) {
  const std::size_t T = cumulative.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t t = (T + 1) / 2; t <= T; ++t) {
    if (t == 0) continue;
    const double y = cumulative[t - 1];
    if (!(y > 0.0)) continue;
    const double lx = std::log(static_cast<double>(t));
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = static_cast<double>(n);
  const double denom = m * sxx - sx * sx;
  if (denom <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / denom;
}

SummaryPoint summarize(const ExperimentConfig& cfg, const std::vector<RegretTrace>& traces) {
  if (traces.empty()) throw Error("summary of an empty run");
  SummaryPoint p;
  p.T = cfg.horizon;
  p.d = cfg.scm.d;
  p.L = cfg.scm.L;
  p.agent = cfg.agent;
  p.family = cfg.scm.family;
  p.replicates = static_cast<int>(traces.size());
  const std::size_t T = traces.front().cum_regret.size();
  const double R = static_cast<double>(traces.size());
  p.mean_curve.assign(T, 0.0);
  p.se_curve.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double s = 0.0;
    for (const auto& tr : traces) s += tr.cum_regret[t];
    const double m = s / R;
    double ss = 0.0;
    for (const auto& tr : traces) ss += (tr.cum_regret[t] - m) * (tr.cum_regret[t] - m);
    p.mean_curve[t] = m;
    p.se_curve[t] = traces.size() > 1 ? std::sqrt(ss / (R - 1.0) / R) : 0.0;
  }
  p.mean_final = T ? p.mean_curve.back() : 0.0;
  p.se_final = T ? p.se_curve.back() : 0.0;
  p.slope = loglog_slope(p.mean_curve);

  complexity::BoundInputs in;
  switch (cfg.scm.family) {
    case Family::Linear:
      in.family = complexity::BoundFamily::Linear;
      break;
    case Family::Quadratic:
      in.family = complexity::BoundFamily::Polynomial;
      break;
    case Family::NeuralNet:
      in.family = complexity::BoundFamily::NeuralNet;
      break;
  }
  in.K = std::isfinite(cfg.scm.lipschitz) ? cfg.scm.lipschitz : 1.0;
  in.d = cfg.scm.d;
  in.L = cfg.scm.L;
  in.N = cfg.scm.d * cfg.scm.L + 1;
  in.width = cfg.scm.width > 0 ? cfg.scm.width : cfg.scm.d;
  const int horizon[] = {cfg.horizon};
  const auto rows = complexity::regret_bound_curves(in, horizon);
  if (!rows.empty()) {
    p.bound_upper = rows.front().upper;
    p.bound_lower = rows.front().lower;
  }
  if (cfg.overlay) {
    std::vector<int> grid;
    for (int k = 0; k <= 40; ++k) {
      const int t = static_cast<int>(std::lround(std::pow(static_cast<double>(cfg.horizon), k / 40.0)));
      if (grid.empty() || t > grid.back()) grid.push_back(t);
    }
    for (const auto& row : complexity::regret_bound_curves(in, grid)) {
      p.bound_t.push_back(row.T);
      p.bound_upper_curve.push_back(row.upper);
      p.bound_lower_curve.push_back(row.lower);
    }
  }
  return p;
}

double CoverageReport::std_error() const {
  if (checks == 0) return 0.0;
  const double p = rate();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(checks));
}

CoverageReport coverage_audit(const ExperimentConfig& cfg) {
  cfg.validate();
  CoverageReport report;
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    const auto r = static_cast<std::uint32_t>(rep);
    const scm::Scm instance = sample_instance(cfg.scm, cfg.seed, rep);
    agents::GcbAgent agent(instance, cfg.horizon, cfg.agent_config, agents::Exploration::Ucb);
    Rng env = make_stream(cfg.seed, r, 0, StreamPurpose::Environment);
    Rng agent_rng = make_stream(cfg.seed, r, 0, StreamPurpose::Agent);
    for (int t = 1; t <= cfg.horizon; ++t) {
      const std::size_t arm = agent.select(t, agent_rng);
      for (graph::NodeId i = 1; i <= instance.node_count(); ++i) {
        if (agent.model(i).fit().feature_dim == 0) continue;
        ++report.checks;
        if (!agents::in_confidence_set(instance.function(i), agent.confidence_set(i, t))) ++report.failures;
      }
      const auto x = scm::sample_system(instance, agent.grid().arm(arm), env);
      agent.observe(arm, x);
    }
  }
  return report;
}

}  // namespace gcb::harness
