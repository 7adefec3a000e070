#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gcb/agents/agents.hpp"
#include "gcb/scm/scm.hpp"

namespace gcb::harness {

enum class Family { Linear, Quadratic, NeuralNet };
const char* to_string(Family f);

enum class AgentKind { GcbUcb, GcbTs, Ucb, LinSem, Constant, Uniform };
const char* to_string(AgentKind k);

/// Gaussian prior over mechanism weights.
struct PriorSpec {
  /// Family default when unset: 1/(d+1) for linear and quadratic weights,
  /// 1/(2 sqrt(d+1)) for network weights.
  std::optional<double> mean;
  /// Linear family only: mean of the weights used under intervention.
  std::optional<double> mean_bar;
  /// Standard deviation as a multiple of |mean|, unless `sd` is set.
  double sd_ratio = 0.1;
  std::optional<double> sd;
  /// Draw a fresh instance per replicate; otherwise every replicate uses the prior mean.
  bool active = true;
};

/// Hierarchical benchmark SCM: L layers of d nodes and one reward node.
struct ScmSpec {
  Family family = Family::Quadratic;
  int d = 3;
  int L = 2;
  /// Hidden width of network mechanisms; 0 means d.
  int width = 0;
  PriorSpec prior;
  double noise_variance = 1.0;
  double noise_mean = 0.0;
  /// Binary spaces {0, 1}, or a grid of `grid_resolution` points on [0, 1].
  bool interval_space = false;
  int grid_resolution = 3;
  scm::InterventionMode mode = scm::InterventionMode::Soft;
  /// Class constants K_i and C_i declared to the agent.
  double lipschitz = std::numeric_limits<double>::infinity();
  double output_bound = 1.0;

  void validate() const;
};

struct ExperimentConfig {
  ScmSpec scm;
  AgentKind agent = AgentKind::GcbTs;
  agents::AgentConfig agent_config;
  /// Arm index pulled by the constant policy.
  std::size_t constant_arm = 0;
  int horizon = 1000;
  int replicates = 20;
  std::uint64_t seed = 1;
  /// Monte-Carlo rollouts of the regret oracle when no exact method applies.
  std::size_t oracle_rollouts = 20000;

  std::vector<int> sweep_T;
  std::vector<int> sweep_d;
  std::vector<int> sweep_L;
  std::vector<AgentKind> sweep_agent;

  std::string out_dir = "out";
  bool plots = true;
  bool overlay = true;
  int workers = 1;

  /// Throws ConfigInvalid naming the offending field.
  void validate() const;
};

/// Draws replicate r's instance from the prior, using per-node prior streams.
scm::Scm sample_instance(const ScmSpec& spec, std::uint64_t seed, int replicate);

/// Exact when the instance allows it (analytic for linear mechanisms,
/// enumeration for discrete noise), Monte Carlo with common random numbers otherwise.
scm::RewardTable oracle_table(const scm::Scm& instance, std::size_t rollouts, Rng& rng);

std::unique_ptr<agents::Agent> make_agent(const ExperimentConfig& cfg, const scm::Scm& instance);

struct RegretTrace {
  std::uint64_t seed = 0;
  int replicate = 0;
  std::vector<std::size_t> arms;
  std::vector<std::vector<double>> arm_values;
  std::vector<double> reward;
  std::vector<double> inst_regret;
  std::vector<double> cum_regret;
  /// f-bar per round, kept only when requested.
  std::vector<std::vector<scm::NodeFunction>> optimistic;
};

RegretTrace run_replicate(const ExperimentConfig& cfg, int replicate, bool keep_functions = false);

/// Runs every replicate, `cfg.workers` at a time; results are in replicate order.
/// After request_stop() the replicates that completed are returned and the
/// rest are dropped.
std::vector<RegretTrace> run_replicates(const ExperimentConfig& cfg);

/// Cooperative interruption of running replicates (safe to call from a signal handler).
void request_stop();
bool stop_requested();
void clear_stop();

/// OLS slope of (ln t, ln y_t) over t in [T/2, T] (1-based t); rounds with
/// nonpositive y are skipped. NaN when fewer than two points remain.
double loglog_slope(const std::vector<double>& cumulative);

struct SummaryPoint {
  int T = 0;
  int d = 0;
  int L = 0;
  AgentKind agent = AgentKind::GcbTs;
  Family family = Family::Quadratic;
  int replicates = 0;
  double mean_final = 0.0;
  double se_final = 0.0;
  double slope = 0.0;
  /// Mean and standard error of R(t) per round.
  std::vector<double> mean_curve;
  std::vector<double> se_curve;
  /// Bound overlays at T (up to constants); lower is NaN when the family has none.
  double bound_upper = 0.0;
  double bound_lower = 0.0;
  /// The same overlays on a log-spaced horizon grid, for plotting.
  std::vector<int> bound_t;
  std::vector<double> bound_upper_curve;
  std::vector<double> bound_lower_curve;
};

SummaryPoint summarize(const ExperimentConfig& cfg, const std::vector<RegretTrace>& traces);

struct CoverageReport {
  std::size_t checks = 0;
  std::size_t failures = 0;
  double rate() const { return checks ? static_cast<double>(failures) / static_cast<double>(checks) : 0.0; }
  double std_error() const;
};

/// Runs gcb-ucb and counts, over (replicate, node, round), how often the true
/// mechanism lies outside the node's confidence set. Nodes with no parameters
/// to learn are not counted.
CoverageReport coverage_audit(const ExperimentConfig& cfg);

}  // namespace gcb::harness
