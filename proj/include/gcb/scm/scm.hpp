#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gcb/graph/dag.hpp"
#include "gcb/random.hpp"
#include "gcb/scm/forward.hpp"
#include "gcb/scm/function.hpp"
#include "gcb/scm/noise.hpp"

namespace gcb::scm {

/// Ground-truth structural causal model over a known DAG.
class Scm {
 public:
  /// All vectors are indexed by node id - 1. Every function is validated
  /// against its class and must match the node's parent count.
  Scm(graph::Dag dag, std::vector<FunctionClass> classes, std::vector<NodeFunction> functions,
      std::vector<NoiseModel> noise, std::vector<InterventionSpace> spaces,
      InterventionMode mode = InterventionMode::Soft);

  const graph::Dag& dag() const { return dag_; }
  int node_count() const { return dag_.node_count(); }
  InterventionMode mode() const { return mode_; }
  const std::vector<FunctionClass>& classes() const { return classes_; }
  const std::vector<NodeFunction>& functions() const { return functions_; }
  const std::vector<NoiseModel>& noise() const { return noise_; }
  const std::vector<InterventionSpace>& spaces() const { return spaces_; }
  const FunctionClass& function_class(graph::NodeId i) const { return classes_.at(static_cast<std::size_t>(i - 1)); }
  const NodeFunction& function(graph::NodeId i) const { return functions_.at(static_cast<std::size_t>(i - 1)); }

  /// Clamp every f_i output to [-C_i, C_i] before adding noise. Off by default.
  bool clamp_outputs() const { return clamp_; }
  void set_clamp_outputs(bool on) { clamp_ = on; }
  std::vector<double> output_bounds() const;

  /// Same structure with other mechanisms (validated).
  Scm with_functions(std::vector<NodeFunction> functions) const;
  Scm with_noise(std::vector<NoiseModel> noise) const;

  /// Throws InvalidIntervention when a has the wrong length or a_i is not in A_i.
  void check_intervention(std::span<const double> a) const;
  ArmGrid arm_grid(std::size_t cap = kDefaultArmCap) const;
  ForwardEngine engine(std::size_t cap = kDefaultArmCap) const;

 private:
  graph::Dag dag_;
  std::vector<FunctionClass> classes_;
  std::vector<NodeFunction> functions_;
  std::vector<NoiseModel> noise_;
  std::vector<InterventionSpace> spaces_;
  InterventionMode mode_;
  bool clamp_ = false;
};

/// One draw of X under intervention a; nodes are evaluated in topological
/// order and every node with random noise consumes one base variate even when
/// it is hard-set, so streams stay aligned across arms.
std::vector<double> sample_system(const Scm& scm, std::span<const double> a, Rng& rng);

struct RewardMethod {
  enum class Kind {
    Analytic,    ///< exact mean propagation; linear mechanisms only
    MonteCarlo,  ///< average of `rollouts` independent draws
    Exact,       ///< enumeration of discrete noise outcomes
  };
  Kind kind = Kind::MonteCarlo;
  std::size_t rollouts = 256;

  static RewardMethod analytic() { return {Kind::Analytic, 1}; }
  static RewardMethod monte_carlo(std::size_t m = 256) { return {Kind::MonteCarlo, m}; }
  static RewardMethod exact() { return {Kind::Exact, 1}; }
};

struct RewardEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// mu_a = E_a[X_N]. Analytic throws AnalyticUnsupported unless every
/// mechanism is linear; Exact throws it for continuous noise.
RewardEstimate expected_reward(const Scm& scm, std::span<const double> a, RewardMethod method, Rng& rng);

/// Noise plan for `method` over the nodes of `scm` (draws from rng for Monte Carlo).
NoisePlan make_noise_plan(const Scm& scm, RewardMethod method, Rng& rng);

/// Rewards of every arm of the search grid, using common random numbers
/// across arms for Monte Carlo.
struct RewardTable {
  ArmGrid grid;
  std::vector<double> mean;
  std::vector<double> std_error;
  std::size_t best = 0;

  double best_mean() const { return mean[best]; }
  double regret(std::size_t arm) const { return mean[best] - mean[arm]; }
};

RewardTable reward_table(const Scm& scm, RewardMethod method, Rng& rng, std::size_t cap = kDefaultArmCap);

struct OracleResult {
  std::vector<double> arm;
  double reward = 0.0;
};

/// Exhaustive argmax over the grid; ties go to the lexicographically smallest arm.
OracleResult oracle_best_intervention(const Scm& scm, RewardMethod method, Rng& rng,
                                      std::size_t cap = kDefaultArmCap);

/// Index of the largest value; the first one wins ties.
std::size_t argmax_first(std::span<const double> values);

}  // namespace gcb::scm
