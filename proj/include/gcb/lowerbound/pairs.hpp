#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gcb/agents/agents.hpp"
#include "gcb/scm/scm.hpp"

namespace gcb::lowerbound {

enum class PairClass { Linear, Polynomial, NeuralNet };
const char* to_string(PairClass k);

/// Two hierarchical SCMs that differ only in node 1's noise: G1 favours
/// a_1 at or below the threshold, G2 favours a_1 above it.
struct InstancePair {
  PairClass kind = PairClass::Linear;
  scm::Scm g1;
  scm::Scm g2;
  double delta = 0.0;
  int d = 1;
  int L = 1;
  /// K^(l) for l = 1..L.
  std::vector<double> level_lipschitz;
  /// p for polynomial pairs, 0 otherwise.
  int degree = 0;
  /// Hidden width s for network pairs, 0 otherwise.
  int width = 0;
  /// Representative optimal arms of G1 and G2.
  std::vector<double> best_g1;
  std::vector<double> best_g2;
  /// mu_G1(best_g1) - mu_G1(best_g2), from exact enumeration of G1.
  double gap = 0.0;
  /// The closed-form gap of the construction.
  double nominal_gap = 0.0;

  double kl_bound(int T) const;
};

/// d^(L/2 - 1) * delta * prod K^(l).
double linear_gap(int d, int L, double delta, std::span<const double> level_lipschitz);
/// Network construction uses the same path count argument.
double nn_gap(int d, int L, double delta, std::span<const double> level_lipschitz);
/// Shared weight beta = (p^L d^(L (p - 1/2)))^(-p^L - p).
double poly_beta(int d, int L, int p);
/// Nonzero value of a node at depth `depth`: beta^((p^depth - 1)/(p - 1)) d^(p (p^(depth-1) - 1)/(p - 1)).
double poly_support_value(int d, int depth, int p, double beta);
/// support value of the reward node times delta.
double poly_gap(int d, int L, int p, double delta);
/// p beta^(p^L) d^(p^(depth-1) - p + 1/2), the closed form for a node at `depth`.
double poly_lipschitz_formula(int d, int L, int depth, int p);
/// T ln(1 / ((1 + 2 delta)(1 - 2 delta))).
double kl_bound(double delta, int T);
/// Bernoulli KL(p || q).
double bernoulli_kl(double p, double q);

/// Throws InvalidDelta unless 0 <= delta < 1/2, std::invalid_argument on bad d, L or K.
InstancePair build_linear_pair(int d, int L, std::span<const double> level_lipschitz, double delta);
/// Interval spaces searched on `grid` points; the noise branch flips at a_1 = 1/2.
InstancePair build_poly_pair(int d, int L, int p, double delta, int grid = 2);
/// Parametric ReLU with slopes beta_s > alpha_s > 0 (InvalidSlopes otherwise).
InstancePair build_nn_pair(int d, int L, int s, double beta_s, double alpha_s,
                           std::span<const double> level_lipschitz, double delta, int grid = 2);

struct RegretFloor {
  /// (T/8) gap ((1 + 2 delta)(1 - 2 delta))^T
  double exact = 0.0;
  /// c K d^(L/2 - 1) sqrt(T) with c = 0.2^5 / 8 (K without the d factor for polynomial pairs).
  double simplified = 0.0;
};

/// Throws DeltaMismatch unless T >= 5 and delta = 1/sqrt(T).
RegretFloor regret_floor(const InstancePair& pair, int T);

/// KL between node-1 observation sequences of G1 and G2 under the given a_1 sequence.
double node1_kl(const InstancePair& pair, std::span<const double> a1);

struct KlEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Plug-in estimate of node1_kl: per branch of the noise condition, the
/// Bernoulli rates of both instances are estimated from `samples` draws
/// each. The standard error is the delta-method one.
KlEstimate empirical_node1_kl(const InstancePair& pair, std::span<const double> a1, std::size_t samples, Rng& rng);

using AgentFactory = std::function<std::unique_ptr<agents::Agent>(const scm::Scm& instance, int horizon)>;

struct StressReport {
  int T = 0;
  int replicates = 0;
  double mean_g1 = 0.0;
  double se_g1 = 0.0;
  double mean_g2 = 0.0;
  double se_g2 = 0.0;
  /// Unset when the pair's delta is not the balancing 1/sqrt(T).
  std::optional<RegretFloor> floor;

  double max_mean() const { return mean_g1 > mean_g2 ? mean_g1 : mean_g2; }
};

/// Runs fresh agents on G1 and G2 and reports the mean expected regret on each.
StressReport minimax_stress(const AgentFactory& make, const InstancePair& pair, int T, int replicates,
                            std::uint64_t seed);

}  // namespace gcb::lowerbound
