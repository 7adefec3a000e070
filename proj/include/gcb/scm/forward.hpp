#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "gcb/graph/dag.hpp"
#include "gcb/random.hpp"
#include "gcb/scm/function.hpp"
#include "gcb/scm/noise.hpp"

namespace gcb::scm {

inline constexpr std::size_t kDefaultArmCap = 1'000'000;

/// Product grid of per-node intervention values.
///
/// Arms are indexed in mixed radix with node 1 most significant, so with
/// ascending per-node values the index order is the lexicographic order of
/// the arm vectors.
class ArmGrid {
 public:
  ArmGrid() = default;
  /// values[i-1] are the sorted candidate values of node i. Throws GridTooLarge
  /// when the product exceeds `cap`.
  explicit ArmGrid(std::vector<std::vector<double>> values, std::size_t cap = kDefaultArmCap);

  std::size_t size() const { return size_; }
  int node_count() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& values(graph::NodeId i) const { return values_[static_cast<std::size_t>(i - 1)]; }
  std::size_t stride(graph::NodeId i) const { return strides_[static_cast<std::size_t>(i - 1)]; }

  std::vector<double> arm(std::size_t index) const;
  /// Per-node value positions of an arm.
  std::vector<std::size_t> digits(std::size_t index) const;
  /// Throws InvalidIntervention when the vector is not a grid point.
  std::size_t index_of(std::span<const double> a) const;

 private:
  std::vector<std::vector<double>> values_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// Noise realizations shared by every arm of one evaluation.
struct NoisePlan {
  enum class Kind {
    Mean,        ///< one deterministic rollout where each noise equals its mean
    Sampled,     ///< Monte-Carlo rollouts; base variates in `base`
    Enumerated,  ///< every joint outcome of discrete noises; support indices in `base`
  };
  Kind kind = Kind::Mean;
  /// rollouts x node_count
  Eigen::MatrixXd base;

  Eigen::Index rollouts() const { return kind == Kind::Mean ? 1 : base.rows(); }

  static NoisePlan means(int node_count);
  /// Row m holds the base variates of rollout m, drawn node by node in
  /// `order`, rollout after rollout.
  static NoisePlan sampled(std::span<const NoiseModel> noise, std::span<const graph::NodeId> order,
                           std::size_t rollouts, Rng& rng);
  /// Enumerates the joint support of the noises of `nodes` (others stay at
  /// index 0). Throws AnalyticUnsupported for continuous noise and
  /// GridTooLarge above `cap` outcomes.
  static NoisePlan enumerated(std::span<const NoiseModel> noise, std::span<const graph::NodeId> nodes,
                              std::size_t cap = 1u << 22);
};

/// Per-arm reward statistics indexed like ArmGrid.
struct ArmStats {
  std::vector<double> mean;
  /// Variance of the reward across rollouts (probability-weighted for
  /// enumerated plans, unbiased sample variance for sampled plans).
  std::vector<double> variance;
};

/// Batched evaluation of E_a[X_N] over a whole arm grid.
///
/// Arms are walked as a tree over the topological order of the ancestors of
/// the reward node, so shared prefixes are computed once. Nodes that cannot
/// reach the reward node are skipped and their grid values only replicate
/// results.
class ForwardEngine {
 public:
  ForwardEngine(const graph::Dag& dag, ArmGrid grid, InterventionMode mode, std::vector<NoiseModel> noise);

  /// Clamp f_i outputs to [-bound_i, bound_i] before noise; empty disables.
  void set_output_clamp(std::vector<double> bounds) { clamp_ = std::move(bounds); }

  const ArmGrid& grid() const { return grid_; }
  const std::vector<graph::NodeId>& reward_ancestors() const { return relevant_; }
  const std::vector<NoiseModel>& noise() const { return noise_; }

  ArmStats evaluate_all(std::span<const NodeFunction> functions, const NoisePlan& plan) const;
  /// Mean of every node under a single arm (index id-1).
  Eigen::VectorXd node_means(std::span<const NodeFunction> functions, const NoisePlan& plan,
                             std::span<const double> arm) const;

 private:
  graph::Dag dag_;
  ArmGrid grid_;
  InterventionMode mode_;
  std::vector<NoiseModel> noise_;
  std::vector<double> clamp_;
  std::vector<graph::NodeId> relevant_;
  std::vector<graph::NodeId> irrelevant_;
};

}  // namespace gcb::scm
