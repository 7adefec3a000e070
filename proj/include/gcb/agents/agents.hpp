#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcb/agents/models.hpp"
#include "gcb/random.hpp"
#include "gcb/scm/forward.hpp"
#include "gcb/scm/scm.hpp"

namespace gcb::agents {

/// A sequential intervention policy over the arm grid of an SCM.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  /// Arm index for round t (1-based).
  virtual std::size_t select(int t, Rng& rng) = 0;
  /// Full observation X(t) after pulling `arm`.
  virtual void observe(std::size_t arm, std::span<const double> x) = 0;
  /// Function vector the last selection was optimistic under, if any.
  virtual const std::vector<scm::NodeFunction>* last_functions() const { return nullptr; }
};

enum class Exploration { Ucb, Thompson };

/// Model-based agent: per-node fits, then optimism over sampled confidence
/// set members (Ucb) or one posterior draw (Thompson).
///
/// Reads the graph, classes, noise laws, spaces and mode of `problem`; never
/// its mechanisms. Noise is seen through NoiseModel::agent_view.
class GcbAgent final : public Agent {
 public:
  GcbAgent(const scm::Scm& problem, int horizon, AgentConfig cfg, Exploration exploration);

  std::string name() const override { return exploration_ == Exploration::Ucb ? "gcb-ucb" : "gcb-ts"; }
  std::size_t select(int t, Rng& rng) override;
  void observe(std::size_t arm, std::span<const double> x) override;
  const std::vector<scm::NodeFunction>* last_functions() const override { return &last_; }

  const scm::ArmGrid& grid() const { return engine_.grid(); }
  const NodeModel& model(graph::NodeId i) const { return *models_[static_cast<std::size_t>(i - 1)]; }
  double delta() const { return delta_; }
  /// beta_t of node i; throws UnsupportedClass when the class has no finite
  /// covering estimate.
  double beta(graph::NodeId i, int t) const;
  ConfidenceSet confidence_set(graph::NodeId i, int t) const;

 private:
  scm::NoisePlan plan_for(bool all_linear, Rng& rng) const;

  graph::Dag dag_;
  scm::InterventionMode mode_;
  int horizon_;
  AgentConfig cfg_;
  Exploration exploration_;
  double delta_;
  scm::ForwardEngine engine_;
  std::vector<graph::NodeId> order_;
  std::vector<std::unique_ptr<NodeModel>> models_;
  std::vector<std::optional<double>> log_cn_;
  std::vector<double> output_bound_;
  std::optional<scm::NoisePlan> exact_plan_;
  std::vector<scm::NodeFunction> last_;
};

/// Independent-arm UCB with bonus sqrt(2 ln t / n); every arm is pulled once first.
class VanillaUcb final : public Agent {
 public:
  VanillaUcb(std::size_t arms, graph::NodeId reward_node);
  std::string name() const override { return "ucb"; }
  std::size_t select(int t, Rng& rng) override;
  void observe(std::size_t arm, std::span<const double> x) override;

 private:
  std::vector<double> sum_;
  std::vector<double> count_;
  graph::NodeId reward_node_;
};

/// Per-node linear ridge fits with the confidence-ellipsoid bonus propagated
/// through the graph, whatever the true class.
class LinSemUcb final : public Agent {
 public:
  LinSemUcb(const scm::Scm& problem, int horizon, AgentConfig cfg);
  std::string name() const override { return "linsem"; }
  std::size_t select(int t, Rng& rng) override;
  void observe(std::size_t arm, std::span<const double> x) override;

  const NodeModel& model(graph::NodeId i) const { return *models_[static_cast<std::size_t>(i - 1)]; }
  /// Squared ellipsoid radius used at round t for node i.
  double radius_sq(graph::NodeId i, int t) const;

 private:
  graph::Dag dag_;
  scm::InterventionMode mode_;
  AgentConfig cfg_;
  double delta_;
  scm::ArmGrid grid_;
  std::vector<scm::NoiseModel> noise_;
  std::vector<graph::NodeId> order_;
  std::vector<std::unique_ptr<NodeModel>> models_;
};

/// Always pulls the same arm.
class ConstantPolicy final : public Agent {
 public:
  explicit ConstantPolicy(std::size_t arm) : arm_(arm) {}
  std::string name() const override { return "constant"; }
  std::size_t select(int, Rng&) override { return arm_; }
  void observe(std::size_t, std::span<const double>) override {}

 private:
  std::size_t arm_;
};

/// Uniformly random arm each round.
class UniformRandomPolicy final : public Agent {
 public:
  explicit UniformRandomPolicy(std::size_t arms) : arms_(arms) {}
  std::string name() const override { return "uniform"; }
  std::size_t select(int t, Rng& rng) override;
  void observe(std::size_t, std::span<const double>) override {}

 private:
  std::size_t arms_;
};

/// Cumulative per-node |E_a(t)[X_i | fbar_t] - E_a(t)[X_i | f]| (rows: rounds,
/// columns: nodes). Both means use the same noise draws each round; linear
/// systems use exact means.
Eigen::MatrixXd compounding_error_probe(const scm::Scm& truth, std::span<const std::size_t> arms,
                                        std::span<const std::vector<scm::NodeFunction>> fbar,
                                        std::size_t rollouts, Rng& rng);

/// b * sum_{l=1..depth} d^(l-1) prod_{k=2..l} K^(k), where level_lipschitz[k-1]
/// holds K^(k). Zero at depth 0.
double compounding_error_reference(double b, int d, int depth, std::span<const double> level_lipschitz);

}  // namespace gcb::agents
