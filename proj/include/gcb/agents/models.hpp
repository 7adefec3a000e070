#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gcb/random.hpp"
#include "gcb/scm/function.hpp"

namespace gcb::agents {

/// Observed (x_pa, a, X_i) triples of one node, in round order.
struct NodeHistory {
  int arity = 0;
  /// Row-major, `arity` values per round.
  std::vector<double> inputs;
  std::vector<double> actions;
  std::vector<double> outputs;

  std::size_t size() const { return outputs.size(); }
  std::span<const double> x(std::size_t s) const {
    return {inputs.data() + s * static_cast<std::size_t>(arity), static_cast<std::size_t>(arity)};
  }
  /// Throws ArityMismatch when x_pa has the wrong length.
  void append(std::span<const double> x_pa, double a, double y);
};

struct SgdSettings {
  /// Minibatch steps per refit.
  int epochs = 50;
  double step_size = 0.01;
  int batch_size = 32;
  bool warm_start = true;
};

struct AgentConfig {
  /// Confidence level; values <= 0 select 1/(N T).
  double delta = 0.0;
  double ridge = 1.0;
  int candidates = 32;
  /// Noise rollouts per reward evaluation when no exact plan is available.
  std::size_t rollouts = 256;
  SgdSettings sgd;
  double posterior_scale = 1.0;
  /// Multiplier on the theoretical confidence radius.
  double beta_scale = 1.0;

  /// Throws ConfigInvalid on out-of-range fields.
  void validate() const;
};

struct FitResult {
  scm::NodeFunction estimate;
  /// Ridge-regularized Gram of the node's feature map (the raw [a, x] inputs for networks).
  Eigen::MatrixXd gram;
  double residual_sse = 0.0;
  int feature_dim = 0;
};

/// Online estimator of one node mechanism.
class NodeModel {
 public:
  /// Throws UnsupportedClass for finite classes and polynomial degrees other than 2.
  static std::unique_ptr<NodeModel> create(const scm::FunctionClass& cls, const AgentConfig& cfg);

  virtual ~NodeModel() = default;

  void add(std::span<const double> x_pa, double a, double y);
  const NodeHistory& history() const { return history_; }

  /// Recomputes the estimate from the history. Networks draw minibatches from rng.
  virtual void refit(Rng& rng) = 0;
  virtual FitResult fit() const = 0;
  virtual scm::NodeFunction center() const = 0;

  /// sum over the history of (g(Z_s) - center(Z_s))^2
  virtual double distance_sq(const scm::NodeFunction& g) const;

  /// One draw from N(center, scale^2 V^-1) in parameter space.
  virtual scm::NodeFunction posterior_sample(double scale, Rng& rng) const = 0;

  /// Offset of length sqrt(radius_sq) in the Gram norm, direction uniform on the sphere.
  virtual Eigen::VectorXd ellipsoid_offset(double radius_sq, Rng& rng) const = 0;
  /// Center moved by `offset` in the parameters ellipsoid_offset perturbs.
  virtual scm::NodeFunction shifted(const Eigen::VectorXd& offset) const = 0;

 protected:
  explicit NodeModel(int arity) { history_.arity = arity; }
  virtual void on_add(std::span<const double> x_pa, double a, double y) = 0;

  NodeHistory history_;
};

/// Least squares fit from scratch; networks are trained from a cold start.
FitResult fit_node(const NodeHistory& history, const scm::FunctionClass& cls, const AgentConfig& cfg);

struct ConfidenceSet {
  const NodeModel* model = nullptr;
  /// beta_t; +inf admits everything.
  double radius_sq = 0.0;
};

bool in_confidence_set(const scm::NodeFunction& candidate, const ConfidenceSet& set);

/// Center followed by k-1 members of the set. Draws that fall outside are
/// shrunk toward the center until they fit.
std::vector<scm::NodeFunction> sample_confidence_candidates(const ConfidenceSet& set, int k, Rng& rng);

}  // namespace gcb::agents
