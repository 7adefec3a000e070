#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gcb/random.hpp"
#include "gcb/scm/function.hpp"

namespace gcb::complexity {

/// An input Z = (x_pa, a) of a node mechanism.
struct Input {
  std::vector<double> x;
  double a = 0.0;
};

/// Values of finitely many functions on finitely many inputs.
class FiniteClassSample {
 public:
  /// values(f, z): row per function, column per input.
  explicit FiniteClassSample(Eigen::MatrixXd values);

  /// Throws ArityMismatch when a function or an input does not match the common arity.
  static FiniteClassSample from_functions(std::span<const scm::NodeFunction> functions, std::vector<Input> inputs);

  Eigen::Index function_count() const { return values_.rows(); }
  Eigen::Index input_count() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<Input>& inputs() const { return inputs_; }

  /// sup over the inputs of |f - g|
  double sup_distance(Eigen::Index f, Eigen::Index g) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<Input> inputs_;
};

/// Soft-form and do-restricted views of one mechanism family under hard
/// interventions. In the soft form an input with a != 0 evaluates to a
/// itself; the restricted class keeps only the a = 0 inputs.
struct DoClassPair {
  FiniteClassSample soft;
  FiniteClassSample restricted;
};

/// `observational_inputs` must all have a = 0; `intervention_values` are
/// the nonzero hard-set values, each paired with every parent vector.
DoClassPair do_class_pair(std::span<const scm::NodeFunction> functions, const std::vector<Input>& observational_inputs,
                          const std::vector<double>& intervention_values);

/// True iff every pair (f, g) with sum over predecessors of (f - g)^2 <= eps^2
/// also has |f(z) - g(z)| <= eps.
bool is_eps_dependent(Eigen::Index z, std::span<const Eigen::Index> predecessors, const FiniteClassSample& sample,
                      double eps);

/// sup |f(z) - g(z)| over pairs whose predecessor sum of squares is <= eps^2.
/// z is eps-independent of the predecessors iff this exceeds eps.
double independence_witness(Eigen::Index z, std::span<const Eigen::Index> predecessors,
                            const FiniteClassSample& sample, double eps);

struct ComplexityReport {
  int eluder_lower_bound = 0;
  int covering_upper_bound = 0;
  double epsilon = 0.0;
  /// Scale at which the reported sequence is independent (>= epsilon).
  double epsilon_used = 0.0;
  double alpha = 0.0;
  bool exhaustive = false;
  int restarts = 0;
  /// Best independent sequence (input indices) and its witness values W_s.
  std::vector<Eigen::Index> sequence;
  std::vector<double> witness;
  /// Indices of the chosen cover centers.
  std::vector<Eigen::Index> centers;
};

enum class EluderScale {
  /// Longest sequence that is eps'-independent for some single eps' >= eps.
  AtLeast,
  /// Longest sequence that is eps-independent at eps itself.
  Exact,
};

struct EluderOptions {
  int restarts = 16;
  /// Exhaustive subset search when the sample has at most this many inputs.
  int exhaustive_cap = 10;
  EluderScale scale = EluderScale::AtLeast;
  /// Greedy search only: most candidate scales tried above eps.
  int max_scales = 32;
};

ComplexityReport eluder_dimension_search(const FiniteClassSample& sample, double eps, const EluderOptions& options,
                                         Rng& rng);

/// Centers are drawn from the sample's own functions; a function is covered
/// when its sup distance to a center is <= alpha. Exact when the sample has at
/// most `exhaustive_cap` functions, greedy otherwise.
ComplexityReport covering_number_greedy(const FiniteClassSample& sample, double alpha, int exhaustive_cap = 12);

/// max(1/T, smallest sup gap between distinct members). Finite classes need
/// `domain` to measure gaps; parametric classes return 1/T.
double alpha_choice(const scm::FunctionClass& cls, int horizon, std::span<const Input> domain = {});

/// 8 ln(cn/delta) + 2 alpha t (8 C + sqrt(8 ln(4 t^2 / delta)))
double beta_radius(double t, double cn, double delta, double alpha, double C);
/// Same radius taking ln(cn), for covering numbers beyond double range.
double beta_radius_log(double t, double log_cn, double delta, double alpha, double C);

/// 1 + min(dim, T) C + 4 sqrt(dim beta_T T)
double b_bound(double dim, double beta_T, double horizon, double C);

struct TheoryOptions {
  /// Bound on the squared input norm; derived from the class when unset.
  std::optional<double> input_norm_sq;
  /// Lipschitz constant used in the formulas; the class bound when unset.
  std::optional<double> lipschitz;
  /// Multiplier on the dimension estimate for the lifted classes.
  double constant = 1.0;
};

struct TheoryEstimate {
  double dim = 0.0;
  double log_cn = 0.0;
  /// Dimension the linear template was applied to.
  double effective_dim = 0.0;
};

/// Closed-form eluder dimension and log covering number estimates for the
/// linear, degree-2 polynomial and network classes. Throws UnsupportedClass
/// for finite classes or when no finite Lipschitz constant is available.
TheoryEstimate theoretical_dim_and_cn(const scm::FunctionClass& cls, int horizon, const TheoryOptions& options = {});

enum class BoundFamily { Linear, Polynomial, NeuralNet, General };

struct BoundInputs {
  BoundFamily family = BoundFamily::Linear;
  double K = 1.0;
  int d = 1;
  int L = 1;
  int N = 2;
  int width = 1;
  /// General family only.
  double dim = 0.0;
  double log_cn = 0.0;
  double constant = 1.0;
};

struct BoundRow {
  int T = 0;
  double upper = 0.0;
  /// NaN when the family has no lower bound.
  double lower = 0.0;
};

/// Regret upper and lower bound curves up to constants, one row per horizon.
/// Horizons below 1 are skipped.
std::vector<BoundRow> regret_bound_curves(const BoundInputs& in, std::span<const int> horizons);

}  // namespace gcb::complexity
