#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <variant>
#include <vector>

namespace gcb::scm {

/// Leaky ReLU: slope `positive_slope` on x >= 0 and `negative_slope` below.
struct LeakyRelu {
  double positive_slope = 1.0;
  double negative_slope = 0.1;

  double operator()(double x) const { return x >= 0.0 ? positive_slope * x : negative_slope * x; }
  double derivative(double x) const { return x >= 0.0 ? positive_slope : negative_slope; }
  double max_slope() const;
  double min_slope() const;
};

/// f(x; a) = <theta (1 - a) + a theta_bar, x>
struct LinearParams {
  Eigen::VectorXd theta;
  Eigen::VectorXd theta_bar;
};

/// f(x; a) = <theta, [x, a]>^degree
struct PolynomialParams {
  Eigen::VectorXd theta;
  int degree = 2;
};

/// f(x; a) = z' Q z with z = [x, a] and Q symmetric. Lifted form of the
/// degree-2 polynomial (Q = theta theta').
struct QuadraticFormParams {
  Eigen::MatrixXd form;
};

/// f(x; a) = sigma(<outer, sigma(inner [a, x])>); inner is s x (arity + 1).
struct NeuralParams {
  Eigen::MatrixXd inner;
  Eigen::VectorXd outer;
  LeakyRelu activation;
};

/// Column-oriented view of the parent values of M samples: columns[j][m] is
/// the value of the j-th parent in sample m.
struct ParentColumns {
  std::span<const double* const> columns;
  Eigen::Index rows = 0;
};

/// A concrete node mechanism f_i(.; a_i).
class NodeFunction {
 public:
  using Params = std::variant<LinearParams, PolynomialParams, QuadraticFormParams, NeuralParams>;

  NodeFunction() : NodeFunction(LinearParams{}) {}
  explicit NodeFunction(Params params);

  static NodeFunction linear(Eigen::VectorXd theta, Eigen::VectorXd theta_bar);
  static NodeFunction polynomial(Eigen::VectorXd theta, int degree = 2);
  static NodeFunction quadratic_form(Eigen::MatrixXd form);
  static NodeFunction neural(Eigen::MatrixXd inner, Eigen::VectorXd outer, LeakyRelu activation = {});
  /// Zero function of the given arity (linear representation).
  static NodeFunction zero(int arity);

  int arity() const { return arity_; }
  const Params& params() const { return params_; }
  bool is_linear() const { return std::holds_alternative<LinearParams>(params_); }

  /// Throws ArityMismatch if x_pa.size() != arity().
  double evaluate(std::span<const double> x_pa, double a) const;
  double operator()(std::span<const double> x_pa, double a) const { return evaluate(x_pa, a); }

  /// out[m] = f(parents row m; a) for every row.
  void evaluate_batch(const ParentColumns& parents, double a, double* out) const;

 private:
  Params params_;
  int arity_ = 0;
};

enum class ClassKind { Linear, Polynomial, NeuralNet, FiniteEnumerated };

const char* to_string(ClassKind kind);

/// A parametric family F_i with its declared constants.
///
/// `lipschitz_bound` (K_i) defaults to +inf, meaning no norm constraint is
/// enforced on members. `output_bound` is the declared C_i.
struct FunctionClass {
  ClassKind kind = ClassKind::Linear;
  int arity = 0;
  double lipschitz_bound = std::numeric_limits<double>::infinity();
  double output_bound = 1.0;
  int degree = 2;
  /// Polynomial members must satisfy ||theta|| <= param_norm_bound.
  double param_norm_bound = std::numeric_limits<double>::infinity();
  int width = 0;
  LeakyRelu activation;
  std::vector<NodeFunction> members;

  static FunctionClass linear(int arity, double lipschitz = std::numeric_limits<double>::infinity(),
                              double output_bound = 1.0);
  /// `graph_degree` and `system_bound` are d and C of the whole system; they
  /// set the parameter-norm bound K^(1/p) / (p^(1/p) (d C + 1)).
  static FunctionClass polynomial(int arity, int degree = 2,
                                  double lipschitz = std::numeric_limits<double>::infinity(),
                                  double output_bound = 1.0, int graph_degree = 0, double system_bound = 1.0);
  static FunctionClass neural(int arity, int width, LeakyRelu activation = {},
                              double lipschitz = std::numeric_limits<double>::infinity(),
                              double output_bound = 1.0);
  static FunctionClass finite(std::vector<NodeFunction> members, double output_bound = 1.0);

  /// Throws ArityMismatch or NormConstraintViolated when f is not a member.
  void validate(const NodeFunction& f) const;
  /// The member used before any data is seen.
  NodeFunction zero_member() const;
};

/// Upper bound on the Lipschitz constant of f over inputs with ||[x, a]|| <= input_radius.
double lipschitz_estimate(const NodeFunction& f, double input_radius = 1.0);

}  // namespace gcb::scm
