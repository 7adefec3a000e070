#include "gcb/scm/function.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gcb/errors.hpp"

namespace gcb::scm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kNormSlack = 1e-12;

bool exceeds(double value, double bound) {
  return std::isfinite(bound) && value > bound * (1.0 + kNormSlack) + kNormSlack;
}

int arity_of(const NodeFunction::Params& p) {
  return std::visit(Overloaded{
                        [](const LinearParams& q) { return static_cast<int>(q.theta.size()); },
                        [](const PolynomialParams& q) { return static_cast<int>(q.theta.size()) - 1; },
                        [](const QuadraticFormParams& q) { return static_cast<int>(q.form.rows()) - 1; },
                        [](const NeuralParams& q) { return static_cast<int>(q.inner.cols()) - 1; },
                    },
                    p);
}

}  // namespace

double LeakyRelu::max_slope() const { return std::max(std::abs(positive_slope), std::abs(negative_slope)); }
double LeakyRelu::min_slope() const { return std::min(std::abs(positive_slope), std::abs(negative_slope)); }

NodeFunction::NodeFunction(Params params) : params_(std::move(params)) {
  std::visit(Overloaded{
                 [](const LinearParams& q) {
                   if (q.theta.size() != q.theta_bar.size())
                     throw ArityMismatch("linear theta and theta_bar differ in length");
                 },
                 [](const PolynomialParams& q) {
                   if (q.theta.size() < 1) throw ArityMismatch("polynomial theta needs the intervention coordinate");
                   if (q.degree < 1) throw std::invalid_argument("polynomial degree must be >= 1");
                 },
                 [](const QuadraticFormParams& q) {
                   if (q.form.rows() < 1 || q.form.rows() != q.form.cols())
                     throw ArityMismatch("quadratic form must be square and nonempty");
                 },
                 [](const NeuralParams& q) {
                   if (q.inner.cols() < 1) throw ArityMismatch("inner weights need the intervention column");
                   if (q.inner.rows() != q.outer.size()) throw ArityMismatch("inner rows differ from outer length");
                 },
             },
             params_);
  arity_ = arity_of(params_);
}

NodeFunction NodeFunction::linear(Eigen::VectorXd theta, Eigen::VectorXd theta_bar) {
  return NodeFunction(LinearParams{std::move(theta), std::move(theta_bar)});
}

NodeFunction NodeFunction::polynomial(Eigen::VectorXd theta, int degree) {
  return NodeFunction(PolynomialParams{std::move(theta), degree});
}

NodeFunction NodeFunction::quadratic_form(Eigen::MatrixXd form) {
  Eigen::MatrixXd sym = 0.5 * (form + form.transpose());
  return NodeFunction(QuadraticFormParams{std::move(sym)});
}

NodeFunction NodeFunction::neural(Eigen::MatrixXd inner, Eigen::VectorXd outer, LeakyRelu activation) {
  return NodeFunction(NeuralParams{std::move(inner), std::move(outer), activation});
}

NodeFunction NodeFunction::zero(int arity) {
  return linear(Eigen::VectorXd::Zero(arity), Eigen::VectorXd::Zero(arity));
}

double NodeFunction::evaluate(std::span<const double> x, double a) const {
  if (static_cast<int>(x.size()) != arity_)
    throw ArityMismatch("expected " + std::to_string(arity_) + " parent values, got " + std::to_string(x.size()));
  const auto d = static_cast<Eigen::Index>(x.size());
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
  return std::visit(Overloaded{
                        [&](const LinearParams& q) { return ((1.0 - a) * q.theta + a * q.theta_bar).dot(xv); },
                        [&](const PolynomialParams& q) {
                          double s = q.theta.head(d).dot(xv) + q.theta(d) * a;
                          return std::pow(s, q.degree);
                        },
                        [&](const QuadraticFormParams& q) {
                          Eigen::VectorXd z(d + 1);
                          z.head(d) = xv;
                          z(d) = a;
                          return z.dot(q.form * z);
                        },
                        [&](const NeuralParams& q) {
                          Eigen::VectorXd z(d + 1);
                          z(0) = a;
                          z.tail(d) = xv;
                          Eigen::VectorXd h = q.inner * z;
                          double out = 0.0;
                          for (Eigen::Index u = 0; u < h.size(); ++u) out += q.outer(u) * q.activation(h(u));
                          return q.activation(out);
                        },
                    },
                    params_);
}

void NodeFunction::evaluate_batch(const ParentColumns& parents, double a, double* out) const {
  const auto d = static_cast<Eigen::Index>(parents.columns.size());
  if (d != arity_)
    throw ArityMismatch("expected " + std::to_string(arity_) + " parent columns, got " + std::to_string(d));
  const Eigen::Index m = parents.rows;
  Eigen::Map<Eigen::ArrayXd> y(out, m);
  auto col = [&](Eigen::Index j) { return Eigen::Map<const Eigen::ArrayXd>(parents.columns[static_cast<std::size_t>(j)], m); };

  std::visit(Overloaded{
                 [&](const LinearParams& q) {
                   y.setZero();
                   for (Eigen::Index j = 0; j < d; ++j) {
                     double w = (1.0 - a) * q.theta(j) + a * q.theta_bar(j);
                     if (w != 0.0) y += w * col(j);
                   }
                 },
                 [&](const PolynomialParams& q) {
                   y.setConstant(q.theta(d) * a);
                   for (Eigen::Index j = 0; j < d; ++j)
                     if (q.theta(j) != 0.0) y += q.theta(j) * col(j);
                   if (q.degree == 2)
                     y = y.square();
                   else if (q.degree != 1)
                     y = y.pow(static_cast<double>(q.degree));
                 },
                 [&](const QuadraticFormParams& q) {
                   // z' Q z with z = [x, a]; the a-terms fold into per-column weights.
                   y.setConstant(q.form(d, d) * a * a);
                   for (Eigen::Index j = 0; j < d; ++j) {
                     auto cj = col(j);
                     y += (q.form(j, j) * cj + 2.0 * q.form(j, d) * a) * cj;
                     for (Eigen::Index k = j + 1; k < d; ++k) {
                       double w = 2.0 * q.form(j, k);
                       if (w != 0.0) y += w * cj * col(k);
                     }
                   }
                 },
                 [&](const NeuralParams& q) {
                   const double pos = q.activation.positive_slope;
                   const double neg = q.activation.negative_slope;
                   Eigen::ArrayXd h(m);
                   y.setZero();
                   for (Eigen::Index u = 0; u < q.inner.rows(); ++u) {
                     h.setConstant(q.inner(u, 0) * a);
                     for (Eigen::Index j = 0; j < d; ++j)
                       if (q.inner(u, j + 1) != 0.0) h += q.inner(u, j + 1) * col(j);
                     y += q.outer(u) * (h >= 0.0).select(pos * h, neg * h);
                   }
                   y = (y >= 0.0).select(pos * y, neg * y);
                 },
             },
             params_);
}

const char* to_string(ClassKind kind) {
  switch (kind) {
    case ClassKind::Linear:
      return "linear";
    case ClassKind::Polynomial:
      return "polynomial";
    case ClassKind::NeuralNet:
      return "nn";
    case ClassKind::FiniteEnumerated:
      return "finite";
  }
  return "unknown";
}

FunctionClass FunctionClass::linear(int arity, double lipschitz, double output_bound) {
  FunctionClass c;
  c.kind = ClassKind::Linear;
  c.arity = arity;
  c.lipschitz_bound = lipschitz;
  c.output_bound = output_bound;
  return c;
}

FunctionClass FunctionClass::polynomial(int arity, int degree, double lipschitz, double output_bound,
                                        int graph_degree, double system_bound) {
  if (degree < 1) throw std::invalid_argument("polynomial degree must be >= 1");
  FunctionClass c;
  c.kind = ClassKind::Polynomial;
  c.arity = arity;
  c.degree = degree;
  c.lipschitz_bound = lipschitz;
  c.output_bound = output_bound;
  if (std::isfinite(lipschitz)) {
    const double p = degree;
    const double dd = graph_degree > 0 ? graph_degree : arity;
    c.param_norm_bound = std::pow(lipschitz, 1.0 / p) / (std::pow(p, 1.0 / p) * (dd * system_bound + 1.0));
  }
  return c;
}

FunctionClass FunctionClass::neural(int arity, int width, LeakyRelu activation, double lipschitz,
                                    double output_bound) {
  if (width < 1) throw std::invalid_argument("network width must be >= 1");
  FunctionClass c;
  c.kind = ClassKind::NeuralNet;
  c.arity = arity;
  c.width = width;
  c.activation = activation;
  c.lipschitz_bound = lipschitz;
  c.output_bound = output_bound;
  return c;
}

FunctionClass FunctionClass::finite(std::vector<NodeFunction> members, double output_bound) {
  if (members.empty()) throw std::invalid_argument("finite class needs at least one member");
  FunctionClass c;
  c.kind = ClassKind::FiniteEnumerated;
  c.arity = members.front().arity();
  for (const auto& f : members)
    if (f.arity() != c.arity) throw ArityMismatch("finite class members differ in arity");
  c.members = std::move(members);
  c.output_bound = output_bound;
  return c;
}

void FunctionClass::validate(const NodeFunction& f) const {
  if (f.arity() != arity)
    throw ArityMismatch("function arity " + std::to_string(f.arity()) + " differs from class arity " +
                        std::to_string(arity));
  switch (kind) {
    case ClassKind::Linear: {
      const auto* q = std::get_if<LinearParams>(&f.params());
      if (!q) throw NormConstraintViolated("linear class requires linear parameters");
      if (exceeds(q->theta.norm(), lipschitz_bound) || exceeds(q->theta_bar.norm(), lipschitz_bound))
        throw NormConstraintViolated("linear parameter norm exceeds " + std::to_string(lipschitz_bound));
      return;
    }
    case ClassKind::Polynomial: {
      if (const auto* q = std::get_if<PolynomialParams>(&f.params())) {
        if (q->degree != degree) throw NormConstraintViolated("polynomial degree differs from class degree");
        if (exceeds(q->theta.norm(), param_norm_bound))
          throw NormConstraintViolated("polynomial parameter norm exceeds " + std::to_string(param_norm_bound));
        return;
      }
      if (std::holds_alternative<QuadraticFormParams>(f.params()) && degree == 2) return;
      throw NormConstraintViolated("polynomial class requires polynomial parameters");
    }
    case ClassKind::NeuralNet: {
      const auto* q = std::get_if<NeuralParams>(&f.params());
      if (!q) throw NormConstraintViolated("network class requires network parameters");
      if (width > 0 && q->inner.rows() != width) throw ArityMismatch("network width differs from class width");
      if (exceeds(lipschitz_estimate(f), lipschitz_bound))
        throw NormConstraintViolated("network Lipschitz bound exceeds " + std::to_string(lipschitz_bound));
      return;
    }
    case ClassKind::FiniteEnumerated:
      return;
  }
}

NodeFunction FunctionClass::zero_member() const {
  switch (kind) {
    case ClassKind::Polynomial:
      return NodeFunction::polynomial(Eigen::VectorXd::Zero(arity + 1), degree);
    case ClassKind::NeuralNet:
      return NodeFunction::neural(Eigen::MatrixXd::Zero(width, arity + 1), Eigen::VectorXd::Zero(width), activation);
    case ClassKind::FiniteEnumerated:
      return members.front();
    case ClassKind::Linear:
      break;
  }
  return NodeFunction::zero(arity);
}

double lipschitz_estimate(const NodeFunction& f, double input_radius) {
  return std::visit(Overloaded{
                        [](const LinearParams& q) { return std::max(q.theta.norm(), q.theta_bar.norm()); },
                        [&](const PolynomialParams& q) {
                          const double p = q.degree;
                          return p * std::pow(q.theta.norm(), p) * std::pow(input_radius, p - 1.0);
                        },
                        [&](const QuadraticFormParams& q) {
                          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.form, Eigen::EigenvaluesOnly);
                          return 2.0 * es.eigenvalues().cwiseAbs().maxCoeff() * input_radius;
                        },
                        [](const NeuralParams& q) {
                          const double g = q.activation.max_slope();
                          double op = q.inner.size() == 0 ? 0.0 : Eigen::JacobiSVD<Eigen::MatrixXd>(q.inner).singularValues()(0);
                          return g * g * q.outer.norm() * op;
                        },
                    },
                    f.params());
}

}  // namespace gcb::scm
