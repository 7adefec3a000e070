#include "gcb/agents/models.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "gcb/errors.hpp"

namespace gcb::agents {

void NodeHistory::append(std::span<const double> x_pa, double a, double y) {
  if (static_cast<int>(x_pa.size()) != arity) {
    throw ArityMismatch("history append: expected " + std::to_string(arity) + " parent values, got " +
                        std::to_string(x_pa.size()));
  }
  inputs.insert(inputs.end(), x_pa.begin(), x_pa.end());
  actions.push_back(a);
  outputs.push_back(y);
}

void AgentConfig::validate() const {
  if (!(delta < 1.0)) throw ConfigInvalid("agent.delta", "must lie in (0, 1)");
  if (!(ridge > 0.0)) throw ConfigInvalid("agent.ridge", "must be positive");
  if (candidates < 1) throw ConfigInvalid("agent.candidates", "must be at least 1");
  if (rollouts < 1) throw ConfigInvalid("agent.rollouts", "must be at least 1");
  if (sgd.epochs < 1) throw ConfigInvalid("agent.sgd.epochs", "must be at least 1");
  if (!(sgd.step_size > 0.0)) throw ConfigInvalid("agent.sgd.step_size", "must be positive");
  if (sgd.batch_size < 1) throw ConfigInvalid("agent.sgd.batch_size", "must be at least 1");
  if (!(posterior_scale >= 0.0)) throw ConfigInvalid("agent.posterior_scale", "must be >= 0");
  if (!(beta_scale >= 0.0)) throw ConfigInvalid("agent.beta_scale", "must be >= 0");
}

void NodeModel::add(std::span<const double> x_pa, double a, double y) {
  history_.append(x_pa, a, y);
  on_add(x_pa, a, y);
}

double NodeModel::distance_sq(const scm::NodeFunction& g) const {
  const scm::NodeFunction c = center();
  double sum = 0.0;
  for (std::size_t s = 0; s < history_.size(); ++s) {
    const double diff = g.evaluate(history_.x(s), history_.actions[s]) - c.evaluate(history_.x(s), history_.actions[s]);
    sum += diff * diff;
  }
  return sum;
}

namespace {

Eigen::VectorXd standard_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Eigen::VectorXd unit_sphere(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd v = standard_normal(n, rng);
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

// Ridge regression on a fixed feature map: linear features [(1-a) x; a x]
// or all degree-2 monomials of z = [x, a].
class RidgeModel final : public NodeModel {
 public:
  enum class Features { Linear, Quadratic };

  RidgeModel(Features kind, int arity, double ridge)
      : NodeModel(arity), kind_(kind), arity_(arity), ridge_(ridge) {
    dim_ = kind == Features::Linear ? 2 * arity : (arity + 1) * (arity + 2) / 2;
    gram_ = ridge * Eigen::MatrixXd::Identity(dim_, dim_);
    b_ = Eigen::VectorXd::Zero(dim_);
    w_ = Eigen::VectorXd::Zero(dim_);
    llt_.compute(gram_);
    phi_.resize(dim_);
  }

  void refit(Rng&) override {
    llt_.compute(gram_);
    w_ = llt_.solve(b_);
  }

  FitResult fit() const override {
    FitResult r;
    r.estimate = to_function(w_);
    r.gram = gram_;
    r.feature_dim = dim_;
    // sum (y - w'phi)^2 expanded through the accumulated moments
    const Eigen::MatrixXd data_gram = gram_ - ridge_ * Eigen::MatrixXd::Identity(dim_, dim_);
    r.residual_sse = std::max(0.0, yy_ - 2.0 * w_.dot(b_) + w_.dot(data_gram * w_));
    return r;
  }

  scm::NodeFunction center() const override { return to_function(w_); }

  double distance_sq(const scm::NodeFunction& g) const override {
    const auto wg = weights_of(g);
    if (!wg) return NodeModel::distance_sq(g);
    const Eigen::VectorXd diff = *wg - w_;
    const double q = diff.dot(gram_ * diff) - ridge_ * diff.squaredNorm();
    return std::max(0.0, q);
  }

  scm::NodeFunction posterior_sample(double scale, Rng& rng) const override {
    if (dim_ == 0) return center();
    const Eigen::VectorXd xi = standard_normal(dim_, rng);
    return to_function(w_ + scale * llt_.matrixU().solve(xi));
  }

  Eigen::VectorXd ellipsoid_offset(double radius_sq, Rng& rng) const override {
    if (dim_ == 0) return Eigen::VectorXd();
    const Eigen::VectorXd u = unit_sphere(dim_, rng);
    return std::sqrt(radius_sq) * llt_.matrixU().solve(u);
  }

  scm::NodeFunction shifted(const Eigen::VectorXd& offset) const override {
    if (dim_ == 0) return center();
    return to_function(w_ + offset);
  }

 protected:
  void on_add(std::span<const double> x_pa, double a, double y) override {
    features(x_pa, a, phi_);
    gram_.noalias() += phi_ * phi_.transpose();
    b_ += y * phi_;
    yy_ += y * y;
  }

 private:
  void features(std::span<const double> x, double a, Eigen::VectorXd& out) const {
    if (kind_ == Features::Linear) {
      for (int j = 0; j < arity_; ++j) {
        out[j] = (1.0 - a) * x[j];
        out[arity_ + j] = a * x[j];
      }
      return;
    }
    const int m = arity_ + 1;
    auto z = [&](int j) { return j < arity_ ? x[j] : a; };
    int k = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) out[k++] = z(i) * z(j);
    }
  }

  std::optional<Eigen::VectorXd> weights_of(const scm::NodeFunction& g) const {
    if (g.arity() != arity_) return std::nullopt;
    if (kind_ == Features::Linear) {
      const auto* p = std::get_if<scm::LinearParams>(&g.params());
      if (!p) return std::nullopt;
      Eigen::VectorXd w(dim_);
      w << p->theta, p->theta_bar;
      return w;
    }
    Eigen::MatrixXd q;
    if (const auto* p = std::get_if<scm::PolynomialParams>(&g.params()); p && p->degree == 2) {
      q = p->theta * p->theta.transpose();
    } else if (const auto* f = std::get_if<scm::QuadraticFormParams>(&g.params())) {
      q = f->form;
    } else {
      return std::nullopt;
    }
    const int m = arity_ + 1;
    Eigen::VectorXd w(dim_);
    int k = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) w[k++] = i == j ? q(i, i) : q(i, j) + q(j, i);
    }
    return w;
  }

  scm::NodeFunction to_function(const Eigen::VectorXd& w) const {
    if (kind_ == Features::Linear) return scm::NodeFunction::linear(w.head(arity_), w.tail(arity_));
    const int m = arity_ + 1;
    Eigen::MatrixXd q(m, m);
    int k = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        if (i == j) {
          q(i, i) = w[k];
        } else {
          q(i, j) = q(j, i) = 0.5 * w[k];
        }
        ++k;
      }
    }
    return scm::NodeFunction::quadratic_form(std::move(q));
  }

  Features kind_;
  int arity_;
  int dim_ = 0;
  double ridge_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd b_;
  double yy_ = 0.0;
  Eigen::VectorXd w_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd phi_;
};

// Two-layer network sigma(<outer, sigma(inner [a, x])>) trained by minibatch SGD.
class NeuralModel final : public NodeModel {
 public:
  NeuralModel(int arity, int width, scm::LeakyRelu act, const AgentConfig& cfg)
      : NodeModel(arity), arity_(arity), width_(width), act_(act), sgd_(cfg.sgd), ridge_(cfg.ridge) {
    inner_ = Eigen::MatrixXd::Zero(width, arity + 1);
    outer_ = Eigen::VectorXd::Zero(width);
    input_gram_ = ridge_ * Eigen::MatrixXd::Identity(arity + 1, arity + 1);
    input_llt_.compute(input_gram_);
    z_.resize(arity + 1);
  }

  void refit(Rng& rng) override {
    input_llt_.compute(input_gram_);
    hidden_llt_.reset();
    const std::size_t n = history_.size();
    if (n == 0) return;
    if (!initialized_ || !sgd_.warm_start) {
      std::normal_distribution<double> normal;
      const double s_in = 1.0 / std::sqrt(static_cast<double>(arity_ + 1));
      const double s_out = 1.0 / std::sqrt(static_cast<double>(width_));
      for (Eigen::Index i = 0; i < inner_.size(); ++i) inner_.data()[i] = s_in * normal(rng);
      for (Eigen::Index i = 0; i < outer_.size(); ++i) outer_[i] = s_out * normal(rng);
      initialized_ = true;
    }
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    Eigen::MatrixXd g_inner(inner_.rows(), inner_.cols());
    Eigen::VectorXd g_outer(width_);
    Eigen::VectorXd h(width_), hid(width_);
    const double lr = sgd_.step_size / sgd_.batch_size;
    for (int step = 0; step < sgd_.epochs; ++step) {
      g_inner.setZero();
      g_outer.setZero();
      for (int b = 0; b < sgd_.batch_size; ++b) {
        const std::size_t s = pick(rng);
        load_input(s);
        h.noalias() = inner_ * z_;
        for (int k = 0; k < width_; ++k) hid[k] = act_(h[k]);
        const double o = outer_.dot(hid);
        const double r = act_(o) - history_.outputs[s];
        const double d_o = r * act_.derivative(o);
        g_outer += d_o * hid;
        for (int k = 0; k < width_; ++k) {
          g_inner.row(k) += (d_o * outer_[k] * act_.derivative(h[k])) * z_.transpose();
        }
      }
      inner_ -= lr * g_inner;
      outer_ -= lr * g_outer;
      if (!inner_.allFinite() || !outer_.allFinite()) {
        throw NonFiniteLoss("network fit diverged; reduce the SGD step size");
      }
    }
  }

  FitResult fit() const override {
    FitResult r;
    r.estimate = center();
    r.gram = input_gram_;
    r.feature_dim = arity_ + 1;
    double sse = 0.0;
    for (std::size_t s = 0; s < history_.size(); ++s) {
      const double e = r.estimate.evaluate(history_.x(s), history_.actions[s]) - history_.outputs[s];
      sse += e * e;
    }
    r.residual_sse = sse;
    return r;
  }

  scm::NodeFunction center() const override { return scm::NodeFunction::neural(inner_, outer_, act_); }

  // Rows of the first layer drawn with the input-Gram covariance.
  scm::NodeFunction posterior_sample(double scale, Rng& rng) const override {
    Eigen::MatrixXd inner = inner_;
    for (int k = 0; k < width_; ++k) {
      const Eigen::VectorXd xi = standard_normal(arity_ + 1, rng);
      inner.row(k) += scale * input_llt_.matrixU().solve(xi).transpose();
    }
    return scm::NodeFunction::neural(std::move(inner), outer_, act_);
  }

  // Perturbs the output layer along the Gram of the hidden features.
  Eigen::VectorXd ellipsoid_offset(double radius_sq, Rng& rng) const override {
    if (!hidden_llt_) {
      Eigen::MatrixXd gram = ridge_ * Eigen::MatrixXd::Identity(width_, width_);
      Eigen::VectorXd hid(width_);
      for (std::size_t s = 0; s < history_.size(); ++s) {
        hidden(s, hid);
        gram.noalias() += hid * hid.transpose();
      }
      hidden_llt_.emplace(gram);
    }
    const Eigen::VectorXd u = unit_sphere(width_, rng);
    return std::sqrt(radius_sq) * hidden_llt_->matrixU().solve(u);
  }

  scm::NodeFunction shifted(const Eigen::VectorXd& offset) const override {
    return scm::NodeFunction::neural(inner_, outer_ + offset, act_);
  }

 protected:
  void on_add(std::span<const double> x_pa, double a, double) override {
    z_[0] = a;
    for (int j = 0; j < arity_; ++j) z_[j + 1] = x_pa[j];
    input_gram_.noalias() += z_ * z_.transpose();
  }

 private:
  void load_input(std::size_t s) {
    z_[0] = history_.actions[s];
    const auto x = history_.x(s);
    for (int j = 0; j < arity_; ++j) z_[j + 1] = x[j];
  }

  void hidden(std::size_t s, Eigen::VectorXd& out) const {
    const auto x = history_.x(s);
    for (int k = 0; k < width_; ++k) {
      double v = inner_(k, 0) * history_.actions[s];
      for (int j = 0; j < arity_; ++j) v += inner_(k, j + 1) * x[j];
      out[k] = act_(v);
    }
  }

  int arity_;
  int width_;
  scm::LeakyRelu act_;
  SgdSettings sgd_;
  double ridge_;
  bool initialized_ = false;
  Eigen::MatrixXd inner_;
  Eigen::VectorXd outer_;
  Eigen::MatrixXd input_gram_;
  Eigen::LLT<Eigen::MatrixXd> input_llt_;
  mutable std::optional<Eigen::LLT<Eigen::MatrixXd>> hidden_llt_;
  Eigen::VectorXd z_;
};

}  // namespace

std::unique_ptr<NodeModel> NodeModel::create(const scm::FunctionClass& cls, const AgentConfig& cfg) {
  switch (cls.kind) {
    case scm::ClassKind::Linear:
      return std::make_unique<RidgeModel>(RidgeModel::Features::Linear, cls.arity, cfg.ridge);
    case scm::ClassKind::Polynomial:
      if (cls.degree != 2) {
        throw UnsupportedClass("polynomial fits are implemented for degree 2 only, got " +
                               std::to_string(cls.degree));
      }
      return std::make_unique<RidgeModel>(RidgeModel::Features::Quadratic, cls.arity, cfg.ridge);
    case scm::ClassKind::NeuralNet:
      return std::make_unique<NeuralModel>(cls.arity, cls.width, cls.activation, cfg);
    case scm::ClassKind::FiniteEnumerated:
      break;
  }
  throw UnsupportedClass("no estimator for finite classes");
}

FitResult fit_node(const NodeHistory& history, const scm::FunctionClass& cls, const AgentConfig& cfg) {
  auto model = NodeModel::create(cls, cfg);
  for (std::size_t s = 0; s < history.size(); ++s) model->add(history.x(s), history.actions[s], history.outputs[s]);
  if (history.size() == 0) {
    FitResult r = model->fit();
    r.estimate = cls.zero_member();
    return r;
  }
  Rng rng(0x5eed);
  model->refit(rng);
  return model->fit();
}

bool in_confidence_set(const scm::NodeFunction& candidate, const ConfidenceSet& set) {
  if (std::isinf(set.radius_sq)) return true;
  return set.model->distance_sq(candidate) <= set.radius_sq;
}

std::vector<scm::NodeFunction> sample_confidence_candidates(const ConfidenceSet& set, int k, Rng& rng) {
  if (k < 1) throw Error("candidate count must be at least 1");
  if (!std::isfinite(set.radius_sq) || set.radius_sq < 0.0) {
    throw Error("candidate sampling needs a finite, nonnegative radius");
  }
  std::vector<scm::NodeFunction> out;
  out.reserve(static_cast<std::size_t>(k));
  out.push_back(set.model->center());
  for (int c = 1; c < k; ++c) {
    Eigen::VectorXd offset = set.model->ellipsoid_offset(set.radius_sq, rng);
    scm::NodeFunction g = set.model->shifted(offset);
    int halvings = 0;
    while (!in_confidence_set(g, set)) {
      if (++halvings > 60) {
        g = set.model->center();
        break;
      }
      offset *= 0.5;
      g = set.model->shifted(offset);
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace gcb::agents
