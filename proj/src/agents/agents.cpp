#include "gcb/agents/agents.hpp"

#include <cmath>
#include <random>

#include "gcb/complexity/complexity.hpp"
#include "gcb/errors.hpp"

namespace gcb::agents {

namespace {

constexpr std::size_t kExactPlanCap = 4096;

std::vector<scm::NoiseModel> agent_noise(const scm::Scm& problem) {
  std::vector<scm::NoiseModel> out;
  out.reserve(problem.noise().size());
  for (const auto& n : problem.noise()) out.push_back(n.agent_view());
  return out;
}

double resolve_delta(const AgentConfig& cfg, int node_count, int horizon) {
  if (cfg.delta > 0.0) return cfg.delta;
  return 1.0 / (static_cast<double>(node_count) * static_cast<double>(horizon));
}

std::vector<double> parent_values(const graph::Dag& dag, graph::NodeId i, std::span<const double> x) {
  std::vector<double> pa;
  for (graph::NodeId p : dag.parents(i)) pa.push_back(x[static_cast<std::size_t>(p - 1)]);
  return pa;
}

// Mechanisms are fitted to X_i minus the known noise mean.
void record(const graph::Dag& dag, scm::InterventionMode mode, std::span<const scm::NoiseModel> noise,
            std::span<const double> a, std::span<const double> x, std::vector<std::unique_ptr<NodeModel>>& models) {
  for (graph::NodeId i = 1; i <= dag.node_count(); ++i) {
    const auto k = static_cast<std::size_t>(i - 1);
    // A hard-set node reveals nothing about its mechanism.
    if (mode == scm::InterventionMode::Do && a[k] != 0.0) continue;
    models[k]->add(parent_values(dag, i, x), a[k], x[k] - noise[k].mean(a[k]));
  }
}

}  // namespace

GcbAgent::GcbAgent(const scm::Scm& problem, int horizon, AgentConfig cfg, Exploration exploration)
    : dag_(problem.dag()),
      mode_(problem.mode()),
      horizon_(horizon),
      cfg_(cfg),
      exploration_(exploration),
      delta_(resolve_delta(cfg, problem.node_count(), horizon)),
      engine_(problem.dag(), problem.arm_grid(), problem.mode(), agent_noise(problem)),
      order_(problem.dag().topological_order()) {
  cfg_.validate();
  if (horizon < 1) throw ConfigInvalid("horizon", "must be at least 1");
  if (problem.clamp_outputs()) engine_.set_output_clamp(problem.output_bounds());
  for (const auto& cls : problem.classes()) {
    models_.push_back(NodeModel::create(cls, cfg_));
    output_bound_.push_back(cls.output_bound);
    try {
      log_cn_.push_back(complexity::theoretical_dim_and_cn(cls, horizon).log_cn);
    } catch (const UnsupportedClass&) {
      log_cn_.push_back(std::nullopt);
    }
  }
  try {
    exact_plan_ = scm::NoisePlan::enumerated(engine_.noise(), engine_.reward_ancestors(), kExactPlanCap);
  } catch (const AnalyticUnsupported&) {
  } catch (const GridTooLarge&) {
  }
}

double GcbAgent::beta(graph::NodeId i, int t) const {
  const auto k = static_cast<std::size_t>(i - 1);
  if (!log_cn_[k]) throw UnsupportedClass("node " + std::to_string(i) + " has no covering estimate for beta_t");
  const double alpha = 1.0 / horizon_;
  return cfg_.beta_scale * complexity::beta_radius_log(t, *log_cn_[k], delta_, alpha, output_bound_[k]);
}

ConfidenceSet GcbAgent::confidence_set(graph::NodeId i, int t) const {
  return {models_[static_cast<std::size_t>(i - 1)].get(), beta(i, t)};
}

scm::NoisePlan GcbAgent::plan_for(bool all_linear, Rng& rng) const {
  if (all_linear) return scm::NoisePlan::means(dag_.node_count());
  if (exact_plan_) return *exact_plan_;
  return scm::NoisePlan::sampled(engine_.noise(), order_, cfg_.rollouts, rng);
}

std::size_t GcbAgent::select(int t, Rng& rng) {
  const int n = dag_.node_count();
  for (auto& m : models_) m->refit(rng);

  if (exploration_ == Exploration::Thompson) {
    last_.clear();
    bool linear = true;
    for (const auto& m : models_) {
      last_.push_back(cfg_.posterior_scale > 0.0 ? m->posterior_sample(cfg_.posterior_scale, rng) : m->center());
      linear = linear && last_.back().is_linear();
    }
    const auto stats = engine_.evaluate_all(last_, plan_for(linear, rng));
    return scm::argmax_first(stats.mean);
  }

  const int k = cfg_.candidates;
  std::vector<std::vector<scm::NodeFunction>> cands(static_cast<std::size_t>(n));
  bool linear = true;
  for (graph::NodeId i = 1; i <= n; ++i) {
    auto& c = cands[static_cast<std::size_t>(i - 1)];
    if (k == 1) {
      c.push_back(models_[static_cast<std::size_t>(i - 1)]->center());
    } else {
      c = sample_confidence_candidates(confidence_set(i, t), k, rng);
    }
    for (const auto& f : c) linear = linear && f.is_linear();
  }
  const scm::NoisePlan plan = plan_for(linear, rng);

  const std::size_t arms = engine_.grid().size();
  std::vector<double> best(arms);
  std::vector<int> who(arms, 0);
  std::vector<scm::NodeFunction> fvec(static_cast<std::size_t>(n));
  for (int c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < fvec.size(); ++i) fvec[i] = cands[i][static_cast<std::size_t>(c)];
    const auto stats = engine_.evaluate_all(fvec, plan);
    for (std::size_t a = 0; a < arms; ++a) {
      if (c == 0 || stats.mean[a] > best[a]) {
        best[a] = stats.mean[a];
        who[a] = c;
      }
    }
  }
  const std::size_t arm = scm::argmax_first(best);
  last_.clear();
  for (const auto& c : cands) last_.push_back(c[static_cast<std::size_t>(who[arm])]);
  return arm;
}

void GcbAgent::observe(std::size_t arm, std::span<const double> x) {
  record(dag_, mode_, engine_.noise(), engine_.grid().arm(arm), x, models_);
}

VanillaUcb::VanillaUcb(std::size_t arms, graph::NodeId reward_node)
    : sum_(arms, 0.0), count_(arms, 0.0), reward_node_(reward_node) {}

std::size_t VanillaUcb::select(int t, Rng&) {
  for (std::size_t a = 0; a < count_.size(); ++a)
    if (count_[a] == 0.0) return a;
  std::vector<double> index(count_.size());
  const double log_t = std::log(static_cast<double>(t));
  for (std::size_t a = 0; a < count_.size(); ++a) {
    index[a] = sum_[a] / count_[a] + std::sqrt(2.0 * log_t / count_[a]);
  }
  return scm::argmax_first(index);
}

void VanillaUcb::observe(std::size_t arm, std::span<const double> x) {
  sum_[arm] += x[static_cast<std::size_t>(reward_node_ - 1)];
  count_[arm] += 1.0;
}

LinSemUcb::LinSemUcb(const scm::Scm& problem, int horizon, AgentConfig cfg)
    : dag_(problem.dag()),
      mode_(problem.mode()),
      cfg_(cfg),
      delta_(resolve_delta(cfg, problem.node_count(), horizon)),
      grid_(problem.arm_grid()),
      noise_(agent_noise(problem)),
      order_(problem.dag().topological_order()) {
  cfg_.validate();
  for (graph::NodeId i = 1; i <= dag_.node_count(); ++i) {
    models_.push_back(NodeModel::create(scm::FunctionClass::linear(problem.function_class(i).arity), cfg_));
  }
}

double LinSemUcb::radius_sq(graph::NodeId i, int t) const {
  const auto k = static_cast<std::size_t>(i - 1);
  const double dim = 2.0 * static_cast<double>(dag_.parents(i).size());
  if (dim == 0.0) return 0.0;
  const auto& space_noise = noise_[k];
  const double sigma = std::sqrt(std::max(space_noise.variance(0.0), space_noise.variance(1.0)));
  const double lambda = cfg_.ridge;
  const double root = sigma * std::sqrt(2.0 * std::log(1.0 / delta_) + dim * std::log1p(t / (lambda * dim))) +
                      std::sqrt(lambda);
  return cfg_.beta_scale * root * root;
}

std::size_t LinSemUcb::select(int t, Rng& rng) {
  const int n = dag_.node_count();
  struct NodeState {
    Eigen::VectorXd w;
    Eigen::MatrixXd v_inv;
    double radius = 0.0;
  };
  std::vector<NodeState> st(static_cast<std::size_t>(n));
  for (graph::NodeId i = 1; i <= n; ++i) {
    auto& m = *models_[static_cast<std::size_t>(i - 1)];
    m.refit(rng);
    const FitResult fit = m.fit();
    const auto& p = std::get<scm::LinearParams>(fit.estimate.params());
    auto& s = st[static_cast<std::size_t>(i - 1)];
    s.w.resize(fit.feature_dim);
    s.w << p.theta, p.theta_bar;
    s.v_inv = fit.gram.inverse();
    s.radius = std::sqrt(radius_sq(i, t));
  }

  std::vector<double> ucb(grid_.size());
  std::vector<double> mu(static_cast<std::size_t>(n));
  Eigen::VectorXd phi;
  for (std::size_t arm = 0; arm < grid_.size(); ++arm) {
    const auto a = grid_.arm(arm);
    for (graph::NodeId v : order_) {
      const auto k = static_cast<std::size_t>(v - 1);
      if (mode_ == scm::InterventionMode::Do && a[k] != 0.0) {
        mu[k] = a[k];
        continue;
      }
      const auto pa = dag_.parents(v);
      const auto d = static_cast<Eigen::Index>(pa.size());
      phi.resize(2 * d);
      for (Eigen::Index j = 0; j < d; ++j) {
        const double x = mu[static_cast<std::size_t>(pa[static_cast<std::size_t>(j)] - 1)];
        phi[j] = (1.0 - a[k]) * x;
        phi[d + j] = a[k] * x;
      }
      double value = noise_[k].mean(a[k]);
      if (d > 0) {
        const auto& s = st[k];
        value += s.w.dot(phi) + s.radius * std::sqrt(std::max(0.0, phi.dot(s.v_inv * phi)));
      }
      mu[k] = value;
    }
    ucb[arm] = mu[static_cast<std::size_t>(dag_.reward_node() - 1)];
  }
  return scm::argmax_first(ucb);
}

void LinSemUcb::observe(std::size_t arm, std::span<const double> x) {
  record(dag_, mode_, noise_, grid_.arm(arm), x, models_);
}

std::size_t UniformRandomPolicy::select(int, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, arms_ - 1)(rng);
}

Eigen::MatrixXd compounding_error_probe(const scm::Scm& truth, std::span<const std::size_t> arms,
                                        std::span<const std::vector<scm::NodeFunction>> fbar,
                                        std::size_t rollouts, Rng& rng) {
  if (arms.size() != fbar.size()) throw Error("probe: arm and function traces differ in length");
  const int n = truth.node_count();
  const auto engine = truth.engine();
  const auto order = truth.dag().topological_order();
  bool truth_linear = true;
  for (const auto& f : truth.functions()) truth_linear = truth_linear && f.is_linear();

  Eigen::MatrixXd out(static_cast<Eigen::Index>(arms.size()), n);
  Eigen::VectorXd cum = Eigen::VectorXd::Zero(n);
  for (std::size_t t = 0; t < arms.size(); ++t) {
    bool linear = truth_linear;
    for (const auto& f : fbar[t]) linear = linear && f.is_linear();
    const auto plan = linear ? scm::NoisePlan::means(n) : scm::NoisePlan::sampled(truth.noise(), order, rollouts, rng);
    const auto a = engine.grid().arm(arms[t]);
    const Eigen::VectorXd m_true = engine.node_means(truth.functions(), plan, a);
    const Eigen::VectorXd m_est = engine.node_means(fbar[t], plan, a);
    cum += (m_est - m_true).cwiseAbs();
    out.row(static_cast<Eigen::Index>(t)) = cum.transpose();
  }
  return out;
}

double compounding_error_reference(double b, int d, int depth, std::span<const double> level_lipschitz) {
  double sum = 0.0;
  double prod = 1.0;
  for (int l = 1; l <= depth; ++l) {
    if (l >= 2) prod *= level_lipschitz[static_cast<std::size_t>(l - 1)];
    sum += std::pow(static_cast<double>(d), l - 1) * prod;
  }
  return b * sum;
}

}  // namespace gcb::agents
