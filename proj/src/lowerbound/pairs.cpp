#include "gcb/lowerbound/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gcb/errors.hpp"
#include "gcb/graph/dag.hpp"

namespace gcb::lowerbound {

namespace {

constexpr double kFloorConstant = 0.2 * 0.2 * 0.2 * 0.2 * 0.2 / 8.0;

void check_delta(double delta) {
  if (!(delta >= 0.0 && delta < 0.5)) throw InvalidDelta("delta must lie in [0, 1/2), got " + std::to_string(delta));
}

void check_shape(int d, int L, std::span<const double> level_lipschitz) {
  if (d < 1 || L < 1) throw std::invalid_argument("instance pair needs d >= 1 and L >= 1");
  if (level_lipschitz.size() != static_cast<std::size_t>(L))
    throw std::invalid_argument("expected one Lipschitz constant per level (" + std::to_string(L) + ")");
  for (double k : level_lipschitz)
    if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("level Lipschitz constants must be positive");
}

double product(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 1.0, std::multiplies<>()); }

std::vector<scm::NoiseModel> pair_noise(int n, const scm::NoiseModel& others, double threshold, double delta,
                                        bool favour_low) {
  std::vector<scm::NoiseModel> noise(static_cast<std::size_t>(n), others);
  noise[0] = favour_low ? scm::NoiseModel::shifted_bernoulli(0.5 + delta, 0.5, threshold)
                        : scm::NoiseModel::shifted_bernoulli(0.5, 0.5 + delta, threshold);
  return noise;
}

double noise_bound(const scm::NoiseModel& n) {
  double b = 0.0;
  for (double v : n.support()) b = std::max(b, std::abs(v));
  return b;
}

// Declared output bounds C_i: |f_i| <= Lip(f_i on the input ball) * radius, plus the noise bound.
std::vector<double> propagate_bounds(const graph::Dag& dag, std::span<const scm::NodeFunction> f,
                                     std::span<const scm::NoiseModel> noise) {
  std::vector<double> c(static_cast<std::size_t>(dag.node_count()), 0.0);
  for (graph::NodeId v : dag.topological_order()) {
    const auto k = static_cast<std::size_t>(v - 1);
    double r2 = 1.0;
    for (graph::NodeId p : dag.parents(v)) r2 += c[static_cast<std::size_t>(p - 1)] * c[static_cast<std::size_t>(p - 1)];
    const double r = std::sqrt(r2);
    c[k] = (dag.parents(v).empty() ? 0.0 : scm::lipschitz_estimate(f[k], r) * r) + noise_bound(noise[k]);
  }
  return c;
}

struct Meta {
  PairClass kind;
  double delta;
  int d;
  int L;
  std::vector<double> level;
  int degree = 0;
  int width = 0;
  double nominal_gap = 0.0;
};

// Builds both SCMs, then reads the optimal arms and the realized gap off G1's exact table.
InstancePair assemble(Meta meta, const graph::Dag& dag, std::vector<scm::FunctionClass> classes,
                      std::vector<scm::NodeFunction> functions, const scm::NoiseModel& others,
                      const scm::InterventionSpace& space, double threshold) {
  const int n = dag.node_count();
  auto noise1 = pair_noise(n, others, threshold, meta.delta, true);
  auto noise2 = pair_noise(n, others, threshold, meta.delta, false);
  const auto bounds = propagate_bounds(dag, functions, noise1);
  for (std::size_t k = 0; k < classes.size(); ++k) classes[k].output_bound = bounds[k];
  std::vector<scm::InterventionSpace> spaces(static_cast<std::size_t>(n), space);

  InstancePair pair{.kind = meta.kind,
                    .g1 = scm::Scm(dag, classes, functions, std::move(noise1), spaces),
                    .g2 = scm::Scm(dag, std::move(classes), std::move(functions), std::move(noise2), std::move(spaces)),
                    .delta = meta.delta,
                    .d = meta.d,
                    .L = meta.L,
                    .level_lipschitz = std::move(meta.level),
                    .degree = meta.degree,
                    .width = meta.width,
                    .best_g1 = {},
                    .best_g2 = {},
                    .gap = 0.0,
                    .nominal_gap = meta.nominal_gap};

  Rng unused(0);
  const auto t1 = scm::reward_table(pair.g1, scm::RewardMethod::exact(), unused);
  const auto t2 = scm::reward_table(pair.g2, scm::RewardMethod::exact(), unused);
  pair.best_g1 = t1.grid.arm(t1.best);
  pair.best_g2 = t2.grid.arm(t2.best);
  pair.gap = t1.best_mean() - t1.mean[t1.grid.index_of(pair.best_g2)];
  return pair;
}

}  // namespace

const char* to_string(PairClass k) {
  switch (k) {
    case PairClass::Linear:
      return "linear";
    case PairClass::Polynomial:
      return "poly";
    case PairClass::NeuralNet:
      return "nn";
  }
  return "?";
}

double bernoulli_kl(double p, double q) {
  auto term = [](double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); };
  return term(p, q) + term(1.0 - p, 1.0 - q);
}

double kl_bound(double delta, int T) {
  if (T < 1) throw std::invalid_argument("kl_bound needs T >= 1");
  return -static_cast<double>(T) * std::log1p(-4.0 * delta * delta);
}

double InstancePair::kl_bound(int T) const { return lowerbound::kl_bound(delta, T); }

double linear_gap(int d, int L, double delta, std::span<const double> level_lipschitz) {
  return std::pow(static_cast<double>(d), 0.5 * L - 1.0) * delta * product(level_lipschitz);
}

double nn_gap(int d, int L, double delta, std::span<const double> level_lipschitz) {
  return linear_gap(d, L, delta, level_lipschitz);
}

double poly_beta(int d, int L, int p) {
  const double pl = std::pow(static_cast<double>(p), L);
  const double base = pl * std::pow(static_cast<double>(d), L * (p - 0.5));
  return std::pow(base, -pl - p);
}

double poly_support_value(int d, int depth, int p, double beta) {
  if (depth == 0) return 1.0;
  const double pd = std::pow(static_cast<double>(p), depth);
  const double pd1 = std::pow(static_cast<double>(p), depth - 1);
  return std::pow(beta, (pd - 1.0) / (p - 1.0)) * std::pow(static_cast<double>(d), p * (pd1 - 1.0) / (p - 1.0));
}

double poly_gap(int d, int L, int p, double delta) {
  return poly_support_value(d, L, p, poly_beta(d, L, p)) * delta;
}

double poly_lipschitz_formula(int d, int L, int depth, int p) {
  const double beta = poly_beta(d, L, p);
  return p * std::pow(beta, std::pow(static_cast<double>(p), L)) *
         std::pow(static_cast<double>(d), std::pow(static_cast<double>(p), depth - 1) - p + 0.5);
}

InstancePair build_linear_pair(int d, int L, std::span<const double> level_lipschitz, double delta) {
  check_delta(delta);
  check_shape(d, L, level_lipschitz);
  const auto dag = graph::hierarchical_graph(d, L);
  const auto stats = graph::compute_stats(dag);
  std::vector<scm::FunctionClass> classes;
  std::vector<scm::NodeFunction> functions;
  for (graph::NodeId i = 1; i <= dag.node_count(); ++i) {
    const int di = static_cast<int>(dag.parents(i).size());
    if (di == 0) {
      classes.push_back(scm::FunctionClass::linear(0, 0.0));
      functions.push_back(scm::NodeFunction::zero(0));
      continue;
    }
    const double k = level_lipschitz[static_cast<std::size_t>(stats.depths[static_cast<std::size_t>(i - 1)] - 1)];
    const Eigen::VectorXd theta = Eigen::VectorXd::Constant(di, k / std::sqrt(static_cast<double>(di)));
    const Eigen::VectorXd theta_bar = theta.array() - delta;
    classes.push_back(scm::FunctionClass::linear(di, std::max(theta.norm(), theta_bar.norm())));
    functions.push_back(scm::NodeFunction::linear(theta, theta_bar));
  }
  Meta meta{PairClass::Linear, delta, d, L, {level_lipschitz.begin(), level_lipschitz.end()}};
  meta.nominal_gap = linear_gap(d, L, delta, level_lipschitz);
  return assemble(std::move(meta), dag, std::move(classes), std::move(functions), scm::NoiseModel::rademacher(),
                  scm::InterventionSpace::binary(), 0.0);
}

InstancePair build_poly_pair(int d, int L, int p, double delta, int grid) {
  check_delta(delta);
  if (d < 1 || L < 1) throw std::invalid_argument("instance pair needs d >= 1 and L >= 1");
  if (p < 2) throw std::invalid_argument("polynomial pair needs p >= 2");
  const double beta = poly_beta(d, L, p);
  if (!(beta > 0.0)) throw std::invalid_argument("polynomial pair weight underflows for these d, L, p");
  const auto dag = graph::hierarchical_graph(d, L);

  // Lipschitz constant of beta (sum x)^p over the two-point support of the parents.
  std::vector<double> level(static_cast<std::size_t>(L));
  for (int depth = 1; depth <= L; ++depth) {
    const double parent_sum = depth == 1 ? 1.0 : d * poly_support_value(d, depth - 1, p, beta);
    level[static_cast<std::size_t>(depth - 1)] =
        std::sqrt(static_cast<double>(d)) * beta * p * std::pow(parent_sum, p - 1);
  }

  std::vector<scm::FunctionClass> classes;
  std::vector<scm::NodeFunction> functions;
  const double w = std::pow(beta, 1.0 / p);
  for (graph::NodeId i = 1; i <= dag.node_count(); ++i) {
    const int di = static_cast<int>(dag.parents(i).size());
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(di + 1);
    theta.head(di).setConstant(w);
    classes.push_back(scm::FunctionClass::polynomial(di, p));
    functions.push_back(scm::NodeFunction::polynomial(std::move(theta), p));
  }
  Meta meta{PairClass::Polynomial, delta, d, L, level, p};
  meta.nominal_gap = product(std::span<const double>(level).subspan(1)) * delta;
  return assemble(std::move(meta), dag, std::move(classes), std::move(functions), scm::NoiseModel::zero(),
                  scm::InterventionSpace::interval(grid), 0.5);
}

InstancePair build_nn_pair(int d, int L, int s, double beta_s, double alpha_s, std::span<const double> level_lipschitz,
                           double delta, int grid) {
  check_delta(delta);
  check_shape(d, L, level_lipschitz);
  if (s < 1) throw std::invalid_argument("network pair needs width s >= 1");
  if (!(beta_s > alpha_s && alpha_s > 0.0)) throw InvalidSlopes("network pair needs beta_s > alpha_s > 0");
  const auto dag = graph::hierarchical_graph(d, L);
  const auto stats = graph::compute_stats(dag);
  const scm::LeakyRelu act{beta_s, alpha_s};
  std::vector<scm::FunctionClass> classes;
  std::vector<scm::NodeFunction> functions;
  for (graph::NodeId i = 1; i <= dag.node_count(); ++i) {
    const int di = static_cast<int>(dag.parents(i).size());
    classes.push_back(scm::FunctionClass::neural(di, s, act));
    if (di == 0) {
      functions.push_back(classes.back().zero_member());
      continue;
    }
    const double k = level_lipschitz[static_cast<std::size_t>(stats.depths[static_cast<std::size_t>(i - 1)] - 1)];
    const double w = std::sqrt(k) / (beta_s * std::sqrt(static_cast<double>(s)));
    Eigen::MatrixXd inner = Eigen::MatrixXd::Constant(s, di + 1, w);
    inner.col(0).setZero();  // the intervention input
    functions.push_back(scm::NodeFunction::neural(std::move(inner), Eigen::VectorXd::Constant(s, w), act));
  }
  Meta meta{PairClass::NeuralNet, delta, d, L, {level_lipschitz.begin(), level_lipschitz.end()}, 0, s};
  meta.nominal_gap = nn_gap(d, L, delta, level_lipschitz);
  return assemble(std::move(meta), dag, std::move(classes), std::move(functions), scm::NoiseModel::rademacher(),
                  scm::InterventionSpace::interval(grid), 0.5);
}

RegretFloor regret_floor(const InstancePair& pair, int T) {
  if (T < 5) throw DeltaMismatch("regret floor needs T >= 5, got " + std::to_string(T));
  const double expected = 1.0 / std::sqrt(static_cast<double>(T));
  if (std::abs(pair.delta - expected) > 1e-12 * expected)
    throw DeltaMismatch("regret floor needs delta = 1/sqrt(T) = " + std::to_string(expected) + ", pair has " +
                        std::to_string(pair.delta));
  const double tt = static_cast<double>(T);
  RegretFloor f;
  f.exact = tt / 8.0 * pair.gap * std::pow(1.0 - 4.0 * pair.delta * pair.delta, tt);
  const std::span<const double> levels(pair.level_lipschitz);
  const double k = pair.kind == PairClass::Polynomial ? product(levels.subspan(1))
                                                      : product(levels) * std::pow(pair.d, 0.5 * pair.L - 1.0);
  f.simplified = kFloorConstant * k * std::sqrt(tt);
  return f;
}

double node1_kl(const InstancePair& pair, std::span<const double> a1) {
  const auto& n1 = pair.g1.noise()[0];
  const auto& n2 = pair.g2.noise()[0];
  double kl = 0.0;
  for (double a : a1) kl += bernoulli_kl(n1.success_probability(a), n2.success_probability(a));
  return kl;
}

KlEstimate empirical_node1_kl(const InstancePair& pair, std::span<const double> a1, std::size_t samples, Rng& rng) {
  if (samples < 2) throw std::invalid_argument("empirical KL needs at least two samples per branch");
  const auto& n1 = pair.g1.noise()[0];
  const auto& n2 = pair.g2.noise()[0];
  const double threshold = n1.threshold();
  std::size_t low = 0;
  for (double a : a1) low += a <= threshold ? 1 : 0;
  const std::size_t high = a1.size() - low;

  const double m = static_cast<double>(samples);
  auto rate = [&](const scm::NoiseModel& n, double a) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < samples; ++k) hits += n.sample(rng, a) != 0.0 ? 1 : 0;
    // keep the plug-in estimate off the boundary
    return std::clamp(static_cast<double>(hits) / m, 0.5 / m, 1.0 - 0.5 / m);
  };
  KlEstimate out;
  double var = 0.0;
  for (int branch = 0; branch < 2; ++branch) {
    const std::size_t count = branch == 0 ? low : high;
    if (count == 0) continue;
    const double a = branch == 0 ? threshold : threshold + 1.0;
    const double p = rate(n1, a);
    const double q = rate(n2, a);
    const double dp = std::log(p / q) - std::log((1.0 - p) / (1.0 - q));
    const double dq = -p / q + (1.0 - p) / (1.0 - q);
    const double v = dp * dp * p * (1.0 - p) / m + dq * dq * q * (1.0 - q) / m;
    const double c = static_cast<double>(count);
    out.value += c * bernoulli_kl(p, q);
    var += c * c * v;
  }
  out.std_error = std::sqrt(var);
  return out;
}

StressReport minimax_stress(const AgentFactory& make, const InstancePair& pair, int T, int replicates,
                            std::uint64_t seed) {
  if (T < 1 || replicates < 1) throw std::invalid_argument("stress run needs T >= 1 and replicates >= 1");
  StressReport rep;
  rep.T = T;
  rep.replicates = replicates;
  if (T >= 5 && std::abs(pair.delta - 1.0 / std::sqrt(static_cast<double>(T))) <= 1e-12 / std::sqrt(T))
    rep.floor = regret_floor(pair, T);

  for (int which = 0; which < 2; ++which) {
    const scm::Scm& inst = which == 0 ? pair.g1 : pair.g2;
    Rng unused(0);
    const auto table = scm::reward_table(inst, scm::RewardMethod::exact(), unused);
    std::vector<double> finals;
    for (int r = 0; r < replicates; ++r) {
      const auto rr = static_cast<std::uint32_t>(r);
      const auto tag = static_cast<std::uint32_t>(2 * which);
      Rng env = make_stream(seed, rr, tag, StreamPurpose::Stress);
      Rng agent_rng = make_stream(seed, rr, tag + 1, StreamPurpose::Stress);
      auto agent = make(inst, T);
      double regret = 0.0;
      for (int t = 1; t <= T; ++t) {
        const std::size_t arm = agent->select(t, agent_rng);
        const auto x = scm::sample_system(inst, table.grid.arm(arm), env);
        agent->observe(arm, x);
        regret += table.regret(arm);
      }
      finals.push_back(regret);
    }
    const double n = static_cast<double>(finals.size());
    const double mean = std::accumulate(finals.begin(), finals.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : finals) ss += (v - mean) * (v - mean);
    const double se = finals.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    (which == 0 ? rep.mean_g1 : rep.mean_g2) = mean;
    (which == 0 ? rep.se_g1 : rep.se_g2) = se;
  }
  return rep;
}

}  // namespace gcb::lowerbound
