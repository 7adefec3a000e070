#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gcb/errors.hpp"
#include "gcb/graph/dag.hpp"
#include "gcb/scm/scm.hpp"

using namespace gcb;
using namespace gcb::scm;
using graph::Dag;
using graph::NodeId;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

struct LinearSpec {
  Dag dag;
  std::vector<Eigen::VectorXd> theta, theta_bar;
  std::vector<double> noise_mean, noise_sd;
};

Scm build_linear(const LinearSpec& s, InterventionMode mode = InterventionMode::Soft,
                 InterventionSpace space = InterventionSpace::binary()) {
  const int n = s.dag.node_count();
  std::vector<FunctionClass> cls;
  std::vector<NodeFunction> fs;
  std::vector<NoiseModel> noise;
  std::vector<InterventionSpace> spaces;
  for (NodeId v = 1; v <= n; ++v) {
    const auto k = static_cast<std::size_t>(v - 1);
    cls.push_back(FunctionClass::linear(static_cast<int>(s.dag.parents(v).size())));
    fs.push_back(NodeFunction::linear(s.theta[k], s.theta_bar[k]));
    noise.push_back(NoiseModel::gaussian(s.noise_sd[k] * s.noise_sd[k], s.noise_mean[k]));
    spaces.push_back(space);
  }
  return Scm(s.dag, cls, fs, noise, spaces, mode);
}

LinearSpec random_linear(std::mt19937_64& rng, int d, int L, bool zero_mean) {
  LinearSpec s{graph::hierarchical_graph(d, L), {}, {}, {}, {}};
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (NodeId v = 1; v <= s.dag.node_count(); ++v) {
    const auto k = static_cast<Eigen::Index>(s.dag.parents(v).size());
    Eigen::VectorXd t(k), tb(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      t(j) = u(rng);
      tb(j) = u(rng);
    }
    s.theta.push_back(t);
    s.theta_bar.push_back(tb);
    s.noise_mean.push_back(zero_mean ? 0.0 : u(rng));
    s.noise_sd.push_back(0.5 + 0.5 * (u(rng) + 1.0));
  }
  return s;
}

// Exact mean of X_N under a soft linear intervention, by explicit propagation.
double linear_mean_by_hand(const LinearSpec& s, const std::vector<double>& a) {
  std::vector<double> mu(static_cast<std::size_t>(s.dag.node_count()), 0.0);
  for (NodeId v = 1; v <= s.dag.node_count(); ++v) {  // hierarchical ids are already topological
    const auto k = static_cast<std::size_t>(v - 1);
    double m = s.noise_mean[k];
    int j = 0;
    for (NodeId p : s.dag.parents(v)) {
      m += ((1 - a[k]) * s.theta[k](j) + a[k] * s.theta_bar[k](j)) * mu[static_cast<std::size_t>(p - 1)];
      ++j;
    }
    mu[k] = m;
  }
  return mu.back();
}

}  // namespace

TEST(Evaluate, LinearEndpoints) {
  auto f = NodeFunction::linear(vec({1, 0}), vec({0, 1}));
  std::vector<double> x{2, 3};
  EXPECT_DOUBLE_EQ(f.evaluate(x, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(f.evaluate(x, 1.0), 3.0);
  EXPECT_DOUBLE_EQ(f.evaluate(x, 0.25), 0.75 * 2 + 0.25 * 3);
}

TEST(Evaluate, Quadratic) {
  auto f = NodeFunction::polynomial(vec({1, 1, 1}), 2);
  std::vector<double> x{1, 2};
  EXPECT_DOUBLE_EQ(f.evaluate(x, 0.0), 9.0);
  EXPECT_DOUBLE_EQ(f.evaluate(x, 1.0), 16.0);
}

TEST(Evaluate, NeuralLinearActivation) {
  Eigen::MatrixXd inner = Eigen::MatrixXd::Ones(1, 2);
  auto f = NodeFunction::neural(inner, vec({1}), LeakyRelu{1.0, 1.0});
  std::vector<double> x{1};
  EXPECT_DOUBLE_EQ(f.evaluate(x, 0.0), 1.0);
}

TEST(Evaluate, NeuralLeaky) {
  // inner row (a-weight, x-weight) = (1, -2); x = 1, a = 0 -> h = -2 -> 0.1*-2 = -0.2; out = 3*-0.2 -> leaky -0.06
  Eigen::MatrixXd inner(1, 2);
  inner << 1, -2;
  auto f = NodeFunction::neural(inner, vec({3}));
  std::vector<double> x{1};
  EXPECT_NEAR(f.evaluate(x, 0.0), -0.06, 1e-15);
}

TEST(Evaluate, ArityMismatch) {
  auto f = NodeFunction::linear(vec({1, 0}), vec({0, 1}));
  std::vector<double> x{1};
  EXPECT_THROW(f.evaluate(x, 0.0), ArityMismatch);
}

TEST(Evaluate, BatchMatchesScalar) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const int d = 3;
  Eigen::MatrixXd inner(4, d + 1);
  for (Eigen::Index i = 0; i < inner.size(); ++i) inner(i) = g(rng);
  Eigen::MatrixXd q(d + 1, d + 1);
  for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = g(rng);
  std::vector<NodeFunction> fs{
      NodeFunction::linear(vec({0.3, -1, 2}), vec({1, 0.5, -0.25})),
      NodeFunction::polynomial(vec({0.3, -1, 2, 0.7}), 2),
      NodeFunction::polynomial(vec({0.3, -1, 2, 0.7}), 3),
      NodeFunction::quadratic_form(q),
      NodeFunction::neural(inner, vec({1, -1, 0.5, 2})),
  };
  const Eigen::Index m = 17;
  Eigen::MatrixXd x(m, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
  std::vector<const double*> cols{x.col(0).data(), x.col(1).data(), x.col(2).data()};
  for (const auto& f : fs)
    for (double a : {0.0, 0.4, 1.0}) {
      Eigen::VectorXd out(m);
      f.evaluate_batch(ParentColumns{cols, m}, a, out.data());
      for (Eigen::Index r = 0; r < m; ++r) {
        std::vector<double> row{x(r, 0), x(r, 1), x(r, 2)};
        EXPECT_NEAR(out(r), f.evaluate(row, a), 1e-12 * (1 + std::abs(out(r))));
      }
    }
}

TEST(Evaluate, QuadraticFormOfOuterProductEqualsSquare) {
  Eigen::VectorXd t = vec({0.5, -1, 2});
  auto p = NodeFunction::polynomial(t, 2);
  auto q = NodeFunction::quadratic_form(t * t.transpose());
  std::vector<double> x{0.3, 1.7};
  EXPECT_NEAR(p.evaluate(x, 1.0), q.evaluate(x, 1.0), 1e-12);
}

TEST(Lipschitz, Examples) {
  EXPECT_DOUBLE_EQ(lipschitz_estimate(NodeFunction::linear(vec({3, 4}), vec({0, 0}))), 5.0);
  EXPECT_DOUBLE_EQ(lipschitz_estimate(NodeFunction::polynomial(vec({1, 0, 0}), 2), 2.0), 4.0);
  Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(1, 2);
  inner(0, 1) = 1.0;
  EXPECT_DOUBLE_EQ(lipschitz_estimate(NodeFunction::neural(inner, vec({1}), LeakyRelu{1.0, 0.1})), 1.0);
}

TEST(Classes, NormConstraintRejected) {
  auto lin = FunctionClass::linear(2, 1.0);
  EXPECT_NO_THROW(lin.validate(NodeFunction::linear(vec({0.6, 0.8}), vec({0, 0}))));
  EXPECT_THROW(lin.validate(NodeFunction::linear(vec({3, 4}), vec({0, 0}))), NormConstraintViolated);
  EXPECT_THROW(lin.validate(NodeFunction::linear(vec({0, 0}), vec({1, 1}))), NormConstraintViolated);
  EXPECT_THROW(lin.validate(NodeFunction::linear(vec({0}), vec({0}))), ArityMismatch);

  // bound = K^(1/2) / (2^(1/2) (d C + 1)) with K = 8, d = 1, C = 1 -> 2 / 2 = 1
  auto poly = FunctionClass::polynomial(1, 2, 8.0, 1.0, 1, 1.0);
  EXPECT_DOUBLE_EQ(poly.param_norm_bound, 1.0);
  EXPECT_NO_THROW(poly.validate(NodeFunction::polynomial(vec({0.6, 0.8}), 2)));
  EXPECT_THROW(poly.validate(NodeFunction::polynomial(vec({1, 1}), 2)), NormConstraintViolated);

  auto nn = FunctionClass::neural(1, 1, LeakyRelu{}, 0.5);
  Eigen::MatrixXd inner = Eigen::MatrixXd::Ones(1, 2);
  EXPECT_THROW(nn.validate(NodeFunction::neural(inner, vec({1}))), NormConstraintViolated);

  Dag chain = Dag::from_edges(2, {{1, 2}});
  EXPECT_THROW(Scm(chain, {FunctionClass::linear(0), FunctionClass::linear(1, 1.0)},
                   {NodeFunction::zero(0), NodeFunction::linear(vec({2}), vec({0}))},
                   {NoiseModel::zero(), NoiseModel::zero()},
                   {InterventionSpace::binary(), InterventionSpace::binary()}),
               NormConstraintViolated);
}

TEST(Spaces, Membership) {
  auto s = InterventionSpace::interval(11);
  EXPECT_EQ(s.grid().size(), 11u);
  EXPECT_TRUE(s.contains(0.37));
  EXPECT_FALSE(s.contains(1.5));
  EXPECT_THROW(InterventionSpace::interval(1), std::invalid_argument);
  EXPECT_THROW(InterventionSpace::finite({1, 2}), std::invalid_argument);
  EXPECT_TRUE(InterventionSpace::binary().contains(0.0));
  EXPECT_FALSE(InterventionSpace::binary().contains(0.5));
}

TEST(Sample, ZeroChainIsZero) {
  LinearSpec s{Dag::from_edges(3, {{1, 2}, {2, 3}}), {vec({}), vec({0}), vec({0})}, {vec({}), vec({0}), vec({0})},
               {0, 0, 0}, {0, 0, 0}};
  Scm scm = build_linear(s);
  Rng rng(1);
  std::vector<double> a{0, 1, 0};
  auto x = sample_system(scm, a, rng);
  EXPECT_EQ(x, (std::vector<double>{0, 0, 0}));
}

TEST(Sample, DoChain) {
  Dag chain = Dag::from_edges(2, {{1, 2}});
  auto space = InterventionSpace::finite({0, 2});
  Scm scm(chain, {FunctionClass::linear(0), FunctionClass::linear(1)},
          {NodeFunction::zero(0), NodeFunction::linear(vec({0.5}), vec({0.5}))}, {NoiseModel::zero(), NoiseModel::zero()},
          {space, space}, InterventionMode::Do);
  Rng rng(1);
  std::vector<double> a{2, 0};
  EXPECT_EQ(sample_system(scm, a, rng), (std::vector<double>{2, 1}));
  EXPECT_DOUBLE_EQ(expected_reward(scm, a, RewardMethod::analytic(), rng).mean, 1.0);
  auto mc = expected_reward(scm, a, RewardMethod::monte_carlo(10000), rng);
  EXPECT_LE(std::abs(mc.mean - 1.0), 4 * mc.std_error + 1e-12);

  // With unit Gaussian noise on node 2 the mean stays 1 and the SE is ~0.01.
  Scm noisy = scm.with_noise({NoiseModel::zero(), NoiseModel::gaussian(1.0)});
  auto mc2 = expected_reward(noisy, a, RewardMethod::monte_carlo(10000), rng);
  EXPECT_GT(mc2.std_error, 0.005);
  EXPECT_LE(std::abs(mc2.mean - 1.0), 4 * mc2.std_error);
}

TEST(Sample, InvalidIntervention) {
  Dag chain = Dag::from_edges(2, {{1, 2}});
  Scm scm(chain, {FunctionClass::linear(0), FunctionClass::linear(1)}, {NodeFunction::zero(0), NodeFunction::zero(1)},
          {NoiseModel::zero(), NoiseModel::zero()}, {InterventionSpace::binary(), InterventionSpace::binary()});
  Rng rng(1);
  std::vector<double> bad{0.5, 0};
  EXPECT_THROW(sample_system(scm, bad, rng), InvalidIntervention);
  std::vector<double> short_vec{0};
  EXPECT_THROW(sample_system(scm, short_vec, rng), InvalidIntervention);
}

TEST(Sample, Deterministic) {
  std::mt19937_64 g(11);
  Scm scm = build_linear(random_linear(g, 3, 2, false));
  std::vector<double> a(7, 0.0);
  a[2] = 1;
  Rng r1(42), r2(42);
  EXPECT_EQ(sample_system(scm, a, r1), sample_system(scm, a, r2));
}

TEST(Sample, ObservationalEqualsPlainSimulator) {
  std::mt19937_64 g(5);
  for (int trial = 0; trial < 10; ++trial) {
    LinearSpec s = random_linear(g, 2, 3, false);
    Scm scm = build_linear(s);
    std::vector<double> a(static_cast<std::size_t>(scm.node_count()), 0.0);
    Rng r1(100 + trial), r2(100 + trial);
    for (int rep = 0; rep < 20; ++rep) {
      auto x = sample_system(scm, a, r1);
      // plain simulator: X_v = <theta_v, x_pa> + mean + sd z, ids in topological order
      std::vector<double> y(x.size());
      for (NodeId v = 1; v <= s.dag.node_count(); ++v) {
        const auto k = static_cast<std::size_t>(v - 1);
        double z = std::normal_distribution<double>{}(r2);
        double f = 0;
        int j = 0;
        for (NodeId p : s.dag.parents(v)) f += s.theta[k](j++) * y[static_cast<std::size_t>(p - 1)];
        y[k] = f + (s.noise_mean[k] + s.noise_sd[k] * z);
      }
      for (std::size_t k = 0; k < x.size(); ++k) EXPECT_DOUBLE_EQ(x[k], y[k]);
    }
  }
}

TEST(Sample, DoModeHardSetsExactly) {
  std::mt19937_64 g(9);
  LinearSpec s = random_linear(g, 2, 2, false);
  Scm scm = build_linear(s, InterventionMode::Do, InterventionSpace::interval(5));
  Rng rng(3);
  std::uniform_int_distribution<int> pick(0, 4);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> a;
    for (int i = 0; i < scm.node_count(); ++i) a.push_back(0.25 * pick(g));
    auto x = sample_system(scm, a, rng);
    for (std::size_t k = 0; k < a.size(); ++k)
      if (a[k] != 0.0) EXPECT_EQ(x[k], a[k]);
  }
}

TEST(Sample, CausalOrderRespected) {
  std::mt19937_64 g(21);
  LinearSpec s = random_linear(g, 2, 2, false);
  Scm base = build_linear(s);
  for (NodeId j = 1; j <= base.node_count(); ++j) {
    auto fs = base.functions();
    const auto k = static_cast<std::size_t>(j - 1);
    const int arity = fs[k].arity();
    if (arity == 0) continue;
    fs[k] = NodeFunction::linear(Eigen::VectorXd::Constant(arity, 3.0), Eigen::VectorXd::Constant(arity, -2.0));
    Scm changed = base.with_functions(fs);
    std::vector<double> a(static_cast<std::size_t>(base.node_count()), 0.0);
    a[0] = 1;
    Rng r1(8), r2(8);
    for (int rep = 0; rep < 10; ++rep) {
      auto x = sample_system(base, a, r1);
      auto y = sample_system(changed, a, r2);
      for (NodeId i = 1; i <= base.node_count(); ++i) {
        const bool affected = i == j || base.dag().is_ancestor(j, i);
        if (!affected) EXPECT_EQ(x[static_cast<std::size_t>(i - 1)], y[static_cast<std::size_t>(i - 1)]);
      }
      EXPECT_NE(x[k], y[k]);
    }
  }
}

TEST(Reward, LinearChainZeroMean) {
  LinearSpec s{Dag::from_edges(3, {{1, 2}, {2, 3}}), {vec({}), vec({0.7}), vec({-1.2})}, {vec({}), vec({0.1}), vec({2})},
               {0, 0, 0}, {1, 1, 1}};
  Scm scm = build_linear(s);
  Rng rng(1);
  std::vector<double> a{0, 0, 0};
  EXPECT_EQ(expected_reward(scm, a, RewardMethod::analytic(), rng).mean, 0.0);
}

TEST(Reward, AnalyticRejectsNonlinear) {
  Dag chain = Dag::from_edges(2, {{1, 2}});
  Scm scm(chain, {FunctionClass::linear(0), FunctionClass::polynomial(1)},
          {NodeFunction::zero(0), NodeFunction::polynomial(vec({1, 1}))}, {NoiseModel::zero(), NoiseModel::zero()},
          {InterventionSpace::binary(), InterventionSpace::binary()});
  Rng rng(1);
  std::vector<double> a{0, 0};
  EXPECT_THROW(expected_reward(scm, a, RewardMethod::analytic(), rng), AnalyticUnsupported);
  EXPECT_NO_THROW(expected_reward(scm, a, RewardMethod::monte_carlo(10), rng));
}

TEST(Reward, AnalyticMatchesMonteCarloOnRandomInstances) {
  std::mt19937_64 g(1234);
  int within = 0;
  const int trials = 25;
  for (int trial = 0; trial < trials; ++trial) {
    LinearSpec s = random_linear(g, 2, 2, true);
    Scm scm = build_linear(s);
    std::vector<double> a;
    for (int i = 0; i < scm.node_count(); ++i) a.push_back(std::bernoulli_distribution(0.5)(g) ? 1.0 : 0.0);
    Rng rng(static_cast<std::uint64_t>(trial));
    double exact = expected_reward(scm, a, RewardMethod::analytic(), rng).mean;
    EXPECT_NEAR(exact, linear_mean_by_hand(s, a), 1e-12);
    auto mc = expected_reward(scm, a, RewardMethod::monte_carlo(4000), rng);
    if (std::abs(mc.mean - exact) <= 4 * mc.std_error) ++within;
  }
  EXPECT_EQ(within, trials);
}

TEST(Reward, AnalyticWithNonzeroMeans) {
  std::mt19937_64 g(77);
  for (int trial = 0; trial < 10; ++trial) {
    LinearSpec s = random_linear(g, 3, 2, false);
    Scm scm = build_linear(s);
    Rng rng(1);
    auto table = reward_table(scm, RewardMethod::analytic(), rng);
    for (std::size_t i = 0; i < table.grid.size(); i += 7)
      EXPECT_NEAR(table.mean[i], linear_mean_by_hand(s, table.grid.arm(i)), 1e-12);
  }
}

TEST(Reward, TableMatchesRepeatedSampling) {
  // A Monte-Carlo table draws its rollouts exactly like repeated sample_system calls.
  std::mt19937_64 g(31);
  LinearSpec s = random_linear(g, 2, 2, false);
  Scm scm = build_linear(s);
  Rng rng(99);
  auto table = reward_table(scm, RewardMethod::monte_carlo(50), rng);
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    Rng r(99);
    auto a = table.grid.arm(i);
    double sum = 0;
    for (int m = 0; m < 50; ++m) sum += sample_system(scm, a, r).back();
    EXPECT_NEAR(table.mean[i], sum / 50, 1e-12);
  }
}

TEST(Reward, ExactMatchesBruteForce) {
  // Root X1 = Bern(0.7 if a1 == 0 else 0.2); X2 = 2 X1^2 noise-free quadratic on (x, a); X3 = X2 + Rademacher.
  Dag chain = Dag::from_edges(3, {{1, 2}, {2, 3}});
  Scm scm(chain, {FunctionClass::linear(0), FunctionClass::polynomial(1), FunctionClass::linear(1)},
          {NodeFunction::zero(0), NodeFunction::polynomial(vec({std::sqrt(2.0), 0.5})),
           NodeFunction::linear(vec({1}), vec({-1}))},
          {NoiseModel::shifted_bernoulli(0.7, 0.2), NoiseModel::zero(), NoiseModel::rademacher()},
          {InterventionSpace::binary(), InterventionSpace::binary(), InterventionSpace::binary()});
  Rng rng(1);
  auto table = reward_table(scm, RewardMethod::exact(), rng);
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    auto a = table.grid.arm(i);
    double p = a[0] == 0 ? 0.7 : 0.2;
    double mean = 0;
    for (int x1 : {0, 1}) {
      double w = x1 ? p : 1 - p;
      double x2 = std::pow(std::sqrt(2.0) * x1 + 0.5 * a[1], 2);
      double x3 = (a[2] == 0 ? 1.0 : -1.0) * x2;  // Rademacher noise has mean 0
      mean += w * x3;
    }
    EXPECT_NEAR(table.mean[i], mean, 1e-12);
  }
}

TEST(Oracle, ShiftedBernoulliRoot) {
  Scm scm(Dag(1, {{}}), {FunctionClass::linear(0)}, {NodeFunction::zero(0)},
          {NoiseModel::shifted_bernoulli(0.6, 0.5)}, {InterventionSpace::binary()});
  Rng rng(1);
  auto best = oracle_best_intervention(scm, RewardMethod::exact(), rng);
  EXPECT_EQ(best.arm, std::vector<double>{0});
  EXPECT_DOUBLE_EQ(best.reward, 0.6);
  auto best_analytic = oracle_best_intervention(scm, RewardMethod::analytic(), rng);
  EXPECT_EQ(best_analytic.arm, std::vector<double>{0});
  EXPECT_DOUBLE_EQ(best_analytic.reward, 0.6);
  auto best_mc = oracle_best_intervention(scm, RewardMethod::monte_carlo(20000), rng);
  EXPECT_EQ(best_mc.arm, std::vector<double>{0});
  EXPECT_NEAR(best_mc.reward, 0.6, 0.02);
}

TEST(Oracle, TiesGoLexicographicallySmallest) {
  Dag g = graph::hierarchical_graph(2, 2);
  std::vector<FunctionClass> cls;
  std::vector<NodeFunction> fs;
  for (NodeId v = 1; v <= g.node_count(); ++v) {
    int k = static_cast<int>(g.parents(v).size());
    cls.push_back(FunctionClass::linear(k));
    fs.push_back(NodeFunction::zero(k));
  }
  Scm scm(g, cls, fs, std::vector<NoiseModel>(5, NoiseModel::zero()),
          std::vector<InterventionSpace>(5, InterventionSpace::interval(3)));
  Rng rng(1);
  auto best = oracle_best_intervention(scm, RewardMethod::monte_carlo(8), rng);
  EXPECT_EQ(best.arm, std::vector<double>(5, 0.0));
}

TEST(Oracle, GridTooLarge) {
  Dag g = graph::hierarchical_graph(3, 2);
  std::vector<FunctionClass> cls;
  std::vector<NodeFunction> fs;
  for (NodeId v = 1; v <= g.node_count(); ++v) {
    int k = static_cast<int>(g.parents(v).size());
    cls.push_back(FunctionClass::linear(k));
    fs.push_back(NodeFunction::zero(k));
  }
  Scm scm(g, cls, fs, std::vector<NoiseModel>(7, NoiseModel::zero()),
          std::vector<InterventionSpace>(7, InterventionSpace::interval(11)));
  Rng rng(1);
  EXPECT_THROW(oracle_best_intervention(scm, RewardMethod::analytic(), rng), GridTooLarge);
  EXPECT_NO_THROW(oracle_best_intervention(scm, RewardMethod::analytic(), rng, 20'000'000));
}

TEST(Grid, IndexRoundTrip) {
  ArmGrid grid({{0, 1}, {0, 0.5, 1}, {0, 2}});
  EXPECT_EQ(grid.size(), 12u);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(grid.index_of(grid.arm(i)), i);
  EXPECT_EQ(grid.arm(1), (std::vector<double>{0, 0, 2}));
  EXPECT_EQ(grid.arm(2), (std::vector<double>{0, 0.5, 0}));
  std::vector<double> off{0, 0.25, 0};
  EXPECT_THROW(grid.index_of(off), InvalidIntervention);
}

TEST(Engine, NodeMeansMatchHand) {
  std::mt19937_64 g(4);
  LinearSpec s = random_linear(g, 2, 2, false);
  Scm scm = build_linear(s);
  auto e = scm.engine();
  std::vector<double> a{1, 0, 0, 1, 0};
  auto means = e.node_means(scm.functions(), NoisePlan::means(scm.node_count()), a);
  EXPECT_NEAR(means(4), linear_mean_by_hand(s, a), 1e-12);
}

TEST(Engine, ClampLimitsOutputs) {
  Dag chain = Dag::from_edges(2, {{1, 2}});
  auto space = InterventionSpace::finite({0, 5});
  Scm scm(chain, {FunctionClass::linear(0), FunctionClass::linear(1, INFINITY, 1.0)},
          {NodeFunction::zero(0), NodeFunction::linear(vec({1}), vec({1}))}, {NoiseModel::zero(), NoiseModel::zero()},
          {space, space}, InterventionMode::Do);
  scm.set_clamp_outputs(true);
  Rng rng(1);
  std::vector<double> a{5, 0};
  EXPECT_DOUBLE_EQ(sample_system(scm, a, rng)[1], 1.0);
  EXPECT_DOUBLE_EQ(expected_reward(scm, a, RewardMethod::analytic(), rng).mean, 1.0);
}
