// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fail.
// Usage: acceptance [criterion numbers...]   (all when none are given)

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gcb/complexity/complexity.hpp"
#include "gcb/harness/config.hpp"
#include "gcb/harness/experiment.hpp"
#include "gcb/harness/report.hpp"
#include "gcb/lowerbound/pairs.hpp"
#include "gcb/scm/scm.hpp"

using namespace gcb;
using harness::AgentKind;
using harness::ExperimentConfig;
using harness::Family;
using harness::SummaryPoint;
using Eigen::Index;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string f3(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3f", v);
  return b;
}

std::string g(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

// ---- desk-scale regret studies ----

// Shared protocol of criteria 1-4: T = 4000, R = 20, seed 1, 16 agent rollouts.
ExperimentConfig desk(Family family, int d, int L, AgentKind agent) {
  ExperimentConfig c;
  c.scm.family = family;
  c.scm.d = d;
  c.scm.L = L;
  c.agent = agent;
  c.horizon = 4000;
  c.replicates = 20;
  c.seed = 1;
  c.agent_config.rollouts = 16;
  c.agent_config.beta_scale = agent == AgentKind::LinSem ? 0.1 : 1.0;
  if (family == Family::Linear) c.scm.noise_mean = 1.0;
  if (family == Family::NeuralNet) {
    c.scm.interval_space = true;
    c.scm.grid_resolution = 3;
    c.horizon = 1000;
  }
  return c;
}

std::map<std::string, SummaryPoint> g_cache;
std::map<std::string, double> g_seconds;

const SummaryPoint& study(const ExperimentConfig& c) {
  const std::string key = harness::config_hash(c) + "/" + std::to_string(c.seed);
  auto it = g_cache.find(key);
  if (it != g_cache.end()) return it->second;
  const auto t0 = std::chrono::steady_clock::now();
  const auto traces = harness::run_replicates(c);
  g_seconds[key] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return g_cache.emplace(key, harness::summarize(c, traces)).first->second;
}

double seconds_of(const ExperimentConfig& c) {
  return g_seconds[harness::config_hash(c) + "/" + std::to_string(c.seed)];
}

std::string show(const SummaryPoint& s) { return g(s.mean_final) + "+-" + g(s.se_final); }

Outcome criterion1() {
  Outcome o;
  const auto c = desk(Family::Quadratic, 3, 2, AgentKind::GcbTs);
  const auto& s = study(c);
  o.require(s.slope >= 0.40 && s.slope <= 0.75, "slope in [0.40, 0.75]");
  o.require(seconds_of(c) < 300.0, "runtime < 5 min");
  o.note("gcb-ts quadratic d=3 L=2 T=4000 R=20: slope " + f3(s.slope) + ", R(T) " + show(s) + ", " +
         f3(seconds_of(c)) + " s");
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto& ts = study(desk(Family::Quadratic, 3, 2, AgentKind::GcbTs));
  for (AgentKind k : {AgentKind::Ucb, AgentKind::LinSem}) {
    const auto& s = study(desk(Family::Quadratic, 3, 2, k));
    const std::string name = harness::to_string(k);
    o.require(s.slope >= 0.85, name + " slope >= 0.85");
    o.require(s.mean_final >= 2.0 * ts.mean_final, name + " R(T) >= 2x gcb-ts");
    o.note(name + " slope " + f3(s.slope) + ", R(T) " + show(s) + " (" + f3(s.mean_final / ts.mean_final) + "x)");
  }
  o.note("gcb-ts R(T) " + show(ts));
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto& ts = study(desk(Family::Linear, 3, 2, AgentKind::GcbTs));
  const auto& lin = study(desk(Family::Linear, 3, 2, AgentKind::LinSem));
  o.require(lin.mean_final <= ts.mean_final, "linsem <= gcb-ts");
  o.require(ts.mean_final <= 1.8 * lin.mean_final, "gcb-ts <= 1.8x linsem");
  o.note("linear d=3 L=2: linsem " + show(lin) + ", gcb-ts " + show(ts) + " (ratio " +
         f3(ts.mean_final / lin.mean_final) + ")");
  return o;
}

Outcome criterion4() {
  Outcome o;
  for (Family fam : {Family::Quadratic, Family::NeuralNet}) {
    const auto& d2l1 = study(desk(fam, 2, 1, AgentKind::GcbTs));
    const auto& d2l2 = study(desk(fam, 2, 2, AgentKind::GcbTs));
    const auto& d3l2 = study(desk(fam, 3, 2, AgentKind::GcbTs));
    auto separated = [&](const SummaryPoint& lo, const SummaryPoint& hi, const std::string& what) {
      const double diff = hi.mean_final - lo.mean_final;
      const double se = std::hypot(lo.se_final, hi.se_final);
      o.require(diff >= 2.0 * se, std::string(harness::to_string(fam)) + " " + what);
      o.note(std::string(harness::to_string(fam)) + " " + what + ": " + show(lo) + " -> " + show(hi) + " (" +
             f3(se > 0 ? diff / se : 0.0) + " SE, T=" + std::to_string(hi.T) + ")");
    };
    separated(d2l1, d2l2, "L 1->2 at d=2");
    separated(d2l2, d3l2, "d 2->3 at L=2");
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  ExperimentConfig c;
  c.scm.family = Family::Linear;
  c.scm.d = 3;
  c.scm.L = 2;
  c.scm.noise_mean = 1.0;
  c.scm.lipschitz = 1.0;
  c.agent = AgentKind::GcbUcb;
  c.agent_config.delta = 0.05;
  c.agent_config.rollouts = 16;
  c.horizon = 200;
  c.replicates = 50;
  c.seed = 1;
  const auto r = harness::coverage_audit(c);
  const double limit = 2 * 0.05 + 3 * r.std_error();
  o.require(r.checks > 0, "some membership checks");
  o.require(r.rate() <= limit, "failure rate <= 2 delta + 3 SE");
  o.note("misses " + std::to_string(r.failures) + "/" + std::to_string(r.checks) + " = " + g(r.rate()) +
         " (limit " + g(limit) + ")");
  return o;
}

// ---- complexity oracles, written from the definitions ----

bool independent(const Eigen::MatrixXd& v, const std::vector<Index>& pred, Index z, double eps) {
  for (Index f = 0; f < v.rows(); ++f)
    for (Index h = 0; h < v.rows(); ++h) {
      double s = 0;
      for (Index m : pred) s += (v(f, m) - v(h, m)) * (v(f, m) - v(h, m));
      if (std::sqrt(s) <= eps && std::abs(v(f, z) - v(h, z)) > eps) return true;
    }
  return false;
}

int eluder_fixed(const Eigen::MatrixXd& v, double eps) {
  int best = 0;
  std::vector<Index> seq;
  std::function<void()> grow = [&] {
    best = std::max(best, static_cast<int>(seq.size()));
    if (static_cast<Index>(seq.size()) > v.cols()) return;
    for (Index z = 0; z < v.cols(); ++z)
      if (independent(v, seq, z, eps)) {
        seq.push_back(z);
        grow();
        seq.pop_back();
      }
  };
  grow();
  return best;
}

// Longest sequence independent at one scale e' >= eps. Independence only
// changes where e' crosses a pair difference or a subset distance, so those
// values and their immediate neighbours cover every case.
int eluder_at_least(const Eigen::MatrixXd& v, double eps) {
  std::set<double> scales{eps};
  for (Index f = 0; f < v.rows(); ++f)
    for (Index h = 0; h < v.rows(); ++h)
      for (std::uint32_t mask = 0; mask < (1u << v.cols()); ++mask) {
        double s = 0;
        for (Index m = 0; m < v.cols(); ++m)
          if ((mask >> m) & 1u) s += (v(f, m) - v(h, m)) * (v(f, m) - v(h, m));
        scales.insert(std::sqrt(s));
        for (Index z = 0; z < v.cols(); ++z) scales.insert(std::abs(v(f, z) - v(h, z)));
      }
  int best = 0;
  for (double c : scales)
    for (double e : {c, std::nextafter(c, 0.0), c * (1 - 1e-9), c * (1 + 1e-9)})
      if (e >= eps) best = std::max(best, eluder_fixed(v, e));
  return best;
}

int covering_exact(const Eigen::MatrixXd& v, double alpha) {
  const Index n = v.rows();
  int best = static_cast<int>(n);
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    if (std::popcount(mask) >= best) continue;
    bool all = true;
    for (Index f = 0; f < n && all; ++f) {
      bool hit = false;
      for (Index c = 0; c < n && !hit; ++c)
        if ((mask >> c) & 1u) hit = v.cols() == 0 || (v.row(f) - v.row(c)).cwiseAbs().maxCoeff() <= alpha;
      all = hit;
    }
    if (all) best = std::popcount(mask);
  }
  return best;
}

// Random finite classes on grids of at most 3 inputs and 12 functions, plus
// members of the parametric families evaluated on small input grids.
std::vector<Eigen::MatrixXd> finite_instances() {
  std::vector<Eigen::MatrixXd> out;
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> q(-4, 4);
  for (Index nf = 1; nf <= 12; ++nf)
    for (Index ni = 1; ni <= 3; ++ni)
      for (int rep = 0; rep < 6; ++rep) {
        Eigen::MatrixXd v(nf, ni);
        for (Index k = 0; k < v.size(); ++k) v(k) = 0.25 * q(gen);
        out.push_back(v);
      }
  std::uniform_real_distribution<double> w(-1, 1);
  const std::vector<complexity::Input> grid{{{0.0}, 0.0}, {{1.0}, 0.0}, {{1.0}, 1.0}};
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<scm::NodeFunction> lin, quad, nn;
    const int nf = 2 + rep;
    for (int k = 0; k < nf; ++k) {
      lin.push_back(scm::NodeFunction::linear(Eigen::VectorXd::Constant(1, w(gen)), Eigen::VectorXd::Constant(1, w(gen))));
      quad.push_back(scm::NodeFunction::polynomial(Eigen::Vector2d(w(gen), w(gen)), 2));
      Eigen::MatrixXd inner(2, 2);
      inner << w(gen), w(gen), w(gen), w(gen);
      nn.push_back(scm::NodeFunction::neural(inner, Eigen::Vector2d(w(gen), w(gen)), {1.0, 0.1}));
    }
    for (const auto* fs : {&lin, &quad, &nn})
      out.push_back(complexity::FiniteClassSample::from_functions(*fs, grid).values());
  }
  return out;
}

Outcome criterion6() {
  Outcome o;
  Rng rng(6);
  int eluder_checks = 0, cover_checks = 0, greedy_checks = 0;
  for (const auto& v : finite_instances()) {
    const complexity::FiniteClassSample sample(v);
    for (double eps : {0.1, 0.25, 0.5, 0.8}) {
      const auto ex = complexity::eluder_dimension_search(sample, eps, {}, rng);
      o.require(ex.exhaustive, "eluder search exhaustive on small grids");
      if (ex.eluder_lower_bound != eluder_at_least(v, eps)) {
        o.require(false, "eluder dimension == brute force");
        return o;
      }
      complexity::EluderOptions fixed;
      fixed.scale = complexity::EluderScale::Exact;
      const auto exf = complexity::eluder_dimension_search(sample, eps, fixed, rng);
      if (exf.eluder_lower_bound != eluder_fixed(v, eps)) {
        o.require(false, "fixed-scale eluder dimension == brute force");
        return o;
      }
      eluder_checks += 2;
      for (auto options : {complexity::EluderOptions{8, 0}, complexity::EluderOptions{1, 0}}) {
        const auto gr = complexity::eluder_dimension_search(sample, eps, options, rng);
        o.require(gr.eluder_lower_bound <= ex.eluder_lower_bound, "greedy eluder <= exhaustive");
        ++greedy_checks;
      }
    }
    for (double alpha : {0.1, 0.25, 0.5, 1.0}) {
      const auto ex = complexity::covering_number_greedy(sample, alpha);
      o.require(ex.exhaustive, "covering search exhaustive on small classes");
      if (ex.covering_upper_bound != covering_exact(v, alpha)) {
        o.require(false, "covering number == brute force");
        return o;
      }
      ++cover_checks;
      // Greedy cover sizes are upper bounds, so they may not fall below the exact count.
      const auto gr = complexity::covering_number_greedy(sample, alpha, 0);
      o.require(gr.covering_upper_bound >= ex.covering_upper_bound, "greedy cover is a valid upper bound");
      ++greedy_checks;
    }
  }
  o.note(std::to_string(eluder_checks) + " eluder and " + std::to_string(cover_checks) +
         " covering values match brute force; " + std::to_string(greedy_checks) + " greedy comparisons hold");
  return o;
}

// ---- closed forms against 50-digit evaluations ----

Outcome criterion7() {
  Outcome o;
  int points = 0;
  double worst = 0.0;
  auto check = [&](const char* what, double got, double want) {
    const double rel = want == 0.0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
    worst = std::max(worst, rel);
    o.require(rel <= 1e-12, std::string(what) + " within 1e-12 (got " + g(got) + ", want " + g(want) + ")");
    ++points;
  };
  struct Beta {
    double t, cn, delta, alpha, C, want;
  };
  for (const auto& r : {Beta{100, 10, 0.1, 0.01, 1, 73.158227250981569764}, Beta{1, 2, 0.5, 0.1, 1, 13.506088481094172259},
                        Beta{50, 1e6, 0.01, 0.02, 2, 200.39153303064665261},
                        Beta{1000, 3.5, 0.2, 0.001, 0.5, 54.091566834599828593},
                        Beta{7, 1, 0.9, 0.5, 0, 46.781128198760137118},
                        Beta{10000, 100, 1e-4, 1e-4, 1, 156.9962700641195263}})
    check("beta_radius", complexity::beta_radius(r.t, r.cn, r.delta, r.alpha, r.C), r.want);
  struct B {
    double dim, beta, T, C, want;
  };
  for (const auto& r : {B{4, 9, 100, 1, 245.0}, B{0, 5, 10, 1, 1.0}, B{2.5, 7.3, 40, 0.7, 110.82404868885036682},
                        B{300, 12, 100, 2, 2601.0}, B{10, 1, 1e4, 3, 1295.9110640673517328},
                        B{7, 3.25, 250, 0.4, 305.46206257996712188}})
    check("b_bound", complexity::b_bound(r.dim, r.beta, r.T, r.C), r.want);
  struct Kl {
    double delta;
    int T;
    double want;
  };
  for (const auto& r : {Kl{0.1, 10, 0.40821994520255134181}, Kl{0.2, 25, 4.3588346786194443462},
                        Kl{0.05, 400, 4.020134341400576922}, Kl{0.3, 3, 1.3388613078852584097},
                        Kl{0.01, 1000, 0.40008002133973539868}, Kl{0.45, 7, 11.625118447751557829}})
    check("kl_bound", lowerbound::kl_bound(r.delta, r.T), r.want);
  struct Lin {
    int d, L;
    double delta;
    std::vector<double> K;
    double want;
  };
  const std::vector<Lin> lin{{4, 2, 0.1, {1, 1}, 0.10000000000000000555},
                             {2, 3, 0.05, {1.3, 0.7, 2}, 0.12869343417595165282},
                             {3, 1, 0.2, {1.5}, 0.17320508075688773897},
                             {1, 2, 0.3, {2, 2}, 1.1999999999999999556},
                             {5, 4, 0.01, {1, 1.1, 0.9, 1.2}, 0.0594000000000000053},
                             {9, 3, 0.25, {0.5, 0.5, 0.5}, 0.09375}};
  for (const auto& r : lin) {
    check("linear gap", lowerbound::linear_gap(r.d, r.L, r.delta, r.K), r.want);
    check("network gap", lowerbound::nn_gap(r.d, r.L, r.delta, r.K), r.want);
  }
  struct Poly {
    int d, L, p;
    double delta, want;
  };
  for (const auto& r : {Poly{1, 1, 2, 0.1, 0.0062500000000000003469}, Poly{2, 1, 2, 0.1, 0.000097656250000000005421},
                        Poly{2, 2, 2, 0.1, 3.2311742677852645343e-28}, Poly{1, 3, 2, 0.05, 3.0385816786431357679e-65},
                        Poly{3, 1, 2, 0.2, 0.000017146776406035666247}, Poly{2, 1, 3, 0.1, 4.1862247085048013298e-9},
                        Poly{1, 2, 3, 0.3, 4.7149902784827976209e-47}})
    check("polynomial gap", lowerbound::poly_gap(r.d, r.L, r.p, r.delta), r.want);
  // The built instances realise those gaps on enumeration.
  check("linear pair enumerated gap", lowerbound::build_linear_pair(4, 2, std::vector<double>{1, 1}, 0.1).gap, 0.1);
  check("polynomial pair enumerated gap", lowerbound::build_poly_pair(1, 1, 2, 0.1).gap, 0.0062500000000000003469);
  o.note(std::to_string(points) + " points, worst relative error " + g(worst));
  return o;
}

// ---- lower-bound instances ----

std::vector<lowerbound::InstancePair> pairs_at(double delta) {
  std::vector<lowerbound::InstancePair> out;
  out.push_back(lowerbound::build_linear_pair(2, 2, std::vector<double>{1, 1}, delta));
  out.push_back(lowerbound::build_linear_pair(4, 2, std::vector<double>{1, 1}, delta));
  out.push_back(lowerbound::build_linear_pair(3, 1, std::vector<double>{1.5}, delta));
  out.push_back(lowerbound::build_poly_pair(1, 2, 2, delta));
  out.push_back(lowerbound::build_poly_pair(2, 1, 2, delta));
  out.push_back(lowerbound::build_nn_pair(2, 2, 1, 1.0, 0.1, std::vector<double>{1, 1}, delta));
  out.push_back(lowerbound::build_nn_pair(2, 1, 2, 1.0, 0.1, std::vector<double>{1}, delta));
  return out;
}

std::string pair_name(const lowerbound::InstancePair& p) {
  return std::string(lowerbound::to_string(p.kind)) + "(d=" + std::to_string(p.d) + ",L=" + std::to_string(p.L) + ")";
}

Outcome criterion8() {
  Outcome o;
  Rng rng(8);
  int optima = 0, kl_checks = 0, floor_checks = 0;
  double worst_kl_margin = -1e300;
  for (int T : {25, 100, 400}) {
    const double delta = 1.0 / std::sqrt(static_cast<double>(T));
    for (const auto& pair : pairs_at(delta)) {
      const std::string name = pair_name(pair) + " T=" + std::to_string(T);
      // Optimal arms by direct enumeration of both instances.
      const std::size_t n = static_cast<std::size_t>(pair.g1.node_count());
      std::vector<double> zeros(n, 0.0), unit(n, 0.0);
      unit[0] = 1.0;
      for (int which = 0; which < 2; ++which) {
        const auto& inst = which == 0 ? pair.g1 : pair.g2;
        const auto table = scm::reward_table(inst, scm::RewardMethod::exact(), rng);
        const auto& stated = which == 0 ? zeros : unit;
        const double top = *std::max_element(table.mean.begin(), table.mean.end());
        const double at = table.mean[table.grid.index_of(stated)];
        o.require(std::abs(top - at) <= 1e-12 * std::max(1.0, std::abs(top)), name + " stated optimum of G" +
                                                                                   std::to_string(which + 1));
        ++optima;
      }
      // Node-1 KL under fixed action sequences.
      std::vector<std::vector<double>> sequences(3);
      std::bernoulli_distribution coin(0.5);
      for (int t = 0; t < T; ++t) {
        sequences[0].push_back(0.0);
        sequences[1].push_back(t % 2 ? 1.0 : 0.0);
        sequences[2].push_back(coin(rng) ? 1.0 : 0.0);
      }
      for (const auto& a1 : sequences) {
        const auto est = lowerbound::empirical_node1_kl(pair, a1, 20000, rng);
        const double limit = pair.kl_bound(T) + 3 * est.std_error;
        o.require(est.value <= limit, name + " empirical KL <= bound + 3 SE");
        worst_kl_margin = std::max(worst_kl_margin, est.value - limit);
        ++kl_checks;
      }
      // Reference policies against the floor.
      const auto best = pair.best_g1;
      const lowerbound::AgentFactory constant = [best](const scm::Scm& inst, int) {
        return std::make_unique<agents::ConstantPolicy>(inst.arm_grid().index_of(best));
      };
      const lowerbound::AgentFactory uniform = [](const scm::Scm& inst, int) {
        return std::make_unique<agents::UniformRandomPolicy>(inst.arm_grid().size());
      };
      for (const auto* make : {&constant, &uniform}) {
        const auto rep = lowerbound::minimax_stress(*make, pair, T, 10, 8);
        o.require(rep.floor.has_value() && rep.max_mean() >= rep.floor->exact,
                  name + (make == &constant ? " constant" : " uniform") + " policy clears the floor");
        ++floor_checks;
      }
    }
  }
  o.note(std::to_string(optima) + " optima, " + std::to_string(kl_checks) + " KL checks (largest excess over limit " +
         g(worst_kl_margin) + "), " + std::to_string(floor_checks) + " floor checks");
  return o;
}

// ---- soft vs do-restricted classes ----

Outcome criterion9() {
  Outcome o;
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n;
  Rng rng(9);
  int checks = 0;
  const std::vector<complexity::Input> obs{{{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, 0}};
  const std::vector<double> hard{0.5, 1.0};
  for (int trial = 0; trial < 24; ++trial) {
    std::vector<scm::NodeFunction> fs;
    const int nf = 2 + trial % 10;
    for (int k = 0; k < nf; ++k) {
      const Eigen::Vector2d th(0.5 * std::round(2 * n(gen)), 0.5 * std::round(2 * n(gen)));
      if (trial % 3 == 0) fs.push_back(scm::NodeFunction::linear(th, Eigen::Vector2d::Zero()));
      if (trial % 3 == 1) fs.push_back(scm::NodeFunction::polynomial(Eigen::Vector3d(th[0], th[1], 0.0), 2));
      if (trial % 3 == 2) {
        Eigen::MatrixXd inner(2, 3);
        inner << 0, th[0], th[1], 0, th[1], -th[0];
        fs.push_back(scm::NodeFunction::neural(inner, Eigen::Vector2d(1.0, 0.5), {1.0, 0.1}));
      }
    }
    // Soft form built here: observational columns, then every hard value on every parent vector.
    const auto restricted = complexity::FiniteClassSample::from_functions(fs, obs);
    Eigen::MatrixXd soft(restricted.function_count(), static_cast<Index>(obs.size() * (1 + hard.size())));
    soft.leftCols(restricted.input_count()) = restricted.values();
    Index col = restricted.input_count();
    for (double a : hard)
      for (std::size_t k = 0; k < obs.size(); ++k) soft.col(col++).setConstant(a);
    const complexity::FiniteClassSample soft_sample(soft);
    complexity::EluderOptions exhaustive;
    exhaustive.exhaustive_cap = 16;
    for (double eps : {0.2, 0.6, 1.1}) {
      const auto es = complexity::eluder_dimension_search(soft_sample, eps, exhaustive, rng);
      const auto er = complexity::eluder_dimension_search(restricted, eps, exhaustive, rng);
      o.require(es.exhaustive && er.exhaustive, "exhaustive eluder search");
      o.require(es.eluder_lower_bound == er.eluder_lower_bound, "equal eluder dimension");
      o.require(er.eluder_lower_bound == eluder_at_least(restricted.values(), eps), "restricted eluder == brute force");
      const auto cs = complexity::covering_number_greedy(soft_sample, eps);
      const auto cr = complexity::covering_number_greedy(restricted, eps);
      o.require(cs.exhaustive && cr.exhaustive, "exhaustive covering search");
      o.require(cs.covering_upper_bound == cr.covering_upper_bound, "equal covering number");
      checks += 2;
    }
  }
  o.note(std::to_string(checks) + " soft/restricted comparisons over linear, quadratic and network classes");
  return o;
}

// ---- determinism ----

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome criterion10() {
  Outcome o;
  const auto root = std::filesystem::temp_directory_path() / "gcb_acceptance_determinism";
  std::filesystem::remove_all(root);
  int runs = 0;
  for (Family fam : {Family::Linear, Family::Quadratic, Family::NeuralNet})
    for (std::uint64_t seed : {1u, 77u}) {
      auto c = desk(fam, 2, 2, AgentKind::GcbTs);
      c.horizon = 60;
      c.replicates = 3;
      c.seed = seed;
      c.plots = false;
      c.out_dir = (root / "a").string();
      harness::run_experiment(c);
      c.out_dir = (root / "b").string();
      c.workers = 2;
      harness::run_experiment(c);
      const auto a = slurp(root / "a" / "traces.csv");
      const auto b = slurp(root / "b" / "traces.csv");
      o.require(!a.empty() && a == b, std::string(harness::to_string(fam)) + " seed " + std::to_string(seed) +
                                          " traces byte-identical");
      ++runs;
    }
  std::filesystem::remove_all(root);
  double worst = 0.0;
  for (double q : {0.3, 0.5, 0.75, 1.0}) {
    std::vector<double> y;
    for (int t = 1; t <= 4000; ++t) y.push_back(2.5 * std::pow(t, q));
    const double est = harness::loglog_slope(y);
    worst = std::max(worst, std::abs(est - q));
    o.require(std::abs(est - q) <= 0.02, "slope recovers q=" + g(q));
  }
  o.note(std::to_string(runs) + " config/seed pairs byte-identical across runs; slope error <= " + g(worst));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"sublinear regret, quadratic SCM", criterion1},
      {"baselines fail on the quadratic SCM", criterion2},
      {"linear SCM ordering", criterion3},
      {"regret grows with d and L", criterion4},
      {"confidence coverage", criterion5},
      {"complexity oracles", criterion6},
      {"closed forms", criterion7},
      {"lower-bound instances", criterion8},
      {"soft vs do-restricted complexity", criterion9},
      {"determinism and slope fitter", criterion10},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
