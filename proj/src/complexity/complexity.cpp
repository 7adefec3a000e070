#include "gcb/complexity/complexity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gcb/errors.hpp"

namespace gcb::complexity {

using Eigen::Index;

FiniteClassSample::FiniteClassSample(Eigen::MatrixXd values) : values_(std::move(values)) {}

FiniteClassSample FiniteClassSample::from_functions(std::span<const scm::NodeFunction> functions,
                                                    std::vector<Input> inputs) {
  if (functions.empty()) throw std::invalid_argument("sample needs at least one function");
  const int arity = functions.front().arity();
  for (const auto& f : functions)
    if (f.arity() != arity) throw ArityMismatch("sampled functions differ in arity");
  for (const auto& z : inputs)
    if (static_cast<int>(z.x.size()) != arity) throw ArityMismatch("input arity differs from function arity");
  Eigen::MatrixXd v(static_cast<Index>(functions.size()), static_cast<Index>(inputs.size()));
  for (Index i = 0; i < v.rows(); ++i)
    for (Index j = 0; j < v.cols(); ++j)
      v(i, j) = functions[static_cast<std::size_t>(i)].evaluate(inputs[static_cast<std::size_t>(j)].x,
                                                                 inputs[static_cast<std::size_t>(j)].a);
  FiniteClassSample s(std::move(v));
  s.inputs_ = std::move(inputs);
  return s;
}

double FiniteClassSample::sup_distance(Index f, Index g) const {
  if (values_.cols() == 0) return 0.0;
  return (values_.row(f) - values_.row(g)).cwiseAbs().maxCoeff();
}

DoClassPair do_class_pair(std::span<const scm::NodeFunction> functions, const std::vector<Input>& observational_inputs,
                          const std::vector<double>& intervention_values) {
  for (const auto& z : observational_inputs)
    if (z.a != 0.0) throw std::invalid_argument("observational inputs must have a = 0");
  FiniteClassSample restricted = FiniteClassSample::from_functions(functions, observational_inputs);

  std::vector<Input> all = observational_inputs;
  for (double a : intervention_values) {
    if (a == 0.0) throw std::invalid_argument("intervention values must be nonzero");
    for (const auto& z : observational_inputs) all.push_back({z.x, a});
  }
  const auto nf = static_cast<Index>(functions.size());
  const auto no = static_cast<Index>(observational_inputs.size());
  Eigen::MatrixXd v(nf, static_cast<Index>(all.size()));
  v.leftCols(no) = restricted.values();
  for (Index j = no; j < v.cols(); ++j) v.col(j).setConstant(all[static_cast<std::size_t>(j)].a);
  return {FiniteClassSample(std::move(v)), std::move(restricted)};
}

namespace {

// Predecessor sum of squared differences for every ordered pair f < g.
struct PairSums {
  std::vector<std::pair<Index, Index>> pairs;
  std::vector<double> sums;
};

PairSums pair_sums(std::span<const Index> predecessors, const FiniteClassSample& sample) {
  PairSums out;
  const Index n = sample.function_count();
  const auto& v = sample.values();
  for (Index f = 0; f < n; ++f)
    for (Index g = f + 1; g < n; ++g) {
      double s = 0.0;
      for (Index m : predecessors) {
        double d = v(f, m) - v(g, m);
        s += d * d;
      }
      out.pairs.emplace_back(f, g);
      out.sums.push_back(s);
    }
  return out;
}

double witness_from(const PairSums& ps, Index z, const FiniteClassSample& sample, double eps) {
  const auto& v = sample.values();
  double w = 0.0;
  for (std::size_t k = 0; k < ps.pairs.size(); ++k)
    if (ps.sums[k] <= eps * eps) w = std::max(w, std::abs(v(ps.pairs[k].first, z) - v(ps.pairs[k].second, z)));
  return w;
}

std::vector<Index> mask_members(std::uint32_t mask) {
  std::vector<Index> out;
  for (Index i = 0; mask; ++i, mask >>= 1)
    if (mask & 1u) out.push_back(i);
  return out;
}

void fill_witness(ComplexityReport& r, const FiniteClassSample& sample, double eps) {
  r.witness.clear();
  for (std::size_t s = 0; s < r.sequence.size(); ++s) {
    std::span<const Index> prefix(r.sequence.data(), s);
    r.witness.push_back(independence_witness(r.sequence[s], prefix, sample, eps));
  }
}

}  // namespace

double independence_witness(Index z, std::span<const Index> predecessors, const FiniteClassSample& sample,
                            double eps) {
  return witness_from(pair_sums(predecessors, sample), z, sample, eps);
}

bool is_eps_dependent(Index z, std::span<const Index> predecessors, const FiniteClassSample& sample, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  return independence_witness(z, predecessors, sample, eps) <= eps;
}

namespace {

// Independence rule at one scale: some pair with predecessor sum within
// `sum_limit` (strictly below when `sum_strict`) differs at z by more than
// `diff_limit` (or by at least it when `diff_inclusive`).
struct Rule {
  double sum_limit = 0.0;
  bool sum_strict = false;
  double diff_limit = 0.0;
  bool diff_inclusive = false;
};

bool independent_under(const PairSums& ps, Index z, const FiniteClassSample& sample, const Rule& rule) {
  const auto& v = sample.values();
  for (std::size_t k = 0; k < ps.pairs.size(); ++k) {
    const double s = ps.sums[k];
    if (rule.sum_strict ? !(s < rule.sum_limit) : !(s <= rule.sum_limit)) continue;
    const double d = std::abs(v(ps.pairs[k].first, z) - v(ps.pairs[k].second, z));
    if (rule.diff_inclusive ? d >= rule.diff_limit : d > rule.diff_limit) return true;
  }
  return false;
}

std::vector<Index> exhaustive_sequence(const FiniteClassSample& sample, const Rule& rule) {
  // Independence only depends on the predecessor set, so the longest sequence
  // is the largest subset reachable by single independent additions.
  const Index n = sample.input_count();
  const std::uint32_t full = 1u << n;
  std::vector<char> reachable(full, 0);
  std::vector<std::uint32_t> from(full, 0);
  std::vector<Index> added(full, -1);
  reachable[0] = 1;
  std::uint32_t best = 0;
  for (std::uint32_t s = 0; s < full; ++s) {
    if (!reachable[s]) continue;
    if (std::popcount(s) > std::popcount(best)) best = s;
    PairSums ps = pair_sums(mask_members(s), sample);
    for (Index z = 0; z < n; ++z) {
      const std::uint32_t next = s | (1u << z);
      if (next == s || reachable[next]) continue;
      if (independent_under(ps, z, sample, rule)) {
        reachable[next] = 1;
        from[next] = s;
        added[next] = z;
      }
    }
  }
  std::vector<Index> seq;
  for (std::uint32_t s = best; s != 0; s = from[s]) seq.push_back(added[s]);
  std::reverse(seq.begin(), seq.end());
  return seq;
}

std::vector<Index> greedy_sequence(const FiniteClassSample& sample, const Rule& rule, int restarts, Rng& rng) {
  const Index n = sample.input_count();
  std::vector<Index> best;
  for (int restart = 0; restart < restarts; ++restart) {
    std::vector<Index> seq;
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    while (true) {
      PairSums ps = pair_sums(seq, sample);
      std::vector<Index> candidates;
      for (Index z = 0; z < n; ++z)
        if (!used[static_cast<std::size_t>(z)] && independent_under(ps, z, sample, rule)) candidates.push_back(z);
      if (candidates.empty()) break;
      Index pick = candidates.front();
      if (restart > 0) pick = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
      seq.push_back(pick);
      used[static_cast<std::size_t>(pick)] = 1;
    }
    if (seq.size() > best.size()) best = std::move(seq);
  }
  return best;
}

// Smallest scale at which every element of `seq` is independent of its prefix
// under the limit rule at breakpoint b (always below b).
double attained_scale(const FiniteClassSample& sample, const std::vector<Index>& seq, double b, double eps) {
  double worst = eps;
  const auto& v = sample.values();
  for (std::size_t s = 0; s < seq.size(); ++s) {
    PairSums ps = pair_sums(std::span<const Index>(seq.data(), s), sample);
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ps.pairs.size(); ++k)
      if (ps.sums[k] < b * b && std::abs(v(ps.pairs[k].first, seq[s]) - v(ps.pairs[k].second, seq[s])) >= b)
        smallest = std::min(smallest, ps.sums[k]);
    worst = std::max(worst, std::sqrt(smallest));
  }
  return worst;
}

}  // namespace

ComplexityReport eluder_dimension_search(const FiniteClassSample& sample, double eps, const EluderOptions& options,
                                         Rng& rng) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  ComplexityReport r;
  r.epsilon = eps;
  r.epsilon_used = eps;
  const Index n = sample.input_count();
  r.exhaustive = n <= options.exhaustive_cap && n <= 20;
  if (!r.exhaustive) r.restarts = std::max(1, options.restarts);
  auto search = [&](const Rule& rule) {
    return r.exhaustive ? exhaustive_sequence(sample, rule) : greedy_sequence(sample, rule, r.restarts, rng);
  };

  if (options.scale == EluderScale::Exact) {
    r.sequence = search(Rule{eps * eps, false, eps, false});
  } else {
    // The sequence length at scale e' only changes where e' crosses a value
    // |f(z) - g(z)|; between two such values it grows with e'. The supremum
    // over e' >= eps is therefore the largest left limit at a difference
    // value above eps.
    std::vector<double> breaks;
    const auto& v = sample.values();
    for (Index f = 0; f < v.rows(); ++f)
      for (Index g = f + 1; g < v.rows(); ++g)
        for (Index z = 0; z < n; ++z) {
          double d = std::abs(v(f, z) - v(g, z));
          if (d > eps) breaks.push_back(d);
        }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    if (!r.exhaustive && static_cast<int>(breaks.size()) > options.max_scales) {
      std::vector<double> kept;
      const std::size_t m = static_cast<std::size_t>(std::max(1, options.max_scales));
      for (std::size_t k = 0; k < m; ++k) kept.push_back(breaks[k * (breaks.size() - 1) / std::max<std::size_t>(1, m - 1)]);
      kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
      breaks = std::move(kept);
    }
    double best_break = 0.0;
    for (double b : breaks) {
      auto seq = search(Rule{b * b, true, b, true});
      if (seq.size() > r.sequence.size()) {
        r.sequence = std::move(seq);
        best_break = b;
      }
    }
    if (!r.sequence.empty()) r.epsilon_used = attained_scale(sample, r.sequence, best_break, eps);
  }
  r.eluder_lower_bound = static_cast<int>(r.sequence.size());
  fill_witness(r, sample, r.epsilon_used);
  return r;
}

ComplexityReport covering_number_greedy(const FiniteClassSample& sample, double alpha, int exhaustive_cap) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  ComplexityReport r;
  r.alpha = alpha;
  const Index n = sample.function_count();
  // ball[c][f]: f within alpha of center c
  std::vector<std::vector<char>> ball(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  for (Index c = 0; c < n; ++c)
    for (Index f = 0; f < n; ++f) ball[static_cast<std::size_t>(c)][static_cast<std::size_t>(f)] = sample.sup_distance(c, f) <= alpha;

  if (n <= exhaustive_cap && n <= 30) {
    r.exhaustive = true;
    std::vector<std::uint32_t> cover(static_cast<std::size_t>(n), 0);
    for (Index c = 0; c < n; ++c)
      for (Index f = 0; f < n; ++f)
        if (ball[static_cast<std::size_t>(c)][static_cast<std::size_t>(f)]) cover[static_cast<std::size_t>(c)] |= 1u << f;
    const std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1u;
    for (Index k = 1; k <= n; ++k) {
      // iterate k-subsets in lexicographic order
      std::vector<Index> idx(static_cast<std::size_t>(k));
      std::iota(idx.begin(), idx.end(), 0);
      while (true) {
        std::uint32_t covered = 0;
        for (Index c : idx) covered |= cover[static_cast<std::size_t>(c)];
        if (covered == all) {
          r.centers = idx;
          r.covering_upper_bound = static_cast<int>(k);
          return r;
        }
        Index i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
    return r;
  }

  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  Index remaining = n;
  while (remaining > 0) {
    Index best = -1, best_gain = -1;
    for (Index c = 0; c < n; ++c) {
      Index gain = 0;
      for (Index f = 0; f < n; ++f)
        gain += (!covered[static_cast<std::size_t>(f)] && ball[static_cast<std::size_t>(c)][static_cast<std::size_t>(f)]);
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    r.centers.push_back(best);
    for (Index f = 0; f < n; ++f)
      if (ball[static_cast<std::size_t>(best)][static_cast<std::size_t>(f)] && !covered[static_cast<std::size_t>(f)]) {
        covered[static_cast<std::size_t>(f)] = 1;
        --remaining;
      }
  }
  r.covering_upper_bound = static_cast<int>(r.centers.size());
  return r;
}

double alpha_choice(const scm::FunctionClass& cls, int horizon, std::span<const Input> domain) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const double floor = 1.0 / horizon;
  if (cls.kind != scm::ClassKind::FiniteEnumerated) return floor;
  if (domain.empty()) throw std::invalid_argument("finite class needs a domain to measure gaps");
  auto sample = FiniteClassSample::from_functions(cls.members, std::vector<Input>(domain.begin(), domain.end()));
  double gap = std::numeric_limits<double>::infinity();
  for (Index f = 0; f < sample.function_count(); ++f)
    for (Index g = f + 1; g < sample.function_count(); ++g) gap = std::min(gap, sample.sup_distance(f, g));
  if (!std::isfinite(gap)) return floor;
  return std::max(floor, gap);
}

double beta_radius_log(double t, double log_cn, double delta, double alpha, double C) {
  if (!(t >= 1.0)) throw std::invalid_argument("round must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidDelta("delta must lie in (0, 1)");
  if (!(alpha >= 0.0) || !(C >= 0.0)) throw std::invalid_argument("alpha and C must be nonnegative");
  return 8.0 * (log_cn - std::log(delta)) + 2.0 * alpha * t * (8.0 * C + std::sqrt(8.0 * std::log(4.0 * t * t / delta)));
}

double beta_radius(double t, double cn, double delta, double alpha, double C) {
  if (!(cn > 0.0)) throw std::invalid_argument("covering number must be positive");
  return beta_radius_log(t, std::log(cn), delta, alpha, C);
}

double b_bound(double dim, double beta_T, double horizon, double C) {
  if (dim < 0 || beta_T < 0 || horizon < 0 || C < 0) throw std::invalid_argument("b_bound arguments must be >= 0");
  return 1.0 + std::min(dim, horizon) * C + 4.0 * std::sqrt(dim * beta_T * horizon);
}

TheoryEstimate theoretical_dim_and_cn(const scm::FunctionClass& cls, int horizon, const TheoryOptions& options) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const double K = options.lipschitz.value_or(cls.lipschitz_bound);
  if (!std::isfinite(K)) throw UnsupportedClass("closed-form estimates need a finite Lipschitz constant");
  const double di = cls.arity;
  const double C = cls.output_bound;
  double D = 0.0;
  double c = 0.0;
  double scale = 1.0;
  switch (cls.kind) {
    case scm::ClassKind::Linear:
      D = di;
      c = options.input_norm_sq.value_or(di * C * C);
      break;
    case scm::ClassKind::Polynomial:
      if (cls.degree != 2) throw UnsupportedClass("closed-form estimates cover degree-2 polynomials only");
      D = (di + 1.0) * (di + 1.0);
      c = options.input_norm_sq.value_or(di * C * C + 1.0);
      scale = options.constant;
      break;
    case scm::ClassKind::NeuralNet: {
      const double r = cls.activation.max_slope() / cls.activation.min_slope();
      D = r * std::max(di + 1.0, static_cast<double>(cls.width));
      c = options.input_norm_sq.value_or(di * C * C + 1.0);
      scale = options.constant;
      break;
    }
    case scm::ClassKind::FiniteEnumerated:
      throw UnsupportedClass("finite classes need the brute-force search");
  }
  const double T = horizon;
  const double cbar = c * (2.0 * K * T) * (2.0 * K * T);
  TheoryEstimate e;
  e.effective_dim = D;
  e.dim = scale * 9.6 * (1.1 + std::log1p(cbar)) * D;
  e.log_cn = 2.0 * D * std::log1p(2.0 * c * K * T);
  return e;
}

std::vector<BoundRow> regret_bound_curves(const BoundInputs& in, std::span<const int> horizons) {
  std::vector<BoundRow> rows;
  const double d = in.d;
  const double L = in.L;
  for (int t : horizons) {
    if (t < 1) continue;
    const double T = t;
    const double lt = std::log(T);
    const double varpi = lt + std::log(static_cast<double>(in.N)) / d;
    BoundRow row;
    row.T = t;
    switch (in.family) {
      case BoundFamily::Linear:
        row.upper = in.K * std::pow(d, L) * std::sqrt(T * lt * varpi);
        row.lower = in.K * std::pow(d, L / 2.0 - 1.0) * std::sqrt(T);
        break;
      case BoundFamily::Polynomial:
        row.upper = in.K * std::pow(d, L + 1.0) * std::sqrt(T * lt * varpi);
        row.lower = in.K * std::sqrt(T);
        break;
      case BoundFamily::NeuralNet:
        row.upper = in.K * std::pow(d, L - 1.0) * std::sqrt(T * lt * in.width * varpi);
        row.lower = in.K * std::pow(d, L / 2.0 - 1.0) * std::sqrt(T);
        break;
      case BoundFamily::General:
        row.upper = in.K * std::pow(d, L - 1.0) *
                    std::sqrt(T * in.dim * (lt + std::log(static_cast<double>(in.N)) + in.log_cn));
        row.lower = std::numeric_limits<double>::quiet_NaN();
        break;
    }
    row.upper *= in.constant;
    if (!std::isnan(row.lower)) row.lower *= in.constant;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gcb::complexity
