#include "gcb/scm/scm.hpp"

#include <cmath>
#include <string>

#include "gcb/errors.hpp"

namespace gcb::scm {

using graph::NodeId;

Scm::Scm(graph::Dag dag, std::vector<FunctionClass> classes, std::vector<NodeFunction> functions,
         std::vector<NoiseModel> noise, std::vector<InterventionSpace> spaces, InterventionMode mode)
    : dag_(std::move(dag)),
      classes_(std::move(classes)),
      functions_(std::move(functions)),
      noise_(std::move(noise)),
      spaces_(std::move(spaces)),
      mode_(mode) {
  const auto n = static_cast<std::size_t>(dag_.node_count());
  if (classes_.size() != n || functions_.size() != n || noise_.size() != n || spaces_.size() != n)
    throw std::invalid_argument("SCM needs one class, function, noise model and space per node");
  for (NodeId i = 1; i <= dag_.node_count(); ++i) {
    const auto k = static_cast<std::size_t>(i - 1);
    const int pa = static_cast<int>(dag_.parents(i).size());
    if (classes_[k].arity != pa)
      throw ArityMismatch("class of node " + std::to_string(i) + " has arity " + std::to_string(classes_[k].arity) +
                          " but the node has " + std::to_string(pa) + " parents");
    classes_[k].validate(functions_[k]);
  }
}

std::vector<double> Scm::output_bounds() const {
  std::vector<double> out;
  out.reserve(classes_.size());
  for (const auto& c : classes_) out.push_back(c.output_bound);
  return out;
}

Scm Scm::with_functions(std::vector<NodeFunction> functions) const {
  Scm s(dag_, classes_, std::move(functions), noise_, spaces_, mode_);
  s.clamp_ = clamp_;
  return s;
}

Scm Scm::with_noise(std::vector<NoiseModel> noise) const {
  Scm s(dag_, classes_, functions_, std::move(noise), spaces_, mode_);
  s.clamp_ = clamp_;
  return s;
}

void Scm::check_intervention(std::span<const double> a) const {
  if (static_cast<int>(a.size()) != node_count())
    throw InvalidIntervention("intervention vector has " + std::to_string(a.size()) + " entries, expected " +
                              std::to_string(node_count()));
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!spaces_[i].contains(a[i]))
      throw InvalidIntervention("value " + std::to_string(a[i]) + " is not admissible at node " +
                                std::to_string(i + 1));
}

ArmGrid Scm::arm_grid(std::size_t cap) const {
  std::vector<std::vector<double>> values;
  values.reserve(spaces_.size());
  for (const auto& s : spaces_) values.push_back(s.grid());
  return ArmGrid(std::move(values), cap);
}

ForwardEngine Scm::engine(std::size_t cap) const {
  ForwardEngine e(dag_, arm_grid(cap), mode_, noise_);
  if (clamp_) e.set_output_clamp(output_bounds());
  return e;
}

std::vector<double> sample_system(const Scm& scm, std::span<const double> a, Rng& rng) {
  scm.check_intervention(a);
  const auto& dag = scm.dag();
  std::vector<double> x(static_cast<std::size_t>(dag.node_count()), 0.0);
  std::vector<double> pa;
  for (NodeId v : dag.topological_order()) {
    const auto k = static_cast<std::size_t>(v - 1);
    const double eps = scm.noise()[k].sample(rng, a[k]);
    if (scm.mode() == InterventionMode::Do && a[k] != 0.0) {
      x[k] = a[k];
      continue;
    }
    pa.clear();
    for (NodeId p : dag.parents(v)) pa.push_back(x[static_cast<std::size_t>(p - 1)]);
    double f = scm.functions()[k].evaluate(pa, a[k]);
    if (scm.clamp_outputs()) {
      const double c = scm.classes()[k].output_bound;
      f = std::min(std::max(f, -c), c);
    }
    x[k] = f + eps;
  }
  return x;
}

NoisePlan make_noise_plan(const Scm& scm, RewardMethod method, Rng& rng) {
  switch (method.kind) {
    case RewardMethod::Kind::Analytic:
      for (NodeId i = 1; i <= scm.node_count(); ++i)
        if (!scm.function(i).is_linear())
          throw AnalyticUnsupported("analytic rewards need linear mechanisms; node " + std::to_string(i) + " is " +
                                    to_string(scm.function_class(i).kind));
      return NoisePlan::means(scm.node_count());
    case RewardMethod::Kind::MonteCarlo:
      return NoisePlan::sampled(scm.noise(), scm.dag().topological_order(), method.rollouts, rng);
    case RewardMethod::Kind::Exact: {
      // Only noise that can reach the reward node needs enumerating.
      const auto& dag = scm.dag();
      std::vector<NodeId> nodes;
      for (NodeId v : dag.topological_order())
        if (v == dag.reward_node() || dag.is_ancestor(v, dag.reward_node())) nodes.push_back(v);
      return NoisePlan::enumerated(scm.noise(), nodes);
    }
  }
  throw std::logic_error("unknown reward method");
}

namespace {

double std_error_of(const NoisePlan& plan, double variance) {
  if (plan.kind != NoisePlan::Kind::Sampled) return 0.0;
  return std::sqrt(variance / static_cast<double>(plan.rollouts()));
}

}  // namespace

RewardEstimate expected_reward(const Scm& scm, std::span<const double> a, RewardMethod method, Rng& rng) {
  scm.check_intervention(a);
  std::vector<std::vector<double>> single;
  for (double v : a) single.push_back({v});
  ForwardEngine e(scm.dag(), ArmGrid(std::move(single)), scm.mode(), scm.noise());
  if (scm.clamp_outputs()) e.set_output_clamp(scm.output_bounds());
  NoisePlan plan = make_noise_plan(scm, method, rng);
  ArmStats s = e.evaluate_all(scm.functions(), plan);
  return {s.mean[0], std_error_of(plan, s.variance[0])};
}

RewardTable reward_table(const Scm& scm, RewardMethod method, Rng& rng, std::size_t cap) {
  ForwardEngine e = scm.engine(cap);
  NoisePlan plan = make_noise_plan(scm, method, rng);
  ArmStats s = e.evaluate_all(scm.functions(), plan);
  RewardTable t;
  t.grid = e.grid();
  t.mean = std::move(s.mean);
  t.std_error.reserve(s.variance.size());
  for (double v : s.variance) t.std_error.push_back(std_error_of(plan, v));
  t.best = argmax_first(t.mean);
  return t;
}

OracleResult oracle_best_intervention(const Scm& scm, RewardMethod method, Rng& rng, std::size_t cap) {
  RewardTable t = reward_table(scm, method, rng, cap);
  return {t.grid.arm(t.best), t.best_mean()};
}

std::size_t argmax_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace gcb::scm
