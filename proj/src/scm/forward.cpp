#include "gcb/scm/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gcb/errors.hpp"

namespace gcb::scm {

using graph::NodeId;

ArmGrid::ArmGrid(std::vector<std::vector<double>> values, std::size_t cap) : values_(std::move(values)) {
  strides_.assign(values_.size(), 1);
  double total = 1.0;
  for (const auto& v : values_) {
    if (v.empty()) throw std::invalid_argument("empty intervention grid");
    total *= static_cast<double>(v.size());
  }
  if (total > static_cast<double>(cap))
    throw GridTooLarge("arm grid has " + std::to_string(total) + " arms, cap is " + std::to_string(cap));
  std::size_t stride = 1;
  for (std::size_t i = values_.size(); i-- > 0;) {
    strides_[i] = stride;
    stride *= values_[i].size();
  }
  size_ = values_.empty() ? 0 : stride;
}

std::vector<std::size_t> ArmGrid::digits(std::size_t index) const {
  std::vector<std::size_t> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    out[i] = index / strides_[i];
    index %= strides_[i];
  }
  return out;
}

std::vector<double> ArmGrid::arm(std::size_t index) const {
  auto dg = digits(index);
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i][dg[i]];
  return out;
}

std::size_t ArmGrid::index_of(std::span<const double> a) const {
  if (a.size() != values_.size()) throw InvalidIntervention("intervention vector has wrong length");
  std::size_t index = 0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    auto it = std::lower_bound(values_[i].begin(), values_[i].end(), a[i]);
    if (it == values_[i].end() || *it != a[i])
      throw InvalidIntervention("value " + std::to_string(a[i]) + " of node " + std::to_string(i + 1) +
                                " is not on the search grid");
    index += static_cast<std::size_t>(it - values_[i].begin()) * strides_[i];
  }
  return index;
}

NoisePlan NoisePlan::means(int node_count) {
  NoisePlan p;
  p.kind = Kind::Mean;
  p.base = Eigen::MatrixXd::Zero(1, node_count);
  return p;
}

NoisePlan NoisePlan::sampled(std::span<const NoiseModel> noise, std::span<const NodeId> order, std::size_t rollouts,
                             Rng& rng) {
  if (rollouts < 1) throw std::invalid_argument("at least one rollout is required");
  NoisePlan p;
  p.kind = Kind::Sampled;
  p.base = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rollouts), static_cast<Eigen::Index>(noise.size()));
  for (Eigen::Index m = 0; m < p.base.rows(); ++m)
    for (NodeId v : order) p.base(m, v - 1) = noise[static_cast<std::size_t>(v - 1)].draw_base(rng);
  return p;
}

NoisePlan NoisePlan::enumerated(std::span<const NoiseModel> noise, std::span<const NodeId> nodes, std::size_t cap) {
  std::vector<std::size_t> sizes;
  double total = 1.0;
  for (NodeId v : nodes) {
    const auto& n = noise[static_cast<std::size_t>(v - 1)];
    if (!n.is_discrete())
      throw AnalyticUnsupported("exact enumeration needs discrete noise; node " + std::to_string(v) + " is Gaussian");
    sizes.push_back(n.support().size());
    total *= static_cast<double>(sizes.back());
  }
  if (total > static_cast<double>(cap)) throw GridTooLarge("noise support too large to enumerate");
  NoisePlan p;
  p.kind = Kind::Enumerated;
  const auto rows = static_cast<Eigen::Index>(total);
  p.base = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(noise.size()));
  for (Eigen::Index m = 0; m < rows; ++m) {
    auto rest = static_cast<std::size_t>(m);
    for (std::size_t k = nodes.size(); k-- > 0;) {
      p.base(m, nodes[k] - 1) = static_cast<double>(rest % sizes[k]);
      rest /= sizes[k];
    }
  }
  return p;
}

namespace {

std::vector<char> ancestors_of(const graph::Dag& dag, NodeId target) {
  std::vector<char> mark(static_cast<std::size_t>(dag.node_count()), 0);
  std::vector<NodeId> stack{target};
  mark[static_cast<std::size_t>(target - 1)] = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId p : dag.parents(v))
      if (!mark[static_cast<std::size_t>(p - 1)]) {
        mark[static_cast<std::size_t>(p - 1)] = 1;
        stack.push_back(p);
      }
  }
  return mark;
}

struct NoiseColumns {
  std::vector<Eigen::ArrayXd> value;  // per grid position
  std::vector<Eigen::ArrayXd> prob;   // per grid position, enumerated plans only
};

NoiseColumns noise_columns(const NoiseModel& n, const NoisePlan& plan, Eigen::Index col,
                           const std::vector<double>& grid) {
  NoiseColumns out;
  const Eigen::Index m = plan.rollouts();
  std::vector<double> support;
  if (plan.kind == NoisePlan::Kind::Enumerated) support = n.support();
  for (double a : grid) {
    Eigen::ArrayXd v(m);
    Eigen::ArrayXd w;
    switch (plan.kind) {
      case NoisePlan::Kind::Mean:
        v.setConstant(n.mean(a));
        break;
      case NoisePlan::Kind::Sampled:
        for (Eigen::Index r = 0; r < m; ++r) v(r) = n.realize(plan.base(r, col), a);
        break;
      case NoisePlan::Kind::Enumerated:
        w.resize(m);
        for (Eigen::Index r = 0; r < m; ++r) {
          auto k = static_cast<std::size_t>(plan.base(r, col));
          v(r) = support[k];
          w(r) = n.probability(k, a);
        }
        break;
    }
    out.value.push_back(std::move(v));
    out.prob.push_back(std::move(w));
  }
  return out;
}

}  // namespace

ForwardEngine::ForwardEngine(const graph::Dag& dag, ArmGrid grid, InterventionMode mode, std::vector<NoiseModel> noise)
    : dag_(dag), grid_(std::move(grid)), mode_(mode), noise_(std::move(noise)) {
  if (grid_.node_count() != dag_.node_count() || static_cast<int>(noise_.size()) != dag_.node_count())
    throw std::invalid_argument("grid and noise must cover every node");
  auto mark = ancestors_of(dag_, dag_.reward_node());
  for (NodeId v : dag_.topological_order()) (mark[static_cast<std::size_t>(v - 1)] ? relevant_ : irrelevant_).push_back(v);
}

namespace {

class Walk {
 public:
  Walk(const graph::Dag& dag, const ArmGrid& grid, InterventionMode mode, const std::vector<NoiseModel>& noise,
       const std::vector<double>& clamp, const std::vector<NodeId>& relevant, const std::vector<NodeId>& irrelevant,
       std::span<const NodeFunction> fs, const NoisePlan& plan)
      : dag_(dag), grid_(grid), mode_(mode), clamp_(clamp), relevant_(relevant), irrelevant_(irrelevant), fs_(fs),
        plan_(plan) {
    const Eigen::Index m = plan.rollouts();
    const int n = dag.node_count();
    x_ = Eigen::MatrixXd::Zero(m, n);
    if (plan.kind == NoisePlan::Kind::Enumerated) {
      w_ = Eigen::MatrixXd::Ones(m, static_cast<Eigen::Index>(relevant.size()) + 1);
    }
    cols_.resize(static_cast<std::size_t>(n));
    parents_.resize(static_cast<std::size_t>(n));
    for (NodeId v : relevant) {
      cols_[static_cast<std::size_t>(v - 1)] =
          noise_columns(noise[static_cast<std::size_t>(v - 1)], plan, v - 1, grid.values(v));
      for (NodeId p : dag.parents(v)) parents_[static_cast<std::size_t>(v - 1)].push_back(x_.col(p - 1).data());
      if (fs[static_cast<std::size_t>(v - 1)].arity() != static_cast<int>(dag.parents(v).size()))
        throw ArityMismatch("function of node " + std::to_string(v) + " has wrong arity");
    }
    stats_.mean.assign(grid.size(), 0.0);
    stats_.variance.assign(grid.size(), 0.0);
  }

  ArmStats run() {
    descend(0, 0);
    return std::move(stats_);
  }

 private:
  void descend(std::size_t level, std::size_t partial) {
    if (level == relevant_.size()) {
      leaf(partial);
      return;
    }
    const NodeId v = relevant_[level];
    const auto& values = grid_.values(v);
    const auto& nc = cols_[static_cast<std::size_t>(v - 1)];
    const auto& f = fs_[static_cast<std::size_t>(v - 1)];
    const auto& pa = parents_[static_cast<std::size_t>(v - 1)];
    auto xv = x_.col(v - 1);
    const Eigen::Index m = x_.rows();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double a = values[j];
      if (mode_ == InterventionMode::Do && a != 0.0) {
        xv.setConstant(a);
      } else {
        f.evaluate_batch(ParentColumns{pa, m}, a, xv.data());
        if (!clamp_.empty()) {
          const double c = clamp_[static_cast<std::size_t>(v - 1)];
          xv = xv.cwiseMax(-c).cwiseMin(c);
        }
        xv.array() += nc.value[j];
      }
      if (w_.size() > 0) {
        const auto l = static_cast<Eigen::Index>(level);
        w_.col(l + 1).array() = w_.col(l).array() * nc.prob[j];
      }
      descend(level + 1, partial + j * grid_.stride(v));
    }
  }

  void leaf(std::size_t partial) {
    auto y = x_.col(dag_.reward_node() - 1).array();
    double mean = 0.0;
    double var = 0.0;
    switch (plan_.kind) {
      case NoisePlan::Kind::Mean:
        mean = y(0);
        break;
      case NoisePlan::Kind::Sampled: {
        mean = y.mean();
        if (y.size() > 1) var = (y - mean).square().sum() / static_cast<double>(y.size() - 1);
        break;
      }
      case NoisePlan::Kind::Enumerated: {
        auto w = w_.col(w_.cols() - 1).array();
        mean = (w * y).sum();
        var = (w * (y - mean).square()).sum();
        break;
      }
    }
    fill(0, partial, mean, var);
  }

  void fill(std::size_t k, std::size_t index, double mean, double var) {
    if (k == irrelevant_.size()) {
      stats_.mean[index] = mean;
      stats_.variance[index] = var;
      return;
    }
    const NodeId v = irrelevant_[k];
    for (std::size_t j = 0; j < grid_.values(v).size(); ++j) fill(k + 1, index + j * grid_.stride(v), mean, var);
  }

  const graph::Dag& dag_;
  const ArmGrid& grid_;
  InterventionMode mode_;
  const std::vector<double>& clamp_;
  const std::vector<NodeId>& relevant_;
  const std::vector<NodeId>& irrelevant_;
  std::span<const NodeFunction> fs_;
  const NoisePlan& plan_;
  Eigen::MatrixXd x_;
  Eigen::MatrixXd w_;
  std::vector<NoiseColumns> cols_;
  std::vector<std::vector<const double*>> parents_;
  ArmStats stats_;
};

}  // namespace

ArmStats ForwardEngine::evaluate_all(std::span<const NodeFunction> functions, const NoisePlan& plan) const {
  if (static_cast<int>(functions.size()) != dag_.node_count())
    throw std::invalid_argument("one function per node is required");
  if (plan.base.cols() != dag_.node_count()) throw std::invalid_argument("noise plan has wrong node count");
  Walk walk(dag_, grid_, mode_, noise_, clamp_, relevant_, irrelevant_, functions, plan);
  return walk.run();
}

Eigen::VectorXd ForwardEngine::node_means(std::span<const NodeFunction> functions, const NoisePlan& plan,
                                          std::span<const double> arm) const {
  const int n = dag_.node_count();
  if (static_cast<int>(functions.size()) != n || static_cast<int>(arm.size()) != n)
    throw std::invalid_argument("one function and one intervention value per node are required");
  const Eigen::Index m = plan.rollouts();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, n);
  Eigen::ArrayXd w = Eigen::ArrayXd::Ones(m);
  for (NodeId v : dag_.topological_order()) {
    const auto vi = static_cast<std::size_t>(v - 1);
    const double a = arm[vi];
    const std::vector<double> one{a};
    auto nc = noise_columns(noise_[vi], plan, v - 1, one);
    if (plan.kind == NoisePlan::Kind::Enumerated) w *= nc.prob[0];
    auto xv = x.col(v - 1);
    if (mode_ == InterventionMode::Do && a != 0.0) {
      xv.setConstant(a);
      continue;
    }
    std::vector<const double*> pa;
    for (NodeId p : dag_.parents(v)) pa.push_back(x.col(p - 1).data());
    functions[vi].evaluate_batch(ParentColumns{pa, m}, a, xv.data());
    if (!clamp_.empty()) xv = xv.cwiseMax(-clamp_[vi]).cwiseMin(clamp_[vi]);
    xv.array() += nc.value[0];
  }
  if (plan.kind == NoisePlan::Kind::Enumerated) return (x.array().colwise() * w).colwise().sum().transpose();
  return x.colwise().mean().transpose();
}

}  // namespace gcb::scm
