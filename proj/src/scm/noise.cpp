#include "gcb/scm/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gcb::scm {

NoiseModel NoiseModel::zero() { return NoiseModel{}; }

NoiseModel NoiseModel::gaussian(double variance, double mean) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) throw std::invalid_argument("Gaussian variance must be >= 0");
  NoiseModel n;
  n.kind_ = Kind::Gaussian;
  n.variance_ = variance;
  n.mean_ = mean;
  return n;
}

NoiseModel NoiseModel::rademacher() {
  NoiseModel n;
  n.kind_ = Kind::Rademacher;
  return n;
}

NoiseModel NoiseModel::shifted_bernoulli(double p_when, double p_else, double threshold) {
  if (!(p_when >= 0.0 && p_when <= 1.0) || !(p_else >= 0.0 && p_else <= 1.0))
    throw std::invalid_argument("Bernoulli probabilities must lie in [0, 1]");
  NoiseModel n;
  n.kind_ = Kind::ShiftedBernoulli;
  n.p_when_ = p_when;
  n.p_else_ = p_else;
  n.threshold_ = threshold;
  return n;
}

double NoiseModel::mean(double a) const {
  switch (kind_) {
    case Kind::Gaussian:
      return mean_;
    case Kind::ShiftedBernoulli:
      return success_probability(a);
    default:
      return 0.0;
  }
}

double NoiseModel::variance(double a) const {
  switch (kind_) {
    case Kind::Gaussian:
      return variance_;
    case Kind::Rademacher:
      return 1.0;
    case Kind::ShiftedBernoulli: {
      double p = success_probability(a);
      return p * (1.0 - p);
    }
    default:
      return 0.0;
  }
}

double NoiseModel::draw_base(Rng& rng) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Gaussian:
      return std::normal_distribution<double>{}(rng);
    default:
      return std::uniform_real_distribution<double>{}(rng);
  }
}

double NoiseModel::realize(double base, double a) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Gaussian:
      return mean_ + std::sqrt(variance_) * base;
    case Kind::Rademacher:
      return base < 0.5 ? 1.0 : -1.0;
    case Kind::ShiftedBernoulli:
      return base < success_probability(a) ? 1.0 : 0.0;
  }
  return 0.0;
}

std::vector<double> NoiseModel::support() const {
  switch (kind_) {
    case Kind::Rademacher:
      return {-1.0, 1.0};
    case Kind::ShiftedBernoulli:
      return {0.0, 1.0};
    case Kind::Gaussian:
      if (variance_ == 0.0) return {mean_};
      throw std::logic_error("Gaussian noise has no finite support");
    default:
      return {0.0};
  }
}

double NoiseModel::probability(std::size_t k, double a) const {
  switch (kind_) {
    case Kind::Rademacher:
      return 0.5;
    case Kind::ShiftedBernoulli: {
      double p = success_probability(a);
      return k == 1 ? p : 1.0 - p;
    }
    default:
      return 1.0;
  }
}

NoiseModel NoiseModel::agent_view() const {
  if (kind_ == Kind::ShiftedBernoulli) return bernoulli(0.5);
  return *this;
}

InterventionSpace InterventionSpace::binary() { return InterventionSpace{}; }

InterventionSpace InterventionSpace::interval(int resolution) {
  if (resolution < 2) throw std::invalid_argument("interval grid resolution must be >= 2");
  InterventionSpace s;
  s.kind_ = Kind::Interval;
  s.resolution_ = resolution;
  s.grid_.resize(static_cast<std::size_t>(resolution));
  for (int k = 0; k < resolution; ++k) s.grid_[static_cast<std::size_t>(k)] = static_cast<double>(k) / (resolution - 1);
  return s;
}

InterventionSpace InterventionSpace::finite(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (!std::binary_search(values.begin(), values.end(), 0.0))
    throw std::invalid_argument("finite intervention set must contain 0");
  InterventionSpace s;
  s.kind_ = Kind::Finite;
  s.resolution_ = static_cast<int>(values.size());
  s.grid_ = std::move(values);
  return s;
}

bool InterventionSpace::contains(double a) const {
  switch (kind_) {
    case Kind::Interval:
      return a >= 0.0 && a <= 1.0;
    default:
      return std::binary_search(grid_.begin(), grid_.end(), a);
  }
}

}  // namespace gcb::scm
