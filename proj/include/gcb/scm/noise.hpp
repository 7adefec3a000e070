#pragma once

#include <vector>

#include "gcb/random.hpp"

namespace gcb::scm {

/// Additive noise epsilon_i.
///
/// Sampling is split into a base variate (standard normal or uniform on
/// [0,1), independent of the intervention) and a realization that maps the
/// base to a noise value given a_i. Sharing base variates across arms gives
/// common random numbers.
class NoiseModel {
 public:
  enum class Kind { Zero, Gaussian, Rademacher, ShiftedBernoulli };

  NoiseModel() = default;
  static NoiseModel zero();
  static NoiseModel gaussian(double variance, double mean = 0.0);
  static NoiseModel rademacher();
  /// Bernoulli(p_when) when a <= threshold, Bernoulli(p_else) otherwise.
  static NoiseModel shifted_bernoulli(double p_when, double p_else, double threshold = 0.0);
  static NoiseModel bernoulli(double p) { return shifted_bernoulli(p, p); }

  Kind kind() const { return kind_; }
  double gaussian_mean() const { return mean_; }
  double gaussian_variance() const { return variance_; }
  double p_when() const { return p_when_; }
  double p_else() const { return p_else_; }
  double threshold() const { return threshold_; }
  /// Success probability of the Bernoulli branch active under a.
  double success_probability(double a) const { return a <= threshold_ ? p_when_ : p_else_; }

  double mean(double a) const;
  double variance(double a) const;

  /// True when the base variate is consumed from the stream.
  bool draws() const { return kind_ != Kind::Zero; }
  double draw_base(Rng& rng) const;
  double realize(double base, double a) const;
  double sample(Rng& rng, double a) const { return realize(draw_base(rng), a); }

  /// Finite support (Zero, Rademacher, Bernoulli); Gaussian has none.
  bool is_discrete() const { return kind_ != Kind::Gaussian || variance_ == 0.0; }
  std::vector<double> support() const;
  /// Probability of support()[k] under intervention value a.
  double probability(std::size_t k, double a) const;

  /// The noise model an agent assumes: intervention-dependent Bernoulli
  /// noise is replaced by its uninformative Bernoulli(1/2) counterpart.
  NoiseModel agent_view() const;

  bool operator==(const NoiseModel&) const = default;

 private:
  Kind kind_ = Kind::Zero;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double p_when_ = 0.5;
  double p_else_ = 0.5;
  double threshold_ = 0.0;
};

/// Per-node set of admissible intervention values. 0 is always admissible.
class InterventionSpace {
 public:
  enum class Kind { Binary, Interval, Finite };

  static InterventionSpace binary();
  /// [0, 1], searched on a uniform grid of `resolution` points.
  static InterventionSpace interval(int resolution = 11);
  static InterventionSpace finite(std::vector<double> values);

  Kind kind() const { return kind_; }
  int resolution() const { return resolution_; }
  bool contains(double a) const;
  /// Sorted candidate values used by argmax searches.
  const std::vector<double>& grid() const { return grid_; }

 private:
  Kind kind_ = Kind::Binary;
  int resolution_ = 2;
  std::vector<double> grid_{0.0, 1.0};
};

enum class InterventionMode { Soft, Do };

}  // namespace gcb::scm
