#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "orlat/rng.hpp"
#include "orlat/vertex.hpp"

namespace orlat {

struct Atom {
  double value;
  double probability;
};

/// Uniform mass `probability` spread over [lo, hi].
struct Segment {
  double lo;
  double hi;
  double probability;
};

/// Unvalidated weight-law declaration, as read from a config file.
struct RawLaw {
  std::vector<Atom> atoms;
  std::vector<Segment> segments;
};

/// Law of the vertex weight: a finite mixture of atoms and uniform segments
/// on [0, M] with P(weight > 0) > 0. Only `validate` constructs one.
class WeightSpec {
 public:
  [[nodiscard]] const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }
  /// Essential supremum M (the largest support point).
  [[nodiscard]] double bound() const noexcept { return bound_; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double second_moment() const noexcept { return second_moment_; }
  [[nodiscard]] double total_probability() const noexcept;

  /// True when the law puts no mass on (0, eps) for some eps > 0, i.e. the
  /// positive part of the support is bounded away from zero.
  [[nodiscard]] bool has_gap() const noexcept { return gap_ > 0.0; }
  /// The largest such eps (the smallest positive support point), or 0.
  [[nodiscard]] double gap() const noexcept { return gap_; }

  /// ρ ≡ value.
  static WeightSpec constant(double value);
  /// P(ρ = 1) = p, P(ρ = 0) = 1 - p.
  static WeightSpec bernoulli(double p);
  static WeightSpec uniform(double lo, double hi);

 private:
  friend WeightSpec validate(const RawLaw& raw);
  friend double sample_from_uniforms(const WeightSpec& spec, double u_component, double u_position) noexcept;

  std::vector<Atom> atoms_;
  std::vector<Segment> segments_;
  std::vector<double> cumulative_;  // atoms first, then segments
  double bound_ = 0.0;
  double mean_ = 0.0;
  double second_moment_ = 0.0;
  double gap_ = 0.0;
};

/// Checks and normalizes a declared law. Total mass must be 1 within 1e-9;
/// it is then rescaled to 1 exactly. Zero-probability components are dropped.
WeightSpec validate(const RawLaw& raw);

/// E f(ρ): exact sum over atoms plus adaptive Gauss–Legendre over each
/// segment. Segments are split at `breakpoints` so that piecewise-smooth
/// integrands (e.g. linear interpolants) are integrated panel by panel.
double expect(const WeightSpec& spec, const std::function<double(double)>& f,
              std::span<const double> breakpoints = {});

double sample(const WeightSpec& spec, Rng& rng);

/// Maps two uniforms to a draw; shared by `sample` and the quenched oracle.
double sample_from_uniforms(const WeightSpec& spec, double u_component, double u_position) noexcept;

/// Quenched environment: weight(x) is a pure function of (seed, d, x).
class Environment {
 public:
  Environment(std::uint64_t seed, WeightSpec spec, std::uint32_t dimension);

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] const WeightSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::uint32_t dimension() const noexcept { return dimension_; }

  /// Unchecked lookup; callers guarantee the vertex lies in Z_+^d.
  [[nodiscard]] double weight(const Vertex& x) const noexcept;

 private:
  std::uint64_t seed_;
  WeightSpec spec_;
  std::uint32_t dimension_;
};

/// Checked oracle lookup; DimensionMismatch if x has a coordinate beyond d.
double vertex_weight(const Environment& env, const Vertex& x);
/// Same, from a dense coordinate tuple whose length must equal d.
double vertex_weight(const Environment& env, std::span<const std::uint32_t> coords);

}  // namespace orlat
