#include "orlat/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orlat/error.hpp"
#include "orlat/quadrature.hpp"

namespace orlat {

double WeightSpec::total_probability() const noexcept {
  double total = 0.0;
  for (const auto& a : atoms_) total += a.probability;
  for (const auto& s : segments_) total += s.probability;
  return total;
}

WeightSpec WeightSpec::constant(double value) { return validate({{{value, 1.0}}, {}}); }

WeightSpec WeightSpec::bernoulli(double p) { return validate({{{0.0, 1.0 - p}, {1.0, p}}, {}}); }

WeightSpec WeightSpec::uniform(double lo, double hi) { return validate({{}, {{lo, hi, 1.0}}}); }

WeightSpec validate(const RawLaw& raw) {
  if (raw.atoms.empty() && raw.segments.empty()) throw Error(ErrorCode::EmptyLaw, "no atoms or segments");

  double total = 0.0;
  for (const auto& a : raw.atoms) {
    if (!std::isfinite(a.value) || !std::isfinite(a.probability) || a.probability < 0.0) {
      throw Error(ErrorCode::NonNormalized, "atom probability must be finite and non-negative");
    }
    if (a.value < 0.0) throw Error(ErrorCode::NegativeSupport, "atom at " + std::to_string(a.value));
    total += a.probability;
  }
  for (const auto& s : raw.segments) {
    if (!std::isfinite(s.lo) || !std::isfinite(s.hi) || !std::isfinite(s.probability) ||
        s.probability < 0.0) {
      throw Error(ErrorCode::NonNormalized, "segment probability must be finite and non-negative");
    }
    if (s.lo < 0.0) throw Error(ErrorCode::NegativeSupport, "segment starts at " + std::to_string(s.lo));
    if (!(s.hi > s.lo)) throw Error(ErrorCode::InvalidSegment, "segment needs lo < hi");
    total += s.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::NonNormalized, "total probability " + std::to_string(total));
  }

  WeightSpec spec;
  for (const auto& a : raw.atoms) {
    if (a.probability > 0.0) spec.atoms_.push_back({a.value, a.probability / total});
  }
  for (const auto& s : raw.segments) {
    if (s.probability > 0.0) spec.segments_.push_back({s.lo, s.hi, s.probability / total});
  }

  double positive_mass = 0.0;
  double smallest_positive = std::numeric_limits<double>::infinity();
  bool touches_zero = false;
  for (const auto& a : spec.atoms_) {
    spec.bound_ = std::max(spec.bound_, a.value);
    spec.mean_ += a.probability * a.value;
    spec.second_moment_ += a.probability * a.value * a.value;
    if (a.value > 0.0) {
      positive_mass += a.probability;
      smallest_positive = std::min(smallest_positive, a.value);
    }
  }
  for (const auto& s : spec.segments_) {
    spec.bound_ = std::max(spec.bound_, s.hi);
    spec.mean_ += s.probability * 0.5 * (s.lo + s.hi);
    spec.second_moment_ += s.probability * (s.lo * s.lo + s.lo * s.hi + s.hi * s.hi) / 3.0;
    positive_mass += s.probability;
    if (s.lo == 0.0) touches_zero = true;
    smallest_positive = std::min(smallest_positive, s.lo);
  }
  if (!(positive_mass > 0.0)) throw Error(ErrorCode::AllMassAtZero, "P(rho > 0) = 0");
  spec.gap_ = touches_zero ? 0.0 : smallest_positive;

  double running = 0.0;
  for (const auto& a : spec.atoms_) spec.cumulative_.push_back(running += a.probability);
  for (const auto& s : spec.segments_) spec.cumulative_.push_back(running += s.probability);
  spec.cumulative_.back() = 1.0;
  return spec;
}

double expect(const WeightSpec& spec, const std::function<double(double)>& f,
              std::span<const double> breakpoints) {
  double total = 0.0;
  for (const auto& a : spec.atoms()) total += a.probability * f(a.value);
  for (const auto& s : spec.segments()) {
    std::vector<double> cuts{s.lo};
    for (const double b : breakpoints) {
      if (b > s.lo && b < s.hi) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(s.hi);
    const double density = s.probability / (s.hi - s.lo);
    const double piece_tol = 1e-11 / std::max(density, 1e-300) / static_cast<double>(cuts.size());
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      integral += quad::integrate(f, cuts[i], cuts[i + 1], piece_tol);
    }
    total += density * integral;
  }
  return total;
}

double sample_from_uniforms(const WeightSpec& spec, double u_component, double u_position) noexcept {
  const auto& cum = spec.cumulative_;
  const auto idx = static_cast<std::size_t>(
      std::upper_bound(cum.begin(), cum.end(), u_component) - cum.begin());
  const std::size_t k = std::min(idx, cum.size() - 1);
  if (k < spec.atoms_.size()) return spec.atoms_[k].value;
  const Segment& s = spec.segments_[k - spec.atoms_.size()];
  return std::min(s.hi, s.lo + u_position * (s.hi - s.lo));
}

double sample(const WeightSpec& spec, Rng& rng) {
  if (spec.segments().empty() && spec.atoms().size() == 1) return spec.atoms().front().value;
  const double u1 = rng.uniform();
  const double u2 = spec.segments().empty() ? 0.0 : rng.uniform();
  return sample_from_uniforms(spec, u1, u2);
}

Environment::Environment(std::uint64_t seed, WeightSpec spec, std::uint32_t dimension)
    : seed_(seed), spec_(std::move(spec)), dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
}

double Environment::weight(const Vertex& x) const noexcept {
  if (spec_.segments().empty() && spec_.atoms().size() == 1) return spec_.atoms().front().value;
  const auto block = philox2x64(x.digest(dimension_), seed_);
  const double u1 = static_cast<double>(block[0] >> 11U) * 0x1.0p-53;
  const double u2 = static_cast<double>(block[1] >> 11U) * 0x1.0p-53;
  return sample_from_uniforms(spec_, u1, u2);
}

double vertex_weight(const Environment& env, const Vertex& x) {
  if (x.max_axis() >= static_cast<std::int64_t>(env.dimension())) {
    throw Error(ErrorCode::DimensionMismatch,
                "vertex " + x.to_string() + " outside Z_+^" + std::to_string(env.dimension()));
  }
  return env.weight(x);
}

double vertex_weight(const Environment& env, std::span<const std::uint32_t> coords) {
  if (coords.size() != env.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(env.dimension()) +
                                                  " coordinates, got " + std::to_string(coords.size()));
  }
  return env.weight(Vertex::from_coords(coords));
}

}  // namespace orlat
