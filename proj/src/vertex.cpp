#include "orlat/vertex.hpp"

#include <algorithm>

#include "orlat/rng.hpp"

namespace orlat {

namespace {

std::uint64_t step_key(std::uint32_t axis) noexcept { return mix64(0x5851F42D4C957F2DULL ^ axis); }

}  // namespace

Vertex Vertex::from_coords(std::span<const std::uint32_t> coords) {
  Vertex v;
  for (std::uint32_t axis = 0; axis < coords.size(); ++axis) {
    if (coords[axis] == 0) continue;
    v.entries_.push_back({axis, coords[axis]});
    v.norm_ += coords[axis];
    v.fingerprint_ += coords[axis] * step_key(axis);
  }
  return v;
}

Vertex Vertex::from_steps(std::span<const std::uint32_t> axes) {
  Vertex v;
  for (const auto axis : axes) v = v.plus(axis);
  return v;
}

std::uint32_t Vertex::coord(std::uint32_t axis) const noexcept {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), axis,
                                   [](const Entry& e, std::uint32_t a) { return e.axis < a; });
  return (it != entries_.end() && it->axis == axis) ? it->count : 0;
}

Vertex Vertex::plus(std::uint32_t axis) const {
  Vertex v = *this;
  auto it = std::lower_bound(v.entries_.begin(), v.entries_.end(), axis,
                             [](const Entry& e, std::uint32_t a) { return e.axis < a; });
  if (it != v.entries_.end() && it->axis == axis) {
    ++it->count;
  } else {
    v.entries_.insert(it, Entry{axis, 1});
  }
  ++v.norm_;
  v.fingerprint_ += step_key(axis);
  return v;
}

Vertex Vertex::minus(std::uint32_t axis) const {
  Vertex v = *this;
  auto it = std::lower_bound(v.entries_.begin(), v.entries_.end(), axis,
                             [](const Entry& e, std::uint32_t a) { return e.axis < a; });
  if (it == v.entries_.end() || it->axis != axis) return v;
  if (--it->count == 0) v.entries_.erase(it);
  --v.norm_;
  v.fingerprint_ -= step_key(axis);
  return v;
}

std::vector<std::uint32_t> Vertex::dense(std::uint32_t dimension) const {
  std::vector<std::uint32_t> out(dimension, 0);
  for (const auto& e : entries_) {
    if (e.axis < dimension) out[e.axis] = e.count;
  }
  return out;
}

std::string Vertex::to_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(entries_[i].axis) + ":" + std::to_string(entries_[i].count);
  }
  return s + "}";
}

std::array<std::uint64_t, 2> Vertex::digest(std::uint32_t dimension) const noexcept {
  std::uint64_t a = mix64(0x243F6A8885A308D3ULL ^ dimension);
  std::uint64_t b = mix64(0x13198A2E03707344ULL + dimension);
  for (const auto& e : entries_) {
    const std::uint64_t word = (static_cast<std::uint64_t>(e.axis) << 32U) | e.count;
    a = mix64(a ^ word) + 0xA4093822299F31D0ULL;
    b = mix64(b + word * 0x9E3779B97F4A7C15ULL) ^ 0x082EFA98EC4E6C89ULL;
  }
  return {a, b};
}

std::size_t VertexHash::operator()(const Vertex& v) const noexcept {
  return static_cast<std::size_t>(mix64(v.fingerprint() ^ v.norm()));
}

bool is_edge(const Vertex& x, const Vertex& y) noexcept {
  if (y.norm() != x.norm() + 1) return false;
  // Exactly one coordinate differs, by +1.
  int diffs = 0;
  const auto xe = x.entries();
  const auto ye = y.entries();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < xe.size() || j < ye.size()) {
    if (j == ye.size() || (i < xe.size() && xe[i].axis < ye[j].axis)) return false;
    if (i == xe.size() || ye[j].axis < xe[i].axis) {
      if (ye[j].count != 1) return false;
      ++diffs;
      ++j;
      continue;
    }
    if (ye[j].count == xe[i].count + 1) {
      ++diffs;
    } else if (ye[j].count != xe[i].count) {
      return false;
    }
    ++i;
    ++j;
  }
  return diffs == 1;
}

}  // namespace orlat
