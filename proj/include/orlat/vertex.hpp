#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <absl/container/inlined_vector.h>

namespace orlat {

/// A vertex of the oriented lattice Z_+^d, stored sparsely as sorted
/// (axis, count) pairs. The representation is canonical, so equality and
/// hashing never depend on how a vertex was built, and memory is
/// O(min(d, norm)) even when d is in the thousands.
class Vertex {
 public:
  struct Entry {
    std::uint32_t axis;
    std::uint32_t count;
    bool operator==(const Entry&) const = default;
  };

  Vertex() = default;

  /// From a dense coordinate tuple (length = dimension).
  static Vertex from_coords(std::span<const std::uint32_t> coords);
  /// From a multiset of unit steps: {0, 0, 2} is 2e_1 + e_3 (axes 0-based).
  static Vertex from_steps(std::span<const std::uint32_t> axes);
  static Vertex unit(std::uint32_t axis) { return Vertex{}.plus(axis); }

  [[nodiscard]] std::uint64_t norm() const noexcept { return norm_; }
  [[nodiscard]] std::uint32_t coord(std::uint32_t axis) const noexcept;
  [[nodiscard]] bool is_origin() const noexcept { return entries_.empty(); }
  /// Largest axis with a nonzero coordinate, or -1 for the origin.
  [[nodiscard]] std::int64_t max_axis() const noexcept {
    return entries_.empty() ? -1 : static_cast<std::int64_t>(entries_.back().axis);
  }

  [[nodiscard]] Vertex plus(std::uint32_t axis) const;
  /// Requires coord(axis) > 0.
  [[nodiscard]] Vertex minus(std::uint32_t axis) const;

  [[nodiscard]] std::span<const Entry> entries() const noexcept { return {entries_.data(), entries_.size()}; }
  [[nodiscard]] std::vector<std::uint32_t> dense(std::uint32_t dimension) const;
  [[nodiscard]] std::string to_string() const;

  /// 128-bit digest of (dimension, coordinates); keys the quenched weights.
  [[nodiscard]] std::array<std::uint64_t, 2> digest(std::uint32_t dimension) const noexcept;

  /// Order-free sum of per-step keys, maintained incrementally.
  [[nodiscard]] std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  bool operator==(const Vertex& other) const noexcept {
    return fingerprint_ == other.fingerprint_ && norm_ == other.norm_ && entries_ == other.entries_;
  }

 private:
  // Lattice runs touch vertices with few nonzero axes; keep those inline.
  absl::InlinedVector<Entry, 8> entries_;
  std::uint64_t norm_ = 0;
  std::uint64_t fingerprint_ = 0;
};

struct VertexHash {
  std::size_t operator()(const Vertex& v) const noexcept;
};

/// True iff y = x + e_j for some j.
[[nodiscard]] bool is_edge(const Vertex& x, const Vertex& y) noexcept;

}  // namespace orlat
