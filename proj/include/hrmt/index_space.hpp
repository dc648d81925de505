#pragma once

#include <cstdint>

namespace hrmt {

/// The hierarchical index set {1, ..., 2^n} with the dyadic tree metric.
/// d(x, y) is the smallest r such that x and y share a block of the level-r
/// partition into consecutive runs of length 2^r, which coincides with the
/// bit length of (x-1) XOR (y-1).
class IndexSpace {
 public:
  explicit IndexSpace(unsigned depth);

  unsigned depth() const { return depth_; }
  std::uint64_t size() const { return size_; }

  /// Hierarchical distance between 1-based indices. Throws DomainError for
  /// indices outside 1..2^n.
  unsigned distance(std::uint64_t x, std::uint64_t y) const;

  /// True when d(x, y) <= radius, i.e. y lies in the hierarchical ball
  /// B_radius(x).
  bool in_ball(std::uint64_t x, std::uint64_t y, unsigned radius) const {
    return distance(x, y) <= radius;
  }

  /// Number of indices at exact distance r from any fixed x: 1 for r = 0,
  /// 2^(r-1) for r >= 1.
  std::uint64_t shell_size(unsigned r) const;

 private:
  unsigned depth_;
  std::uint64_t size_;
};

/// Free-function form used by the statistics layer.
unsigned hier_distance(const IndexSpace& space, std::uint64_t x,
                       std::uint64_t y);

}  // namespace hrmt
