#include "hrmt/index_space.hpp"

#include <bit>
#include <string>

#include "hrmt/errors.hpp"

namespace hrmt {

IndexSpace::IndexSpace(unsigned depth) : depth_(depth) {
  if (depth > 62)
    throw DomainError("IndexSpace: depth " + std::to_string(depth) +
                      " exceeds supported range");
  size_ = std::uint64_t{1} << depth;
}

unsigned IndexSpace::distance(std::uint64_t x, std::uint64_t y) const {
  if (x < 1 || x > size_ || y < 1 || y > size_)
    throw DomainError("IndexSpace::distance: index out of range 1..2^n");
  return static_cast<unsigned>(std::bit_width((x - 1) ^ (y - 1)));
}

std::uint64_t IndexSpace::shell_size(unsigned r) const {
  if (r > depth_)
    throw DomainError("IndexSpace::shell_size: level exceeds depth");
  return r == 0 ? 1 : std::uint64_t{1} << (r - 1);
}

unsigned hier_distance(const IndexSpace& space, std::uint64_t x,
                       std::uint64_t y) {
  return space.distance(x, y);
}

}  // namespace hrmt
