#ifndef SELSEG_CONTOUR_HPP_
#define SELSEG_CONTOUR_HPP_

// Compact mask transport: run lengths and boundary polylines.

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "selseg/grid.hpp"

namespace selseg {

/// Row-major run lengths alternating 0-runs and 1-runs, starting with a
/// (possibly empty) run of zeros.
inline std::vector<std::uint32_t> encode_rle(BinaryMask const& mask) {
  std::vector<std::uint32_t> counts;
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (std::uint8_t v : mask) {
    std::uint8_t const bit = v ? 1 : 0;
    if (bit != current) {
      counts.push_back(run);
      run = 0;
      current = bit;
    }
    ++run;
  }
  counts.push_back(run);
  return counts;
}

inline BinaryMask decode_rle(int width, int height, std::vector<std::uint32_t> const& counts) {
  BinaryMask mask(width, height);
  std::size_t pos = 0;
  std::uint8_t value = 0;
  for (std::uint32_t run : counts) {
    if (pos + run > mask.size()) throw InputError("run lengths exceed the mask size");
    for (std::uint32_t k = 0; k < run; ++k) mask[pos++] = value;
    value ^= 1;
  }
  if (pos != mask.size()) throw InputError("run lengths do not cover the mask");
  return mask;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(Vec2 const&, Vec2 const&) = default;
};

using Polyline = std::vector<Vec2>;

/// Boundaries of the 1-regions by marching squares at level 1/2, with pixel
/// (x, y) centred at (x, y) and everything outside the mask treated as 0.
/// Every polyline is closed: its last vertex repeats the first. Saddle cells
/// keep the two foreground corners apart.
inline std::vector<Polyline> marching_squares(BinaryMask const& mask) {
  int const w = mask.width(), h = mask.height();
  auto at = [&](int x, int y) -> int { return mask.contains(x, y) && mask(x, y) ? 1 : 0; };
  // Edge midpoints in doubled integer coordinates.
  using Key = std::pair<int, int>;
  std::map<Key, std::vector<Key>> adjacency;
  auto link = [&](Key a, Key b) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  };
  for (int y = -1; y < h; ++y) {
    for (int x = -1; x < w; ++x) {
      int const tl = at(x, y), tr = at(x + 1, y), br = at(x + 1, y + 1), bl = at(x, y + 1);
      int const code = tl << 3 | tr << 2 | br << 1 | bl;
      Key const top{2 * x + 1, 2 * y}, right{2 * x + 2, 2 * y + 1};
      Key const bottom{2 * x + 1, 2 * y + 2}, left{2 * x, 2 * y + 1};
      switch (code) {
        case 0: case 15: break;
        case 1: case 14: link(left, bottom); break;
        case 2: case 13: link(bottom, right); break;
        case 3: case 12: link(left, right); break;
        case 4: case 11: link(top, right); break;
        case 6: case 9: link(top, bottom); break;
        case 7: case 8: link(left, top); break;
        case 5:  // tr and bl set
          link(top, right);
          link(left, bottom);
          break;
        case 10:  // tl and br set
          link(left, top);
          link(bottom, right);
          break;
      }
    }
  }
  // Every midpoint has exactly two neighbours, so the graph is a union of cycles.
  std::vector<Polyline> out;
  std::map<Key, bool> visited;
  auto to_vec = [](Key k) { return Vec2{k.first / 2.0, k.second / 2.0}; };
  for (auto const& [start, neighbours] : adjacency) {
    if (visited[start]) continue;
    Polyline line{to_vec(start)};
    visited[start] = true;
    Key prev = start, cur = neighbours[0];
    while (cur != start) {
      visited[cur] = true;
      line.push_back(to_vec(cur));
      auto const& nb = adjacency[cur];
      Key const next = nb[0] == prev ? nb[1] : nb[0];
      prev = cur;
      cur = next;
    }
    line.push_back(to_vec(start));
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace selseg

#endif  // SELSEG_CONTOUR_HPP_
