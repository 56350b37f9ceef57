#pragma once

#include <cstddef>

#include "kflow/grid.hpp"

namespace kflow::detail {

/// Periodic neighbour of `i` one step along `axis` in direction `dir` (+1 or -1).
inline std::size_t shift(const Grid& g, std::size_t i, int axis, int dir) {
  const std::size_t st = g.stride(axis);
  const auto N = static_cast<std::size_t>(g.dims[static_cast<std::size_t>(axis)]);
  const std::size_t c = (i / st) % N;
  if (dir > 0) return c + 1 == N ? i - (N - 1) * st : i + st;
  return c == 0 ? i + (N - 1) * st : i - st;
}

/// Centered periodic first difference along a torus axis.
inline GridField torus_d1(const GridField& u, int axis) {
  const Grid& g = *u.grid();
  const double h = g.spacing[static_cast<std::size_t>(axis)];
  GridField out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = (u[shift(g, i, axis, 1)] - u[shift(g, i, axis, -1)]) / (2.0 * h);
  return out;
}

}  // namespace kflow::detail
