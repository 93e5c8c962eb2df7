#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "parest/errors.hpp"

namespace parest {

enum class EncodingScheme { SeqFirst, EmbedFirst };

struct GridShape {
  int length;  // L, sequence length
  int dims;    // K, embedding size

  int cells() const { return length * dims; }
};

inline constexpr GridShape kFullGrid{1024, 384};
inline constexpr GridShape kDeskGrid{64, 64};

// L x K float32 weight grid, the transformer's input sequence. Total weight
// equals the number of encoded observations.
struct EncodedGrid {
  GridShape shape{0, 0};
  std::vector<float> weights;  // row-major [pos][dim]

  EncodedGrid() = default;
  explicit EncodedGrid(GridShape s)
      : shape(s), weights(static_cast<std::size_t>(s.cells()), 0.0f) {}

  float& at(int pos, int dim) {
    return weights[static_cast<std::size_t>(pos) * shape.dims + dim];
  }
  float at(int pos, int dim) const {
    return weights[static_cast<std::size_t>(pos) * shape.dims + dim];
  }

  double total() const {
    double s = 0.0;
    for (float w : weights) s += w;
    return s;
  }
};

struct Cell {
  int pos;
  int dim;
};

// One observation's weight split over two cells adjacent in the scheme's
// flattened order; w_primary + w_secondary == 1.
struct CellAssignment {
  Cell primary;
  Cell secondary;
  double w_primary;
  double w_secondary;
};

namespace detail {

inline Cell unflatten(std::int64_t flat, EncodingScheme scheme, GridShape s) {
  if (scheme == EncodingScheme::SeqFirst) {
    return {static_cast<int>(flat / s.dims), static_cast<int>(flat % s.dims)};
  }
  return {static_cast<int>(flat % s.length), static_cast<int>(flat / s.length)};
}

inline std::int64_t flatten(Cell c, EncodingScheme scheme, GridShape s) {
  if (scheme == EncodingScheme::SeqFirst) {
    return static_cast<std::int64_t>(c.pos) * s.dims + c.dim;
  }
  return static_cast<std::int64_t>(c.dim) * s.length + c.pos;
}

}  // namespace detail

// Map v in [0,1] to its weighted pair of cells. [0,1] is divided into
// L*K sub-intervals of width 1/(L*K); v's fractional position inside its
// sub-interval moves that fraction of its weight to the next cell in
// flattened order (rolling over position/dim boundaries). A fraction of
// exactly 0, and the last sub-interval, put the full weight on one cell.
inline CellAssignment locate(double v, EncodingScheme scheme, GridShape shape) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument("locate: value outside [0, 1]");
  }
  const std::int64_t cells = shape.cells();
  const double g = v * static_cast<double>(cells);
  std::int64_t i = static_cast<std::int64_t>(std::floor(g));
  if (i > cells - 1) i = cells - 1;
  const double f = g - static_cast<double>(i);
  CellAssignment out;
  out.primary = detail::unflatten(i, scheme, shape);
  if (f <= 0.0 || i == cells - 1) {
    out.secondary = out.primary;
    out.w_primary = 1.0;
    out.w_secondary = 0.0;
  } else {
    out.secondary = detail::unflatten(i + 1, scheme, shape);
    out.w_primary = 1.0 - f;
    out.w_secondary = f;
  }
  return out;
}

// Sum of locate() assignments over all observations; collisions accumulate.
inline EncodedGrid encode(const std::vector<double>& values,
                          EncodingScheme scheme, GridShape shape) {
  EncodedGrid grid(shape);
  for (double v : values) {
    const CellAssignment c = locate(v, scheme, shape);
    grid.at(c.primary.pos, c.primary.dim) += static_cast<float>(c.w_primary);
    if (c.w_secondary > 0.0) {
      grid.at(c.secondary.pos, c.secondary.dim) +=
          static_cast<float>(c.w_secondary);
    }
  }
  return grid;
}

// Test oracle: recover the single observation a grid encodes, as the
// weighted centroid of occupied cell centers. Error is at most 1/(L*K).
inline double decode_single(const EncodedGrid& grid, EncodingScheme scheme) {
  const GridShape s = grid.shape;
  double total = 0.0;
  double acc = 0.0;
  const double cells = static_cast<double>(s.cells());
  for (int pos = 0; pos < s.length; ++pos) {
    for (int dim = 0; dim < s.dims; ++dim) {
      const float w = grid.at(pos, dim);
      if (w == 0.0f) continue;
      const std::int64_t flat = detail::flatten({pos, dim}, scheme, s);
      acc += w * ((static_cast<double>(flat) + 0.5) / cells);
      total += w;
    }
  }
  if (std::abs(total - 1.0) > 1e-4) {
    throw std::invalid_argument("decode_single: grid weight != 1");
  }
  return std::min(1.0, acc / total);
}

}  // namespace parest
