#include "parest/encode.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "parest/rng.hpp"

namespace parest {
namespace {

constexpr GridShape kSmall{4, 4};

TEST(Locate, ZeroGoesToFirstCell) {
  for (auto scheme : {EncodingScheme::SeqFirst, EncodingScheme::EmbedFirst}) {
    const CellAssignment c = locate(0.0, scheme, kFullGrid);
    EXPECT_EQ(c.primary.pos, 0);
    EXPECT_EQ(c.primary.dim, 0);
    EXPECT_DOUBLE_EQ(c.w_primary, 1.0);
    EXPECT_DOUBLE_EQ(c.w_secondary, 0.0);
  }
}

TEST(Locate, OneGoesToLastCell) {
  const CellAssignment c = locate(1.0, EncodingScheme::SeqFirst, kFullGrid);
  EXPECT_EQ(c.primary.pos, kFullGrid.length - 1);
  EXPECT_EQ(c.primary.dim, kFullGrid.dims - 1);
  EXPECT_DOUBLE_EQ(c.w_primary, 1.0);
  const CellAssignment e = locate(1.0, EncodingScheme::EmbedFirst, kFullGrid);
  EXPECT_EQ(e.primary.pos, kFullGrid.length - 1);
  EXPECT_EQ(e.primary.dim, kFullGrid.dims - 1);
}

// The worked full-scale example: 0.500001 lands between the first two
// dimensions of position 512 with a ~0.607/0.393 split.
TEST(Locate, FullScaleWorkedExample) {
  const CellAssignment c =
      locate(0.500001, EncodingScheme::SeqFirst, kFullGrid);
  EXPECT_EQ(c.primary.pos, 512);
  EXPECT_EQ(c.primary.dim, 0);
  EXPECT_EQ(c.secondary.pos, 512);
  EXPECT_EQ(c.secondary.dim, 1);
  EXPECT_NEAR(c.w_primary, 0.606784, 1e-6);
  EXPECT_NEAR(c.w_secondary, 0.393216, 1e-6);
}

TEST(Locate, ExactBoundaryGetsFullWeight) {
  const CellAssignment c = locate(0.25, EncodingScheme::SeqFirst, kSmall);
  EXPECT_EQ(c.primary.pos, 1);
  EXPECT_EQ(c.primary.dim, 0);
  EXPECT_DOUBLE_EQ(c.w_primary, 1.0);
}

TEST(Locate, SecondaryRollsOverPositionBoundary) {
  // v just below 0.25 in a 4x4 grid: primary (0,3), secondary (1,0).
  const CellAssignment c = locate(0.245, EncodingScheme::SeqFirst, kSmall);
  EXPECT_EQ(c.primary.pos, 0);
  EXPECT_EQ(c.primary.dim, 3);
  EXPECT_EQ(c.secondary.pos, 1);
  EXPECT_EQ(c.secondary.dim, 0);
  EXPECT_NEAR(c.w_primary + c.w_secondary, 1.0, 1e-12);
}

TEST(Locate, EmbedFirstFactorization) {
  // flat = floor(v*16) = 5 -> EmbedFirst (dim 1, pos 1); secondary pos 2.
  const CellAssignment c = locate(5.5 / 16.0, EncodingScheme::EmbedFirst,
                                  kSmall);
  EXPECT_EQ(c.primary.dim, 1);
  EXPECT_EQ(c.primary.pos, 1);
  EXPECT_EQ(c.secondary.dim, 1);
  EXPECT_EQ(c.secondary.pos, 2);
}

TEST(Locate, OutOfRangeRejected) {
  EXPECT_THROW(locate(-0.001, EncodingScheme::SeqFirst, kSmall),
               std::invalid_argument);
  EXPECT_THROW(locate(1.001, EncodingScheme::SeqFirst, kSmall),
               std::invalid_argument);
}

TEST(Locate, SchemeDuality) {
  // Both schemes place v in the same flattened sub-interval; only the
  // (pos, dim) factorization differs.
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.uniform();
    const CellAssignment s = locate(v, EncodingScheme::SeqFirst, kDeskGrid);
    const CellAssignment e = locate(v, EncodingScheme::EmbedFirst, kDeskGrid);
    const auto flat_seq =
        static_cast<long>(s.primary.pos) * kDeskGrid.dims + s.primary.dim;
    const auto flat_emb =
        static_cast<long>(e.primary.dim) * kDeskGrid.length + e.primary.pos;
    ASSERT_EQ(flat_seq, flat_emb);
    ASSERT_DOUBLE_EQ(s.w_primary, e.w_primary);
  }
}

TEST(Locate, Monotonicity) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const double v1 = rng.uniform();
    const double v2 = rng.uniform();
    const double lo = std::min(v1, v2);
    const double hi = std::max(v1, v2);
    const CellAssignment a = locate(lo, EncodingScheme::SeqFirst, kDeskGrid);
    const CellAssignment b = locate(hi, EncodingScheme::SeqFirst, kDeskGrid);
    ASSERT_LE(static_cast<long>(a.primary.pos) * kDeskGrid.dims + a.primary.dim,
              static_cast<long>(b.primary.pos) * kDeskGrid.dims + b.primary.dim);
  }
}

TEST(Encode, EmptyInputGivesZeroGrid) {
  const EncodedGrid g = encode({}, EncodingScheme::SeqFirst, kSmall);
  EXPECT_DOUBLE_EQ(g.total(), 0.0);
}

TEST(Encode, CollisionsAccumulate) {
  const EncodedGrid g = encode({0.0, 0.0}, EncodingScheme::SeqFirst, kSmall);
  EXPECT_FLOAT_EQ(g.at(0, 0), 2.0f);
}

TEST(Encode, MassConservation) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 10 + static_cast<int>(rng.uniform() * 91);
    std::vector<double> vs(n);
    for (double& v : vs) v = rng.uniform();
    const EncodedGrid g = encode(vs, EncodingScheme::SeqFirst, kDeskGrid);
    ASSERT_NEAR(g.total(), n, 1e-4 * n);
  }
}

TEST(Encode, PermutationInvariance) {
  Rng rng(4);
  std::vector<double> vs(50);
  for (double& v : vs) v = rng.uniform();
  const EncodedGrid a = encode(vs, EncodingScheme::SeqFirst, kDeskGrid);
  std::vector<double> shuffled = vs;
  std::mt19937 urng(99);
  std::shuffle(shuffled.begin(), shuffled.end(), urng);
  const EncodedGrid b = encode(shuffled, EncodingScheme::SeqFirst, kDeskGrid);
  // Accumulation order may differ, so compare to float32 tolerance.
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    ASSERT_NEAR(a.weights[i], b.weights[i], 1e-5);
  }
}

TEST(Encode, TouchesAtMostTwoAdjacentCells) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const EncodedGrid g =
        encode({rng.uniform()}, EncodingScheme::SeqFirst, kDeskGrid);
    long occupied = 0;
    long first = -1;
    long last = -1;
    for (std::size_t c = 0; c < g.weights.size(); ++c) {
      if (g.weights[c] != 0.0f) {
        ++occupied;
        if (first < 0) first = static_cast<long>(c);
        last = static_cast<long>(c);
      }
    }
    ASSERT_LE(occupied, 2);
    if (occupied == 2) ASSERT_EQ(last - first, 1);
  }
}

TEST(DecodeSingle, RoundTripCenter) {
  for (auto scheme : {EncodingScheme::SeqFirst, EncodingScheme::EmbedFirst}) {
    const EncodedGrid g = encode({0.5}, scheme, kDeskGrid);
    EXPECT_NEAR(decode_single(g, scheme), 0.5, 1.0 / kDeskGrid.cells());
  }
}

TEST(DecodeSingle, RoundTripBoundary) {
  const EncodedGrid g = encode({1.0}, EncodingScheme::SeqFirst, kDeskGrid);
  EXPECT_NEAR(decode_single(g, EncodingScheme::SeqFirst), 1.0,
              1.0 / kDeskGrid.cells());
}

TEST(DecodeSingle, RoundTripRandomValues) {
  Rng rng(6);
  for (auto scheme : {EncodingScheme::SeqFirst, EncodingScheme::EmbedFirst}) {
    double max_err = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double v = rng.uniform();
      const EncodedGrid g = encode({v}, scheme, kDeskGrid);
      max_err = std::max(max_err, std::abs(decode_single(g, scheme) - v));
    }
    EXPECT_LE(max_err, 1.0 / kDeskGrid.cells());
  }
}

TEST(DecodeSingle, RejectsMultiObservationGrid) {
  const EncodedGrid g = encode({0.1, 0.9}, EncodingScheme::SeqFirst, kSmall);
  EXPECT_THROW(decode_single(g, EncodingScheme::SeqFirst),
               std::invalid_argument);
}

}  // namespace
}  // namespace parest
