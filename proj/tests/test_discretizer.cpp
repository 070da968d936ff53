#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "bmu/discretizer.hpp"
#include "bmu/random.hpp"

using namespace bmu;

TEST(Discretizer, ZeroStateIsCentreBin) {
  const DiscreteState d = discretize(CartState{}, BinSpec{});
  EXPECT_EQ(d.bins, (Bins{5, 5, 5, 5}));
  EXPECT_EQ(d.key, "5_5_5_5_");
}

TEST(Discretizer, LowerAndUpperBounds) {
  const BinSpec spec;
  CartState lo{spec.lower[0], spec.lower[1], spec.lower[2], spec.lower[3], 0};
  CartState hi{spec.upper[0], spec.upper[1], spec.upper[2], spec.upper[3], 0};
  EXPECT_EQ(discretize(lo, spec).bins, (Bins{0, 0, 0, 0}));
  EXPECT_EQ(discretize(hi, spec).bins, (Bins{9, 9, 9, 9}));
  CartState far{-100, 100, -1, 50, 0};
  EXPECT_EQ(discretize(far, spec).bins, (Bins{0, 9, 0, 9}));
}

TEST(Discretizer, HalfOpenEdges) {
  // Bin width 0.48 for x in [-2.4, 2.4].
  EXPECT_EQ(bin_index(-2.4 + 0.48, -2.4, 2.4, 10), 1);
  EXPECT_EQ(bin_index(std::nextafter(-2.4 + 0.48, -3.0), -2.4, 2.4, 10), 0);
  EXPECT_EQ(bin_index(-1e-12, -2.4, 2.4, 10), 4);
}

TEST(Discretizer, NanRejected) {
  EXPECT_THROW(bin_index(std::numeric_limits<double>::quiet_NaN(), 0, 1, 10), DomainError);
}

TEST(Discretizer, MonotoneInEachComponent) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double a = rng.uniform(-5, 5), b = rng.uniform(-5, 5);
    const double lo = std::min(a, b), hi = std::max(a, b);
    EXPECT_LE(bin_index(lo, -3.0, 3.0, 10), bin_index(hi, -3.0, 3.0, 10));
  }
}

TEST(Discretizer, MirrorSymmetryAwayFromEdges) {
  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.uniform(-3.5, 3.5);
    const int b = bin_index(v, -3.5, 3.5, 10);
    const int m = bin_index(-v, -3.5, 3.5, 10);
    // Off an edge, mirrored values land in mirrored bins.
    const double scaled = 10.0 * (v + 3.5) / 7.0;
    if (std::abs(scaled - std::round(scaled)) > 1e-9) {
      EXPECT_EQ(b + m, 9);
    }
  }
}

TEST(Discretizer, KeyFormat) {
  EXPECT_EQ(key_of({3, 4, 6, 5}), "3_4_6_5_");
  EXPECT_EQ(parse_key("5_5_5_5_"), (Bins{5, 5, 5, 5}));
  EXPECT_EQ(parse_key("10_0_9_12_"), (Bins{10, 0, 9, 12}));
}

TEST(Discretizer, KeyRoundTrip) {
  Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    Bins b{rng.below(10), rng.below(10), rng.below(10), rng.below(10)};
    EXPECT_EQ(parse_key(key_of(b)), b);
  }
}

TEST(Discretizer, MalformedKeyNamesToken) {
  try {
    parse_key("5_5_x_5_");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
  }
  EXPECT_THROW(parse_key("5_5_5_"), ParseError);
  EXPECT_THROW(parse_key("5_5_5_5"), ParseError);
  EXPECT_THROW(parse_key("5_5_5_5_7"), ParseError);
  EXPECT_THROW(parse_key("5__5_5_"), ParseError);
  EXPECT_THROW(parse_key("-1_5_5_5_"), ParseError);
}

TEST(Discretizer, SpecValidation) {
  BinSpec s;
  s.n_bins = 1;
  EXPECT_THROW(s.validate(), DomainError);
  s = {};
  s.lower[2] = s.upper[2];
  EXPECT_THROW(s.validate(), DomainError);
}
