#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "captive/random.hpp"

using namespace captive;

// Known-answer vectors of the Philox4x32-10 reference implementation.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomSource, PureFunctionOfCoordinates) {
  const RandomSource a(42, 7);
  const RandomSource b(42, 7);
  for (std::uint64_t i = 0; i < 50; ++i) {
    EXPECT_EQ(a.words(Stream::brownian, i), b.words(Stream::brownian, i));
    EXPECT_EQ(a.uniform(Stream::jumps, i), b.uniform(Stream::jumps, i));
  }
  // Any coordinate change gives a different block.
  EXPECT_NE(a.words(Stream::brownian, 0), RandomSource(43, 7).words(Stream::brownian, 0));
  EXPECT_NE(a.words(Stream::brownian, 0), RandomSource(42, 8).words(Stream::brownian, 0));
  EXPECT_NE(a.words(Stream::brownian, 0), a.words(Stream::brownian2, 0));
  EXPECT_NE(a.words(Stream::brownian, 0), a.words(Stream::brownian, 1));
}

TEST(RandomSource, FillMatchesWords) {
  const RandomSource s(9, 3);
  std::vector<std::uint64_t> a(17), b(17);
  s.fill_words(Stream::theta, 100, a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto w = s.words(Stream::theta, 100 + i);
    EXPECT_EQ(a[i], w[0]);
    EXPECT_EQ(b[i], w[1]);
  }
}

TEST(RandomSource, UniformRanges) {
  const RandomSource s(1, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform(Stream::jumps, i);
    const double v = s.uniform_pos(Stream::jumps, i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    EXPECT_EQ(u + v, 1.0);
    sum += u;
  }
  // mean of U[0,1): 0.5 with sd 1/sqrt(12 n)
  EXPECT_NEAR(sum / n, 0.5, 5.0 / std::sqrt(12.0 * n));
}

TEST(RandomSource, UniformFromBitsEdges) {
  EXPECT_EQ(uniform_from_bits(0), 0.0);
  EXPECT_LT(uniform_from_bits(~0ull), 1.0);
  EXPECT_EQ(uniform_from_bits(1ull << 63), 0.5);
}

// Uniforms within one stream should show no repeated 52-bit values over a
// modest sample and equidistribute over 16 bins.
TEST(RandomSource, BinsAreBalanced) {
  const RandomSource s(77, 5);
  std::vector<int> bins(16, 0);
  std::set<double> seen;
  const int n = 64000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform(Stream::brownian, i);
    seen.insert(u);
    ++bins[static_cast<int>(u * 16)];
  }
  EXPECT_EQ(seen.size(), static_cast<std::size_t>(n));
  double chi2 = 0.0;
  for (int c : bins) chi2 += (c - n / 16.0) * (c - n / 16.0) / (n / 16.0);
  EXPECT_LT(chi2, 37.7);  // 0.999 quantile, 15 dof
}
