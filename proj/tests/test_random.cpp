#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <robustgame/random.hpp>

using robustgame::random::NormalStream;
using robustgame::random::Philox4x32;

// Known-answer vectors from the Random123 distribution.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}),
            (Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                 {0xffffffff, 0xffffffff}),
            (Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                 {0xa4093822, 0x299f31d0}),
            (Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(NormalStream, IndexedAccessMatchesFill) {
  const NormalStream rng(42, 7);
  std::vector<double> seq(101);
  rng.fill(seq.begin(), seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) EXPECT_EQ(seq[i], rng[i]);
}

TEST(NormalStream, StreamsDiffer) {
  const NormalStream a(42, 0), b(42, 1), c(43, 0);
  EXPECT_NE(a[0], b[0]);
  EXPECT_NE(a[0], c[0]);
}

TEST(NormalStream, Moments) {
  const NormalStream rng(1, 3);
  const std::size_t count = 400000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double z = rng[i];
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  const double n = static_cast<double>(count);
  EXPECT_LT(std::abs(s1 / n), 4.0 / std::sqrt(n));
  EXPECT_LT(std::abs(s2 / n - 1.0), 4.0 * std::sqrt(2.0 / n));
  EXPECT_LT(std::abs(s4 / n - 3.0), 4.0 * std::sqrt(96.0 / n));
}

TEST(NormalStream, UniformsInOpenInterval) {
  const NormalStream rng(9, 0);
  double sum = 0.0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = rng.uniform(i);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 100000.0));
}
