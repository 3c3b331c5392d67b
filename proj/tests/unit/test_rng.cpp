#include <gtest/gtest.h>

#include <map>
#include <random>

#include "synql/rng.hpp"

using synql::RandomStream;

TEST(Rng, EngineMatchesStandardSequence) {
  // The standard fixes the 10000th output of a default-constructed engine.
  std::mt19937_64 e;
  e.discard(9999);
  EXPECT_EQ(e(), 9981545732273789042ULL);
}

TEST(Rng, SplitmixReferenceValue) {
  // First output of the reference splitmix64 generator seeded with 0.
  EXPECT_EQ(synql::splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Rng, SameSeedSameStream) {
  RandomStream a(7), b(7);
  for (int i = 0; i < 100; ++i) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
  }
}

TEST(Rng, QueryStreamsAreIndependentOfOrder) {
  RandomStream q5 = RandomStream::for_query(42, 5);
  const auto first = q5.next_u64();
  for (int i = 0; i < 5; ++i) {
    RandomStream::for_query(42, i).next_u64();
  }
  EXPECT_EQ(RandomStream::for_query(42, 5).next_u64(), first);
  EXPECT_NE(RandomStream::for_query(42, 6).next_u64(), first);
  EXPECT_NE(RandomStream::for_query(43, 5).next_u64(), first);
}

TEST(Rng, UniformIntInclusiveBounds) {
  RandomStream r(1);
  std::map<std::int64_t, int> seen;
  for (int i = 0; i < 6000; ++i) {
    const auto v = r.uniform_int(1, 3);
    ASSERT_GE(v, 1);
    ASSERT_LE(v, 3);
    ++seen[v];
  }
  EXPECT_EQ(seen.size(), 3u);
  for (const auto& [v, n] : seen) {
    EXPECT_NEAR(n, 2000, 200) << v;
  }
  EXPECT_EQ(r.uniform_int(5, 5), 5);
  EXPECT_THROW(r.uniform_int(2, 1), std::invalid_argument);
  EXPECT_THROW(r.uniform_below(0), std::invalid_argument);
}

TEST(Rng, Uniform01Range) {
  RandomStream r(3);
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000, 0.5, 0.02);
}
