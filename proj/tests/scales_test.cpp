#include <gtest/gtest.h>

#include <cmath>

#include "gifslab/scales.hpp"

namespace gifslab {
namespace {

TEST(GoodSequence, GeometricValues) {
  GoodSequence b = GoodSequence::geometric(1.0 / 30.0, 1.0 / 30.0);
  EXPECT_DOUBLE_EQ(b.b(0), 1.0 / 30.0);
  EXPECT_DOUBLE_EQ(b.b(1), 1.0 / 900.0);
  EXPECT_DOUBLE_EQ(b.b(3), std::pow(1.0 / 30.0, 4));
  EXPECT_DOUBLE_EQ(b.M(), 1.0 / 30.0);
  EXPECT_DOUBLE_EQ(b.lambda(), 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(b.ratio(1), 1.0 / 30.0);
  EXPECT_DOUBLE_EQ(b.ratio(17), 1.0 / 30.0);
  EXPECT_EQ(b.b(kOmegaWeight), 0.0);
}

TEST(GoodSequence, ShiftDropsLeadingTerms) {
  GoodSequence b = GoodSequence::geometric(1.0 / 30.0, 1.0 / 30.0);
  GoodSequence s = b.shifted(2);
  for (std::uint64_t k = 0; k <= 6; ++k) EXPECT_DOUBLE_EQ(s.b(k), b.b(k + 2));
  EXPECT_DOUBLE_EQ(shift(b, 3).b(0), b.b(3));
}

TEST(GoodSequence, RatioTableValues) {
  GoodSequence b = GoodSequence::ratio_table(0.5, {1.0 / 30.0, 1.0 / 40.0}, 1.0 / 50.0);
  EXPECT_DOUBLE_EQ(b.b(0), 0.5);
  EXPECT_DOUBLE_EQ(b.b(1), 0.5 / 30.0);
  EXPECT_DOUBLE_EQ(b.b(2), 0.5 / 30.0 / 40.0);
  EXPECT_DOUBLE_EQ(b.b(4), 0.5 / 30.0 / 40.0 / 50.0 / 50.0);
  EXPECT_DOUBLE_EQ(b.M(), 1.0 / 30.0);
  EXPECT_DOUBLE_EQ(b.ratio(2), 1.0 / 40.0);
  EXPECT_DOUBLE_EQ(b.ratio(9), 1.0 / 50.0);
}

TEST(ValidateGood, DefaultScalePassesFiftyTerms) {
  ScaleReport r = validate_good(GoodSequence::geometric(1.0 / 30.0, 1.0 / 30.0), 50);
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.failures.empty());
}

TEST(ValidateGood, SlowDecayRejectedAtConstruction) {
  // Ratios at or above 1/25 cannot form a valid scale, and the type refuses
  // to represent them.
  EXPECT_THROW(GoodSequence::geometric(1.0, 1.0 / 10.0), std::invalid_argument);
  EXPECT_THROW(GoodSequence::geometric(1.0, 1.0 / 25.0), std::invalid_argument);
  EXPECT_THROW(GoodSequence::ratio_table(1.0, {1.0 / 30.0, 1.0 / 20.0}, 1.0 / 30.0),
               std::invalid_argument);
  EXPECT_THROW(GoodSequence::geometric(1.0, 0.0), std::invalid_argument);
}

TEST(PForOrder, PowerMSquares) {
  auto p = p_for_order(2, 2, PMode::PowerM, 5);
  ASSERT_EQ(p.size(), 5u);
  EXPECT_EQ(p[0], 2);
  EXPECT_EQ(p[1], 4);
  EXPECT_EQ(p[2], 16);
  EXPECT_EQ(p[3], 256);
  EXPECT_EQ(p[4], 65536);
}

TEST(PForOrder, PowerNGrowsByIndex) {
  auto p = p_for_order(3, 2, PMode::PowerN, 5);
  ASSERT_EQ(p.size(), 5u);
  EXPECT_EQ(p[0], 2);
  EXPECT_EQ(p[1], 2);   // 2^1
  EXPECT_EQ(p[2], 4);   // 2^2
  EXPECT_EQ(p[3], 64);  // 4^3
  EXPECT_EQ(p[4], BigInt(64) * 64 * 64 * 64);
}

TEST(GoodPair, PAtExtendsConstantly) {
  GoodPair pair{GoodSequence::geometric(1.0 / 30.0, 1.0 / 30.0), {2, 4, 16}};
  EXPECT_EQ(pair.p_at(1), 2);
  EXPECT_EQ(pair.p_at(3), 16);
  EXPECT_EQ(pair.p_at(9), 16);
}

TEST(PairBForP, RealizedRatiosMatchTheFormulas) {
  auto p = p_for_order(2, 2, PMode::PowerM, 6);
  GoodPair pair = pair_b_for_p(p, 6);
  // q_1 = min{1/26, 1/(16(1+4*2))} = 1/144; lambda = 25/144.
  EXPECT_DOUBLE_EQ(pair.b.ratio(1), 1.0 / 144.0);
  EXPECT_DOUBLE_EQ(pair.b.lambda(), 25.0 / 144.0);
  // q_2 = min{1/26, 1/(16(1+16)), (25/144)/4} = 1/272.
  EXPECT_DOUBLE_EQ(pair.b.ratio(2), 1.0 / 272.0);
  // q_4 = min{1/26, 1/(16(1+4*256)), (25/144)/256} = 1/16400.
  EXPECT_DOUBLE_EQ(pair.b.ratio(4), 1.0 / 16400.0);
  EXPECT_TRUE(validate_good(pair.b, 20).ok);
}

TEST(PairBForP, CouplingInequalitiesHold) {
  auto p = p_for_order(2, 2, PMode::PowerM, 6);
  GoodPair pair = pair_b_for_p(p, 6);
  ScaleReport r = validate_pair(pair, 6);
  EXPECT_TRUE(r.ok) << (r.failures.empty() ? "" : r.failures.front());
}

TEST(PairBForP, MismatchedPairFails) {
  // A scale with no room for the clusters must be rejected.
  GoodPair bad{GoodSequence::geometric(1.0 / 30.0, 1.0 / 26.0), p_for_order(2, 1000, PMode::PowerM, 4)};
  EXPECT_FALSE(validate_pair(bad, 4).ok);
}

}  // namespace
}  // namespace gifslab
