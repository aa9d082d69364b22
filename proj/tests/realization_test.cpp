#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gifslab/engine.hpp"
#include "gifslab/realization.hpp"

namespace gifslab {
namespace {

Address addr(std::vector<std::uint32_t> raw) {
  std::vector<Entry> es;
  for (std::uint32_t v : raw) es.push_back(v == Entry::kOmegaRaw ? Entry::omega() : Entry::num(v));
  return Address(std::move(es));
}
constexpr std::uint32_t W = Entry::kOmegaRaw;

double interval_dist(const Interval& a, const Interval& b) {
  return std::max(a.lo - b.hi, b.lo - a.hi);
}

const GoodSequence kB = GoodSequence::geometric(1.0 / 30.0, 1.0 / 30.0);

TEST(BInterval, RootSpansTheFirstTwoScales) {
  Interval I = b_interval(kB, Address{}, 0.0);
  EXPECT_DOUBLE_EQ(I.lo, 0.0);
  EXPECT_DOUBLE_EQ(I.hi, kB.b(0) + kB.b(1));
}

TEST(BInterval, NestingGapAndMaxIdentity) {
  // Every child interval sits inside its parent; consecutive children are
  // separated by exactly b_{l+k-1} - 2 b_{l+k} - b_{l+k+1}; the first child
  // shares the parent's right endpoint.
  std::vector<Address> parents = {Address{}, addr({2}), addr({3, 1}), addr({1, 4, 2})};
  for (const Address& eta : parents) {
    Interval I = b_interval(kB, eta, 0.0);
    std::uint64_t l = weight(eta);
    EXPECT_DOUBLE_EQ(b_interval(kB, eta.appended(Entry::num(1)), 0.0).hi, I.hi);
    for (std::uint32_t k = 1; k <= 5; ++k) {
      Interval Ik = b_interval(kB, eta.appended(Entry::num(k)), 0.0);
      EXPECT_GE(Ik.lo, I.lo);
      EXPECT_LE(Ik.hi, I.hi);
      Interval Ik1 = b_interval(kB, eta.appended(Entry::num(k + 1)), 0.0);
      double want = kB.b(l + k - 1) - 2.0 * kB.b(l + k) - kB.b(l + k + 1);
      // Endpoints live at the root scale, so allow a few ulps of absolute
      // slack on top of the relative tolerance for the deepest gaps.
      EXPECT_NEAR(interval_dist(Ik, Ik1), want, 1e-12 * want + 1e-15);
    }
  }
}

TEST(SegmentGrid, UnitDiameterAnchors) {
  TemplateCloud Z = segment_grid(5);
  ASSERT_EQ(Z.points.size(), 5u);
  EXPECT_EQ(Z.dim, 1);
  EXPECT_DOUBLE_EQ(Z.diameter(), 1.0);
  EXPECT_DOUBLE_EQ(Z.points[1](0) - Z.points[0](0), 0.25);
}

TEST(RealizeSSpace, AddressIndexRoundTrip) {
  SpaceApprox S = realize_s_space(tree_lambda_alpha(OrdinalIndex::omega()), kB, 3, 4);
  EXPECT_EQ(S.points.size(), enumerate_boundary(S.tree, 3, 4).size());
  for (const auto& [ba, p] : S.points) {
    EXPECT_TRUE(S.has_address(ba.prefix));
    EXPECT_EQ(S.boundary_of(ba.prefix), ba);
    auto back = S.address_at(S.point_of(ba.prefix));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, ba.prefix);
  }
  EXPECT_FALSE(S.has_address(addr({9, 9, 9})));
}

TEST(RealizeSSpace, MetricConditionsHold) {
  for (const TreeSpec& t : {tree_lambda_max(), tree_lambda_alpha(OrdinalIndex::omega()),
                            tree_lambda_alpha_n(OrdinalIndex::fin(2), 2)}) {
    SpaceApprox S = realize_s_space(t, kB, 3, 4);
    SpaceReport r = verify_space_conditions(S);
    EXPECT_TRUE(r.ok) << "tree kind " << static_cast<int>(t.kind) << " min margin "
                      << r.min_margin;
    EXPECT_GT(r.min_gap, 0.0);
  }
}

TEST(RealizeSSpace, RepresentativesStayInTheirIntervals) {
  SpaceApprox S = realize_s_space(tree_lambda_max(), kB, 3, 3);
  for (const auto& [ba, p] : S.points) {
    Address node = ba.prefix.ends_with_omega() ? ba.prefix.prefix(ba.prefix.size() - 1)
                                               : ba.prefix;
    Interval I = b_interval(kB, node, 0.0);
    EXPECT_GE(p(0), I.lo - 1e-15);
    EXPECT_LE(p(0), I.hi + 1e-15);
  }
}

TEST(TruncationErrorBound, ShrinksUnderRefinementAndDominatesIt) {
  TreeSpec t = tree_lambda_max();
  double e34 = truncation_error_bound(t, kB, 3, 4);
  EXPECT_GT(truncation_error_bound(t, kB, 2, 4), e34);
  EXPECT_GT(truncation_error_bound(t, kB, 3, 3), e34);
  // Refining the truncation moves the cloud by at most the coarser bound.
  Cloud coarse = realize_s_space(t, kB, 2, 3).all_sites();
  Cloud fine = realize_s_space(t, kB, 3, 5).all_sites();
  EXPECT_LE(hausdorff(coarse, fine), truncation_error_bound(t, kB, 2, 3) + 1e-15);
}

TEST(RealizeZSpace, CopyDiametersFollowTheScale) {
  TemplateCloud Z = segment_grid(9);
  SpaceApprox S = realize_z_space(tree_lambda_alpha(OrdinalIndex::fin(1)), kB, Z, 2, 3);
  ASSERT_FALSE(S.copies.empty());
  auto diam = [](const std::vector<Point>& pts) {
    double d = 0.0;
    for (const Point& a : pts)
      for (const Point& b : pts) d = std::max(d, (a - b).norm());
    return d;
  };
  for (const auto& [ba, pts] : S.copies) {
    const Address& eta = ba.prefix;
    double want = eta.ends_with_omega()
                      ? kB.b(weight(eta.prefix(eta.size() - 1)) + 1)
                      : kB.b(weight(eta)) + kB.b(weight(eta) + 1);
    if (eta.empty()) continue;
    EXPECT_NEAR(diam(pts), want, 1e-12 * want) << eta.to_path();
  }
  EXPECT_TRUE(verify_space_conditions(S).ok);
}

TEST(RealizeBpSpace, ClustersPresentAndConditionsHold) {
  auto p = p_for_order(2, 2, PMode::PowerM, 5);
  GoodPair pair = pair_b_for_p(p, 6);
  SpaceApprox S = realize_bp_space(tree_lambda_alpha(OrdinalIndex::fin(1)), pair, 3, 4);
  ASSERT_FALSE(S.cluster_points.empty());
  // Cluster k holds p_k points.
  for (const auto& [k, pts] : S.cluster_points)
    EXPECT_EQ(BigInt(pts.size()), pair.p_at(k)) << "cluster " << k;
  EXPECT_TRUE(verify_space_conditions(S).ok);
}

TEST(PointKey, BitwiseIdentity) {
  Point a(1), b(1);
  a << 0.1;
  b << 0.1 + 1e-18;
  EXPECT_EQ(point_key(a), point_key(a));
  EXPECT_EQ(point_key(a), point_key(b));  // same double after rounding
  b << 0.2;
  EXPECT_NE(point_key(a), point_key(b));
}

}  // namespace
}  // namespace gifslab
