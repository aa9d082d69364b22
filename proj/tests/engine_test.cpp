#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "gifslab/engine.hpp"

namespace gifslab {
namespace {

Point pt(double x) {
  Point p(1);
  p << x;
  return p;
}

Cloud cloud(std::initializer_list<double> xs) {
  Cloud c;
  for (double x : xs) c.push_back(pt(x));
  return c;
}

GifsMap numeric1(std::string name, std::function<double(double)> f, double claimed) {
  GifsMap m;
  m.order = 1;
  m.name = std::move(name);
  m.claimed_lip = claimed;
  m.numeric_fn = [f = std::move(f)](const std::vector<Point>& xs) { return pt(f(xs[0](0))); };
  return m;
}

Address addr(std::vector<std::uint32_t> raw) {
  std::vector<Entry> es;
  for (std::uint32_t v : raw) es.push_back(v == Entry::kOmegaRaw ? Entry::omega() : Entry::num(v));
  return Address(std::move(es));
}
constexpr std::uint32_t W = Entry::kOmegaRaw;

TEST(Hausdorff, FiniteSetBasics) {
  EXPECT_DOUBLE_EQ(hausdorff(cloud({0}), cloud({0})), 0.0);
  EXPECT_DOUBLE_EQ(hausdorff(cloud({0}), cloud({3})), 3.0);
  EXPECT_DOUBLE_EQ(hausdorff(cloud({0, 1}), cloud({0.5})), 0.5);
  EXPECT_DOUBLE_EQ(hausdorff(cloud({0, 1, 2}), cloud({0, 2})), 1.0);
}

TEST(HutchinsonStep, ConstantDyadicAndOrderTwo) {
  Gifs constant{{numeric1("c", [](double) { return 7.0; }, 0.0)}};
  EXPECT_EQ(hutchinson_step(constant, cloud({1, 2, 3})), cloud({7}));

  Gifs dyadic{{numeric1("a", [](double x) { return x / 2; }, 0.5),
               numeric1("b", [](double x) { return x / 2 + 0.5; }, 0.5)}};
  Cloud step = hutchinson_step(dyadic, cloud({0}));
  std::sort(step.begin(), step.end(), [](const Point& a, const Point& b) { return a(0) < b(0); });
  EXPECT_EQ(step, cloud({0, 0.5}));

  GifsMap minmap;
  minmap.order = 2;
  minmap.name = "min";
  minmap.numeric_fn = [](const std::vector<Point>& xs) {
    return pt(std::min(xs[0](0), xs[1](0)));
  };
  Cloud out = hutchinson_step(Gifs{{minmap}}, cloud({0, 1}));
  std::sort(out.begin(), out.end(), [](const Point& a, const Point& b) { return a(0) < b(0); });
  EXPECT_EQ(out, cloud({0, 1}));
}

TEST(LipschitzEstimate, ExhaustiveOnSmallClouds) {
  LipEstimate half = lipschitz_estimate_cloud(
      numeric1("half", [](double x) { return x / 2; }, 0.5), cloud({0, 1, 2}));
  EXPECT_TRUE(half.exhaustive);
  EXPECT_DOUBLE_EQ(half.value, 0.5);

  LipEstimate con = lipschitz_estimate_cloud(
      numeric1("const", [](double) { return 1.0; }, 0.0), cloud({0, 1, 2}));
  EXPECT_DOUBLE_EQ(con.value, 0.0);

  // Piecewise map with slope 2 between 1 and 1.5 only.
  LipEstimate steep = lipschitz_estimate_cloud(
      numeric1("steep", [](double x) { return x > 1.0 ? 2 * x - 1 : x; }, 2.0),
      cloud({0, 1, 1.5}));
  EXPECT_DOUBLE_EQ(steep.value, 2.0);
}

TEST(IterateToAttractor, DyadicHistoryHalves) {
  Gifs dyadic{{numeric1("a", [](double x) { return x / 2; }, 0.5),
               numeric1("b", [](double x) { return x / 2 + 0.5; }, 0.5)}};
  IterationResult r = iterate_to_attractor(dyadic, cloud({0}), 1e-4, 40, 0.0);
  EXPECT_TRUE(r.converged);
  ASSERT_GE(r.history.size(), 3u);
  for (std::size_t n = 0; n + 1 < r.history.size(); ++n)
    EXPECT_NEAR(r.history[n], std::pow(0.5, n + 1), 1e-12);
  // |A_n| doubles until the stop threshold.
  EXPECT_EQ(r.sizes.front(), 2u);
  EXPECT_EQ(r.sizes[1], 4u);
  EXPECT_LE(r.history.back(), 1e-4);
}

TEST(IterateToAttractor, ConstantMapConvergesImmediately) {
  Gifs constant{{numeric1("c", [](double) { return 3.0; }, 0.0)}};
  IterationResult r = iterate_to_attractor(constant, cloud({0}), 1e-9, 10, 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.set, cloud({3}));
  ASSERT_GE(r.history.size(), 1u);
  EXPECT_DOUBLE_EQ(r.history.front(), 3.0);
  EXPECT_DOUBLE_EQ(r.history.back(), 0.0);
}

TEST(IterateToAttractor, DeltaNetKeepsTheSetSmall) {
  Gifs dyadic{{numeric1("a", [](double x) { return x / 2; }, 0.5),
               numeric1("b", [](double x) { return x / 2 + 0.5; }, 0.5)}};
  IterationResult coarse = iterate_to_attractor(dyadic, cloud({0}), 1e-3, 40, 1.0 / 16.0);
  IterationResult fine = iterate_to_attractor(dyadic, cloud({0}), 1e-3, 40, 0.0);
  EXPECT_LT(coarse.set.size(), fine.set.size());
  EXPECT_LE(hausdorff(coarse.set, fine.set), 1e-3 / 0.5 + 2.0 * (1.0 / 16.0));
}

TEST(LiftOrder, EvaluatesOnTheFirstCoordinates) {
  GifsMap half = numeric1("half", [](double x) { return x / 2; }, 0.5);
  GifsMap lifted = lift_order(half, 3);
  EXPECT_EQ(lifted.order, 3);
  EXPECT_DOUBLE_EQ(lifted.eval({pt(4), pt(100), pt(-5)})(0), 2.0);
  EXPECT_EQ(lifted.claimed_lip, half.claimed_lip);
  EXPECT_THROW(lift_order(lifted, 2), std::invalid_argument);
}

TEST(LiftOrder, AttractorPreservedUnderLifting) {
  GifsMap a = numeric1("a", [](double x) { return x / 2; }, 0.5);
  GifsMap b = numeric1("b", [](double x) { return x / 2 + 0.5; }, 0.5);
  Gifs lifted{{lift_order(a, 2), lift_order(b, 2)}};
  IterationResult r = iterate_to_attractor(lifted, cloud({0}), 1e-3, 12, 0.0);
  IterationResult base = iterate_to_attractor(Gifs{{a, b}}, cloud({0}), 1e-3, 12, 0.0);
  EXPECT_DOUBLE_EQ(hausdorff(r.set, base.set), 0.0);
}

TEST(CombineSeparated, TwoSingletonParts) {
  SpaceApprox s0 = realize_s_space(tree_lambda_alpha(OrdinalIndex::fin(0)),
                                   GoodSequence::geometric(1.0 / 30.0, 1.0 / 30.0), 1, 1, 0.0);
  SpaceApprox s1 = realize_s_space(tree_lambda_alpha(OrdinalIndex::fin(0)),
                                   GoodSequence::geometric(1.0 / 30.0, 1.0 / 30.0), 1, 1, 10.0);
  double x0 = s0.all_sites().front()(0);
  double x1 = s1.all_sites().front()(0);
  Gifs g0{{numeric1("c0", [x0](double) { return x0; }, 0.0)}};
  Gifs g1{{numeric1("c1", [x1](double) { return x1; }, 0.0)}};
  Gifs combined = combine_separated({{&s0, &g0}, {&s1, &g1}});
  ASSERT_EQ(combined.maps.size(), 2u);
  IterationResult r = iterate_to_attractor(combined, cloud({0}), 1e-9, 10, 0.0);
  Cloud want = {pt(x0), pt(x1)};
  EXPECT_DOUBLE_EQ(hausdorff(r.set, want), 0.0);
}

TEST(TreeRetraction, FixesTargetAndClosesWithOmega) {
  auto b = GoodSequence::geometric(1.0 / 30.0, 1.0 / 30.0);
  auto host = std::make_shared<SpaceApprox>(realize_s_space(tree_lambda_max(), b, 2, 3));
  auto target = std::make_shared<SpaceApprox>(realize_s_space(tree_lambda_s(), b, 2, 3));
  GifsMap r = tree_retraction(host, tree_lambda_s(), target);
  // Addresses already in the target are fixed.
  EXPECT_EQ(r.eval_addresses({host->boundary_of(addr({2, W}))}).prefix, addr({2, W}));
  // Addresses outside drop to the longest prefix in the target, closed by the
  // largest admissible child.
  EXPECT_EQ(r.eval_addresses({{addr({1, 3}), Exactness::TruncatedPath}}).prefix, addr({W}));
  EXPECT_EQ(r.eval_addresses({{addr({2, 1}), Exactness::TruncatedPath}}).prefix, addr({2, W}));
  LipEstimate lip = lipschitz_estimate(r, *host);
  EXPECT_LE(lip.value, 2.0 + 1e-12);
}

TEST(AssembleDispatchMap, DispatchesOnTheSecondArgument) {
  auto b = GoodSequence::geometric(1.0 / 30.0, 1.0 / 30.0);
  auto host =
      std::make_shared<SpaceApprox>(realize_s_space(tree_lambda_alpha(OrdinalIndex::fin(1)), b, 2, 3));
  auto constant = [&](const Address& a) {
    GifsMap m;
    m.order = 1;
    m.name = "const " + a.to_path();
    m.host = host;
    BoundaryAddress v = host->boundary_of(a);
    m.symbolic_rule = [v](const std::vector<BoundaryAddress>&) { return v; };
    return m;
  };
  std::map<std::uint32_t, GifsMap> sections;
  sections[1] = constant(addr({2}));
  sections[2] = constant(addr({3}));
  sections[3] = constant(addr({1}));
  GifsMap F = assemble_dispatch_map(sections, constant(addr({W})), host);
  EXPECT_EQ(F.order, 2);
  BoundaryAddress x = host->boundary_of(addr({1}));
  EXPECT_EQ(F.eval_addresses({x, host->boundary_of(addr({2}))}).prefix, addr({3}));
  EXPECT_EQ(F.eval_addresses({x, host->boundary_of(addr({1}))}).prefix, addr({2}));
  EXPECT_EQ(F.eval_addresses({x, host->boundary_of(addr({W}))}).prefix, addr({W}));
}

TEST(ComponentQuotient, SingleLinkageAtTheGap) {
  Cloud c = cloud({0, 0.1, 0.2, 5.0, 5.1});
  auto [reps, assignment] = component_quotient(c, 1.0);
  ASSERT_EQ(reps.size(), 2u);
  EXPECT_DOUBLE_EQ(reps[0](0), 0.0);
  EXPECT_DOUBLE_EQ(reps[1](0), 5.0);
  EXPECT_DOUBLE_EQ(assignment.gap, 1.0);
  EXPECT_EQ(assignment.labels[0], assignment.labels[1]);
  EXPECT_EQ(assignment.labels[1], assignment.labels[2]);
  EXPECT_EQ(assignment.labels[3], assignment.labels[4]);
  EXPECT_NE(assignment.labels[0], assignment.labels[3]);
  EXPECT_EQ(assignment.component_of(pt(0.2)), assignment.labels[0]);

  // Below the chain spacing every point becomes its own component.
  auto [reps5, a5] = component_quotient(c, 0.05);
  EXPECT_EQ(reps5.size(), 5u);
}

TEST(QuotientGifs, InducedMapSwapsComponents) {
  Cloud c = cloud({0, 0.1, 5.0, 5.1});
  auto [reps, assignment] = component_quotient(c, 1.0);
  ASSERT_EQ(reps.size(), 2u);
  GifsMap swap = numeric1("swap", [](double x) { return x < 2.5 ? 5.0 : 0.0; }, 1.0);
  Gifs q = quotient_gifs(Gifs{{swap}}, assignment);
  ASSERT_EQ(q.maps.size(), 1u);
  EXPECT_DOUBLE_EQ(q.maps[0].eval({reps[0]})(0), reps[1](0));
  EXPECT_DOUBLE_EQ(q.maps[0].eval({reps[1]})(0), reps[0](0));
}

TEST(QuotientGifs, SplittingACellIsRejected) {
  Cloud c = cloud({0, 0.1, 5.0, 5.1});
  auto [reps, assignment] = component_quotient(c, 1.0);
  GifsMap split = numeric1("split", [](double x) { return x == 0.0 ? 0.0 : 5.0; }, 1.0);
  EXPECT_THROW(quotient_gifs(Gifs{{split}}, assignment), std::runtime_error);
}

}  // namespace
}  // namespace gifslab
