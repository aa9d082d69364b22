#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gifslab/realization.hpp"

namespace gifslab {

using Cloud = std::vector<Point>;

// Exact Hausdorff distance between finite nonempty sets.
double hausdorff(const Cloud& A, const Cloud& B);

// Order-m map with a symbolic (address-level, over a host cloud) or numeric
// backend. Symbolic maps evaluate points by exact host lookup, so attractor
// equations can be checked as address-set equalities.
struct GifsMap {
  int order = 1;
  std::string name;
  std::optional<double> claimed_lip;
  std::shared_ptr<const SpaceApprox> host;
  std::function<BoundaryAddress(const std::vector<BoundaryAddress>&)> symbolic_rule;
  std::function<Point(const std::vector<Point>&)> numeric_fn;

  bool symbolic() const { return static_cast<bool>(symbolic_rule); }
  Point eval(const std::vector<Point>& xs) const;
  BoundaryAddress eval_addresses(const std::vector<BoundaryAddress>& xs) const;
};

struct Gifs {
  std::vector<GifsMap> maps;
  int order() const;
};

struct LipEstimate {
  double value = 0.0;
  bool exhaustive = false;  // true when the reported value is the exact maximum
  std::uint64_t pairs = 0;
};

// Largest observed d(f(x), f(y)) / d_m(x, y). Exhaustive when the pair count
// fits the budget or when the order-2 value table admits column grouping
// (then the reported maximum equals the brute-force maximum over all tuple
// pairs); otherwise a seeded random lower bound.
LipEstimate lipschitz_estimate(const GifsMap& f, const SpaceApprox& sample,
                               std::uint64_t seed = 42);
LipEstimate lipschitz_estimate_cloud(const GifsMap& f, const Cloud& sample,
                                     std::uint64_t seed = 42);

// One application of the generalized Hutchinson operator, bitwise-deduplicated.
Cloud hutchinson_step(const Gifs& G, const Cloud& A);

struct IterationResult {
  Cloud set;
  std::vector<double> history;     // h(A_n, A_{n+1}) per step
  std::vector<std::size_t> sizes;  // |A_{n+1}| per step
  bool converged = false;
};

IterationResult iterate_to_attractor(const Gifs& G, const Cloud& seed, double tol,
                                     std::uint32_t max_iter, double delta);

GifsMap lift_order(const GifsMap& f, int m);

// Lemma-style combination of GIFSs living on well-separated parts: every map
// is precomposed with the projection fixing its own part and collapsing the
// others to an anchor. Requires max diam / min dist < 1 / max Lip.
Gifs combine_separated(const std::vector<std::pair<const SpaceApprox*, const Gifs*>>& parts);

// Retraction of the host's truncated boundary onto the boundary of a subtree:
// drop to the longest prefix inside the target tree, then extend by the
// biggest admissible child (omega first). Fixes addresses already in the
// target; Lip <= 2 * sup_k b_target(k) / b_host(k).
GifsMap tree_retraction(std::shared_ptr<const SpaceApprox> host, const TreeSpec& target_tree,
                        std::shared_ptr<const SpaceApprox> target);

// Order-2 dispatch map F(x, y) = h_{k+1}(x) when y lies in the k-th branch;
// omega_section handles y in the omega branch. sections is keyed by the branch
// index of y. Claimed Lip: lambda_b / 2 of the host scale.
GifsMap assemble_dispatch_map(std::map<std::uint32_t, GifsMap> sections, GifsMap omega_section,
                              std::shared_ptr<const SpaceApprox> host);

struct ComponentAssignment {
  Cloud cloud;
  double gap = 0.0;                    // clustering threshold the labels were built at
  std::vector<std::size_t> labels;     // per cloud index
  std::vector<Point> representatives;  // per component id (lexicographically smallest point)

  std::size_t component_of(const Point& p) const;  // bitwise membership
};

// Single-linkage clustering at the gap threshold; returns the representative
// cloud and the assignment.
std::pair<Cloud, ComponentAssignment> component_quotient(const Cloud& cloud, double gap);

// Induced GIFS on component representatives; throws (with a witness tuple in
// the message) if some map splits a component cell.
Gifs quotient_gifs(const Gifs& G, const ComponentAssignment& assignment);

}  // namespace gifslab
