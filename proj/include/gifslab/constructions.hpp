#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gifslab/engine.hpp"

namespace gifslab {

// Two-map (or four-map) GIFS together with the truncated space it acts on.
// The witnesses keep the individually named maps for inspection.
struct ScatteredGifsBundle {
  std::shared_ptr<const SpaceApprox> space;
  Gifs gifs;
  std::map<std::string, GifsMap> witnesses;
};

// Order-m GIFS on a cluster-decorated space, with the normalized cardinality
// profile (1 + p_1 + ... + p_n + (n+1) 2^{n+1}) / p_n.
struct MixedGifsBundle {
  std::shared_ptr<const SpaceApprox> space;
  Gifs gifs;
  std::vector<double> bound_profile;
};

struct AttractorReport {
  bool exact = false;
  std::size_t space_size = 0;
  std::size_t image_size = 0;
  std::vector<Address> missing;  // boundary addresses never produced
  std::size_t extra = 0;         // image entries outside the space (0 expected)
  double residual = 0.0;         // numeric Hausdorff between image and space
};

// Address-level attractor equation: the union of map images over all tuples of
// boundary addresses must equal the boundary address set. Requires symbolic
// maps.
AttractorReport verify_attractor_symbolic(const Gifs& G, const SpaceApprox& S);

// Point-level variant on all sites: exact means bitwise set equality.
AttractorReport verify_attractor_numeric(const Gifs& G, const SpaceApprox& S);

// Two-map GIFS for the height-alpha tree with n top-level limit points.
// n = 1: G retracts onto the first branch, F dispatches branch retractions.
// n >= 2: P surjects onto the first branch, Q onto its complement.
ScatteredGifsBundle gifs_scattered(OrdinalIndex alpha, std::uint32_t n, const GoodSequence& b,
                                   std::uint32_t D, std::uint32_t N);

// Four-map GIFS for a boundary set sandwiched between the no-1 tree and the
// at-most-one-1 tree: address surgeries composed with projections.
ScatteredGifsBundle gifs_sandwiched(const TreeSpec& M_tree, const GoodSequence& b, std::uint32_t D,
                                    std::uint32_t N);

// Order-m GIFS on the cluster-decorated space: the inner bundle's maps are
// lifted and composed with the projection onto the tree part; the cluster part
// is produced by one dispatch map plus p_1 constants.
MixedGifsBundle gifs_mixed(const ScatteredGifsBundle& M_bundle, const GoodPair& pair,
                           std::uint32_t m, std::uint32_t D, std::uint32_t N);

// c_n = (1 + p_1 + ... + p_{n-1} + n 2^n)^m / p_n as exact fractions, n = 1..n_max.
std::vector<std::pair<BigInt, BigInt>> nonattractor_bound_exact(const std::vector<BigInt>& p,
                                                                std::uint32_t m,
                                                                std::uint32_t n_max);
std::vector<double> nonattractor_bound(const std::vector<BigInt>& p, std::uint32_t m,
                                       std::uint32_t n_max);

// GIFS whose attractor has every connected component similar to the template:
// per-component similarities onto reindexed components, assembled by dispatch,
// plus the template GIFS conjugated into the first and the limit component.
ScatteredGifsBundle gifs_component_space(const Gifs& Z_gifs, const TemplateCloud& Z,
                                         const GoodSequence& b, std::uint32_t D, std::uint32_t N);

// Scaled copies of the template space at each point of K (diameter < eps/2,
// separation at least a copy diameter), with the per-copy GIFSs combined via
// separation projections. Hausdorff(K, result) < eps.
std::pair<SpaceApprox, Gifs> densify(const std::vector<Point>& K, double eps,
                                     const SpaceApprox& template_space, const Gifs& template_gifs);
std::pair<SpaceApprox, Gifs> densify(const std::vector<Point>& K, double eps,
                                     const ScatteredGifsBundle& bundle);
std::pair<SpaceApprox, Gifs> densify(const std::vector<Point>& K, double eps,
                                     const MixedGifsBundle& bundle);

}  // namespace gifslab
