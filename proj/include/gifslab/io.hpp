#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gifslab/constructions.hpp"
#include "json.hpp"

namespace gifslab {

using Json = nlohmann::ordered_json;

Json address_to_json(const Address& a);
Address address_from_json(const Json& j);
Json tree_to_json(const TreeSpec& t);
TreeSpec tree_from_json(const Json& j);
Json good_to_json(const GoodSequence& b);
GoodSequence good_from_json(const Json& j);
Json space_to_json(const SpaceApprox& s);
SpaceApprox space_from_json(const Json& j);

// Build recipe for a bundle. gifs.json stores it so verification can rebuild
// the construction deterministically instead of deserializing closures.
struct BundleRecipe {
  std::string kind;  // scattered | sandwiched | mixed | component-space | densify
  OrdinalIndex alpha = OrdinalIndex::fin(1);
  std::uint32_t n = 1;
  GoodSequence b = GoodSequence::geometric(1.0 / 30.0, 1.0 / 30.0);
  std::optional<TreeSpec> tree;    // sandwiched (defaults to the at-most-one-1 tree)
  std::vector<BigInt> p;           // mixed: cluster cardinalities
  std::uint32_t m = 2;             // mixed: order
  std::size_t z_count = 17;        // component-space: segment grid size
  std::vector<Point> K;            // densify
  double eps = 1.0;                // densify
  std::shared_ptr<BundleRecipe> inner;  // densify: template bundle recipe
  std::uint32_t D = 3, N = 5;
};

Json recipe_to_json(const BundleRecipe& r);
BundleRecipe recipe_from_json(const Json& j);

struct BuiltBundle {
  std::shared_ptr<const SpaceApprox> space;
  Gifs gifs;
  std::map<std::string, GifsMap> witnesses;
  std::vector<double> bound_profile;
};

BuiltBundle build_recipe(const BundleRecipe& r);

// Canonical four-map order-2 quarter IFS on the unit segment, Lip 1/4.
Gifs quarter_segment_gifs();

// Bundle directory layout: space.json, gifs.json, witnesses.json, report.json.
void write_bundle(const std::string& dir, const BundleRecipe& recipe, const BuiltBundle& built,
                  const Json& report);
BundleRecipe read_bundle_recipe(const std::string& dir);

std::string space_to_csv(const SpaceApprox& s);
std::string iteration_to_csv(const IterationResult& r);
std::string space_to_svg(const SpaceApprox& s);

std::string json_dump(const Json& j);
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gifslab
