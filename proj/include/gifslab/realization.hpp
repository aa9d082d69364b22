#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gifslab/scales.hpp"
#include "gifslab/symbolic.hpp"

namespace gifslab {

using Point = Eigen::VectorXd;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double diam() const { return hi - lo; }
};

// Interval of the nested b-family at address eta.
Interval b_interval(const GoodSequence& b, const Address& eta, double origin);

// Template compactum: point cloud with a distinguished diameter-realizing
// anchor pair.
struct TemplateCloud {
  int dim = 1;
  std::vector<Point> points;
  std::size_t anchor_min = 0;
  std::size_t anchor_max = 0;

  double diameter() const { return (points[anchor_max] - points[anchor_min]).norm(); }
};

TemplateCloud segment_grid(std::size_t count);  // count >= 2 points on [0,1]

// Finite truncation of a realized space: one representative point per
// enumerated boundary address, optional root-level clusters (Y_k), optional
// per-leaf template copies, and a rigorous Hausdorff bound on the cut content.
struct SpaceApprox {
  TreeSpec tree;
  GoodSequence b = GoodSequence::geometric(1.0, 1.0 / 30.0);
  int dim = 1;
  std::uint32_t D = 0, N = 0;
  double origin = 0.0;
  std::vector<std::pair<BoundaryAddress, Point>> points;
  std::vector<std::pair<std::uint32_t, std::vector<Point>>> cluster_points;
  std::vector<std::pair<BoundaryAddress, std::vector<Point>>> copies;
  double error_bound = 0.0;

  // Every site of the cloud: template copies (or representative points when
  // there are none) followed by cluster points.
  std::vector<Point> all_sites() const;

  const Point& point_of(const Address& addr) const;
  const BoundaryAddress& boundary_of(const Address& addr) const;
  bool has_address(const Address& addr) const;
  std::optional<Address> address_at(const Point& p) const;  // bitwise match

  void rebuild_index();

 private:
  std::unordered_map<Address, std::size_t, AddressHash> index_;
  std::unordered_map<std::string, std::size_t, std::hash<std::string>> point_index_;
};

std::string point_key(const Point& p);

SpaceApprox realize_s_space(const TreeSpec& tree, const GoodSequence& b, std::uint32_t D,
                            std::uint32_t N, double origin = 0.0);

SpaceApprox realize_bp_space(const TreeSpec& tree, const GoodPair& pair, std::uint32_t D,
                             std::uint32_t N, double origin = 0.0);

SpaceApprox realize_z_space(const TreeSpec& tree, const GoodSequence& b, const TemplateCloud& Z,
                            std::uint32_t D, std::uint32_t N, double origin = 0.0);

// Hausdorff bound for content cut by the (D,N)-truncation.
double truncation_error_bound(const TreeSpec& tree, const GoodSequence& b, std::uint32_t D,
                              std::uint32_t N);

struct ConditionCheck {
  std::string label;
  double margin = 0.0;  // >= -tolerance means pass
  bool pass = true;
};

struct SpaceReport {
  bool ok = true;
  std::vector<ConditionCheck> checks;
  double min_margin = 0.0;
  // Smallest separation margin seen in the child-separation checks; useful as
  // a clustering gap.
  double min_gap = 0.0;
};

// Metric conditions of the space definition on the finite cloud: child
// separation and tail diameter at every interior node, the two-sided
// limit-point inequalities (factors 2 and 3), and the cluster observations
// for bp-spaces. Absolute tolerance 1e-9.
SpaceReport verify_space_conditions(const SpaceApprox& S);

}  // namespace gifslab
