#include "gifslab/realization.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace gifslab {

namespace {

double canonical(double v) { return v == 0.0 ? 0.0 : v; }

// Extended index arithmetic: weights may be the omega sentinel.
std::uint64_t wplus(std::uint64_t l, std::uint64_t d) {
  return l == kOmegaWeight ? kOmegaWeight : l + d;
}

}  // namespace

std::string point_key(const Point& p) {
  std::string key(sizeof(double) * static_cast<std::size_t>(p.size()), '\0');
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double v = canonical(p[i]);
    std::memcpy(key.data() + sizeof(double) * static_cast<std::size_t>(i), &v, sizeof(double));
  }
  return key;
}

Interval b_interval(const GoodSequence& b, const Address& eta, double origin) {
  if (!eta.omega_only_last()) throw std::invalid_argument("b_interval: omega must be last");
  double lo = origin;
  double hi = origin + b.b(0) + b.b(1);
  std::uint64_t l = 0;
  for (const Entry& e : eta.entries) {
    if (e.is_omega()) {
      hi = lo + b.b(wplus(l, 1));
      l = kOmegaWeight;
    } else {
      std::uint64_t k = e.num_value();
      double mx = lo + b.b(l + 1) + b.b(l + k - 1);
      l += k;
      lo = mx - (b.b(l) + b.b(l + 1));
      hi = mx;
    }
  }
  return Interval{lo, hi};
}

TemplateCloud segment_grid(std::size_t count) {
  if (count < 2) throw std::invalid_argument("segment_grid: at least two points required");
  TemplateCloud z;
  z.dim = 1;
  for (std::size_t i = 0; i < count; ++i) {
    Point p(1);
    p[0] = static_cast<double>(i) / static_cast<double>(count - 1);
    z.points.push_back(p);
  }
  z.anchor_min = 0;
  z.anchor_max = count - 1;
  return z;
}

std::vector<Point> SpaceApprox::all_sites() const {
  std::vector<Point> sites;
  std::unordered_set<std::string> seen;
  auto push = [&](const Point& p) {
    if (seen.insert(point_key(p)).second) sites.push_back(p);
  };
  if (copies.empty()) {
    for (const auto& [_, p] : points) push(p);
  } else {
    std::unordered_set<Address, AddressHash> with_copy;
    for (const auto& [ba, pts] : copies) {
      with_copy.insert(ba.prefix);
      for (const Point& p : pts) push(p);
    }
    for (const auto& [ba, p] : points)
      if (!with_copy.count(ba.prefix)) push(p);
  }
  for (const auto& [_, pts] : cluster_points)
    for (const Point& p : pts) push(p);
  return sites;
}

void SpaceApprox::rebuild_index() {
  index_.clear();
  point_index_.clear();
  for (std::size_t i = 0; i < points.size(); ++i) {
    index_[points[i].first.prefix] = i;
    point_index_[point_key(points[i].second)] = i;
  }
}

bool SpaceApprox::has_address(const Address& addr) const { return index_.count(addr) > 0; }

const Point& SpaceApprox::point_of(const Address& addr) const {
  auto it = index_.find(addr);
  if (it == index_.end())
    throw std::out_of_range("SpaceApprox: no point at address (" + addr.to_path() + ")");
  return points[it->second].second;
}

const BoundaryAddress& SpaceApprox::boundary_of(const Address& addr) const {
  auto it = index_.find(addr);
  if (it == index_.end())
    throw std::out_of_range("SpaceApprox: no boundary entry at (" + addr.to_path() + ")");
  return points[it->second].first;
}

std::optional<Address> SpaceApprox::address_at(const Point& p) const {
  auto it = point_index_.find(point_key(p));
  if (it == point_index_.end()) return std::nullopt;
  return points[it->second].first.prefix;
}

namespace {

double error_rec(const TreeNodePtr& node, const GoodSequence& b, std::uint64_t l,
                 std::uint32_t depth, std::uint32_t D, std::uint32_t N) {
  if (node->is_leaf()) return 0.0;
  if (depth == D) return b.b(l) + b.b(l + 1);
  bool omega = node->has_omega_child();
  double bound = 0.0;
  if (node->has_integer_child_beyond(N))
    bound = omega ? b.b(l + N - 1) : b.b(l) + b.b(l + 1);
  for (std::uint32_t k : node->integer_children_up_to(N))
    bound = std::max(bound, error_rec(node->child(Entry::num(k)), b, l + k, depth + 1, D, N));
  return bound;
}

}  // namespace

double truncation_error_bound(const TreeSpec& tree, const GoodSequence& b, std::uint32_t D,
                              std::uint32_t N) {
  return error_rec(tree.root, b, 0, 0, D, N);
}

SpaceApprox realize_s_space(const TreeSpec& tree, const GoodSequence& b, std::uint32_t D,
                            std::uint32_t N, double origin) {
  SpaceApprox s;
  s.tree = tree;
  s.b = b;
  s.dim = 1;
  s.D = D;
  s.N = N;
  s.origin = origin;
  for (const BoundaryAddress& ba : enumerate_boundary(tree, D, N)) {
    Point p(1);
    p[0] = b_interval(b, ba.prefix, origin).hi;
    s.points.emplace_back(ba, p);
  }
  s.error_bound = truncation_error_bound(tree, b, D, N);
  s.rebuild_index();
  return s;
}

SpaceApprox realize_bp_space(const TreeSpec& tree, const GoodPair& pair, std::uint32_t D,
                             std::uint32_t N, double origin) {
  SpaceApprox s = realize_s_space(tree, pair.b, D, N, origin);
  const GoodSequence& b = pair.b;
  for (std::uint32_t k = 1; k <= N; ++k) {
    if (!tree.root->child(Entry::num(k))) continue;
    BigInt pk_big = pair.p_at(k);
    if (pk_big > 1000000) throw std::invalid_argument("realize_bp_space: p_k too large to place");
    std::size_t pk = pk_big.convert_to<std::size_t>();
    Address addr_k;
    addr_k.entries.push_back(Entry::num(k));
    double right = b_interval(b, addr_k, origin).hi;
    double bk = b.b(k);
    std::vector<Point> yk;
    for (std::size_t i = 0; i < pk; ++i) {
      Point p(1);
      p[0] = right + 2.0 * bk * static_cast<double>(pk) + 2.0 * bk * static_cast<double>(i);
      yk.push_back(p);
    }
    if (k >= 2) {
      Address prev;
      prev.entries.push_back(Entry::num(k - 1));
      double lo_prev = b_interval(b, prev, origin).lo;
      if (!(yk.back()[0] < lo_prev))
        throw std::runtime_error("realize_bp_space: cluster Y_" + std::to_string(k) +
                                 " collides with the next interval");
    }
    s.cluster_points.emplace_back(k, std::move(yk));
  }
  // Clusters beyond the width cut sit within the tail-diameter bound of x_w.
  if (!s.cluster_points.empty())
    s.error_bound = std::max(s.error_bound, 1.25 * b.b(N));
  s.rebuild_index();
  return s;
}

SpaceApprox realize_z_space(const TreeSpec& tree, const GoodSequence& b, const TemplateCloud& Z,
                            std::uint32_t D, std::uint32_t N, double origin) {
  if (Z.points.size() < 2 || Z.diameter() <= 0.0)
    throw std::invalid_argument("realize_z_space: template must not be a singleton");
  SpaceApprox s;
  s.tree = tree;
  s.b = b;
  s.dim = Z.dim;
  s.D = D;
  s.N = N;
  s.origin = origin;

  const Point& x0 = Z.points[Z.anchor_min];
  const Point& y0 = Z.points[Z.anchor_max];
  Point u = (y0 - x0).normalized();
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(Z.dim, Z.dim);
  Point e1 = Point::Zero(Z.dim);
  e1[0] = 1.0;
  Point v = u - e1;
  if (v.squaredNorm() > 1e-24) rot -= (2.0 / v.squaredNorm()) * (v * v.transpose());
  double zdiam = (y0 - x0).norm();

  for (const BoundaryAddress& ba : enumerate_boundary(tree, D, N)) {
    Interval I = b_interval(b, ba.prefix, origin);
    Point rep = Point::Zero(Z.dim);
    rep[0] = I.hi;
    s.points.emplace_back(ba, rep);
    if (!ba.exact()) continue;
    double r = I.diam() / zdiam;
    Point base = Point::Zero(Z.dim);
    base[0] = I.lo;
    std::vector<Point> copy;
    for (const Point& z : Z.points) copy.push_back(base + r * (rot * (z - x0)));
    s.copies.emplace_back(ba, std::move(copy));
  }
  // Declared resolution of the template as a stand-in for a continuum: half
  // the largest nearest-neighbour gap, scaled by the largest copy factor.
  double gap = 0.0;
  for (std::size_t i = 0; i < Z.points.size(); ++i) {
    double nn = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < Z.points.size(); ++j)
      if (j != i) nn = std::min(nn, (Z.points[i] - Z.points[j]).norm());
    gap = std::max(gap, nn);
  }
  double max_r = 0.0;
  for (const auto& [ba, _] : s.copies)
    max_r = std::max(max_r, b_interval(b, ba.prefix, origin).diam() / zdiam);
  s.error_bound = truncation_error_bound(tree, b, D, N) + max_r * gap / 2.0;
  s.rebuild_index();
  return s;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

namespace {

constexpr double kAbsTol = 1e-9;

double dist_sets(const std::vector<Point>& A, const std::vector<Point>& B) {
  double best = std::numeric_limits<double>::infinity();
  if (!A.empty() && A[0].size() == 1) {
    std::vector<double> a, b;
    a.reserve(A.size());
    b.reserve(B.size());
    for (const Point& p : A) a.push_back(p[0]);
    for (const Point& p : B) b.push_back(p[0]);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      best = std::min(best, std::abs(a[i] - b[j]));
      if (a[i] < b[j])
        ++i;
      else
        ++j;
    }
    return best;
  }
  for (const Point& a : A)
    for (const Point& b : B) best = std::min(best, (a - b).norm());
  return best;
}

double diam_set(const std::vector<Point>& A) {
  if (A.empty()) return 0.0;
  if (A[0].size() == 1) {
    double lo = A[0][0], hi = A[0][0];
    for (const Point& p : A) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    return hi - lo;
  }
  double best = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = i + 1; j < A.size(); ++j) best = std::max(best, (A[i] - A[j]).norm());
  return best;
}

struct Verifier {
  const SpaceApprox& S;
  SpaceReport report;
  std::unordered_map<Address, std::vector<Point>, AddressHash> at_address;

  explicit Verifier(const SpaceApprox& s) : S(s) {
    for (const auto& [ba, p] : S.points) at_address[ba.prefix].push_back(p);
    for (const auto& [ba, pts] : S.copies) {
      auto& v = at_address[ba.prefix];
      v = pts;  // the representative is a copy member; keep the full copy only
    }
    report.min_margin = std::numeric_limits<double>::infinity();
    report.min_gap = std::numeric_limits<double>::infinity();
  }

  void add(const std::string& label, double margin) {
    bool pass = margin >= -kAbsTol;
    report.checks.push_back({label, margin, pass});
    report.min_margin = std::min(report.min_margin, margin);
    if (!pass) report.ok = false;
  }

  // All sites whose address extends `prefix`.
  std::vector<Point> sites_under(const Address& prefix) const {
    std::vector<Point> out;
    for (const auto& [addr, pts] : at_address)
      if (is_prefix(prefix, addr)) out.insert(out.end(), pts.begin(), pts.end());
    return out;
  }

  void visit(const TreeNodePtr& node, const Address& addr, std::uint32_t depth) {
    if (node->is_leaf() || depth == S.D) return;
    std::uint64_t l = weight(addr);
    std::vector<std::uint32_t> kids = node->integer_children_up_to(S.N);
    bool omega = node->has_omega_child();

    std::vector<std::vector<Point>> child_sites;
    for (std::uint32_t k : kids) child_sites.push_back(sites_under(addr.appended(Entry::num(k))));
    std::vector<Point> omega_sites =
        omega ? sites_under(addr.appended(Entry::omega())) : std::vector<Point>{};

    for (std::size_t a = 0; a < kids.size(); ++a) {
      std::uint64_t k = kids[a];
      // Separation of the k-th child from all later siblings and the limit.
      std::vector<Point> later = omega_sites;
      for (std::size_t c = a + 1; c < kids.size(); ++c)
        later.insert(later.end(), child_sites[c].begin(), child_sites[c].end());
      if (!later.empty() && !child_sites[a].empty()) {
        double d = dist_sets(child_sites[a], later);
        double bound = S.b.b(l + k - 1) - 2.0 * S.b.b(l + k) - S.b.b(l + k + 1);
        add("(iii) at (" + addr.to_path() + ") child " + std::to_string(k), d - bound);
        report.min_gap = std::min(report.min_gap, d);
      }
      // Tail diameter over finite siblings >= k.
      std::vector<Point> tail;
      for (std::size_t c = a; c < kids.size(); ++c)
        tail.insert(tail.end(), child_sites[c].begin(), child_sites[c].end());
      add("(iv) at (" + addr.to_path() + ") child " + std::to_string(k),
          S.b.b(l + k - 1) - diam_set(tail));
    }

    // Limit-point inequalities: the omega point dominates distances with
    // factors 2 and 3.
    if (omega && S.has_address(addr.appended(Entry::omega()))) {
      const Point& xo = S.point_of(addr.appended(Entry::omega()));
      std::vector<Point> others;
      for (const auto& cs : child_sites) others.insert(others.end(), cs.begin(), cs.end());
      if (auto it = at_address.find(addr); it != at_address.end())
        others.insert(others.end(), it->second.begin(), it->second.end());
      double worst2 = std::numeric_limits<double>::infinity();
      double worst3 = std::numeric_limits<double>::infinity();
      for (const Point& x : omega_sites)
        for (const Point& y : others) {
          double dxy = (x - y).norm();
          worst2 = std::min(worst2, 2.0 * dxy - (y - xo).norm());
          worst3 = std::min(worst3, 3.0 * dxy - (x - xo).norm());
        }
      if (!others.empty() && !omega_sites.empty()) {
        add("limit factor 2 at (" + addr.to_path() + ")", worst2);
        add("limit factor 3 at (" + addr.to_path() + ")", worst3);
      }
    }

    for (std::uint32_t k : kids)
      visit(node->child(Entry::num(k)), addr.appended(Entry::num(k)), depth + 1);
  }

  void cluster_checks() {
    if (S.cluster_points.empty()) return;
    std::unordered_map<std::uint32_t, const std::vector<Point>*> Y;
    for (const auto& [k, pts] : S.cluster_points) Y[k] = &pts;
    Address empty;
    std::vector<std::uint32_t> kids = S.tree.root->integer_children_up_to(S.N);
    auto Zk = [&](std::uint32_t k) {
      Address ak = empty.appended(Entry::num(k));
      std::vector<Point> z = sites_under(ak);
      if (auto it = Y.find(k); it != Y.end())
        z.insert(z.end(), it->second->begin(), it->second->end());
      return z;
    };
    std::vector<Point> zomega = sites_under(empty.appended(Entry::omega()));
    for (std::size_t a = 0; a < kids.size(); ++a) {
      std::uint32_t k = kids[a];
      std::vector<Point> zk = Zk(k);
      double bk1 = S.b.b(k - 1);
      add("cluster (i) diam Z_" + std::to_string(k), bk1 / 8.0 - diam_set(zk));
      std::vector<Point> later = zomega;
      for (std::size_t c = a + 1; c < kids.size(); ++c) {
        std::vector<Point> zj = Zk(kids[c]);
        later.insert(later.end(), zj.begin(), zj.end());
      }
      if (!later.empty())
        add("cluster (ii) dist Z_" + std::to_string(k), dist_sets(zk, later) - (2.0 / 3.0) * bk1);
      std::vector<Point> tail = zk;
      tail.insert(tail.end(), later.begin(), later.end());
      add("cluster (iii) tail diam at " + std::to_string(k), 1.25 * bk1 - diam_set(tail));
      Address ak = empty.appended(Entry::num(k));
      std::vector<Point> xk = sites_under(ak);
      if (auto it = Y.find(k); it != Y.end() && !xk.empty()) {
        double dx = diam_set(xk), dy = diam_set(*it->second);
        double dxy = dist_sets(xk, *it->second);
        add("cluster (iv) diam X_" + std::to_string(k) + " <= diam Y", dy - dx);
        add("cluster (iv) diam Y_" + std::to_string(k) + " <= dist", dxy - dy);
      }
    }
  }
};

}  // namespace

SpaceReport verify_space_conditions(const SpaceApprox& S) {
  Verifier v(S);
  v.visit(S.tree.root, Address{}, 0);
  v.cluster_checks();
  if (!std::isfinite(v.report.min_margin)) v.report.min_margin = 0.0;
  if (!std::isfinite(v.report.min_gap)) v.report.min_gap = 0.0;
  return v.report;
}

}  // namespace gifslab
