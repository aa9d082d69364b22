#include "gifslab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace gifslab {

namespace {

constexpr std::uint64_t kTupleBudget = 10000000;   // hutchinson / exhaustive pair budget
constexpr std::uint64_t kSampleCount = 1000000;    // sampled Lipschitz pairs

double directed_hausdorff(const Cloud& A, const Cloud& B) {
  double worst = 0.0;
  for (const Point& a : A) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& b : B) best = std::min(best, (a - b).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

double directed_hausdorff_1d(const std::vector<double>& a, const std::vector<double>& sorted_b) {
  double worst = 0.0;
  for (double x : a) {
    auto it = std::lower_bound(sorted_b.begin(), sorted_b.end(), x);
    double best = std::numeric_limits<double>::infinity();
    if (it != sorted_b.end()) best = std::min(best, *it - x);
    if (it != sorted_b.begin()) best = std::min(best, x - *(it - 1));
    worst = std::max(worst, best);
  }
  return worst;
}

std::uint64_t checked_pow(std::uint64_t base, int exp, std::uint64_t cap) {
  std::uint64_t v = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && v > cap / base) return cap + 1;
    v *= base;
  }
  return v;
}

}  // namespace

double hausdorff(const Cloud& A, const Cloud& B) {
  if (A.empty() || B.empty()) throw std::invalid_argument("hausdorff: empty input");
  if (A[0].size() != B[0].size()) throw std::invalid_argument("hausdorff: dimension mismatch");
  if (A[0].size() == 1) {
    std::vector<double> a, b;
    a.reserve(A.size());
    b.reserve(B.size());
    for (const Point& p : A) a.push_back(p[0]);
    for (const Point& p : B) b.push_back(p[0]);
    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return std::max(directed_hausdorff_1d(a, sb), directed_hausdorff_1d(b, sa));
  }
  return std::max(directed_hausdorff(A, B), directed_hausdorff(B, A));
}

Point GifsMap::eval(const std::vector<Point>& xs) const {
  if (static_cast<int>(xs.size()) != order) throw std::invalid_argument("GifsMap: arity mismatch");
  if (symbolic()) {
    std::vector<BoundaryAddress> addrs;
    addrs.reserve(xs.size());
    for (const Point& p : xs) {
      auto a = host->address_at(p);
      if (!a) throw std::runtime_error("GifsMap: point is not a host representative");
      addrs.push_back(host->boundary_of(*a));
    }
    return host->point_of(symbolic_rule(addrs).prefix);
  }
  return numeric_fn(xs);
}

BoundaryAddress GifsMap::eval_addresses(const std::vector<BoundaryAddress>& xs) const {
  if (!symbolic()) throw std::logic_error("GifsMap: numeric backend has no address rule");
  if (static_cast<int>(xs.size()) != order) throw std::invalid_argument("GifsMap: arity mismatch");
  return symbolic_rule(xs);
}

int Gifs::order() const {
  if (maps.empty()) throw std::logic_error("Gifs: empty family");
  int m = maps[0].order;
  for (const GifsMap& f : maps)
    if (f.order != m) throw std::logic_error("Gifs: mixed orders");
  return m;
}

Cloud hutchinson_step(const Gifs& G, const Cloud& A) {
  if (A.empty()) throw std::invalid_argument("hutchinson_step: empty input");
  int m = G.order();
  std::uint64_t tuples = checked_pow(A.size(), m, kTupleBudget);
  if (tuples > kTupleBudget) throw std::runtime_error("hutchinson_step: tuple budget exceeded");

  Cloud out;
  std::unordered_set<std::string> seen;
  std::vector<std::size_t> idx(m, 0);
  std::vector<Point> args(m);
  for (const GifsMap& f : G.maps) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      for (int i = 0; i < m; ++i) args[i] = A[idx[i]];
      Point v = f.eval(args);
      if (seen.insert(point_key(v)).second) out.push_back(v);
      int pos = m - 1;
      while (pos >= 0 && ++idx[pos] == A.size()) idx[pos--] = 0;
      if (pos < 0) break;
    }
  }
  return out;
}

namespace {

Cloud delta_net(const Cloud& A, double delta) {
  if (delta <= 0.0) return A;
  Cloud kept;
  for (const Point& p : A) {
    bool covered = false;
    for (const Point& q : kept)
      if ((p - q).norm() <= delta) {
        covered = true;
        break;
      }
    if (!covered) kept.push_back(p);
  }
  return kept;
}

Cloud dedup(const Cloud& A) {
  Cloud out;
  std::unordered_set<std::string> seen;
  for (const Point& p : A)
    if (seen.insert(point_key(p)).second) out.push_back(p);
  return out;
}

}  // namespace

IterationResult iterate_to_attractor(const Gifs& G, const Cloud& seed, double tol,
                                     std::uint32_t max_iter, double delta) {
  if (delta < 0.0) throw std::invalid_argument("iterate_to_attractor: delta must be >= 0");
  IterationResult result;
  Cloud A = dedup(seed);
  for (std::uint32_t it = 0; it < max_iter; ++it) {
    Cloud B = delta_net(hutchinson_step(G, A), delta);
    double h = hausdorff(A, B);
    result.history.push_back(h);
    result.sizes.push_back(B.size());
    A = std::move(B);
    if (h <= tol) {
      result.converged = true;
      break;
    }
  }
  result.set = std::move(A);
  return result;
}

GifsMap lift_order(const GifsMap& f, int m) {
  if (m < f.order) throw std::invalid_argument("lift_order: m below the map's order");
  if (m == f.order) return f;
  GifsMap g;
  g.order = m;
  g.name = f.name;
  g.claimed_lip = f.claimed_lip;
  g.host = f.host;
  int inner = f.order;
  if (f.symbolic()) {
    auto rule = f.symbolic_rule;
    g.symbolic_rule = [rule, inner](const std::vector<BoundaryAddress>& xs) {
      return rule(std::vector<BoundaryAddress>(xs.begin(), xs.begin() + inner));
    };
  } else {
    auto fn = f.numeric_fn;
    g.numeric_fn = [fn, inner](const std::vector<Point>& xs) {
      return fn(std::vector<Point>(xs.begin(), xs.begin() + inner));
    };
  }
  return g;
}

// ---------------------------------------------------------------------------
// Lipschitz estimation
// ---------------------------------------------------------------------------

namespace {

struct TupleSpace {
  const Cloud& cloud;
  int m;
  std::vector<double> coord1d;  // populated when dim == 1

  double dist(std::size_t i, std::size_t j) const {
    if (!coord1d.empty()) return std::abs(coord1d[i] - coord1d[j]);
    return (cloud[i] - cloud[j]).norm();
  }
  void decode(std::uint64_t t, std::vector<std::size_t>& out) const {
    for (int i = m - 1; i >= 0; --i) {
      out[i] = t % cloud.size();
      t /= cloud.size();
    }
  }
  double tuple_dist(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) const {
    double d = 0.0;
    for (int i = 0; i < m; ++i) d = std::max(d, dist(a[i], b[i]));
    return d;
  }
};

// Exact maximum over all pairs of 2-tuples via value-table column grouping:
// columns (second coordinates) with identical value columns form blocks whose
// second-coordinate distance can be optimized independently of the first.
std::optional<LipEstimate> lipschitz_grouped_order2(const GifsMap& f, const Cloud& cloud,
                                                    const TupleSpace& ts) {
  const std::size_t n = cloud.size();
  if (n * n > kTupleBudget) return std::nullopt;

  std::vector<BoundaryAddress> addrs;
  if (f.symbolic()) {
    addrs.reserve(n);
    for (const Point& p : cloud) {
      auto a = f.host->address_at(p);
      if (!a) return std::nullopt;
      addrs.push_back(f.host->boundary_of(*a));
    }
  }
  auto value = [&](std::size_t i, std::size_t j) -> Point {
    if (f.symbolic()) return f.host->point_of(f.symbolic_rule({addrs[i], addrs[j]}).prefix);
    return f.numeric_fn({cloud[i], cloud[j]});
  };

  std::unordered_map<std::string, std::int32_t> registry;
  std::vector<Point> values;
  auto value_id = [&](const Point& p) -> std::int32_t {
    auto [it, fresh] = registry.emplace(point_key(p), static_cast<std::int32_t>(values.size()));
    if (fresh) values.push_back(p);
    return it->second;
  };

  // Column signatures -> groups. Sections hold the value id per row.
  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<std::vector<std::int32_t>> sections;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::int32_t> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = value_id(value(i, j));
      if (values.size() > 200000) return std::nullopt;  // no grouping structure
    }
    std::string sig(reinterpret_cast<const char*>(col.data()), n * sizeof(std::int32_t));
    auto [it, fresh] = group_of.emplace(std::move(sig), sections.size());
    if (fresh) {
      sections.push_back(col);
      members.emplace_back();
    }
    members[it->second].push_back(j);
  }
  const std::size_t C = sections.size();
  if (C * C * n * n > 400000000ull) return std::nullopt;

  // Value distances: direct in 1d, precomputed otherwise.
  std::vector<double> val1d;
  std::vector<std::vector<double>> valdist;
  if (!ts.coord1d.empty()) {
    for (const Point& p : values) val1d.push_back(p[0]);
  } else {
    if (values.size() > 4000) return std::nullopt;
    valdist.assign(values.size(), std::vector<double>(values.size(), 0.0));
    for (std::size_t a = 0; a < values.size(); ++a)
      for (std::size_t b = a + 1; b < values.size(); ++b)
        valdist[a][b] = valdist[b][a] = (values[a] - values[b]).norm();
  }
  auto vdist = [&](std::int32_t a, std::int32_t b) -> double {
    if (a == b) return 0.0;
    if (!val1d.empty()) return std::abs(val1d[a] - val1d[b]);
    return valdist[a][b];
  };

  std::vector<std::vector<double>> gap(C, std::vector<double>(C, 0.0));
  for (std::size_t g = 0; g < C; ++g)
    for (std::size_t h = g + 1; h < C; ++h) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t a : members[g])
        for (std::size_t b : members[h]) best = std::min(best, ts.dist(a, b));
      gap[g][h] = gap[h][g] = best;
    }

  double L = 0.0;
  for (std::size_t g = 0; g < C; ++g) {
    const auto& vg = sections[g];
    // Same block: the second coordinates may coincide.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t i2 = i + 1; i2 < n; ++i2) {
        double num = vdist(vg[i], vg[i2]);
        if (num == 0.0) continue;
        L = std::max(L, num / ts.dist(i, i2));
      }
    // Distinct blocks: the second coordinates contribute at least the gap.
    for (std::size_t h = g + 1; h < C; ++h) {
      const auto& vh = sections[h];
      double gp = gap[g][h];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t i2 = 0; i2 < n; ++i2) {
          double num = vdist(vg[i], vh[i2]);
          if (num == 0.0) continue;
          double den = std::max(i == i2 ? 0.0 : ts.dist(i, i2), gp);
          L = std::max(L, num / den);
        }
    }
  }
  std::uint64_t tuple_count = static_cast<std::uint64_t>(n) * n;
  return LipEstimate{L, true, tuple_count * tuple_count};
}

}  // namespace

LipEstimate lipschitz_estimate_cloud(const GifsMap& f, const Cloud& cloud, std::uint64_t seed) {
  if (cloud.empty()) throw std::invalid_argument("lipschitz_estimate: empty sample");
  const std::size_t n = cloud.size();
  const int m = f.order;
  TupleSpace ts{cloud, m, {}};
  if (cloud[0].size() == 1)
    for (const Point& p : cloud) ts.coord1d.push_back(p[0]);

  if (m == 2) {
    if (auto grouped = lipschitz_grouped_order2(f, cloud, ts)) return *grouped;
  }

  std::uint64_t tuples = checked_pow(n, m, kTupleBudget);
  std::vector<std::size_t> a(m), b(m);
  std::vector<Point> args(m);
  auto eval_tuple = [&](const std::vector<std::size_t>& t) -> Point {
    for (int i = 0; i < m; ++i) args[i] = cloud[t[i]];
    return f.eval(args);
  };

  if (tuples <= kTupleBudget && tuples * tuples <= kTupleBudget) {
    // Full enumeration of tuple pairs.
    std::vector<Point> images;
    images.reserve(tuples);
    for (std::uint64_t t = 0; t < tuples; ++t) {
      ts.decode(t, a);
      images.push_back(eval_tuple(a));
    }
    double L = 0.0;
    for (std::uint64_t t = 0; t < tuples; ++t) {
      ts.decode(t, a);
      for (std::uint64_t u = t + 1; u < tuples; ++u) {
        ts.decode(u, b);
        double den = ts.tuple_dist(a, b);
        if (den == 0.0) continue;
        L = std::max(L, (images[t] - images[u]).norm() / den);
      }
    }
    return {L, true, tuples * (tuples - 1) / 2};
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  double L = 0.0;
  for (std::uint64_t s = 0; s < kSampleCount; ++s) {
    for (int i = 0; i < m; ++i) {
      a[i] = pick(rng);
      b[i] = pick(rng);
    }
    double den = ts.tuple_dist(a, b);
    if (den == 0.0) continue;
    Point va = eval_tuple(a);
    for (int i = 0; i < m; ++i) args[i] = cloud[b[i]];
    Point vb = f.eval(args);
    L = std::max(L, (va - vb).norm() / den);
  }
  return {L, false, kSampleCount};
}

LipEstimate lipschitz_estimate(const GifsMap& f, const SpaceApprox& sample, std::uint64_t seed) {
  return lipschitz_estimate_cloud(f, sample.all_sites(), seed);
}

// ---------------------------------------------------------------------------
// Combinators
// ---------------------------------------------------------------------------

Gifs combine_separated(const std::vector<std::pair<const SpaceApprox*, const Gifs*>>& parts) {
  if (parts.empty()) throw std::invalid_argument("combine_separated: no parts");
  std::vector<Cloud> clouds;
  for (const auto& [space, _] : parts) clouds.push_back(space->all_sites());

  double max_diam = 0.0;
  double min_dist = std::numeric_limits<double>::infinity();
  double max_lip = 0.0;
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    double d = 0.0;
    for (std::size_t a = 0; a < clouds[i].size(); ++a)
      for (std::size_t b = a + 1; b < clouds[i].size(); ++b)
        d = std::max(d, (clouds[i][a] - clouds[i][b]).norm());
    max_diam = std::max(max_diam, d);
    for (std::size_t j = i + 1; j < clouds.size(); ++j)
      for (const Point& a : clouds[i])
        for (const Point& b : clouds[j]) min_dist = std::min(min_dist, (a - b).norm());
    for (const GifsMap& f : parts[i].second->maps)
      max_lip = std::max(max_lip, f.claimed_lip.value_or(1.0));
  }
  double lambda = parts.size() > 1 ? max_diam / min_dist : 0.0;
  if (parts.size() > 1 && !(lambda < 1.0 / max_lip))
    throw std::runtime_error("combine_separated: separation condition violated");

  int m = 1;
  for (const auto& [_, gifs] : parts) m = std::max(m, gifs->order());

  Gifs combined;
  double proj_lip = std::max(1.0, lambda);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    // Projection fixing part i, collapsing the rest onto its smallest point.
    auto keys = std::make_shared<std::unordered_set<std::string>>();
    for (const Point& p : clouds[i]) keys->insert(point_key(p));
    Point anchor = clouds[i][0];
    for (const Point& p : clouds[i])
      if (std::lexicographical_compare(p.data(), p.data() + p.size(), anchor.data(),
                                       anchor.data() + anchor.size()))
        anchor = p;
    for (const GifsMap& f : parts[i].second->maps) {
      GifsMap lifted = lift_order(f, m);
      GifsMap wrapped;
      wrapped.order = m;
      wrapped.name = f.name + "@part" + std::to_string(i);
      wrapped.claimed_lip = f.claimed_lip ? std::optional<double>(*f.claimed_lip * proj_lip)
                                          : std::nullopt;
      wrapped.numeric_fn = [lifted, keys, anchor](const std::vector<Point>& xs) {
        std::vector<Point> projected;
        projected.reserve(xs.size());
        for (const Point& x : xs)
          projected.push_back(keys->count(point_key(x)) ? x : anchor);
        return lifted.eval(projected);
      };
      combined.maps.push_back(std::move(wrapped));
    }
  }
  return combined;
}

GifsMap tree_retraction(std::shared_ptr<const SpaceApprox> host, const TreeSpec& target_tree,
                        std::shared_ptr<const SpaceApprox> target) {
  for (const auto& [ba, _] : target->points)
    if (boundary_status(host->tree, ba.prefix) == NodeStatus::NotInTree)
      throw std::invalid_argument("tree_retraction: target boundary not inside the host tree");

  const std::uint32_t D = target->D, N = target->N;
  TreeNodePtr root = target_tree.root;

  auto retract = [root, D, N, target](const BoundaryAddress& ba) -> BoundaryAddress {
    Address cur;
    TreeNodePtr node = root;
    std::uint32_t depth = 0;
    for (const Entry& e : ba.prefix.entries) {
      if (depth == D) break;
      if (!e.is_omega() && e.num_value() > N) break;
      TreeNodePtr c = node->child(e);
      if (!c) break;
      cur.entries.push_back(e);
      node = c;
      ++depth;
    }
    while (!node->is_leaf()) {
      if (depth == D) return target->boundary_of(cur);
      if (node->has_omega_child()) {
        cur.entries.push_back(Entry::omega());
        node = node->child(Entry::omega());
        ++depth;
        break;
      }
      auto kids = node->integer_children_up_to(N);
      if (kids.empty()) return target->boundary_of(cur);
      std::uint32_t k = kids.back();
      cur.entries.push_back(Entry::num(k));
      node = node->child(Entry::num(k));
      ++depth;
    }
    return target->boundary_of(cur);
  };

  GifsMap f;
  f.order = 1;
  f.name = "retraction";
  f.host = host;
  f.symbolic_rule = [retract](const std::vector<BoundaryAddress>& xs) { return retract(xs[0]); };

  // Keep the symbolic rule only when the target is a subspace view (same
  // coordinates inside the host); otherwise route output coordinates through
  // the target cloud.
  bool subset = true;
  for (const auto& [ba, p] : target->points) {
    if (!host->has_address(ba.prefix) ||
        point_key(host->point_of(ba.prefix)) != point_key(p)) {
      subset = false;
      break;
    }
  }
  if (!subset) {
    auto rule = f.symbolic_rule;
    std::shared_ptr<const SpaceApprox> tgt = target;
    f.numeric_fn = [rule, host, tgt](const std::vector<Point>& xs) {
      auto a = host->address_at(xs[0]);
      if (!a) throw std::runtime_error("tree_retraction: point is not a host representative");
      return tgt->point_of(rule({host->boundary_of(*a)}).prefix);
    };
    f.symbolic_rule = nullptr;
  }

  double lambda = 0.0;
  for (std::uint64_t k = 0; k <= 40; ++k) lambda = std::max(lambda, target->b.b(k) / host->b.b(k));
  f.claimed_lip = 2.0 * lambda;
  return f;
}

GifsMap assemble_dispatch_map(std::map<std::uint32_t, GifsMap> sections, GifsMap omega_section,
                              std::shared_ptr<const SpaceApprox> host) {
  auto table = std::make_shared<std::map<std::uint32_t, GifsMap>>(std::move(sections));
  auto limit = std::make_shared<GifsMap>(std::move(omega_section));
  GifsMap f;
  f.order = 2;
  f.name = "dispatch";
  f.host = host;
  f.claimed_lip = host->b.lambda() / 2.0;
  f.symbolic_rule = [table, limit](const std::vector<BoundaryAddress>& xs) {
    const Address& y = xs[1].prefix;
    if (y.empty()) throw std::runtime_error("dispatch map: argument outside every branch");
    if (y[0].is_omega()) return limit->eval_addresses({xs[0]});
    auto it = table->find(y[0].num_value());
    if (it == table->end())
      throw std::runtime_error("dispatch map: argument outside every branch");
    return it->second.eval_addresses({xs[0]});
  };
  return f;
}

std::size_t ComponentAssignment::component_of(const Point& p) const {
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (point_key(cloud[i]) == point_key(p)) return labels[i];
  throw std::runtime_error("ComponentAssignment: point not in the clustered cloud");
}

std::pair<Cloud, ComponentAssignment> component_quotient(const Cloud& cloud, double gap) {
  if (gap <= 0.0) throw std::invalid_argument("component_quotient: gap must be positive");
  if (cloud.empty()) throw std::invalid_argument("component_quotient: empty cloud");
  const std::size_t n = cloud.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((cloud[i] - cloud[j]).norm() <= gap) parent[find(i)] = find(j);

  ComponentAssignment assignment;
  assignment.cloud = cloud;
  assignment.gap = gap;
  assignment.labels.assign(n, 0);
  std::unordered_map<std::size_t, std::size_t> ids;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = find(i);
    auto [it, fresh] = ids.emplace(r, ids.size());
    assignment.labels[i] = it->second;
    if (fresh) assignment.representatives.push_back(cloud[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    Point& rep = assignment.representatives[assignment.labels[i]];
    const Point& p = cloud[i];
    if (std::lexicographical_compare(p.data(), p.data() + p.size(), rep.data(),
                                     rep.data() + rep.size()))
      rep = p;
  }
  return {assignment.representatives, assignment};
}

Gifs quotient_gifs(const Gifs& G, const ComponentAssignment& assignment) {
  const Cloud& cloud = assignment.cloud;
  const std::size_t n = cloud.size();
  int m = G.order();
  std::uint64_t tuples = checked_pow(n, m, kTupleBudget);
  if (tuples > kTupleBudget) throw std::runtime_error("quotient_gifs: tuple budget exceeded");

  // Fast component lookup by bit pattern.
  std::unordered_map<std::string, std::size_t> comp_at;
  for (std::size_t i = 0; i < n; ++i) comp_at[point_key(cloud[i])] = assignment.labels[i];

  Gifs out;
  for (const GifsMap& f : G.maps) {
    auto table = std::make_shared<std::map<std::vector<std::size_t>, std::size_t>>();
    std::vector<std::size_t> idx(m, 0);
    std::vector<Point> args(m);
    std::vector<std::size_t> cell(m);
    while (true) {
      for (int i = 0; i < m; ++i) {
        args[i] = cloud[idx[i]];
        cell[i] = assignment.labels[idx[i]];
      }
      Point v = f.eval(args);
      std::size_t label;
      auto vit = comp_at.find(point_key(v));
      if (vit != comp_at.end()) {
        label = vit->second;
      } else {
        // numeric maps land near sites, not on them; within the linkage gap
        // the nearest site decides the component
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < n; ++i) {
          double d = (cloud[i] - v).norm();
          if (d < best) best = d, best_i = i;
        }
        if (best > assignment.gap)
          throw std::runtime_error("quotient_gifs: image point leaves the clustered cloud");
        label = assignment.labels[best_i];
      }
      auto [it, fresh] = table->emplace(cell, label);
      if (!fresh && it->second != label) {
        std::string witness;
        for (int i = 0; i < m; ++i) witness += (i ? "," : "") + std::to_string(idx[i]);
        throw std::runtime_error("quotient_gifs: map " + f.name +
                                 " splits a component cell at tuple (" + witness + ")");
      }
      int pos = m - 1;
      while (pos >= 0 && ++idx[pos] == n) idx[pos--] = 0;
      if (pos < 0) break;
    }
    auto reps = std::make_shared<Cloud>(assignment.representatives);
    auto comp_lookup = std::make_shared<std::unordered_map<std::string, std::size_t>>(comp_at);
    GifsMap q;
    q.order = m;
    q.name = f.name + "~";
    q.claimed_lip = f.claimed_lip;
    q.numeric_fn = [table, reps, comp_lookup, m](const std::vector<Point>& xs) {
      std::vector<std::size_t> cell(m);
      for (int i = 0; i < m; ++i) {
        auto it = comp_lookup->find(point_key(xs[i]));
        if (it == comp_lookup->end())
          throw std::runtime_error("quotient map: input outside the clustered cloud");
        cell[i] = it->second;
      }
      auto it = table->find(cell);
      if (it == table->end()) throw std::runtime_error("quotient map: unseen component cell");
      return (*reps)[it->second];
    };
    out.maps.push_back(std::move(q));
  }
  return out;
}

}  // namespace gifslab
