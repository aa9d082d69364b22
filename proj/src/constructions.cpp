#include "gifslab/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace gifslab {

namespace {

constexpr std::uint64_t kAddressTupleBudget = 50000000;

// Resolve an ideal address against the realized truncation: follow realized
// children, replace a missing or cut integer branch by the sibling limit leaf,
// and stop at depth-D interiors (their stored marker stands in).
BoundaryAddress clamp_to(const SpaceApprox& S, const Address& ideal) {
  Address cur;
  TreeNodePtr node = S.tree.root;
  std::uint32_t depth = 0;
  for (const Entry& e : ideal.entries) {
    if (node->is_leaf()) break;
    if (depth == S.D) break;
    if (e.is_omega()) {
      if (node->has_omega_child()) return S.boundary_of(cur.appended(Entry::omega()));
      break;
    }
    TreeNodePtr c = e.num_value() <= S.N ? node->child(e) : nullptr;
    if (!c) {
      if (node->has_omega_child()) return S.boundary_of(cur.appended(Entry::omega()));
      return S.boundary_of(cur);
    }
    cur.entries.push_back(e);
    node = c;
    ++depth;
  }
  return S.boundary_of(cur);
}

GifsMap constant_map(std::shared_ptr<const SpaceApprox> host, BoundaryAddress value, int order,
                     std::string name) {
  GifsMap f;
  f.order = order;
  f.name = std::move(name);
  f.host = std::move(host);
  f.claimed_lip = 0.0;
  f.symbolic_rule = [value](const std::vector<BoundaryAddress>&) { return value; };
  return f;
}

// Longest prefix of `rel` that is a path of `shape`, closed off with the limit
// entry when the walk stops at an interior node. The result addresses a point
// of any copy shaped like `shape`, so prepending the copy's root gives a
// surjection onto the copy that contracts by the copy's scale ratio.
Address transplant(const TreeNodePtr& shape, const Address& rel) {
  Address cur;
  TreeNodePtr node = shape;
  for (const Entry& e : rel.entries) {
    if (!node || node->is_leaf()) break;
    TreeNodePtr c = e.is_omega() ? (node->has_omega_child() ? node->child(e) : nullptr)
                                 : node->child(e);
    if (!c) break;
    cur.entries.push_back(e);
    node = c;
  }
  if (node && !node->is_leaf() && node->has_omega_child())
    cur.entries.push_back(Entry::omega());
  return cur;
}

// Surjection of the whole host onto the copy rooted at `pre`.
GifsMap transplant_map(std::shared_ptr<const SpaceApprox> host, Address pre, std::string name,
                       double claimed) {
  TreeNodePtr shape = host->tree.root;
  for (const Entry& e : pre.entries) shape = shape->child(e);
  if (!shape) throw std::invalid_argument("transplant_map: target not in tree");
  auto h = host;
  GifsMap f;
  f.order = 1;
  f.name = std::move(name);
  f.host = host;
  f.claimed_lip = claimed;
  f.symbolic_rule = [h, pre, shape](const std::vector<BoundaryAddress>& xs) {
    return clamp_to(*h, concat(pre, transplant(shape, xs[0].prefix)));
  };
  return f;
}

BoundaryAddress lex_smallest_with_first(const SpaceApprox& S, std::uint32_t first,
                                        bool complement) {
  const BoundaryAddress* best = nullptr;
  for (const auto& [ba, _] : S.points) {
    if (ba.prefix.empty()) continue;
    bool in = !ba.prefix[0].is_omega() && ba.prefix[0].num_value() == first;
    if (in == complement) continue;
    if (!best || ba.prefix < best->prefix) best = &ba;
  }
  if (!best) throw std::runtime_error("gifs_scattered: required branch is empty");
  return *best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Attractor equation checks
// ---------------------------------------------------------------------------

AttractorReport verify_attractor_symbolic(const Gifs& G, const SpaceApprox& S) {
  const std::size_t n = S.points.size();
  const int m = G.order();
  std::uint64_t tuples = 1;
  for (int i = 0; i < m; ++i) {
    if (tuples > kAddressTupleBudget / std::max<std::size_t>(n, 1))
      throw std::runtime_error("verify_attractor_symbolic: tuple budget exceeded");
    tuples *= n;
  }
  if (tuples * G.maps.size() > kAddressTupleBudget)
    throw std::runtime_error("verify_attractor_symbolic: tuple budget exceeded");

  std::set<Address> space_set;
  for (const auto& [ba, _] : S.points) space_set.insert(ba.prefix);

  std::set<Address> image;
  std::vector<std::size_t> idx(m, 0);
  std::vector<BoundaryAddress> args(m);
  for (const GifsMap& f : G.maps) {
    if (!f.symbolic())
      throw std::invalid_argument("verify_attractor_symbolic: numeric map " + f.name);
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      for (int i = 0; i < m; ++i) args[i] = S.points[idx[i]].first;
      image.insert(f.eval_addresses(args).prefix);
      int pos = m - 1;
      while (pos >= 0 && ++idx[pos] == n) idx[pos--] = 0;
      if (pos < 0) break;
    }
  }

  AttractorReport report;
  report.space_size = space_set.size();
  report.image_size = image.size();
  for (const Address& a : space_set)
    if (!image.count(a)) report.missing.push_back(a);
  for (const Address& a : image)
    if (!space_set.count(a)) ++report.extra;
  report.exact = report.missing.empty() && report.extra == 0;
  return report;
}

AttractorReport verify_attractor_numeric(const Gifs& G, const SpaceApprox& S) {
  Cloud sites = S.all_sites();
  Cloud image = hutchinson_step(G, sites);
  std::unordered_set<std::string> site_keys, image_keys;
  for (const Point& p : sites) site_keys.insert(point_key(p));
  for (const Point& p : image) image_keys.insert(point_key(p));

  AttractorReport report;
  report.space_size = site_keys.size();
  report.image_size = image_keys.size();
  std::size_t missing = 0;
  for (const std::string& k : site_keys)
    if (!image_keys.count(k)) ++missing;
  for (const std::string& k : image_keys)
    if (!site_keys.count(k)) ++report.extra;
  report.exact = missing == 0 && report.extra == 0;
  report.residual = hausdorff(image, sites);
  if (missing > 0 && report.missing.empty()) report.missing.resize(missing);
  return report;
}

// ---------------------------------------------------------------------------
// Scattered spaces: two maps
// ---------------------------------------------------------------------------

ScatteredGifsBundle gifs_scattered(OrdinalIndex alpha, std::uint32_t n, const GoodSequence& b,
                                   std::uint32_t D, std::uint32_t N) {
  if (n < 1) throw std::invalid_argument("gifs_scattered: n >= 1 required");
  if (n > N) throw std::invalid_argument("gifs_scattered: n exceeds the width cut");
  TreeSpec tree = n == 1 ? tree_lambda_alpha(alpha) : tree_lambda_alpha_n(alpha, n);
  auto space = std::make_shared<SpaceApprox>(realize_s_space(tree, b, D, N));
  const double lam = b.lambda();

  ScatteredGifsBundle out;
  out.space = space;

  if (n == 1) {
    GifsMap G = transplant_map(space, Address(std::vector<Entry>{Entry::num(1)}), "G", lam / 4.0);
    BoundaryAddress x_limit = space->boundary_of(Address(std::vector<Entry>{Entry::omega()}));
    std::map<std::uint32_t, GifsMap> sections;
    for (std::uint32_t k = 1; k + 1 <= N; ++k)
      sections.emplace(k, transplant_map(space, Address(std::vector<Entry>{Entry::num(k + 1)}),
                                         "h" + std::to_string(k + 1), lam / 4.0));
    sections.emplace(N, constant_map(space, x_limit, 1, "h_tail"));
    GifsMap F = assemble_dispatch_map(std::move(sections), constant_map(space, x_limit, 1, "h_lim"),
                                      space);
    F.name = "F";
    out.witnesses.emplace("F", F);
    out.witnesses.emplace("G", G);
    out.gifs.maps.push_back(F);
    out.gifs.maps.push_back(lift_order(G, 2));
    return out;
  }

  // P surjects onto the first branch: inside X_1 x X_1 it runs the two-map
  // construction of the first copy (transplants onto its branches, keyed by the
  // second entry of y); everything outside lands on constants.
  BoundaryAddress inner_corner = clamp_to(*space, Address(std::vector<Entry>{Entry::num(1), Entry::num(1)}));
  BoundaryAddress first_limit = clamp_to(*space, Address(std::vector<Entry>{Entry::num(1), Entry::omega()}));
  BoundaryAddress z1 = lex_smallest_with_first(*space, 1, false);
  TreeNodePtr branch1 = space->tree.root->child(Entry::num(1));

  GifsMap P;
  P.order = 2;
  P.name = "P";
  P.host = space;
  P.claimed_lip = lam;
  P.symbolic_rule = [space, branch1, inner_corner, first_limit,
                     z1](const std::vector<BoundaryAddress>& xs) {
    const Address& x = xs[0].prefix;
    const Address& y = xs[1].prefix;
    bool x1 = !x.empty() && !x[0].is_omega() && x[0].num_value() == 1;
    bool y1 = !y.empty() && !y[0].is_omega() && y[0].num_value() == 1;
    if (x1 && y1) {
      if (y.size() < 2 || y[1].is_omega()) return first_limit;
      std::uint32_t j = y[1].num_value() + 1;
      TreeNodePtr shape = branch1->is_leaf() ? nullptr : branch1->child(Entry::num(j));
      if (!shape) return first_limit;
      Address pre(std::vector<Entry>{Entry::num(1), Entry::num(j)});
      return clamp_to(*space, concat(pre, transplant(shape, x.tail())));
    }
    if (!x1) return inner_corner;
    return z1;
  };

  GifsMap Q;
  Q.order = 2;
  Q.name = "Q";
  Q.host = space;
  Q.claimed_lip = lam;
  // Q covers the complement of the first branch. When y sits in the first
  // branch, the full copies chain one branch upward. Otherwise the first copy
  // (whose realized extent mirrors every target copy exactly) is transplanted
  // onto the tail branch selected by y's branch. Leftover cells go to a
  // constant inside the target.
  {
    auto host = space;
    BoundaryAddress x_limit = space->boundary_of(Address(std::vector<Entry>{Entry::omega()}));
    BoundaryAddress zn = n == 2 ? lex_smallest_with_first(*space, 1, true)
                                : lex_smallest_with_first(*space, n - 1, false);
    std::uint32_t nn = n;
    Q.symbolic_rule = [host, x_limit, zn, nn](const std::vector<BoundaryAddress>& xs) {
      const Address& x = xs[0].prefix;
      const Address& y = xs[1].prefix;
      bool x1 = !x.empty() && !x[0].is_omega() && x[0].num_value() == 1;
      bool y1 = !y.empty() && !y[0].is_omega() && y[0].num_value() == 1;
      if (y1) {
        if (nn == 2 && x1) return clamp_to(*host, Address(std::vector<Entry>{Entry::num(2)}));
        if (!x.empty() && !x[0].is_omega() && x[0].num_value() + 2 <= nn) {
          Address ideal = x;
          ideal.entries[0] = Entry::num(x[0].num_value() + 1);
          return clamp_to(*host, ideal);
        }
        return zn;
      }
      if (x1) {
        if (y[0].is_omega()) return x_limit;
        // keep the image one branch scale below the dispatch key
        std::uint32_t target = y[0].num_value() + std::max(nn, 3u) - 2;
        TreeNodePtr shape = host->tree.root->child(Entry::num(target));
        if (!shape) return x_limit;
        Address pre(std::vector<Entry>{Entry::num(target)});
        return clamp_to(*host, concat(pre, transplant(shape, x.tail())));
      }
      return zn;
    };
  }

  out.witnesses.emplace("P", P);
  out.witnesses.emplace("Q", Q);
  out.gifs.maps.push_back(std::move(P));
  out.gifs.maps.push_back(std::move(Q));
  return out;
}

// ---------------------------------------------------------------------------
// Sandwiched boundary sets: four maps
// ---------------------------------------------------------------------------

namespace {

// Bump the root entry by two and decrement the k-th entry (k = 0 takes the
// pointwise limit, which only bumps). The limit symbol absorbs both shifts.
Address bump_surgery(Address eta, std::uint32_t k) {
  if (eta.empty()) throw std::invalid_argument("bump_surgery: empty address");
  if (!eta.entries[0].is_omega())
    eta.entries[0] = Entry::num(eta.entries[0].num_value() + 2);
  if (k >= 2 && eta.size() >= k) {
    Entry& e = eta.entries[k - 1];
    if (!e.is_omega()) e = Entry::num(e.num_value() - 1);
  }
  return eta;
}

// Prepend the branch index i and decrement the (k-1)-th entry of the original
// address (k = 0 takes the pointwise limit, which only prepends).
Address prepend_surgery(const Address& eta, std::uint32_t i, std::uint32_t k) {
  Address out;
  out.entries.push_back(Entry::num(i));
  out.entries.insert(out.entries.end(), eta.entries.begin(), eta.entries.end());
  if (k >= 2 && eta.size() >= k - 1) {
    Entry& e = out.entries[k - 1];
    if (!e.is_omega()) e = Entry::num(e.num_value() - 1);
  }
  return out;
}

}  // namespace

ScatteredGifsBundle gifs_sandwiched(const TreeSpec& M_tree, const GoodSequence& b, std::uint32_t D,
                                    std::uint32_t N) {
  TreeSpec s_tree = tree_lambda_s();
  TreeSpec r_tree = tree_lambda_r();
  auto M_space = std::make_shared<SpaceApprox>(realize_s_space(M_tree, b, D, N));
  auto Z_space = std::make_shared<SpaceApprox>(realize_s_space(s_tree, b, D, N));

  for (const auto& [ba, _] : M_space->points)
    if (!tree_contains(r_tree, ba.prefix))
      throw std::invalid_argument("gifs_sandwiched: tree exceeds the at-most-one-1 envelope");
  for (const auto& [ba, p] : Z_space->points) {
    if (!M_space->has_address(ba.prefix) ||
        M_space->boundary_of(ba.prefix).exactness != ba.exactness ||
        point_key(M_space->point_of(ba.prefix)) != point_key(p))
      throw std::invalid_argument("gifs_sandwiched: tree does not contain the no-1 core");
  }

  GifsMap r = tree_retraction(M_space, s_tree, Z_space);
  if (!r.symbolic()) throw std::logic_error("gifs_sandwiched: retraction lost the address layer");
  auto r_rule = r.symbolic_rule;
  const double lam = b.lambda();

  auto dispatch_key = [](const Address& ry) -> std::uint32_t {
    return ry[0].is_omega() ? 0 : ry[0].num_value();
  };

  GifsMap G4;
  G4.order = 2;
  G4.name = "G4";
  G4.host = M_space;
  G4.claimed_lip = lam;
  G4.symbolic_rule = [M_space, r_rule, dispatch_key](const std::vector<BoundaryAddress>& xs) {
    Address rx = r_rule({xs[0]}).prefix;
    Address ry = r_rule({xs[1]}).prefix;
    return clamp_to(*M_space, bump_surgery(rx, dispatch_key(ry)));
  };

  auto make_side = [&](std::uint32_t i) {
    GifsMap g;
    g.order = 2;
    g.name = "G" + std::to_string(i);
    g.host = M_space;
    g.claimed_lip = lam;
    g.symbolic_rule = [M_space, r_rule, dispatch_key, i](const std::vector<BoundaryAddress>& xs) {
      Address rx = r_rule({xs[0]}).prefix;
      Address ry = r_rule({xs[1]}).prefix;
      return clamp_to(*M_space, prepend_surgery(rx, i, dispatch_key(ry)));
    };
    return g;
  };
  GifsMap G2 = make_side(2);
  GifsMap G3 = make_side(3);

  GifsMap F;
  F.order = 1;
  F.name = "F";
  F.host = M_space;
  F.claimed_lip = lam;
  F.symbolic_rule = [M_space, r_rule](const std::vector<BoundaryAddress>& xs) {
    Address rx = r_rule({xs[0]}).prefix;
    Address ideal;
    ideal.entries.push_back(Entry::num(1));
    ideal.entries.insert(ideal.entries.end(), rx.entries.begin(), rx.entries.end());
    return clamp_to(*M_space, ideal);
  };

  ScatteredGifsBundle out;
  out.space = M_space;
  GifsMap F2 = lift_order(F, 2);
  out.witnesses.emplace("F", F2);
  out.witnesses.emplace("G2", G2);
  out.witnesses.emplace("G3", G3);
  out.witnesses.emplace("G4", G4);
  out.gifs.maps.push_back(std::move(F2));
  out.gifs.maps.push_back(std::move(G2));
  out.gifs.maps.push_back(std::move(G3));
  out.gifs.maps.push_back(std::move(G4));
  return out;
}

// ---------------------------------------------------------------------------
// Cluster-decorated spaces: order-m family
// ---------------------------------------------------------------------------

MixedGifsBundle gifs_mixed(const ScatteredGifsBundle& M_bundle, const GoodPair& pair,
                           std::uint32_t m, std::uint32_t D, std::uint32_t N) {
  if (m < 2) throw std::invalid_argument("gifs_mixed: m >= 2 required");
  const SpaceApprox& MS = *M_bundle.space;
  if (MS.D != D || MS.N != N)
    throw std::invalid_argument("gifs_mixed: truncation mismatch with the inner bundle");
  for (std::uint64_t k = 0; k <= 10; ++k)
    if (std::abs(MS.b.b(k) - pair.b.b(k)) > 1e-12 * pair.b.b(k))
      throw std::invalid_argument("gifs_mixed: scale mismatch with the inner bundle");
  for (std::size_t k = 1; k + 1 < pair.p.size(); ++k)
    if (pair.p[k] > boost::multiprecision::pow(pair.p[k - 1], m))
      throw std::invalid_argument("gifs_mixed: cluster growth exceeds the order");

  auto host = std::make_shared<SpaceApprox>(realize_bp_space(MS.tree, pair, D, N));

  // Cluster layout: 1-based sizes, prefix sums, and point rows.
  auto sizes = std::make_shared<std::vector<std::uint64_t>>(N + 1, 0);
  auto rows = std::make_shared<std::vector<Cloud>>(N + 1);
  for (const auto& [k, pts] : host->cluster_points) {
    (*sizes)[k] = pts.size();
    (*rows)[k] = pts;
  }
  for (std::uint32_t k = 1; k <= N; ++k)
    if ((*sizes)[k] == 0) throw std::runtime_error("gifs_mixed: cluster row missing");
  auto cum = std::make_shared<std::vector<std::uint64_t>>(N + 1, 0);
  for (std::uint32_t k = 1; k <= N; ++k) (*cum)[k] = (*cum)[k - 1] + (*sizes)[k];

  constexpr std::uint32_t kLimitRow = 0;
  // Every site resolves to a cluster row and a global column in the
  // concatenated rows; tree-part sites resolve to their row's first column.
  auto slot = std::make_shared<std::unordered_map<std::string, std::pair<std::uint32_t, std::uint64_t>>>();
  for (std::uint32_t k = 1; k <= N; ++k)
    for (std::uint64_t i = 0; i < (*sizes)[k]; ++i)
      (*slot)[point_key((*rows)[k][i])] = {k, (*cum)[k - 1] + i};
  Point x_limit_pt = host->point_of(Address(std::vector<Entry>{Entry::omega()}));
  auto proj_tree = std::make_shared<std::unordered_map<std::string, Point>>();
  for (const auto& [ba, p] : host->points) {
    if (ba.prefix.empty()) continue;
    std::string key = point_key(p);
    if (ba.prefix[0].is_omega()) {
      slot->emplace(key, std::make_pair(kLimitRow, std::uint64_t{0}));
    } else {
      std::uint32_t k = ba.prefix[0].num_value();
      slot->emplace(key, std::make_pair(k, (*cum)[k - 1]));
    }
  }
  // Projection of cluster sites onto the tree part: the smallest address of
  // the same root branch.
  for (std::uint32_t k = 1; k <= N; ++k) {
    const BoundaryAddress* best = nullptr;
    for (const auto& [ba, _] : host->points)
      if (!ba.prefix.empty() && !ba.prefix[0].is_omega() && ba.prefix[0].num_value() == k)
        if (!best || ba.prefix < best->prefix) best = &ba;
    if (!best) throw std::runtime_error("gifs_mixed: root branch has no tree points");
    Point zk = host->point_of(best->prefix);
    for (std::uint64_t i = 0; i < (*sizes)[k]; ++i)
      (*proj_tree)[point_key((*rows)[k][i])] = zk;
  }

  const double lam = pair.b.lambda();
  MixedGifsBundle out;
  out.space = host;

  for (const GifsMap& f : M_bundle.gifs.maps) {
    GifsMap lifted = lift_order(f, static_cast<int>(m));
    GifsMap g;
    g.order = static_cast<int>(m);
    g.name = f.name + "&tree";
    g.host = host;
    g.claimed_lip = f.claimed_lip ? std::optional<double>(2.0 * *f.claimed_lip) : std::nullopt;
    g.numeric_fn = [lifted, proj_tree](const std::vector<Point>& xs) {
      std::vector<Point> projected;
      projected.reserve(xs.size());
      for (const Point& x : xs) {
        auto it = proj_tree->find(point_key(x));
        projected.push_back(it == proj_tree->end() ? x : it->second);
      }
      return lifted.eval(projected);
    };
    out.gifs.maps.push_back(std::move(g));
  }

  // Cluster dispatch: tuples whose top row is k feed the next row in
  // lexicographic cyclic order.
  GifsMap F;
  F.order = static_cast<int>(m);
  F.name = "cluster_dispatch";
  F.host = host;
  F.claimed_lip = 2.0 * lam;
  std::uint32_t width = N;
  std::uint32_t order_m = m;
  F.numeric_fn = [slot, sizes, rows, cum, x_limit_pt, width,
                  order_m](const std::vector<Point>& xs) {
    std::vector<std::pair<std::uint32_t, std::uint64_t>> coords;
    coords.reserve(xs.size());
    bool limit = false;
    std::uint32_t top = 1;
    for (const Point& x : xs) {
      auto it = slot->find(point_key(x));
      if (it == slot->end()) throw std::runtime_error("cluster_dispatch: input outside the space");
      coords.push_back(it->second);
      if (it->second.first == kLimitRow) limit = true;
      top = std::max(top, it->second.first);
    }
    if (limit || top >= width) return x_limit_pt;
    std::uint64_t S = (*cum)[top], T = (*cum)[top - 1];
    BigInt rank = 0, below = 0;
    bool prefix_ok = true;
    BigInt powS = 1, powT = 1;
    for (std::uint32_t i = 0; i < order_m; ++i) {
      powS *= S;
      if (T > 0) powT *= T;
    }
    for (std::uint32_t i = 0; i < order_m; ++i) {
      powS /= S;
      if (T > 0) powT /= T;
      std::uint64_t g = coords[i].second;
      rank += BigInt(g) * powS;
      if (T > 0 && prefix_ok) {
        below += BigInt(std::min<std::uint64_t>(g, T)) * powT;
        if (g >= T) prefix_ok = false;
      }
    }
    rank -= below;
    std::uint64_t next = (rank % (*sizes)[top + 1]).convert_to<std::uint64_t>();
    return (*rows)[top + 1][next];
  };
  out.gifs.maps.push_back(std::move(F));

  for (std::uint64_t i = 0; i < (*sizes)[1]; ++i) {
    GifsMap c;
    c.order = static_cast<int>(m);
    c.name = "anchor" + std::to_string(i + 1);
    c.host = host;
    c.claimed_lip = 0.0;
    Point v = (*rows)[1][i];
    c.numeric_fn = [v](const std::vector<Point>&) { return v; };
    out.gifs.maps.push_back(std::move(c));
  }

  std::size_t profile_len = std::max<std::size_t>(6, pair.p.size());
  BigInt sum = 0;
  for (std::size_t k = 1; k <= profile_len; ++k) {
    sum += pair.p_at(k);
    BigInt num = 1 + sum + BigInt(k + 1) * (BigInt(1) << (k + 1));
    out.bound_profile.push_back(num.convert_to<double>() / pair.p_at(k).convert_to<double>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cardinality diagnostic
// ---------------------------------------------------------------------------

std::vector<std::pair<BigInt, BigInt>> nonattractor_bound_exact(const std::vector<BigInt>& p,
                                                                std::uint32_t m,
                                                                std::uint32_t n_max) {
  if (m < 1) throw std::invalid_argument("nonattractor_bound: m >= 1 required");
  if (n_max < 1) throw std::invalid_argument("nonattractor_bound: n_max >= 1 required");
  if (p.size() < n_max) throw std::invalid_argument("nonattractor_bound: p too short");
  std::vector<std::pair<BigInt, BigInt>> out;
  BigInt sum = 0;
  for (std::uint32_t n = 1; n <= n_max; ++n) {
    BigInt num = 1 + sum + BigInt(n) * (BigInt(1) << n);
    out.emplace_back(boost::multiprecision::pow(num, m), p[n - 1]);
    sum += p[n - 1];
  }
  return out;
}

std::vector<double> nonattractor_bound(const std::vector<BigInt>& p, std::uint32_t m,
                                       std::uint32_t n_max) {
  std::vector<double> out;
  for (const auto& [num, den] : nonattractor_bound_exact(p, m, n_max))
    out.push_back(num.convert_to<double>() / den.convert_to<double>());
  return out;
}

// ---------------------------------------------------------------------------
// Component spaces
// ---------------------------------------------------------------------------

namespace {

// Target component index under the k-th reindexing, and whether the component
// map collapses to a constant.
std::pair<Address, bool> component_reindex(const Address& xi, std::uint32_t k) {
  if (xi.size() == 1 && xi[0].is_omega())
    return {Address(std::vector<Entry>{Entry::num(k), Entry::omega()}), false};
  std::uint32_t i = xi[0].num_value();
  if (i <= k - 1) {
    Address out;
    out.entries.push_back(Entry::num(k));
    out.entries.insert(out.entries.end(), xi.entries.begin(), xi.entries.end());
    return {out, false};
  }
  if (xi.size() >= 2 && !xi[1].is_omega() && xi[1].num_value() == k - 1) {
    Address out;
    out.entries.push_back(Entry::num(k));
    out.entries.push_back(Entry::num(i));
    out.entries.insert(out.entries.end(), xi.entries.begin() + 2, xi.entries.end());
    return {out, false};
  }
  return {Address(std::vector<Entry>{Entry::num(k), Entry::num(i), Entry::omega()}), true};
}

struct ComponentRule {
  bool affine = false;
  Point source_base;
  Point target_base;
  double scale = 0.0;
  Point value;  // constant case
};

struct CopyFrame {
  Point base;
  double scale = 0.0;
};

}  // namespace

ScatteredGifsBundle gifs_component_space(const Gifs& Z_gifs, const TemplateCloud& Z,
                                         const GoodSequence& b, std::uint32_t D, std::uint32_t N) {
  for (const GifsMap& f : Z_gifs.maps)
    if (!f.claimed_lip || *f.claimed_lip > 1.0 / 3.0 + 1e-12)
      throw std::invalid_argument("gifs_component_space: template maps must declare Lip <= 1/3");
  TreeSpec tree = tree_lambda_alpha(OrdinalIndex::omega());
  auto host = std::make_shared<SpaceApprox>(realize_z_space(tree, b, Z, D, N));
  const double lam = b.lambda();

  // Rebuild the placement frame used by the realization.
  const Point& x0 = Z.points[Z.anchor_min];
  const Point& y0 = Z.points[Z.anchor_max];
  Point u = (y0 - x0).normalized();
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(Z.dim, Z.dim);
  Point e1 = Point::Zero(Z.dim);
  e1[0] = 1.0;
  Point v = u - e1;
  if (v.squaredNorm() > 1e-24) rot -= (2.0 / v.squaredNorm()) * (v * v.transpose());
  double zdiam = (y0 - x0).norm();

  std::unordered_map<Address, CopyFrame, AddressHash> frames;
  auto site_addr = std::make_shared<std::unordered_map<std::string, Address>>();
  {
    std::unordered_set<Address, AddressHash> with_copy;
    for (const auto& [ba, pts] : host->copies) {
      with_copy.insert(ba.prefix);
      Interval I = b_interval(b, ba.prefix, host->origin);
      Point base = Point::Zero(Z.dim);
      base[0] = I.lo;
      frames[ba.prefix] = {base, I.diam() / zdiam};
      for (const Point& p : pts) (*site_addr)[point_key(p)] = ba.prefix;
    }
    for (const auto& [ba, p] : host->points)
      if (!with_copy.count(ba.prefix)) (*site_addr)[point_key(p)] = ba.prefix;
  }

  // Per-component maps onto the k-th branch.
  auto branch_maps = std::make_shared<std::vector<GifsMap>>(N + 1);
  for (std::uint32_t k = 2; k <= N; ++k) {
    auto rules = std::make_shared<std::unordered_map<Address, ComponentRule, AddressHash>>();
    for (const auto& [ba, _] : host->points) {
      auto [ideal, constant] = component_reindex(ba.prefix, k);
      BoundaryAddress target = clamp_to(*host, ideal);
      ComponentRule rule;
      auto src = frames.find(ba.prefix);
      auto dst = frames.find(target.prefix);
      // A zero source scale means the copy collapsed to one point at double
      // precision; a constant is then the exact similarity.
      if (!constant && src != frames.end() && dst != frames.end() && src->second.scale > 0.0) {
        rule.affine = true;
        rule.source_base = src->second.base;
        rule.target_base = dst->second.base;
        rule.scale = dst->second.scale / src->second.scale;
      } else {
        rule.value = host->point_of(target.prefix);
      }
      rules->emplace(ba.prefix, std::move(rule));
    }
    GifsMap g;
    g.order = 1;
    g.name = "branch_map_" + std::to_string(k);
    g.host = host;
    g.claimed_lip = lam / 4.0;
    g.numeric_fn = [rules, site_addr](const std::vector<Point>& xs) {
      auto ait = site_addr->find(point_key(xs[0]));
      if (ait == site_addr->end())
        throw std::runtime_error("branch map: input outside the space");
      const ComponentRule& rule = rules->at(ait->second);
      if (!rule.affine) return rule.value;
      return Point(rule.target_base + rule.scale * (xs[0] - rule.source_base));
    };
    (*branch_maps)[k] = std::move(g);
  }

  Point x_limit_pt = host->point_of(Address(std::vector<Entry>{Entry::omega()}));
  GifsMap F;
  F.order = 2;
  F.name = "F";
  F.host = host;
  F.claimed_lip = lam / 2.0;
  std::uint32_t width = N;
  F.numeric_fn = [branch_maps, site_addr, x_limit_pt, width](const std::vector<Point>& xs) {
    auto ait = site_addr->find(point_key(xs[1]));
    if (ait == site_addr->end()) throw std::runtime_error("F: input outside the space");
    const Address& ay = ait->second;
    if (ay[0].is_omega() || ay[0].num_value() >= width) return x_limit_pt;
    return (*branch_maps)[ay[0].num_value() + 1].eval({xs[0]});
  };

  // Template GIFS conjugated into the first and the limit component.
  auto conjugate = [&](const GifsMap& f, const Address& leaf, const std::string& tag) {
    const CopyFrame& frame = frames.at(leaf);
    Point anchor = host->point_of(leaf);
    auto keys = std::make_shared<std::unordered_set<std::string>>();
    for (const auto& [ba, pts] : host->copies)
      if (ba.prefix == leaf)
        for (const Point& p : pts) keys->insert(point_key(p));
    GifsMap lifted = lift_order(f, 2);
    Point base = frame.base;
    double r = frame.scale;
    Eigen::MatrixXd R = rot;
    Point z0 = x0;
    GifsMap g;
    g.order = 2;
    g.name = f.name + tag;
    g.host = host;
    g.claimed_lip = f.claimed_lip ? std::optional<double>(3.0 * *f.claimed_lip) : std::nullopt;
    g.numeric_fn = [lifted, keys, anchor, base, r, R, z0](const std::vector<Point>& xs) {
      std::vector<Point> zs;
      zs.reserve(xs.size());
      for (const Point& x : xs) {
        Point p = keys->count(point_key(x)) ? x : anchor;
        zs.push_back(z0 + (R * (p - base)) / r);
      }
      return Point(base + r * (R * (lifted.eval(zs) - z0)));
    };
    return g;
  };

  ScatteredGifsBundle out;
  out.space = host;
  Address first(std::vector<Entry>{Entry::num(1)});
  Address limit(std::vector<Entry>{Entry::omega()});
  for (const GifsMap& f : Z_gifs.maps) {
    out.gifs.maps.push_back(conjugate(f, first, "&first"));
    out.gifs.maps.push_back(conjugate(f, limit, "&limit"));
  }
  out.witnesses.emplace("F", F);
  for (std::uint32_t k = 2; k <= N; ++k)
    out.witnesses.emplace("branch_map_" + std::to_string(k), (*branch_maps)[k]);
  out.gifs.maps.push_back(std::move(F));
  return out;
}

// ---------------------------------------------------------------------------
// Density
// ---------------------------------------------------------------------------

namespace {

std::shared_ptr<SpaceApprox> transformed_space(const SpaceApprox& S, double s, const Point& c0,
                                               const Point& t) {
  auto out = std::make_shared<SpaceApprox>();
  out->tree = S.tree;
  out->b = S.b;
  out->dim = S.dim;
  out->D = S.D;
  out->N = S.N;
  out->origin = S.origin;
  auto tf = [&](const Point& p) { return Point(t + s * (p - c0)); };
  for (const auto& [ba, p] : S.points) out->points.emplace_back(ba, tf(p));
  for (const auto& [ba, pts] : S.copies) {
    std::vector<Point> moved;
    moved.reserve(pts.size());
    for (const Point& p : pts) moved.push_back(tf(p));
    out->copies.emplace_back(ba, std::move(moved));
  }
  for (const auto& [k, pts] : S.cluster_points) {
    std::vector<Point> moved;
    moved.reserve(pts.size());
    for (const Point& p : pts) moved.push_back(tf(p));
    out->cluster_points.emplace_back(k, std::move(moved));
  }
  out->error_bound = S.error_bound * s;
  out->rebuild_index();
  return out;
}

}  // namespace

std::pair<SpaceApprox, Gifs> densify(const std::vector<Point>& K, double eps,
                                     const SpaceApprox& template_space,
                                     const Gifs& template_gifs) {
  if (K.empty()) throw std::invalid_argument("densify: K must be nonempty");
  if (!(eps > 0.0)) throw std::invalid_argument("densify: eps must be positive");
  for (const Point& p : K)
    if (p.size() != template_space.dim)
      throw std::invalid_argument("densify: dimension mismatch between K and the template");

  Cloud anchors;
  {
    std::unordered_set<std::string> seen;
    for (const Point& p : K)
      if (seen.insert(point_key(p)).second) anchors.push_back(p);
  }
  double min_pair = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < anchors.size(); ++i)
    for (std::size_t j = i + 1; j < anchors.size(); ++j)
      min_pair = std::min(min_pair, (anchors[i] - anchors[j]).norm());

  Cloud sites = template_space.all_sites();
  double diam = 0.0;
  Point c0 = sites[0];
  for (const Point& p : sites)
    if (std::lexicographical_compare(p.data(), p.data() + p.size(), c0.data(),
                                     c0.data() + c0.size()))
      c0 = p;
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j)
      diam = std::max(diam, (sites[i] - sites[j]).norm());
  if (diam <= 0.0) throw std::invalid_argument("densify: degenerate template");

  double lip = 1.0;
  for (const GifsMap& f : template_gifs.maps) lip = std::max(lip, f.claimed_lip.value_or(1.0));
  double delta = 0.45 * eps;
  if (anchors.size() > 1) delta = std::min(delta, 0.9 * min_pair / (2.0 + lip));
  double s = delta / diam;

  std::vector<std::shared_ptr<SpaceApprox>> parts;
  std::vector<Gifs> part_gifs;
  for (const Point& a : anchors) {
    auto part = transformed_space(template_space, s, c0, a);
    Gifs g;
    for (const GifsMap& f : template_gifs.maps) {
      GifsMap moved = f;
      if (moved.symbolic()) {
        moved.host = part;
      } else {
        auto fn = f.numeric_fn;
        Point t = a;
        Point c = c0;
        double sc = s;
        moved.numeric_fn = [fn, t, c, sc](const std::vector<Point>& xs) {
          std::vector<Point> back;
          back.reserve(xs.size());
          for (const Point& x : xs) back.push_back(c + (x - t) / sc);
          return Point(t + sc * (fn(back) - c));
        };
        moved.host = part;
      }
      g.maps.push_back(std::move(moved));
    }
    parts.push_back(part);
    part_gifs.push_back(std::move(g));
  }

  std::vector<std::pair<const SpaceApprox*, const Gifs*>> refs;
  for (std::size_t i = 0; i < parts.size(); ++i) refs.emplace_back(parts[i].get(), &part_gifs[i]);
  Gifs combined = combine_separated(refs);

  SpaceApprox unioned;
  unioned.tree = template_space.tree;
  unioned.b = template_space.b;
  unioned.dim = template_space.dim;
  unioned.D = template_space.D;
  unioned.N = template_space.N;
  unioned.error_bound = template_space.error_bound * s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    BoundaryAddress tag{Address(std::vector<Entry>{Entry::num(static_cast<std::uint32_t>(i + 1))}),
                        Exactness::Exact};
    unioned.copies.emplace_back(tag, parts[i]->all_sites());
  }
  unioned.rebuild_index();
  return {std::move(unioned), std::move(combined)};
}

std::pair<SpaceApprox, Gifs> densify(const std::vector<Point>& K, double eps,
                                     const ScatteredGifsBundle& bundle) {
  return densify(K, eps, *bundle.space, bundle.gifs);
}

std::pair<SpaceApprox, Gifs> densify(const std::vector<Point>& K, double eps,
                                     const MixedGifsBundle& bundle) {
  return densify(K, eps, *bundle.space, bundle.gifs);
}

}  // namespace gifslab
