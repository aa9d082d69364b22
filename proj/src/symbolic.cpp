#include "gifslab/symbolic.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

namespace gifslab {

std::string Address::to_path() const {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) out += '.';
    if (entries[i].is_omega())
      out += 'w';
    else
      out += std::to_string(entries[i].num_value());
  }
  return out;
}

Address Address::from_path(const std::string& s) {
  Address a;
  if (s.empty()) return a;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, '.')) {
    if (tok == "w")
      a.entries.push_back(Entry::omega());
    else
      a.entries.push_back(Entry::num(static_cast<std::uint32_t>(std::stoul(tok))));
  }
  if (!a.omega_only_last()) throw std::invalid_argument("Address: omega must be last");
  return a;
}

std::uint64_t weight(const Address& eta) {
  std::uint64_t w = 0;
  for (const Entry& e : eta.entries) {
    if (e.is_omega()) return kOmegaWeight;
    w += e.num_value();
  }
  return w;
}

Address concat(const Address& xi, const Address& eta) {
  if (xi.ends_with_omega()) throw std::invalid_argument("concat: left factor ends with omega");
  Address out = xi;
  out.entries.insert(out.entries.end(), eta.entries.begin(), eta.entries.end());
  return out;
}

bool is_prefix(const Address& xi, const Address& eta) {
  if (xi.size() > eta.size()) return false;
  return std::equal(xi.entries.begin(), xi.entries.end(), eta.entries.begin());
}

OrdinalIndex ladder(OrdinalIndex alpha, std::uint32_t n) {
  if (n < 1) throw std::invalid_argument("ladder: n must be >= 1");
  if (alpha.is_omega()) return OrdinalIndex::fin(n - 1);
  std::uint32_t k = alpha.fin_value();
  if (k == 0) throw std::invalid_argument("ladder: Fin(0) has no ladder");
  return OrdinalIndex::fin(std::min(n - 1, k - 1));
}

// ---------------------------------------------------------------------------
// Tree nodes
// ---------------------------------------------------------------------------

bool TreeNode::is_leaf() const {
  if (has_omega_child()) return false;
  if (infinite_integer_children()) return false;
  return integer_children().empty();
}

std::vector<std::uint32_t> TreeNode::integer_children_up_to(std::uint32_t N) const {
  std::vector<std::uint32_t> out;
  if (infinite_integer_children()) {
    for (std::uint32_t k = 1; k <= N; ++k)
      if (child(Entry::num(k))) out.push_back(k);
  } else {
    for (std::uint32_t k : integer_children())
      if (k <= N) out.push_back(k);
  }
  return out;
}

bool TreeNode::has_integer_child_beyond(std::uint32_t N) const {
  if (infinite_integer_children()) return true;
  for (std::uint32_t k : integer_children())
    if (k > N) return true;
  return false;
}

namespace {

class LeafNode final : public TreeNode {
 public:
  TreeNodePtr child(Entry) const override { return nullptr; }
  bool infinite_integer_children() const override { return false; }
  std::vector<std::uint32_t> integer_children() const override { return {}; }
};

const TreeNodePtr& leaf_node() {
  static const TreeNodePtr n = std::make_shared<LeafNode>();
  return n;
}

class MaxNode final : public TreeNode {
 public:
  TreeNodePtr child(Entry k) const override {
    if (k.is_omega()) return leaf_node();
    return instance();
  }
  bool infinite_integer_children() const override { return true; }
  std::vector<std::uint32_t> integer_children() const override {
    throw std::logic_error("infinite children");
  }
  static const TreeNodePtr& instance() {
    static const TreeNodePtr n = std::make_shared<MaxNode>();
    return n;
  }
};

// Addresses avoiding the entry 1.
class NoOneNode final : public TreeNode {
 public:
  TreeNodePtr child(Entry k) const override {
    if (k.is_omega()) return leaf_node();
    if (k.num_value() == 1) return nullptr;
    return instance();
  }
  bool infinite_integer_children() const override { return true; }
  std::vector<std::uint32_t> integer_children() const override {
    throw std::logic_error("infinite children");
  }
  static const TreeNodePtr& instance() {
    static const TreeNodePtr n = std::make_shared<NoOneNode>();
    return n;
  }
};

// Addresses with at most one entry 1: after a 1, fall through to NoOneNode.
class AtMostOneNode final : public TreeNode {
 public:
  TreeNodePtr child(Entry k) const override {
    if (k.is_omega()) return leaf_node();
    if (k.num_value() == 1) return NoOneNode::instance();
    return instance();
  }
  bool infinite_integer_children() const override { return true; }
  std::vector<std::uint32_t> integer_children() const override {
    throw std::logic_error("infinite children");
  }
  static const TreeNodePtr& instance() {
    static const TreeNodePtr n = std::make_shared<AtMostOneNode>();
    return n;
  }
};

TreeNodePtr alpha_node(OrdinalIndex alpha);

class AlphaNode final : public TreeNode {
 public:
  explicit AlphaNode(OrdinalIndex alpha) : alpha_(alpha) {}
  TreeNodePtr child(Entry k) const override {
    if (k.is_omega()) return leaf_node();
    return alpha_node(ladder(alpha_, k.num_value()));
  }
  bool infinite_integer_children() const override { return true; }
  std::vector<std::uint32_t> integer_children() const override {
    throw std::logic_error("infinite children");
  }

 private:
  OrdinalIndex alpha_;
};

TreeNodePtr alpha_node(OrdinalIndex alpha) {
  if (!alpha.is_omega() && alpha.fin_value() == 0) return leaf_node();
  return std::make_shared<AlphaNode>(alpha);
}

// Children 1..n-1 carry copies of the alpha tree, children >= n descend the
// ladder; the height-0 base case keeps only the n-1 integer leaves.
class AlphaNNode final : public TreeNode {
 public:
  AlphaNNode(OrdinalIndex alpha, std::uint32_t n) : alpha_(alpha), n_(n) {}
  TreeNodePtr child(Entry k) const override {
    if (k.is_omega()) return leaf_node();
    std::uint32_t i = k.num_value();
    bool base = !alpha_.is_omega() && alpha_.fin_value() == 0;
    if (i < n_) return alpha_node(alpha_);
    if (base) return nullptr;
    return alpha_node(ladder(alpha_, i - n_ + 1));
  }
  bool infinite_integer_children() const override {
    return alpha_.is_omega() || alpha_.fin_value() > 0;
  }
  std::vector<std::uint32_t> integer_children() const override {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 1; i < n_; ++i) out.push_back(i);
    return out;
  }

 private:
  OrdinalIndex alpha_;
  std::uint32_t n_;
};

// Finite tree as an explicit suffix set (always containing the empty address).
class SetNode final : public TreeNode {
 public:
  explicit SetNode(std::vector<Address> suffixes) : suffixes_(std::move(suffixes)) {}
  TreeNodePtr child(Entry k) const override {
    std::vector<Address> tails;
    for (const Address& a : suffixes_)
      if (!a.empty() && a[0] == k) tails.push_back(a.tail());
    if (tails.empty()) return nullptr;
    return std::make_shared<SetNode>(std::move(tails));
  }
  bool infinite_integer_children() const override { return false; }
  std::vector<std::uint32_t> integer_children() const override {
    std::set<std::uint32_t> ks;
    for (const Address& a : suffixes_)
      if (!a.empty() && !a[0].is_omega()) ks.insert(a[0].num_value());
    return {ks.begin(), ks.end()};
  }

 private:
  std::vector<Address> suffixes_;
};

class UnionNode final : public TreeNode {
 public:
  UnionNode(std::map<std::uint32_t, TreeNodePtr> branches, bool with_omega)
      : branches_(std::move(branches)), with_omega_(with_omega) {}
  TreeNodePtr child(Entry k) const override {
    if (k.is_omega()) return with_omega_ ? leaf_node() : nullptr;
    auto it = branches_.find(k.num_value());
    return it == branches_.end() ? nullptr : it->second;
  }
  bool infinite_integer_children() const override { return false; }
  std::vector<std::uint32_t> integer_children() const override {
    std::vector<std::uint32_t> out;
    for (const auto& [k, _] : branches_) out.push_back(k);
    return out;
  }

 private:
  std::map<std::uint32_t, TreeNodePtr> branches_;
  bool with_omega_;
};

// Reindexed sibling tail: integer child i maps to the base node's child
// i + k - 1; the (w) leaf is always adjoined.
class Shift2Node final : public TreeNode {
 public:
  Shift2Node(TreeNodePtr parent, std::uint32_t k) : parent_(std::move(parent)), k_(k) {}
  TreeNodePtr child(Entry e) const override {
    if (e.is_omega()) return leaf_node();
    return parent_->child(Entry::num(e.num_value() + k_ - 1));
  }
  bool infinite_integer_children() const override {
    return parent_->infinite_integer_children();
  }
  std::vector<std::uint32_t> integer_children() const override {
    std::vector<std::uint32_t> out;
    for (std::uint32_t j : parent_->integer_children())
      if (j >= k_) out.push_back(j - k_ + 1);
    return out;
  }

 private:
  TreeNodePtr parent_;
  std::uint32_t k_;
};

TreeNodePtr descend(TreeNodePtr node, const Address& eta) {
  for (const Entry& e : eta.entries) {
    if (!node) return nullptr;
    node = node->child(e);
  }
  return node;
}

}  // namespace

// ---------------------------------------------------------------------------
// Tree factories
// ---------------------------------------------------------------------------

TreeSpec tree_lambda_max() {
  TreeSpec t;
  t.kind = TreeKind::LambdaMax;
  t.root = MaxNode::instance();
  return t;
}

TreeSpec tree_lambda_s() {
  TreeSpec t;
  t.kind = TreeKind::LambdaS;
  t.root = NoOneNode::instance();
  return t;
}

TreeSpec tree_lambda_r() {
  TreeSpec t;
  t.kind = TreeKind::LambdaR;
  t.root = AtMostOneNode::instance();
  return t;
}

TreeSpec tree_lambda_alpha(OrdinalIndex alpha) {
  TreeSpec t;
  t.kind = TreeKind::LambdaAlpha;
  t.alpha = alpha;
  t.root = alpha_node(alpha);
  return t;
}

TreeSpec tree_lambda_alpha_n(OrdinalIndex alpha, std::uint32_t n) {
  if (n < 1) throw std::invalid_argument("tree_lambda_alpha_n: n >= 1 required");
  TreeSpec t;
  t.kind = TreeKind::LambdaAlphaN;
  t.alpha = alpha;
  t.n = n;
  t.root = std::make_shared<AlphaNNode>(alpha, n);
  return t;
}

TreeSpec tree_prefixed_union(std::vector<std::pair<std::uint32_t, TreeSpec>> branches,
                             bool include_omega) {
  std::map<std::uint32_t, TreeNodePtr> m;
  for (const auto& [k, spec] : branches) {
    if (k < 1) throw std::invalid_argument("tree_prefixed_union: indices must be >= 1");
    m[k] = spec.root;
  }
  TreeSpec t;
  t.kind = TreeKind::PrefixedUnion;
  t.branches = std::move(branches);
  t.union_omega = include_omega;
  t.root = std::make_shared<UnionNode>(std::move(m), include_omega);
  return t;
}

bool tree_contains(const TreeSpec& tree, const Address& eta) {
  if (!eta.omega_only_last()) return false;
  return descend(tree.root, eta) != nullptr;
}

NodeStatus boundary_status(const TreeSpec& tree, const Address& eta) {
  TreeNodePtr node = eta.omega_only_last() ? descend(tree.root, eta) : nullptr;
  if (!node) return NodeStatus::NotInTree;
  return node->is_leaf() ? NodeStatus::BoundaryLeaf : NodeStatus::InteriorNode;
}

namespace {

void enumerate_rec(const TreeNodePtr& node, const Address& addr, std::uint32_t depth,
                   std::uint32_t D, std::uint32_t N, std::vector<BoundaryAddress>& out) {
  if (node->is_leaf()) {
    out.push_back({addr, Exactness::Exact});
    return;
  }
  if (depth == D) {
    out.push_back({addr, Exactness::TruncatedPath});
    return;
  }
  bool omega = node->has_omega_child();
  if (omega) out.push_back({addr.appended(Entry::omega()), Exactness::Exact});
  for (std::uint32_t k : node->integer_children_up_to(N))
    enumerate_rec(node->child(Entry::num(k)), addr.appended(Entry::num(k)), depth + 1, D, N, out);
  // Width cuts under a node with an (w) child are absorbed by that leaf's
  // error term; without one they need an explicit marker.
  if (!omega && node->has_integer_child_beyond(N))
    out.push_back({addr, Exactness::TruncatedPath});
}

}  // namespace

std::vector<BoundaryAddress> enumerate_boundary(const TreeSpec& tree, std::uint32_t D,
                                                std::uint32_t N) {
  if (D < 1 || N < 1) throw std::invalid_argument("enumerate_boundary: D, N >= 1 required");
  std::vector<BoundaryAddress> out;
  enumerate_rec(tree.root, Address{}, 0, D, N, out);
  return out;
}

TreeSpec subtree_shift1(const TreeSpec& tree, const Address& eta) {
  TreeNodePtr node = descend(tree.root, eta);
  if (!node) throw std::invalid_argument("subtree_shift1: address not in tree");
  if (node->is_leaf()) throw std::invalid_argument("subtree_shift1: address is not interior");
  TreeSpec t;
  t.kind = TreeKind::SubtreeShift1;
  t.base = std::make_shared<const TreeSpec>(tree);
  t.eta = eta;
  t.root = node;
  return t;
}

TreeSpec subtree_shift2(const TreeSpec& tree, const Address& eta, std::uint32_t k) {
  TreeNodePtr node = descend(tree.root, eta);
  if (!node) throw std::invalid_argument("subtree_shift2: address not in tree");
  if (node->is_leaf()) throw std::invalid_argument("subtree_shift2: address is not interior");
  if (!node->child(Entry::num(k)))
    throw std::invalid_argument("subtree_shift2: child k not in tree");
  TreeSpec t;
  t.kind = TreeKind::SubtreeShift2;
  t.base = std::make_shared<const TreeSpec>(tree);
  t.eta = eta;
  t.shift_k = k;
  t.root = std::make_shared<Shift2Node>(node, k);
  return t;
}

TreeSpec tree_of_subset(const std::vector<Address>& addresses) {
  if (addresses.empty()) throw std::invalid_argument("tree_of_subset: empty address set");
  std::set<Address> closure;
  for (const Address& a : addresses) {
    if (!a.omega_only_last())
      throw std::invalid_argument("tree_of_subset: omega must be the last entry");
    for (std::size_t k = 0; k <= a.size(); ++k) closure.insert(a.prefix(k));
  }
  TreeSpec t;
  t.kind = TreeKind::FromAddressSet;
  t.addresses.assign(closure.begin(), closure.end());
  t.root = std::make_shared<SetNode>(t.addresses);
  return t;
}

namespace {

void check_proper_rec(const TreeNodePtr& node, const Address& addr, std::uint32_t depth,
                      std::uint32_t D, std::uint32_t N, ProperReport& report) {
  bool leaf = node->is_leaf();
  if (addr.ends_with_omega()) {
    if (!leaf) {
      report.ok = false;
      report.violations.push_back("(pi) fails at (" + addr.to_path() +
                                  "): omega-ending node has children");
    }
    return;
  }
  if (leaf) return;
  if (!node->has_omega_child()) {
    report.ok = false;
    report.violations.push_back("(pii) fails at (" + addr.to_path() + "): child w missing");
  }
  if (!node->infinite_integer_children()) {
    report.ok = false;
    report.violations.push_back("(pii) fails at (" + addr.to_path() +
                                "): only finitely many integer children");
  }
  for (std::uint32_t k = 1; k <= N; ++k) {
    if (!node->child(Entry::num(k))) {
      report.ok = false;
      report.violations.push_back("(pii) fails at (" + addr.to_path() + "): child " +
                                  std::to_string(k) + " missing");
      break;
    }
  }
  if (depth == D) return;
  for (std::uint32_t k : node->integer_children_up_to(N))
    check_proper_rec(node->child(Entry::num(k)), addr.appended(Entry::num(k)), depth + 1, D, N,
                     report);
}

}  // namespace

ProperReport check_proper(const TreeSpec& tree, std::uint32_t D, std::uint32_t N) {
  ProperReport report;
  check_proper_rec(tree.root, Address{}, 0, D, N, report);
  return report;
}

std::pair<OrdinalIndex, std::uint32_t> cb_height_symbolic(const TreeSpec& tree) {
  if (tree.kind == TreeKind::LambdaAlpha) return {tree.alpha, 1};
  if (tree.kind == TreeKind::LambdaAlphaN) return {tree.alpha, tree.n};
  throw std::invalid_argument("cb_height_symbolic: unsupported tree kind");
}

std::map<Address, std::uint32_t> cb_rank_bruteforce(const std::vector<BoundaryAddress>& boundary,
                                                    const TreeSpec& tree) {
  std::vector<Address> pts;
  for (const BoundaryAddress& b : boundary) {
    if (!b.exact())
      throw std::invalid_argument("cb_rank_bruteforce: TruncatedPath entries present");
    if (!tree_contains(tree, b.prefix))
      throw std::invalid_argument("cb_rank_bruteforce: boundary address not in tree");
    pts.push_back(b.prefix);
  }
  if (pts.empty()) return {};

  // Clopen basis over the finite prefix-closure tree: for every non-omega
  // node xi, the cone below xi and the tail-union of siblings >= xi's last
  // entry.
  std::set<Address> closure;
  for (const Address& p : pts)
    for (std::size_t k = 0; k <= p.size(); ++k) closure.insert(p.prefix(k));

  const std::size_t npts = pts.size();
  std::vector<std::vector<std::uint32_t>> basis;
  for (const Address& xi : closure) {
    if (xi.ends_with_omega()) continue;
    std::vector<std::uint32_t> cone;
    for (std::uint32_t i = 0; i < npts; ++i)
      if (is_prefix(xi, pts[i])) cone.push_back(i);
    basis.push_back(std::move(cone));
    if (!xi.empty()) {
      std::size_t d = xi.size() - 1;
      Address parent = xi.prefix(d);
      std::vector<std::uint32_t> tail;
      for (std::uint32_t i = 0; i < npts; ++i)
        if (pts[i].size() > d && is_prefix(parent, pts[i]) && pts[i][d] >= xi[d])
          tail.push_back(i);
      basis.push_back(std::move(tail));
    }
  }

  // When a node has only finitely many integer children, the sibling tail
  // beyond the largest child is clopen and contains just the omega point, so
  // that point is isolated regardless of how many siblings the truncation
  // shows.
  for (std::uint32_t i = 0; i < npts; ++i) {
    if (!pts[i].ends_with_omega()) continue;
    Address parent = pts[i].prefix(pts[i].size() - 1);
    TreeNodePtr node = tree.root;
    for (const Entry& e : parent.entries) {
      if (!node) break;
      node = node->child(e);
    }
    if (!node || node->infinite_integer_children()) continue;
    std::uint32_t cmax = 0;
    for (std::uint32_t c : node->integer_children()) cmax = std::max(cmax, c);
    std::size_t d = parent.size();
    std::vector<std::uint32_t> tail;
    for (std::uint32_t j = 0; j < npts; ++j)
      if (pts[j].size() > d && is_prefix(parent, pts[j]) && pts[j][d].raw() > cmax)
        tail.push_back(j);
    basis.push_back(std::move(tail));
  }

  std::map<Address, std::uint32_t> ranks;
  std::vector<char> alive(npts, 1);
  std::size_t remaining = npts;
  std::uint32_t stage = 0;
  while (remaining > 0) {
    std::vector<char> isolated(npts, 0);
    for (const auto& set : basis) {
      std::uint32_t count = 0, last = 0;
      for (std::uint32_t i : set)
        if (alive[i]) {
          ++count;
          last = i;
          if (count > 1) break;
        }
      if (count == 1) isolated[last] = 1;
    }
    std::size_t removed = 0;
    for (std::uint32_t i = 0; i < npts; ++i)
      if (alive[i] && isolated[i]) {
        ranks[pts[i]] = stage;
        alive[i] = 0;
        ++removed;
      }
    if (removed == 0)
      throw std::runtime_error("cb_rank_bruteforce: no isolated point at stage " +
                               std::to_string(stage));
    remaining -= removed;
    ++stage;
  }
  return ranks;
}

}  // namespace gifslab
