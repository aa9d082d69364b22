#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gifslab {

// One entry of a tree address: a positive integer or the limit symbol omega.
// omega compares strictly greater than every integer.
class Entry {
 public:
  static constexpr std::uint32_t kOmegaRaw = std::numeric_limits<std::uint32_t>::max();

  static Entry omega() { return Entry(kOmegaRaw); }
  static Entry num(std::uint32_t k) {
    if (k < 1 || k == kOmegaRaw) throw std::invalid_argument("Entry: integer entries must be >= 1");
    return Entry(k);
  }

  bool is_omega() const { return v_ == kOmegaRaw; }
  std::uint32_t num_value() const {
    if (is_omega()) throw std::logic_error("Entry: omega has no integer value");
    return v_;
  }
  std::uint32_t raw() const { return v_; }

  auto operator<=>(const Entry&) const = default;

 private:
  explicit Entry(std::uint32_t v) : v_(v) {}
  std::uint32_t v_;
};

// Finite sequence of entries locating a node (or boundary point) of a tree.
// omega may appear only as the last entry.
struct Address {
  std::vector<Entry> entries;

  Address() = default;
  explicit Address(std::vector<Entry> e) : entries(std::move(e)) {}

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  const Entry& operator[](std::size_t i) const { return entries[i]; }
  const Entry& back() const { return entries.back(); }
  bool ends_with_omega() const { return !empty() && entries.back().is_omega(); }
  bool omega_only_last() const {
    for (std::size_t i = 0; i + 1 < entries.size(); ++i)
      if (entries[i].is_omega()) return false;
    return true;
  }

  Address prefix(std::size_t k) const {
    if (k > entries.size()) throw std::out_of_range("Address::prefix");
    return Address(std::vector<Entry>(entries.begin(), entries.begin() + k));
  }
  Address appended(Entry e) const {
    Address a = *this;
    a.entries.push_back(e);
    return a;
  }
  Address tail() const {
    if (empty()) throw std::out_of_range("Address::tail");
    return Address(std::vector<Entry>(entries.begin() + 1, entries.end()));
  }

  // Dotted path form: "2.3.w"; the empty address renders as "".
  std::string to_path() const;
  // Parse the dotted form back ("" -> empty address).
  static Address from_path(const std::string& s);

  auto operator<=>(const Address&) const = default;
};

struct AddressHash {
  std::size_t operator()(const Address& a) const {
    std::size_t h = 0xcbf29ce484222325ull;
    for (const Entry& e : a.entries) {
      h ^= e.raw();
      h *= 0x100000001b3ull;
    }
    return h;
  }
};

// Weight l(eta): sum of the entries, 0 for the empty address, omega if any
// entry is omega. kOmegaWeight is the omega sentinel.
inline constexpr std::uint64_t kOmegaWeight = std::numeric_limits<std::uint64_t>::max();
std::uint64_t weight(const Address& eta);

// Concatenation; rejects a left factor ending in omega.
Address concat(const Address& xi, const Address& eta);

bool is_prefix(const Address& xi, const Address& eta);

// alpha <= omega, used to index the scattered-tree family.
struct OrdinalIndex {
  std::uint32_t v = 0;  // Entry::kOmegaRaw encodes Omega, otherwise Fin(v)

  static OrdinalIndex fin(std::uint32_t k) { return OrdinalIndex{k}; }
  static OrdinalIndex omega() { return OrdinalIndex{Entry::kOmegaRaw}; }
  bool is_omega() const { return v == Entry::kOmegaRaw; }
  std::uint32_t fin_value() const {
    if (is_omega()) throw std::logic_error("OrdinalIndex: not finite");
    return v;
  }
  auto operator<=>(const OrdinalIndex&) const = default;
};

// n-th ladder element below alpha: Fin(min(n-1, k-1)) for alpha = Fin(k),
// Fin(n-1) for alpha = Omega. Fin(0) has no ladder.
OrdinalIndex ladder(OrdinalIndex alpha, std::uint32_t n);

enum class Exactness { Exact, TruncatedPath };

struct BoundaryAddress {
  Address prefix;
  Exactness exactness = Exactness::Exact;

  bool exact() const { return exactness == Exactness::Exact; }
  auto operator<=>(const BoundaryAddress&) const = default;
};

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

class TreeNode;
using TreeNodePtr = std::shared_ptr<const TreeNode>;

// Intensional tree node. child() returns nullptr when the entry is not a
// child. Integer-children sets may be infinite (all our built-in infinite
// trees are cofinite in N at every node).
class TreeNode {
 public:
  virtual ~TreeNode() = default;
  virtual TreeNodePtr child(Entry k) const = 0;
  virtual bool infinite_integer_children() const = 0;
  // Exact set; only meaningful when !infinite_integer_children().
  virtual std::vector<std::uint32_t> integer_children() const = 0;

  bool has_omega_child() const { return child(Entry::omega()) != nullptr; }
  bool is_leaf() const;
  // Integer children restricted to 1..N, ascending.
  std::vector<std::uint32_t> integer_children_up_to(std::uint32_t N) const;
  // True when some integer child with index > N exists.
  bool has_integer_child_beyond(std::uint32_t N) const;
};

enum class TreeKind {
  LambdaMax,
  LambdaS,
  LambdaR,
  LambdaAlpha,
  LambdaAlphaN,
  SubtreeShift1,
  SubtreeShift2,
  FromAddressSet,
  PrefixedUnion,
};

// Value handle on a tree: intensional description plus the root node.
struct TreeSpec {
  TreeKind kind = TreeKind::LambdaMax;
  OrdinalIndex alpha{};
  std::uint32_t n = 0;                      // LambdaAlphaN
  std::shared_ptr<const TreeSpec> base;     // shifts
  Address eta;                              // shifts
  std::uint32_t shift_k = 0;                // SubtreeShift2
  std::vector<Address> addresses;           // FromAddressSet (prefix-closed)
  std::vector<std::pair<std::uint32_t, TreeSpec>> branches;  // PrefixedUnion
  bool union_omega = true;                  // PrefixedUnion: include the (w) leaf
  TreeNodePtr root;
};

TreeSpec tree_lambda_max();
TreeSpec tree_lambda_s();  // addresses avoiding the entry 1 (plain tree, not proper)
TreeSpec tree_lambda_r();  // addresses with at most one entry 1 (plain tree)
TreeSpec tree_lambda_alpha(OrdinalIndex alpha);
TreeSpec tree_lambda_alpha_n(OrdinalIndex alpha, std::uint32_t n);
TreeSpec tree_prefixed_union(std::vector<std::pair<std::uint32_t, TreeSpec>> branches,
                             bool include_omega = true);

bool tree_contains(const TreeSpec& tree, const Address& eta);

enum class NodeStatus { InteriorNode, BoundaryLeaf, NotInTree };
NodeStatus boundary_status(const TreeSpec& tree, const Address& eta);

// Finite truncation of the boundary: exact leaves with integer entries <= N and
// length <= D, the (w) leaf of every visited interior node, and TruncatedPath
// markers for interior nodes at depth D (or width-cut nodes lacking an (w)
// child). Depth-first; at each node the (w) leaf comes first, then integer
// children ascending.
std::vector<BoundaryAddress> enumerate_boundary(const TreeSpec& tree, std::uint32_t D,
                                                std::uint32_t N);

TreeSpec subtree_shift1(const TreeSpec& tree, const Address& eta);
TreeSpec subtree_shift2(const TreeSpec& tree, const Address& eta, std::uint32_t k);

// Prefix closure of a finite address set (omega only in last position).
TreeSpec tree_of_subset(const std::vector<Address>& addresses);

struct ProperReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Checks leafness of omega-ending nodes and completeness of children on the
// (D,N)-truncation.
ProperReport check_proper(const TreeSpec& tree, std::uint32_t D, std::uint32_t N);

// Scattered height and top-level cardinality for the built-in scattered trees.
std::pair<OrdinalIndex, std::uint32_t> cb_height_symbolic(const TreeSpec& tree);

// Iterated removal of points isolated in the clopen-basis topology of the
// prefix-closure tree of `boundary`. Requires an all-Exact boundary.
std::map<Address, std::uint32_t> cb_rank_bruteforce(const std::vector<BoundaryAddress>& boundary,
                                                    const TreeSpec& tree);

}  // namespace gifslab
