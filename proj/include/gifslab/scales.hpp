#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <vector>

#include "gifslab/symbolic.hpp"

namespace gifslab {

using BigInt = boost::multiprecision::cpp_int;

// Decreasing positive scale sequence with sup_k b_k/b_{k-1} < 1/25. Carried as
// a ratio representation so the sup condition is a finite maximum; values are
// rebuilt as products on demand. b(kOmegaWeight) = 0.
class GoodSequence {
 public:
  enum class Kind { Geometric, RatioTable };

  static GoodSequence geometric(double c, double q);
  static GoodSequence ratio_table(double b0, std::vector<double> ratios, double tail);

  double b(std::uint64_t k) const;
  double M() const { return m_; }
  double lambda() const { return 25.0 * m_; }
  GoodSequence shifted(std::uint64_t i) const;

  Kind kind() const { return kind_; }
  double b0() const { return b0_; }
  const std::vector<double>& ratios() const { return ratios_; }
  double tail_ratio() const { return tail_; }
  // Ratio b_k / b_{k-1} straight from the representation, k >= 1.
  double ratio(std::uint64_t k) const;

 private:
  GoodSequence() = default;
  Kind kind_ = Kind::Geometric;
  double b0_ = 1.0;
  std::vector<double> ratios_;  // q_1..q_K (empty for geometric)
  double tail_ = 0.0;           // constant ratio beyond the table (or the geometric q)
  double m_ = 0.0;
};

inline GoodSequence geometric_good(double c, double q) { return GoodSequence::geometric(c, q); }

struct ScaleReport {
  bool ok = true;
  std::vector<std::string> failures;
};

// Checks the ratio condition exactly on the representation and the derived
// inequality b_k <= (1/20) lambda (b_{k-1} - 2 b_k - b_{k+1}) for k = 1..K
// (relative tolerance 1e-12).
ScaleReport validate_good(const GoodSequence& b, std::uint64_t K);

inline GoodSequence shift(const GoodSequence& b, std::uint64_t i) { return b.shifted(i); }

enum class PMode { PowerM, PowerN };

// Cluster-cardinality sequence p_1, p_2, ...: p_{n+1} = p_n^m (PowerM) or
// p_{n+1} = p_n^n (PowerN); exact integers.
std::vector<BigInt> p_for_order(std::uint32_t m, const BigInt& p1, PMode mode,
                                std::size_t count);

struct GoodPair {
  GoodSequence b;
  std::vector<BigInt> p;  // p[k-1] = p_k

  BigInt p_at(std::size_t k) const;  // 1-based, constant extension beyond the table
};

// Coupling inequalities of a good pair, checked for k = 1..K.
ScaleReport validate_pair(const GoodPair& pair, std::uint64_t K);

// Realizes a good pair for the given p: ratio table with
// q_1 = min{1/26, 1/(16(1+4 p_1))}, lambda = 25 q_1,
// q_k = min{1/26, 1/(16(1+4 p_k)), lambda / p_k}, constant tail q_K.
GoodPair pair_b_for_p(const std::vector<BigInt>& p, std::size_t K);

}  // namespace gifslab
