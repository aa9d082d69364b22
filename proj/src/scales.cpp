#include "gifslab/scales.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gifslab {

namespace {

constexpr double kRatioLimit = 1.0 / 25.0;

void require_ratio(double q) {
  if (!(q > 0.0) || !(q < kRatioLimit))
    throw std::invalid_argument("GoodSequence: ratio must lie in (0, 1/25)");
}

}  // namespace

GoodSequence GoodSequence::geometric(double c, double q) {
  if (!(c > 0.0)) throw std::invalid_argument("GoodSequence: c must be positive");
  require_ratio(q);
  GoodSequence s;
  s.kind_ = Kind::Geometric;
  s.b0_ = c;
  s.tail_ = q;
  s.m_ = q;
  return s;
}

GoodSequence GoodSequence::ratio_table(double b0, std::vector<double> ratios, double tail) {
  if (!(b0 > 0.0)) throw std::invalid_argument("GoodSequence: b0 must be positive");
  for (double q : ratios) require_ratio(q);
  require_ratio(tail);
  GoodSequence s;
  s.kind_ = Kind::RatioTable;
  s.b0_ = b0;
  s.ratios_ = std::move(ratios);
  s.tail_ = tail;
  s.m_ = tail;
  for (double q : s.ratios_) s.m_ = std::max(s.m_, q);
  return s;
}

double GoodSequence::ratio(std::uint64_t k) const {
  if (k < 1) throw std::invalid_argument("GoodSequence::ratio: k >= 1 required");
  if (kind_ == Kind::Geometric || k > ratios_.size()) return tail_;
  return ratios_[k - 1];
}

double GoodSequence::b(std::uint64_t k) const {
  if (k == kOmegaWeight) return 0.0;
  if (kind_ == Kind::Geometric) return b0_ * std::pow(tail_, static_cast<double>(k));
  double v = b0_;
  for (std::uint64_t j = 1; j <= k; ++j) v *= ratio(j);
  return v;
}

GoodSequence GoodSequence::shifted(std::uint64_t i) const {
  if (i == 0) return *this;
  if (kind_ == Kind::Geometric) return geometric(b(i), tail_);
  std::vector<double> rest;
  for (std::uint64_t k = i + 1; k <= ratios_.size(); ++k) rest.push_back(ratios_[k - 1]);
  return ratio_table(b(i), std::move(rest), tail_);
}

ScaleReport validate_good(const GoodSequence& b, std::uint64_t K) {
  if (K < 2) throw std::invalid_argument("validate_good: K >= 2 required");
  ScaleReport report;
  std::uint64_t table = b.kind() == GoodSequence::Kind::Geometric
                            ? 1
                            : static_cast<std::uint64_t>(b.ratios().size()) + 1;
  for (std::uint64_t k = 1; k <= std::max(K, table); ++k) {
    double q = b.ratio(k);
    if (!(q > 0.0 && q < kRatioLimit)) {
      report.ok = false;
      report.failures.push_back("ratio condition fails at k=" + std::to_string(k));
    }
  }
  double lambda = b.lambda();
  for (std::uint64_t k = 1; k <= K; ++k) {
    double lhs = b.b(k);
    double rhs = (lambda / 20.0) * (b.b(k - 1) - 2.0 * b.b(k) - b.b(k + 1));
    if (lhs > rhs + 1e-12 * std::max(std::abs(lhs), std::abs(rhs))) {
      report.ok = false;
      report.failures.push_back("derived gap inequality fails at k=" + std::to_string(k));
    }
  }
  return report;
}

std::vector<BigInt> p_for_order(std::uint32_t m, const BigInt& p1, PMode mode,
                                std::size_t count) {
  if (m < 1) throw std::invalid_argument("p_for_order: m >= 1 required");
  if (p1 < 2) throw std::invalid_argument("p_for_order: p1 >= 2 required");
  std::vector<BigInt> p;
  p.reserve(count);
  if (count == 0) return p;
  p.push_back(p1);
  for (std::size_t n = 1; n < count; ++n) {
    unsigned exp = mode == PMode::PowerM ? m : static_cast<unsigned>(n);
    p.push_back(boost::multiprecision::pow(p.back(), exp));
  }
  return p;
}

BigInt GoodPair::p_at(std::size_t k) const {
  if (k < 1) throw std::invalid_argument("GoodPair::p_at: k >= 1 required");
  if (p.empty()) throw std::logic_error("GoodPair::p_at: empty p");
  return k <= p.size() ? p[k - 1] : p.back();
}

ScaleReport validate_pair(const GoodPair& pair, std::uint64_t K) {
  ScaleReport report = validate_good(pair.b, std::max<std::uint64_t>(K, 2));
  double lambda = pair.b.lambda();
  for (std::uint64_t k = 1; k <= K; ++k) {
    double pk = pair.p_at(k).convert_to<double>();
    double q = pair.b.ratio(k);
    if (!(8.0 * (1.0 + 4.0 * pk) * q < 1.0)) {
      report.ok = false;
      report.failures.push_back("pair condition 8(1+4p_k) b_k/b_{k-1} < 1 fails at k=" +
                                std::to_string(k));
    }
    if (k >= 2 && !(q * pk <= lambda)) {
      report.ok = false;
      report.failures.push_back("pair condition (b_k/b_{k-1}) p_k <= lambda fails at k=" +
                                std::to_string(k));
    }
  }
  return report;
}

GoodPair pair_b_for_p(const std::vector<BigInt>& p, std::size_t K) {
  if (p.empty()) throw std::invalid_argument("pair_b_for_p: empty p");
  for (const BigInt& pk : p)
    if (pk < 2) throw std::invalid_argument("pair_b_for_p: p_k >= 2 required");
  if (K < 1) throw std::invalid_argument("pair_b_for_p: K >= 1 required");

  auto p_at = [&](std::size_t k) { return (k <= p.size() ? p[k - 1] : p.back()); };
  auto cap = [](const BigInt& pk) {
    return 1.0 / (16.0 * (1.0 + 4.0 * pk.convert_to<double>()));
  };

  double q1 = std::min(1.0 / 26.0, cap(p_at(1)));
  double lambda = 25.0 * q1;
  std::vector<double> ratios{q1};
  for (std::size_t k = 2; k <= K; ++k) {
    double pk = p_at(k).convert_to<double>();
    ratios.push_back(std::min({1.0 / 26.0, cap(p_at(k)), lambda / pk}));
  }
  double tail = ratios.back();
  GoodPair pair{GoodSequence::ratio_table(1.0, std::move(ratios), tail), p};
  ScaleReport check = validate_pair(pair, K);
  if (!check.ok) throw std::runtime_error("pair_b_for_p: constructed pair fails validation");
  return pair;
}

}  // namespace gifslab
