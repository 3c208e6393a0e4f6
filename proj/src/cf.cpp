#include "kakulab/cf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "kakulab/errors.hpp"

namespace kakulab {

namespace mp = boost::multiprecision;
using BigInt = mp::cpp_int;

namespace {

constexpr std::uint64_t kDenominatorLimit = std::uint64_t{1} << 62;

CirclePoint fraction_to_circle(const BigInt& num, const BigInt& den) {
  BigInt scaled = (num << 128) / den;
  scaled &= (BigInt(1) << 128) - 1;
  const auto hi = static_cast<std::uint64_t>(scaled >> 64);
  const auto lo = static_cast<std::uint64_t>(scaled & BigInt(std::numeric_limits<std::uint64_t>::max()));
  return CirclePoint::from_raw((static_cast<u128>(hi) << 64) | lo);
}

// Value of [0; a_1, ..., a_K, tail...] truncated once q exceeds 2^72, so
// the truncation error 1/q^2 is far below the 2^-128 grid.
CirclePoint value_from_quotients(std::span<const std::uint64_t> a, std::uint64_t tail) {
  BigInt p_prev = 1, p = 0;  // p_{-1}, p_0
  BigInt q_prev = 0, q = 1;  // q_{-1}, q_0
  const BigInt limit = BigInt(1) << 72;
  std::size_t k = 0;
  while (q < limit || k < a.size()) {
    const BigInt ak = k < a.size() ? BigInt(a[k]) : BigInt(tail);
    BigInt p_next = ak * p + p_prev;
    BigInt q_next = ak * q + q_prev;
    p_prev = p;
    p = p_next;
    q_prev = q;
    q = q_next;
    ++k;
  }
  return fraction_to_circle(p, q);
}

Irrational quadratic(std::uint64_t quotient, int depth, int max_depth, const char* label) {
  if (depth < 2 || depth > max_depth)
    throw DomainError(std::string(label) + ": depth must lie in [2, " + std::to_string(max_depth) + "]");
  std::vector<std::uint64_t> a(static_cast<std::size_t>(depth), quotient);
  return Irrational(value_from_quotients(a, quotient), std::move(a), label);
}

// Continued fraction of the rational num/den in (0,1).
Irrational expand_rational(BigInt num, BigInt den, int depth, std::string label) {
  if (depth < 2) throw DomainError("expand_cf: depth must be >= 2");
  if (num <= 0 || num >= den) throw DomainError("expand_cf: value must lie strictly inside (0,1)");
  const CirclePoint value = fraction_to_circle(num, den);
  const BigInt input_den = den;

  std::vector<std::uint64_t> a;
  BigInt q_prev = 0, q = 1;
  BigInt n = num, d = den;  // remainder n/d in (0,1)
  for (int k = 1; k <= depth; ++k) {
    if (n == 0)
      throw PrecisionError("expand_cf: expansion terminates (rational input) at index " + std::to_string(k), k);
    const BigInt ak = d / n;
    const BigInt rem = d % n;
    const BigInt q_next = ak * q + q_prev;
    if (q_next * q_next > input_den || q_next >= kDenominatorLimit)
      throw PrecisionError("expand_cf: partial quotient " + std::to_string(k) +
                               " is not determined by the input precision",
                           k);
    a.push_back(static_cast<std::uint64_t>(ak));
    q_prev = q;
    q = q_next;
    d = n;
    n = rem;
  }
  return Irrational(value, std::move(a), std::move(label));
}

}  // namespace

Irrational::Irrational(CirclePoint value, std::vector<std::uint64_t> partial_quotients, std::string label)
    : value_(value), partial_quotients_(std::move(partial_quotients)), label_(std::move(label)) {
  if (partial_quotients_.empty()) throw DomainError("Irrational: empty expansion");
  const std::size_t k = partial_quotients_.size();
  denominators_.resize(k + 1);
  numerators_.resize(k + 1);
  denominators_[0] = 1;
  numerators_[0] = 0;
  std::uint64_t q_prev = 0, p_prev = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::uint64_t ai = partial_quotients_[i - 1];
    if (ai == 0) throw DomainError("Irrational: partial quotients must be positive");
    const u128 qn = static_cast<u128>(ai) * denominators_[i - 1] + q_prev;
    const u128 pn = static_cast<u128>(ai) * numerators_[i - 1] + p_prev;
    if (qn >= kDenominatorLimit) throw CapacityError("Irrational: convergent denominators overflow 62 bits");
    q_prev = denominators_[i - 1];
    p_prev = numerators_[i - 1];
    denominators_[i] = static_cast<std::uint64_t>(qn);
    numerators_[i] = static_cast<std::uint64_t>(pn);
  }
}

int Irrational::convergent_index(std::uint64_t n) const {
  if (n == 0) throw DomainError("convergent_index: n must be positive");
  const auto it = std::upper_bound(denominators_.begin(), denominators_.end(), n);
  const int s = static_cast<int>(it - denominators_.begin()) - 1;
  if (s >= depth())
    throw CapacityError("convergent_index: " + std::to_string(n) + " is beyond q_K = " +
                        std::to_string(denominators_.back()));
  return s;
}

Irrational golden_mean(int depth) { return quadratic(1, depth, kMaxGoldenDepth, "golden"); }

Irrational sqrt2_minus_1(int depth) { return quadratic(2, depth, kMaxSqrt2Depth, "sqrt2m1"); }

Irrational from_partial_quotients(std::span<const std::uint64_t> a, std::string label) {
  std::vector<std::uint64_t> quotients(a.begin(), a.end());
  return Irrational(value_from_quotients(quotients, 1), std::move(quotients), std::move(label));
}

Irrational expand_cf(double value, int depth) {
  if (!(value > 0.0 && value < 1.0)) throw DomainError("expand_cf: value must lie strictly inside (0,1)");
  int exponent = 0;
  const double mantissa = std::frexp(value, &exponent);  // value = mantissa * 2^exponent
  const auto m = static_cast<std::uint64_t>(std::ldexp(mantissa, 53));
  BigInt num = m;
  BigInt den = BigInt(1) << (53 - exponent);
  const BigInt g = mp::gcd(num, den);
  return expand_rational(num / g, den / g, depth, "double");
}

Irrational expand_cf_decimal(std::string_view decimal, int depth) {
  std::string_view s = decimal;
  if (s.starts_with("0.")) s.remove_prefix(2);
  else if (s.starts_with(".")) s.remove_prefix(1);
  else throw DomainError("expand_cf: decimal must have the form 0.ddd");
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw DomainError("expand_cf: malformed decimal '" + std::string(decimal) + "'");
  BigInt num = 0, den = 1;
  for (char c : s) {
    num = num * 10 + (c - '0');
    den *= 10;
  }
  const BigInt g = mp::gcd(num, den);
  if (num == 0) throw DomainError("expand_cf: value must lie strictly inside (0,1)");
  return expand_rational(num / g, den / g, depth, std::string(decimal));
}

Irrational parse_alpha(std::string_view spec, int depth) {
  if (spec == "golden") return golden_mean(std::min(depth, kMaxGoldenDepth));
  if (spec == "sqrt2m1") return sqrt2_minus_1(std::min(depth, kMaxSqrt2Depth));
  return expand_cf_decimal(spec, depth);
}

double best_approx_dist(const Irrational& alpha, std::uint64_t n) {
  if (n == 0) throw DomainError("best_approx_dist: N must be positive");
  if (n >= alpha.q(alpha.depth()))
    throw CapacityError("best_approx_dist: N = " + std::to_string(n) + " needs convergents beyond q_K");
  return (static_cast<std::int64_t>(n) * alpha.value()).norm();
}

DiophantineReport check_class_d(const Irrational& alpha, double c, IndexRange range) {
  if (!(c > 0.0)) throw DomainError("check_class_d: C must be positive");
  if (range.lo > range.hi || range.hi + 1 > alpha.depth() || range.lo < 0)
    throw CapacityError("check_class_d: range exceeds stored convergents");
  DiophantineReport report;
  report.alpha_label = alpha.label();
  report.constant_c = c;
  report.checked_range = range;
  for (int n = std::max(range.lo, 2); n <= range.hi; ++n) {
    const double qn = static_cast<double>(alpha.q(n));
    if (qn < 3.0) continue;
    const double logn = std::log(static_cast<double>(n));
    const double scale = qn * std::log(qn) * logn * logn;
    const double q_next = static_cast<double>(alpha.q(n + 1));
    report.smallest_passing_c = std::max(report.smallest_passing_c, q_next / scale);
    if (!(q_next < c * scale) && !report.first_violation) {
      report.in_class_d = false;
      report.first_violation = n + 1;
    }
  }
  return report;
}

NControlReport ncontrol_check(const Irrational& alpha, std::span<const std::uint64_t> ns, double c) {
  NControlReport report;
  std::uint64_t last_violation = 0;
  std::uint64_t smallest_valid = 0;
  for (std::uint64_t n : ns) {
    const double nd = static_cast<double>(n);
    const double bound = n >= 3 ? 1.0 / (nd * std::pow(std::log(nd), 10.0)) : 1.0;
    if (n < 3 || bound > 0.5) {
      report.below_threshold.push_back(n);
      continue;
    }
    if (smallest_valid == 0 || n < smallest_valid) smallest_valid = n;
    if (best_approx_dist(alpha, n) < bound) {
      report.violations.push_back(n);
      last_violation = std::max(last_violation, n);
    }
  }
  std::uint64_t threshold = smallest_valid;
  if (last_violation != 0) {
    threshold = 0;
    for (std::uint64_t n : ns)
      if (n > last_violation && (threshold == 0 || n < threshold)) threshold = n;
  }
  report.empirical_threshold = threshold;
  const double needed = std::max(1000.0, c);
  for (int k = 0; k <= alpha.depth(); ++k) {
    if (std::log(static_cast<double>(alpha.q(k))) > needed) {
      report.prescribed_threshold_index = k;
      break;
    }
  }
  return report;
}

std::vector<std::uint64_t> log_sampled_integers(std::uint64_t lo, std::uint64_t hi, int count) {
  if (lo == 0 || lo > hi || count < 1) throw DomainError("log_sampled_integers: need 0 < lo <= hi, count >= 1");
  std::vector<std::uint64_t> out;
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    auto n = static_cast<std::uint64_t>(std::llround(std::exp(a + t * (b - a))));
    n = std::clamp(n, lo, hi);
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  return out;
}

}  // namespace kakulab
