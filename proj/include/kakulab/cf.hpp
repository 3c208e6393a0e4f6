#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kakulab/circle.hpp"

namespace kakulab {

/// An irrational rotation number together with its continued-fraction data.
///
/// Indices follow the usual convention: a_1..a_K are the partial quotients,
/// q_0 = 1, q_1 = a_1, q_k = a_k q_{k-1} + q_{k-2}; likewise p_0 = 0, p_1 = 1.
/// The value itself is kept as a 128-bit circle point so that orbit
/// positions n*alpha are exact modulo 2^-128.
class Irrational {
 public:
  Irrational(CirclePoint value, std::vector<std::uint64_t> partial_quotients,
             std::string label);

  CirclePoint value() const { return value_; }
  double as_double() const { return value_.to_double(); }
  const std::string& label() const { return label_; }

  /// Number of stored partial quotients K.
  int depth() const { return static_cast<int>(partial_quotients_.size()); }

  /// a_k for 1 <= k <= K.
  std::uint64_t a(int k) const { return partial_quotients_.at(static_cast<std::size_t>(k - 1)); }
  std::uint64_t q(int k) const { return denominators_.at(static_cast<std::size_t>(k)); }
  std::uint64_t p(int k) const { return numerators_.at(static_cast<std::size_t>(k)); }

  std::span<const std::uint64_t> partial_quotients() const { return partial_quotients_; }
  std::span<const std::uint64_t> denominators() const { return denominators_; }
  std::span<const std::uint64_t> numerators() const { return numerators_; }

  /// Largest s with q_s <= n (ties between q_0 = q_1 = 1 resolve upwards).
  /// Throws CapacityError when n >= q_K, since then s+1 is not stored.
  int convergent_index(std::uint64_t n) const;

 private:
  CirclePoint value_;
  std::vector<std::uint64_t> partial_quotients_;
  std::vector<std::uint64_t> denominators_;
  std::vector<std::uint64_t> numerators_;
  std::string label_;
};

/// Deepest expansion whose denominators still fit comfortably in 63 bits.
inline constexpr int kMaxGoldenDepth = 88;
inline constexpr int kMaxSqrt2Depth = 48;

/// (sqrt 5 - 1)/2, generated from its all-ones expansion.
Irrational golden_mean(int depth = kMaxGoldenDepth);

/// sqrt 2 - 1, generated from its all-twos expansion.
Irrational sqrt2_minus_1(int depth = kMaxSqrt2Depth);

/// The irrational [0; a_1, ..., a_K, 1, 1, 1, ...]: the given quotients
/// followed by a golden tail, so the value is irrational while the stored
/// expansion is exactly the given one.
Irrational from_partial_quotients(std::span<const std::uint64_t> a, std::string label = "synthetic");

/// Expands a double (taken as its exact binary rational).
///
/// Throws DomainError unless 0 < value < 1 and depth >= 2. Throws
/// PrecisionError naming the first index k at which the expansion
/// terminates or at which q_k^2 exceeds the denominator of the input, i.e.
/// the quotient is no longer determined by the available digits.
Irrational expand_cf(double value, int depth);

/// Same as expand_cf but reads a decimal literal exactly ("0.41421356...").
Irrational expand_cf_decimal(std::string_view decimal, int depth);

/// Parses "golden", "sqrt2m1" or a decimal literal.
Irrational parse_alpha(std::string_view spec, int depth);

/// min_m |N alpha - m|, evaluated in 128-bit fixed point.
double best_approx_dist(const Irrational& alpha, std::uint64_t n);

struct IndexRange {
  int lo = 0;
  int hi = 0;
};

struct DiophantineReport {
  std::string alpha_label;
  double constant_c = 0.0;
  IndexRange checked_range;
  bool in_class_d = true;
  /// Index n+1 of the first denominator with q_{n+1} >= C q_n log q_n (log n)^2.
  std::optional<int> first_violation;
  /// sup over the checked n of q_{n+1} / (q_n log q_n (log n)^2); the range
  /// passes for every C strictly larger.
  double smallest_passing_c = 0.0;
};

DiophantineReport check_class_d(const Irrational& alpha, double c, IndexRange range);

struct NControlReport {
  std::vector<std::uint64_t> violations;
  /// N for which the bound is not a meaningful statement (N < 3 or the
  /// bound exceeds the largest possible distance 1/2).
  std::vector<std::uint64_t> below_threshold;
  /// Smallest sampled N beyond which no sampled N violates the bound.
  std::uint64_t empirical_threshold = 0;
  /// First index n with log q_n > max(1000, C) if it is stored; in practice
  /// never, since that needs q_n > e^1000.
  std::optional<int> prescribed_threshold_index;
};

NControlReport ncontrol_check(const Irrational& alpha, std::span<const std::uint64_t> ns,
                              double c = 1.0);

/// Roughly log-uniform integer samples from [lo, hi], deduplicated.
std::vector<std::uint64_t> log_sampled_integers(std::uint64_t lo, std::uint64_t hi, int count);

}  // namespace kakulab
