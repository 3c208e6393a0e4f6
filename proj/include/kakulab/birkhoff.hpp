#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "kakulab/cf.hpp"
#include "kakulab/circle.hpp"
#include "kakulab/roof.hpp"

namespace kakulab {

inline constexpr std::int64_t kMaxBirkhoffIterates = 10'000'000;

/// Birkhoff sums of f, f' and f'' along the same orbit segment.
struct BirkhoffTriple {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};

/// Closest approach of an orbit segment to the cusp at 0.
struct OrbitMin {
  CirclePoint z;
  std::int64_t m = 0;
  double min_dist = 0.0;
  /// Iterate realising the minimum; negative for pulled-back segments.
  std::int64_t argmin_j = 0;
};

/// f^{(M)}(z) of the given order with the three-branch convention:
/// M > 0 sums f(z), ..., f(z + (M-1) alpha); M = 0 gives 0; M < 0 gives
/// -(f(z + M alpha) + ... + f(z - alpha)). Terms are accumulated with
/// compensated summation. Throws SingularityError if an iterate falls within
/// kSingularGuard of 0, and CapacityError when |M| exceeds kMaxBirkhoffIterates.
double birkhoff_sum(const RoofParams& roof, const Irrational& alpha, CirclePoint z, std::int64_t m, int order);

BirkhoffTriple birkhoff_sums(const RoofParams& roof, const Irrational& alpha, CirclePoint z, std::int64_t m);

/// min over the segment's iterates j of ||z + j alpha||. For M > 0 the
/// iterates are 0..M-1; for M < 0 they are M..-1 (the segment entering the
/// negative-branch sum). Direct scan.
OrbitMin orbit_min(const Irrational& alpha, CirclePoint z, std::int64_t m);

/// One two-sided bracket lower <= value <= upper.
struct DKBracket {
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
  bool pass = false;
  double margin() const { return value - lower < upper - value ? value - lower : upper - value; }
};

/// The three Denjoy-Koksma brackets for one (z, M).
///
/// For z_min the closest distance of the segment to 0 and s the index with
/// q_s <= |M| < q_{s+1}:
///   f(z_min) + q_s / 3                <= |f^(M)(z)|  <= f(z_min) + 3 I q_{s+1}
///   |f'(z_min)| - 8 A |g| q_s^(1+|g|)  <= |f'^(M)(z)| <= |f'(z_min)| + 8 A |g| q_{s+1}^(1+|g|)
///   f''(z_min)                         <= |f''^(M)(z)| <= f''(z_min) + 8 A |g(g-1)| q_{s+1}^(2+|g|)
/// with I the roof integral and A the singular coefficient. Both equal 1
/// under the unit normalisation; carrying them keeps the pure mode (A = 1,
/// I = 2/(1+g)) on the same footing. The lower f bracket keeps the unit
/// constant: I q_s / 3 is not a lower bound for small q_s when I is large.
struct DKReport {
  std::int64_t m = 0;
  int s = 0;
  OrbitMin zmin;
  std::array<DKBracket, 3> brackets{};
  bool all_pass() const { return brackets[0].pass && brackets[1].pass && brackets[2].pass; }
};

DKReport dk_check(const RoofParams& roof, const Irrational& alpha, CirclePoint z, std::int64_t m);

/// dk_check at M = q_s for s in [s_lo, s_hi] and for several roofs in a
/// single orbit pass (the orbit prefixes are nested). Result is indexed
/// [roof][s - s_lo].
std::vector<std::vector<DKReport>> dk_check_convergents(std::span<const RoofParams> roofs,
                                                        const Irrational& alpha, CirclePoint z,
                                                        int s_lo, int s_hi);

}  // namespace kakulab
