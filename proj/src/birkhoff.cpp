#include "kakulab/birkhoff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "kakulab/compensated.hpp"
#include "detail/vecmath.hpp"
#include "kakulab/errors.hpp"

namespace kakulab {

namespace {

void check_iterates(std::int64_t m) {
  if (std::llabs(m) > kMaxBirkhoffIterates)
    throw CapacityError("Birkhoff sum over " + std::to_string(m) + " iterates exceeds the limit");
}

// First iterate of the segment and its signed length.
CirclePoint segment_start(const Irrational& alpha, CirclePoint z, std::int64_t m) {
  return m >= 0 ? z : z + m * alpha.value();
}

[[noreturn]] void singular_hit(std::int64_t j) {
  throw SingularityError("orbit iterate " + std::to_string(j) + " hits the singular guard", j);
}

struct TripleAccumulator {
  CompensatedSum f, df, d2f;
  void add(const RoofJet& jet) {
    f += jet.f;
    df += jet.df;
    d2f += jet.d2f;
  }
};

DKReport make_report(const RoofParams& roof, const Irrational& alpha, std::int64_t m, int s,
                     const OrbitMin& zmin, const BirkhoffTriple& sums) {
  const double g = roof.abs_gamma();
  const double integral = roof_integral(roof);
  const double coeff = roof.coefficient();
  const double qs = static_cast<double>(alpha.q(s));
  const double qs1 = static_cast<double>(alpha.q(s + 1));
  const RoofJet at_min = roof_jet(roof, zmin.min_dist, 1.0 - zmin.min_dist);
  const double sign = m < 0 ? -1.0 : 1.0;

  DKReport r;
  r.m = m;
  r.s = s;
  r.zmin = zmin;
  auto& b0 = r.brackets[0];
  b0.value = sign * sums.f;
  b0.lower = at_min.f + qs / 3.0;
  b0.upper = at_min.f + 3.0 * integral * qs1;
  auto& b1 = r.brackets[1];
  b1.value = std::fabs(sums.df);
  b1.lower = std::fabs(at_min.df) - 8.0 * coeff * g * std::pow(qs, 1.0 + g);
  b1.upper = std::fabs(at_min.df) + 8.0 * coeff * g * std::pow(qs1, 1.0 + g);
  auto& b2 = r.brackets[2];
  b2.value = sign * sums.d2f;
  b2.lower = at_min.d2f;
  b2.upper = at_min.d2f + 8.0 * coeff * std::fabs(roof.gamma * (roof.gamma - 1.0)) * std::pow(qs1, 2.0 + g);
  for (auto& b : r.brackets) b.pass = b.lower <= b.value && b.value <= b.upper;
  return r;
}

}  // namespace

BirkhoffTriple birkhoff_sums(const RoofParams& roof, const Irrational& alpha, CirclePoint z, std::int64_t m) {
  check_iterates(m);
  TripleAccumulator acc;
  const std::int64_t n = std::llabs(m);
  const std::int64_t j0 = m >= 0 ? 0 : m;
  CirclePoint x = segment_start(alpha, z, m);
  const CirclePoint step = alpha.value();
  for (std::int64_t k = 0; k < n; ++k, x += step) {
    const double l = x.left();
    const double r = x.right();
    if (l < kSingularGuard || r < kSingularGuard) singular_hit(j0 + k);
    acc.add(roof_jet(roof, l, r));
  }
  const double sign = m < 0 ? -1.0 : 1.0;
  return {sign * acc.f.value(), sign * acc.df.value(), sign * acc.d2f.value()};
}

double birkhoff_sum(const RoofParams& roof, const Irrational& alpha, CirclePoint z, std::int64_t m, int order) {
  if (order < 0 || order > 2) throw DomainError("birkhoff_sum: order must be 0, 1 or 2");
  const BirkhoffTriple t = birkhoff_sums(roof, alpha, z, m);
  return order == 0 ? t.f : order == 1 ? t.df : t.d2f;
}

OrbitMin orbit_min(const Irrational& alpha, CirclePoint z, std::int64_t m) {
  if (m == 0) throw DomainError("orbit_min: M must be nonzero");
  check_iterates(m);
  OrbitMin out;
  out.z = z;
  out.m = m;
  out.min_dist = 1.0;
  const std::int64_t n = std::llabs(m);
  const std::int64_t j0 = m >= 0 ? 0 : m;
  CirclePoint x = segment_start(alpha, z, m);
  const CirclePoint step = alpha.value();
  for (std::int64_t k = 0; k < n; ++k, x += step) {
    const double d = x.norm();
    if (d < out.min_dist) {
      out.min_dist = d;
      out.argmin_j = j0 + k;
    }
  }
  return out;
}

DKReport dk_check(const RoofParams& roof, const Irrational& alpha, CirclePoint z, std::int64_t m) {
  if (m == 0) throw DomainError("dk_check: |M| must be at least 1");
  const auto n = static_cast<std::uint64_t>(std::llabs(m));
  const int s = alpha.convergent_index(n);
  const OrbitMin zmin = orbit_min(alpha, z, m);
  if (zmin.min_dist < kSingularGuard) singular_hit(zmin.argmin_j);
  const BirkhoffTriple sums = birkhoff_sums(roof, alpha, z, m);
  return make_report(roof, alpha, m, s, zmin, sums);
}

std::vector<std::vector<DKReport>> dk_check_convergents(std::span<const RoofParams> roofs,
                                                        const Irrational& alpha, CirclePoint z,
                                                        int s_lo, int s_hi) {
  if (s_lo < 0 || s_lo > s_hi) throw DomainError("dk_check_convergents: empty s range");
  if (s_hi + 1 > alpha.depth()) throw CapacityError("dk_check_convergents: s range exceeds stored convergents");
  const auto total = static_cast<std::int64_t>(alpha.q(s_hi));
  check_iterates(total);

  const std::size_t nr = roofs.size();
  std::vector<TripleAccumulator> acc(nr);
  std::vector<std::vector<DKReport>> out(nr);
  OrbitMin zmin;
  zmin.z = z;
  zmin.min_dist = 1.0;

  // Iterates are processed in blocks that never straddle a q_s boundary;
  // log and the power terms are evaluated per block.
  constexpr std::int64_t kBlock = 1024;
  std::vector<double> lv(kBlock), rv(kBlock), ilv(kBlock), irv(kBlock), llv(kBlock), lrv(kBlock), plv(kBlock),
      prv(kBlock);
  int next_s = s_lo;
  CirclePoint x = z;
  const CirclePoint step = alpha.value();
  std::int64_t j = 0;
  while (j < total) {
    while (next_s <= s_hi && static_cast<std::int64_t>(alpha.q(next_s)) <= j) ++next_s;
    const std::int64_t boundary = static_cast<std::int64_t>(alpha.q(next_s));
    const std::int64_t n = std::min(kBlock, boundary - j);
    const auto un = static_cast<std::size_t>(n);
    for (std::int64_t k = 0; k < n; ++k, x += step) {
      const double l = x.left();
      const double r = x.right();
      if (l < kSingularGuard || r < kSingularGuard) singular_hit(j + k);
      const double d = l < r ? l : r;
      if (d < zmin.min_dist) {
        zmin.min_dist = d;
        zmin.argmin_j = j + k;
      }
      lv[k] = l;
      rv[k] = r;
    }
    for (std::size_t k = 0; k < un; ++k) {
      ilv[k] = 1.0 / lv[k];
      irv[k] = 1.0 / rv[k];
    }
    detail::log_array(lv.data(), llv.data(), un);
    detail::log_array(rv.data(), lrv.data(), un);
    for (std::size_t i = 0; i < nr; ++i) {
      const RoofParams& roof = roofs[i];
      const double g = roof.gamma;
      const double gg = g * (g - 1.0);
      detail::exp_scaled_array(g, llv.data(), plv.data(), un);
      detail::exp_scaled_array(g, lrv.data(), prv.data(), un);
      TripleAccumulator& a = acc[i];
      for (std::size_t k = 0; k < un; ++k) {
        const double pl = roof.a1 * plv[k];
        const double pr = roof.b1 * prv[k];
        const double dl = pl * ilv[k];
        const double dr = pr * irv[k];
        a.add(RoofJet{pl + pr, g * (dl - dr), gg * (dl * ilv[k] + dr * irv[k])});
      }
    }
    j += n;
    // Emit every s whose q_s equals the number of iterates consumed so far
    // (q_0 = q_1 = 1 for the golden mean, so several may fire at once).
    while (next_s <= s_hi && static_cast<std::int64_t>(alpha.q(next_s)) == j) {
      zmin.m = j;
      for (std::size_t i = 0; i < nr; ++i) {
        const BirkhoffTriple sums{acc[i].f.value(), acc[i].df.value(), acc[i].d2f.value()};
        out[i].push_back(make_report(roofs[i], alpha, j, alpha.convergent_index(static_cast<std::uint64_t>(j)), zmin, sums));
      }
      ++next_s;
    }
  }
  return out;
}

}  // namespace kakulab
