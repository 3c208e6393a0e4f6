#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "kakulab/cf.hpp"
#include "kakulab/errors.hpp"
#include "kakulab/invariant_lab.hpp"

using namespace kakulab;

namespace {

ProductFlow normalized_product() {
  return ProductFlow(SpecialFlow(RoofParams::normalized(-0.8), golden_mean()),
                     SpecialFlow(RoofParams::normalized(-0.5), sqrt2_minus_1()));
}

ProductFlow pure_product() {
  return ProductFlow(SpecialFlow(RoofParams::pure(-0.8), golden_mean()),
                     SpecialFlow(RoofParams::pure(-0.5), sqrt2_minus_1()));
}

double lower_oracle(double g1, double g2) {
  return (2 + 4 * g2 + 2 * g1 * g2) / ((2 + g2) * (1 + g1));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

SymbolTrack synthetic_track(std::vector<std::uint64_t> symbols) {
  SymbolTrack t;
  t.R = static_cast<double>(symbols.size() - 1);
  t.delta = 1.0;
  t.symbols = std::move(symbols);
  return t;
}

}  // namespace

TEST_SUITE("invariant_lab") {

TEST_CASE("theorem bounds") {
  const BoundsReport r = theorem_bounds(-0.8, -0.5);
  CHECK(std::fabs(r.lower - 16.0 / 15.0) < 1e-12);
  CHECK(std::fabs(r.upper - 2.3) < 1e-12);
  CHECK(r.nonstandard);
  CHECK_THROWS_AS((void)theorem_bounds(-0.5, -0.8), DomainError);
  CHECK_THROWS_AS((void)theorem_bounds(-1.0, -0.5), DomainError);
  CHECK_THROWS_AS((void)theorem_bounds(-0.8, 0.0), DomainError);
  // Continuity as gamma2 approaches gamma1.
  const BoundsReport near = theorem_bounds(-0.6, -0.6 + 1e-12);
  CHECK(near.upper == doctest::Approx(1.0 + 2 * 0.6).epsilon(1e-11));
  CHECK(std::isfinite(near.lower));
}

TEST_CASE("bounds grid") {
  for (int a = 1; a <= 100; ++a) {
    for (int b = 1; b < a; ++b) {
      const double g1 = a / 101.0;
      const double g2 = b / 101.0;
      const BoundsReport r = theorem_bounds(-g1, -g2);
      CHECK(r.lower <= r.upper);
      CHECK(r.lower == doctest::Approx(lower_oracle(g1, g2)).epsilon(1e-14));
      const double th = nonstandard_threshold(g1);
      if (std::fabs(g2 - th) > 1e-12) CHECK(r.nonstandard == (g2 > th));
    }
  }
}

TEST_CASE("nonstandard threshold") {
  CHECK(nonstandard_threshold(0.8) == doctest::Approx(1.6 / 3.8).epsilon(1e-15));
  CHECK(nonstandard_threshold(0.8) == doctest::Approx(0.421053).epsilon(1e-6));
  for (int k = 1; k <= 100; ++k) {
    const double g1 = 0.05 + 0.94 * (k - 1) / 99.0;
    const double th = nonstandard_threshold(g1);
    CHECK_FALSE(theorem_bounds(-g1, -(th - 1e-9)).nonstandard);
    CHECK(theorem_bounds(-g1, -(th + 1e-9)).nonstandard);
  }
}

TEST_CASE("disjoint family") {
  const auto one = disjoint_family(-0.8, -0.5, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].gamma1 == -0.8);
  CHECK(one[0].gamma2 == -0.5);
  const auto fam = disjoint_family(-0.8, -0.5, 3);
  REQUIRE(fam.size() == 3);
  for (std::size_t i = 0; i < fam.size(); ++i) {
    CHECK(fam[i].nonstandard);
    CHECK(fam[i].gamma1 < fam[i].gamma2);
    CHECK(fam[i].lower == doctest::Approx(lower_oracle(-fam[i].gamma1, -fam[i].gamma2)).epsilon(1e-14));
    for (std::size_t j = i + 1; j < fam.size(); ++j) CHECK(fam[j].upper < fam[i].lower);
  }
  CHECK_THROWS_AS((void)disjoint_family(-0.8, -0.5, 0), DomainError);
  CHECK_THROWS_AS((void)disjoint_family(-0.8, -0.5, 21), DomainError);
  CHECK_THROWS_AS((void)disjoint_family(-0.8, -0.2, 2), DomainError);
  try {
    const auto big = disjoint_family(-0.8, -0.5, 20);
    for (std::size_t i = 1; i < big.size(); ++i) CHECK(big[i].upper < big[i - 1].lower);
  } catch (const CapacityError&) {
  }
}

TEST_CASE("exponent book") {
  const ExponentBook b = ExponentBook::make(-0.8, -0.5);
  CHECK(ExponentBook::epsilon2_supremum(-0.8, -0.5) == doctest::Approx(0.5 * 0.3 / (16 * 2.5)).epsilon(1e-15));
  CHECK(b.epsilon2 == doctest::Approx(9.375e-4).epsilon(1e-14));
  CHECK(b.epsilon0 == doctest::Approx(0.5 / 3.0 - 4 * 9.375e-4 * 2.5 / (0.3 * 1.5)).epsilon(1e-14));
  CHECK(b.epsilon0 > 0.0);
  CHECK(b.epsilon0 <= ExponentBook::epsilon0_ceiling(-0.5));
  CHECK(b.epsilon1 == 0.1);
  CHECK_THROWS_AS((void)ExponentBook::make(-0.8, -0.5, 0.1, 0.004), DomainError);
  CHECK_THROWS_AS((void)ExponentBook::make(-0.8, -0.5, 0.0), DomainError);
  const ExponentBook c = ExponentBook::make(-0.8, -0.5, 0.1, 0.001);
  CHECK(c.epsilon2 == 0.001);
}

TEST_CASE("uniform_open") {
  std::mt19937_64 rng(1);
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = uniform_open(rng);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::fabs(sum / 100000 - 0.5) < 3 * std::sqrt(1.0 / 12 / 100000));
}

TEST_CASE("suspension sampling") {
  const SpecialFlow flow(RoofParams::normalized(-0.5), golden_mean());
  const std::size_t n = 100000;
  const auto pts = sample_suspension(flow, n, 17);
  const auto again = sample_suspension(flow, n, 17);
  bool same = true;
  for (std::size_t k = 0; k < n; ++k) same &= pts[k].x_h == again[k].x_h && pts[k].x_v == again[k].x_v;
  CHECK(same);

  // Base Lebesgue measure of [0.2, 0.4] through the weights int f / f.
  double s = 0.0, s2 = 0.0;
  std::size_t low = 0;
  for (const FlowPoint& p : pts) {
    CHECK(p.x_v >= 0.0);
    CHECK(p.x_v < flow.roof_at(p.x_h));
    const double b = p.base();
    const double w = (b >= 0.2 && b <= 0.4) ? flow.roof_integral() / flow.roof_at(p.x_h) : 0.0;
    s += w;
    s2 += w * w;
    if (p.x_v <= 1.0) ++low;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::fabs(mean - 0.2) < 3 * se);

  boost::math::quadrature::tanh_sinh<double> integrator;
  const double capped =
      integrator.integrate([&](double x) { return x < 1e-20 ? 1.0 : std::min(eval_roof(flow.roof(), x, 0), 1.0); },
                           0.0, 1.0);
  const double expect = capped / flow.roof_integral();
  const double ph = static_cast<double>(low) / n;
  CHECK(std::fabs(ph - expect) < 3 * std::sqrt(expect * (1 - expect) / n));

  const ProductFlow pf = pure_product();
  const auto prod = sample_product(pf, 10, 3);
  CHECK(prod.size() == 10);
  CHECK_THROWS_AS((void)sample_suspension(flow, 0, 1), DomainError);
}

TEST_CASE("good sets") {
  const SpecialFlow flow(RoofParams::pure(-0.5), golden_mean());
  for (int n : {4, 6, 8, 12}) {
    const double q = static_cast<double>(flow.alpha().q(n));
    const double w = 1.0 / (q * std::pow(std::log(q), 3));
    CHECK_FALSE(s_n_membership(flow, FlowPoint::make(w / 2, 0.0), n));
  }
  // Direct sweep over a time grid finer than the roof minimum.
  for (int n = 3; n <= 8; ++n) {
    const FlowPoint x = FlowPoint::make(0.5, 0.0);
    const double q = static_cast<double>(flow.alpha().q(n));
    const double lq = std::log(q);
    const double T = q * lq, w = 1.0 / (q * lq * lq * lq);
    bool inside = true;
    const double step = flow.roof_minimum() / 4;
    for (double t = -T; t <= T; t += step) inside &= flow.flow(x, t).x_h.norm() > w;
    inside &= flow.flow(x, T).x_h.norm() > w;
    CHECK(s_n_membership(flow, x, n) == inside);
    if (n >= 4 && n <= 6) CHECK(inside);
  }
  CHECK_THROWS_AS((void)s_n_membership(flow, FlowPoint::make(0.5, 0.0), 1), DomainError);
  CHECK_THROWS_AS((void)s_n_membership(SpecialFlow(RoofParams::pure(-0.5), golden_mean(10)),
                                       FlowPoint::make(0.5, 0.0), 12),
                  CapacityError);

  const double q = static_cast<double>(flow.alpha().q(8));
  const double lq = std::log(q);
  CHECK(s_n_lower_bound(flow, 8) ==
        doctest::Approx(1 - std::pow(2.0, 1.5) / 0.5 * std::pow(flow.roof_minimum() * lq * lq, -0.5)).epsilon(1e-14));
  const MeasureEstimate m = sn_measure(flow, 6, 2000, 4);
  CHECK(m.samples == 2000);
  CHECK(m.estimate > 0.0);
  CHECK(m.estimate < 1.0);
  CHECK(m.standard_error == doctest::Approx(std::sqrt(m.estimate * (1 - m.estimate) / 2000)));
  CHECK(m.pass == (m.estimate + 3 * m.standard_error >= m.bound));
}

TEST_CASE("shear window mechanics") {
  const SpecialFlow flow(RoofParams::normalized(-0.8), golden_mean());
  const FlowPoint x = FlowPoint::make(0.3651, 0.2);
  const ShearReport r = shear_window_check(flow, x, 1e4, 0.15, 64);
  REQUIRE(r.times.size() == 64);
  CHECK(r.times.front() == doctest::Approx(std::pow(1e4, 0.1)).epsilon(1e-12));
  CHECK(r.times.back() == doctest::Approx(1e4).epsilon(1e-12));
  std::size_t both = 0, up = 0;
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    const double t = r.times[k];
    CHECK(r.hits[k] == flow.hit_count(x, t));
    const double d = std::fabs(birkhoff_sum(flow.roof(), flow.alpha(), x.x_h, r.hits[k], 1));
    CHECK(r.derivative[k] == doctest::Approx(d).epsilon(1e-12));
    const bool u = d <= std::pow(t, 1.8 + 0.15);
    up += u;
    both += u && d >= std::pow(t, 1.8 - 0.15);
  }
  CHECK(r.fraction == doctest::Approx(static_cast<double>(both) / 64));
  CHECK(r.upper_fraction == doctest::Approx(static_cast<double>(up) / 64));
  CHECK_THROWS_AS((void)shear_window_check(flow, x, 100.0, 0.15), DomainError);
}

TEST_CASE("shearing exponents separate with gamma") {
  const SpecialFlow f3(RoofParams::normalized(-0.3), golden_mean());
  const SpecialFlow f8(RoofParams::normalized(-0.8), golden_mean());
  const double t = 1e4;
  std::vector<double> e3, e8;
  for (const FlowPoint& x : sample_suspension(f8, 40, 12)) {
    if (!s_n_membership(f8, x, 19)) continue;
    const FlowPoint y{x.x_h, 0.0};
    const auto exponent = [&](const SpecialFlow& f) {
      FlowWalker w(f, y);
      w.at(t);
      return std::log(std::fabs(w.sums().df)) / std::log(t);
    };
    e3.push_back(exponent(f3));
    e8.push_back(exponent(f8));
  }
  REQUIRE(e3.size() >= 9);
  CHECK(std::fabs(median(e8) - median(e3) - 0.5) <= 0.2);
}

TEST_CASE("boxes") {
  const ProductFlow pf = normalized_product();
  const ExponentBook book = ExponentBook::make(-0.8, -0.5);
  const ProductPoint x{FlowPoint::make(0.3, 0.2), FlowPoint::make(0.7, 0.1)};
  for (BoxKind k : {BoxKind::in, BoxKind::out, BoxKind::out_sweep}) CHECK(box_membership(pf, book, x, x, k, 0.1, 1e3));
  CHECK(parse_box_kind("out-sweep") == BoxKind::out_sweep);
  CHECK_THROWS_AS((void)parse_box_kind("round"), DomainError);

  const ExponentBook b05 = ExponentBook::make(-0.8, -0.5, 0.05);
  CHECK(box_in_radii(b05, 0.1, 1e3).first == doctest::Approx(0.1 * std::pow(10.0, -3 * (1.8 + 0.1))).epsilon(1e-12));
  CHECK(box_out_radius(book, 0.1, 1e3) == doctest::Approx(0.1 * std::pow(1e3, -1 / (1 - book.epsilon0))).epsilon(1e-14));
  CHECK(box_out_bound(book, 0.1, 1e3) == doctest::Approx(25e-4 * std::pow(1e3, -2 / (1 - book.epsilon0))).epsilon(1e-14));
  CHECK(epsilon_bound(pure_product()) == 0.01);
  CHECK(epsilon_bound(pf) == doctest::Approx(0.1 * std::pow(2.0, 1.8) / 100).epsilon(1e-14));

  // One-sided offsets: Box^out holds points below-left of the centre.
  const double r = box_out_radius(book, 0.1, 1e3);
  ProductPoint y = x;
  y.first.x_h -= CirclePoint::from_double(r / 2);
  y.first.x_v -= 0.05;
  CHECK(box_membership(pf, book, x, y, BoxKind::out, 0.1, 1e3));
  CHECK_FALSE(box_membership(pf, book, y, x, BoxKind::out, 0.1, 1e3));
  CHECK(box_membership(pf, book, y, x, BoxKind::in, 0.1, 1e3) == (r / 2 <= box_in_radii(book, 0.1, 1e3).first));
  // A point flowed along the orbit stays in the swept box.
  const ProductPoint moved = pf.flow(x, 0.1 / 16 * 5);
  CHECK(box_membership(pf, book, x, moved, BoxKind::out_sweep, 0.1, 1e3));
  ProductPoint far = x;
  far.second.x_h += CirclePoint::from_double(0.01);
  CHECK_FALSE(box_membership(pf, book, x, far, BoxKind::out_sweep, 0.1, 1e3));

  const MeasureEstimate m = box_out_measure(pf, book, x, 0.1, 1e3, 20000, 6);
  const double unswept = std::pow(r * 0.1, 2);  // integrals are 1 in normalized mode
  CHECK(m.estimate + 3 * m.standard_error >= unswept);
  CHECK(m.estimate <= std::pow(33 * r * (0.1 + 0.1 / 16), 2));
  CHECK(m.pass);
}

TEST_CASE("Kakutani balls") {
  const ProductFlow pf = pure_product();
  const MatchSettings settings;
  const auto pts = sample_product(pf, 6, 9);
  CHECK(kakutani_ball_test(pf, pts[0], pts[0], 0.05, 100.0, settings));
  for (std::size_t k = 1; k < pts.size(); ++k) {
    CHECK(kakutani_ball_test(pf, pts[0], pts[k], 1.0, 100.0, settings));
    bool prev = false;
    for (double eps : {0.1, 0.3, 0.6, 0.9}) {
      const bool in = kakutani_ball_test(pf, pts[0], pts[k], eps, 100.0, settings);
      if (prev) CHECK(in);
      prev = in;
    }
  }
}

TEST_CASE("covering estimates on synthetic tracks") {
  std::vector<SymbolTrack> same(200, synthetic_track({1, 2, 3, 4, 5, 6, 7, 8}));
  const KrEstimate a = kr_estimate(same, 0.1);
  CHECK(a.lower == 1);
  CHECK(a.upper == 1);
  CHECK(a.sample_size == 200);
  CHECK_FALSE(a.caveat.empty());

  std::vector<SymbolTrack> apart;
  for (std::uint64_t k = 0; k < 200; ++k) {
    std::vector<std::uint64_t> s;
    for (std::uint64_t i = 0; i < 10; ++i) s.push_back(k * 100 + i);
    apart.push_back(synthetic_track(s));
  }
  const KrEstimate b = kr_estimate(apart, 0.1);
  CHECK(b.lower == 200);
  CHECK(b.upper == 180);

  std::vector<SymbolTrack> small(199, synthetic_track({1, 2}));
  CHECK_THROWS_AS((void)kr_estimate(small, 0.1), UsageError);
}

TEST_CASE("covering estimates on flow tracks") {
  const ProductFlow pf = pure_product();
  const PartitionSpec spec(4);
  const double delta = default_delta(pf);
  std::vector<SymbolTrack> tracks;
  for (const ProductPoint& p : sample_product(pf, 200, 13)) tracks.push_back(sample_track(pf, p, 30.0, delta, spec));
  std::size_t last = tracks.size() + 1;
  for (double eps : {0.01, 0.03, 0.06, 0.1, 0.15}) {
    const KrEstimate e = kr_estimate(tracks, eps);
    CHECK(e.lower <= e.sample_size);
    CHECK(e.lower >= 1);
    CHECK(e.upper <= e.sample_size);
    CHECK(e.lower <= last);
    last = e.lower;
  }
}

TEST_CASE("least squares and scans") {
  const std::vector<double> xs{1, 2, 3, 4}, ys{3, 5, 7, 9}, flat{2, 2, 2, 2};
  const auto [s, c] = least_squares(xs, ys);
  CHECK(s == doctest::Approx(2.0));
  CHECK(c == doctest::Approx(1.0));
  CHECK(least_squares(xs, flat).first == 0.0);
  const ProductFlow pf = pure_product();
  const std::vector<double> three{10, 20, 30}, big{10, 20, 30, 2e4};
  CHECK_THROWS_AS((void)kr_scan(pf, three, 0.2, 200, MatchSettings{}, 1), DomainError);
  CHECK_THROWS_AS((void)kr_scan(pf, big, 0.2, 200, MatchSettings{}, 1), DomainError);
  const std::vector<double> grid{5, 10, 20, 40};
  CHECK_THROWS_AS((void)kr_scan(pf, grid, 0.2, 100, MatchSettings{}, 1), UsageError);
  const KrScan scan = kr_scan(pf.second(), grid, 0.2, 200, MatchSettings{PartitionSpec(4), 0.0, 0.01}, 1);
  REQUIRE(scan.rows.size() == 4);
  CHECK(scan.label.find("diagnostic") != std::string::npos);
  std::vector<double> lx, ly;
  for (const KrScanRow& row : scan.rows) {
    lx.push_back(std::log(row.R));
    ly.push_back(std::log(static_cast<double>(row.estimate.lower)));
  }
  const auto [slope, icept] = least_squares(lx, ly);
  CHECK(scan.slope == doctest::Approx(slope));
  for (std::size_t k = 0; k < 4; ++k)
    CHECK(scan.rows[k].residual == doctest::Approx(ly[k] - (slope * lx[k] + icept)).epsilon(1e-9));
}

}  // TEST_SUITE
