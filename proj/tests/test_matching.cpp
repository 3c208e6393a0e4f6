#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "kakulab/cf.hpp"
#include "kakulab/errors.hpp"
#include "kakulab/invariant_lab.hpp"
#include "kakulab/matching.hpp"
#include "oracles.hpp"

using namespace kakulab;

namespace {

ProductFlow test_product() {
  return ProductFlow(SpecialFlow(RoofParams::pure(-0.8), golden_mean()),
                     SpecialFlow(RoofParams::pure(-0.5), sqrt2_minus_1()));
}

void check_invariants(const MatchResult& m, std::span<const std::uint64_t> u, std::span<const std::uint64_t> v) {
  for (std::size_t k = 0; k < m.pairs.size(); ++k) {
    const auto [i, j] = m.pairs[k];
    REQUIRE(i >= 0);
    REQUIRE(j >= 0);
    CHECK(u[static_cast<std::size_t>(i)] == v[static_cast<std::size_t>(j)]);
    if (k == 0) continue;
    const double di = i - m.pairs[k - 1].first;
    const double dj = j - m.pairs[k - 1].second;
    CHECK(di > 0);
    CHECK(dj > 0);
    CHECK(dj >= m.slope_lo * di - 1e-12);
    CHECK(dj <= m.slope_hi * di + 1e-12);
  }
  CHECK(m.fraction_u == doctest::Approx(static_cast<double>(m.count()) / u.size()));
  CHECK(m.fraction_v == doctest::Approx(static_cast<double>(m.count()) / v.size()));
}

}  // namespace

TEST_SUITE("matching") {

TEST_CASE("epsilon quantization") {
  CHECK(quantize_epsilon(0.5) == kSlopeDenominator / 2);
  CHECK(quantize_epsilon(1e-12) == 1);
  CHECK(quantize_epsilon(1.0 - 1e-12) == kSlopeDenominator - 1);
  CHECK_THROWS_AS((void)quantize_epsilon(0.0), DomainError);
  CHECK_THROWS_AS((void)quantize_epsilon(1.0), DomainError);
}

TEST_CASE("small examples") {
  const std::vector<std::uint64_t> u{1, 2, 3, 1, 2};
  for (double eps : {0.01, 0.3, 0.9}) {
    const MatchResult m = best_match(u, u, eps);
    REQUIRE(m.count() == u.size());
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(m.pairs[k] == std::pair<std::int32_t, std::int32_t>(k, k));
    CHECK(m.fraction_u == 1.0);
  }
  const std::vector<std::uint64_t> ab{0, 1}, ba{1, 0};
  const MatchResult m = best_match(ab, ba, 0.5);
  CHECK(m.count() == 1);
  CHECK(m.pairs[0] == std::pair<std::int32_t, std::int32_t>(0, 1));
  CHECK(best_match(std::vector<std::uint64_t>{}, ab, 0.5).count() == 0);
}

TEST_CASE("dynamic program equals exhaustive enumeration") {
  for (const auto& in : oracle::random_instances(200, 2024)) {
    const MatchResult m = best_match(in.u, in.v, in.eps);
    const oracle::Pairs ref = oracle::brute_match(in.u, in.v, in.eps);
    CHECK(m.count() == ref.size());
    CHECK(m.pairs == ref);
    check_invariants(m, in.u, in.v);
  }
}

TEST_CASE("long random tracks respect the invariants and the band") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint64_t> u(400), v(400);
    for (auto& s : u) s = rng() % 3;
    // v is u with a slow drift and noise.
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = rng() % 5 == 0 ? rng() % 3 : u[(k * 9) / 10];
    double last = 0.0;
    for (double eps : {0.05, 0.1, 0.2, 0.4}) {
      const MatchResult m = best_match(u, v, eps);
      check_invariants(m, u, v);
      CHECK(m.fraction_u >= last);
      last = m.fraction_u;
      CHECK(m.band >= static_cast<std::int64_t>(std::ceil(eps * 400)) + 16 - 1);
    }
  }
}

TEST_CASE("tracks") {
  const ProductFlow pf = test_product();
  const ProductPoint x{FlowPoint::make(0.3, 0.5), FlowPoint::make(0.8, 1.5)};
  const PartitionSpec spec(4);
  const double delta = default_delta(pf);
  CHECK(delta == doctest::Approx(std::pow(2.0, 1.5) / 8.0).epsilon(1e-14));
  const SymbolTrack zero = sample_track(pf, x, 0.0, delta, spec);
  CHECK(zero.size() == 1);
  const SymbolTrack a = sample_track(pf, x, 50.0, delta, spec);
  const SymbolTrack b = sample_track(pf, x, 50.0, delta, spec);
  CHECK(a.symbols == b.symbols);
  CHECK(a.size() == static_cast<std::size_t>(std::floor(50.0 / delta)) + 1);
  const SymbolTrack fine = sample_track(pf, x, 50.0, delta / 2, spec);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(fine.symbols[2 * k] == a.symbols[k]);
  for (auto s : a.symbols) {
    const auto first = static_cast<AtomId>(s >> 32);
    const auto second = static_cast<AtomId>(s & 0xFFFFFFFFu);
    CHECK(first <= static_cast<AtomId>(1 + 4 * (4 << 4)));
    CHECK(second <= static_cast<AtomId>(1 + 4 * (4 << 4)));
  }
  const SymbolTrack single = sample_track(pf.first(), x.first, 50.0, delta, spec);
  CHECK_FALSE(single.product);
  CHECK(single.size() == a.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(single.symbols[k] == (a.symbols[k] >> 32));

  CHECK_THROWS_AS((void)sample_track(pf, x, 50.0, 2.0 * std::pow(2.0, 1.5), spec), DomainError);
  CHECK_THROWS_AS((void)sample_track(pf, x, 50.0, 0.0, spec), DomainError);
  CHECK_THROWS_AS((void)sample_track(pf, x, 2e6 * delta, delta, spec), CapacityError);
  const SymbolTrack other = sample_track(pf, x, 40.0, delta, spec);
  CHECK_THROWS_AS((void)best_match(a, other, 0.1), UsageError);
  CHECK_THROWS_AS((void)best_match(a, fine, 0.1), UsageError);
}

TEST_CASE("f_R estimates") {
  const ProductFlow pf = test_product();
  const PartitionSpec spec(4);
  const double delta = default_delta(pf);
  const double R = 200.0;
  const ProductPoint x{FlowPoint::make(0.3, 0.5), FlowPoint::make(0.8, 1.5)};
  CHECK(estimate_f_R(pf, x, x, R, spec, delta, 0.01) == 0.0);
  const ProductPoint far = pf.flow(x, R);
  CHECK(estimate_f_R(pf, x, far, R, spec, delta, 0.01) >= 0.5);

  const auto pts = sample_product(pf, 20, 5);
  for (std::size_t k = 0; k + 1 < pts.size(); k += 2) {
    const SymbolTrack u = sample_track(pf, pts[k], R, delta, spec);
    const SymbolTrack v = sample_track(pf, pts[k + 1], R, delta, spec);
    const double coarse = estimate_f_R(u, v, 0.05);
    const double fine = estimate_f_R(u, v, 0.005);
    CHECK(std::fabs(coarse - fine) <= 0.03125 / 2 + 1e-12);
    CHECK(fine > 0.0);
    CHECK(fine < 1.0);
    const double e = estimate_f_R(u, v, 0.01);
    const double back = estimate_f_R(v, u, 0.01);
    CHECK(back <= e / (1.0 - e) + 0.01);
    CHECK(matchable(u, v, std::min(0.999, e + 0.01)));
  }
  CHECK_THROWS_AS((void)estimate_f_R(pf, x, x, R, spec, delta, 0.0), DomainError);
}

TEST_CASE("matchable agrees with the dynamic program") {
  const SpecialFlow flow(RoofParams::pure(-0.5), golden_mean());
  const PartitionSpec spec(3);
  const double delta = default_delta(flow);
  const auto pts = sample_suspension(flow, 12, 41);
  std::vector<SymbolTrack> tracks;
  for (const FlowPoint& p : pts) tracks.push_back(sample_track(flow, p, 150.0, delta, spec));
  // Nearby orbits so that some pairs do match.
  for (double s : {0.05, 0.4, 2.0}) tracks.push_back(sample_track(flow, flow.flow(pts[0], s), 150.0, delta, spec));
  int yes = 0;
  for (std::size_t a = 0; a < tracks.size(); ++a)
    for (std::size_t b = 0; b < tracks.size(); ++b)
      for (double eps : {0.05, 0.2, 0.5, 0.7}) {
        const MatchResult m = best_match(tracks[a], tracks[b], eps);
        const double need = (1.0 - eps) * static_cast<double>(std::max(tracks[a].size(), tracks[b].size()));
        const bool direct = static_cast<double>(m.count()) >= need;
        CHECK(matchable(tracks[a], tracks[b], eps) == direct);
        yes += direct;
      }
  CHECK(yes > static_cast<int>(tracks.size()) * 4);
  CHECK(yes < static_cast<int>(tracks.size() * tracks.size()) * 4);
}

TEST_CASE("distance buckets") {
  CHECK(distance_bucket(0.0) == kBucketInfinite);
  CHECK(distance_bucket(std::pow(2.0, -10.5)) == 10);
  CHECK(distance_bucket(std::ldexp(1.0, -10)) == 10);
  CHECK(distance_bucket(std::nextafter(std::ldexp(1.0, -10), 1.0)) == 9);
  CHECK(distance_bucket(0.75) == 0);
  for (int j = 0; j < 60; ++j) {
    const double l = std::ldexp(1.3, -j - 1);
    const int b = distance_bucket(l);
    CHECK(std::ldexp(1.0, -b - 1) < l);
    CHECK(l <= std::ldexp(1.0, -b));
  }
}

TEST_CASE("distance traces") {
  const ProductFlow pf = test_product();
  const PartitionSpec spec(4);
  const double delta = default_delta(pf);
  const double R = 100.0;
  const ProductPoint x{FlowPoint::make(0.3, 0.5), FlowPoint::make(0.8, 1.5)};
  const SymbolTrack tx = sample_track(pf, x, R, delta, spec);
  const MatchResult id = best_match(tx, tx, 0.1);
  const DistanceTrace same = trace_distances(pf, x, x, id, R, delta, spec);
  REQUIRE(same.rows.size() == tx.size());
  for (const TraceRow& row : same.rows) {
    CHECK(row.l_h == 0.0);
    CHECK(row.bucket == kBucketInfinite);
  }
  REQUIRE(same.bucket_mass.size() == 1);
  CHECK(same.bucket_mass.at(kBucketInfinite) == doctest::Approx(1.0));

  ProductPoint y = x;
  y.first.x_h += CirclePoint::from_double(std::pow(2.0, -10.5));
  const SymbolTrack ty = sample_track(pf, y, R, delta, spec);
  const MatchResult m = best_match(tx, ty, 0.1);
  REQUIRE(!m.pairs.empty());
  REQUIRE(m.pairs[0] == std::pair<std::int32_t, std::int32_t>(0, 0));
  const DistanceTrace tr = trace_distances(pf, x, y, m, R, delta, spec);
  CHECK(tr.rows[0].l_h == doctest::Approx(std::pow(2.0, -10.5)).epsilon(1e-9));
  CHECK(tr.rows[0].bucket == 10);
  double total = 0.0;
  for (const auto& [b, mass] : tr.bucket_mass) total += mass;
  CHECK(total <= m.fraction_u + 1e-12);
}

}  // TEST_SUITE
