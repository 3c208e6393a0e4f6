#include "kakulab/invariant_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "kakulab/errors.hpp"

namespace kakulab {

// ---------------------------------------------------------------- exponents

namespace {

void check_gamma_order(double gamma1, double gamma2) {
  if (!(gamma1 > -1.0) || !(gamma1 < gamma2) || !(gamma2 < 0.0))
    throw DomainError("gamma: need -1 < gamma1 < gamma2 < 0");
}

}  // namespace

double ExponentBook::epsilon2_supremum(double gamma1, double gamma2) {
  const double g1 = -gamma1;
  const double g2 = -gamma2;
  return g2 * (g1 - g2) / (16.0 * (2.0 + g2));
}

double ExponentBook::epsilon0_ceiling(double gamma2) {
  const double g2 = -gamma2;
  return g2 / (2.0 * (1.0 + g2));
}

ExponentBook ExponentBook::make(double gamma1, double gamma2, double epsilon1, double epsilon2) {
  check_gamma_order(gamma1, gamma2);
  if (!(epsilon1 > 0.0)) throw DomainError("epsilon1: must be positive");
  const double sup = epsilon2_supremum(gamma1, gamma2);
  if (epsilon2 <= 0.0) epsilon2 = 0.25 * sup;
  if (!(epsilon2 < sup)) throw DomainError("epsilon2: must lie in (0, " + std::to_string(sup) + ")");
  const double g1 = -gamma1;
  const double g2 = -gamma2;
  ExponentBook b;
  b.gamma1 = gamma1;
  b.gamma2 = gamma2;
  b.epsilon1 = epsilon1;
  b.epsilon2 = epsilon2;
  b.epsilon0 = epsilon0_ceiling(gamma2) - 4.0 * epsilon2 * (2.0 + g2) / ((g1 - g2) * (1.0 + g2));
  return b;
}

BoundsReport theorem_bounds(double gamma1, double gamma2) {
  check_gamma_order(gamma1, gamma2);
  const double g1 = -gamma1;
  const double g2 = -gamma2;
  BoundsReport r;
  r.gamma1 = gamma1;
  r.gamma2 = gamma2;
  r.lower = (2.0 + 4.0 * g2 + 2.0 * g1 * g2) / ((2.0 + g2) * (1.0 + g1));
  r.upper = 1.0 + g1 + g2;
  r.nonstandard = r.lower > 1.0;
  return r;
}

double nonstandard_threshold(double abs_gamma1) { return 2.0 * abs_gamma1 / (3.0 + abs_gamma1); }

std::vector<BoundsReport> disjoint_family(double gamma1, double gamma2, int count) {
  if (count < 1 || count > 20) throw DomainError("disjoint_family: count must lie in [1, 20]");
  BoundsReport seed = theorem_bounds(gamma1, gamma2);
  if (!seed.nonstandard) throw DomainError("disjoint_family: seed pair is not in the nonstandard range");
  std::vector<BoundsReport> out{seed};
  // |gamma2'| sits halfway between the threshold and |gamma1'|.
  auto partner = [](double a) { return nonstandard_threshold(a) + 0.5 * (a - nonstandard_threshold(a)); };
  while (static_cast<int>(out.size()) < count) {
    const BoundsReport& prev = out.back();
    const double target = 0.5 * (1.0 + prev.lower);
    if (target - 1.0 < 1e-9)
      throw CapacityError("disjoint_family: intervals collapsed after " + std::to_string(out.size()) + " pairs");
    double lo = 0.0;
    double hi = -prev.gamma1;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (1.0 + mid + partner(mid) < target)
        lo = mid;
      else
        hi = mid;
    }
    const double a = lo;
    const BoundsReport next = theorem_bounds(-a, -partner(a));
    if (!next.nonstandard || next.upper - next.lower < 1e-9 || !(next.upper < prev.lower))
      throw CapacityError("disjoint_family: construction stalled after " + std::to_string(out.size()) + " pairs");
    out.push_back(next);
  }
  return out;
}

// ---------------------------------------------------------------- sampling

double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

FlowPoint sample_suspension_point(const SpecialFlow& flow, std::mt19937_64& rng) {
  const RoofParams& roof = flow.roof();
  const double g = roof.gamma;
  const double c = roof.coefficient();
  for (;;) {
    const bool right_side = (rng() >> 63) != 0;
    const double d = std::pow(uniform_open(rng), 1.0 / (1.0 + g));
    const CirclePoint base = right_side ? -CirclePoint::from_double(d) : CirclePoint::from_double(d);
    const double l = base.left();
    const double r = base.right();
    const double accept = uniform_open(rng);
    if (l < kSingularGuard || r < kSingularGuard) continue;
    const double f = roof_jet(roof, l, r).f;
    const double majorant = c * (std::pow(l, g) + std::pow(r, g));
    if (accept * majorant > f) continue;
    return {base, uniform_open(rng) * f};
  }
}

std::vector<FlowPoint> sample_suspension(const SpecialFlow& flow, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_suspension: n must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<FlowPoint> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(sample_suspension_point(flow, rng));
  return out;
}

std::vector<ProductPoint> sample_product(const ProductFlow& flow, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_product: n must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<ProductPoint> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const FlowPoint a = sample_suspension_point(flow.first(), rng);
    const FlowPoint b = sample_suspension_point(flow.second(), rng);
    out.push_back({a, b});
  }
  return out;
}

// ---------------------------------------------------------------- good sets

namespace {

double denominator_at(const SpecialFlow& flow, int n) {
  const Irrational& alpha = flow.alpha();
  if (n < 0 || n >= alpha.depth()) throw CapacityError("S_n: index beyond stored convergents");
  const auto q = static_cast<double>(alpha.q(n));
  if (q < 2.0) throw DomainError("S_n: requires q_n >= 2");
  return q;
}

}  // namespace

bool s_n_membership(const SpecialFlow& flow, const FlowPoint& x, int n) {
  const double q = denominator_at(flow, n);
  const double lq = std::log(q);
  const double horizon = q * lq;
  const double window = 1.0 / (q * lq * lq * lq);
  const std::int64_t hi = flow.hit_count(x, horizon);
  const std::int64_t lo = flow.hit_count(x, -horizon);
  const CirclePoint step = flow.alpha().value();
  CirclePoint p = x.x_h + lo * step;
  for (std::int64_t j = lo; j <= hi; ++j, p += step)
    if (p.norm() <= window) return false;
  return true;
}

double s_n_lower_bound(const SpecialFlow& flow, int n) {
  const double q = denominator_at(flow, n);
  const double g = flow.roof().gamma;
  const double lq = std::log(q);
  return 1.0 - std::pow(2.0, 2.0 + g) / (1.0 + g) * std::pow(flow.roof_minimum() * lq * lq, -(1.0 + g));
}

MeasureEstimate sn_measure(const SpecialFlow& flow, int n, std::size_t samples, std::uint64_t seed) {
  const auto pts = sample_suspension(flow, samples, seed);
  std::size_t in = 0;
  for (const auto& x : pts)
    if (s_n_membership(flow, x, n)) ++in;
  MeasureEstimate m;
  m.samples = samples;
  m.estimate = static_cast<double>(in) / static_cast<double>(samples);
  m.standard_error = std::sqrt(m.estimate * (1.0 - m.estimate) / static_cast<double>(samples));
  m.bound = s_n_lower_bound(flow, n);
  m.pass = m.estimate + 3.0 * m.standard_error >= m.bound;
  return m;
}

// ---------------------------------------------------------------- shear windows

std::pair<double, double> least_squares(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = std::min(xs.size(), ys.size());
  if (n < 2) return {0.0, n == 1 ? ys[0] : 0.0};
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (sxx == 0.0) return {0.0, my};
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

ShearReport shear_window_check(const SpecialFlow& flow, const FlowPoint& x, double T, double epsilon1, int count) {
  if (!(T >= 1e3)) throw DomainError("shear_window_check: T must be at least 1e3");
  if (!(epsilon1 > 0.0)) throw DomainError("shear_window_check: epsilon1 must be positive");
  if (count < 2) throw DomainError("shear_window_check: need at least two times");
  const double g = flow.roof().abs_gamma();
  const double lt0 = 0.1 * std::log(T);
  const double lt1 = std::log(T);
  ShearReport rep;
  rep.samples = static_cast<std::size_t>(count);
  FlowWalker walker(flow, x);
  std::size_t both = 0;
  std::size_t upper = 0;
  std::vector<double> lx;
  std::vector<double> ly;
  for (int k = 0; k < count; ++k) {
    const double lt = lt0 + (lt1 - lt0) * k / (count - 1);
    const double t = std::exp(lt);
    walker.at(t);
    const double d = std::fabs(walker.sums().df);
    rep.times.push_back(t);
    rep.derivative.push_back(d);
    rep.hits.push_back(walker.hits());
    const bool up = d <= std::exp((1.0 + g + epsilon1) * lt);
    const bool low = d >= std::exp((1.0 + g - epsilon1) * lt);
    if (up) ++upper;
    if (up && low) {
      ++both;
      lx.push_back(lt);
      ly.push_back(std::log(d));
    }
  }
  rep.fraction = static_cast<double>(both) / count;
  rep.upper_fraction = static_cast<double>(upper) / count;
  rep.slope = least_squares(lx, ly).first;
  return rep;
}

// ---------------------------------------------------------------- boxes

BoxKind parse_box_kind(std::string_view name) {
  if (name == "in") return BoxKind::in;
  if (name == "out") return BoxKind::out;
  if (name == "out_sweep" || name == "out-sweep") return BoxKind::out_sweep;
  throw DomainError("box kind must be in, out or out_sweep");
}

std::pair<double, double> box_in_radii(const ExponentBook& book, double epsilon, double R) {
  const double e1 = book.epsilon1;
  return {epsilon * std::pow(R, -(1.0 - book.gamma1 + 2.0 * e1)),
          epsilon * std::pow(R, -(1.0 - book.gamma2 + 2.0 * e1))};
}

double box_out_radius(const ExponentBook& book, double epsilon, double R) {
  return epsilon * std::pow(R, -1.0 / (1.0 - book.epsilon0));
}

double box_out_bound(const ExponentBook& book, double epsilon, double R) {
  return 25.0 * std::pow(epsilon, 4) * std::pow(R, -2.0 / (1.0 - book.epsilon0));
}

double epsilon_bound(const ProductFlow& flow) {
  return std::min({0.01, flow.first().roof_minimum() / 100.0, flow.second().roof_minimum() / 100.0});
}

namespace {

bool within(double v, double lo, double hi) { return lo <= v && v <= hi; }

// x - y (or y - x) offsets in [0, r] horizontally and [v_lo, v_hi] vertically.
bool out_component(const FlowPoint& x, const FlowPoint& y, double r, double v_lo, double v_hi) {
  return within((x.x_h - y.x_h).signed_value(), 0.0, r) && within(x.x_v - y.x_v, v_lo, v_hi);
}

std::vector<ProductPoint> swept_centers(const ProductFlow& flow, const ProductPoint& x, double epsilon) {
  std::vector<ProductPoint> out;
  const double step = epsilon / 16.0;
  for (int k = -16; k <= 16; ++k) out.push_back(flow.flow(x, k * step));
  return out;
}

bool in_sweep(const std::vector<ProductPoint>& centers, const ProductPoint& y, double r, double epsilon) {
  const double step = epsilon / 16.0;
  for (const auto& c : centers)
    if (out_component(c.first, y.first, r, -step, epsilon) && out_component(c.second, y.second, r, -step, epsilon))
      return true;
  return false;
}

}  // namespace

bool box_membership(const ProductFlow& flow, const ExponentBook& book, const ProductPoint& x,
                    const ProductPoint& y, BoxKind kind, double epsilon, double R) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw DomainError("box: epsilon must lie in (0, 1)");
  if (!(R >= 1.0)) throw DomainError("box: R must be at least 1");
  switch (kind) {
    case BoxKind::in: {
      const auto [r1, r2] = box_in_radii(book, epsilon, R);
      return out_component(y.first, x.first, r1, 0.0, epsilon) && out_component(y.second, x.second, r2, 0.0, epsilon);
    }
    case BoxKind::out: {
      const double r = box_out_radius(book, epsilon, R);
      return out_component(x.first, y.first, r, 0.0, epsilon) && out_component(x.second, y.second, r, 0.0, epsilon);
    }
    case BoxKind::out_sweep:
      return in_sweep(swept_centers(flow, x, epsilon), y, box_out_radius(book, epsilon, R), epsilon);
  }
  return false;
}

namespace {

struct Window {
  CirclePoint base;  // right edge; the window spans [base - r, base]
  double v_lo;
  double v_hi;
  double area;
};

std::vector<Window> component_windows(const std::vector<FlowPoint>& centers, double r, double epsilon) {
  const double step = epsilon / 16.0;
  std::vector<Window> out;
  for (const auto& c : centers) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Window& w) { return w.base == c.x_h; });
    const double lo = std::max(0.0, c.x_v - epsilon);
    const double hi = c.x_v + step;
    if (it == out.end()) {
      out.push_back({c.x_h, lo, hi, 0.0});
    } else {
      it->v_lo = std::min(it->v_lo, lo);
      it->v_hi = std::max(it->v_hi, hi);
    }
  }
  for (auto& w : out) w.area = r * (w.v_hi - w.v_lo);
  return out;
}

FlowPoint draw_in(const std::vector<Window>& ws, double total, double r, std::mt19937_64& rng) {
  double pick = uniform_open(rng) * total;
  std::size_t k = 0;
  while (k + 1 < ws.size() && pick > ws[k].area) pick -= ws[k++].area;
  const Window& w = ws[k];
  const CirclePoint base = w.base - CirclePoint::from_double(uniform_open(rng) * r);
  return {base, w.v_lo + uniform_open(rng) * (w.v_hi - w.v_lo)};
}

bool under_roof(const SpecialFlow& flow, const FlowPoint& p) {
  const double l = p.x_h.left();
  const double r = p.x_h.right();
  if (l < kSingularGuard || r < kSingularGuard) return false;
  return p.x_v >= 0.0 && p.x_v < roof_jet(flow.roof(), l, r).f;
}

}  // namespace

MeasureEstimate box_out_measure(const ProductFlow& flow, const ExponentBook& book, const ProductPoint& y,
                                double epsilon, double R, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("box_out_measure: samples must be positive");
  const double r = box_out_radius(book, epsilon, R);
  const auto centers = swept_centers(flow, y, epsilon);
  std::vector<FlowPoint> c1;
  std::vector<FlowPoint> c2;
  for (const auto& c : centers) {
    c1.push_back(c.first);
    c2.push_back(c.second);
  }
  const auto w1 = component_windows(c1, r, epsilon);
  const auto w2 = component_windows(c2, r, epsilon);
  double a1 = 0.0;
  double a2 = 0.0;
  for (const auto& w : w1) a1 += w.area;
  for (const auto& w : w2) a2 += w.area;
  const double scale = a1 * a2 / (flow.first().roof_integral() * flow.second().roof_integral());

  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const FlowPoint p1 = draw_in(w1, a1, r, rng);
    const FlowPoint p2 = draw_in(w2, a2, r, rng);
    if (!under_roof(flow.first(), p1) || !under_roof(flow.second(), p2)) continue;
    if (in_sweep(centers, {p1, p2}, r, epsilon)) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  MeasureEstimate m;
  m.samples = samples;
  m.estimate = scale * p;
  m.standard_error = scale * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  m.bound = box_out_bound(book, epsilon, R);
  m.pass = m.estimate - 3.0 * m.standard_error <= m.bound;
  return m;
}

// ---------------------------------------------------------------- Kakutani balls

bool kakutani_ball_test(const ProductFlow& flow, const ProductPoint& center, const ProductPoint& y,
                        double epsilon, double R, const MatchSettings& settings) {
  if (epsilon >= 1.0) return true;
  if (!(epsilon > 0.0)) return false;
  const double delta = settings.delta > 0.0 ? settings.delta : default_delta(flow);
  return estimate_f_R(flow, center, y, R, settings.spec, delta, settings.tol) < epsilon;
}

namespace {

std::size_t common_count(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

class SymmetricBall {
 public:
  explicit SymmetricBall(std::span<const SymbolTrack> tracks) : tracks_(tracks) {
    for (const auto& t : tracks) {
      auto s = t.symbols;
      std::sort(s.begin(), s.end());
      sorted_.push_back(std::move(s));
    }
  }

  bool close(std::size_t a, std::size_t b, double radius) const {
    if (a == b || radius >= 1.0) return true;
    const SymbolTrack& u = tracks_[a];
    const SymbolTrack& v = tracks_[b];
    if (u.symbols == v.symbols) return true;
    const double len = static_cast<double>(std::max(u.size(), v.size()));
    if (static_cast<double>(common_count(sorted_[a], sorted_[b])) < (1.0 - radius) * len) return false;
    return matchable(u, v, radius) && matchable(v, u, radius);
  }

 private:
  std::span<const SymbolTrack> tracks_;
  std::vector<std::vector<std::uint64_t>> sorted_;
};

}  // namespace

KrEstimate kr_estimate(std::span<const SymbolTrack> tracks, double epsilon) {
  if (tracks.size() < kMinKrSample) throw UsageError("kr_estimate: sample must contain at least 200 points");
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw DomainError("kr_estimate: epsilon must lie in (0, 1)");
  const std::size_t n = tracks.size();
  const SymmetricBall ball(tracks);

  KrEstimate out;
  out.sample_size = n;
  out.caveat = "sample-restricted surrogate; balls centred at sample points only";

  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < n; ++i) {
    const bool separated = std::none_of(chosen.begin(), chosen.end(),
                                        [&](std::size_t c) { return ball.close(i, c, 5.0 * epsilon); });
    if (separated) chosen.push_back(i);
  }
  out.lower = chosen.size();

  std::vector<std::vector<std::uint32_t>> nbr(n);
  for (std::size_t a = 0; a < n; ++a) {
    nbr[a].push_back(static_cast<std::uint32_t>(a));
    for (std::size_t b = a + 1; b < n; ++b)
      if (ball.close(a, b, epsilon)) {
        nbr[a].push_back(static_cast<std::uint32_t>(b));
        nbr[b].push_back(static_cast<std::uint32_t>(a));
      }
  }
  const auto need = static_cast<std::size_t>(std::ceil((1.0 - epsilon) * static_cast<double>(n) - 1e-9));
  std::vector<char> covered(n, 0);
  std::size_t done = 0;
  while (done < need) {
    std::size_t best = 0;
    std::size_t best_gain = 0;
    for (std::size_t a = 0; a < n; ++a) {
      std::size_t gain = 0;
      for (auto b : nbr[a]) gain += covered[b] ? 0 : 1;
      if (gain > best_gain) {
        best_gain = gain;
        best = a;
      }
    }
    for (auto b : nbr[best])
      if (!covered[b]) {
        covered[b] = 1;
        ++done;
      }
    ++out.upper;
  }
  return out;
}

namespace {

template <class TrackFn>
KrScan scan(std::span<const double> r_grid, double epsilon, std::size_t sample, TrackFn&& tracks_at) {
  if (r_grid.size() < 4) throw DomainError("kr_scan: R grid needs at least 4 points");
  for (double R : r_grid)
    if (!(R > 0.0) || R > 1e4) throw DomainError("kr_scan: R must lie in (0, 1e4]");
  if (sample < kMinKrSample) throw UsageError("kr_scan: sample must contain at least 200 points");
  KrScan out;
  out.label = "finite-scale diagnostic: log K_R against log R on a finite sample, not the Kakutani invariant";
  std::vector<double> xs;
  std::vector<double> ys;
  for (double R : r_grid) {
    const std::vector<SymbolTrack> tracks = tracks_at(R);
    KrScanRow row;
    row.R = R;
    row.estimate = kr_estimate(tracks, epsilon / 5.0);
    xs.push_back(std::log(R));
    ys.push_back(std::log(static_cast<double>(row.estimate.lower)));
    out.rows.push_back(row);
  }
  std::tie(out.slope, out.intercept) = least_squares(xs, ys);
  for (std::size_t k = 0; k < out.rows.size(); ++k) out.rows[k].residual = ys[k] - (out.slope * xs[k] + out.intercept);
  return out;
}

}  // namespace

KrScan kr_scan(const ProductFlow& flow, std::span<const double> r_grid, double epsilon, std::size_t sample,
               const MatchSettings& settings, std::uint64_t seed) {
  const double delta = settings.delta > 0.0 ? settings.delta : default_delta(flow);
  const auto pts = sample_product(flow, sample, seed);
  return scan(r_grid, epsilon, sample, [&](double R) {
    std::vector<SymbolTrack> tracks;
    tracks.reserve(pts.size());
    for (const auto& p : pts) tracks.push_back(sample_track(flow, p, R, delta, settings.spec));
    return tracks;
  });
}

KrScan kr_scan(const SpecialFlow& flow, std::span<const double> r_grid, double epsilon, std::size_t sample,
               const MatchSettings& settings, std::uint64_t seed) {
  const double delta = settings.delta > 0.0 ? settings.delta : default_delta(flow);
  const auto pts = sample_suspension(flow, sample, seed);
  return scan(r_grid, epsilon, sample, [&](double R) {
    std::vector<SymbolTrack> tracks;
    tracks.reserve(pts.size());
    for (const auto& p : pts) tracks.push_back(sample_track(flow, p, R, delta, settings.spec));
    return tracks;
  });
}

}  // namespace kakulab
