#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kakulab/matching.hpp"
#include "kakulab/special_flow.hpp"

namespace kakulab {

// ---------------------------------------------------------------- exponents

/// Exponents gamma1 < gamma2 < 0 and the derived scales eps0, eps1, eps2.
///
///   eps2 in (0, g2 (g1 - g2) / (16 (2 + g2)))
///   eps0 = g2 / (2 (1 + g2)) - 4 eps2 (2 + g2) / ((g1 - g2)(1 + g2))
/// with g_i = |gamma_i|.
struct ExponentBook {
  double gamma1 = -0.8;
  double gamma2 = -0.5;
  double epsilon0 = 0.0;
  double epsilon1 = 0.1;
  double epsilon2 = 0.0;

  /// epsilon2 <= 0 selects the default (a quarter of its supremum).
  static ExponentBook make(double gamma1, double gamma2, double epsilon1 = 0.1, double epsilon2 = 0.0);
  static double epsilon2_supremum(double gamma1, double gamma2);
  static double epsilon0_ceiling(double gamma2);
};

struct BoundsReport {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool nonstandard = false;
};

/// lower = (2 + 4 g2 + 2 g1 g2) / ((2 + g2)(1 + g1)), upper = 1 + g1 + g2.
/// Requires -1 < gamma1 < gamma2 < 0.
BoundsReport theorem_bounds(double gamma1, double gamma2);

/// |gamma2| above which lower > 1 for fixed |gamma1|: 2 g1 / (3 + g1).
double nonstandard_threshold(double abs_gamma1);

/// Pairs whose [lower, upper] intervals are pairwise disjoint, each lying to
/// the left of its predecessor. The first pair is the seed.
std::vector<BoundsReport> disjoint_family(double gamma1, double gamma2, int count);

// ---------------------------------------------------------------- sampling

/// Uniform double in (0,1) from 53 random bits.
double uniform_open(std::mt19937_64& rng);

/// i.i.d. points of the normalised measure under the roof: base with density
/// f / int f (rejection against c (x^g + (1-x)^g)), height uniform in [0, f).
std::vector<FlowPoint> sample_suspension(const SpecialFlow& flow, std::size_t n, std::uint64_t seed);
FlowPoint sample_suspension_point(const SpecialFlow& flow, std::mt19937_64& rng);
std::vector<ProductPoint> sample_product(const ProductFlow& flow, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------- good sets

/// Whether the orbit over t in [-q_n log q_n, q_n log q_n] keeps its base
/// outside [-1/(q_n log^3 q_n), 1/(q_n log^3 q_n)]. Needs q_n >= 2.
bool s_n_membership(const SpecialFlow& flow, const FlowPoint& x, int n);

/// 1 - 2^{2+gamma}/(1+gamma) (min f log^2 q_n)^{-(1+gamma)}.
double s_n_lower_bound(const SpecialFlow& flow, int n);

struct MeasureEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;
  std::size_t samples = 0;
  bool pass = false;
};

/// Monte-Carlo measure of S_n; pass when estimate + 3 SE >= bound.
MeasureEstimate sn_measure(const SpecialFlow& flow, int n, std::size_t samples, std::uint64_t seed);

// ---------------------------------------------------------------- shear windows

struct ShearReport {
  std::size_t samples = 0;
  /// Fraction of times with t^{1+g-eps1} <= |f'^{(N(x,t))}(x_h)| <= t^{1+g+eps1}.
  double fraction = 0.0;
  /// Fraction meeting the upper window alone.
  double upper_fraction = 0.0;
  /// Least-squares slope of log|f'^{(N)}| against log t over the passing times.
  double slope = 0.0;
  std::vector<double> times;
  std::vector<double> derivative;
  std::vector<std::int64_t> hits;
};

/// Evaluated on `count` log-uniform times in [T^0.1, T].
ShearReport shear_window_check(const SpecialFlow& flow, const FlowPoint& x, double T, double epsilon1,
                               int count = 256);

// ---------------------------------------------------------------- boxes

enum class BoxKind { in, out, out_sweep };
BoxKind parse_box_kind(std::string_view name);

/// Horizontal radii of Box^in: eps R^{-(1 + g_i + 2 eps1)}.
std::pair<double, double> box_in_radii(const ExponentBook& book, double epsilon, double R);
/// Horizontal radius of Box^out: eps R^{-1/(1 - eps0)}.
double box_out_radius(const ExponentBook& book, double epsilon, double R);
/// Upper bound 25 eps^4 R^{-2/(1-eps0)}.
double box_out_bound(const ExponentBook& book, double epsilon, double R);
/// epsilon_bound = min(1/100, min f1 / 100, min f2 / 100).
double epsilon_bound(const ProductFlow& flow);

/// Offsets are one-sided as written: Box^in(x) holds y with
/// 0 <= y_h - x_h <= r_i and 0 <= y_v - x_v <= eps; Box^out(x) holds y with
/// 0 <= x_h - y_h <= r and 0 <= x_v - y_v <= eps (signed circle offsets).
/// out_sweep is the union of Box^out(x^t) over t in [-eps, eps], sampled on a
/// grid of step eps/16 with the vertical interval widened by one step.
bool box_membership(const ProductFlow& flow, const ExponentBook& book, const ProductPoint& x,
                    const ProductPoint& y, BoxKind kind, double epsilon, double R);

/// Monte-Carlo estimate of mu(Box^out_eps(y, eps, R)) by uniform sampling in
/// windows bounding the swept box; pass when estimate - 3 SE <= bound.
MeasureEstimate box_out_measure(const ProductFlow& flow, const ExponentBook& book, const ProductPoint& y,
                                double epsilon, double R, std::size_t samples, std::uint64_t seed);

// ---------------------------------------------------------------- Kakutani balls

struct MatchSettings {
  PartitionSpec spec{4};
  /// <= 0 selects default_delta.
  double delta = 0.0;
  double tol = 0.01;
};

bool kakutani_ball_test(const ProductFlow& flow, const ProductPoint& center, const ProductPoint& y,
                        double epsilon, double R, const MatchSettings& settings);

struct KrEstimate {
  std::size_t sample_size = 0;
  /// Greedy 5 eps-separated subset of the sample.
  std::size_t lower = 0;
  /// Greedy eps-ball cover of a 1 - eps fraction of the sample.
  std::size_t upper = 0;
  std::string caveat;
};

inline constexpr std::size_t kMinKrSample = 200;

/// Separated set and cover on pre-sampled tracks, using the symmetric
/// surrogate d(a,b) < r iff a and b are matchable both ways at r.
KrEstimate kr_estimate(std::span<const SymbolTrack> tracks, double epsilon);

struct KrScanRow {
  double R = 0.0;
  KrEstimate estimate;
  double residual = 0.0;
};

struct KrScan {
  std::vector<KrScanRow> rows;
  double slope = 0.0;
  double intercept = 0.0;
  std::string label;
};

/// Least-squares fit y = slope x + intercept.
std::pair<double, double> least_squares(std::span<const double> xs, std::span<const double> ys);

/// log lower_K against log R. Here epsilon is the separation radius, so the
/// balls have radius epsilon/5.
KrScan kr_scan(const ProductFlow& flow, std::span<const double> r_grid, double epsilon, std::size_t sample,
               const MatchSettings& settings, std::uint64_t seed);
KrScan kr_scan(const SpecialFlow& flow, std::span<const double> r_grid, double epsilon, std::size_t sample,
               const MatchSettings& settings, std::uint64_t seed);

}  // namespace kakulab
