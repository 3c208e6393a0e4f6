#pragma once

#include <string_view>

#include "kakulab/circle.hpp"

namespace kakulab {

enum class RoofMode { pure, normalized };

RoofMode parse_roof_mode(std::string_view name);
std::string_view to_string(RoofMode mode);

/// Roof f(x) = A1 x^gamma + B1 (1-x)^gamma on the circle, gamma in (-1,0).
///
/// pure:       A1 = B1 = 1, integral 2/(1+gamma).
/// normalized: A1 = B1 = (1+gamma)/2, integral 1.
/// Asymmetric coefficients can be passed to `custom` but nothing downstream
/// is calibrated for them.
struct RoofParams {
  double gamma = -0.5;
  RoofMode mode = RoofMode::pure;
  double a1 = 1.0;
  double b1 = 1.0;
  double scale = 1.0;

  static RoofParams pure(double gamma);
  static RoofParams normalized(double gamma);
  static RoofParams make(double gamma, RoofMode mode);
  static RoofParams custom(double gamma, double a1, double b1);

  double abs_gamma() const { return -gamma; }
  /// Largest of the two singular coefficients.
  double coefficient() const { return a1 > b1 ? a1 : b1; }
};

/// Points closer than this to the cusp are treated as hitting it.
inline constexpr double kSingularGuard = 1e-30;

/// f, f' or f'' at x in (0,1). Throws SingularityError within the guard of 0 or 1.
double eval_roof(const RoofParams& roof, double x, int order);

/// Same, evaluated from a fixed-point position so both x and 1-x are exact.
double eval_roof(const RoofParams& roof, CirclePoint x, int order);

/// f, f' and f'' at once from the two one-sided distances to the cusp.
struct RoofJet {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};
RoofJet roof_jet(const RoofParams& roof, double left, double right);

double roof_integral(const RoofParams& roof);

/// min_x f(x) (closed form).
double roof_minimum(const RoofParams& roof);

}  // namespace kakulab
