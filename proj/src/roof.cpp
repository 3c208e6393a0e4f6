#include "kakulab/roof.hpp"

#include <cmath>
#include <string>

#include "kakulab/errors.hpp"

namespace kakulab {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > -1.0 && gamma < 0.0))
    throw DomainError("gamma must lie strictly inside (-1,0), got " + std::to_string(gamma));
}

}  // namespace

RoofMode parse_roof_mode(std::string_view name) {
  if (name == "pure") return RoofMode::pure;
  if (name == "normalized") return RoofMode::normalized;
  throw DomainError("unknown roof mode '" + std::string(name) + "'");
}

std::string_view to_string(RoofMode mode) { return mode == RoofMode::pure ? "pure" : "normalized"; }

RoofParams RoofParams::pure(double gamma) {
  check_gamma(gamma);
  return RoofParams{gamma, RoofMode::pure, 1.0, 1.0, 1.0};
}

RoofParams RoofParams::normalized(double gamma) {
  check_gamma(gamma);
  const double s = (1.0 + gamma) / 2.0;
  return RoofParams{gamma, RoofMode::normalized, s, s, s};
}

RoofParams RoofParams::make(double gamma, RoofMode mode) {
  return mode == RoofMode::pure ? pure(gamma) : normalized(gamma);
}

RoofParams RoofParams::custom(double gamma, double a1, double b1) {
  check_gamma(gamma);
  if (!(a1 > 0.0 && b1 > 0.0)) throw DomainError("roof coefficients must be positive");
  return RoofParams{gamma, RoofMode::pure, a1, b1, 1.0};
}

RoofJet roof_jet(const RoofParams& roof, double left, double right) {
  if (left < kSingularGuard || right < kSingularGuard)
    throw SingularityError("roof evaluated within the singular guard of 0", 0);
  const double g = roof.gamma;
  const double pl = roof.a1 * std::exp(g * std::log(left));
  const double pr = roof.b1 * std::exp(g * std::log(right));
  RoofJet jet;
  jet.f = pl + pr;
  jet.df = g * (pl / left - pr / right);
  jet.d2f = g * (g - 1.0) * (pl / (left * left) + pr / (right * right));
  return jet;
}

double eval_roof(const RoofParams& roof, double x, int order) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("eval_roof: x must lie in (0,1)");
  const RoofJet jet = roof_jet(roof, x, 1.0 - x);
  switch (order) {
    case 0: return jet.f;
    case 1: return jet.df;
    case 2: return jet.d2f;
    default: throw DomainError("eval_roof: order must be 0, 1 or 2");
  }
}

double eval_roof(const RoofParams& roof, CirclePoint x, int order) {
  const RoofJet jet = roof_jet(roof, x.left(), x.right());
  switch (order) {
    case 0: return jet.f;
    case 1: return jet.df;
    case 2: return jet.d2f;
    default: throw DomainError("eval_roof: order must be 0, 1 or 2");
  }
}

double roof_integral(const RoofParams& roof) { return (roof.a1 + roof.b1) / (1.0 + roof.gamma); }

double roof_minimum(const RoofParams& roof) {
  // Stationary point: A1 x^(g-1) = B1 (1-x)^(g-1).
  const double g = roof.gamma;
  const double ratio = std::pow(roof.a1 / roof.b1, 1.0 / (1.0 - g));  // x / (1-x)
  const double x = ratio / (1.0 + ratio);
  return roof.a1 * std::pow(x, g) + roof.b1 * std::pow(1.0 - x, g);
}

}  // namespace kakulab
