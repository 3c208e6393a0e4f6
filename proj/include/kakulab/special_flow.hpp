#pragma once

#include <cstdint>

#include "kakulab/birkhoff.hpp"
#include "kakulab/cf.hpp"
#include "kakulab/circle.hpp"
#include "kakulab/compensated.hpp"
#include "kakulab/roof.hpp"

namespace kakulab {

/// A point (x_h, x_v) of the region under the roof; canonical when 0 <= x_v < f(x_h).
struct FlowPoint {
  CirclePoint x_h;
  double x_v = 0.0;

  static FlowPoint make(double base, double height) { return {CirclePoint::from_double(base), height}; }
  double base() const { return x_h.to_double(); }
};

struct ProductPoint {
  FlowPoint first;
  FlowPoint second;
};

/// The special flow over x -> x + alpha under the roof f.
///
///   T_t(x_h, x_v) = (x_h + N alpha, x_v + t - f^{(N)}(x_h)),
///   f^{(N)}(x_h) <= x_v + t < f^{(N+1)}(x_h).
///
/// Forward and backward times are both resolved by scanning the orbit and
/// accumulating the three-branch Birkhoff sum, so the cost is linear in the
/// number of roof crossings.
class SpecialFlow {
 public:
  SpecialFlow(RoofParams roof, Irrational alpha);

  const RoofParams& roof() const { return roof_; }
  const Irrational& alpha() const { return alpha_; }
  double roof_minimum() const { return minimum_; }
  double roof_integral() const { return integral_; }

  /// Roof value at a base point; throws SingularityError in the guard.
  double roof_at(CirclePoint x_h) const;

  std::int64_t hit_count(const FlowPoint& x, double t) const;
  FlowPoint flow(const FlowPoint& x, double t) const;

 private:
  RoofParams roof_;
  Irrational alpha_;
  double minimum_;
  double integral_;
};

/// Incremental evaluation of t -> T_t x for nondecreasing t >= 0.
///
/// Produces bit-identical results to SpecialFlow::flow for the same (x, t)
/// while reusing the prefix sums between calls. Also carries f'^{(N)} and
/// f''^{(N)} of the base point for the last requested time.
class FlowWalker {
 public:
  FlowWalker(const SpecialFlow& flow, const FlowPoint& origin);

  /// Position at time t (t must not decrease between calls).
  FlowPoint at(double t);

  std::int64_t hits() const { return hits_; }
  /// Birkhoff sums of f, f', f'' over the first hits() iterates of the origin.
  BirkhoffTriple sums() const { return {f_.value(), df_.value(), d2f_.value()}; }

 private:
  void load_next();

  const SpecialFlow* flow_;
  FlowPoint origin_;
  CirclePoint position_;
  std::int64_t hits_ = 0;
  CompensatedSum f_, df_, d2f_;
  RoofJet next_{};
  double last_t_ = 0.0;
};

class ProductFlow {
 public:
  ProductFlow(SpecialFlow first, SpecialFlow second) : first_(std::move(first)), second_(std::move(second)) {}

  const SpecialFlow& first() const { return first_; }
  const SpecialFlow& second() const { return second_; }

  ProductPoint flow(const ProductPoint& x, double t) const {
    return {first_.flow(x.first, t), second_.flow(x.second, t)};
  }

 private:
  SpecialFlow first_;
  SpecialFlow second_;
};

/// d_H + d_V: circle distance of the bases plus the height difference.
double metric(const FlowPoint& x, const FlowPoint& y);

/// Generating partition P_m: everything with f(x_h) >= 2^m or x_v >= 2^m is
/// the cusp atom (id 0); the rest is cut into axis-aligned squares of side
/// 1/m anchored at the origin and clipped by the roof graph.
struct PartitionSpec {
  int m = 4;

  explicit PartitionSpec(int m_ = 4);
  double cell_side() const { return 1.0 / m; }
  double height_cut() const;
};

using AtomId = std::uint32_t;
inline constexpr AtomId kCuspAtom = 0;

AtomId atom_id(const PartitionSpec& spec, const RoofParams& roof, const FlowPoint& x);

/// Column and row of a non-cusp atom (undefined for the cusp atom).
struct AtomCell {
  int column = 0;
  int row = 0;
};
AtomCell atom_cell(const PartitionSpec& spec, AtomId id);

using ProductAtomId = std::uint64_t;
inline ProductAtomId product_atom(AtomId a, AtomId b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

}  // namespace kakulab
