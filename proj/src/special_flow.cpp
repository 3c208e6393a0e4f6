#include "kakulab/special_flow.hpp"

#include <cmath>
#include <string>

#include "kakulab/errors.hpp"

namespace kakulab {

namespace {

RoofJet guarded_jet(const RoofParams& roof, CirclePoint x, std::int64_t iterate) {
  const double l = x.left();
  const double r = x.right();
  if (l < kSingularGuard || r < kSingularGuard)
    throw SingularityError("flow orbit iterate " + std::to_string(iterate) + " hits the singular guard", iterate);
  return roof_jet(roof, l, r);
}

double canonical_height(double h, double roof_value) {
  if (h < 0.0) return 0.0;
  if (h >= roof_value) return std::nextafter(roof_value, 0.0);
  return h;
}

}  // namespace

SpecialFlow::SpecialFlow(RoofParams roof, Irrational alpha)
    : roof_(roof), alpha_(std::move(alpha)), minimum_(kakulab::roof_minimum(roof)),
      integral_(kakulab::roof_integral(roof)) {}

double SpecialFlow::roof_at(CirclePoint x_h) const { return guarded_jet(roof_, x_h, 0).f; }

FlowWalker::FlowWalker(const SpecialFlow& flow, const FlowPoint& origin)
    : flow_(&flow), origin_(origin), position_(origin.x_h) {
  load_next();
}

void FlowWalker::load_next() { next_ = guarded_jet(flow_->roof(), position_, hits_); }

FlowPoint FlowWalker::at(double t) {
  if (t < last_t_) throw UsageError("FlowWalker: times must be nondecreasing");
  if (t < 0.0) throw UsageError("FlowWalker: negative time");
  last_t_ = t;
  const double target = origin_.x_v + t;
  const CirclePoint step = flow_->alpha().value();
  for (;;) {
    CompensatedSum trial = f_;
    trial += next_.f;
    if (trial.value() > target) break;
    f_ = trial;
    df_ += next_.df;
    d2f_ += next_.d2f;
    ++hits_;
    if (hits_ > kMaxBirkhoffIterates) throw CapacityError("flow: too many roof crossings");
    position_ += step;
    load_next();
  }
  return {position_, canonical_height(target - f_.value(), next_.f)};
}

std::int64_t SpecialFlow::hit_count(const FlowPoint& x, double t) const {
  const double target = x.x_v + t;
  if (t >= 0.0) {
    FlowWalker walker(*this, x);
    walker.at(t);
    return walker.hits();
  }
  // Moving down but staying above the floor: no crossing.
  if (target >= 0.0) return 0;
  // Pull back until -(f(x - n alpha) + ... + f(x - alpha)) <= target.
  CompensatedSum back;
  CirclePoint pos = x.x_h;
  const CirclePoint step = alpha_.value();
  std::int64_t n = 0;
  while (-back.value() > target) {
    pos -= step;
    ++n;
    if (n > kMaxBirkhoffIterates) throw CapacityError("flow: too many roof crossings");
    back += guarded_jet(roof_, pos, -n).f;
  }
  return -n;
}

FlowPoint SpecialFlow::flow(const FlowPoint& x, double t) const {
  if (t == 0.0) return x;
  const double target = x.x_v + t;
  if (t > 0.0) {
    FlowWalker walker(*this, x);
    return walker.at(t);
  }
  if (target >= 0.0) {
    // Backward in time but within the current fibre.
    return {x.x_h, target};
  }
  CompensatedSum back;
  CirclePoint pos = x.x_h;
  const CirclePoint step = alpha_.value();
  std::int64_t n = 0;
  double last = 0.0;
  while (-back.value() > target) {
    pos -= step;
    ++n;
    if (n > kMaxBirkhoffIterates) throw CapacityError("flow: too many roof crossings");
    last = guarded_jet(roof_, pos, -n).f;
    back += last;
  }
  return {pos, canonical_height(target + back.value(), last)};
}

double metric(const FlowPoint& x, const FlowPoint& y) {
  return circle_distance(x.x_h, y.x_h) + std::fabs(x.x_v - y.x_v);
}

PartitionSpec::PartitionSpec(int m_) : m(m_) {
  if (m < 1 || m > 16) throw DomainError("partition: m must lie in [1, 16]");
}

double PartitionSpec::height_cut() const { return std::ldexp(1.0, m); }

AtomId atom_id(const PartitionSpec& spec, const RoofParams& roof, const FlowPoint& x) {
  const double cut = spec.height_cut();
  if (x.x_v >= cut) return kCuspAtom;
  const double l = x.x_h.left();
  const double r = x.x_h.right();
  if (l < kSingularGuard || r < kSingularGuard) return kCuspAtom;
  if (roof_jet(roof, l, r).f >= cut) return kCuspAtom;
  const int m = spec.m;
  int column = static_cast<int>(x.x_h.to_double() * m);
  if (column >= m) column = m - 1;
  const int rows = m << m;
  int row = static_cast<int>(x.x_v * m);
  if (row < 0) row = 0;
  if (row >= rows) row = rows - 1;
  return static_cast<AtomId>(1 + column * rows + row);
}

AtomCell atom_cell(const PartitionSpec& spec, AtomId id) {
  const int rows = spec.m << spec.m;
  const int k = static_cast<int>(id) - 1;
  return {k / rows, k % rows};
}

}  // namespace kakulab
