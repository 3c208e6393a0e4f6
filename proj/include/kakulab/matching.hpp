#pragma once

#include <climits>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "kakulab/special_flow.hpp"

namespace kakulab {

/// Atom identifiers along an orbit at times k*delta, k = 0..floor(R/delta).
/// For single-flow tracks `product` is false and only origin.first is used.
struct SymbolTrack {
  ProductPoint origin;
  bool product = true;
  double R = 0.0;
  double delta = 0.0;
  std::vector<std::uint64_t> symbols;

  std::size_t size() const { return symbols.size(); }
};

inline constexpr std::size_t kMaxTrackSamples = 1'000'000;

/// One eighth of the smaller roof minimum.
double default_delta(const SpecialFlow& flow);
double default_delta(const ProductFlow& flow);

SymbolTrack sample_track(const ProductFlow& flow, const ProductPoint& x, double R, double delta,
                         const PartitionSpec& spec);
SymbolTrack sample_track(const SpecialFlow& flow, const FlowPoint& x, double R, double delta,
                         const PartitionSpec& spec);

/// Slope tolerances are snapped to multiples of 2^-20 so that the slope test
/// is exact integer arithmetic.
inline constexpr std::int64_t kSlopeDenominator = 1 << 20;
std::int64_t quantize_epsilon(double epsilon);

struct MatchResult {
  double epsilon = 0.0;
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  double fraction_u = 0.0;
  double fraction_v = 0.0;
  double slope_lo = 0.0;
  double slope_hi = 0.0;
  /// Final half-width of the index band |i - j| <= band.
  std::int64_t band = 0;

  std::size_t count() const { return pairs.size(); }
};

/// Longest monotone alignment of equal symbols whose consecutive increments
/// satisfy (1-e)(i'-i) <= j'-j <= (1+e)(i'-i). Ties are broken towards the
/// lexicographically earliest pair sequence.
MatchResult best_match(std::span<const std::uint64_t> u, std::span<const std::uint64_t> v, double epsilon);
/// Same on tracks; throws UsageError unless R and delta agree.
MatchResult best_match(const SymbolTrack& u, const SymbolTrack& v, double epsilon);

/// best_match reaches a matched fraction >= 1 - epsilon on both tracks.
bool matchable(const SymbolTrack& u, const SymbolTrack& v, double epsilon);

/// Bisection for the smallest matchable epsilon; returns the midpoint of the
/// final bracket (width <= tol), or 0 when the tracks coincide.
double estimate_f_R(const SymbolTrack& u, const SymbolTrack& v, double tol);
double estimate_f_R(const ProductFlow& flow, const ProductPoint& x, const ProductPoint& y, double R,
                    const PartitionSpec& spec, double delta, double tol);

inline constexpr int kBucketInfinite = INT_MAX;
inline constexpr int kBucketNone = -1;

struct TraceRow {
  std::int32_t i = 0;
  std::int32_t j = 0;
  double t = 0.0;
  double h = 0.0;
  double l_h = 0.0;
  double l = 0.0;
  /// j with 2^{-j-1} < L_H <= 2^{-j} when L < 2/m; kBucketInfinite when
  /// L_H = 0; kBucketNone when L >= 2/m.
  int bucket = kBucketNone;
};

struct DistanceTrace {
  std::vector<TraceRow> rows;
  /// bucket -> (number of matched samples in it) / track length
  std::map<int, double> bucket_mass;
};

DistanceTrace trace_distances(const ProductFlow& flow, const ProductPoint& x, const ProductPoint& y,
                              const MatchResult& result, double R, double delta, const PartitionSpec& spec);

/// Bucket index for a horizontal distance (no L condition applied).
int distance_bucket(double l_h);

}  // namespace kakulab
