#include "kakulab/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <unordered_map>

#include "kakulab/errors.hpp"

namespace kakulab {

namespace {

std::size_t track_length(double R, double delta) {
  if (!(delta > 0.0)) throw DomainError("sample_track: delta must be positive");
  if (!(R >= 0.0)) throw DomainError("sample_track: R must be nonnegative");
  const double steps = std::floor(R / delta);
  if (steps + 1.0 > static_cast<double>(kMaxTrackSamples))
    throw CapacityError("sample_track: R/delta exceeds 1e6 samples");
  return static_cast<std::size_t>(steps) + 1;
}

void check_delta(double delta, double min_roof) {
  if (!(delta > 0.0) || !(delta < min_roof))
    throw DomainError("sample_track: delta must lie in (0, min roof)");
}

struct MaxFenwick {
  explicit MaxFenwick(std::size_t n) : tree(n + 1, 0) {}
  void update(std::size_t pos, std::uint64_t key) {
    for (++pos; pos < tree.size(); pos += pos & (~pos + 1))
      if (tree[pos] < key) tree[pos] = key;
  }
  std::uint64_t prefix_max(std::size_t pos) const {
    std::uint64_t best = 0;
    for (++pos; pos > 0; pos -= pos & (~pos + 1))
      if (best < tree[pos]) best = tree[pos];
    return best;
  }
  std::vector<std::uint64_t> tree;
};

struct Candidate {
  std::int32_t i;
  std::int32_t j;
  std::int64_t p;
  std::int64_t r;
};

constexpr std::uint64_t kRankMask = 0xFFFFFFFFull;

// Longest chain over the candidates in the dominance order p' >= p, r' <= r.
std::vector<std::pair<std::int32_t, std::int32_t>> longest_chain(const std::vector<Candidate>& pts) {
  const std::size_t n = pts.size();
  if (n == 0) return {};
  std::vector<std::int64_t> rs(n);
  for (std::size_t k = 0; k < n; ++k) rs[k] = pts[k].r;
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (pts[a].p != pts[b].p) return pts[a].p > pts[b].p;
    return pts[a].i > pts[b].i;
  });

  MaxFenwick fen(rs.size());
  std::vector<std::int64_t> next(n, -1);
  std::uint64_t top = 0;
  for (const std::uint32_t k : order) {
    const auto pos = static_cast<std::size_t>(std::lower_bound(rs.begin(), rs.end(), pts[k].r) - rs.begin());
    const std::uint64_t q = fen.prefix_max(pos);
    std::uint64_t len = 1;
    if (q != 0) {
      len = (q >> 32) + 1;
      next[k] = static_cast<std::int64_t>(kRankMask - (q & kRankMask));
    }
    const std::uint64_t key = (len << 32) | (kRankMask - k);
    fen.update(pos, key);
    if (top < key) top = key;
  }

  std::vector<std::pair<std::int32_t, std::int32_t>> chain;
  chain.reserve(top >> 32);
  for (auto k = static_cast<std::int64_t>(kRankMask - (top & kRankMask)); k >= 0; k = next[k])
    chain.emplace_back(pts[k].i, pts[k].j);
  return chain;
}

}  // namespace

double default_delta(const SpecialFlow& flow) { return flow.roof_minimum() / 8.0; }

double default_delta(const ProductFlow& flow) {
  return std::min(flow.first().roof_minimum(), flow.second().roof_minimum()) / 8.0;
}

SymbolTrack sample_track(const ProductFlow& flow, const ProductPoint& x, double R, double delta,
                         const PartitionSpec& spec) {
  check_delta(delta, std::min(flow.first().roof_minimum(), flow.second().roof_minimum()));
  const std::size_t k = track_length(R, delta);
  SymbolTrack track{x, true, R, delta, {}};
  track.symbols.reserve(k);
  FlowWalker a(flow.first(), x.first);
  FlowWalker b(flow.second(), x.second);
  for (std::size_t n = 0; n < k; ++n) {
    const double t = static_cast<double>(n) * delta;
    const AtomId ia = atom_id(spec, flow.first().roof(), a.at(t));
    const AtomId ib = atom_id(spec, flow.second().roof(), b.at(t));
    track.symbols.push_back(product_atom(ia, ib));
  }
  return track;
}

SymbolTrack sample_track(const SpecialFlow& flow, const FlowPoint& x, double R, double delta,
                         const PartitionSpec& spec) {
  check_delta(delta, flow.roof_minimum());
  const std::size_t k = track_length(R, delta);
  SymbolTrack track{ProductPoint{x, FlowPoint{}}, false, R, delta, {}};
  track.symbols.reserve(k);
  FlowWalker a(flow, x);
  for (std::size_t n = 0; n < k; ++n)
    track.symbols.push_back(atom_id(spec, flow.roof(), a.at(static_cast<double>(n) * delta)));
  return track;
}

std::int64_t quantize_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw DomainError("matching: epsilon must lie in (0, 1)");
  auto e = static_cast<std::int64_t>(std::llround(epsilon * static_cast<double>(kSlopeDenominator)));
  return std::clamp<std::int64_t>(e, 1, kSlopeDenominator - 1);
}

MatchResult best_match(std::span<const std::uint64_t> u, std::span<const std::uint64_t> v, double epsilon) {
  const std::int64_t e = quantize_epsilon(epsilon);
  const std::int64_t D = kSlopeDenominator;
  const auto ku = static_cast<std::int64_t>(u.size());
  const auto kv = static_cast<std::int64_t>(v.size());
  const std::int64_t k = std::max(ku, kv);

  MatchResult out;
  out.epsilon = epsilon;
  out.slope_lo = 1.0 - static_cast<double>(e) / D;
  out.slope_hi = 1.0 + static_cast<double>(e) / D;
  if (ku == 0 || kv == 0) return out;

  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> where;
  for (std::int64_t j = 0; j < kv; ++j) where[v[j]].push_back(static_cast<std::int32_t>(j));

  std::int64_t band = static_cast<std::int64_t>(std::ceil(static_cast<double>(e) / D * k)) + 16;
  for (;;) {
    const bool full = band >= k;
    std::vector<Candidate> pts;
    for (std::int64_t i = 0; i < ku; ++i) {
      const auto it = where.find(u[i]);
      if (it == where.end()) continue;
      const auto& js = it->second;
      auto lo = std::lower_bound(js.begin(), js.end(), i - band);
      for (; lo != js.end() && *lo <= i + band; ++lo) {
        const std::int64_t j = *lo;
        pts.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), j * D - (D - e) * i,
                       j * D - (D + e) * i});
      }
    }
    auto chain = longest_chain(pts);
    const bool touches = std::any_of(chain.begin(), chain.end(), [&](const auto& pr) {
      return std::llabs(static_cast<std::int64_t>(pr.first) - pr.second) >= band;
    });
    if (full || !touches) {
      out.pairs = std::move(chain);
      out.band = band;
      break;
    }
    band *= 2;
  }
  out.fraction_u = static_cast<double>(out.pairs.size()) / static_cast<double>(ku);
  out.fraction_v = static_cast<double>(out.pairs.size()) / static_cast<double>(kv);
  return out;
}

namespace {

void check_compatible(const SymbolTrack& u, const SymbolTrack& v) {
  if (u.R != v.R) throw UsageError("matching: tracks have different horizons R");
  if (u.delta != v.delta) throw UsageError("matching: tracks have different sampling steps delta");
}

// Upper bound on any matching: a symbol can be matched at most min(#u, #v) times.
std::size_t histogram_bound(std::span<const std::uint64_t> u, std::span<const std::uint64_t> v) {
  std::unordered_map<std::uint64_t, std::int64_t> cu;
  std::unordered_map<std::uint64_t, std::int64_t> cv;
  for (auto s : u) ++cu[s];
  for (auto s : v) ++cv[s];
  std::size_t total = 0;
  for (const auto& [s, c] : cu) {
    const auto it = cv.find(s);
    if (it != cv.end()) total += static_cast<std::size_t>(std::min(c, it->second));
  }
  return total;
}

// Length of the longest common subsequence, bit-parallel over u (Hyyro's
// formulation). Any slope-constrained matching is a common subsequence.
std::size_t lcs_length(std::span<const std::uint64_t> u, std::span<const std::uint64_t> v) {
  const std::size_t n = u.size();
  const std::size_t words = (n + 63) / 64;
  if (n == 0 || v.empty()) return 0;
  std::unordered_map<std::uint64_t, std::size_t> slot;
  std::vector<std::uint64_t> masks;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = slot.try_emplace(u[i], masks.size());
    if (fresh) masks.resize(masks.size() + words, 0);
    masks[it->second + i / 64] |= std::uint64_t{1} << (i % 64);
  }
  const std::uint64_t last = n % 64 ? (std::uint64_t{1} << (n % 64)) - 1 : ~std::uint64_t{0};
  std::vector<std::uint64_t> row(words, ~std::uint64_t{0});
  row[words - 1] = last;
  for (const std::uint64_t c : v) {
    const auto it = slot.find(c);
    if (it == slot.end()) continue;
    const std::uint64_t* m = masks.data() + it->second;
    unsigned carry = 0;
    unsigned borrow = 0;
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t x = row[w];
      const std::uint64_t y = x & m[w];
      std::uint64_t sum;
      std::uint64_t diff;
      const unsigned c1 = __builtin_add_overflow(x, y, &sum);
      const unsigned c2 = __builtin_add_overflow(sum, static_cast<std::uint64_t>(carry), &sum);
      const unsigned b1 = __builtin_sub_overflow(x, y, &diff);
      const unsigned b2 = __builtin_sub_overflow(diff, static_cast<std::uint64_t>(borrow), &diff);
      carry = c1 | c2;
      borrow = b1 | b2;
      row[w] = sum | diff;
    }
    row[words - 1] &= last;
  }
  std::size_t ones = 0;
  for (const std::uint64_t w : row) ones += static_cast<std::size_t>(__builtin_popcountll(w));
  return n - ones;
}

bool enough(std::size_t count, std::size_t len, double epsilon) {
  return static_cast<double>(count) >= (1.0 - epsilon) * static_cast<double>(len);
}

}  // namespace

MatchResult best_match(const SymbolTrack& u, const SymbolTrack& v, double epsilon) {
  check_compatible(u, v);
  return best_match(std::span<const std::uint64_t>(u.symbols), std::span<const std::uint64_t>(v.symbols), epsilon);
}

bool matchable(const SymbolTrack& u, const SymbolTrack& v, double epsilon) {
  check_compatible(u, v);
  const std::size_t len = std::max(u.size(), v.size());
  if (!enough(histogram_bound(u.symbols, v.symbols), len, epsilon)) return false;
  if (!enough(lcs_length(u.symbols, v.symbols), len, epsilon)) return false;
  const MatchResult m = best_match(u, v, epsilon);
  return enough(m.count(), u.size(), epsilon) && enough(m.count(), v.size(), epsilon);
}

double estimate_f_R(const SymbolTrack& u, const SymbolTrack& v, double tol) {
  check_compatible(u, v);
  if (!(tol > 0.0) || !(tol < 1.0)) throw DomainError("estimate_f_R: tol must lie in (0, 1)");
  if (u.symbols == v.symbols) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (matchable(u, v, mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double estimate_f_R(const ProductFlow& flow, const ProductPoint& x, const ProductPoint& y, double R,
                    const PartitionSpec& spec, double delta, double tol) {
  const SymbolTrack u = sample_track(flow, x, R, delta, spec);
  const SymbolTrack v = sample_track(flow, y, R, delta, spec);
  return estimate_f_R(u, v, tol);
}

int distance_bucket(double l_h) {
  if (l_h <= 0.0) return kBucketInfinite;
  int j = static_cast<int>(std::floor(-std::log2(l_h)));
  // Repair rounding at exact powers of two: want 2^{-j-1} < l_h <= 2^{-j}.
  while (l_h > std::ldexp(1.0, -j)) --j;
  while (l_h <= std::ldexp(1.0, -j - 1)) ++j;
  return j;
}

DistanceTrace trace_distances(const ProductFlow& flow, const ProductPoint& x, const ProductPoint& y,
                              const MatchResult& result, double R, double delta, const PartitionSpec& spec) {
  const std::size_t k = track_length(R, delta);
  DistanceTrace out;
  out.rows.reserve(result.pairs.size());
  FlowWalker x1(flow.first(), x.first);
  FlowWalker x2(flow.second(), x.second);
  FlowWalker y1(flow.first(), y.first);
  FlowWalker y2(flow.second(), y.second);
  const double cut = 2.0 / spec.m;
  std::map<int, std::size_t> counts;
  for (const auto& [i, j] : result.pairs) {
    TraceRow row;
    row.i = i;
    row.j = j;
    row.t = i * delta;
    row.h = j * delta;
    const FlowPoint a1 = x1.at(row.t);
    const FlowPoint a2 = x2.at(row.t);
    const FlowPoint b1 = y1.at(row.h);
    const FlowPoint b2 = y2.at(row.h);
    row.l_h = std::max(circle_distance(a1.x_h, b1.x_h), circle_distance(a2.x_h, b2.x_h));
    row.l = std::max(metric(a1, b1), metric(a2, b2));
    row.bucket = row.l < cut ? distance_bucket(row.l_h) : kBucketNone;
    if (row.bucket != kBucketNone) ++counts[row.bucket];
    out.rows.push_back(row);
  }
  for (const auto& [b, c] : counts) out.bucket_mass[b] = static_cast<double>(c) / static_cast<double>(k);
  return out;
}

}  // namespace kakulab
