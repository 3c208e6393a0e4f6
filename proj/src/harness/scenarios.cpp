#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <list>
#include <memory>
#include <random>
#include <set>
#include <type_traits>
#include <sstream>

#include "kakulab/birkhoff.hpp"
#include "kakulab/cf.hpp"
#include "kakulab/errors.hpp"
#include "kakulab/harness.hpp"
#include "kakulab/invariant_lab.hpp"
#include "kakulab/matching.hpp"
#include "kakulab/roof.hpp"
#include "kakulab/special_flow.hpp"

#ifndef KAKULAB_VERSION
#define KAKULAB_VERSION "dev"
#endif

namespace kakulab::harness {

namespace {

namespace fs = std::filesystem;

std::string str(double v) { return format_double(v); }
std::string str(bool v) { return v ? "true" : "false"; }
std::string str(const std::string& v) { return v; }
template <class T>
  requires std::is_integral_v<T>
std::string str(T v) {
  return std::to_string(v);
}

// ---------------------------------------------------------------- run context

struct Context {
  std::string scenario;
  ExperimentConfig cfg;
  std::vector<std::pair<std::string, std::function<std::string()>>> echo;
  std::list<std::pair<std::string, CsvTable>> tables;
  Manifest manifest;
  std::ostream* text = &std::cout;
  bool failed = false;

  CsvTable& table(const std::string& stem, std::vector<std::string> header) {
    tables.emplace_back(stem, CsvTable(std::move(header)));
    return tables.back().second;
  }
};

void write_outputs(Context& ctx, bool partial) {
  const fs::path dir(ctx.cfg.out);
  fs::create_directories(dir);
  const std::string suffix = partial ? ".partial" : "";
  for (const auto& [stem, t] : ctx.tables) t.write(dir / (stem + ".csv" + suffix));
  Manifest m;
  m.set("scenario", ctx.scenario);
  m.set("version", KAKULAB_VERSION);
  m.set("seed", str(ctx.cfg.seed));
  for (const auto& [k, fn] : ctx.echo) m.set("config." + k, fn());
  for (const auto& [k, v] : ctx.manifest.entries()) m.set(k, v);
  if (partial) m.set("status", "partial");
  m.write(dir / (ctx.scenario + ".manifest" + suffix));
}

// ---------------------------------------------------------------- option binding

class Binder {
 public:
  Binder(CLI::App* app, Context* ctx, const std::map<std::string, std::string>* file, std::set<std::string>* used)
      : app_(app), ctx_(ctx), file_(file), used_(used) {}

  template <class T>
  CLI::Option* add(const std::string& names, T& field, const std::string& help) {
    CLI::Option* opt = app_->add_option(names, field, help);
    finish(opt, field);
    return opt;
  }

  CLI::Option* flag(const std::string& names, bool& field, const std::string& help) {
    CLI::Option* opt = app_->add_flag(names, field, help);
    finish(opt, field);
    return opt;
  }

 private:
  template <class T>
  void finish(CLI::Option* opt, T& field) {
    const std::string key = opt->get_lnames().front();
    ctx_->echo.emplace_back(key, [&field] { return str(field); });
    for (const auto& name : opt->get_lnames()) {
      const auto it = file_->find(name);
      if (it == file_->end()) continue;
      used_->insert(name);
      try {
        opt->run_callback_for_default()->default_val(it->second);
      } catch (const CLI::Error&) {
        throw ConfigError(name, "cannot parse '" + it->second + "'");
      }
    }
  }

  CLI::App* app_;
  Context* ctx_;
  const std::map<std::string, std::string>* file_;
  std::set<std::string>* used_;
};

void add_common(Binder& b, ExperimentConfig& c) {
  b.add("--seed", c.seed, "RNG seed");
  b.add("--out", c.out, "output directory");
}

void add_single_flow(Binder& b, ExperimentConfig& c) {
  b.add("--gamma,--gamma1", c.gamma1, "roof exponent in (-1,0)");
  b.add("--alpha,--alpha1", c.alpha1, "golden | sqrt2m1 | decimal");
  b.add("--mode", c.mode, "pure | normalized");
  b.add("--depth", c.depth, "partial quotients for decimal alphas");
}

void add_product_flow(Binder& b, ExperimentConfig& c) {
  b.add("--gamma1", c.gamma1, "first roof exponent");
  b.add("--gamma2", c.gamma2, "second roof exponent");
  b.add("--alpha1", c.alpha1, "first rotation");
  b.add("--alpha2", c.alpha2, "second rotation");
  b.add("--mode", c.mode, "pure | normalized");
  b.add("--depth", c.depth, "partial quotients for decimal alphas");
}

// ---------------------------------------------------------------- builders

Irrational flow_alpha(const std::string& spec, int depth) {
  if (spec == "golden" || spec == "sqrt2m1") return parse_alpha(spec, kMaxGoldenDepth);
  return parse_alpha(spec, depth);
}

SpecialFlow single_flow(const ExperimentConfig& c, double gamma, const std::string& alpha) {
  return SpecialFlow(RoofParams::make(gamma, parse_roof_mode(c.mode)), flow_alpha(alpha, c.depth));
}

ProductFlow product_flow(const ExperimentConfig& c) {
  return ProductFlow(single_flow(c, c.gamma1, c.alpha1), single_flow(c, c.gamma2, c.alpha2));
}

void require_order(const ExperimentConfig& c) {
  if (!(c.gamma1 < c.gamma2)) throw ConfigError("gamma1", "need gamma1 < gamma2 (|gamma1| > |gamma2|)");
}

std::string bucket_text(int b) { return b == kBucketInfinite ? "inf" : std::to_string(b); }

// ---------------------------------------------------------------- scenarios

void run_cf(Context& ctx) {
  const auto& c = ctx.cfg;
  const Irrational alpha = parse_alpha(c.alpha1, c.depth);
  auto& t = ctx.table("cf", {"k", "a_k", "p_k", "q_k"});
  std::ostream& os = *ctx.text;
  char line[128];
  std::snprintf(line, sizeof line, "%4s %12s %22s %22s\n", "k", "a_k", "p_k", "q_k");
  os << line;
  for (int k = 0; k <= alpha.depth(); ++k) {
    const std::string a = k == 0 ? "" : std::to_string(alpha.a(k));
    t.add_row({str(k), a, str(alpha.p(k)), str(alpha.q(k))});
    std::snprintf(line, sizeof line, "%4d %12s %22llu %22llu\n", k, a.empty() ? "-" : a.c_str(),
                  static_cast<unsigned long long>(alpha.p(k)), static_cast<unsigned long long>(alpha.q(k)));
    os << line;
  }
  const int hi = alpha.depth() - 1;
  if (hi >= 3) {
    const DiophantineReport rep = check_class_d(alpha, c.C, {3, hi});
    os << "class D  C=" << str(c.C) << "  n in [3," << hi << "]  in_class_D=" << str(rep.in_class_d)
       << "  first_violation=" << (rep.first_violation ? std::to_string(*rep.first_violation) : "none")
       << "  smallest_passing_C=" << str(rep.smallest_passing_c) << "\n";
    ctx.manifest.set("in_class_d", str(rep.in_class_d));
    ctx.manifest.set("first_violation", rep.first_violation ? std::to_string(*rep.first_violation) : "none");
    ctx.manifest.set("smallest_passing_c", str(rep.smallest_passing_c));
  }
  ctx.manifest.set("alpha_label", alpha.label());
}

void run_dk(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto [s_lo, s_hi] = parse_index_range("s-range", c.s_range);
  if (s_lo < 0) throw ConfigError("s-range", "indices must be nonnegative");
  const Irrational alpha = flow_alpha(c.alpha1, c.depth);
  if (s_hi + 1 > alpha.depth()) throw ConfigError("s-range", "exceeds stored convergents");
  const RoofParams roof = RoofParams::make(c.gamma1, parse_roof_mode(c.mode));
  const std::vector<RoofParams> roofs{roof};
  auto& t = ctx.table("dk-check", {"sample", "z", "M", "s", "z_min", "sum_f", "lower_f", "upper_f", "pass_f",
                                   "sum_df", "lower_df", "upper_df", "pass_df", "sum_d2f", "lower_d2f",
                                   "upper_d2f", "pass_d2f"});
  std::mt19937_64 rng(c.seed);
  const auto guard_m = static_cast<std::int64_t>(std::min<std::uint64_t>(alpha.q(s_hi), 100'000));
  std::size_t total = 0;
  std::size_t passed = 0;
  for (int k = 0; k < c.samples; ++k) {
    CirclePoint z;
    do {
      z = CirclePoint::from_double(uniform_open(rng));
    } while (orbit_min(alpha, z, guard_m).min_dist < 1e-6);
    const auto reps = dk_check_convergents(roofs, alpha, z, s_lo, s_hi);
    for (const DKReport& r : reps[0]) {
      std::vector<std::string> row{str(k), str(z.to_double()), str(r.m), str(r.s), str(r.zmin.min_dist)};
      for (const auto& b : r.brackets) {
        row.push_back(str(b.value));
        row.push_back(str(b.lower));
        row.push_back(str(b.upper));
        row.push_back(str(b.pass));
      }
      t.add_row(std::move(row));
      ++total;
      if (r.all_pass()) ++passed;
    }
  }
  ctx.manifest.set("cases", str(total));
  ctx.manifest.set("pass_rate", str(total ? static_cast<double>(passed) / total : 0.0));
  *ctx.text << "dk-check: " << passed << "/" << total << " cases pass all three brackets\n";
}

void run_flow_sample(Context& ctx) {
  const auto& c = ctx.cfg;
  const ProductFlow flow = product_flow(c);
  const PartitionSpec spec(c.m);
  const double delta = c.delta > 0.0 ? c.delta : default_delta(flow);
  const ProductPoint x = sample_product(flow, 1, c.seed).front();
  const SymbolTrack track = sample_track(flow, x, c.t, delta, spec);
  auto& t = ctx.table("flow-sample", {"k", "t", "atom1", "atom2", "product_atom"});
  std::ostream& os = *ctx.text;
  char line[128];
  std::snprintf(line, sizeof line, "%8s %14s %10s %10s %20s\n", "k", "t", "atom1", "atom2", "product_atom");
  os << line;
  for (std::size_t k = 0; k < track.size(); ++k) {
    const std::uint64_t s = track.symbols[k];
    const auto a1 = static_cast<std::uint32_t>(s >> 32);
    const auto a2 = static_cast<std::uint32_t>(s);
    const double time = static_cast<double>(k) * delta;
    t.add_row({str(k), str(time), str(a1), str(a2), str(s)});
    std::snprintf(line, sizeof line, "%8zu %14.6f %10u %10u %20llu\n", k, time, a1, a2,
                  static_cast<unsigned long long>(s));
    os << line;
  }
  ctx.manifest.set("delta", str(delta));
  ctx.manifest.set("origin", str(x.first.base()) + " " + str(x.first.x_v) + " " + str(x.second.base()) + " " +
                                 str(x.second.x_v));
}

void run_match(Context& ctx) {
  const auto& c = ctx.cfg;
  const ProductFlow flow = product_flow(c);
  const PartitionSpec spec(c.m);
  const double delta = c.delta > 0.0 ? c.delta : default_delta(flow);
  const auto pts = sample_product(flow, 2, c.seed);
  const ProductPoint x = pts[0];
  const ProductPoint y = c.shift >= 0.0 ? flow.flow(x, c.shift) : pts[1];
  const SymbolTrack u = sample_track(flow, x, c.R, delta, spec);
  const SymbolTrack v = sample_track(flow, y, c.R, delta, spec);
  double eps = c.epsilon;
  double fr = -1.0;
  if (c.solve_fr) {
    fr = estimate_f_R(u, v, c.tol);
    if (fr > 0.0) eps = std::min(fr + 0.5 * c.tol, 1.0 - 1e-9);
  }
  const MatchResult res = best_match(u, v, eps);
  const DistanceTrace trace = trace_distances(flow, x, y, res, c.R, delta, spec);
  auto& s = ctx.table("match-summary", {"epsilon", "matched", "length", "fraction_u", "fraction_v", "slope_lo",
                                        "slope_hi", "band", "f_R"});
  s.add_row({str(res.epsilon), str(res.count()), str(u.size()), str(res.fraction_u), str(res.fraction_v),
             str(res.slope_lo), str(res.slope_hi), str(res.band), c.solve_fr ? str(fr) : ""});
  auto& t = ctx.table("match", {"i", "j", "t", "h", "L_H", "L", "bucket"});
  for (const auto& r : trace.rows)
    t.add_row({str(r.i), str(r.j), str(r.t), str(r.h), str(r.l_h), str(r.l),
               r.bucket == kBucketNone ? "" : bucket_text(r.bucket)});
  auto& b = ctx.table("match-buckets", {"bucket", "mass"});
  for (const auto& [k, m] : trace.bucket_mass) b.add_row({bucket_text(k), str(m)});
  ctx.manifest.set("delta", str(delta));
  *ctx.text << "match: " << res.count() << "/" << u.size() << " samples matched at epsilon " << str(res.epsilon)
            << (c.solve_fr ? ", f_R = " + str(fr) : std::string()) << "\n";
}

void run_bounds(Context& ctx) {
  const auto& c = ctx.cfg;
  require_order(c);
  const std::vector<BoundsReport> fam =
      c.family > 1 ? disjoint_family(c.gamma1, c.gamma2, c.family)
                   : std::vector<BoundsReport>{theorem_bounds(c.gamma1, c.gamma2)};
  auto& t = ctx.table("bounds", {"index", "gamma1", "gamma2", "lower", "upper", "nonstandard"});
  for (std::size_t k = 0; k < fam.size(); ++k) {
    const auto& r = fam[k];
    t.add_row({str(k), str(r.gamma1), str(r.gamma2), str(r.lower), str(r.upper), str(r.nonstandard)});
    *ctx.text << "gamma1=" << str(r.gamma1) << " gamma2=" << str(r.gamma2) << " lower=" << str(r.lower)
              << " upper=" << str(r.upper) << " nonstandard=" << str(r.nonstandard) << "\n";
  }
}

void run_boxes(Context& ctx) {
  const auto& c = ctx.cfg;
  require_order(c);
  const ProductFlow flow = product_flow(c);
  const ExponentBook book = ExponentBook::make(c.gamma1, c.gamma2, c.epsilon1, c.epsilon2);
  const double eb = epsilon_bound(flow);
  const auto centers = sample_product(flow, static_cast<std::size_t>(c.centers), c.seed);
  auto& t = ctx.table("boxes", {"center", "y1_h", "y1_v", "y2_h", "y2_v", "estimate", "standard_error", "bound",
                                "pass"});
  bool all = true;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const auto& y = centers[k];
    const MeasureEstimate m = box_out_measure(flow, book, y, c.epsilon, c.R, static_cast<std::size_t>(c.samples),
                                              c.seed + 1 + k);
    all = all && m.pass;
    t.add_row({str(k), str(y.first.base()), str(y.first.x_v), str(y.second.base()), str(y.second.x_v),
               str(m.estimate), str(m.standard_error), str(m.bound), str(m.pass)});
  }
  ctx.manifest.set("epsilon0", str(book.epsilon0));
  ctx.manifest.set("epsilon2", str(book.epsilon2));
  ctx.manifest.set("epsilon_bound", str(eb));
  ctx.manifest.set("epsilon_within_bound", str(c.epsilon < eb));
  *ctx.text << "boxes: " << (all ? "all centres pass" : "some centre fails") << " the 25 eps^4 R^(-2/(1-eps0)) bound\n";
}

void run_sn(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto [lo, hi] = parse_index_range("n-range", c.n_range);
  const SpecialFlow flow = single_flow(c, c.gamma1, c.alpha1);
  auto& t = ctx.table("sn-measure", {"n", "q_n", "estimate", "standard_error", "bound", "pass"});
  for (int n = lo; n <= hi; ++n) {
    const MeasureEstimate m = sn_measure(flow, n, static_cast<std::size_t>(c.samples), c.seed + n);
    t.add_row({str(n), str(flow.alpha().q(n)), str(m.estimate), str(m.standard_error), str(m.bound), str(m.pass)});
  }
}

// Largest n with q_n >= 2 and q_n log q_n <= T.
int good_set_index(const Irrational& alpha, double T) {
  int best = -1;
  for (int n = 0; n + 1 < alpha.depth(); ++n) {
    const auto q = static_cast<double>(alpha.q(n));
    if (q < 2.0) continue;
    if (q * std::log(q) > T) break;
    best = n;
  }
  if (best < 0) throw ConfigError("T", "too small for any convergent window");
  return best;
}

void run_shear(Context& ctx) {
  const auto& c = ctx.cfg;
  const SpecialFlow flow = single_flow(c, c.gamma1, c.alpha1);
  const int n = good_set_index(flow.alpha(), c.T);
  const double g = flow.roof().abs_gamma();
  std::mt19937_64 rng(c.seed);
  auto& t = ctx.table("shear-check", {"point", "x_h", "x_v", "n", "fraction", "upper_fraction", "slope", "pass"});
  auto& tr = ctx.table("shear-trace", {"point", "t", "N", "abs_df"});
  int passing = 0;
  for (int k = 0; k < c.points; ++k) {
    FlowPoint x;
    do {
      x = sample_suspension_point(flow, rng);
    } while (!s_n_membership(flow, x, n));
    const ShearReport rep = shear_window_check(flow, x, c.T, c.epsilon1, c.times);
    const bool ok = rep.fraction >= 0.95 && std::fabs(rep.slope - (1.0 + g)) <= 0.2;
    if (ok) ++passing;
    t.add_row({str(k), str(x.base()), str(x.x_v), str(n), str(rep.fraction), str(rep.upper_fraction),
               str(rep.slope), str(ok)});
    for (std::size_t i = 0; i < rep.times.size(); ++i)
      tr.add_row({str(k), str(rep.times[i]), str(rep.hits[i]), str(rep.derivative[i])});
  }
  ctx.manifest.set("good_set_n", str(n));
  *ctx.text << "shear-check: " << passing << "/" << c.points << " points pass\n";
}

void run_kr(Context& ctx) {
  const auto& c = ctx.cfg;
  require_order(c);
  const std::vector<double> grid = parse_number_list("R-grid", c.r_grid);
  const ProductFlow prod = product_flow(c);
  const SpecialFlow single = single_flow(c, c.single_gamma, c.alpha1);
  MatchSettings settings;
  settings.spec = PartitionSpec(c.m);
  settings.delta = c.delta;
  settings.tol = c.tol;
  auto& t = ctx.table("kr-scan", {"flow", "R", "sample", "lower", "upper", "residual"});
  auto emit = [&](const std::string& name, const KrScan& scan) {
    for (const auto& r : scan.rows)
      t.add_row({name, str(r.R), str(r.estimate.sample_size), str(r.estimate.lower), str(r.estimate.upper),
                 str(r.residual)});
    ctx.manifest.set("slope_" + name, str(scan.slope));
  };
  const KrScan ps = kr_scan(prod, grid, c.epsilon, static_cast<std::size_t>(c.sample), settings, c.seed);
  emit("product", ps);
  const KrScan ss = kr_scan(single, grid, c.epsilon, static_cast<std::size_t>(c.sample), settings, c.seed);
  emit("single", ss);
  ctx.manifest.set("slope_gap", str(ps.slope - ss.slope));
  ctx.manifest.set("diagnostic", "true");
  ctx.manifest.set("label", ps.label);
  ctx.manifest.set("caveat", "sample-restricted surrogate; balls centred at sample points only");
  *ctx.text << "kr-scan (finite-scale diagnostic): product slope " << str(ps.slope) << ", single slope "
            << str(ss.slope) << "\n";
}

// ---------------------------------------------------------------- report

struct Column {
  const CsvTable* t;
  std::size_t idx;
};

std::size_t column(const CsvTable& t, const std::string& name) {
  const auto& h = t.header();
  for (std::size_t k = 0; k < h.size(); ++k)
    if (h[k] == name) return k;
  throw std::runtime_error("report: column " + name + " missing");
}

double num(const std::string& s) { return std::stod(s); }

struct Verdict {
  std::string status;
  std::string detail;
};

Verdict verdict_cf(const CsvTable& t) {
  const auto a = column(t, "a_k");
  const auto q = column(t, "q_k");
  const auto& rows = t.rows();
  for (std::size_t k = 2; k < rows.size(); ++k) {
    const unsigned long long want = std::stoull(rows[k][a]) * std::stoull(rows[k - 1][q]) + std::stoull(rows[k - 2][q]);
    if (std::stoull(rows[k][q]) != want) return {"fail", "recurrence broken at k=" + std::to_string(k)};
  }
  return {"pass", std::to_string(rows.size()) + " denominators satisfy the recurrence"};
}

Verdict verdict_all_true(const CsvTable& t, const std::vector<std::string>& cols) {
  std::size_t bad = 0;
  std::vector<std::size_t> idx;
  for (const auto& c : cols) idx.push_back(column(t, c));
  for (const auto& r : t.rows())
    for (auto i : idx)
      if (r[i] != "true") {
        ++bad;
        break;
      }
  return {bad == 0 ? "pass" : "fail", std::to_string(t.rows().size() - bad) + "/" + std::to_string(t.rows().size()) + " rows pass"};
}

Verdict verdict_match(const CsvTable& t) {
  const auto i = column(t, "i");
  const auto j = column(t, "j");
  for (std::size_t k = 1; k < t.rows().size(); ++k)
    if (!(std::stoll(t.rows()[k][i]) > std::stoll(t.rows()[k - 1][i]) &&
          std::stoll(t.rows()[k][j]) > std::stoll(t.rows()[k - 1][j])))
      return {"fail", "matched pairs not strictly increasing"};
  return {"pass", std::to_string(t.rows().size()) + " monotone matched pairs"};
}

Verdict verdict_bounds(const CsvTable& t) {
  const auto lo = column(t, "lower");
  const auto hi = column(t, "upper");
  const auto ns = column(t, "nonstandard");
  const auto& rows = t.rows();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k][ns] != "true") return {"fail", "pair " + std::to_string(k) + " is not nonstandard"};
    if (k > 0 && !(num(rows[k][hi]) < num(rows[k - 1][lo])))
      return {"fail", "interval " + std::to_string(k) + " overlaps its predecessor"};
  }
  return {"pass", std::to_string(rows.size()) + " disjoint left-moving intervals"};
}

Verdict verdict_kr(const CsvTable& t) {
  const auto fl = column(t, "flow");
  const auto rr = column(t, "R");
  const auto lo = column(t, "lower");
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  for (const auto& r : t.rows()) {
    series[r[fl]].first.push_back(std::log(num(r[rr])));
    series[r[fl]].second.push_back(std::log(num(r[lo])));
  }
  if (!series.count("product") || !series.count("single")) return {"fail", "needs product and single series"};
  const double sp = least_squares(series["product"].first, series["product"].second).first;
  const double ss = least_squares(series["single"].first, series["single"].second).first;
  return {sp - ss >= 0.2 ? "pass" : "fail",
          "diagnostic: product slope " + str(sp) + ", single slope " + str(ss)};
}

Verdict verdict_shear(const CsvTable& t) { return verdict_all_true(t, {"pass"}); }

void run_report(Context& ctx) {
  const fs::path dir(ctx.cfg.out);
  struct Item {
    int criterion;
    std::string file;
    std::function<Verdict(const CsvTable&)> check;
  };
  const std::vector<Item> items{
      {1, "cf.csv", verdict_cf},
      {2, "dk-check.csv", [](const CsvTable& t) { return verdict_all_true(t, {"pass_f", "pass_df", "pass_d2f"}); }},
      {3, "match.csv", verdict_match},
      {5, "boxes.csv", [](const CsvTable& t) { return verdict_all_true(t, {"pass"}); }},
      {6, "sn-measure.csv", [](const CsvTable& t) { return verdict_all_true(t, {"pass"}); }},
      {7, "shear-check.csv", verdict_shear},
      {8, "bounds.csv", verdict_bounds},
      {9, "kr-scan.csv", verdict_kr},
  };
  auto& out = ctx.table("report", {"criterion", "source", "status", "detail"});
  for (const auto& it : items) {
    const fs::path p = dir / it.file;
    Verdict v{"missing", "no " + it.file + " in " + dir.string()};
    if (fs::exists(p)) {
      try {
        v = it.check(read_csv(p));
      } catch (const std::exception& e) {
        v = {"fail", e.what()};
      }
    }
    if (v.status == "fail") ctx.failed = true;
    out.add_row({str(it.criterion), it.file, v.status, v.detail});
    *ctx.text << "criterion " << it.criterion << " [" << it.file << "]: " << v.status << "  " << v.detail << "\n";
  }
}

// ---------------------------------------------------------------- dispatch

std::string find_config_path(const std::vector<std::string>& args) {
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) return args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) return args[k].substr(9);
  }
  return {};
}

struct Scenario {
  const char* name;
  const char* help;
  void (*run)(Context&);
  void (*bind)(Binder&, ExperimentConfig&);
  void (*defaults)(ExperimentConfig&);
};

const Scenario kScenarios[] = {
    {"cf", "continued fraction, convergents and class-D report", run_cf,
     [](Binder& b, ExperimentConfig& c) {
       b.add("--alpha", c.alpha1, "golden | sqrt2m1 | decimal");
       b.add("--depth", c.depth, "partial quotients");
       b.add("--C", c.C, "class-D constant");
     },
     [](ExperimentConfig& c) { c.depth = 30; }},
    {"dk-check", "Denjoy-Koksma brackets at M = q_s", run_dk,
     [](Binder& b, ExperimentConfig& c) {
       add_single_flow(b, c);
       b.add("--samples", c.samples, "random base points");
       b.add("--s-range", c.s_range, "lo:hi convergent indices");
     },
     [](ExperimentConfig& c) {
       c.gamma1 = -0.5;
       c.samples = 200;
     }},
    {"flow-sample", "atom-id track of a product orbit", run_flow_sample,
     [](Binder& b, ExperimentConfig& c) {
       add_product_flow(b, c);
       b.add("--t", c.t, "horizon");
       b.add("--m", c.m, "partition index");
       b.add("--delta", c.delta, "sampling step (0 = default)");
     },
     [](ExperimentConfig&) {}},
    {"match", "best matching of two product orbits", run_match,
     [](Binder& b, ExperimentConfig& c) {
       add_product_flow(b, c);
       b.add("--R", c.R, "horizon");
       b.add("--delta", c.delta, "sampling step (0 = default)");
       b.add("--m", c.m, "partition index");
       b.add("--epsilon", c.epsilon, "slope tolerance");
       b.flag("--solve-fr", c.solve_fr, "bisect for f_R first");
       b.add("--tol", c.tol, "bisection tolerance");
       b.add("--shift", c.shift, "y = phi_shift(x) when >= 0, else an independent sample");
     },
     [](ExperimentConfig&) {}},
    {"bounds", "closed-form bounds and disjoint families", run_bounds,
     [](Binder& b, ExperimentConfig& c) {
       b.add("--gamma1", c.gamma1, "first exponent");
       b.add("--gamma2", c.gamma2, "second exponent");
       b.add("--family", c.family, "number of disjoint pairs");
     },
     [](ExperimentConfig&) {}},
    {"boxes", "Monte-Carlo measure of swept Box^out", run_boxes,
     [](Binder& b, ExperimentConfig& c) {
       add_product_flow(b, c);
       b.add("--epsilon", c.epsilon, "box scale");
       b.add("--R", c.R, "horizon");
       b.add("--samples", c.samples, "Monte-Carlo samples per centre");
       b.add("--centers", c.centers, "number of box centres");
       b.add("--epsilon1", c.epsilon1, "epsilon1");
       b.add("--epsilon2", c.epsilon2, "epsilon2 (0 = default)");
     },
     [](ExperimentConfig& c) {
       c.mode = "normalized";
       c.R = 1000.0;
       c.samples = 100000;
     }},
    {"sn-measure", "Monte-Carlo measure of the good sets S_n", run_sn,
     [](Binder& b, ExperimentConfig& c) {
       add_single_flow(b, c);
       b.add("--n-range", c.n_range, "lo:hi");
       b.add("--samples", c.samples, "Monte-Carlo samples");
     },
     [](ExperimentConfig& c) {
       c.gamma1 = -0.5;
       c.samples = 10000;
     }},
    {"shear-check", "derivative windows of Birkhoff sums along the flow", run_shear,
     [](Binder& b, ExperimentConfig& c) {
       add_single_flow(b, c);
       b.add("--T", c.T, "time horizon");
       b.add("--epsilon1", c.epsilon1, "window half-width in the exponent");
       b.add("--points", c.points, "good-set points");
       b.add("--times", c.times, "log-uniform times per point");
     },
     [](ExperimentConfig& c) {
       c.mode = "normalized";
       c.epsilon1 = 0.15;
     }},
    {"kr-scan", "separated-set counts across horizons (finite-scale diagnostic)", run_kr,
     [](Binder& b, ExperimentConfig& c) {
       add_product_flow(b, c);
       b.add("--single-gamma", c.single_gamma, "exponent of the single comparison flow");
       b.add("--epsilon", c.epsilon, "separation radius");
       b.add("--m", c.m, "partition index");
       b.add("--R-grid", c.r_grid, "comma-separated horizons");
       b.add("--sample", c.sample, "sample size");
       b.add("--delta", c.delta, "sampling step (0 = default)");
       b.add("--tol", c.tol, "f_R tolerance");
     },
     [](ExperimentConfig& c) {
       c.epsilon = 0.2;
       c.m = 6;
     }},
    {"report", "pass/fail summary of prior outputs", run_report, [](Binder&, ExperimentConfig&) {},
     [](ExperimentConfig&) {}},
};

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  std::map<std::string, std::string> file;
  try {
    const std::string path = find_config_path(args);
    if (!path.empty()) file = read_key_values(path);
  } catch (const ConfigError& e) {
    std::cerr << "kakulab: invalid config: " << e.what() << "\n";
    return kValidation;
  }

  CLI::App app{"kakulab: special flows over rotations, matchings and Kakutani boxes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", KAKULAB_VERSION);
  std::string config_path;
  std::set<std::string> used;
  std::list<Context> contexts;
  std::vector<std::pair<CLI::App*, Context*>> subs;
  try {
    for (const Scenario& s : kScenarios) {
      CLI::App* sub = app.add_subcommand(s.name, s.help);
      contexts.emplace_back();
      Context& ctx = contexts.back();
      ctx.scenario = s.name;
      s.defaults(ctx.cfg);
      sub->add_option("--config", config_path, "key=value file; flags win on conflict");
      Binder b(sub, &ctx, &file, &used);
      s.bind(b, ctx.cfg);
      add_common(b, ctx.cfg);
      subs.emplace_back(sub, &ctx);
    }
  } catch (const ConfigError& e) {
    std::cerr << "kakulab: invalid config: " << e.what() << "\n";
    return kValidation;
  }
  for (const auto& [k, v] : file)
    if (!used.count(k)) {
      std::cerr << "kakulab: invalid config: " << k << ": unknown key\n";
      return kValidation;
    }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  for (const auto& [sub, ctx] : subs) {
    if (!sub->parsed()) continue;
    const Scenario* sc = nullptr;
    for (const Scenario& s : kScenarios)
      if (ctx->scenario == s.name) sc = &s;
    try {
      ctx->cfg.validate();
      sc->run(*ctx);
      write_outputs(*ctx, false);
      return ctx->failed ? kAcceptanceFailure : kOk;
    } catch (const ConfigError& e) {
      std::cerr << "kakulab: invalid config: " << e.what() << "\n";
      return kValidation;
    } catch (const CapacityError& e) {
      std::cerr << "kakulab: capacity exceeded: " << e.what() << "\n";
      write_outputs(*ctx, true);
      return kCapacity;
    } catch (const SingularityError& e) {
      std::cerr << "kakulab: singular orbit: " << e.what() << "\n";
      write_outputs(*ctx, true);
      return kCapacity;
    } catch (const PrecisionError& e) {
      std::cerr << "kakulab: invalid config: alpha: " << e.what() << "\n";
      return kValidation;
    } catch (const std::invalid_argument& e) {
      std::cerr << "kakulab: invalid config: " << e.what() << "\n";
      return kValidation;
    } catch (const std::domain_error& e) {
      std::cerr << "kakulab: invalid config: " << e.what() << "\n";
      return kValidation;
    }
  }
  return kValidation;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args);
}

}  // namespace kakulab::harness
