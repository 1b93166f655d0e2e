#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conecert/cones.hpp"
#include "conecert/density.hpp"
#include "conecert/errors.hpp"
#include "conecert/lawlor.hpp"
#include "conecert/report.hpp"
#include "conecert/slicing.hpp"
#include "conecert/variation.hpp"

namespace conecert::cli {

enum ExitCode : int { kOk = 0, kNotCertified = 1, kInconclusive = 2, kUsage = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string s) {
  auto blank = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), blank));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), blank).base(), s.end());
  return s;
}

inline bool is_flag_key(const std::string& key) {
  return key == "timing" || key == "search-counterexample";
}

inline bool truthy(std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  return v == "true" || v == "1" || v == "yes" || v == "on";
}

}  // namespace detail

// Appends `--key value` for every key=value line of the --config file whose
// key is not already given on the command line.
inline std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw UsageError("cannot read config file '" + *path + "'");
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (key.empty() || key == "config") continue;
    if (given(key)) continue;
    if (detail::is_flag_key(key)) {
      if (detail::truthy(value)) extra.push_back("--" + key);
    } else {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

namespace detail {

struct Context {
  bool timing = false;
};

template <class Fn>
auto timed(const Context& ctx, double& ms, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto result = fn();
  const auto stop = std::chrono::steady_clock::now();
  ms = ctx.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  return result;
}

inline double finite_or(std::optional<double> v, double fallback = 0.0) {
  return v && !std::isnan(*v) ? *v : fallback;
}

inline CheckRecord assumption_record(const std::string& name, const AssumptionVerdict& v, double ms) {
  CheckRecord rec;
  rec.name = name;
  rec.verdict = to_string(v.holds);
  rec.margin = finite_or(v.value);
  if (v.value) rec.evidence.set("value", *v.value);
  rec.evidence.set("exact", v.exact ? 1.0 : 0.0);
  if (!v.note.empty()) rec.evidence.note(v.note);
  rec.witness = v.witness;
  rec.wall_time_ms = ms;
  return rec;
}

inline CheckRecord stability_record(const std::string& name, const StabilityVerdict& v, double ms) {
  CheckRecord rec;
  rec.name = name;
  rec.verdict = to_string(v.status);
  rec.margin = v.margin;
  rec.theorem_tag = v.theorem;
  rec.evidence = v.evidence;
  if (!v.reason.empty()) rec.evidence.note(v.reason);
  rec.wall_time_ms = ms;
  return rec;
}

// Catalog identities used to route a cone to a second certification path.
inline std::optional<ConeSpec> product_alias(const ConeSpec& spec) {
  if (auto* d = std::get_if<Determinantal>(&spec); d && d->p == 2 && d->q == 2 && d->r == 1)
    return ProductOfSpheres{{1, 1}};
  if (auto* p = std::get_if<Pfaffian>(&spec); p && p->m == 4 && p->rank == 2)
    return ProductOfSpheres{{2, 2}};
  return std::nullopt;
}

inline std::optional<ConeSpec> slicing_alias(const ConeSpec& spec) {
  if (auto* s = std::get_if<ProductOfSpheres>(&spec)) {
    if (s->factors == std::vector<int>{1, 1}) return Determinantal{2, 2, 1};
    if (s->factors == std::vector<int>{2, 2}) return Pfaffian{4, 2};
  }
  return std::nullopt;
}

inline void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
}

inline std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  return buf;
}

inline int worst_exit(std::initializer_list<Holds> verdicts) {
  int code = kOk;
  for (Holds h : verdicts) {
    if (h == Holds::No) return kNotCertified;
    if (h == Holds::Inconclusive) code = kInconclusive;
  }
  return code;
}

// ---------------------------------------------------------------- pipelines

struct AssumptionsArgs {
  std::string density;
  std::string cone;
  int k = 0;
  int n = 0;
  double r = 1.0;
};

inline int run_assumptions(const AssumptionsArgs& a, const Context& ctx, CertificationReport& rep) {
  const RadialDensity d = parse_density(a.density);
  rep.density = d.spec();
  int k = a.k;
  int n = a.n;
  if (!a.cone.empty()) {
    const auto model = build_cone(parse_cone(a.cone));
    rep.cone = to_string(model.spec);
    k = model.dim_cone;
    if (n == 0) n = model.dim_ambient;
  }
  if (k < 1) throw UsageError("assumptions: give --k >= 1 or --cone");
  if (n == 0) n = k + 1;
  double ms = 0.0;
  const auto ap = timed(ctx, ms, [&] { return check_a_priori(d, k); });
  rep.add_check(assumption_record("a_priori", ap, ms));
  const auto a1 = timed(ctx, ms, [&] { return check_A1(d, k); });
  rep.add_check(assumption_record("A1", a1, ms));
  const auto a2 = timed(ctx, ms, [&] { return check_A2(d, k); });
  rep.add_check(assumption_record("A2", a2, ms)).tolerances["bound_2_minus_k"] = 2.0 - k;
  const auto a3 = timed(ctx, ms, [&] { return check_A3(d, n); });
  rep.add_check(assumption_record("A3", a3, ms));
  const auto a4 = timed(ctx, ms, [&] { return check_A4(d, k, a.r); });
  rep.add_check(assumption_record("A4", a4, ms)).evidence.set("r", a.r);
  const auto m1 = timed(ctx, ms, [&] { return check_g_nondecreasing(d); });
  rep.add_check(assumption_record(checks::kGNondecreasing, m1, ms));
  const auto m2 = timed(ctx, ms, [&] { return check_g_over_t_nondecreasing(d); });
  rep.add_check(assumption_record(checks::kGOverTNondecreasing, m2, ms));
  for (const auto& [name, v] : {std::pair{"a_priori", ap}, std::pair{"A1", a1}, std::pair{"A2", a2},
                                std::pair{"A3", a3}, std::pair{"A4", a4}}) {
    if (v.holds != Holds::Yes) rep.overall.reasons.push_back(std::string(name) + ": " + to_string(v.holds));
  }
  if (rep.overall.reasons.empty()) rep.overall.reasons.push_back("all assumptions hold");
  return worst_exit({ap.holds, a1.holds, a2.holds, a3.holds, a4.holds});
}

struct CertifyArgs {
  std::string cone;
  std::string density;
  std::string sphere;  // "k,n,R" for the sphere instability certificate
};

inline int run_sphere_instability(const std::string& text, const Context& ctx,
                                  CertificationReport& rep) {
  int k = 0, n = 0;
  double R = 0.0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d,%d,%lf%c", &k, &n, &R, &tail) != 3)
    throw UsageError("--sphere expects k,n,R");
  double ms = 0.0;
  const auto v = timed(ctx, ms, [&] { return instability_certificate_sphere(k, n, R); });
  rep.density = RadialDensity(PowerLaw{double(-k)}).spec();
  rep.add_check(stability_record("sphere_instability", v, ms));
  rep.overall.reasons.push_back("round sphere certified unstable for the density |x|^-k");
  return kNotCertified;
}

inline int run_certify_stability(const CertifyArgs& a, const Context& ctx, CertificationReport& rep) {
  if (!a.sphere.empty()) return run_sphere_instability(a.sphere, ctx, rep);
  if (a.cone.empty() || a.density.empty())
    throw UsageError("certify stability needs --cone and --density (or --sphere)");
  const RadialDensity d = parse_density(a.density);
  ConeSpec spec = parse_cone(a.cone);
  rep.cone = to_string(spec);
  rep.density = d.spec();
  if (auto alias = product_alias(spec)) {
    rep.overall.reasons.push_back(to_string(spec) + " is the cone over " + to_string(*alias));
    spec = *alias;
  }
  const ConeModel model = build_cone(spec);
  if (!model.has_link_geometry()) {
    rep.overall.reasons.push_back("stability certification needs link curvature data");
    return kNotCertified;
  }
  const int k = model.dim_cone;
  double ms = 0.0;
  const auto a1 = timed(ctx, ms, [&] { return check_A1(d, k); });
  rep.add_check(assumption_record("A1", a1, ms));
  const auto a2 = timed(ctx, ms, [&] { return check_A2(d, k); });
  rep.add_check(assumption_record("A2", a2, ms));
  const auto flat = timed(ctx, ms, [&] { return certify_flat_normal_stability(model, d); });
  rep.add_check(stability_record("flat_normal_stability", flat, ms)).tolerances["threshold"] = 1e-12;
  if (flat.status == StabilityStatus::CertifiedStable) {
    rep.overall.certified_stable = true;
    rep.overall.reasons.push_back("certified by " + flat.theorem);
    return kOk;
  }
  rep.overall.reasons.push_back(flat.reason);
  // Hypercones: area-stability (constant density) chained with the transfer.
  const bool hypercone = model.dim_ambient == model.dim_cone + 1;
  if (hypercone && k >= 2 && model.dim_ambient >= 3) {
    const auto area = timed(ctx, ms, [&] { return certify_flat_normal_stability(model, RadialDensity{}); });
    rep.add_check(stability_record("area_stability", area, ms));
    const auto transfer =
        timed(ctx, ms, [&] { return certify_hypercone_transfer(d, model.dim_ambient); });
    rep.add_check(stability_record("hypercone_transfer", transfer, ms));
    if (area.status == StabilityStatus::CertifiedStable &&
        transfer.status == StabilityStatus::CertifiedStable) {
      rep.overall.certified_stable = true;
      rep.overall.reasons.push_back("area-stable hypercone with weighted transfer");
      return kOk;
    }
    if (area.status != StabilityStatus::CertifiedStable)
      rep.overall.reasons.push_back("area-stability of the hypercone not certified");
    if (transfer.status != StabilityStatus::CertifiedStable)
      rep.overall.reasons.push_back("transfer not certified: " + transfer.reason);
  }
  if (a1.holds == Holds::Inconclusive || a2.holds == Holds::Inconclusive) return kInconclusive;
  return kNotCertified;
}

inline CheckRecord slicing_record(const ConeSpec& spec, const RadialDensity& d,
                                  const AssumptionVerdict& g_mono,
                                  const AssumptionVerdict& g_over_t_mono, const Context& ctx) {
  CheckRecord rec;
  rec.name = checks::kSlicingCertificate;
  rec.verdict = to_string(MinimizingStatus::NotCertified);
  const auto cls = classify_slicing(spec);
  rec.evidence.note("variety " + to_string(spec) + ", slicing case " + to_string(cls.kind));
  const auto start = std::chrono::steady_clock::now();
  switch (cls.kind) {
    case SlicingCase::Monotone:
    case SlicingCase::MonotoneOdd:
      rec.theorem_tag = tags::kSlicingMonotone;
      if (g_mono.holds == Holds::Yes) {
        rec.verdict = to_string(MinimizingStatus::CertifiedMinimizing);
      } else {
        rec.evidence.note("needs g non-decreasing");
      }
      break;
    case SlicingCase::SmallCase: {
      rec.theorem_tag = tags::kSlicingSmallCases;
      const auto grid = preset_slice_grid(cls.n);
      const auto scan = *cls.inequality == ReducedInequality::Comf3
                            ? check_comf3_grid(d, cls.n, grid)
                            : check_comf4_grid(d, cls.n, grid);
      rec.evidence.set("reduced_min_margin", scan.min_margin);
      rec.evidence.note(std::string("reduced inequality scan: ") + to_string(scan.verdict));
      rec.margin = scan.min_margin;
      if (g_over_t_mono.holds == Holds::Yes) {
        rec.verdict = to_string(MinimizingStatus::CertifiedMinimizing);
      } else {
        rec.evidence.note("needs g(r)/r non-decreasing");
        if (g_over_t_mono.witness) rec.witness = g_over_t_mono.witness;
      }
      break;
    }
    case SlicingCase::Unresolved: {
      rec.theorem_tag = tags::kSlicingImpossibility;
      const auto search = counterexample_search(d, cls.n);
      rec.evidence.note("weighting compensation cannot certify this variety; minimization is open");
      if (search.witness) {
        rec.witness = search.witness->c;
        rec.witness->push_back(search.witness->t);
        rec.evidence.set("counterexample_margin", search.witness->margin);
        rec.margin = search.witness->margin;
      }
      break;
    }
    case SlicingCase::Outside:
      rec.evidence.note("no slicing weights for this variety");
      break;
  }
  const auto stop = std::chrono::steady_clock::now();
  rec.wall_time_ms = ctx.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  rec.tolerances["violation"] = kViolationTol;
  return rec;
}

inline int run_certify_minimizing(const CertifyArgs& a, const Context& ctx, CertificationReport& rep) {
  if (a.cone.empty() || a.density.empty())
    throw UsageError("certify minimizing needs --cone and --density");
  const RadialDensity d = parse_density(a.density);
  const ConeSpec spec = parse_cone(a.cone);
  rep.cone = to_string(spec);
  rep.density = d.spec();
  const ConeModel model = build_cone(spec);
  double ms = 0.0;
  const auto ap = timed(ctx, ms, [&] { return check_a_priori(d, model.dim_cone); });
  rep.add_check(assumption_record("a_priori", ap, ms));
  const auto g_mono = timed(ctx, ms, [&] { return check_g_nondecreasing(d); });
  rep.add_check(assumption_record(checks::kGNondecreasing, g_mono, ms));
  const auto g_t_mono = timed(ctx, ms, [&] { return check_g_over_t_nondecreasing(d); });
  rep.add_check(assumption_record(checks::kGOverTNondecreasing, g_t_mono, ms));

  std::optional<ConeSpec> slicing_spec;
  if (model.has_link_geometry()) {
    const auto crit = timed(ctx, ms, [&] { return check_curvature_criterion(model); });
    CheckRecord rec;
    rec.name = checks::kCurvatureCriterion;
    rec.verdict = to_string(crit.status);
    rec.margin = crit.margin;
    rec.theorem_tag = crit.theorem;
    rec.evidence = crit.evidence;
    if (!crit.reason.empty()) rec.evidence.note(crit.reason);
    rec.tolerances["criterion"] = 1e-10;
    rec.wall_time_ms = ms;
    rep.add_check(std::move(rec));
    if (crit.status != MinimizingStatus::CertifiedMinimizing) {
      rep.overall.reasons.push_back("curvature criterion: " + crit.reason);
      slicing_spec = slicing_alias(spec);
    }
  } else {
    slicing_spec = spec;
  }
  if (slicing_spec) {
    if (*slicing_spec != spec)
      rep.overall.reasons.push_back(to_string(spec) + " is the variety " + to_string(*slicing_spec));
    rep.add_check(slicing_record(*slicing_spec, d, g_mono, g_t_mono, ctx));
  }
  rep.overall.certified_minimizing = minimizing_gate_satisfied(rep);
  if (rep.overall.certified_minimizing) {
    rep.overall.reasons.push_back("f-minimizing certificate with verified density monotonicity");
    return kOk;
  }
  // Monotonicity precondition could not be decided.
  for (const auto& c : rep.checks()) {
    if (c.verdict != "certified_minimizing") continue;
    const bool small = c.theorem_tag == tags::kSlicingSmallCases;
    const auto& pre = small ? g_t_mono : g_mono;
    rep.overall.reasons.push_back(std::string("density precondition ") +
                                  (small ? checks::kGOverTNondecreasing : checks::kGNondecreasing) +
                                  ": " + to_string(pre.holds));
    if (pre.holds == Holds::Inconclusive) return kInconclusive;
  }
  return kNotCertified;
}

struct VanishingArgs {
  std::string cone;
  std::string trace;
  double r_blowup = 1e8;
  double tol = 1e-10;
};

inline int run_vanishing_angle(const VanishingArgs& a, const Context& ctx, CertificationReport& rep) {
  const ConeModel model = build_cone(parse_cone(a.cone), /*require_curvature=*/true);
  rep.cone = to_string(model.spec);
  VanishingAngleOptions opts;
  opts.r_blowup = a.r_blowup;
  opts.tol = a.tol;
  double ms = 0.0;
  const auto res = timed(ctx, ms, [&] { return integrate_vanishing_angle(model, opts); });
  CheckRecord rec;
  rec.name = "vanishing_angle";
  rec.verdict = to_string(res.outcome);
  rec.evidence.set("theta", res.theta)
      .set("radicand_min", res.radicand_min)
      .set("accepted_steps", static_cast<double>(res.accepted_steps))
      .set("normal_radius", *model.normal_radius)
      .set("k", model.dim_cone);
  if (!res.note.empty()) rec.evidence.note(res.note);
  rec.tolerances["tol"] = opts.tol;
  rec.tolerances["r_blowup"] = opts.r_blowup;
  rec.wall_time_ms = ms;
  if (res.outcome == VanishingOutcome::BlowUp) {
    rec.margin = *model.normal_radius - 2.0 * res.theta;
    rec.evidence.set("jacobian_bound", verify_jacobian_bound(res, model) ? 1.0 : 0.0);
  }
  rep.add_check(std::move(rec));
  if (!a.trace.empty()) {
    std::ostringstream csv;
    csv << "theta,r,radicand\n";
    for (const auto& p : res.trace) csv << fmt(p.theta) << "," << fmt(p.r) << "," << fmt(p.radicand) << "\n";
    std::ofstream f(a.trace, std::ios::binary);
    if (!f) throw UsageError("cannot write trace '" + a.trace + "'");
    f << csv.str();
  }
  switch (res.outcome) {
    case VanishingOutcome::BlowUp:
      rep.overall.reasons.push_back("vanishing angle found");
      return kOk;
    case VanishingOutcome::Stalled:
      rep.overall.reasons.push_back("ODE stalled: " + res.note);
      return kNotCertified;
    case VanishingOutcome::BudgetExceeded:
      rep.overall.reasons.push_back("step budget exceeded");
      return kInconclusive;
  }
  return kInconclusive;
}

struct SlicingArgs {
  std::string variety;
  std::string density;
  std::string grid = "preset";
  bool search = false;
};

inline int run_slicing_check(const SlicingArgs& a, const Context& ctx, CertificationReport& rep) {
  const ConeSpec spec = parse_cone(a.variety);
  if (!std::holds_alternative<Determinantal>(spec) && !std::holds_alternative<Pfaffian>(spec))
    throw UsageError("--variety must be det:p,q,r or pf:m,2r");
  const RadialDensity d = parse_density(a.density);
  rep.cone = to_string(spec);
  rep.density = d.spec();
  const auto cls = classify_slicing(spec);
  CheckRecord rec;
  rec.tolerances["violation"] = kViolationTol;
  rec.evidence.note(std::string("slicing case ") + to_string(cls.kind));
  const auto start = std::chrono::steady_clock::now();
  auto stamp = [&] {
    const auto stop = std::chrono::steady_clock::now();
    rec.wall_time_ms = ctx.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
  };
  if (a.search) {
    if (!cls.inequality) throw UsageError("counterexample search applies to hypersurface-type varieties");
    if (cls.n < 3) throw UsageError("counterexample search needs n = r + 1 >= 3");
    const auto res = counterexample_search(d, cls.n);
    rec.name = "counterexample_search";
    rec.theorem_tag = tags::kSlicingImpossibility;
    rec.evidence.set("n", cls.n).set("evaluations", static_cast<double>(res.evaluations));
    rec.evidence.note(res.schedule);
    stamp();
    if (res.witness) {
      // Re-evaluate the witness from scratch.
      const auto again = comf4_sides(d, cls.n, res.witness->c, res.witness->t);
      rec.verdict = "witness_found";
      rec.margin = again.margin();
      rec.witness = res.witness->c;
      rec.witness->push_back(res.witness->t);
      rec.evidence.set("lhs", again.lhs).set("rhs", again.rhs).set("t", res.witness->t);
      rep.add_check(std::move(rec));
      rep.overall.reasons.push_back("weighting compensation is impossible for this variety");
      return kOk;
    }
    rec.verdict = "no_witness";
    rep.add_check(std::move(rec));
    rep.overall.reasons.push_back("search budget exhausted without a witness");
    return kNotCertified;
  }
  if (!cls.inequality) {
    const auto mono = check_g_nondecreasing(d);
    rec.name = checks::kGNondecreasing;
    rec.verdict = to_string(mono.holds);
    rec.theorem_tag = tags::kSlicingMonotone;
    rec.witness = mono.witness;
    stamp();
    rep.add_check(std::move(rec));
    rep.overall.reasons.push_back("composite weights are monotone; only g non-decreasing is needed");
    return worst_exit({mono.holds});
  }
  const auto grid = parse_slice_grid(a.grid, cls.n);
  const bool c3 = *cls.inequality == ReducedInequality::Comf3;
  const auto scan = c3 ? check_comf3_grid(d, cls.n, grid) : check_comf4_grid(d, cls.n, grid);
  rec.name = c3 ? "comf3_scan" : "comf4_scan";
  rec.verdict = to_string(scan.verdict);
  rec.margin = scan.min_margin;
  rec.theorem_tag = cls.kind == SlicingCase::SmallCase ? tags::kSlicingSmallCases : "";
  rec.evidence.set("n", cls.n)
      .set("points", static_cast<double>(scan.points))
      .set("max_abs_margin_t0", scan.max_abs_margin_t0);
  rec.evidence.note("grid " + scan.grid);
  if (scan.witness) {
    rec.witness = scan.witness->c;
    rec.witness->push_back(scan.witness->t);
    rec.evidence.set("lhs", scan.witness->lhs).set("rhs", scan.witness->rhs);
  }
  stamp();
  rep.add_check(std::move(rec));
  if (scan.verdict == ScanVerdict::ViolatedAt) {
    rep.overall.reasons.push_back("reduced inequality violated on the grid");
    return kNotCertified;
  }
  rep.overall.reasons.push_back("reduced inequality holds on the grid");
  return kOk;
}

struct SpectrumArgs {
  std::string cone;
  int k = 0;
  double a_sq = -1.0;
  double alpha_min = -1.0;
  double alpha_max = 1.0;
  int steps = 21;
  double mu = 0.0;
  double s_min = -20.0;
  double s_max = 20.0;
  int mesh = 4000;
};

inline std::string run_spectrum(const SpectrumArgs& a) {
  SpectralProblem p;
  p.k = a.k;
  p.A_sq = a.a_sq;
  if (!a.cone.empty()) {
    const auto model = build_cone(parse_cone(a.cone), /*require_curvature=*/true);
    p.k = model.dim_cone;
    if (a.a_sq < 0.0) p.A_sq = *model.link_A_sq;
  }
  if (p.k < 2) throw UsageError("spectrum: give --k >= 2 or --cone");
  if (p.A_sq < 0.0) throw UsageError("spectrum: give --a-sq >= 0 or --cone");
  if (a.steps < 1) throw UsageError("spectrum: --steps must be >= 1");
  p.mu = a.mu;
  p.s_min = a.s_min;
  p.s_max = a.s_max;
  p.mesh = a.mesh;
  std::ostringstream csv;
  csv << "alpha,lambda_min\n";
  for (int i = 0; i < a.steps; ++i) {
    const double alpha =
        a.steps == 1 ? a.alpha_min : a.alpha_min + (a.alpha_max - a.alpha_min) * i / (a.steps - 1);
    p.density = PowerLaw{alpha};
    csv << fmt(alpha) << "," << fmt(rayleigh_min_eig(p).lambda_min) << "\n";
  }
  return csv.str();
}

}  // namespace detail

// Entry point. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  try {
    args = merge_config(std::move(args));
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  CLI::App app{"Certification toolkit for weighted minimal cones", "conecert"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string out_path, config_path, format = "json";
  bool timing = false;
  app.add_option("--out", out_path, "Write the report to this file instead of stdout");
  app.add_option("--config", config_path, "Flat key=value file; command-line values win");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv-summary"}));
  app.add_flag("--timing", timing, "Record wall-clock time per check");

  detail::AssumptionsArgs aa;
  auto* assumptions = app.add_subcommand("assumptions", "Check density assumptions");
  assumptions->add_option("--density", aa.density, "pow:<a> | exppow:<e>,<p> | const")->required();
  assumptions->add_option("--cone", aa.cone, "Take k and n from a catalog cone");
  assumptions->add_option("--k", aa.k, "Cone dimension");
  assumptions->add_option("--n", aa.n, "Ambient dimension (default k+1)");
  assumptions->add_option("--r", aa.r, "Upper limit for the A-4 integral");

  detail::CertifyArgs ca;
  auto* certify = app.add_subcommand("certify", "Certify stability or minimization");
  certify->require_subcommand(1);
  auto* stability = certify->add_subcommand("stability", "Weighted stability certificate");
  stability->add_option("--cone", ca.cone, "plane:k[,n] | prod:k1xk2[x..] | det:p,q,r | pf:m,2r");
  stability->add_option("--density", ca.density, "Density spec");
  stability->add_option("--sphere", ca.sphere, "k,n,R: instability certificate of S^k(R)");
  auto* minimizing = certify->add_subcommand("minimizing", "Weighted minimization certificate");
  minimizing->add_option("--cone", ca.cone, "Cone spec")->required();
  minimizing->add_option("--density", ca.density, "Density spec")->required();

  detail::VanishingArgs va;
  auto* vanishing = app.add_subcommand("vanishing-angle", "Integrate the vanishing-angle ODE");
  vanishing->add_option("--cone", va.cone, "plane or prod cone")->required();
  vanishing->add_option("--trace", va.trace, "CSV trace output (theta, r, radicand)");
  vanishing->add_option("--r-blowup", va.r_blowup, "Blow-up radius")->check(CLI::PositiveNumber);
  vanishing->add_option("--tol", va.tol, "Integrator tolerance")->check(CLI::PositiveNumber);

  detail::SlicingArgs sa;
  auto* slicing = app.add_subcommand("slicing-check", "Scan the reduced slicing inequality");
  slicing->add_option("--variety", sa.variety, "det:p,q,r | pf:m,2r")->required();
  slicing->add_option("--density", sa.density, "Density spec")->required();
  slicing->add_option("--grid", sa.grid, "preset | coarse | log:lo,hi,count");
  slicing->add_flag("--search-counterexample", sa.search, "Search for a violating witness");

  detail::SpectrumArgs spa;
  auto* spectrum = app.add_subcommand("spectrum", "CSV of (alpha, lambda_min) for power laws");
  spectrum->add_option("--cone", spa.cone, "Take k and |A|^2 from a catalog cone");
  spectrum->add_option("--k", spa.k, "Cone dimension");
  spectrum->add_option("--a-sq", spa.a_sq, "Squared norm of the link second fundamental form");
  spectrum->add_option("--alpha-min", spa.alpha_min);
  spectrum->add_option("--alpha-max", spa.alpha_max);
  spectrum->add_option("--steps", spa.steps);
  spectrum->add_option("--mu", spa.mu, "Link eigenvalue shift");
  spectrum->add_option("--s-min", spa.s_min);
  spectrum->add_option("--s-max", spa.s_max);
  spectrum->add_option("--mesh", spa.mesh);

  std::vector<std::string> argv_store{"conecert"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  detail::Context ctx{timing};
  try {
    if (spectrum->parsed()) {
      detail::write_output(detail::run_spectrum(spa), out_path, out);
      return kOk;
    }
    CertificationReport rep;
    int code = kUsage;
    if (assumptions->parsed()) {
      rep.subcommand = "assumptions";
      code = detail::run_assumptions(aa, ctx, rep);
    } else if (stability->parsed()) {
      rep.subcommand = "certify stability";
      code = detail::run_certify_stability(ca, ctx, rep);
    } else if (minimizing->parsed()) {
      rep.subcommand = "certify minimizing";
      code = detail::run_certify_minimizing(ca, ctx, rep);
    } else if (vanishing->parsed()) {
      rep.subcommand = "vanishing-angle";
      code = detail::run_vanishing_angle(va, ctx, rep);
    } else if (slicing->parsed()) {
      rep.subcommand = "slicing-check";
      code = detail::run_slicing_check(sa, ctx, rep);
    }
    const auto fmt = format == "csv-summary" ? ReportFormat::CsvSummary : ReportFormat::Json;
    detail::write_output(emit_report(rep, fmt), out_path, out);
    return code;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
  }
  return kUsage;
}

}  // namespace conecert::cli
