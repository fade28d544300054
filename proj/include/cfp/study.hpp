#pragma once

// Batch studies behind the command-line front end: condition-number and
// approximation sweeps over polynomial degree, and the one-dimensional
// optimality verification report. All outputs are CSV strings in long format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cfp/basis.hpp"
#include "cfp/design.hpp"
#include "cfp/elliptic.hpp"
#include "cfp/error.hpp"
#include "cfp/lsq.hpp"
#include "cfp/multiindex.hpp"
#include "cfp/orthopoly.hpp"
#include "cfp/random.hpp"

namespace cfp {

inline constexpr std::string_view kVersion = "0.1.0";

enum class IndexRule { total_degree, hyperbolic_cross };
enum class Method { cfp, afp, mc };
enum class Target { exp_negsumsq, exp_negsum, elliptic, linear };

inline std::string_view to_string(IndexRule r) { return r == IndexRule::total_degree ? "TD" : "HC"; }

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::cfp: return "CFP";
    case Method::afp: return "AFP";
    case Method::mc: return "MC";
  }
  return "?";
}

inline std::string_view to_string(Target t) {
  switch (t) {
    case Target::exp_negsumsq: return "exp_negsumsq";
    case Target::exp_negsum: return "exp_negsum";
    case Target::elliptic: return "elliptic";
    case Target::linear: return "linear";
  }
  return "?";
}

inline IndexRule parse_index_rule(std::string_view s) {
  if (s == "TD" || s == "td") return IndexRule::total_degree;
  if (s == "HC" || s == "hc") return IndexRule::hyperbolic_cross;
  throw PreconditionError("unknown index rule: " + std::string(s));
}

inline Method parse_method(std::string_view s) {
  if (s == "CFP" || s == "cfp") return Method::cfp;
  if (s == "AFP" || s == "afp") return Method::afp;
  if (s == "MC" || s == "mc") return Method::mc;
  throw PreconditionError("unknown method: " + std::string(s));
}

inline Target parse_target(std::string_view s) {
  for (Target t : {Target::exp_negsumsq, Target::exp_negsum, Target::elliptic, Target::linear})
    if (s == to_string(t)) return t;
  throw PreconditionError("unknown target: " + std::string(s));
}

struct StudyConfig {
  Density family = Density::uniform;
  std::size_t dim = 2;
  IndexRule index_rule = IndexRule::total_degree;
  int degree_min = 1;
  int degree_max = 5;
  double oversampling = 1.05;
  std::size_t trials = 50;
  std::size_t candidates = 10000;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::cfp, Method::afp, Method::mc};
  std::size_t validation_samples = kDefaultValidationSamples;
  // d = 1 only: put the Gauss nodes of the square design at the head of every
  // candidate set so CFP can recover the optimal design exactly.
  bool seed_level_set = false;
  EllipticConfig elliptic{};
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const {
    detail::require(dim >= 1, "study: dim must be >= 1");
    detail::require(degree_min >= 0 && degree_min <= degree_max, "study: degree range is empty");
    detail::require(oversampling >= 1.0, "study: oversampling factor must be >= 1");
    detail::require(trials >= 1, "study: trials must be >= 1");
    detail::require(candidates >= 2 && candidates % 2 == 0, "study: candidate count must be even and >= 2");
    detail::require(!methods.empty(), "study: method list is empty");
    detail::require(validation_samples >= 1, "study: validation sample count must be >= 1");
    detail::require(!seed_level_set || dim == 1, "study: seed_level_set requires dim = 1");
  }
};

inline MultiIndexSet make_index_set(IndexRule rule, std::size_t dim, int degree) {
  return rule == IndexRule::total_degree ? total_degree(dim, degree) : hyperbolic_cross(dim, degree);
}

/// ceil(factor * N), guarded against representation error in the product.
inline std::size_t oversampled_count(std::size_t N, double factor) {
  return static_cast<std::size_t>(std::ceil(factor * static_cast<double>(N) - 1e-9));
}

inline TargetFunction make_target(Target t, const EllipticConfig& ell = {}) {
  switch (t) {
    case Target::exp_negsumsq:
      return [](std::span<const double> y) {
        double s = 0.0;
        for (double v : y) s += v * v;
        return std::exp(-s);
      };
    case Target::exp_negsum:
      return [](std::span<const double> y) {
        double s = 0.0;
        for (double v : y) s += v;
        return std::exp(-s);
      };
    case Target::elliptic:
      return [ell](std::span<const double> y) { return solve_bvp(ell, y); };
    case Target::linear:
      return [](std::span<const double> y) {
        double s = 1.0;
        for (double v : y) s += v;
        return s;
      };
  }
  throw PreconditionError("unknown target");
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || v[lo] == v[hi]) return v[lo];
  return v[lo] + frac * (v[hi] - v[lo]);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline std::string config_header(std::string_view command, const StudyConfig& cfg, std::string_view extra = {}) {
  std::ostringstream os;
  os << "# cfp " << kVersion << '\n';
  os << "# command: " << command << '\n';
  os << "# family=" << to_string(cfg.family) << " dim=" << cfg.dim << " index=" << to_string(cfg.index_rule)
     << " degrees=" << cfg.degree_min << ".." << cfg.degree_max << " oversampling=" << format_value(cfg.oversampling)
     << " trials=" << cfg.trials << " candidates=" << cfg.candidates << " seed=" << cfg.seed
     << " validation_samples=" << cfg.validation_samples << " seed_level_set=" << (cfg.seed_level_set ? 1 : 0)
     << " methods=";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) os << (i ? "," : "") << to_string(cfg.methods[i]);
  os << '\n';
  if (!extra.empty()) os << "# " << extra << '\n';
  os << "method,degree,N,M,stat_name,value\n";
  return os.str();
}

struct TrialDesign {
  std::vector<Point> points;
  Space space = Space::P;  // space whose conditioning the method controls
  bool failed = false;
};

struct DegreeSetup {
  int degree = 0;
  MultiIndexSet indices;
  MultiIndexSet enriched;
  std::size_t M = 0;
};

inline DegreeSetup setup_degree(const StudyConfig& cfg, int degree) {
  DegreeSetup s;
  s.degree = degree;
  s.indices = make_index_set(cfg.index_rule, cfg.dim, degree);
  s.M = oversampled_count(s.indices.size(), cfg.oversampling);
  s.enriched = s.M > s.indices.size() ? enrich(s.indices, s.M - s.indices.size()) : s.indices;
  return s;
}

inline CandidateSet study_candidates(const StudyConfig& cfg, const DegreeSetup& s, std::size_t trial) {
  CandidateSet c = candidate_set(cfg.family, cfg.dim, cfg.candidates, s.enriched.max_total_degree(),
                                 derive_seed(cfg.seed, {static_cast<std::uint64_t>(s.degree), trial, 0xCA}));
  if (cfg.seed_level_set) {
    const auto table = recurrence_coefficients(cfg.family, s.enriched.size());
    const auto rule = gauss_rule(table, s.enriched.size());
    std::vector<Point> head;
    // Largest root first so candidate 0 lies in the optimal design.
    for (auto it = rule.nodes.rbegin(); it != rule.nodes.rend(); ++it) head.push_back(Point{*it});
    c.points.insert(c.points.begin(), head.begin(), head.end());
    c.tags.insert(c.tags.begin(), head.size(), Ensemble::user);
  }
  return c;
}

inline TrialDesign build_design(const StudyConfig& cfg, const DegreeSetup& s, Method method, std::size_t trial,
                                const CandidateSet* candidates) {
  TrialDesign out;
  try {
    switch (method) {
      case Method::cfp: {
        const auto basis = ProductBasis::make(cfg.family, s.enriched);
        out.points = cfp_select(*candidates, basis, s.M).points;
        out.space = Space::Q;
        break;
      }
      case Method::afp: {
        const auto basis = ProductBasis::make(cfg.family, s.enriched);
        out.points = afp_select(*candidates, basis, s.M).points;
        out.space = Space::P;
        break;
      }
      case Method::mc: {
        Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(s.degree), trial, 0x3C}));
        out.points = sample_density(cfg.family, cfg.dim, s.M, rng);
        out.space = Space::P;
        break;
      }
    }
  } catch (const RankDeficientError&) {
    out.failed = true;
  }
  return out;
}

inline void emit_stats(std::ostringstream& os, Method m, const DegreeSetup& s, const std::vector<double>& values) {
  const std::string prefix = std::string(to_string(m)) + "," + std::to_string(s.degree) + "," +
                             std::to_string(s.indices.size()) + "," + std::to_string(s.M) + ",";
  os << prefix << "mean," << format_value(mean(values)) << '\n';
  os << prefix << "q20," << format_value(quantile(values, 0.2)) << '\n';
  os << prefix << "q80," << format_value(quantile(values, 0.8)) << '\n';
}

} // namespace detail

/// Per (method, degree): mean, 20% and 80% quantiles of kappa over trials.
/// CFP is measured on V(A, Q(Lambda)); AFP and MC on V(A, P(Lambda)).
inline std::string study_condition(const StudyConfig& cfg) {
  cfg.validate();
  std::vector<detail::DegreeSetup> setups;
  for (int k = cfg.degree_min; k <= cfg.degree_max; ++k) setups.push_back(detail::setup_degree(cfg, k));

  const std::size_t nm = cfg.methods.size();
  const std::size_t nd = setups.size();
  // kappa[(m * nd + d) * trials + t]
  std::vector<double> kappa(nm * nd * cfg.trials);
  detail::parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    for (std::size_t d = 0; d < nd; ++d) {
      const auto& s = setups[d];
      const auto basis = ProductBasis::make(cfg.family, s.indices);
      const CandidateSet cands = detail::study_candidates(cfg, s, t);
      for (std::size_t m = 0; m < nm; ++m) {
        const auto design = detail::build_design(cfg, s, cfg.methods[m], t, &cands);
        kappa[(m * nd + d) * cfg.trials + t] = design.failed
                                                   ? std::numeric_limits<double>::infinity()
                                                   : condition_number(vandermonde(basis, design.points, design.space));
      }
    }
  });

  std::ostringstream os;
  os << detail::config_header("study cond", cfg);
  for (std::size_t m = 0; m < nm; ++m)
    for (std::size_t d = 0; d < nd; ++d) {
      const auto first = kappa.begin() + static_cast<std::ptrdiff_t>((m * nd + d) * cfg.trials);
      detail::emit_stats(os, cfg.methods[m], setups[d],
                         std::vector<double>(first, first + static_cast<std::ptrdiff_t>(cfg.trials)));
    }
  return os.str();
}

/// Per (method, degree): mean and quantiles of the validation RMS error of the
/// least-squares surrogate. CFP fits with the weighted solver, AFP and MC unweighted.
inline std::string study_approx(const StudyConfig& cfg, Target target) {
  cfg.validate();
  detail::require(target != Target::elliptic || cfg.family == Density::uniform,
                  "study: the elliptic target is defined for the uniform family");
  if (target == Target::elliptic) {
    detail::require(cfg.elliptic.dim == cfg.dim, "study: elliptic dimension must match the study dimension");
    detail::require(cfg.elliptic.is_elliptic(), "study: sigma violates the ellipticity bound");
  }
  const TargetFunction f = make_target(target, cfg.elliptic);

  std::vector<detail::DegreeSetup> setups;
  for (int k = cfg.degree_min; k <= cfg.degree_max; ++k) setups.push_back(detail::setup_degree(cfg, k));
  const std::size_t nm = cfg.methods.size();
  const std::size_t nd = setups.size();
  std::vector<double> err(nm * nd * cfg.trials);

  detail::parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    Rng vrng(derive_seed(cfg.seed, {t, 0x7A1}));
    const auto vpts = sample_density(cfg.family, cfg.dim, cfg.validation_samples, vrng);
    std::vector<double> vvals(vpts.size());
    for (std::size_t i = 0; i < vpts.size(); ++i) vvals[i] = f(vpts[i]);

    for (std::size_t d = 0; d < nd; ++d) {
      const auto& s = setups[d];
      const auto basis = ProductBasis::make(cfg.family, s.indices);
      const CandidateSet cands = detail::study_candidates(cfg, s, t);
      for (std::size_t m = 0; m < nm; ++m) {
        double e = std::numeric_limits<double>::infinity();
        const auto design = detail::build_design(cfg, s, cfg.methods[m], t, &cands);
        if (!design.failed) {
          std::vector<double> fv(design.points.size());
          for (std::size_t i = 0; i < fv.size(); ++i) fv[i] = f(design.points[i]);
          try {
            const Surrogate sur = cfg.methods[m] == Method::cfp ? solve_weighted(basis, design.points, fv)
                                                                : solve_unweighted(basis, design.points, fv);
            e = validation_error(sur, vpts, vvals);
          } catch (const RankDeficientError&) {
          }
        }
        err[(m * nd + d) * cfg.trials + t] = e;
      }
    }
  });

  std::ostringstream extra;
  extra << "target=" << to_string(target);
  if (target == Target::elliptic)
    extra << " sigma=" << detail::format_value(cfg.elliptic.sigma) << " grid_points=" << cfg.elliptic.grid_points;
  std::ostringstream os;
  os << detail::config_header(target == Target::elliptic ? "study elliptic" : "study approx", cfg, extra.str());
  for (std::size_t m = 0; m < nm; ++m)
    for (std::size_t d = 0; d < nd; ++d) {
      const auto first = err.begin() + static_cast<std::ptrdiff_t>((m * nd + d) * cfg.trials);
      detail::emit_stats(os, cfg.methods[m], setups[d],
                         std::vector<double>(first, first + static_cast<std::ptrdiff_t>(cfg.trials)));
    }
  return os.str();
}

// ---------------------------------------------------------------------------
// One-dimensional optimality verification

struct OnedTolerances {
  double kappa = 1e-8;
  double det = 1e-8;
  double quadrature = 1e-10;
  double weight_sum = 1e-12;
  double gauss_nodes = 1e-10;
};

struct OnedRow {
  std::size_t N = 0;
  std::string start;  // "gauss_root" or "sweep"
  double y = 0.0;
  std::vector<double> nodes;
  double kappa = 0.0;        // kappa(V(A_N(y), Q))
  double det = 0.0;          // |det V(A_N(y), Q)|
  double min_weight = 0.0;   // smallest 1/K at the nodes
  double weight_sum_error = 0.0;
  double max_quad_error = 0.0;  // max over m <= 2N-2
  double gauss_node_error = std::numeric_limits<double>::quiet_NaN();
  bool cfp_recovered = false;   // greedy CFP over the candidates returns A_N(y)
  double cfp_kappa = 0.0;
  double cfp_det = 0.0;
  bool pass = false;
};

struct OnedReport {
  Density family = Density::uniform;
  std::vector<OnedRow> rows;
  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const OnedRow& r) { return r.pass; });
  }
};

inline constexpr std::size_t kMaxOnedN = 40;

inline OnedRow verify_oned_point(Density family, std::size_t N, double y, std::string start, std::uint64_t seed,
                                 std::size_t distractors = 200, const OnedTolerances& tol = {}) {
  const auto table = recurrence_coefficients(family, std::max<std::size_t>(2 * N, 2));
  OnedRow row;
  row.N = N;
  row.start = std::move(start);
  row.y = y;
  row.nodes = level_set(table, N, y);

  std::vector<Point> pts;
  std::vector<double> K;
  for (double z : row.nodes) {
    pts.push_back(Point{z});
    K.push_back(christoffel_1d(table, N, z));
  }
  const auto basis = ProductBasis::make(family, total_degree(1, static_cast<int>(N) - 1));
  const DesignMatrix V = vandermonde(basis, pts, Space::Q);
  row.kappa = condition_number(V);
  row.det = det_modulus(V);

  double wsum = 0.0;
  row.min_weight = std::numeric_limits<double>::infinity();
  for (double k : K) {
    wsum += 1.0 / k;
    row.min_weight = std::min(row.min_weight, 1.0 / k);
  }
  row.weight_sum_error = std::abs(wsum - 1.0);
  const auto errs = quadrature_exactness_report(table, row.nodes, K, 2 * N - 2);
  row.max_quad_error = *std::max_element(errs.begin(), errs.end());

  bool gauss_ok = true;
  if (row.start == "gauss_root") {
    const auto rule = gauss_rule(table, N);
    row.gauss_node_error = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      row.gauss_node_error = std::max(row.gauss_node_error, std::abs(rule.nodes[i] - row.nodes[i]));
    gauss_ok = row.gauss_node_error <= tol.gauss_nodes;
  }

  // Greedy CFP over {y, rest of A_N(y), random distractors}, y at index 0.
  CandidateSet cands;
  cands.points.push_back(Point{y});
  for (double z : row.nodes)
    if (std::abs(z - y) > 1e-12 * std::max(1.0, std::abs(y))) cands.points.push_back(Point{z});
  if (distractors > 0) {
    const auto extra = candidate_set(family, 1, 2 * ((distractors + 1) / 2), static_cast<int>(N), seed);
    cands.points.insert(cands.points.end(), extra.points.begin(), extra.points.end());
  }
  cands.tags.assign(cands.points.size(), Ensemble::user);
  const auto design = cfp_select(cands, basis, N);
  std::vector<double> chosen;
  for (const auto& p : design.points) chosen.push_back(p[0]);
  std::sort(chosen.begin(), chosen.end());
  row.cfp_recovered = chosen.size() == N;
  for (std::size_t i = 0; row.cfp_recovered && i < N; ++i)
    row.cfp_recovered = std::abs(chosen[i] - row.nodes[i]) <= 1e-12 * std::max(1.0, std::abs(row.nodes[i]));
  row.cfp_kappa = design.condition;
  row.cfp_det = design.det_modulus.value_or(0.0);

  row.pass = row.kappa <= 1.0 + tol.kappa && row.det >= 1.0 - tol.det && row.min_weight > 0.0 &&
             row.weight_sum_error <= tol.weight_sum && row.max_quad_error <= tol.quadrature && gauss_ok &&
             row.cfp_recovered && row.cfp_kappa <= 1.0 + tol.kappa && row.cfp_det >= 1.0 - tol.det;
  return row;
}

/// Level-set designs for N = 1..N_max, started from the largest root of phi_N
/// and from a sweep of generic points.
inline OnedReport verify_oned(Density family, std::size_t N_max, std::uint64_t seed = 1, std::size_t sweep = 7,
                              const OnedTolerances& tol = {}) {
  detail::require(N_max >= 1 && N_max <= kMaxOnedN, "verify_oned: need 1 <= N_max <= 40");
  OnedReport report;
  report.family = family;
  const double half_width = family == Density::uniform ? 0.95 : 2.0;
  for (std::size_t N = 1; N <= N_max; ++N) {
    const auto table = recurrence_coefficients(family, std::max<std::size_t>(2 * N, 2));
    const double root = gauss_rule(table, N).nodes.back();
    report.rows.push_back(verify_oned_point(family, N, root, "gauss_root", derive_seed(seed, {N}), 200, tol));
    for (std::size_t i = 0; i < sweep; ++i) {
      const double y = sweep == 1 ? 0.0
                                  : half_width * (2.0 * static_cast<double>(i) - static_cast<double>(sweep - 1)) /
                                        static_cast<double>(sweep - 1);
      if (!r_ratio(table, N, y)) continue;  // zero of phi_{N-1}: excluded start
      report.rows.push_back(verify_oned_point(family, N, y, "sweep", derive_seed(seed, {N, i + 1}), 200, tol));
    }
  }
  return report;
}

inline std::string to_csv(const OnedReport& report) {
  std::ostringstream os;
  os << "# cfp " << kVersion << '\n';
  os << "# command: verify oned family=" << to_string(report.family) << '\n';
  os << "N,start,y,kappa,det,min_weight,weight_sum_error,max_quad_error,gauss_node_error,cfp_recovered,"
        "cfp_kappa,cfp_det,status\n";
  for (const auto& r : report.rows) {
    os << r.N << ',' << r.start << ',' << detail::format_value(r.y) << ',' << detail::format_value(r.kappa) << ','
       << detail::format_value(r.det) << ',' << detail::format_value(r.min_weight) << ','
       << detail::format_value(r.weight_sum_error) << ',' << detail::format_value(r.max_quad_error) << ','
       << detail::format_value(r.gauss_node_error) << ',' << (r.cfp_recovered ? 1 : 0) << ','
       << detail::format_value(r.cfp_kappa) << ',' << detail::format_value(r.cfp_det) << ','
       << (r.pass ? "PASS" : "FAIL") << '\n';
  }
  return os.str();
}

} // namespace cfp
