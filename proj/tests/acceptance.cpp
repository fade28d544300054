// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cfp/cfp.hpp"
#include "study_csv.hpp"

using namespace cfp;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void fail(Outcome& o, const std::string& why) {
  if (o.pass) o.detail = why;
  o.pass = false;
}

constexpr Density kFamilies[] = {Density::uniform, Density::gaussian};

// 1. Level-set design through a root of phi_N is the Gauss rule with unit condition.
Outcome oned_optimality() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst_kappa = 1.0, worst_det = 1.0, worst_node = 0.0;
  for (Density fam : kFamilies)
    for (std::size_t N = 2; N <= 10; ++N) {
      const auto table = recurrence_coefficients(fam, 2 * N);
      const double root = gauss_rule(table, N).nodes.back();
      const auto row = verify_oned_point(fam, N, root, "gauss_root", derive_seed(11, {N}));
      worst_kappa = std::max({worst_kappa, row.kappa, row.cfp_kappa});
      worst_det = std::min({worst_det, row.det, row.cfp_det});
      worst_node = std::max(worst_node, row.gauss_node_error);
      if (!row.cfp_recovered)
        fail(o, std::string(to_string(fam)) + " N=" + std::to_string(N) + ": CFP did not return the level set");
    }
  const double elapsed = seconds_since(t0);
  if (worst_kappa > 1.0 + 1e-8) fail(o, "kappa " + fmt("%.3e", worst_kappa));
  if (worst_det < 1.0 - 1e-8) fail(o, "det " + fmt("%.3e", worst_det));
  if (!(worst_node <= 1e-10)) fail(o, "Gauss node error " + fmt("%.3e", worst_node));
  if (elapsed >= 5.0) fail(o, "runtime " + fmt("%.2f s", elapsed));
  if (o.pass)
    o.detail = "max kappa-1 " + fmt("%.1e", worst_kappa - 1.0) + ", max node err " + fmt("%.1e", worst_node) +
               ", " + fmt("%.2f s", elapsed);
  return o;
}

// 2. The 1/K weighted rule on a random level set integrates phi_m, m <= 2N-2.
Outcome quadrature_exactness() {
  Outcome o;
  std::mt19937_64 rng(2);
  double worst_err = 0.0, worst_sum = 0.0, min_w = 1.0;
  for (Density fam : kFamilies)
    for (std::size_t N = 1; N <= 8; ++N) {
      const auto table = recurrence_coefficients(fam, 2 * N);
      int accepted = 0;
      while (accepted < 20) {
        const double y = fam == Density::uniform ? std::uniform_real_distribution<double>(-1.0, 1.0)(rng)
                                                 : std::normal_distribution<double>(0.0, std::sqrt(0.5))(rng);
        if (!r_ratio(table, N, y)) continue;
        ++accepted;
        const auto nodes = level_set(table, N, y);
        std::vector<double> K;
        double wsum = 0.0;
        for (double z : nodes) {
          K.push_back(christoffel_1d(table, N, z));
          wsum += 1.0 / K.back();
          min_w = std::min(min_w, 1.0 / K.back());
        }
        worst_sum = std::max(worst_sum, std::abs(wsum - 1.0));
        for (double e : quadrature_exactness_report(table, nodes, K, 2 * N - 2)) worst_err = std::max(worst_err, e);
      }
    }
  if (!(worst_err < 1e-10)) fail(o, "quadrature error " + fmt("%.3e", worst_err));
  if (!(min_w > 0.0)) fail(o, "nonpositive weight");
  if (!(worst_sum <= 1e-12)) fail(o, "weight sum off by " + fmt("%.3e", worst_sum));
  if (o.pass) o.detail = "max error " + fmt("%.1e", worst_err) + ", max |sum w - 1| " + fmt("%.1e", worst_sum);
  return o;
}

// 3. Pivoted QR selection equals the literal greedy determinant maximization.
Outcome greedy_equivalence() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + trial % 2;
    const Density fam = kFamilies[(trial / 2) % 2];
    const int k = d == 1 ? static_cast<int>(rng() % 10) : static_cast<int>(rng() % 4);  // N <= 10
    const auto basis = ProductBasis::make(fam, total_degree(d, k));
    const std::size_t M = 1 + rng() % basis.size();
    const std::size_t Mt = 2 * (basis.size() + rng() % (100 - basis.size()));  // <= 200
    const auto cands = candidate_set(fam, d, Mt, k, rng());
    if (cfp_select(cands, basis, M).pivot_order !=
        greedy_select_reference(cands, basis, M, Space::Q, Objective::det).pivot_order)
      ++mismatches;
    if (afp_select(cands, basis, M).pivot_order !=
        greedy_select_reference(cands, basis, M, Space::P, Objective::det).pivot_order)
      ++mismatches;
  }
  const double elapsed = seconds_since(t0);
  if (mismatches) fail(o, std::to_string(mismatches) + " pivot order mismatches");
  if (elapsed >= 60.0) fail(o, "runtime " + fmt("%.2f s", elapsed));
  if (o.pass) o.detail = "400 comparisons, " + fmt("%.2f s", elapsed);
  return o;
}

// 4. On square Q-designs, unit determinant and unit condition go together.
Outcome det_cond_equivalence() {
  Outcome o;
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Density fam = kFamilies[trial % 2];
    const std::size_t d = 1 + trial % 3;
    const auto basis = ProductBasis::make(fam, total_degree(d, 1 + trial % 4));
    const auto V = vandermonde(basis, sample_density(fam, d, basis.size(), rng), Space::Q);
    const double det = det_modulus(V), kappa = condition_number(V);
    const bool near = std::abs(det - 1.0) <= 1e-3 || kappa - 1.0 <= 1e-3;
    const bool both = std::abs(det - 1.0) <= 1e-2 && kappa - 1.0 <= 1e-2;
    if (near && !both)
      fail(o, "random design " + std::to_string(trial) + " (N=" + std::to_string(basis.size()) + "): det " +
                  fmt("%.6f", det) + ", kappa " + fmt("%.6f", kappa));
  }
  std::mt19937_64 grng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const Density fam = kFamilies[trial % 2];
    const std::size_t N = 2 + grng() % 9;
    const auto table = recurrence_coefficients(fam, 2 * N);
    double y;
    do {
      y = fam == Density::uniform ? std::uniform_real_distribution<double>(-1.0, 1.0)(grng)
                                  : std::normal_distribution<double>(0.0, 1.0)(grng);
    } while (!r_ratio(table, N, y));
    std::vector<Point> pts;
    for (double z : level_set(table, N, y)) pts.push_back(Point{z});
    const auto V = vandermonde(ProductBasis::make(fam, total_degree(1, static_cast<int>(N) - 1)), pts, Space::Q);
    const double det = det_modulus(V), kappa = condition_number(V);
    if (std::abs(det - 1.0) > 1e-8 || kappa - 1.0 > 1e-8)
      fail(o, "level set N=" + std::to_string(N) + ": det " + fmt("%.12g", det) + ", kappa " + fmt("%.12g", kappa));
  }
  if (o.pass) o.detail = "100 random and 20 level-set designs consistent";
  return o;
}

// 5. Rows of a Q-Vandermonde matrix have unit norm, so |det| <= 1.
Outcome hadamard_bound() {
  Outcome o;
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Density fam = kFamilies[trial % 2];
    const std::size_t d = 1 + trial % 3;
    const auto basis = ProductBasis::make(fam, total_degree(d, static_cast<int>(trial % 5)));
    worst = std::max(worst, det_modulus(vandermonde(basis, sample_density(fam, d, basis.size(), rng), Space::Q)));
  }
  if (worst > 1.0 + 1e-12) fail(o, "max det " + fmt("%.17g", worst));
  if (o.pass) o.detail = "max det " + fmt("%.6f", worst);
  return o;
}

// 6. Condition numbers of the three designs across degrees 2..15.
Outcome condition_study() {
  Outcome o;
  const auto t0 = Clock::now();
  StudyConfig cfg;
  cfg.dim = 2;
  cfg.degree_min = 2;
  cfg.degree_max = 15;
  cfg.oversampling = 1.05;
  cfg.trials = 50;
  cfg.candidates = 10000;
  cfg.seed = 6;
  const auto rows = parse_study_csv(study_condition(cfg));
  const double elapsed = seconds_since(t0);
  double worst_ratio = 0.0;
  for (int k = cfg.degree_min; k <= cfg.degree_max; ++k) {
    const auto* c = find_stat(rows, "CFP", k, "mean");
    const auto* a = find_stat(rows, "AFP", k, "mean");
    const auto* m = find_stat(rows, "MC", k, "mean");
    if (!c || !a || !m) {
      fail(o, "missing row at degree " + std::to_string(k));
      continue;
    }
    if (!std::isfinite(c->value)) fail(o, "CFP mean not finite at degree " + std::to_string(k));
    if (c->value > a->value || c->value > m->value)
      fail(o, "degree " + std::to_string(k) + ": CFP " + fmt("%.3g", c->value) + ", AFP " + fmt("%.3g", a->value) +
                  ", MC " + fmt("%.3g", m->value));
    worst_ratio = std::max(worst_ratio, c->value / std::min(a->value, m->value));
  }
  if (elapsed >= 600.0) fail(o, "runtime " + fmt("%.1f s", elapsed));
  if (o.pass) o.detail = "max CFP/best-other ratio " + fmt("%.3f", worst_ratio) + ", " + fmt("%.1f s", elapsed);
  return o;
}

// 7. A polynomial in the approximation space is reproduced by a CFP design.
Outcome exact_recovery() {
  Outcome o;
  const auto indices = total_degree(2, 6);
  const auto basis = ProductBasis::make(Density::uniform, indices);
  const std::size_t M = oversampled_count(indices.size(), 1.05);
  const auto enriched = ProductBasis::make(Density::uniform, enrich(indices, M - indices.size()));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Eigen::VectorXd c(static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = g(rng);
  const Surrogate truth{basis, c};
  const TargetFunction f = [&](std::span<const double> y) { return eval_surrogate(truth, y); };

  const auto design = cfp_select(candidate_set(Density::uniform, 2, 10000, enriched.indices().max_total_degree(), 7),
                                 enriched, M);
  std::vector<double> fv;
  for (const auto& p : design.points) fv.push_back(f(p));
  const double err = validation_error(solve_weighted(basis, design.points, fv), f, Density::uniform, 1000, 77);
  if (!(err < 1e-9)) fail(o, "validation error " + fmt("%.3e", err));
  if (o.pass) o.detail = "validation error " + fmt("%.2e", err);
  return o;
}

// Best L2 error of exp(-|y|^2) over TD(2, k), by 20x20 tensor Gauss-Legendre.
double best_projection_error(int k) {
  const auto rule = gauss_rule(recurrence_coefficients(Density::uniform, 20), 20);
  const auto basis = ProductBasis::make(Density::uniform, total_degree(2, k));
  std::vector<Point> pts;
  std::vector<double> w, fv;
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) {
      pts.push_back(Point{rule.nodes[i], rule.nodes[j]});
      w.push_back(rule.weights[i] * rule.weights[j]);
      fv.push_back(std::exp(-rule.nodes[i] * rule.nodes[i] - rule.nodes[j] * rule.nodes[j]));
    }
  const Eigen::MatrixXd V = vandermonde(basis, pts, Space::P).entries;
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(V.cols());
  for (std::size_t q = 0; q < pts.size(); ++q)
    coef += w[q] * fv[q] * V.row(static_cast<Eigen::Index>(q)).transpose();
  double err2 = 0.0;
  for (std::size_t q = 0; q < pts.size(); ++q) {
    const double r = fv[q] - V.row(static_cast<Eigen::Index>(q)).dot(coef);
    err2 += w[q] * r * r;
  }
  return std::sqrt(err2);
}

// 8. CFP least squares tracks the best approximation of a smooth target.
Outcome smooth_convergence() {
  Outcome o;
  StudyConfig cfg;
  cfg.dim = 2;
  cfg.degree_min = 2;
  cfg.degree_max = 12;
  cfg.seed = 8;
  cfg.methods = {Method::cfp};
  const auto rows = parse_study_csv(study_approx(cfg, Target::exp_negsumsq));
  double worst_ratio = 0.0, first = 0.0, last = 0.0;
  for (int k = cfg.degree_min; k <= cfg.degree_max; ++k) {
    const auto* c = find_stat(rows, "CFP", k, "mean");
    if (!c) {
      fail(o, "missing row at degree " + std::to_string(k));
      continue;
    }
    const double best = best_projection_error(k);
    worst_ratio = std::max(worst_ratio, c->value / best);
    if (c->value > 10.0 * best)
      fail(o, "degree " + std::to_string(k) + ": CFP " + fmt("%.3e", c->value) + " vs best " + fmt("%.3e", best));
    if (k == cfg.degree_min) first = c->value;
    if (k == cfg.degree_max) last = c->value;
  }
  if (!(first / last >= 1e3)) fail(o, "overall decrease only " + fmt("%.3g", first / last));
  if (o.pass)
    o.detail = "max CFP/best ratio " + fmt("%.2f", worst_ratio) + ", decrease " + fmt("%.2e", first / last);
  return o;
}

// 9. Elliptic benchmark: midpoint value, CFP vs MC, grid convergence.
Outcome elliptic_benchmark() {
  Outcome o;
  const double u0 = solve_bvp(EllipticConfig{2, 1.0, 1001}, std::vector<double>{0.0, 0.0});
  if (std::abs(u0 - 0.25) > 1e-6) fail(o, "u(0.5, 0) = " + fmt("%.12g", u0));

  StudyConfig cfg;
  cfg.dim = 2;
  cfg.degree_min = 1;
  cfg.degree_max = 8;
  cfg.seed = 9;
  cfg.methods = {Method::cfp, Method::mc};
  cfg.elliptic = EllipticConfig{2, 1.0, 1001};
  const auto rows = parse_study_csv(study_approx(cfg, Target::elliptic));
  double worst_ratio = 0.0;
  for (int k = cfg.degree_min; k <= cfg.degree_max; ++k) {
    const auto* c = find_stat(rows, "CFP", k, "mean");
    const auto* m = find_stat(rows, "MC", k, "mean");
    if (!c || !m) {
      fail(o, "missing row at degree " + std::to_string(k));
      continue;
    }
    worst_ratio = std::max(worst_ratio, c->value / m->value);
    if (c->value > m->value)
      fail(o, "degree " + std::to_string(k) + ": CFP " + fmt("%.3e", c->value) + " > MC " + fmt("%.3e", m->value));
  }

  const std::vector<double> y{0.6, -0.8};
  auto u = [&](std::size_t g) { return solve_bvp(EllipticConfig{2, 1.0, g}, y); };
  const double order = std::log2(std::abs(u(101) - u(201)) / std::abs(u(201) - u(401)));
  if (std::abs(order - 2.0) > 0.2) fail(o, "observed order " + fmt("%.3f", order));
  if (o.pass)
    o.detail = "u(0.5,0) = " + fmt("%.12f", u0) + ", max CFP/MC ratio " + fmt("%.3f", worst_ratio) + ", order " +
               fmt("%.3f", order);
  return o;
}

// 10. Same seed, same bytes, regardless of thread count.
Outcome determinism() {
  Outcome o;
  StudyConfig cfg;
  cfg.dim = 2;
  cfg.degree_min = 1;
  cfg.degree_max = 5;
  cfg.trials = 8;
  cfg.candidates = 2000;
  cfg.validation_samples = 300;
  cfg.seed = 10;
  std::vector<std::pair<std::string, std::function<std::string(const StudyConfig&)>>> studies{
      {"cond", [](const StudyConfig& c) { return study_condition(c); }},
      {"approx", [](const StudyConfig& c) { return study_approx(c, Target::exp_negsumsq); }},
      {"elliptic", [](const StudyConfig& c) { return study_approx(c, Target::elliptic); }},
  };
  for (const auto& [name, run] : studies) {
    auto c1 = cfg;
    c1.threads = 1;
    const std::string a = run(c1), b = run(cfg), c = run(cfg);
    if (a != b || b != c) fail(o, name + " study output differs between runs");
  }
  if (to_csv(verify_oned(Density::gaussian, 8, 10)) != to_csv(verify_oned(Density::gaussian, 8, 10)))
    fail(o, "verify oned output differs between runs");
  if (o.pass) o.detail = "cond, approx, elliptic and verify-oned outputs identical";
  return o;
}

} // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1d optimality of level-set designs", oned_optimality},
      {"level-set quadrature exactness", quadrature_exactness},
      {"pivoted QR equals greedy reference", greedy_equivalence},
      {"unit determinant iff unit condition", det_cond_equivalence},
      {"Hadamard bound on Q-Vandermonde", hadamard_bound},
      {"condition study ordering", condition_study},
      {"exact polynomial recovery", exact_recovery},
      {"smooth target convergence", smooth_convergence},
      {"elliptic benchmark", elliptic_benchmark},
      {"deterministic study output", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
