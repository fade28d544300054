#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "cfp/study.hpp"
#include "study_csv.hpp"

using namespace cfp;

namespace {

using Row = StudyRow;

std::vector<Row> parse_csv(const std::string& csv) {
  std::vector<Row> rows;
  EXPECT_NO_THROW(rows = parse_study_csv(csv));
  return rows;
}

double stat(const std::vector<Row>& rows, const std::string& method, int degree, const std::string& name) {
  if (const auto* r = find_stat(rows, method, degree, name)) return r->value;
  ADD_FAILURE() << "missing " << method << " " << degree << " " << name;
  return std::nan("");
}

StudyConfig small_config() {
  StudyConfig cfg;
  cfg.dim = 2;
  cfg.degree_min = 1;
  cfg.degree_max = 3;
  cfg.trials = 4;
  cfg.candidates = 400;
  cfg.validation_samples = 200;
  cfg.seed = 77;
  return cfg;
}

} // namespace

TEST(Study, OversampledCount) {
  EXPECT_EQ(oversampled_count(20, 1.05), 21u);
  EXPECT_EQ(oversampled_count(21, 1.05), 23u);
  EXPECT_EQ(oversampled_count(6, 1.0), 6u);
  EXPECT_EQ(oversampled_count(136, 1.05), 143u);
}

TEST(Study, Quantiles) {
  EXPECT_DOUBLE_EQ(detail::quantile({1, 2, 3, 4, 5}, 0.2), 1.8);
  EXPECT_DOUBLE_EQ(detail::quantile({5, 1, 3}, 0.5), 3.0);
  EXPECT_TRUE(std::isinf(detail::quantile({1.0, INFINITY}, 0.8)));
  EXPECT_EQ(detail::format_value(INFINITY), "inf");
}

TEST(Study, ConfigValidation) {
  auto cfg = small_config();
  cfg.degree_min = 4;
  EXPECT_THROW(study_condition(cfg), PreconditionError);
  cfg = small_config();
  cfg.oversampling = 0.9;
  EXPECT_THROW(study_condition(cfg), PreconditionError);
  cfg = small_config();
  cfg.seed_level_set = true;
  EXPECT_THROW(study_condition(cfg), PreconditionError);
  EXPECT_THROW(parse_method("lhs"), PreconditionError);
  EXPECT_THROW(parse_target("sin"), PreconditionError);
}

TEST(StudyCond, SchemaAndHeader) {
  const auto cfg = small_config();
  const std::string csv = study_condition(cfg);
  EXPECT_EQ(csv.rfind("# cfp ", 0), 0u);
  EXPECT_NE(csv.find("seed=77"), std::string::npos);
  EXPECT_NE(csv.find("trials=4"), std::string::npos);
  const auto rows = parse_csv(csv);
  std::set<std::pair<std::string, int>> cells;
  for (const auto& r : rows) cells.insert({r.method, r.degree});
  EXPECT_EQ(cells.size(), cfg.methods.size() * 3);
  EXPECT_EQ(rows.size(), cells.size() * 3);  // mean, q20, q80
  for (const auto& r : rows) {
    EXPECT_GE(r.value, 1.0);
    EXPECT_EQ(r.M, oversampled_count(r.N, 1.05));
  }
}

TEST(StudyCond, ByteIdenticalAcrossRunsAndThreadCounts) {
  auto cfg = small_config();
  cfg.threads = 1;
  const std::string a = study_condition(cfg);
  cfg.threads = 3;
  EXPECT_EQ(a, study_condition(cfg));
  EXPECT_EQ(a, study_condition(cfg));
  cfg.seed = 78;
  EXPECT_NE(a, study_condition(cfg));
}

TEST(StudyCond, SeededLevelSetGivesUnitCondition) {
  StudyConfig cfg;
  cfg.dim = 1;
  cfg.degree_min = 1;
  cfg.degree_max = 9;
  cfg.oversampling = 1.0;
  cfg.trials = 3;
  cfg.candidates = 200;
  cfg.methods = {Method::cfp};
  cfg.seed_level_set = true;
  const auto rows = parse_csv(study_condition(cfg));
  for (int k = 1; k <= 9; ++k) EXPECT_NEAR(stat(rows, "CFP", k, "mean"), 1.0, 1e-8);
}

TEST(StudyApprox, PolynomialTargetIsRecovered) {
  auto cfg = small_config();
  const auto rows = parse_csv(study_approx(cfg, Target::linear));
  for (const auto& r : rows) EXPECT_LT(r.value, 1e-9) << r.method << " " << r.degree;
}

TEST(StudyApprox, DegreeZeroErrorIsStandardDeviation) {
  // Best constant is the mean, so the RMS error tends to the standard deviation
  // of f under rho; reference moments from a 20-point Gauss-Legendre rule.
  const auto rule = gauss_rule(recurrence_coefficients(Density::uniform, 20), 20);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t q = 0; q < 20; ++q) {
    m1 += rule.weights[q] * std::exp(-rule.nodes[q] * rule.nodes[q]);
    m2 += rule.weights[q] * std::exp(-2.0 * rule.nodes[q] * rule.nodes[q]);
  }
  const double sd = std::sqrt(m2 * m2 - m1 * m1 * m1 * m1);

  StudyConfig cfg;
  cfg.dim = 2;
  cfg.degree_min = 0;
  cfg.degree_max = 0;
  cfg.oversampling = 400.0;
  cfg.trials = 20;
  cfg.methods = {Method::mc};
  cfg.seed = 3;
  const auto rows = parse_csv(study_approx(cfg, Target::exp_negsumsq));
  EXPECT_NEAR(stat(rows, "MC", 0, "mean"), sd, 0.05 * sd);
}

TEST(StudyApprox, EllipticHeaderAndMidpoint) {
  auto cfg = small_config();
  cfg.degree_max = 2;
  cfg.trials = 2;
  cfg.validation_samples = 50;
  cfg.elliptic.dim = 2;
  const std::string csv = study_approx(cfg, Target::elliptic);
  EXPECT_NE(csv.find("# command: study elliptic"), std::string::npos);
  EXPECT_NE(csv.find("sigma=1 grid_points=1001"), std::string::npos);
  const auto f = make_target(Target::elliptic, cfg.elliptic);
  EXPECT_NEAR(f(std::vector<double>{0.0, 0.0}), 0.25, 1e-6);

  cfg.family = Density::gaussian;
  EXPECT_THROW(study_approx(cfg, Target::elliptic), PreconditionError);
}

TEST(VerifyOned, HandComputedRow) {
  const auto row = verify_oned_point(Density::uniform, 2, 1.0, "sweep", 1);
  ASSERT_EQ(row.nodes.size(), 2u);
  EXPECT_NEAR(row.nodes[0], -1.0 / 3.0, 1e-14);
  EXPECT_NEAR(row.nodes[1], 1.0, 1e-14);
  EXPECT_NEAR(row.kappa, 1.0, 1e-12);
  EXPECT_LT(row.max_quad_error, 1e-14);
  EXPECT_TRUE(row.cfp_recovered);
  EXPECT_TRUE(row.pass);
}

TEST(VerifyOned, GaussRootsGiveGaussNodes) {
  for (auto [fam, N] : {std::pair{Density::uniform, std::size_t{5}}, std::pair{Density::gaussian, std::size_t{3}}}) {
    const auto t = recurrence_coefficients(fam, 2 * N);
    const double root = gauss_rule(t, N).nodes.front();
    const auto row = verify_oned_point(fam, N, root, "gauss_root", 9);
    EXPECT_LT(row.gauss_node_error, 1e-10);
    EXPECT_TRUE(row.pass);
  }
}

TEST(VerifyOned, ReportPassesAndSerializes) {
  const auto report = verify_oned(Density::gaussian, 6, 3, 5);
  EXPECT_TRUE(report.all_pass());
  const std::string csv = to_csv(report);
  EXPECT_NE(csv.find("N,start,y,kappa"), std::string::npos);
  EXPECT_EQ(csv.find("FAIL"), std::string::npos);
  EXPECT_THROW(verify_oned(Density::uniform, 41), PreconditionError);
}
