// Command-line front end.
//
//   cfp design          build one design (CFP, AFP or MC) and print it as JSON
//   cfp study cond      condition numbers against degree
//   cfp study approx    least-squares validation error against degree
//   cfp study elliptic  same, for the parameterized diffusion problem
//   cfp verify oned     one-dimensional optimality report
//
// Every subcommand accepts --config FILE: one `key = value` per line, keys are
// long flag names without the leading dashes, `#` starts a comment. Values on
// the command line override the file.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfp/cfp.hpp"

namespace {

struct Outputs {
  std::string path;
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Reads `key = value` lines into "--key value" tokens.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value == "true") {
      tokens.push_back("--" + key);
    } else if (value != "false") {
      tokens.push_back("--" + key);
      tokens.push_back(value);
    }
  }
  return tokens;
}

/// Splices config-file tokens in after the subcommand words so that flags
/// given on the command line come later and win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      from_file = config_tokens(args[i + 1]);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      from_file = config_tokens(args[i].substr(9));
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  std::size_t pos = 0;
  while (pos < args.size() && !args[pos].empty() && args[pos][0] != '-') ++pos;
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos), from_file.begin(), from_file.end());
  return args;
}

struct StudyFlags {
  std::string family = "uniform";
  std::string index = "TD";
  std::string methods = "cfp,afp,mc";
  cfp::StudyConfig cfg;

  void add_to(CLI::App* app) {
    app->add_option("--family", family, "uniform | gaussian")->capture_default_str();
    app->add_option("--dim", cfg.dim, "parameter dimension")->capture_default_str();
    app->add_option("--index", index, "TD | HC")->capture_default_str();
    app->add_option("--degree-min", cfg.degree_min)->capture_default_str();
    app->add_option("--degree-max", cfg.degree_max)->capture_default_str();
    app->add_option("--oversampling", cfg.oversampling, "M = ceil(factor * N)")->capture_default_str();
    app->add_option("--trials", cfg.trials)->capture_default_str();
    app->add_option("--candidates", cfg.candidates, "candidate set size (even)")->capture_default_str();
    app->add_option("--seed", cfg.seed)->capture_default_str();
    app->add_option("--methods", methods, "comma-separated subset of cfp,afp,mc")->capture_default_str();
    app->add_option("--validation-samples", cfg.validation_samples)->capture_default_str();
    app->add_flag("--seed-level-set", cfg.seed_level_set, "d = 1: put the Gauss nodes first in every candidate set");
    app->add_option("--threads", cfg.threads, "0 = hardware concurrency")->capture_default_str();
  }

  cfp::StudyConfig resolve() {
    cfg.family = cfp::parse_density(family);
    cfg.index_rule = cfp::parse_index_rule(index);
    cfg.methods.clear();
    std::stringstream ss(methods);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.methods.push_back(cfp::parse_method(trim(item)));
    cfg.elliptic.dim = cfg.dim;
    return cfg;
  }
};

nlohmann::json echo(const cfp::StudyConfig& c) {
  return {{"family", std::string(cfp::to_string(c.family))},
          {"dim", c.dim},
          {"index", std::string(cfp::to_string(c.index_rule))},
          {"candidates", c.candidates},
          {"seed", c.seed},
          {"oversampling", c.oversampling}};
}

int run_design(StudyFlags& flags, int degree, std::size_t samples, const std::string& method_name,
               const std::string& fit, const std::string& out) {
  auto cfg = flags.resolve();
  const auto method = cfp::parse_method(method_name);
  const auto lambda = cfp::make_index_set(cfg.index_rule, cfg.dim, degree);
  const std::size_t M = samples > 0 ? samples : cfp::oversampled_count(lambda.size(), cfg.oversampling);
  if (M < lambda.size()) throw cfp::PreconditionError("design: need at least N samples");
  const auto enriched = M > lambda.size() ? cfp::enrich(lambda, M - lambda.size()) : lambda;

  nlohmann::json j;
  cfp::DesignResult r;
  if (method == cfp::Method::mc) {
    cfp::Rng rng(cfp::derive_seed(cfg.seed, {0x3C}));
    r.points = cfp::sample_density(cfg.family, cfg.dim, M, rng);
    r.space = cfp::Space::P;
    r.condition = cfp::condition_number(cfp::vandermonde(cfp::ProductBasis::make(cfg.family, lambda), r.points, r.space));
    j = r;
  } else {
    const auto cands = cfp::candidate_set(cfg.family, cfg.dim, cfg.candidates, enriched.max_total_degree(), cfg.seed);
    const auto basis = cfp::ProductBasis::make(cfg.family, enriched);
    r = method == cfp::Method::cfp ? cfp::cfp_select(cands, basis, M) : cfp::afp_select(cands, basis, M);
    j = r;
  }
  const auto space = method == cfp::Method::cfp ? cfp::Space::Q : cfp::Space::P;
  const double kappa = cfp::condition_number(cfp::vandermonde(cfp::ProductBasis::make(cfg.family, lambda), r.points, space));
  j["method"] = std::string(cfp::to_string(method));
  j["degree"] = degree;
  j["N"] = lambda.size();
  j["M"] = M;
  j["indices"] = lambda;
  j["enriched_indices"] = enriched;
  j["condition_number_lambda"] = std::isfinite(kappa) ? nlohmann::json(kappa) : nlohmann::json("inf");
  j["seed"] = cfg.seed;
  j["config"] = echo(cfg);
  j["version"] = std::string(cfp::kVersion);

  if (!fit.empty()) {
    const auto target = cfp::parse_target(fit);
    const auto f = cfp::make_target(target, cfg.elliptic);
    std::vector<double> fv;
    for (const auto& p : r.points) fv.push_back(f(p));
    const auto basis = cfp::ProductBasis::make(cfg.family, lambda);
    const auto s = method == cfp::Method::cfp ? cfp::solve_weighted(basis, r.points, fv)
                                              : cfp::solve_unweighted(basis, r.points, fv);
    j["surrogate"] = s;
    j["surrogate"]["target"] = fit;
    j["surrogate"]["validation_error"] =
        cfp::validation_error(s, f, cfg.family, cfg.validation_samples, cfp::derive_seed(cfg.seed, {0x7A1}));
  }
  write_output(out, j.dump(2) + "\n");
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Christoffel-weighted approximate Fekete point designs for weighted least squares"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", std::string(cfp::kVersion));
  std::string config_path;
  app.add_option("--config", config_path, "key = value file; command-line flags override it");

  // design
  auto* design = app.add_subcommand("design", "select one sample design and print it as JSON");
  StudyFlags design_flags;
  design_flags.add_to(design);
  int design_degree = 3;
  std::size_t design_samples = 0;
  std::string design_method = "cfp", design_fit, design_out;
  design->add_option("--degree", design_degree)->capture_default_str();
  design->add_option("--samples", design_samples, "sample count M (default ceil(oversampling * N))");
  design->add_option("--method", design_method, "cfp | afp | mc")->capture_default_str();
  design->add_option("--fit", design_fit, "also fit a surrogate to this target");
  design->add_option("--sigma", design_flags.cfg.elliptic.sigma)->capture_default_str();
  design->add_option("--grid-points", design_flags.cfg.elliptic.grid_points)->capture_default_str();
  design->add_option("--out", design_out, "output file (default stdout)");

  // study
  auto* study = app.add_subcommand("study", "degree sweeps written as long-format CSV");
  study->require_subcommand(1);
  auto* cond = study->add_subcommand("cond", "condition number of the least-squares matrix");
  auto* approx = study->add_subcommand("approx", "validation error of the least-squares surrogate");
  auto* ell = study->add_subcommand("elliptic", "validation error on the diffusion benchmark");
  StudyFlags cond_flags, approx_flags, ell_flags;
  std::string cond_out, approx_out, ell_out, approx_target = "exp_negsumsq";
  cond_flags.add_to(cond);
  approx_flags.add_to(approx);
  ell_flags.add_to(ell);
  cond->add_option("--out", cond_out);
  approx->add_option("--out", approx_out);
  approx->add_option("--target", approx_target, "exp_negsumsq | exp_negsum | linear | elliptic")->capture_default_str();
  approx->add_option("--sigma", approx_flags.cfg.elliptic.sigma)->capture_default_str();
  approx->add_option("--grid-points", approx_flags.cfg.elliptic.grid_points)->capture_default_str();
  ell->add_option("--out", ell_out);
  ell->add_option("--sigma", ell_flags.cfg.elliptic.sigma)->capture_default_str();
  ell->add_option("--grid-points", ell_flags.cfg.elliptic.grid_points)->capture_default_str();

  // verify
  auto* verify = app.add_subcommand("verify", "executable checks of the optimality theory");
  verify->require_subcommand(1);
  auto* oned = verify->add_subcommand("oned", "level-set designs, quadrature exactness, Gauss-node recovery");
  std::string oned_family = "uniform", oned_out;
  std::size_t oned_nmax = 10, oned_sweep = 7;
  std::uint64_t oned_seed = 1;
  bool oned_strict = false;
  oned->add_option("--family", oned_family)->capture_default_str();
  oned->add_option("--n-max", oned_nmax, "largest N (<= 40)")->capture_default_str();
  oned->add_option("--sweep", oned_sweep, "generic starting points per N")->capture_default_str();
  oned->add_option("--seed", oned_seed)->capture_default_str();
  oned->add_flag("--strict", oned_strict, "exit with status 1 if any row fails");
  oned->add_option("--out", oned_out);

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (design->parsed()) return run_design(design_flags, design_degree, design_samples, design_method, design_fit, design_out);
    if (cond->parsed()) write_output(cond_out, cfp::study_condition(cond_flags.resolve()));
    if (approx->parsed()) {
      const auto target = cfp::parse_target(approx_target);
      auto cfg = approx_flags.resolve();
      write_output(approx_out, cfp::study_approx(cfg, target));
    }
    if (ell->parsed()) write_output(ell_out, cfp::study_approx(ell_flags.resolve(), cfp::Target::elliptic));
    if (oned->parsed()) {
      const auto report = cfp::verify_oned(cfp::parse_density(oned_family), oned_nmax, oned_seed, oned_sweep);
      write_output(oned_out, cfp::to_csv(report));
      if (oned_strict && !report.all_pass()) return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
