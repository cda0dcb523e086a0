#include "ruin/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ruin/asymptotics.hpp"
#include "ruin/csv.hpp"
#include "ruin/errors.hpp"
#include "ruin/gp_sim.hpp"
#include "ruin/levy.hpp"
#include "ruin/psi.hpp"

namespace ruin {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  return out;
}

KernelSpec kernel_from_config(ConfigReader& comp) {
  const std::string family = comp.string("family");
  try {
    if (family == "fbm") return KernelSpec::fbm(comp.number("H"));
    if (family == "sub_fbm") return KernelSpec::sub_fbm(comp.number("H"));
    if (family == "bi_fbm") return KernelSpec::bi_fbm(comp.number("K"), comp.number("H"));
    if (family == "time_changed_bm") return KernelSpec::time_changed_bm(comp.number("H"));
    if (family == "time_avg_fbm") return KernelSpec::time_avg_fbm(comp.number("H"));
    if (family == "tabulated")
      return KernelSpec::tabulated(TabulatedCov::from_csv(comp.string("csv")));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key '" + comp.path_of("family") + "' section: " + e.what());
  }
  comp.fail("family", "unknown kernel family '" + family + "'");
}

Trend trend_from_config(ConfigReader section) {
  const std::string kind = section.string_or("kind", "linear");
  if (kind == "linear") {
    const double rate = section.number_or("rate", 0.0);
    if (rate < 0.0) section.fail("rate", "premium rate must be >= 0");
    return Trend::linear(rate);
  }
  if (kind == "tabulated") {
    auto times = section.number_array("times");
    auto values = section.number_array("values");
    try {
      return Trend::tabulated(std::move(times), std::move(values));
    } catch (const std::invalid_argument& e) {
      section.fail("times", e.what());
    }
  }
  section.fail("kind", "unknown trend kind '" + kind + "'");
}

ConstantsProvider provider_from(ConfigReader& section, std::uint64_t seed, int workers) {
  const std::string mode = section.string_or("constants", "exact-only");
  if (mode == "exact-only") return ConstantsProvider(ConstantsProvider::Mode::ExactOnly);
  if (mode != "mc-fallback")
    section.fail("constants", "expected \"exact-only\" or \"mc-fallback\"");
  ConstantsBudget budget;
  budget.seed = seed;
  budget.workers = workers;
  return ConstantsProvider(ConstantsProvider::Mode::McFallback, budget);
}

struct OutputNaming {
  std::string dir;
  std::string prefix;
  std::string path(const std::string& stem) const {
    namespace fs = std::filesystem;
    return (fs::path(dir) / (prefix + "_" + stem)).string();
  }
};

void write_manifest(const OutputNaming& naming, const RunOptions& opts,
                    const std::string& config_text, std::uint64_t seed, double wall_seconds) {
  nlohmann::json manifest;
  manifest["command"] = opts.command;
  manifest["config_hash"] =
      "fnv1a64:" + std::to_string(fnv1a64(config_text));
  manifest["seed"] = seed;
  manifest["workers"] = opts.workers;
  manifest["version"] = kVersion;
  manifest["wall_time_s"] = wall_seconds;
  atomic_write_file(naming.path(opts.command + ".manifest.json"),
                    [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
}

}  // namespace

AggregateModel model_from_config(ConfigReader model) {
  AggregateModel out;
  out.horizon = model.number("T");
  if (!(out.horizon > 0.0)) model.fail("T", "horizon must be positive");
  if (auto trend = model.optional_table("trend")) out.trend = trend_from_config(*trend);
  auto comps = model.table_array("component");
  if (comps.empty()) throw ConfigError("config: [[model.component]] must appear at least once");
  for (auto& comp : comps) {
    WeightedKernel wk{comp.number_or("weight", 1.0), kernel_from_config(comp)};
    if (!(wk.weight > 0.0)) comp.fail("weight", "component weight must be positive");
    out.components.push_back(std::move(wk));
  }
  return out;
}

namespace {

void run_asym(ConfigReader& root, const RunOptions& opts, const OutputNaming& naming,
              std::uint64_t seed) {
  AggregateModel model = model_from_config(root.table("model"));
  ConfigReader section = root.table("asym");
  const std::vector<double> u_grid = section.number_array_or_scalar("u");
  const ConstantsProvider provider = provider_from(section, seed, opts.workers);
  AsymptoticOptions aopts;
  aopts.nu_fraction = section.number_or("nu_fraction", 0.5);
  aopts.expansion.delta_fraction = section.number_or("delta_fraction", 0.1);
  root.finish();

  std::vector<AsymptoticResult> results;
  for (double u : u_grid) results.push_back(ruin_asymptotic(model, u, provider, aopts));

  atomic_write_file(naming.path("asym.csv"), [&](std::ostream& os) {
    os << "u,tail_arg,regime,constant,theta,value,log_value,provenance,log10_value\n";
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
      const auto& r = results[i];
      os << format_double(u_grid[i]) << ',' << format_double(r.tail_arg) << ','
         << regime_name(r.regime) << ',' << format_double(r.constant) << ','
         << format_double(r.theta) << ',' << format_double(r.value) << ','
         << format_double(r.log_value) << ',' << constant_provenance_name(r.provenance) << ','
         << format_double(r.log_value / std::log(10.0)) << '\n';
    }
  });
  for (std::size_t i = 0; i < u_grid.size(); ++i)
    if (results[i].tail_arg < 3.0)
      std::cerr << "warning: u=" << u_grid[i] << " has tail_arg=" << results[i].tail_arg
                << " < 3; the first-order asymptotic makes no accuracy claim this far from the tail\n";
}

void append_estimate_row(std::ostream& os, double u, const SimulationEstimate& est) {
  os << format_double(u) << ',' << est.method << ',' << est.grid_m << ',' << est.n << ','
     << format_double(est.value) << ',' << format_double(est.std_error) << ','
     << format_double(est.ci_lo) << ',' << format_double(est.ci_hi) << ','
     << (std::isnan(est.ess) ? std::string() : format_double(est.ess)) << ',' << est.seed << ','
     << format_double(std::log10(est.value)) << '\n';
}

void run_simulate(ConfigReader& root, const RunOptions& opts, const OutputNaming& naming,
                  std::uint64_t seed) {
  AggregateModel model = model_from_config(root.table("model"));
  ConfigReader section = root.table("simulate");
  const std::vector<double> u_grid = section.number_array_or_scalar("u");
  const std::string method = section.string_or("method", "crude");
  if (method != "crude" && method != "importance" && method != "both")
    section.fail("method", "expected \"crude\", \"importance\" or \"both\"");
  const std::size_t m = static_cast<std::size_t>(section.integer_or("m", 4096));
  const std::size_t n = static_cast<std::size_t>(section.integer("n"));
  if (section.has("seed")) {
    const auto s = static_cast<std::uint64_t>(section.integer("seed"));
    if (!opts.seed_override) seed = s;
  }
  std::vector<std::size_t> levels;
  if (section.has("levels"))
    for (double lvl : section.number_array("levels")) levels.push_back(static_cast<std::size_t>(lvl));
  const double kappa = section.number_or("extrapolate_kappa", 0.0);
  const std::string dump = section.string_or("dump", "");
  root.finish();

  std::ostringstream body;
  for (double u : u_grid) {
    if (method == "crude" || method == "both") {
      GridPlan grid{m, {}};
      CrossingOptions copts;
      copts.workers = opts.workers;
      copts.dump_path = dump.empty() ? std::string() : naming.path(dump);
      const CrossingResult res = crossing_prob_mc(model, u, grid, n, seed, copts);
      append_estimate_row(body, u, res.fine);
      if (kappa > 0.0)
        append_estimate_row(
            body, u, crossing_prob_extrapolated(model, u, m, kappa, n, seed, opts.workers));
    }
    if (method == "importance" || method == "both") {
      GridPlan grid{m, {}};
      append_estimate_row(body, u, crossing_prob_is(model, u, grid, n, seed, opts.workers));
    }
  }

  atomic_write_file(naming.path("simulate.csv"), [&](std::ostream& os) {
    os << "u,method,m,n,p_hat,stderr,ci_lo,ci_hi,ess,seed,log10_p_hat\n" << body.str();
  });

  if (!levels.empty()) {
    if (u_grid.size() != 1)
      section.fail("levels", "convergence studies need a single u value");
    const ConvergenceStudy study =
        convergence_study(model, u_grid.front(), levels, n, seed, opts.workers);
    atomic_write_file(naming.path("convergence.csv"),
                      [&](std::ostream& os) { os << study.to_csv(); });
  }
}

void run_constants(ConfigReader& root, const RunOptions& opts, const OutputNaming& naming,
                   std::uint64_t seed) {
  ConfigReader section = root.table("constants");
  const std::string kind = section.string("kind");
  if (kind != "pickands" && kind != "piterbarg")
    section.fail("kind", "expected \"pickands\" or \"piterbarg\"");
  const std::vector<double> alphas = section.number_array_or_scalar("alpha");
  std::vector<double> rs;
  if (kind == "piterbarg") rs = section.number_array_or_scalar("R");
  const double S = section.number_or("S", 0.0);
  const int m = static_cast<int>(section.integer_or("m", 128));
  const std::size_t reps = static_cast<std::size_t>(section.integer_or("reps", 400000));
  if (section.has("seed")) {
    const auto s = static_cast<std::uint64_t>(section.integer("seed"));
    if (!opts.seed_override) seed = s;
  }
  root.finish();

  std::ostringstream body;
  auto emit = [&](const std::string& k, double alpha, double R, const SimulationEstimate& est) {
    body << k << ',' << format_double(alpha) << ','
         << (kind == "piterbarg" ? format_double(R) : std::string()) << ','
         << format_double(est.value) << ',' << format_double(est.std_error) << ",MC_ESTIMATE,"
         << '"' << join_flags(est.flags) << '"' << '\n';
  };
  for (double alpha : alphas) {
    if (kind == "pickands") {
      const double horizon = S > 0.0 ? S : default_pickands_horizon(alpha);
      emit("pickands", alpha, 0.0,
           pickands_estimate(alpha, horizon, m, reps, seed, opts.workers));
    } else {
      for (double r : rs)
        emit("piterbarg", alpha, r,
             piterbarg_estimate(alpha, r, S > 0.0 ? S : 10.0, m, reps, seed, opts.workers));
    }
  }

  const std::string header = "kind,alpha,R,value,stderr,provenance,settings\n";
  atomic_write_file(naming.path("constants.csv"),
                    [&](std::ostream& os) { os << header << body.str(); });
  std::cout << header << body.str();
}

PerturbedModel perturbed_model_from(ConfigReader& root) {
  ConfigReader levy = root.table("levy");
  const std::string kind = levy.string("kind");
  const double premium = levy.number_or("premium_rate", 0.0);
  if (premium < 0.0) levy.fail("premium_rate", "premium rate must be >= 0");
  PerturbedModel model;
  try {
    if (kind == "compound_poisson") {
      const std::string claim = levy.string_or("claim", "weibull");
      if (claim != "weibull") levy.fail("claim", "only \"weibull\" claims are supported here");
      model.levy = LevyModel::compound_poisson(levy.number("mu"),
                                               ClaimDist::weibull(levy.number("tau")), premium);
    } else if (kind == "stable") {
      model.levy =
          LevyModel::alpha_stable(levy.number("alpha"), levy.number_or("beta", 0.0), premium);
    } else {
      levy.fail("kind", "expected \"compound_poisson\" or \"stable\"");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config section '[levy]': " + std::string(e.what()));
  }
  const double levy_T = levy.number_or("T", 0.0);
  if (root.has_table("model")) {
    model.gaussian = model_from_config(root.table("model"));
    model.horizon = model.gaussian->horizon;
  } else {
    if (!(levy_T > 0.0))
      levy.fail("T", "a positive horizon is required when there is no [model] perturbation");
    model.horizon = levy_T;
  }
  return model;
}

void run_perturbed(ConfigReader& root, const RunOptions& opts, const OutputNaming& naming,
                   std::uint64_t seed) {
  PerturbedModel model = perturbed_model_from(root);
  ConfigReader section = root.table("perturbed");
  ReportBudget budget;
  budget.m = static_cast<std::size_t>(section.integer_or("m", 4096));
  budget.n = static_cast<std::size_t>(section.integer("n"));
  budget.seed = seed;
  if (section.has("seed")) {
    const auto s = static_cast<std::uint64_t>(section.integer("seed"));
    if (!opts.seed_override) budget.seed = s;
  }
  budget.workers = opts.workers;
  const std::vector<double> u_grid = section.number_array_or_scalar("u");
  const ConstantsProvider provider = provider_from(section, budget.seed, opts.workers);
  root.finish();

  const TailEquivalenceReport report = tail_equivalence_report(model, u_grid, budget, provider);
  atomic_write_file(naming.path("perturbed.csv"),
                    [&](std::ostream& os) { os << report.to_csv(); });
  if (!report.banner.empty()) std::cerr << report.banner << '\n';
}

void run_report(ConfigReader& root, const RunOptions& opts, const OutputNaming& naming,
                std::uint64_t seed) {
  AggregateModel model = model_from_config(root.table("model"));
  ConfigReader section = root.table("report");
  const double u = section.number("u");
  std::vector<std::size_t> levels;
  for (double lvl : section.number_array("levels"))
    levels.push_back(static_cast<std::size_t>(lvl));
  const std::size_t n = static_cast<std::size_t>(section.integer("n"));
  if (section.has("seed")) {
    const auto s = static_cast<std::uint64_t>(section.integer("seed"));
    if (!opts.seed_override) seed = s;
  }
  root.finish();

  const ConvergenceStudy study = convergence_study(model, u, levels, n, seed, opts.workers);
  atomic_write_file(naming.path("report.csv"), [&](std::ostream& os) { os << study.to_csv(); });
}

}  // namespace

void run_experiment(const RunOptions& opts) {
  if (opts.format != "csv")
    throw ConfigError("unsupported output format '" + opts.format + "' (only csv)");
  std::ifstream cf(opts.config_path, std::ios::binary);
  if (!cf) throw IoError("cannot open config file: " + opts.config_path);
  std::ostringstream ss;
  ss << cf.rdbuf();
  const std::string config_text = ss.str();

  const ConfigTable table = parse_config_text(config_text);
  ConfigReader root(table);

  std::uint64_t seed = 0;
  if (opts.seed_override) {
    seed = *opts.seed_override;
    if (root.has("seed")) root.integer("seed");  // consumed; flag wins
  } else if (root.has("seed")) {
    seed = static_cast<std::uint64_t>(root.integer("seed"));
  }

  OutputNaming naming{opts.out_dir, root.string_or("prefix", "run")};
  const auto t0 = std::chrono::steady_clock::now();

  if (opts.command == "asym")
    run_asym(root, opts, naming, seed);
  else if (opts.command == "simulate")
    run_simulate(root, opts, naming, seed);
  else if (opts.command == "constants")
    run_constants(root, opts, naming, seed);
  else if (opts.command == "perturbed")
    run_perturbed(root, opts, naming, seed);
  else if (opts.command == "report")
    run_report(root, opts, naming, seed);
  else
    throw ConfigError("unknown command '" + opts.command + "'");

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(naming, opts, config_text, seed, wall);
}

int run_experiment_exit_code(const RunOptions& opts) {
  try {
    run_experiment(opts);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace ruin
