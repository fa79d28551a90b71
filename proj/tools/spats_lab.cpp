// Command-line front end: simulate homodyne data for the model states,
// reconstruct photon statistics, evaluate the nonclassicality criteria, and
// map the (nbar, eta) classification regions. Emits CSV/JSON artifacts only;
// plotting is left to external tools (see --gnuplot).

#include "spats/spats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoConvergence = 2;

struct RunConfig {
  std::string state = "spats(nbar=1.15, eta=0.62, dim=40)";
  long samples = 100000;
  std::uint64_t seed = 1;
  double k_max = 12.0;
  double k_step = 0.1;
  int dim = 25;
  double tol = 1e-9;
  int max_iter = 5000;
  int bins = 0;
  std::vector<std::string> criteria = {"wigner0", "rv1", "rv2", "klyshko", "ep"};
  std::string output_dir = ".";
  double sigma_threshold = 3.0;
  int resamples = 50;  // bootstrap and Monte Carlo noise resamples
  bool fast = false;

  json to_json() const {
    json j;
    j["state"] = state;
    j["samples"] = samples;
    j["seed"] = seed;
    j["k_grid"] = {{"max", k_max}, {"step", k_step}};
    j["tomography"] = {{"dim", dim}, {"tol", tol}, {"max_iter", max_iter}, {"bins", bins}};
    j["criteria"] = criteria;
    j["output_dir"] = output_dir;
    j["sigma_threshold"] = sigma_threshold;
    j["resamples"] = resamples;
    j["fast"] = fast;
    return j;
  }

  static RunConfig from_json(const json& j) {
    RunConfig c;
    c.state = j.value("state", c.state);
    c.samples = j.value("samples", c.samples);
    c.seed = j.value("seed", c.seed);
    if (j.contains("k_grid")) {
      c.k_max = j["k_grid"].value("max", c.k_max);
      c.k_step = j["k_grid"].value("step", c.k_step);
    }
    if (j.contains("tomography")) {
      c.dim = j["tomography"].value("dim", c.dim);
      c.tol = j["tomography"].value("tol", c.tol);
      c.max_iter = j["tomography"].value("max_iter", c.max_iter);
      c.bins = j["tomography"].value("bins", c.bins);
    }
    c.criteria = j.value("criteria", c.criteria);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.sigma_threshold = j.value("sigma_threshold", c.sigma_threshold);
    c.resamples = j.value("resamples", c.resamples);
    c.fast = j.value("fast", c.fast);
    return c;
  }

  spats::TomographyConfig tomography() const {
    return spats::TomographyConfig{.dim = dim, .tol = tol, .max_iter = max_iter, .bins = bins};
  }

  void validate() const {
    spats::StateDescriptor::parse(state);
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (k_max <= 0 || k_step <= 0 || k_step > k_max)
      throw std::invalid_argument("bad k grid");
    if (dim < 2 || max_iter < 1 || tol <= 0) throw std::invalid_argument("bad tomography config");
    if (sigma_threshold <= 0) throw std::invalid_argument("sigma threshold must be positive");
    if (resamples < 2) throw std::invalid_argument("resamples must be >= 2");
    for (const auto& c : criteria) spats::parse_criterion(c);
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, bool gnuplot) {
  cfg.validate();
  const auto d = spats::StateDescriptor::parse(cfg.state);
  const auto rho = spats::make_state(d);
  rho.validate();
  const auto ds = spats::sample_quadratures(rho, cfg.samples, cfg.seed, d);

  fs::create_directories(cfg.output_dir);
  const fs::path csv = fs::path(cfg.output_dir) / "quadratures.csv";
  spats::write_dataset(ds, csv.string());

  double mean = 0.0;
  for (double x : ds.samples) mean += x;
  mean /= static_cast<double>(ds.count());
  double var = 0.0;
  for (double x : ds.samples) var += (x - mean) * (x - mean);
  var /= static_cast<double>(ds.count());
  std::printf("wrote %s\n", csv.string().c_str());
  std::printf("count = %ld  mean = %.6g  variance = %.6g\n", ds.count(), mean, var);

  if (gnuplot) {
    write_text(fs::path(cfg.output_dir) / "quadratures.gp",
               "# gnuplot script: quadrature histogram\n"
               "set datafile separator ','\n"
               "binwidth = 0.05\n"
               "bin(x) = binwidth*floor(x/binwidth) + binwidth/2\n"
               "set boxwidth binwidth\n"
               "set style fill solid 0.4\n"
               "plot 'quadratures.csv' every ::1 using (bin($1)):(1.0) "
               "smooth freq with boxes title 'quadratures'\n");
  }
  return kExitOk;
}

int cmd_reconstruct(const std::string& data_path, const RunConfig& cfg) {
  const auto ds = spats::read_dataset(data_path);
  spats::DiagonalEstimate est = spats::maxlik_diagonal(ds, cfg.tomography());
  est.std_errors = spats::fisher_errors(est, ds);

  fs::create_directories(cfg.output_dir);
  const fs::path out = fs::path(cfg.output_dir) / "estimate.json";
  write_text(out, spats::estimate_to_json(est).dump(2) + "\n");
  std::printf("wrote %s\n", out.string().c_str());
  std::printf("iterations = %d  converged = %s  loglik = %.6f\n", est.iterations,
              est.converged ? "yes" : "no", est.loglik_trace.back());
  return est.converged ? kExitOk : kExitNoConvergence;
}

// Monte Carlo spread of the W(0) of a reconstructed state, at the dataset's
// source parameters. Mirrors the regions noise machinery.
double wigner0_sigma(const spats::StateDescriptor& d, const RunConfig& cfg) {
  spats::NoiseConfig ncfg;
  ncfg.samples = cfg.samples;
  ncfg.resamples = cfg.resamples;
  ncfg.seed = spats::derive_seed(cfg.seed, 0x5730);
  ncfg.fast = cfg.fast;
  ncfg.tomography.dim = cfg.dim;
  const auto model = spats::make_state(d);
  if (ncfg.fast) {
    spats::RVector p = model.populations().head(std::min(model.dim(), cfg.dim));
    p /= p.sum();
    double gp = 0.0, gbar = 0.0;
    for (long n = 0; n < p.size(); ++n) {
      const double g = spats::two_over_pi * (n % 2 == 0 ? 1.0 : -1.0);
      gp += g * g * p[n];
      gbar += g * p[n];
    }
    return std::sqrt(std::max(0.0, (gp - gbar * gbar) / static_cast<double>(cfg.samples)));
  }
  std::vector<double> values(ncfg.resamples);
  spats::parallel_for(ncfg.resamples, [&](long r) {
    const auto boot = spats::sample_quadratures(
        model, ncfg.samples, spats::derive_seed(ncfg.seed, static_cast<std::uint64_t>(r)));
    const auto est = spats::maxlik_diagonal(boot, ncfg.tomography);
    values[r] = spats::wigner_origin(est.as_state());
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (values.size() - 1));
}

int cmd_analyze(const std::string& data_path, const std::string& estimate_path,
                const RunConfig& cfg, bool wigner_grid_out) {
  cfg.validate();
  std::optional<spats::QuadratureDataset> ds;
  if (!data_path.empty()) ds = spats::read_dataset(data_path);
  std::optional<spats::DiagonalEstimate> est;
  if (!estimate_path.empty()) {
    std::ifstream in(estimate_path);
    if (!in) throw std::runtime_error("cannot open " + estimate_path);
    est = spats::estimate_from_json(json::parse(in));
  }

  std::vector<spats::CriterionReport> reports;
  const double tau = cfg.sigma_threshold;

  std::optional<spats::CharacteristicCurve> g_data, g_vac;
  const auto need_curves = [&] {
    if (g_data) return;
    if (!ds) throw std::invalid_argument("rv criteria need --data");
    const auto ks = spats::uniform_k_grid(cfg.k_max, cfg.k_step);
    g_data = spats::empirical_characteristic(*ds, ks);
    spats::CharacteristicCurve vac;
    vac.k_values = ks;
    for (double k : ks) {
      vac.g_values.push_back(spats::vacuum_characteristic(k));
      vac.std_errors.push_back(0.0);
    }
    g_vac = std::move(vac);
  };

  const auto need_estimate = [&](const char* who) -> const spats::DiagonalEstimate& {
    if (!est) throw std::invalid_argument(std::string(who) + " needs --estimate");
    return *est;
  };

  for (const auto& name : cfg.criteria) {
    const spats::Criterion c = spats::parse_criterion(name);
    switch (c) {
      case spats::Criterion::wigner0: {
        const auto& e = need_estimate("wigner0");
        double sigma = 0.0;
        if (ds && ds->source) {
          sigma = wigner0_sigma(*ds->source, cfg);
        } else if (ds) {
          const auto cov = spats::fisher_covariance(e, *ds);
          spats::RVector s(e.probabilities.size());
          for (long n = 0; n < s.size(); ++n)
            s[n] = spats::two_over_pi * (n % 2 == 0 ? 1.0 : -1.0);
          sigma = std::sqrt(std::max(0.0, s.dot(cov.covariance * s)));
        }
        reports.push_back(spats::wigner0_test(e.as_state(), sigma, tau));
        break;
      }
      case spats::Criterion::rv1:
        need_curves();
        reports.push_back(spats::rv_first_order(*g_data, *g_vac, tau));
        break;
      case spats::Criterion::rv2:
        need_curves();
        reports.push_back(spats::rv_second_order(*g_data, *g_vac, tau));
        break;
      case spats::Criterion::klyshko: {
        const auto& e = need_estimate("klyshko");
        if (ds) {
          const auto cov = spats::fisher_covariance(e, *ds);
          reports.push_back(spats::klyshko_B(e.as_state(), 0, cov.covariance, tau));
        } else {
          reports.push_back(spats::klyshko_B(e.as_state(), 0, e.std_errors, tau));
        }
        break;
      }
      case spats::Criterion::ep: {
        const auto& e = need_estimate("ep");
        double sigma = 0.0;
        if (ds)
          sigma = spats::ep_bootstrap_sigma(*ds, cfg.tomography(), cfg.resamples,
                                            spats::derive_seed(cfg.seed, 0xE9), 0);
        reports.push_back(spats::entanglement_potential(e.as_state(), sigma, 0, tau));
        break;
      }
    }
  }

  fs::create_directories(cfg.output_dir);
  json out = json::array();
  for (const auto& r : reports) out.push_back(r.to_json());
  const fs::path path = fs::path(cfg.output_dir) / "reports.json";
  write_text(path, out.dump(2) + "\n");

  std::printf("%-10s %12s %12s  %s\n", "criterion", "value", "sigma", "verdict");
  for (const auto& r : reports)
    std::printf("%-10s %12.6g %12.6g  %s\n", spats::to_string(r.criterion), r.value, r.sigma,
                spats::to_string(r.verdict));
  std::printf("wrote %s\n", path.string().c_str());

  if (wigner_grid_out && est) {
    const auto grid = spats::wigner_grid(est->as_state());
    const fs::path gpath = fs::path(cfg.output_dir) / "wigner_grid.csv";
    spats::write_grid_csv(grid, gpath.string());
    std::printf("wrote %s\n", gpath.string().c_str());
  }
  return kExitOk;
}

int cmd_regions(const std::string& criterion_name, const spats::GridSpec& grid,
                const RunConfig& cfg, int ep_dim, bool gnuplot) {
  const spats::Criterion c = spats::parse_criterion(criterion_name);
  if (c == spats::Criterion::rv1 || c == spats::Criterion::rv2) {
    std::fprintf(stderr,
                 "regions: criterion '%s' is not mappable; the rv criteria compare whole "
                 "curves against the vacuum reference and define no per-cell indicator. "
                 "Use one of: wigner0, klyshko, ep.\n",
                 criterion_name.c_str());
    return kExitUsage;
  }
  spats::NoiseConfig ncfg;
  ncfg.samples = cfg.samples;
  ncfg.resamples = cfg.resamples;
  ncfg.sigma_threshold = cfg.sigma_threshold;
  ncfg.fast = cfg.fast;
  ncfg.seed = cfg.seed;
  ncfg.ep_dim = ep_dim;
  ncfg.tomography.dim = cfg.dim;

  const auto map = spats::region_map(grid, c, ncfg);

  fs::create_directories(cfg.output_dir);
  const fs::path csv =
      fs::path(cfg.output_dir) / ("regions_" + std::string(spats::to_string(c)) + ".csv");
  spats::write_region_map(map, csv.string());
  std::printf("wrote %s\n", csv.string().c_str());

  if (gnuplot) {
    write_text(fs::path(cfg.output_dir) / ("regions_" + std::string(spats::to_string(c)) + ".gp"),
               "# gnuplot script: region map (0=classical, 1=grey, 2=black)\n"
               "set datafile separator ','\n"
               "set xlabel 'nbar'\nset ylabel 'eta'\nset view map\n"
               "lab(s) = (s eq 'classical') ? 0 : ((s eq 'grey') ? 1 : 2)\n"
               "splot 'regions_" + std::string(spats::to_string(c)) +
               ".csv' every ::1 using 1:2:(lab(strcol(3))) with points pt 5 ps 2 "
               "palette title ''\n");
  }
  return kExitOk;
}

int cmd_pipeline(const RunConfig& cfg, bool gnuplot) {
  cfg.validate();
  int rc = cmd_simulate(cfg, gnuplot);
  if (rc != kExitOk) return rc;
  const std::string csv = (fs::path(cfg.output_dir) / "quadratures.csv").string();
  const int rec = cmd_reconstruct(csv, cfg);
  const std::string est = (fs::path(cfg.output_dir) / "estimate.json").string();
  rc = cmd_analyze(csv, est, cfg, false);
  if (rc != kExitOk) return rc;
  return rec;  // propagate non-convergence
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;

  // config file first, flags override
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) {
        std::fprintf(stderr, "cannot open config file %s\n", argv[i + 1]);
        return kExitUsage;
      }
      try {
        cfg = RunConfig::from_json(json::parse(in));
      } catch (const std::exception& e) {
        std::fprintf(stderr, "bad config file: %s\n", e.what());
        return kExitUsage;
      }
    }
  }

  CLI::App app{"Photon-added thermal states: simulation, tomography and nonclassicality analysis"};
  app.require_subcommand(1);
  std::string config_path;
  bool dump_config = false;

  std::string data_path, estimate_path, criterion;
  bool gnuplot = false, wigner_grid_out = false;
  spats::GridSpec grid;
  int ep_dim = 18;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (flags override it)");
    sub->add_flag("--dump-config", dump_config, "print the effective config as JSON and exit");
    sub->add_option("--state", cfg.state, "state descriptor, e.g. \"spats(nbar=1.15, eta=0.62, dim=40)\"");
    sub->add_option("--samples", cfg.samples, "number of quadrature samples");
    sub->add_option("--seed", cfg.seed, "RNG seed");
    sub->add_option("--dim", cfg.dim, "reconstruction dimension");
    sub->add_option("--tol", cfg.tol, "EM convergence tolerance on max |dp|");
    sub->add_option("--max-iter", cfg.max_iter, "EM iteration cap");
    sub->add_option("--bins", cfg.bins, "histogram bins for the likelihood (0 = per-sample)");
    sub->add_option("--criteria", cfg.criteria, "criteria to evaluate")->delimiter(',');
    sub->add_option("--k-max", cfg.k_max, "characteristic-function grid maximum");
    sub->add_option("--k-step", cfg.k_step, "characteristic-function grid step");
    sub->add_option("--out", cfg.output_dir, "output directory");
    sub->add_option("--sigma-threshold", cfg.sigma_threshold, "verdict significance threshold");
    sub->add_option("--resamples", cfg.resamples, "bootstrap / Monte Carlo resamples");
    sub->add_flag("--fast", cfg.fast, "analytic noise propagation instead of Monte Carlo");
    sub->add_flag("--gnuplot", gnuplot, "also emit a gnuplot script");
  };

  auto* sim = app.add_subcommand("simulate", "draw homodyne quadrature samples from a model state");
  add_common(sim);

  auto* rec = app.add_subcommand("reconstruct", "maximum-likelihood photon statistics from a dataset");
  add_common(rec);
  rec->add_option("data", data_path, "quadrature CSV file")->required();

  auto* ana = app.add_subcommand("analyze", "evaluate nonclassicality criteria");
  add_common(ana);
  ana->add_option("--data", data_path, "quadrature CSV file");
  ana->add_option("--estimate", estimate_path, "estimate JSON file");
  ana->add_flag("--wigner-grid", wigner_grid_out, "export the reconstructed Wigner map CSV");

  auto* reg = app.add_subcommand("regions", "classify the (nbar, eta) plane for one criterion");
  add_common(reg);
  reg->add_option("--criterion", criterion, "wigner0 | klyshko | ep")->required();
  reg->add_option("--nbar-min", grid.nbar_min, "grid lower nbar");
  reg->add_option("--nbar-max", grid.nbar_max, "grid upper nbar");
  reg->add_option("--nbar-steps", grid.nbar_steps, "grid points along nbar");
  reg->add_option("--eta-min", grid.eta_min, "grid lower eta");
  reg->add_option("--eta-max", grid.eta_max, "grid upper eta");
  reg->add_option("--eta-steps", grid.eta_steps, "grid points along eta");
  reg->add_option("--ep-dim", ep_dim, "two-mode truncation for the entanglement potential");

  auto* pipe = app.add_subcommand("pipeline", "simulate, reconstruct and analyze in one go");
  add_common(pipe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (dump_config) {
    std::printf("%s\n", cfg.to_json().dump(2).c_str());
    return kExitOk;
  }

  try {
    if (sim->parsed()) return cmd_simulate(cfg, gnuplot);
    if (rec->parsed()) return cmd_reconstruct(data_path, cfg);
    if (ana->parsed()) return cmd_analyze(data_path, estimate_path, cfg, wigner_grid_out);
    if (reg->parsed()) return cmd_regions(criterion, grid, cfg, ep_dim, gnuplot);
    if (pipe->parsed()) return cmd_pipeline(cfg, gnuplot);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
