// Command-line front end: ptwell agmon|spectrum|reduce|bifurcate|sweep-h --config <path>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ptwell/agmon.hpp"
#include "ptwell/bifurcation.hpp"
#include "ptwell/errors.hpp"
#include "ptwell/report.hpp"
#include "ptwell/scenario.hpp"

namespace fs = std::filesystem;
using namespace ptwell;

namespace {

struct Options {
  std::string config;
  std::string out;
  int threads = 1;
  std::vector<double> h;
  std::optional<double> eps;
};

fs::path output_dir(const Options& o, const ScenarioConfig& cfg) {
  if (!o.out.empty()) return o.out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("PTWELL_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "ptwell-out";
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cli", fmt::format("cannot write '{}'", path.string()));
  return out;
}

std::string h_tag(double h) { return fmt::format("h{}", h); }

std::vector<double> h_values(const Options& o, const ScenarioConfig& cfg) { return o.h.empty() ? cfg.h_values : o.h; }

int cmd_agmon(const ScenarioConfig& cfg, const fs::path& dir) {
  const Geometry g = build_geometry(cfg);
  auto csv = open_output(dir / (cfg.name + "_agmon.csv"));
  write_agmon_csv(csv, cfg, g);
  const double diam_plus = well_diameter(g.grid, g.v0, g.wells.plus);
  std::cout << "config_hash = " << cfg.hash_hex() << '\n'
            << "S0 = " << format_number(g.s0) << '\n'
            << "well_plus_cells = " << g.wells.plus.cells.size() << '\n'
            << "well_minus_cells = " << g.wells.minus.cells.size() << '\n'
            << "well_diameter = " << format_number(diam_plus) << '\n'
            << "fill_strength = " << format_number(g.fill.fill_strength) << '\n'
            << "essential_threshold = " << format_number(g.essential_threshold) << '\n';
  return 0;
}

int cmd_spectrum(const ScenarioConfig& cfg, const Options& o, const fs::path& dir) {
  const Geometry g = build_geometry(cfg);
  for (double h : h_values(o, cfg)) {
    const Problem p = build_problem(cfg, g, h);
    std::vector<std::pair<double, std::vector<EigenPair>>> spectra;
    for (double eps : sweep_epsilons(cfg, p)) spectra.emplace_back(eps, eigs_window(p.family->at(eps), p.window));
    auto csv = open_output(dir / fmt::format("{}_spectrum_{}.csv", cfg.name, h_tag(h)));
    write_spectrum_csv(csv, cfg, h, spectra);
    write_summary(std::cout, cfg, g, p, nullptr);
  }
  return 0;
}

int cmd_reduce(const ScenarioConfig& cfg, const Options& o, const fs::path& dir) {
  const Geometry g = build_geometry(cfg);
  for (double h : h_values(o, cfg)) {
    const Problem p = build_problem(cfg, g, h);
    const double eps = o.eps.value_or(0.5 * p.predicted);
    const ReducedModel m = reduce_at(p.doublet(), eps);
    const auto [lp, lm] = reduced_eigenvalues(m.a, m.b);
    const auto direct = window_pair(p.family->at(eps), p.window);

    write_summary(std::cout, cfg, g, p, nullptr);
    std::cout << "eps = " << format_number(eps) << '\n';
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        std::cout << fmt::format("m{}{} = {} {}\n", j, k, format_number(m.matrix(j, k).real()),
                                 format_number(m.matrix(j, k).imag()));
      }
    }
    std::cout << "lambda_plus = " << format_number(lp.real()) << ' ' << format_number(lp.imag()) << '\n'
              << "lambda_minus = " << format_number(lm.real()) << ' ' << format_number(lm.imag()) << '\n'
              << "symmetry_residual = " << format_number(m.symmetry_residual) << '\n'
              << "biorthogonality_residual = " << format_number(m.biorthogonality_residual) << '\n'
              << "dual_condition = " << format_number(m.dual_condition) << '\n'
              << "subspace_error = " << format_number(matching_distance(m.matrix_eigenvalues(), direct)) << '\n';

    auto csv_file = open_output(dir / fmt::format("{}_reduce_{}.csv", cfg.name, h_tag(h)));
    CsvWriter csv(csv_file, cfg.hash_hex(),
                  {"h", "eps", "mu_tilde", "mu", "re_t", "im_t", "gap", "S0", "I_W", "re_a", "im_a", "re_b", "im_b",
                   "re_lambda_plus", "im_lambda_plus", "re_lambda_minus", "im_lambda_minus", "symmetry_residual",
                   "biorthogonality_residual"});
    csv.row({format_number(h), format_number(eps), format_number(p.reference.mu_tilde), format_number(p.basis.mu),
             format_number(p.basis.t.real()), format_number(p.basis.t.imag()), format_number(p.reference.gap),
             format_number(g.s0), format_number(p.weight.value), format_number(m.a.real()),
             format_number(m.a.imag()), format_number(m.b.real()), format_number(m.b.imag()),
             format_number(lp.real()), format_number(lp.imag()), format_number(lm.real()), format_number(lm.imag()),
             format_number(m.symmetry_residual), format_number(m.biorthogonality_residual)});
  }
  return 0;
}

// One bifurcation run per h; returns the ladder rows and whether all passed.
std::vector<LadderRow> run_bifurcations(const ScenarioConfig& cfg, const Options& o, const fs::path& dir) {
  const Geometry g = build_geometry(cfg);
  std::vector<LadderRow> ladder;
  for (double h : h_values(o, cfg)) {
    const Problem p = build_problem(cfg, g, h);
    const auto eps = sweep_epsilons(cfg, p);
    const BifurcationReport report = sweep(p.doublet(), eps, sweep_options(cfg, o.threads));

    auto csv = open_output(dir / fmt::format("{}_bifurcate_{}.csv", cfg.name, h_tag(h)));
    write_sweep_csv(csv, cfg, h, report);
    auto summary = open_output(dir / fmt::format("{}_summary_{}.txt", cfg.name, h_tag(h)));
    write_summary(summary, cfg, g, p, &report);
    write_summary(std::cout, cfg, g, p, &report);
    std::cout << '\n';

    for (const auto& c : report.checks) {
      if (!c.passed) {
        std::cerr << fmt::format("error module=bifurcation code=InvariantFailed message=h={} check={} value={} "
                                 "tolerance={}\n",
                                 h, c.name, format_number(c.value), format_number(c.tolerance));
      }
    }
    ladder.push_back({h, g.s0, std::abs(p.basis.t), p.weight.value, p.predicted, report.epsilon_plus_located,
                      report.epsilon_plus_direct, p.reference.mu_tilde, p.basis.mu, report.passed()});
  }
  return ladder;
}

bool all_passed(const std::vector<LadderRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const LadderRow& r) { return r.passed; });
}

int cmd_bifurcate(const ScenarioConfig& cfg, const Options& o, const fs::path& dir) {
  return all_passed(run_bifurcations(cfg, o, dir)) ? 0 : 1;
}

int cmd_sweep_h(const ScenarioConfig& cfg, const Options& o, const fs::path& dir) {
  const auto rows = run_bifurcations(cfg, o, dir);
  auto csv = open_output(dir / (cfg.name + "_sweep_h.csv"));
  write_ladder_csv(csv, cfg, rows);
  if (rows.size() >= 2) {
    std::vector<double> inv_h, log_t;
    for (const auto& r : rows) {
      inv_h.push_back(1.0 / r.h);
      log_t.push_back(std::log(r.abs_t));
    }
    const auto [slope, intercept] = linear_fit(inv_h, log_t);
    std::cout << "tunneling_slope = " << format_number(slope) << '\n'
              << "tunneling_intercept = " << format_number(intercept) << '\n'
              << "slope_over_S0 = " << format_number(-slope / rows.front().s0) << '\n';
  }
  return all_passed(rows) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PT-symmetric double-well reduction and symmetry-breaking threshold"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"agmon", "Agmon distances, wells and fill cut-offs on the grid"},
      {"spectrum", "window eigenvalues of P_eps over the sweep grid"},
      {"reduce", "2x2 interaction matrix at one eps"},
      {"bifurcate", "threshold sweep with all invariant checks"},
      {"sweep-h", "bifurcate over the h ladder and fit log|t| against 1/h"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "scenario INI file")->required();
    sub->add_option("--out", o.out, "output directory (default: config, then $PTWELL_OUTPUT_DIR)");
    sub->add_option("--threads", o.threads, "worker threads for independent sweep rows")->check(CLI::PositiveNumber);
    sub->add_option("--hbar", o.h, "override the semiclassical parameters h of the config");
    if (name == "reduce") sub->add_option("--eps", o.eps, "perturbation strength (default: half the prediction)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::cerr << "error module=cli code=UsageError message=" << e.what() << '\n';
    }
    return app.exit(e);
  }

  try {
    ScenarioConfig cfg = load_config(o.config);
    const fs::path dir = output_dir(o, cfg);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cli", fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "agmon") return cmd_agmon(cfg, dir);
    if (cmd == "spectrum") return cmd_spectrum(cfg, o, dir);
    if (cmd == "reduce") return cmd_reduce(cfg, o, dir);
    if (cmd == "bifurcate") return cmd_bifurcate(cfg, o, dir);
    return cmd_sweep_h(cfg, o, dir);
  } catch (const Error& e) {
    std::cerr << e.line() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error module=cli code=Internal message=" << e.what() << '\n';
    return 3;
  }
}
