#include "ptwell/report.hpp"

#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace ptwell {

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

CsvWriter::CsvWriter(std::ostream& out, std::string hash, const std::vector<std::string>& columns)
    : out_(out), hash_(std::move(hash)), width_(columns.size()) {
  out_ << "config_hash";
  for (const auto& c : columns) out_ << ',' << c;
  out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("CSV row width does not match the header");
  out_ << hash_;
  for (const auto& c : cells) out_ << ',' << c;
  out_ << '\n';
}

void write_agmon_csv(std::ostream& out, const ScenarioConfig& cfg, const Geometry& g) {
  std::vector<std::string> cols{"x"};
  if (g.grid.dimension() == 2) cols.push_back("y");
  for (const char* c : {"v0", "w", "d_plus", "d_minus", "chi_plus", "chi_minus", "well"}) cols.emplace_back(c);
  CsvWriter csv(out, cfg.hash_hex(), cols);

  std::vector<int> label(g.grid.size(), 0);
  for (auto c : g.wells.plus.cells) label[c] = 1;
  for (auto c : g.wells.minus.cells) label[c] = -1;
  for (std::size_t i = 0; i < g.grid.size(); ++i) {
    const Point p = g.grid.point(i);
    const auto k = static_cast<Eigen::Index>(i);
    std::vector<std::string> cells{format_number(p[0])};
    if (g.grid.dimension() == 2) cells.push_back(format_number(p[1]));
    for (double v : {g.v0[k], g.w[k], g.from_plus.values[k], g.from_minus.values[k], g.fill.chi_plus[k],
                     g.fill.chi_minus[k]}) {
      cells.push_back(format_number(v));
    }
    cells.push_back(std::to_string(label[i]));
    csv.row(cells);
  }
}

void write_spectrum_csv(std::ostream& out, const ScenarioConfig& cfg, double h,
                        const std::vector<std::pair<double, std::vector<EigenPair>>>& spectra) {
  CsvWriter csv(out, cfg.hash_hex(), {"h", "eps", "index", "re", "im", "residual"});
  for (const auto& [eps, pairs] : spectra) {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      csv.row({format_number(h), format_number(eps), std::to_string(k), format_number(pairs[k].value.real()),
               format_number(pairs[k].value.imag()), format_number(pairs[k].residual)});
    }
  }
}

void write_sweep_csv(std::ostream& out, const ScenarioConfig& cfg, double h, const BifurcationReport& report) {
  CsvWriter csv(out, cfg.hash_hex(),
                {"h", "eps", "re_a", "im_a", "re_b", "im_b", "discriminant", "re_lambda_plus", "im_lambda_plus",
                 "re_lambda_minus", "im_lambda_minus", "direct_re_1", "direct_im_1", "direct_re_2", "direct_im_2",
                 "verdict", "derived"});
  for (const auto& r : report.rows) {
    csv.row({format_number(h), format_number(r.epsilon), format_number(r.a.real()), format_number(r.a.imag()),
             format_number(r.b.real()), format_number(r.b.imag()), format_number(r.disc.value),
             format_number(r.lambda_plus.real()), format_number(r.lambda_plus.imag()),
             format_number(r.lambda_minus.real()), format_number(r.lambda_minus.imag()),
             format_number(r.direct[0].real()), format_number(r.direct[0].imag()), format_number(r.direct[1].real()),
             format_number(r.direct[1].imag()), to_string(r.verdict), r.derived ? "1" : "0"});
  }
}

void write_summary(std::ostream& out, const ScenarioConfig& cfg, const Geometry& g, const Problem& p,
                   const BifurcationReport* report) {
  auto kv = [&](const std::string& key, const std::string& value) { out << key << " = " << value << '\n'; };
  auto num = [&](const std::string& key, double v) { kv(key, format_number(v)); };
  kv("config_hash", cfg.hash_hex());
  kv("seed", std::to_string(cfg.seed));
  kv("potential", g.spec.name);
  kv("grid", g.grid.id());
  num("h", p.h);
  num("delta", cfg.delta);
  num("S0", g.s0);
  num("fill_strength", g.fill.fill_strength);
  num("essential_threshold", g.essential_threshold);
  num("window_center", p.window.center.real());
  num("window_radius", p.window.radius);
  kv("contour_nodes", std::to_string(p.window.contour_nodes));
  num("mu_tilde", p.reference.mu_tilde);
  num("reference_gap", p.reference.gap);
  num("reference_residual", p.reference.residual);
  num("mu", p.basis.mu);
  num("re_t", p.basis.t.real());
  num("im_t", p.basis.t.imag());
  num("abs_t", std::abs(p.basis.t));
  num("gram_condition", p.basis.gram_condition);
  num("orthonormality_residual", p.basis.orthonormality_residual);
  num("weight_integral", p.weight.value);
  for (const auto& w : p.weight.warnings) kv("warning", w);
  num("eps_plus_predicted", p.predicted);
  if (report == nullptr) return;
  num("eps_plus_located", report->epsilon_plus_located);
  num("eps_plus_direct", report->epsilon_plus_direct);
  num("bisection_tolerance", report->bisection_tolerance);
  num("imaginary_floor", report->imaginary_floor);
  num("energy_scale", report->scale);
  for (const auto& c : report->checks) {
    kv("check." + c.name,
       fmt::format("{} value={} tolerance={}", c.passed ? "pass" : "FAIL", format_number(c.value),
                   format_number(c.tolerance)));
  }
  kv("report", report->passed() ? "pass" : "FAIL");
}

void write_ladder_csv(std::ostream& out, const ScenarioConfig& cfg, const std::vector<LadderRow>& rows) {
  CsvWriter csv(out, cfg.hash_hex(),
                {"h", "S0", "abs_t", "I_W", "eps_plus_predicted", "eps_plus_located", "eps_plus_direct", "mu_tilde",
                 "mu", "report"});
  for (const auto& r : rows) {
    csv.row({format_number(r.h), format_number(r.s0), format_number(r.abs_t), format_number(r.weight),
             format_number(r.predicted), format_number(r.located), format_number(r.direct),
             format_number(r.mu_tilde), format_number(r.mu), r.passed ? "pass" : "FAIL"});
  }
}

std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit needs two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace ptwell
