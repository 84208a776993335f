#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ptwell/bifurcation.hpp"
#include "ptwell/scenario.hpp"

namespace ptwell {

/// Full-precision decimal text of a double ("{:.17g}").
std::string format_number(double v);

/// Header row plus rows; every row is prefixed with the config hash column.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::string hash, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
  std::string hash_;
  std::size_t width_;
};

/// Node table: coordinates, V0, W, Agmon distances, cut-offs.
void write_agmon_csv(std::ostream& out, const ScenarioConfig& cfg, const Geometry& g);

/// Window eigenvalues of P_eps for each eps.
void write_spectrum_csv(std::ostream& out, const ScenarioConfig& cfg, double h,
                        const std::vector<std::pair<double, std::vector<EigenPair>>>& spectra);

/// Sweep table with the columns of BifurcationReport rows.
void write_sweep_csv(std::ostream& out, const ScenarioConfig& cfg, double h, const BifurcationReport& report);

/// `key = value` block: scenario constants, thresholds and every check.
void write_summary(std::ostream& out, const ScenarioConfig& cfg, const Geometry& g, const Problem& p,
                   const BifurcationReport* report);

struct LadderRow {
  double h = 0.0;
  double s0 = 0.0;
  double abs_t = 0.0;
  double weight = 0.0;
  double predicted = 0.0;
  double located = 0.0;
  double direct = 0.0;
  double mu_tilde = 0.0;
  double mu = 0.0;
  bool passed = false;
};

void write_ladder_csv(std::ostream& out, const ScenarioConfig& cfg, const std::vector<LadderRow>& rows);

/// Least-squares slope and intercept of y against x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ptwell
