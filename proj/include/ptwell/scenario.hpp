#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ptwell/agmon.hpp"
#include "ptwell/bifurcation.hpp"
#include "ptwell/operator.hpp"
#include "ptwell/potentials.hpp"
#include "ptwell/reduction.hpp"
#include "ptwell/spectra.hpp"

namespace ptwell {

/// Parsed INI scenario. Sections: [potential] [domain] [semiclassical] [fill]
/// [window] [reference] [epsilon] [tolerances] [output].
struct ScenarioConfig {
  std::string family = "quartic1d";  // quartic1d | quartic2d | tabulated
  double well_position = 1.0;
  double shift = 0.0;
  double omega_y = 1.0;
  double w_scale = 1.0;
  std::filesystem::path table;  // tabulated only
  Reflection reflection;

  Box box;
  std::vector<int> nodes;

  std::vector<double> h_values;
  double delta = 0.2;

  // Unset center/radius mean "auto": centre at mu~, radius gap/2.
  std::optional<double> window_center;
  std::optional<double> window_radius;
  int contour_nodes = 32;

  int reference_index = 0;

  std::optional<double> eps_max;  // unset: top of the geometric grid
  double radius_fraction = 0.1;    // eps_max <= radius_fraction * window radius
  int points_per_side = 4;
  double span = 2.0;  // geometric grid covers predicted * span^(+-1)
  double small_eps_fraction = 0.1;

  double bisection_tolerance = 1e-4;
  double imaginary_floor = 1e-9;
  int spot_checks = 3;

  std::string output_dir;
  std::uint64_t seed = 0x5eed5eedULL;

  std::uint64_t hash = 0;  // FNV-1a of the config bytes
  std::string name;        // file stem

  std::string hash_hex() const;
};

/// Throws ConfigInvalid (all field problems in one message) or IoError.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

std::uint64_t fnv1a(const std::string& bytes);

/// h-independent part of a scenario.
struct Geometry {
  PotentialSpec spec;
  Grid box_grid;
  Grid grid;  // unknowns
  RealField v0;
  RealField w;
  std::vector<std::size_t> parity;
  SymmetryReport symmetry;
  WellPair wells;
  AgmonField from_plus;
  AgmonField from_minus;
  double s0 = 0.0;
  FillSpec fill;
  double essential_threshold = 0.0;
};

Geometry build_geometry(const ScenarioConfig& cfg);

/// Everything at one value of h up to the unperturbed doublet.
struct Problem {
  double h = 0.0;
  std::shared_ptr<const OperatorFamily> family;
  OperatorMatrix p_tilde;
  ReferenceSolution reference;
  SpectralWindow window;
  UnperturbedBasis basis;
  WeightIntegral weight;
  double predicted = 0.0;

  Doublet doublet() const;
};

Problem build_problem(const ScenarioConfig& cfg, const Geometry& geometry, double h);

/// Sweep grid for the problem; throws ConfigInvalid if eps_max exceeds a
/// tenth of the window radius.
std::vector<double> sweep_epsilons(const ScenarioConfig& cfg, const Problem& problem);

SweepOptions sweep_options(const ScenarioConfig& cfg, int threads);

}  // namespace ptwell
