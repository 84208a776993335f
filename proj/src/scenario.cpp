#include "ptwell/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "ptwell/errors.hpp"

namespace ptwell {

namespace {

constexpr const char* kModule = "cli";

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"potential", {"family", "well_position", "shift", "omega_y", "w_scale", "table", "reflection_axis",
                     "reflection_center"}},
      {"domain", {"x", "y", "nodes"}},
      {"semiclassical", {"h"}},
      {"fill", {"delta"}},
      {"window", {"center", "radius", "contour_nodes"}},
      {"reference", {"index"}},
      {"epsilon", {"max", "radius_fraction", "points_per_side", "span", "small_fraction"}},
      {"tolerances", {"bisection", "imaginary_floor", "spot_checks"}},
      {"output", {"directory", "seed"}},
  };
  return keys;
}

// Field reader that accumulates problems instead of stopping at the first.
class Reader {
 public:
  explicit Reader(const boost::property_tree::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(boost::property_tree::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    std::string s = *v;
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    return s;
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    const auto text = raw(key);
    if (!text) return out;
    std::istringstream in(*text);
    std::string token;
    while (in >> token) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
        fail(key, fmt::format("'{}' is not a number", token));
        return {};
      }
      out.push_back(v);
    }
    return out;
  }

  // Unset or "auto" yields nullopt.
  std::optional<double> number(const std::string& key) {
    const auto text = raw(key);
    if (!text || *text == "auto") return std::nullopt;
    const auto v = numbers(key);
    if (v.size() != 1) {
      if (!v.empty()) fail(key, "expected a single number");
      return std::nullopt;
    }
    return v.front();
  }

  double number_or(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  int integer_or(const std::string& key, int fallback) {
    const auto v = number(key);
    if (!v) return fallback;
    if (*v != std::floor(*v)) fail(key, "expected an integer");
    return static_cast<int>(*v);
  }

  void fail(const std::string& key, const std::string& message) { errors_.push_back(key + ": " + message); }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  const boost::property_tree::ptree& tree_;
  std::vector<std::string> errors_;
};

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ScenarioConfig::hash_hex() const { return fmt::format("{:016x}", hash); }

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, kModule, fmt::format("cannot read config '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ScenarioConfig cfg = parse_config(buffer.str(), path.parent_path());
  cfg.name = path.stem().string();
  return cfg;
}

ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigInvalid, kModule, fmt::format("line {}: {}", e.line(), e.message()));
  }

  Reader r(tree);
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      r.fail(section, "unknown section");
      continue;
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) r.fail(section + "." + key, "unknown key");
    }
  }

  ScenarioConfig cfg;
  cfg.hash = fnv1a(text);

  cfg.family = r.raw("potential.family").value_or("quartic1d");
  cfg.well_position = r.number_or("potential.well_position", cfg.well_position);
  cfg.shift = r.number_or("potential.shift", cfg.shift);
  cfg.omega_y = r.number_or("potential.omega_y", cfg.omega_y);
  cfg.w_scale = r.number_or("potential.w_scale", cfg.w_scale);
  cfg.reflection.axis = r.integer_or("potential.reflection_axis", 0);
  cfg.reflection.center = r.number_or("potential.reflection_center", 0.0);
  if (const auto table = r.raw("potential.table")) {
    cfg.table = std::filesystem::path(*table);
    if (cfg.table.is_relative()) cfg.table = base_dir / cfg.table;
  }
  int dimension = 1;
  if (cfg.family == "quartic2d") {
    dimension = 2;
  } else if (cfg.family == "tabulated") {
    if (cfg.table.empty()) r.fail("potential.table", "required for the tabulated family");
    dimension = r.raw("domain.y") ? 2 : 1;
  } else if (cfg.family != "quartic1d") {
    r.fail("potential.family", fmt::format("unknown family '{}'", cfg.family));
  }
  if (cfg.reflection.axis < 0 || cfg.reflection.axis >= dimension) {
    r.fail("potential.reflection_axis", "outside the domain dimension");
  }

  const char* axis_keys[] = {"domain.x", "domain.y"};
  for (int k = 0; k < dimension; ++k) {
    const auto v = r.numbers(axis_keys[k]);
    if (v.size() != 2 || !(v[0] < v[1])) {
      r.fail(axis_keys[k], "expected 'min max' with min < max");
      cfg.box.extents.push_back({-1.0, 1.0});
    } else {
      cfg.box.extents.push_back({v[0], v[1]});
    }
  }
  if (dimension == 1 && r.raw("domain.y")) r.fail("domain.y", "given for a one-dimensional family");
  for (double n : r.numbers("domain.nodes")) {
    if (n != std::floor(n) || n < 5) r.fail("domain.nodes", "node counts must be integers >= 5");
    cfg.nodes.push_back(static_cast<int>(n));
  }
  if (static_cast<int>(cfg.nodes.size()) != dimension) {
    r.fail("domain.nodes", fmt::format("expected {} node count(s)", dimension));
  }

  cfg.h_values = r.numbers("semiclassical.h");
  if (cfg.h_values.empty()) r.fail("semiclassical.h", "at least one value of h is required");
  for (double h : cfg.h_values) {
    if (!(h > 0.0)) r.fail("semiclassical.h", "values must be positive");
  }

  cfg.delta = r.number_or("fill.delta", cfg.delta);
  if (!(cfg.delta > 0.0)) r.fail("fill.delta", "must be positive");

  cfg.window_center = r.number("window.center");
  cfg.window_radius = r.number("window.radius");
  if (cfg.window_center.has_value() != cfg.window_radius.has_value()) {
    r.fail("window", "center and radius must both be given or both be auto");
  }
  if (cfg.window_radius && !(*cfg.window_radius > 0.0)) r.fail("window.radius", "must be positive");
  cfg.contour_nodes = r.integer_or("window.contour_nodes", cfg.contour_nodes);
  if (cfg.contour_nodes < 4) r.fail("window.contour_nodes", "must be at least 4");

  cfg.reference_index = r.integer_or("reference.index", 0);
  if (cfg.reference_index < 0) r.fail("reference.index", "must be non-negative");

  cfg.eps_max = r.number("epsilon.max");
  if (cfg.eps_max && !(*cfg.eps_max > 0.0)) r.fail("epsilon.max", "must be positive");
  cfg.radius_fraction = r.number_or("epsilon.radius_fraction", cfg.radius_fraction);
  if (!(cfg.radius_fraction > 0.0 && cfg.radius_fraction <= 1.0)) {
    r.fail("epsilon.radius_fraction", "must lie in (0, 1]");
  }
  cfg.points_per_side = r.integer_or("epsilon.points_per_side", cfg.points_per_side);
  if (cfg.points_per_side < 1) r.fail("epsilon.points_per_side", "must be at least 1");
  cfg.span = r.number_or("epsilon.span", cfg.span);
  if (!(cfg.span > 1.0)) r.fail("epsilon.span", "must exceed 1");
  cfg.small_eps_fraction = r.number_or("epsilon.small_fraction", cfg.small_eps_fraction);
  if (!(cfg.small_eps_fraction >= 0.0 && cfg.small_eps_fraction < 0.5)) {
    r.fail("epsilon.small_fraction", "must lie in [0, 0.5)");
  }
  if (cfg.eps_max && cfg.window_radius && *cfg.eps_max > cfg.radius_fraction * *cfg.window_radius) {
    r.fail("epsilon.max", fmt::format("{} exceeds {} x window radius = {}", *cfg.eps_max, cfg.radius_fraction,
                                      cfg.radius_fraction * *cfg.window_radius));
  }

  cfg.bisection_tolerance = r.number_or("tolerances.bisection", cfg.bisection_tolerance);
  cfg.imaginary_floor = r.number_or("tolerances.imaginary_floor", cfg.imaginary_floor);
  if (!(cfg.bisection_tolerance > 0.0)) r.fail("tolerances.bisection", "must be positive");
  if (!(cfg.imaginary_floor > 0.0)) r.fail("tolerances.imaginary_floor", "must be positive");
  cfg.spot_checks = r.integer_or("tolerances.spot_checks", cfg.spot_checks);
  if (cfg.spot_checks < 0) r.fail("tolerances.spot_checks", "must be non-negative");

  cfg.output_dir = r.raw("output.directory").value_or("");
  if (const auto seed = r.raw("output.seed")) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(seed->data(), seed->data() + seed->size(), v);
    if (ec != std::errc() || ptr != seed->data() + seed->size()) {
      r.fail("output.seed", "expected an unsigned integer");
    } else {
      cfg.seed = v;
    }
  }

  if (!r.errors().empty()) {
    std::string joined;
    for (const auto& e : r.errors()) joined += (joined.empty() ? "" : "; ") + e;
    throw Error(ErrorCode::ConfigInvalid, kModule, joined);
  }
  return cfg;
}

Geometry build_geometry(const ScenarioConfig& cfg) {
  Geometry g;
  if (cfg.family == "quartic1d") {
    g.spec = quartic_1d(cfg.box, cfg.well_position, cfg.shift, cfg.w_scale);
  } else if (cfg.family == "quartic2d") {
    g.spec = quartic_2d(cfg.box, cfg.well_position, cfg.omega_y, cfg.w_scale);
  } else {
    g.spec = tabulated(cfg.table.string(), cfg.box, cfg.reflection);
  }
  g.box_grid = Grid::from_box(cfg.box, cfg.nodes);
  g.grid = g.box_grid.interior();
  g.v0 = sample(g.spec.v0, g.grid);
  g.w = sample(g.spec.w, g.grid);
  g.parity = involution_permutation(g.grid, g.spec.involution);
  g.symmetry = validate_symmetry(g.spec, g.grid);
  if (!g.symmetry.passed) {
    throw Error(ErrorCode::SymmetryViolation, "potentials",
                fmt::format("potential is not PT-symmetric on the grid (V0 residual {:.3e}, W residual {:.3e})",
                            g.symmetry.v0_residual, g.symmetry.w_residual));
  }
  g.wells = locate_wells(g.grid, g.v0, g.spec.involution);
  g.from_plus = agmon_distance_field(g.grid, g.v0, g.wells.plus);
  g.from_minus = agmon_distance_field(g.grid, g.v0, g.wells.minus);
  g.s0 = well_separation(g.from_plus, g.wells);
  g.fill = build_fill(g.grid, g.v0, g.wells, g.from_plus, g.from_minus, cfg.delta);
  g.essential_threshold = essential_threshold(g.spec, g.box_grid);
  return g;
}

Doublet Problem::doublet() const {
  Doublet d;
  d.family = family.get();
  d.window = window;
  d.basis = basis;
  d.weight_integral = weight.value;
  return d;
}

Problem build_problem(const ScenarioConfig& cfg, const Geometry& geometry, double h) {
  Problem p;
  p.h = h;
  p.family = std::make_shared<OperatorFamily>(geometry.grid, geometry.v0, geometry.w, h, geometry.parity);
  p.p_tilde = assemble_reference(geometry.grid, geometry.v0, geometry.fill, h, 1);

  std::optional<SpectralWindow> ref_window;
  if (cfg.window_center) {
    ref_window = SpectralWindow{Complex(*cfg.window_center, 0.0), *cfg.window_radius, cfg.contour_nodes,
                                cfg.radius_fraction};
  }
  p.reference = reference_mode(p.p_tilde, geometry.parity, geometry.wells.plus.representative, ref_window,
                               cfg.reference_index, geometry.spec.energy_level);
  if (ref_window) {
    p.window = *ref_window;
  } else {
    p.window = SpectralWindow{Complex(p.reference.mu_tilde, 0.0), 0.5 * p.reference.gap, cfg.contour_nodes,
                              cfg.radius_fraction};
  }
  validate_window(p.window, geometry.essential_threshold);

  p.basis = unperturbed_basis(p.family->unperturbed(), p.window, p.reference);
  p.weight = weight_integral(p.basis.e_plus, geometry.w, geometry.grid.cell_volume(), geometry.wells.plus);
  p.predicted = predict_threshold(p.basis.t, p.weight.value);
  return p;
}

std::vector<double> sweep_epsilons(const ScenarioConfig& cfg, const Problem& problem) {
  const double limit = cfg.radius_fraction * problem.window.radius;
  const double eps_max = cfg.eps_max.value_or(0.0);
  auto grid = epsilon_grid(problem.predicted, cfg.points_per_side, eps_max, cfg.small_eps_fraction, cfg.span);
  if (grid.back() > limit) {
    throw Error(ErrorCode::ConfigInvalid, kModule,
                fmt::format("epsilon.max: largest eps {} exceeds {} x window radius = {} at h = {}", grid.back(),
                            cfg.radius_fraction, limit, problem.h));
  }
  return grid;
}

SweepOptions sweep_options(const ScenarioConfig& cfg, int threads) {
  SweepOptions o;
  o.tolerance = cfg.bisection_tolerance;
  o.floor = cfg.imaginary_floor;
  o.spot_checks = cfg.spot_checks;
  o.threads = threads;
  return o;
}

}  // namespace ptwell
