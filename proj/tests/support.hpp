#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "ptwell/scenario.hpp"

namespace ptwell::testing {

inline std::string scenario_path(const std::string& name) { return std::string(PTWELL_SCENARIO_DIR) + "/" + name; }

/// Bundled 1D scenario, geometry built once per process.
inline const ScenarioConfig& quartic1d_config() {
  static const ScenarioConfig cfg = load_config(scenario_path("quartic1d.ini"));
  return cfg;
}

inline const Geometry& quartic1d_geometry() {
  static const Geometry g = build_geometry(quartic1d_config());
  return g;
}

inline const Problem& quartic1d_problem(double h) {
  static double cached_h = -1.0;
  static Problem p;
  if (h != cached_h) {
    p = build_problem(quartic1d_config(), quartic1d_geometry(), h);
    cached_h = h;
  }
  return p;
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double dx = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * dx);
  return s * dx / 3.0;
}

}  // namespace ptwell::testing
