#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptwell/grid.hpp"
#include "ptwell/potentials.hpp"

namespace ptwell {

/// Distance d(U, x) in the degenerate metric V0(x)_+ dx^2, sampled on a grid.
struct AgmonField {
  int source_label = 0;
  RealField values;
  std::string grid_ref;
};

/// Edge length of the graph metric between stencil neighbors a and b:
/// euclidean length times the mean of sqrt(V0_+) at the two endpoints.
double agmon_edge_weight(const RealField& v0, std::size_t a, std::size_t b, double length);

/// Multi-source Dijkstra over the 3^n - 1 stencil graph.
AgmonField agmon_distance_field(const Grid& grid, const RealField& v0,
                                 std::span<const std::size_t> sources, int label = 0);
AgmonField agmon_distance_field(const Grid& grid, const RealField& v0, const WellSet& source);

/// S0 = min over U_{-1} of d(U_1, .).
double well_separation(const AgmonField& from_plus, const WellPair& wells);

/// Largest pairwise Agmon distance between cells of the well.
double well_diameter(const Grid& grid, const RealField& v0, const WellSet& well);

/// True when the diameter exceeds the metric length of one grid step at the
/// well, i.e. the well is resolved as a set of positive size.
bool diameter_exceeds_cell(const Grid& grid, const RealField& v0, const WellSet& well,
                           double diameter);

struct EnvelopeReport {
  double statistic = 0.0;  // max_x log|u(x)| + (1 - delta) d(U, x) / h
  std::size_t argmax = 0;
  double slack = 0.0;
  bool passed = false;
};

/// Exponential decay envelope of a grid function normalized in the weighted
/// L2 norm. Default slack is log(grid size) + 5.
EnvelopeReport decay_envelope_check(const ComplexField& u, const AgmonField& field, double h,
                                    double delta, std::optional<double> slack = std::nullopt);

}  // namespace ptwell
