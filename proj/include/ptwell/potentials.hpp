#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ptwell/grid.hpp"

namespace ptwell {

struct AgmonField;

using ScalarField = std::function<double(const Point&)>;

/// Reflection x_axis -> 2 * center - x_axis. This is the parity map of the
/// double well.
struct Reflection {
  int axis = 0;
  double center = 0.0;

  Point apply(Point p) const {
    p[axis] = 2.0 * center - p[axis];
    return p;
  }
};

/// Real part V0 and antisymmetric perturbation W of the potential
/// V0 + i eps W, with the parity map and the truncation box.
struct PotentialSpec {
  int dimension = 1;
  ScalarField v0;
  ScalarField w;
  Reflection involution;
  double energy_level = 0.0;
  Box domain_box;
  std::string name;
};

/// V0 = (x^2 - a^2)^2 - shift, W = w_scale * x, reflection x -> -x.
PotentialSpec quartic_1d(const Box& box, double well_position = 1.0, double shift = 0.0,
                         double w_scale = 1.0);

/// V0 = (x^2 - a^2)^2 + omega_y^2 y^2, W = w_scale * x * exp(-y^2), reflection
/// (x, y) -> (-x, y).
PotentialSpec quartic_2d(const Box& box, double well_position = 1.0, double omega_y = 1.0,
                         double w_scale = 1.0);

/// Potential sampled on a regular lattice and read from CSV with header
/// `x,v0,w` (1D) or `x,y,v0,w` (2D). Values between samples are linearly
/// (bilinearly) interpolated and clamped at the table edges.
PotentialSpec tabulated(const std::string& path, const Box& box, const Reflection& involution);

RealField sample(const ScalarField& f, const Grid& grid);

/// Node permutation induced by the reflection. Throws GridNotInvariant when a
/// reflected node misses the node set by more than 1e-12 cell widths.
std::vector<std::size_t> involution_permutation(const Grid& grid, const Reflection& r);

struct SymmetryReport {
  double involution_residual = 0.0;  // max |iota(iota(x)) - x|
  double v0_residual = 0.0;          // max |V0(iota x) - V0(x)|
  double w_residual = 0.0;           // max |W(iota x) + W(x)|
  double v0_scale = 0.0;             // max |V0|
  double w_scale = 0.0;              // max |W|
  bool passed = false;
};

SymmetryReport validate_symmetry(const PotentialSpec& spec, const Grid& grid);

struct WellSet {
  int label = 0;
  std::vector<std::size_t> cells;  // sorted
  std::size_t representative = 0;
};

struct WellPair {
  WellSet minus;  // U_{-1}
  WellSet plus;   // U_{+1}

  const WellSet& operator[](int label) const { return label > 0 ? plus : minus; }
};

/// Nodes counted as belonging to {values <= 0}. A node qualifies if its value
/// is at most `zero_tol`, or if it is a discrete local minimum (over face
/// neighbors) whose value does not exceed the largest rise to a neighbor,
/// i.e. the sampled field cannot resolve whether the zero level is reached
/// inside its cell.
std::vector<bool> sublevel_cells(const Grid& grid, const RealField& values, double zero_tol);

/// The two face-connected components of {V0 <= 0}. The component whose
/// representative lies on the positive side of the reflection is U_{+1}.
WellPair locate_wells(const PotentialSpec& spec, const Grid& grid);
WellPair locate_wells(const Grid& grid, const RealField& v0, const Reflection& involution);

/// Plateau cut-offs chi_{+-1} around the wells and the fill strength lambda.
struct FillSpec {
  double cutoff_radius = 0.0;
  double fill_strength = 0.0;
  RealField chi_plus;
  RealField chi_minus;

  const RealField& chi(int label) const { return label > 0 ? chi_plus : chi_minus; }
};

/// C-infinity plateau: 1 for d <= delta/3, 0 for d >= delta, monotone between.
double plateau(double d, double delta);

/// Builds chi_j from the Agmon distance to U_j and picks lambda so that
/// V0 + lambda chi_{-j} has sublevel set exactly U_j.
FillSpec build_fill(const Grid& grid, const RealField& v0, const WellPair& wells,
                    const AgmonField& from_plus, const AgmonField& from_minus, double delta);

}  // namespace ptwell
