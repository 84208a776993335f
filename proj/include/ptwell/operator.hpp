#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "ptwell/grid.hpp"
#include "ptwell/potentials.hpp"

namespace ptwell {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

enum class OperatorKind { Full, Reference };

/// Finite-difference matrix of -h^2 Laplace + V on the nodes of a grid, with
/// homogeneous Dirichlet data one spacing outside the grid.
struct OperatorMatrix {
  SparseMatrix entries;
  double epsilon = 0.0;
  OperatorKind kind = OperatorKind::Full;
  int reference_label = 0;  // j for the reference operator P~_j
  double h = 0.0;
  double cell_volume = 1.0;
  /// Node permutation Sigma with Sigma conj(P) Sigma = P, when known (the
  /// identity for a real matrix). Lets the contour quadrature pair nodes.
  std::shared_ptr<const std::vector<std::size_t>> conjugation;

  Eigen::Index size() const { return entries.rows(); }
  /// Largest entry modulus.
  double scale() const;
};

/// Second-order central differences for -h^2 Laplace; the 2D stencil is the
/// Kronecker sum of the per-axis stencils.
SparseMatrix kinetic_matrix(const Grid& grid, double h);

/// P0 assembled once; P_eps = P0 + i eps diag(W) on demand. With a parity
/// permutation, V0 even and W odd are checked (SymmetryViolation) and every
/// member carries it as its conjugation map.
class OperatorFamily {
 public:
  OperatorFamily(const Grid& grid, RealField v0, RealField w, double h, std::vector<std::size_t> parity = {});

  const OperatorMatrix& unperturbed() const { return p0_; }
  OperatorMatrix at(double epsilon) const;
  const RealField& v0() const { return v0_; }
  const RealField& w() const { return w_; }
  double h() const { return p0_.h; }

 private:
  OperatorMatrix p0_;
  RealField v0_;
  RealField w_;
};

OperatorMatrix assemble(const Grid& grid, const PotentialSpec& spec, double h, double epsilon);

/// P~_j = P0 + lambda chi_{-j}; real symmetric.
OperatorMatrix assemble_reference(const Grid& grid, const RealField& v0, const FillSpec& fill, double h,
                                  int label);
OperatorMatrix assemble_reference(const Grid& grid, const PotentialSpec& spec, const FillSpec& fill, double h,
                                  int label);

/// Minimum of V0 over the faces of the truncation box (sampled on the box
/// grid, boundary nodes included). Stand-in for liminf V0 at infinity.
double essential_threshold(const PotentialSpec& spec, const Grid& box_grid);

/// Node permutation applied to a field: (Sigma u)_i = u_{perm[i]}.
ComplexField permute(const ComplexField& u, std::span<const std::size_t> perm);

/// max |(Sigma conj(P) Sigma - P)_{ij}|.
double pt_residual(const OperatorMatrix& op, std::span<const std::size_t> perm);

/// max |P - P^T| over entries, and max |Im P|.
double asymmetry_residual(const OperatorMatrix& op);

/// Coordinate export, one `row col re im` line per stored entry (0-based).
void export_coordinates(const OperatorMatrix& op, std::ostream& out);

}  // namespace ptwell
