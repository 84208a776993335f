#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ptwell/operator.hpp"
#include "ptwell/potentials.hpp"
#include "ptwell/spectra.hpp"

namespace ptwell {

// Index 0 of every pair/2x2 matrix below is the well label +1, index 1 is -1.

/// Simple eigenvalue mu~ of P~_1 with its eigenvector and the parity image.
struct ReferenceSolution {
  double mu_tilde = 0.0;
  ComplexField e_plus;   // real, positive at the U_1 representative
  ComplexField e_minus;  // Sigma e_plus
  double gap = 0.0;      // distance to the nearest other eigenvalue of P~_1
  double residual = 0.0;
};

/// Eigenvalue `index` (ascending) of the real symmetric P~_1, either among
/// the eigenvalues in `window` or, without a window, among those nearest the
/// energy level. `anchor` is the node whose value fixes the phase.
ReferenceSolution reference_mode(const OperatorMatrix& p_tilde, std::span<const std::size_t> parity,
                                 std::size_t anchor, const std::optional<SpectralWindow>& window = std::nullopt,
                                 int index = 0, double energy_level = 0.0);

/// Orthonormal basis of the doublet subspace of P0 and the matrix of P0 in it.
struct UnperturbedBasis {
  ComplexField e_plus;
  ComplexField e_minus;
  Eigen::Matrix2cd gram;    // Gram matrix of Pi_0 e~_j
  Eigen::Matrix2cd matrix;  // m_jk = (P0 e_k | e_j)
  double mu = 0.0;
  Complex t;
  double gram_condition = 1.0;
  double orthonormality_residual = 0.0;  // max |(e_k|e_j) - delta_jk|

  const ComplexField& e(int label) const { return label > 0 ? e_plus : e_minus; }
};

/// Closed-form principal square root of a 2x2 Hermitian positive matrix.
Eigen::Matrix2cd sqrt_hermitian_2x2(const Eigen::Matrix2cd& g);

UnperturbedBasis unperturbed_basis(const OperatorMatrix& p0, const SpectralWindow& window,
                                   const ReferenceSolution& ref);

/// Matrix of P_eps on its doublet subspace in the basis e_j = Pi_eps e_j^0,
/// with dual vectors f_j in the range of Pi_{-eps}.
struct ReducedModel {
  double epsilon = 0.0;
  std::array<ComplexField, 2> basis_e;
  std::array<ComplexField, 2> dual_f;
  Eigen::Matrix2cd matrix = Eigen::Matrix2cd::Zero();
  Complex a;
  Complex b;
  double symmetry_residual = 0.0;         // max(|m_11 - conj m_22|, |m_12 - conj m_21|)
  double biorthogonality_residual = 0.0;  // max |(f_j|e_k) - delta_jk|
  double dual_condition = 1.0;            // cond of (g_j|e_k)

  /// Eigenvalues of the 2x2 matrix itself (no structural assumption).
  std::array<Complex, 2> matrix_eigenvalues() const;
};

/// General route: P_eps and P_{-eps} are projected independently.
ReducedModel interaction_matrix(const OperatorMatrix& p_eps, const OperatorMatrix& p_minus_eps,
                                const SpectralWindow& window, const UnperturbedBasis& basis);

/// Same model from P_eps alone. Requires P_{-eps} = conj(P_eps) entrywise and
/// a real window centre, so that Pi_{-eps} v = conj(Pi_eps conj v) holds for
/// the discretized contour, which is closed under conjugation.
ReducedModel interaction_matrix(const OperatorMatrix& p_eps, const SpectralWindow& window,
                                const UnperturbedBasis& basis);

/// Re a +- sqrt(|b|^2 - (Im a)^2); a negative radicand gives +- i sqrt(|.|).
std::pair<Complex, Complex> reduced_eigenvalues(Complex a, Complex b);

struct WeightIntegral {
  double value = 0.0;
  std::vector<std::string> warnings;
};

/// sum W |e|^2 cell_volume. Throws NonPositiveWeight if the result is not
/// positive; warns when W > 0 fails on U_1 or the result is exponentially
/// small.
WeightIntegral weight_integral(const ComplexField& e_plus, const RealField& w, double cell_volume,
                               const WellSet& well_plus);

}  // namespace ptwell
