#include "ptwell/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "ptwell/errors.hpp"

namespace ptwell {

namespace {

constexpr const char* kModule = "reduction";

double condition_2x2(const Eigen::Matrix2cd& m) {
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m);
  const auto& s = svd.singularValues();
  return s[1] > 0.0 ? s[0] / s[1] : std::numeric_limits<double>::infinity();
}

// M_jk = (P e_k | f_j) for the given bases.
Eigen::Matrix2cd matrix_in_basis(const SparseMatrix& p, const std::array<ComplexField, 2>& e,
                                 const std::array<ComplexField, 2>& f, double vol) {
  Eigen::Matrix2cd m;
  for (int k = 0; k < 2; ++k) {
    const ComplexField pe = p * e[k];
    for (int j = 0; j < 2; ++j) m(j, k) = inner(pe, f[j], vol);
  }
  return m;
}

// Builds the model from e_k = Pi_eps e_k^0 and g_j = Pi_{-eps} e_j^0.
ReducedModel assemble_model(const OperatorMatrix& p_eps, const SpectralWindow& window,
                            std::array<ComplexField, 2> e, std::array<ComplexField, 2> g) {
  const double vol = p_eps.cell_volume;
  ReducedModel model;
  model.epsilon = p_eps.epsilon;

  Eigen::Matrix2cd b;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) b(j, k) = inner(g[j], e[k], vol);
  }
  model.dual_condition = condition_2x2(b);
  if (model.dual_condition > 10.0) {
    throw Error(ErrorCode::DualIllConditioned, kModule,
                fmt::format("dual Gram matrix has condition number {:.3g} at eps = {}", model.dual_condition,
                            p_eps.epsilon));
  }
  const Eigen::Matrix2cd c = b.inverse();
  for (int j = 0; j < 2; ++j) model.dual_f[j] = c(j, 0) * g[0] + c(j, 1) * g[1];
  model.basis_e = std::move(e);

  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      const Complex fe = inner(model.dual_f[j], model.basis_e[k], vol);
      model.biorthogonality_residual =
          std::max(model.biorthogonality_residual, std::abs(fe - (j == k ? 1.0 : 0.0)));
    }
  }

  model.matrix = matrix_in_basis(p_eps.entries, model.basis_e, model.dual_f, vol);
  model.a = model.matrix(0, 0);
  model.b = model.matrix(0, 1);
  model.symmetry_residual = std::max(std::abs(model.matrix(0, 0) - std::conj(model.matrix(1, 1))),
                                     std::abs(model.matrix(0, 1) - std::conj(model.matrix(1, 0))));
  if (model.symmetry_residual > 1e-6 * window.scale()) {
    throw Error(ErrorCode::SymmetryViolation, kModule,
                fmt::format("interaction matrix violates the PT structure by {:.3e} at eps = {}",
                            model.symmetry_residual, p_eps.epsilon));
  }
  return model;
}

void check_perturbation_size(double epsilon, const SpectralWindow& window) {
  const double limit = window.perturbation_fraction * window.radius;
  if (std::abs(epsilon) > limit) {
    throw Error(ErrorCode::WindowInvalid, kModule,
                fmt::format("|eps| = {} exceeds {} (fraction {} of the window radius)", std::abs(epsilon), limit,
                            window.perturbation_fraction));
  }
}

}  // namespace

ReferenceSolution reference_mode(const OperatorMatrix& p_tilde, std::span<const std::size_t> parity,
                                 std::size_t anchor, const std::optional<SpectralWindow>& window, int index,
                                 double energy_level) {
  const int want = index + 4;
  std::vector<EigenPair> near = eigs_nearest(p_tilde, Complex(energy_level, 0.0), want);
  std::sort(near.begin(), near.end(),
            [](const EigenPair& x, const EigenPair& y) { return x.value.real() < y.value.real(); });

  std::vector<EigenPair> candidates;
  if (window) {
    candidates = eigs_window(p_tilde, *window);
  } else {
    candidates = near;
  }
  if (index < 0 || static_cast<std::size_t>(index) >= candidates.size()) {
    throw Error(ErrorCode::NotSimple, kModule,
                fmt::format("reference eigenvalue index {} not available ({} candidates)", index, candidates.size()));
  }
  const EigenPair& chosen = candidates[static_cast<std::size_t>(index)];

  ReferenceSolution ref;
  ref.mu_tilde = chosen.value.real();
  ref.gap = std::numeric_limits<double>::infinity();
  for (const auto& p : near) {
    const double d = std::abs(p.value - chosen.value);
    if (d <= 1e-10 * std::max(1.0, std::abs(chosen.value))) {
      if (&p == &chosen || p.vector.size() == 0) continue;
      // Same eigenvalue found again: only a problem if it is a different vector.
      const Complex overlap = inner(p.vector, chosen.vector, p_tilde.cell_volume);
      if (std::abs(std::abs(overlap) - 1.0) > 1e-6) {
        throw Error(ErrorCode::NotSimple, kModule,
                    fmt::format("reference eigenvalue {} is not simple", chosen.value.real()));
      }
      continue;
    }
    ref.gap = std::min(ref.gap, d);
  }

  const Complex at_anchor = chosen.vector[static_cast<Eigen::Index>(anchor)];
  if (std::abs(at_anchor) == 0.0) {
    throw Error(ErrorCode::NotSimple, kModule, "reference mode vanishes at the well representative");
  }
  ComplexField e = (chosen.vector * (std::conj(at_anchor) / std::abs(at_anchor))).real().cast<Complex>();
  e /= norm(e, p_tilde.cell_volume);
  ref.e_plus = e;
  ref.e_minus = permute(e, parity);
  ref.residual = (p_tilde.entries * e - ref.mu_tilde * e).norm() / e.norm();
  if (ref.residual > 1e-9 * p_tilde.scale()) {
    throw Error(ErrorCode::ConvergenceFailure, kModule,
                fmt::format("reference mode residual {:.3e} too large", ref.residual));
  }
  return ref;
}

Eigen::Matrix2cd sqrt_hermitian_2x2(const Eigen::Matrix2cd& g) {
  const double det = (g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)).real();
  const double s = std::sqrt(det);
  const double tau = std::sqrt(g(0, 0).real() + g(1, 1).real() + 2.0 * s);
  return (g + s * Eigen::Matrix2cd::Identity()) / tau;
}

UnperturbedBasis unperturbed_basis(const OperatorMatrix& p0, const SpectralWindow& window,
                                   const ReferenceSolution& ref) {
  const double vol = p0.cell_volume;
  const std::array<ComplexField, 2> tilde{ref.e_plus, ref.e_minus};
  const auto g = riesz_project(p0, window, tilde);

  UnperturbedBasis basis;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) basis.gram(j, k) = inner(g[k], g[j], vol);
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(basis.gram);
    const auto& ev = es.eigenvalues();
    basis.gram_condition = ev[0] > 0.0 ? ev[1] / ev[0] : std::numeric_limits<double>::infinity();
  }
  if (basis.gram_condition > 10.0) {
    throw Error(ErrorCode::GramIllConditioned, kModule,
                fmt::format("Gram matrix of the projected reference modes has condition {:.3g}",
                            basis.gram_condition));
  }
  const Eigen::Matrix2cd inv_root = sqrt_hermitian_2x2(basis.gram).inverse();
  basis.e_plus = inv_root(0, 0) * g[0] + inv_root(1, 0) * g[1];
  basis.e_minus = inv_root(0, 1) * g[0] + inv_root(1, 1) * g[1];

  const std::array<ComplexField, 2> e{basis.e_plus, basis.e_minus};
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      basis.orthonormality_residual =
          std::max(basis.orthonormality_residual, std::abs(inner(e[k], e[j], vol) - (j == k ? 1.0 : 0.0)));
    }
  }
  basis.matrix = matrix_in_basis(p0.entries, e, e, vol);
  basis.mu = basis.matrix(0, 0).real();
  basis.t = basis.matrix(0, 1);
  return basis;
}

std::array<Complex, 2> ReducedModel::matrix_eigenvalues() const {
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(matrix, false);
  return {es.eigenvalues()[0], es.eigenvalues()[1]};
}

ReducedModel interaction_matrix(const OperatorMatrix& p_eps, const OperatorMatrix& p_minus_eps,
                                const SpectralWindow& window, const UnperturbedBasis& basis) {
  check_perturbation_size(p_eps.epsilon, window);
  const std::array<ComplexField, 2> e0{basis.e_plus, basis.e_minus};
  auto e = riesz_project(p_eps, window, e0);
  auto g = riesz_project(p_minus_eps, window, e0);
  return assemble_model(p_eps, window, {std::move(e[0]), std::move(e[1])}, {std::move(g[0]), std::move(g[1])});
}

ReducedModel interaction_matrix(const OperatorMatrix& p_eps, const SpectralWindow& window,
                                const UnperturbedBasis& basis) {
  check_perturbation_size(p_eps.epsilon, window);
  if (window.center.imag() != 0.0) {
    throw Error(ErrorCode::WindowInvalid, kModule, "conjugate projection needs a real window centre");
  }
  const std::array<ComplexField, 4> in{basis.e_plus, basis.e_minus, basis.e_plus.conjugate(),
                                       basis.e_minus.conjugate()};
  auto out = riesz_project(p_eps, window, in);
  return assemble_model(p_eps, window, {std::move(out[0]), std::move(out[1])},
                        {out[2].conjugate(), out[3].conjugate()});
}

std::pair<Complex, Complex> reduced_eigenvalues(Complex a, Complex b) {
  const double radicand = std::norm(b) - a.imag() * a.imag();
  const Complex root = radicand >= 0.0 ? Complex(std::sqrt(radicand), 0.0) : Complex(0.0, std::sqrt(-radicand));
  return {a.real() + root, a.real() - root};
}

WeightIntegral weight_integral(const ComplexField& e_plus, const RealField& w, double cell_volume,
                               const WellSet& well_plus) {
  WeightIntegral out;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < e_plus.size(); ++i) sum += w[i] * std::norm(e_plus[i]);
  out.value = sum * cell_volume;

  for (std::size_t c : well_plus.cells) {
    if (!(w[static_cast<Eigen::Index>(c)] > 0.0)) {
      out.warnings.push_back(fmt::format("W is not positive on U_1 (W = {} at node {})",
                                         w[static_cast<Eigen::Index>(c)], c));
      break;
    }
  }
  if (!(out.value > 0.0)) {
    throw Error(ErrorCode::NonPositiveWeight, kModule,
                fmt::format("integral of W |e_1|^2 is {} (must be positive)", out.value));
  }
  const double w_max = w.cwiseAbs().maxCoeff();
  if (out.value < 1e-6 * w_max) {
    out.warnings.push_back(fmt::format("integral of W |e_1|^2 = {:.3e} is exponentially small", out.value));
  }
  return out;
}

}  // namespace ptwell
