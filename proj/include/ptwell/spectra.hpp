#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ptwell/grid.hpp"
#include "ptwell/operator.hpp"

namespace ptwell {

/// Disc D(center, radius) in the spectral plane, with the node count of the
/// trapezoid rule on its boundary circle.
struct SpectralWindow {
  Complex center{0.0, 0.0};
  double radius = 1.0;
  int contour_nodes = 32;
  /// Largest |eps| accepted by the reduction, as a fraction of the radius.
  double perturbation_fraction = 0.1;

  bool contains(Complex z) const { return std::abs(z - center) < radius; }
  /// Energy scale used for eigenvalue comparisons: max(1, |center| + radius).
  double scale() const { return std::max(1.0, std::abs(center) + radius); }
};

/// Throws WindowInvalid unless radius > 0, contour_nodes >= 4 and
/// Re center + radius < essential_threshold.
void validate_window(const SpectralWindow& window, double essential_threshold);

struct EigenPair {
  Complex value;
  ComplexField vector;  // unit weighted L2 norm
  double residual = 0.0;  // ||(A - value) vector||
  bool defective = false;  // accepted under the relaxed criterion near a collision
};

struct EigenOptions {
  double tolerance = 1e-12;         // target residual / matrix scale
  double accept_tolerance = 1e-8;   // residual / matrix scale an eigenpair must satisfy
  double defective_tolerance = 1e-5;  // relaxed bound for near-coincident pairs
  int krylov_dim = 0;                 // 0: chosen from the requested count
  int max_restarts = 30;
  std::uint64_t seed = 0x5eed5eedULL;
  bool dense_fallback = true;  // for N <= 2000 when the iteration stagnates
};

/// The `count` eigenpairs closest to `shift`, by shift-invert Arnoldi with full
/// reorthogonalization and explicit restarts. Sorted by distance to shift.
std::vector<EigenPair> eigs_nearest(const OperatorMatrix& a, Complex shift, int count,
                                    const EigenOptions& options = {});

/// All eigenpairs of A inside the window, sorted by (Re, Im). The requested
/// count doubles until an eigenvalue outside the window is found.
std::vector<EigenPair> eigs_window(const OperatorMatrix& a, const SpectralWindow& window, int max_count = 16,
                                   const EigenOptions& options = {});

/// Full dense eigendecomposition, sorted by (Re, Im).
std::vector<EigenPair> eigs_dense(const OperatorMatrix& a);

/// Pi v for each v, Pi = (2 pi i)^-1 \oint (z - A)^-1 dz by the trapezoid rule
/// on contour_nodes points z_k = c + R exp(i 2 pi (k + 1/2) / n). One sparse LU
/// per node, shared by the batch. With `verify`, a seeded probe p is also
/// checked for ||Pi(Pi p) - Pi p|| <= 1e-8 ||p|| (NonIdempotent otherwise).
std::vector<ComplexField> riesz_project(const OperatorMatrix& a, const SpectralWindow& window,
                                        std::span<const ComplexField> vectors, bool verify = false,
                                        std::uint64_t seed = 0x5eed5eedULL);

/// Numerical rank of Pi on `probes` random unit vectors (singular values
/// above 1e-6).
int projector_rank(const OperatorMatrix& a, const SpectralWindow& window, int probes,
                   std::uint64_t seed = 0x5eed5eedULL);

/// Complex Gaussian field normalized to unit weighted L2 norm.
ComplexField random_unit_field(Eigen::Index n, double cell_volume, std::mt19937_64& rng);

/// min over matchings of max |a_i - b_pi(i)|; sets must have equal size (<= 8).
double matching_distance(std::span<const Complex> a, std::span<const Complex> b);

/// matching_distance(values, conj(values)).
double conjugation_pairing_residual(std::span<const Complex> values);

std::vector<Complex> values_of(std::span<const EigenPair> pairs);

}  // namespace ptwell
