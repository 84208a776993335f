#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ptwell/operator.hpp"
#include "ptwell/reduction.hpp"
#include "ptwell/spectra.hpp"

namespace ptwell {

/// |b|^2 - (Im a)^2 in product form (|b| + Im a)(|b| - Im a); `f` is the
/// second factor, whose simple root is the threshold.
struct Discriminant {
  double value = 0.0;
  double sum_factor = 0.0;
  double f = 0.0;
};

Discriminant discriminant(Complex a, Complex b);
Discriminant discriminant(const ReducedModel& model);

/// Leading-order threshold |t| / I_W. Throws NonPositiveWeight if I_W <= 0.
double predict_threshold(Complex t, double weight_integral);

using ModelBuilder = std::function<ReducedModel(double)>;
using OperatorBuilder = std::function<OperatorMatrix(double)>;

/// Root of f(eps) = |b| - Im a in [lo, hi] to relative tolerance `tol`.
/// f is close to affine, so a bracketing Illinois iteration is used; the last
/// step closes the bracket to width tol * root. Throws BracketInvalid unless
/// f(lo) > 0 > f(hi).
double locate_threshold(const ModelBuilder& builder, double lo, double hi, double tol = 1e-4);

/// Bisection on the onset of non-real window eigenvalues of the full operator:
/// sign of max |Im lambda| - floor. Throws BracketInvalid unless the window
/// spectrum is real at lo and non-real at hi.
double locate_threshold_direct(const OperatorBuilder& builder, const SpectralWindow& window, double lo, double hi,
                               double tol = 1e-4, double floor = 1e-9);

enum class Verdict { RealDistinct, Collision, ComplexPair };

std::string to_string(Verdict v);

struct SweepRow {
  double epsilon = 0.0;
  Complex a;
  Complex b;
  Complex lambda_plus;
  Complex lambda_minus;
  Discriminant disc;
  std::array<Complex, 2> direct{};  // window eigenvalues of P_eps, by Re (by Im for a conjugate pair)
  Verdict verdict = Verdict::RealDistinct;
  bool derived = false;  // filled from the row at -eps by conjugation

  double subspace_error = 0.0;     // matching distance eig(M) vs direct
  double pairing_residual = 0.0;   // window spectrum vs its conjugate
  double symmetry_residual = 0.0;  // M_eps structure
  double biorthogonality_residual = 0.0;
};

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct BifurcationReport {
  std::vector<SweepRow> rows;  // sorted by epsilon
  double epsilon_plus_predicted = 0.0;
  double epsilon_plus_located = 0.0;
  double epsilon_plus_direct = 0.0;
  double bisection_tolerance = 0.0;
  double imaginary_floor = 0.0;  // absolute floor used by the direct locator
  double scale = 1.0;            // window energy scale
  std::vector<Check> checks;

  bool passed() const;
  const Check* find(const std::string& name) const;
};

/// What a sweep needs from an assembled scenario.
struct Doublet {
  const OperatorFamily* family = nullptr;
  SpectralWindow window;
  UnperturbedBasis basis;
  double weight_integral = 0.0;
};

struct SweepOptions {
  double tolerance = 1e-4;       // relative bisection tolerance
  double floor = 1e-9;           // relative to the window scale
  int spot_checks = 3;           // negative-eps rows recomputed
  int threads = 1;
  bool conjugate_duals = true;   // one projector pass per eps
};

/// Reduced model at eps for the doublet.
ReducedModel reduce_at(const Doublet& doublet, double epsilon, bool conjugate_duals = true);

/// The two window eigenvalues of P_eps, by Re (by Im for a conjugate pair).
std::array<Complex, 2> window_pair(const OperatorMatrix& p, const SpectralWindow& window);

/// Sweep over eps >= 0 (sorted, containing 0), bracketing and locating the
/// threshold both ways, inserting a collision row at the located value and
/// mirroring rows to -eps. All report invariants are evaluated into `checks`.
BifurcationReport sweep(const Doublet& doublet, std::span<const double> epsilons, const SweepOptions& options = {});

/// {0, fraction * predicted} and predicted * span^(+-k / points_per_side),
/// k = 1..points_per_side, sorted and clipped to eps_max when positive.
std::vector<double> epsilon_grid(double predicted, int points_per_side, double eps_max = 0.0,
                                 double small_fraction = 0.1, double span = 2.0);

}  // namespace ptwell
