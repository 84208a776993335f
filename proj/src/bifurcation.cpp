#include "ptwell/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "ptwell/errors.hpp"

namespace ptwell {

namespace {

constexpr const char* kModule = "bifurcation";

// By Re, or by Im when the real parts agree to noise (a conjugate pair).
std::array<Complex, 2> ordered(std::array<Complex, 2> z, double scale) {
  const bool tie = std::abs(z[0].real() - z[1].real()) <= 1e-9 * scale;
  if (tie ? z[0].imag() > z[1].imag() : z[0].real() > z[1].real()) std::swap(z[0], z[1]);
  return z;
}

double max_abs_imag(const std::array<Complex, 2>& z) {
  return std::max(std::abs(z[0].imag()), std::abs(z[1].imag()));
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first
// exception.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Verdict classify(const Discriminant& d, double collision_band) {
  // |b| - |Im a| so that rows at negative eps classify like their mirror.
  const double f = std::min(d.f, d.sum_factor);
  if (std::abs(f) <= collision_band) return Verdict::Collision;
  return f > 0.0 ? Verdict::RealDistinct : Verdict::ComplexPair;
}

SweepRow make_row(const ReducedModel& model, const std::array<Complex, 2>& direct) {
  SweepRow row;
  row.epsilon = model.epsilon;
  row.a = model.a;
  row.b = model.b;
  std::tie(row.lambda_plus, row.lambda_minus) = reduced_eigenvalues(model.a, model.b);
  row.disc = discriminant(model);
  row.direct = direct;
  const auto eig = model.matrix_eigenvalues();
  row.subspace_error = matching_distance(eig, direct);
  row.pairing_residual = conjugation_pairing_residual(direct);
  row.symmetry_residual = model.symmetry_residual;
  row.biorthogonality_residual = model.biorthogonality_residual;
  return row;
}

SweepRow mirror(const SweepRow& row, double scale) {
  SweepRow m = row;
  m.epsilon = -row.epsilon;
  m.a = std::conj(row.a);
  m.b = std::conj(row.b);
  m.disc = discriminant(m.a, m.b);
  m.direct = ordered({std::conj(row.direct[0]), std::conj(row.direct[1])}, scale);
  m.derived = true;
  return m;
}

void add_check(BifurcationReport& report, std::string name, double value, double tolerance) {
  report.checks.push_back({std::move(name), value, tolerance, value <= tolerance});
}

}  // namespace

Discriminant discriminant(Complex a, Complex b) {
  Discriminant d;
  const double mod_b = std::abs(b);
  d.sum_factor = mod_b + a.imag();
  d.f = mod_b - a.imag();
  d.value = std::norm(b) - a.imag() * a.imag();
  return d;
}

Discriminant discriminant(const ReducedModel& model) { return discriminant(model.a, model.b); }

double predict_threshold(Complex t, double weight_integral) {
  if (!(weight_integral > 0.0)) {
    throw Error(ErrorCode::NonPositiveWeight, kModule,
                fmt::format("weight integral {} must be positive", weight_integral));
  }
  return std::abs(t) / weight_integral;
}

double locate_threshold(const ModelBuilder& builder, double lo, double hi, double tol) {
  auto f = [&](double eps) { return discriminant(builder(eps)).f; };
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    throw Error(ErrorCode::BracketInvalid, kModule,
                fmt::format("f = |b| - Im a does not change sign on [{}, {}] (f = {:.3e}, {:.3e})", lo, hi, f_lo,
                            f_hi));
  }
  int side = 0;
  for (int iter = 0; iter < 100; ++iter) {
    double c = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    const double width_goal = tol * std::abs(c);
    if (hi - lo <= width_goal) return c;
    // Keep the probe a little away from the endpoints so the bracket closes.
    const double margin = 0.25 * width_goal;
    if (!(c > lo + margin)) c = lo + std::min(2.0 * margin, 0.5 * (hi - lo));
    if (!(c < hi - margin)) c = hi - std::min(2.0 * margin, 0.5 * (hi - lo));
    const double f_c = f(c);
    if (f_c == 0.0) return c;
    if (f_c > 0.0) {
      lo = c;
      f_lo = f_c;
      if (side == 1) f_hi *= 0.5;
      side = 1;
    } else {
      hi = c;
      f_hi = f_c;
      if (side == -1) f_lo *= 0.5;
      side = -1;
    }
  }
  throw Error(ErrorCode::ConvergenceFailure, kModule, "threshold iteration did not converge");
}

double locate_threshold_direct(const OperatorBuilder& builder, const SpectralWindow& window, double lo, double hi,
                               double tol, double floor) {
  auto broken = [&](double eps) { return max_abs_imag(window_pair(builder(eps), window)) > floor; };
  if (broken(lo) || !broken(hi)) {
    throw Error(ErrorCode::BracketInvalid, kModule,
                fmt::format("window spectrum is not real at {} and non-real at {}", lo, hi));
  }
  while (hi - lo > tol * lo) {
    const double mid = 0.5 * (lo + hi);
    (broken(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::RealDistinct:
      return "real-distinct";
    case Verdict::Collision:
      return "collision";
    case Verdict::ComplexPair:
      return "complex-pair";
  }
  return "unknown";
}

bool BifurcationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* BifurcationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ReducedModel reduce_at(const Doublet& doublet, double epsilon, bool conjugate_duals) {
  const OperatorMatrix p = doublet.family->at(epsilon);
  if (conjugate_duals) return interaction_matrix(p, doublet.window, doublet.basis);
  return interaction_matrix(p, doublet.family->at(-epsilon), doublet.window, doublet.basis);
}

std::array<Complex, 2> window_pair(const OperatorMatrix& p, const SpectralWindow& window) {
  const auto pairs = eigs_window(p, window);
  if (pairs.size() != 2) {
    throw Error(ErrorCode::WindowInvalid, kModule,
                fmt::format("window holds {} eigenvalues of P at eps = {}, expected 2", pairs.size(), p.epsilon));
  }
  return ordered({pairs[0].value, pairs[1].value}, window.scale());
}

BifurcationReport sweep(const Doublet& doublet, std::span<const double> epsilons, const SweepOptions& options) {
  if (epsilons.empty() || epsilons.front() != 0.0 || !std::is_sorted(epsilons.begin(), epsilons.end())) {
    throw Error(ErrorCode::ConfigInvalid, kModule, "sweep needs sorted eps >= 0 starting at 0");
  }
  const SpectralWindow& window = doublet.window;
  BifurcationReport report;
  report.scale = window.scale();
  report.bisection_tolerance = options.tolerance;
  report.imaginary_floor = options.floor * report.scale;
  report.epsilon_plus_predicted = predict_threshold(doublet.basis.t, doublet.weight_integral);
  const double mod_t = std::abs(doublet.basis.t);
  const double collision_band = 10.0 * options.tolerance * mod_t;

  auto compute_row = [&](double eps) {
    const ReducedModel model = reduce_at(doublet, eps, options.conjugate_duals);
    const auto direct = window_pair(doublet.family->at(eps), window);
    SweepRow row = make_row(model, direct);
    row.verdict = classify(row.disc, collision_band);
    return row;
  };

  std::vector<SweepRow> rows(epsilons.size());
  parallel_for(rows.size(), options.threads, [&](std::size_t i) { rows[i] = compute_row(epsilons[i]); });

  // M_0 against the unperturbed basis.
  {
    const ReducedModel m0 = reduce_at(doublet, 0.0, options.conjugate_duals);
    const auto& m = m0.matrix;
    const double hermitian = std::max({std::abs(m(0, 1) - std::conj(m(1, 0))), std::abs(m(0, 0) - m(1, 1)),
                                       std::abs(m(0, 0).imag()), std::abs(m0.a - doublet.basis.mu),
                                       std::abs(m0.b - doublet.basis.t)});
    add_check(report, "m0_hermitian_equal_diagonal", hermitian / report.scale, 1e-8);
  }

  // Bracket from the first sign change of f on the computed grid.
  std::size_t sign_changes = 0;
  std::ptrdiff_t bracket = -1;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if ((rows[i - 1].disc.f > 0.0) != (rows[i].disc.f > 0.0)) {
      ++sign_changes;
      if (bracket < 0) bracket = static_cast<std::ptrdiff_t>(i - 1);
    }
  }
  add_check(report, "single_sign_change", std::abs(static_cast<double>(sign_changes) - 1.0), 0.0);

  if (bracket >= 0) {
    const double lo = rows[static_cast<std::size_t>(bracket)].epsilon;
    const double hi = rows[static_cast<std::size_t>(bracket) + 1].epsilon;
    report.epsilon_plus_located = locate_threshold(
        [&](double eps) { return reduce_at(doublet, eps, options.conjugate_duals); }, lo, hi, options.tolerance);
    report.epsilon_plus_direct = locate_threshold_direct([&](double eps) { return doublet.family->at(eps); }, window,
                                                         lo, hi, options.tolerance, report.imaginary_floor);
    SweepRow collision = compute_row(report.epsilon_plus_located);
    const double split = std::abs(collision.lambda_plus - collision.lambda_minus);
    add_check(report, "collision_sharpness", split, 10.0 * std::sqrt(options.tolerance) * report.scale);
    rows.insert(rows.begin() + bracket + 1, std::move(collision));
    add_check(report, "located_vs_direct",
              std::abs(report.epsilon_plus_located - report.epsilon_plus_direct) / report.epsilon_plus_located,
              1e-3);
  } else {
    report.epsilon_plus_located = std::numeric_limits<double>::quiet_NaN();
    report.epsilon_plus_direct = std::numeric_limits<double>::quiet_NaN();
    add_check(report, "collision_sharpness", std::numeric_limits<double>::infinity(), 0.0);
    add_check(report, "located_vs_direct", std::numeric_limits<double>::infinity(), 1e-3);
  }

  // At the exceptional point the eigenvalue pair is only resolvable to the
  // square root of the perturbation, so the collision row gets the square
  // root of the grid tolerances.
  double subspace = 0.0;
  double pairing = 0.0;
  double subspace_ep = 0.0;
  double pairing_ep = 0.0;
  double structure = 0.0;
  double biorth = 0.0;
  double direct_mismatch = 0.0;
  for (const auto& r : rows) {
    structure = std::max(structure, r.symmetry_residual);
    biorth = std::max(biorth, r.biorthogonality_residual);
    if (r.verdict == Verdict::Collision) {
      subspace_ep = std::max(subspace_ep, r.subspace_error);
      pairing_ep = std::max(pairing_ep, r.pairing_residual);
      continue;
    }
    subspace = std::max(subspace, r.subspace_error);
    pairing = std::max(pairing, r.pairing_residual);
    const bool real_direct = max_abs_imag(r.direct) <= report.imaginary_floor;
    if (real_direct != (r.verdict == Verdict::RealDistinct)) direct_mismatch += 1.0;
  }
  add_check(report, "subspace_exactness", subspace / report.scale, 1e-7);
  add_check(report, "pt_pairing", pairing / report.scale, 1e-10);
  add_check(report, "subspace_exactness_collision", subspace_ep / report.scale, std::sqrt(1e-10));
  add_check(report, "pt_pairing_collision", pairing_ep / report.scale, std::sqrt(1e-10));
  add_check(report, "structure", structure / report.scale, 1e-8);
  add_check(report, "biorthogonality", biorth, 1e-9);
  add_check(report, "direct_verdict_consistency", direct_mismatch, 0.0);

  // real-distinct* collision? complex-pair*, each phase entered at most once.
  {
    double violations = 0.0;
    int stage = 0;
    for (const auto& r : rows) {
      const int s = static_cast<int>(r.verdict);
      if (s < stage) violations += 1.0;
      stage = std::max(stage, s);
    }
    std::size_t collisions = std::count_if(rows.begin(), rows.end(),
                                           [](const SweepRow& r) { return r.verdict == Verdict::Collision; });
    if (collisions > 1) violations += static_cast<double>(collisions - 1);
    add_check(report, "trichotomy_monotone", violations, 0.0);
  }

  // b stays flat compared with the growth of Im a.
  if (bracket >= 0) {
    double b_drift = 0.0;
    double im_a = 0.0;
    for (const auto& r : rows) {
      if (r.epsilon > 2.0 * report.epsilon_plus_located * (1.0 + 1e-12)) continue;
      b_drift = std::max(b_drift, std::abs(r.b - doublet.basis.t));
      im_a = std::max(im_a, std::abs(r.a.imag()));
    }
    add_check(report, "b_flatness", b_drift / im_a, 0.1);

    // d/d eps Im a near 0 against the weight integral (Im a(0) = 0).
    const auto small = std::find_if(rows.begin(), rows.end(), [&](const SweepRow& r) { return r.epsilon > 0.0; });
    if (small != rows.end() && small->epsilon <= 0.2 * report.epsilon_plus_located) {
      const double slope = small->a.imag() / small->epsilon;
      add_check(report, "im_a_derivative", std::abs(slope - doublet.weight_integral) / doublet.weight_integral,
                0.05);
    }
  }

  // Negative eps by conjugation, with spot checks against real computations.
  {
    std::vector<std::size_t> positive;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].epsilon > 0.0 && rows[i].verdict != Verdict::Collision) positive.push_back(i);
    }
    std::vector<std::size_t> picks;
    const std::size_t n_spot = std::min<std::size_t>(positive.size(), static_cast<std::size_t>(options.spot_checks));
    for (std::size_t k = 0; k < n_spot; ++k) {
      const std::size_t at = n_spot == 1 ? 0 : k * (positive.size() - 1) / (n_spot - 1);
      picks.push_back(positive[at]);
    }
    std::vector<double> spectra(picks.size());
    std::vector<double> entries(picks.size());
    parallel_for(picks.size(), options.threads, [&](std::size_t k) {
      const SweepRow& r = rows[picks[k]];
      const auto minus = window_pair(doublet.family->at(-r.epsilon), window);
      spectra[k] = matching_distance(minus, r.direct);
      const ReducedModel m = reduce_at(doublet, -r.epsilon, options.conjugate_duals);
      entries[k] = std::max(std::abs(m.a - std::conj(r.a)), std::abs(m.b - std::conj(r.b)));
    });
    const double spec_res = spectra.empty() ? 0.0 : *std::max_element(spectra.begin(), spectra.end());
    const double entry_res = entries.empty() ? 0.0 : *std::max_element(entries.begin(), entries.end());
    add_check(report, "conjugation_spectra", spec_res / report.scale, 1e-10);
    add_check(report, "conjugation_entries", entry_res / report.scale, 1e-9);

    std::vector<SweepRow> all;
    all.reserve(2 * rows.size());
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
      if (it->epsilon > 0.0) all.push_back(mirror(*it, report.scale));
    }
    all.insert(all.end(), rows.begin(), rows.end());
    report.rows = std::move(all);
  }
  return report;
}

std::vector<double> epsilon_grid(double predicted, int points_per_side, double eps_max, double small_fraction,
                                 double span) {
  std::vector<double> out{0.0};
  if (small_fraction > 0.0) out.push_back(small_fraction * predicted);
  for (int k = -points_per_side; k <= points_per_side; ++k) {
    if (k == 0) continue;
    out.push_back(predicted * std::pow(span, static_cast<double>(k) / points_per_side));
  }
  if (eps_max > 0.0) std::erase_if(out, [&](double e) { return e > eps_max; });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace ptwell
