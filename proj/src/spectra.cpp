#include "ptwell/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#ifdef PTWELL_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#include <fmt/format.h>

#include "ptwell/errors.hpp"

namespace ptwell {

namespace {

constexpr const char* kModule = "spectra";
constexpr Eigen::Index kDenseLimit = 2000;

#ifdef PTWELL_HAVE_UMFPACK
using Lu = Eigen::UmfPackLU<SparseMatrix>;
#else
using Lu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
#endif

bool by_real_then_imag(const EigenPair& x, const EigenPair& y) {
  if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
  return x.value.imag() < y.value.imag();
}

double residual_of(const SparseMatrix& a, Complex lambda, const ComplexField& x) {
  return (a * x - lambda * x).norm() / x.norm();
}

// Factorization of A - shift I, reused across Arnoldi runs of growing size.
class ShiftInvert {
 public:
  ShiftInvert(const OperatorMatrix& a, Complex shift, const EigenOptions& options)
      : a_(a), shift_(shift), options_(options), scale_(a.scale()), shifted_(a.entries) {
    shifted_.diagonal().array() -= shift;
    lu_.analyzePattern(shifted_);
    lu_.factorize(shifted_);
    if (lu_.info() != Eigen::Success) {
      throw Error(ErrorCode::SolveFailure, kModule,
                  fmt::format("shifted operator is singular at shift ({}, {})", shift.real(), shift.imag()));
    }
  }

  std::vector<EigenPair> nearest(int count) const {
    const Eigen::Index n = a_.size();
    count = static_cast<int>(std::min<Eigen::Index>(count, n));
    int m = options_.krylov_dim > 0 ? options_.krylov_dim : std::max(2 * count + 20, 40);
    m = static_cast<int>(std::min<Eigen::Index>(m, n));

    std::mt19937_64 rng(options_.seed);
    ComplexField start = random_unit_field(n, 1.0, rng);

    std::vector<EigenPair> ritz;
    for (int restart = 0; restart <= options_.max_restarts; ++restart) {
      ritz = arnoldi(start, m, count);
      bool converged = true;
      for (int i = 0; i < count; ++i) converged = converged && ritz[i].residual <= options_.tolerance * scale_;
      if (converged) return ritz;
      start.setZero();
      for (int i = 0; i < count; ++i) start += ritz[i].vector;
      if (start.norm() == 0.0) start = random_unit_field(n, 1.0, rng);
    }

    for (int i = 0; i < count; ++i) {
      if (ritz[i].residual <= options_.accept_tolerance * scale_) continue;
      bool near_collision = false;
      for (int k = 0; k < count; ++k) {
        if (k != i && std::abs(ritz[k].value - ritz[i].value) <= 1e-3 * std::max(1.0, std::abs(ritz[i].value))) {
          near_collision = true;
        }
      }
      if (near_collision && ritz[i].residual <= options_.defective_tolerance * scale_) {
        ritz[i].defective = true;
        continue;
      }
      throw Error(ErrorCode::ConvergenceFailure, kModule,
                  fmt::format("shift-invert Arnoldi stagnated: residual {:.3e} for eigenvalue ({}, {})",
                              ritz[i].residual, ritz[i].value.real(), ritz[i].value.imag()));
    }
    return ritz;
  }

 private:
  std::vector<EigenPair> arnoldi(const ComplexField& start, int m, int count) const {
    const Eigen::Index n = a_.size();
    Eigen::MatrixXcd v(n, m + 1);
    Eigen::MatrixXcd hess = Eigen::MatrixXcd::Zero(m + 1, m);
    v.col(0) = start / start.norm();
    int built = m;
    for (int j = 0; j < m; ++j) {
      ComplexField w = lu_.solve(v.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXcd c = v.leftCols(j + 1).adjoint() * w;
        w -= v.leftCols(j + 1) * c;
        hess.col(j).head(j + 1) += c;
      }
      const double beta = w.norm();
      hess(j + 1, j) = beta;
      if (beta <= 1e-14 * hess.col(j).head(j + 1).norm()) {
        built = j + 1;
        break;
      }
      v.col(j + 1) = w / beta;
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(hess.topLeftCorner(built, built));
    std::vector<int> order(static_cast<std::size_t>(built));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return std::abs(es.eigenvalues()[x]) > std::abs(es.eigenvalues()[y]);
    });

    std::vector<EigenPair> out;
    const int keep = std::min(count, built);
    for (int r = 0; r < keep; ++r) {
      const int i = order[static_cast<std::size_t>(r)];
      const Complex theta = es.eigenvalues()[i];
      EigenPair p;
      p.value = shift_ + 1.0 / theta;
      p.vector = v.leftCols(built) * es.eigenvectors().col(i);
      p.vector /= norm(p.vector, a_.cell_volume);
      p.residual = residual_of(a_.entries, p.value, p.vector);
      out.push_back(std::move(p));
    }
    return out;
  }

  const OperatorMatrix& a_;
  Complex shift_;
  EigenOptions options_;
  double scale_;
  SparseMatrix shifted_;  // the LU may keep a view of its matrix
  Lu lu_;
};

std::vector<EigenPair> nearest_dense(const OperatorMatrix& a, Complex shift, int count) {
  auto all = eigs_dense(a);
  std::sort(all.begin(), all.end(), [shift](const EigenPair& x, const EigenPair& y) {
    return std::abs(x.value - shift) < std::abs(y.value - shift);
  });
  all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(count)));
  return all;
}

}  // namespace

void validate_window(const SpectralWindow& window, double essential_threshold) {
  if (!(window.radius > 0.0)) throw Error(ErrorCode::WindowInvalid, kModule, "window radius must be positive");
  if (window.contour_nodes < 4) throw Error(ErrorCode::WindowInvalid, kModule, "contour needs at least 4 nodes");
  if (!(window.center.real() + window.radius < essential_threshold)) {
    throw Error(ErrorCode::WindowInvalid, kModule,
                fmt::format("window reaches Re z = {} which is not below the essential threshold {}",
                            window.center.real() + window.radius, essential_threshold));
  }
}

std::vector<EigenPair> eigs_nearest(const OperatorMatrix& a, Complex shift, int count, const EigenOptions& options) {
  try {
    return ShiftInvert(a, shift, options).nearest(count);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ConvergenceFailure || !options.dense_fallback || a.size() > kDenseLimit) throw;
    return nearest_dense(a, shift, count);
  }
}

std::vector<EigenPair> eigs_window(const OperatorMatrix& a, const SpectralWindow& window, int max_count,
                                   const EigenOptions& options) {
  const Eigen::Index n = a.size();
  const double boundary_tol = 10.0 * std::numeric_limits<double>::epsilon() * window.scale();
  std::optional<ShiftInvert> solver;
  try {
    solver.emplace(a, window.center, options);
  } catch (const Error& e) {
    // The centre itself is an eigenvalue; it still lies in the window.
    if (e.code() != ErrorCode::SolveFailure || n > kDenseLimit) throw;
  }

  int count = static_cast<int>(std::min<Eigen::Index>(4, n));
  while (true) {
    std::vector<EigenPair> found;
    if (solver) {
      try {
        found = solver->nearest(count);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ConvergenceFailure || !options.dense_fallback || n > kDenseLimit) throw;
        found = nearest_dense(a, window.center, count);
      }
    } else {
      found = nearest_dense(a, window.center, count);
    }
    std::vector<EigenPair> inside;
    for (auto& p : found) {
      if (std::abs(std::abs(p.value - window.center) - window.radius) <= boundary_tol) {
        throw Error(ErrorCode::WindowBoundaryHit, kModule,
                    fmt::format("eigenvalue ({}, {}) lies on the window contour", p.value.real(), p.value.imag()));
      }
      if (window.contains(p.value)) inside.push_back(std::move(p));
    }
    if (inside.size() < found.size() || static_cast<Eigen::Index>(count) >= n) {
      std::sort(inside.begin(), inside.end(), by_real_then_imag);
      return inside;
    }
    if (count >= max_count) {
      throw Error(ErrorCode::ConvergenceFailure, kModule,
                  fmt::format("more than {} eigenvalues inside the window", max_count));
    }
    count = static_cast<int>(std::min<Eigen::Index>(std::min(2 * count, max_count), n));
  }
}

std::vector<EigenPair> eigs_dense(const OperatorMatrix& a) {
  const Eigen::MatrixXcd dense(a.entries);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, kModule, "dense eigensolver failed");
  std::vector<EigenPair> out;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    EigenPair p;
    p.value = es.eigenvalues()[i];
    p.vector = es.eigenvectors().col(i);
    p.vector /= norm(p.vector, a.cell_volume);
    p.residual = residual_of(a.entries, p.value, p.vector);
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), by_real_then_imag);
  return out;
}

std::vector<ComplexField> riesz_project(const OperatorMatrix& a, const SpectralWindow& window,
                                        std::span<const ComplexField> vectors, bool verify, std::uint64_t seed) {
  const Eigen::Index n = a.size();
  const auto k = static_cast<Eigen::Index>(vectors.size());
  Eigen::MatrixXcd rhs(n, k + (verify ? 1 : 0));
  for (Eigen::Index j = 0; j < k; ++j) rhs.col(j) = vectors[static_cast<std::size_t>(j)];
  if (verify) {
    std::mt19937_64 rng(seed);
    rhs.col(k) = random_unit_field(n, a.cell_volume, rng);
  }

  const int nodes = window.contour_nodes;
  // Nodes come in conjugate pairs z_q, z_{n-1-q}. If Sigma conj(A) Sigma = A
  // and the centre is real, (conj z - A)^-1 v = Sigma conj((z - A)^-1 Sigma conj v),
  // so only the upper half of the contour is factorized.
  const auto* sigma = a.conjugation.get();
  const bool paired = sigma != nullptr && window.center.imag() == 0.0 && nodes % 2 == 0;
  auto reflect_conj = [&](const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd y(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) y.row(i) = x.row(static_cast<Eigen::Index>((*sigma)[i])).conjugate();
    return y;
  };

  SparseMatrix m = -a.entries;
  Lu lu;
  lu.analyzePattern(m);
  auto quadrature = [&](const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(b.rows(), b.cols());
    const Eigen::Index cols = b.cols();
    Eigen::MatrixXcd batch = b;
    if (paired) {
      batch.resize(b.rows(), 2 * cols);
      batch << b, reflect_conj(b);
    }
    for (int q = 0; q < (paired ? nodes / 2 : nodes); ++q) {
      const double theta = 2.0 * std::numbers::pi * (q + 0.5) / nodes;
      const Complex ray = window.radius * std::exp(Complex(0.0, theta));
      const Complex z = window.center + ray;
      SparseMatrix zm = m;
      zm.diagonal().array() += z;
      lu.factorize(zm);
      if (lu.info() != Eigen::Success) {
        throw Error(ErrorCode::SolveFailure, kModule,
                    fmt::format("resolvent solve failed at contour node ({}, {})", z.real(), z.imag()));
      }
      const Complex weight = ray / static_cast<double>(nodes);
      const Eigen::MatrixXcd x = lu.solve(batch);
      if (paired) {
        acc += weight * x.leftCols(cols) + std::conj(weight) * reflect_conj(x.rightCols(cols));
      } else {
        acc += weight * x;
      }
    }
    return acc;
  };

  const Eigen::MatrixXcd projected = quadrature(rhs);
  if (verify) {
    const ComplexField once = projected.col(k);
    const Eigen::MatrixXcd twice = quadrature(once);
    const double defect = norm(twice.col(0) - once, a.cell_volume);
    if (defect > 1e-8) {
      throw Error(ErrorCode::NonIdempotent, kModule,
                  fmt::format("||Pi(Pi p) - Pi p|| = {:.3e} on the probe vector", defect));
    }
  }
  std::vector<ComplexField> out;
  out.reserve(vectors.size());
  for (Eigen::Index j = 0; j < k; ++j) out.emplace_back(projected.col(j));
  return out;
}

int projector_rank(const OperatorMatrix& a, const SpectralWindow& window, int probes, std::uint64_t seed) {
  if (probes < 4) throw std::invalid_argument("projector_rank needs at least 4 probes");
  std::mt19937_64 rng(seed);
  std::vector<ComplexField> in;
  for (int i = 0; i < probes; ++i) in.push_back(random_unit_field(a.size(), a.cell_volume, rng));
  const auto out = riesz_project(a, window, in);
  Eigen::MatrixXcd y(a.size(), probes);
  for (int i = 0; i < probes; ++i) y.col(i) = out[static_cast<std::size_t>(i)] * std::sqrt(a.cell_volume);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(y);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()[i] > 1e-6) ++rank;
  }
  return rank;
}

ComplexField random_unit_field(Eigen::Index n, double cell_volume, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexField u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    u[i] = Complex(re, im);
  }
  return u / norm(u, cell_volume);
}

double matching_distance(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  if (a.size() > 8) throw std::invalid_argument("matching_distance supports at most 8 values");
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return a.empty() ? 0.0 : best;
}

double conjugation_pairing_residual(std::span<const Complex> values) {
  std::vector<Complex> conj(values.begin(), values.end());
  for (auto& z : conj) z = std::conj(z);
  return matching_distance(values, conj);
}

std::vector<Complex> values_of(std::span<const EigenPair> pairs) {
  std::vector<Complex> out;
  for (const auto& p : pairs) out.push_back(p.value);
  return out;
}

}  // namespace ptwell
