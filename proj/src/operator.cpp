#include "ptwell/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "ptwell/errors.hpp"

namespace ptwell {

namespace {

constexpr const char* kModule = "operator";

using Triplet = Eigen::Triplet<Complex>;

SparseMatrix with_diagonal(const SparseMatrix& base, const ComplexField& diag) {
  SparseMatrix d(base.rows(), base.cols());
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(diag.size()));
  for (Eigen::Index i = 0; i < diag.size(); ++i) t.emplace_back(i, i, diag[i]);
  d.setFromTriplets(t.begin(), t.end());
  SparseMatrix out = base + d;
  out.makeCompressed();
  return out;
}

}  // namespace

double OperatorMatrix::scale() const {
  double s = 0.0;
  for (int k = 0; k < entries.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(entries, k); it; ++it) s = std::max(s, std::abs(it.value()));
  }
  return s;
}

SparseMatrix kinetic_matrix(const Grid& grid, double h) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  std::vector<Triplet> t;
  t.reserve(grid.size() * (1 + 2 * grid.dimension()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto m = grid.multi_index(i);
    double diag = 0.0;
    for (int k = 0; k < grid.dimension(); ++k) {
      const double c = h * h / (grid.axis(k).spacing * grid.axis(k).spacing);
      diag += 2.0 * c;
      for (int d : {-1, 1}) {
        auto nb = m;
        nb[k] += d;
        if (nb[k] < 0 || nb[k] >= grid.axis(k).count) continue;
        t.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(grid.index(nb)), -c);
      }
    }
    t.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), diag);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

OperatorFamily::OperatorFamily(const Grid& grid, RealField v0, RealField w, double h,
                               std::vector<std::size_t> parity)
    : v0_(std::move(v0)), w_(std::move(w)) {
  p0_.entries = with_diagonal(kinetic_matrix(grid, h), v0_.cast<Complex>());
  p0_.h = h;
  p0_.cell_volume = grid.cell_volume();
  if (parity.empty()) return;
  if (parity.size() != grid.size()) {
    throw Error(ErrorCode::SymmetryViolation, kModule, "parity permutation does not match the grid");
  }
  const double v_tol = 1e-12 * std::max(1.0, v0_.cwiseAbs().maxCoeff());
  const double w_tol = 1e-12 * std::max(1.0, w_.cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < parity.size(); ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(parity[i]);
    if (std::abs(v0_[a] - v0_[b]) > v_tol || std::abs(w_[a] + w_[b]) > w_tol) {
      throw Error(ErrorCode::SymmetryViolation, kModule,
                  fmt::format("V0 even / W odd fails at node {} under the parity map", i));
    }
  }
  p0_.conjugation = std::make_shared<const std::vector<std::size_t>>(std::move(parity));
}

OperatorMatrix OperatorFamily::at(double epsilon) const {
  if (epsilon == 0.0) return p0_;
  OperatorMatrix op = p0_;
  op.epsilon = epsilon;
  op.entries.diagonal() += (Complex(0.0, epsilon) * w_.cast<Complex>()).eval();
  return op;
}

OperatorMatrix assemble(const Grid& grid, const PotentialSpec& spec, double h, double epsilon) {
  return OperatorFamily(grid, sample(spec.v0, grid), sample(spec.w, grid), h).at(epsilon);
}

OperatorMatrix assemble_reference(const Grid& grid, const RealField& v0, const FillSpec& fill, double h,
                                  int label) {
  OperatorMatrix op;
  const RealField filled = v0 + fill.fill_strength * fill.chi(-label);
  op.entries = with_diagonal(kinetic_matrix(grid, h), filled.cast<Complex>());
  op.kind = OperatorKind::Reference;
  op.reference_label = label;
  op.h = h;
  op.cell_volume = grid.cell_volume();
  auto identity = std::make_shared<std::vector<std::size_t>>(grid.size());
  std::iota(identity->begin(), identity->end(), std::size_t{0});
  op.conjugation = std::move(identity);
  return op;
}

OperatorMatrix assemble_reference(const Grid& grid, const PotentialSpec& spec, const FillSpec& fill, double h,
                                  int label) {
  return assemble_reference(grid, sample(spec.v0, grid), fill, h, label);
}

double essential_threshold(const PotentialSpec& spec, const Grid& box_grid) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < box_grid.size(); ++i) {
    if (box_grid.is_boundary(i)) m = std::min(m, spec.v0(box_grid.point(i)));
  }
  return m;
}

ComplexField permute(const ComplexField& u, std::span<const std::size_t> perm) {
  ComplexField out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = u[static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])];
  return out;
}

double pt_residual(const OperatorMatrix& op, std::span<const std::size_t> perm) {
  double r = 0.0;
  const SparseMatrix& a = op.entries;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      const auto pi = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(it.row())]);
      const auto pj = static_cast<Eigen::Index>(perm[static_cast<std::size_t>(it.col())]);
      r = std::max(r, std::abs(std::conj(a.coeff(pi, pj)) - it.value()));
    }
  }
  return r;
}

double asymmetry_residual(const OperatorMatrix& op) {
  double r = 0.0;
  const SparseMatrix& a = op.entries;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      r = std::max(r, std::abs(it.value() - a.coeff(it.col(), it.row())));
      r = std::max(r, std::abs(it.value().imag()));
    }
  }
  return r;
}

void export_coordinates(const OperatorMatrix& op, std::ostream& out) {
  const SparseMatrix& a = op.entries;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      out << fmt::format("{} {} {:.17g} {:.17g}\n", it.row(), it.col(), it.value().real(), it.value().imag());
    }
  }
}

}  // namespace ptwell
