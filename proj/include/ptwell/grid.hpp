#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ptwell {

using Complex = std::complex<double>;
using RealField = Eigen::VectorXd;
using ComplexField = Eigen::VectorXcd;

/// Point in R^1 or R^2; the second coordinate is unused in 1D.
using Point = std::array<double, 2>;

struct Interval {
  double min = 0.0;
  double max = 0.0;
};

/// Axis-aligned truncation box, one interval per dimension.
struct Box {
  std::vector<Interval> extents;
  int dimension() const { return static_cast<int>(extents.size()); }
};

/// Uniform node distribution along one axis. Coordinates are generated
/// symmetrically about `center` so that reflections map nodes to nodes
/// bit-exactly.
struct Axis {
  double center = 0.0;
  double spacing = 1.0;
  int count = 0;

  double coordinate(int k) const { return center + (k - 0.5 * (count - 1)) * spacing; }
  double min() const { return coordinate(0); }
  double max() const { return coordinate(count - 1); }
};

/// Tensor-product grid in one or two dimensions. Node index is row-major with
/// the last axis fastest.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<Axis> axes);

  /// All nodes of `box` with `nodes_per_axis[k]` nodes on axis k, including
  /// the nodes on the box faces. spacing = (max - min) / (n - 1).
  static Grid from_box(const Box& box, const std::vector<int>& nodes_per_axis);

  /// The grid with the outermost layer of nodes removed, same spacing. These
  /// are the unknowns of a Dirichlet problem on the box.
  Grid interior() const;

  int dimension() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return size_; }
  const Axis& axis(int k) const { return axes_[k]; }
  const std::vector<Axis>& axes() const { return axes_; }
  double cell_volume() const;
  /// Smallest spacing over the axes.
  double min_spacing() const;

  std::array<int, 2> multi_index(std::size_t i) const;
  std::size_t index(const std::array<int, 2>& m) const;
  Point point(std::size_t i) const;
  bool is_boundary(std::size_t i) const;

  /// Face neighbors (axis steps of +-1).
  std::vector<std::size_t> face_neighbors(std::size_t i) const;

  /// Neighbors in the full 3^n - 1 stencil together with their Euclidean
  /// distance.
  template <class Fn>
  void for_each_stencil_neighbor(std::size_t i, Fn&& fn) const;

  /// Short identifier describing the geometry, used to tag derived fields.
  std::string id() const;

 private:
  std::vector<Axis> axes_;
  std::size_t size_ = 0;
};

template <class Fn>
void Grid::for_each_stencil_neighbor(std::size_t i, Fn&& fn) const {
  const auto m = multi_index(i);
  if (dimension() == 1) {
    for (int d : {-1, 1}) {
      const int k = m[0] + d;
      if (k >= 0 && k < axes_[0].count) fn(index({k, 0}), axes_[0].spacing);
    }
    return;
  }
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      if (dx == 0 && dy == 0) continue;
      const int a = m[0] + dx;
      const int b = m[1] + dy;
      if (a < 0 || b < 0 || a >= axes_[0].count || b >= axes_[1].count) continue;
      const double lx = dx * axes_[0].spacing;
      const double ly = dy * axes_[1].spacing;
      fn(index({a, b}), std::sqrt(lx * lx + ly * ly));
    }
  }
}

/// Weighted L2 inner product (u|v) = cell_volume * sum u conj(v).
inline Complex inner(const ComplexField& u, const ComplexField& v, double cell_volume) {
  return cell_volume * v.dot(u);
}

inline double norm(const ComplexField& u, double cell_volume) {
  return std::sqrt(cell_volume) * u.norm();
}

}  // namespace ptwell
