#include "ptwell/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace ptwell {

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  size_ = 1;
  for (const auto& a : axes_) {
    if (a.count < 1 || !(a.spacing > 0.0)) throw std::invalid_argument("grid axis needs count >= 1 and spacing > 0");
    size_ *= static_cast<std::size_t>(a.count);
  }
}

Grid Grid::from_box(const Box& box, const std::vector<int>& nodes_per_axis) {
  if (box.extents.size() != nodes_per_axis.size()) {
    throw std::invalid_argument("box dimension and node counts disagree");
  }
  std::vector<Axis> axes;
  for (std::size_t k = 0; k < nodes_per_axis.size(); ++k) {
    const auto [lo, hi] = box.extents[k];
    const int n = nodes_per_axis[k];
    if (n < 3 || !(hi > lo)) throw std::invalid_argument("box axis needs max > min and at least 3 nodes");
    axes.push_back({0.5 * (lo + hi), (hi - lo) / (n - 1), n});
  }
  return Grid(std::move(axes));
}

Grid Grid::interior() const {
  std::vector<Axis> axes = axes_;
  for (auto& a : axes) a.count -= 2;
  return Grid(std::move(axes));
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (const auto& a : axes_) v *= a.spacing;
  return v;
}

double Grid::min_spacing() const {
  double s = axes_[0].spacing;
  for (const auto& a : axes_) s = std::min(s, a.spacing);
  return s;
}

std::array<int, 2> Grid::multi_index(std::size_t i) const {
  if (dimension() == 1) return {static_cast<int>(i), 0};
  const auto ny = static_cast<std::size_t>(axes_[1].count);
  return {static_cast<int>(i / ny), static_cast<int>(i % ny)};
}

std::size_t Grid::index(const std::array<int, 2>& m) const {
  if (dimension() == 1) return static_cast<std::size_t>(m[0]);
  return static_cast<std::size_t>(m[0]) * static_cast<std::size_t>(axes_[1].count) +
         static_cast<std::size_t>(m[1]);
}

Point Grid::point(std::size_t i) const {
  const auto m = multi_index(i);
  Point p{axes_[0].coordinate(m[0]), 0.0};
  if (dimension() == 2) p[1] = axes_[1].coordinate(m[1]);
  return p;
}

bool Grid::is_boundary(std::size_t i) const {
  const auto m = multi_index(i);
  for (int k = 0; k < dimension(); ++k) {
    if (m[k] == 0 || m[k] == axes_[k].count - 1) return true;
  }
  return false;
}

std::vector<std::size_t> Grid::face_neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  auto m = multi_index(i);
  for (int k = 0; k < dimension(); ++k) {
    for (int d : {-1, 1}) {
      auto n = m;
      n[k] += d;
      if (n[k] >= 0 && n[k] < axes_[k].count) out.push_back(index(n));
    }
  }
  return out;
}

std::string Grid::id() const {
  std::string s = fmt::format("d{}", dimension());
  for (const auto& a : axes_) s += fmt::format(":{}@[{:.6g},{:.6g}]", a.count, a.min(), a.max());
  return s;
}

}  // namespace ptwell
