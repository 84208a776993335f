#include "ptwell/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <queue>
#include <sstream>

#include <fmt/format.h>

#include "ptwell/agmon.hpp"
#include "ptwell/errors.hpp"

namespace ptwell {

namespace {

constexpr const char* kModule = "potentials";

double max_abs(const RealField& f) { return f.size() ? f.cwiseAbs().maxCoeff() : 0.0; }

// Linear interpolation on a sorted abscissa, clamped at the ends.
struct Linear1d {
  std::vector<double> xs;

  // Returns (left index, weight of the right neighbor).
  std::pair<std::size_t, double> locate(double x) const {
    if (xs.size() == 1 || x <= xs.front()) return {0, 0.0};
    if (x >= xs.back()) return {xs.size() - 2, 1.0};
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
    return {k, (x - xs[k]) / (xs[k + 1] - xs[k])};
  }
};

}  // namespace

PotentialSpec quartic_1d(const Box& box, double well_position, double shift, double w_scale) {
  PotentialSpec spec;
  spec.dimension = 1;
  const double a2 = well_position * well_position;
  spec.v0 = [a2, shift](const Point& p) {
    const double q = p[0] * p[0] - a2;
    return q * q - shift;
  };
  spec.w = [w_scale](const Point& p) { return w_scale * p[0]; };
  spec.involution = {0, 0.0};
  spec.domain_box = box;
  spec.name = "quartic1d";
  return spec;
}

PotentialSpec quartic_2d(const Box& box, double well_position, double omega_y, double w_scale) {
  PotentialSpec spec;
  spec.dimension = 2;
  const double a2 = well_position * well_position;
  const double w2 = omega_y * omega_y;
  spec.v0 = [a2, w2](const Point& p) {
    const double q = p[0] * p[0] - a2;
    return q * q + w2 * p[1] * p[1];
  };
  spec.w = [w_scale](const Point& p) { return w_scale * p[0] * std::exp(-p[1] * p[1]); };
  spec.involution = {0, 0.0};
  spec.domain_box = box;
  spec.name = "quartic2d";
  return spec;
}

PotentialSpec tabulated(const std::string& path, const Box& box, const Reflection& involution) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, kModule, fmt::format("cannot open potential table '{}'", path));

  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(std::remove_if(cell.begin(), cell.end(), ::isspace), cell.end());
      header.push_back(cell);
    }
  }
  const bool two_d = header == std::vector<std::string>{"x", "y", "v0", "w"};
  if (!two_d && header != std::vector<std::string>{"x", "v0", "w"}) {
    throw Error(ErrorCode::IoError, kModule,
                fmt::format("potential table '{}' needs header 'x,v0,w' or 'x,y,v0,w'", path));
  }
  const std::size_t ncols = header.size();

  std::map<std::pair<double, double>, std::pair<double, double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::IoError, kModule, fmt::format("{}:{}: bad number '{}'", path, lineno, cell));
      }
    }
    if (v.size() != ncols) {
      throw Error(ErrorCode::IoError, kModule, fmt::format("{}:{}: expected {} columns", path, lineno, ncols));
    }
    if (two_d) {
      rows[{v[0], v[1]}] = {v[2], v[3]};
    } else {
      rows[{v[0], 0.0}] = {v[1], v[2]};
    }
  }
  if (rows.size() < 2) throw Error(ErrorCode::IoError, kModule, fmt::format("potential table '{}' is empty", path));

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [key, _] : rows) {
    xs.push_back(key.first);
    ys.push_back(key.second);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  if (xs.size() * ys.size() != rows.size()) {
    throw Error(ErrorCode::IoError, kModule, fmt::format("potential table '{}' is not a full lattice", path));
  }

  auto v0_table = std::make_shared<std::vector<double>>();
  auto w_table = std::make_shared<std::vector<double>>();
  for (const auto& [_, vals] : rows) {  // map order: x slow, y fast
    v0_table->push_back(vals.first);
    w_table->push_back(vals.second);
  }
  auto ix = std::make_shared<Linear1d>(Linear1d{xs});
  auto iy = std::make_shared<Linear1d>(Linear1d{ys});
  const std::size_t ny = ys.size();

  auto interp = [ix, iy, ny, two_d](const std::vector<double>& table, const Point& p) {
    const auto [i, s] = ix->locate(p[0]);
    if (!two_d) return (1.0 - s) * table[i] + s * table[std::min(i + 1, ix->xs.size() - 1)];
    const auto [j, t] = iy->locate(p[1]);
    const std::size_t i1 = std::min(i + 1, ix->xs.size() - 1);
    const std::size_t j1 = std::min(j + 1, ny - 1);
    return (1.0 - s) * ((1.0 - t) * table[i * ny + j] + t * table[i * ny + j1]) +
           s * ((1.0 - t) * table[i1 * ny + j] + t * table[i1 * ny + j1]);
  };

  PotentialSpec spec;
  spec.dimension = two_d ? 2 : 1;
  spec.v0 = [interp, v0_table](const Point& p) { return interp(*v0_table, p); };
  spec.w = [interp, w_table](const Point& p) { return interp(*w_table, p); };
  spec.involution = involution;
  spec.domain_box = box;
  spec.name = "tabulated:" + path;
  return spec;
}

RealField sample(const ScalarField& f, const Grid& grid) {
  RealField out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) out[static_cast<Eigen::Index>(i)] = f(grid.point(i));
  return out;
}

std::vector<std::size_t> involution_permutation(const Grid& grid, const Reflection& r) {
  if (r.axis < 0 || r.axis >= grid.dimension()) {
    throw Error(ErrorCode::GridNotInvariant, kModule, fmt::format("reflection axis {} out of range", r.axis));
  }
  const Axis& ax = grid.axis(r.axis);
  std::vector<std::size_t> perm(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point q = r.apply(grid.point(i));
    const double pos = (q[r.axis] - ax.min()) / ax.spacing;
    const double k = std::round(pos);
    if (std::abs(pos - k) > 1e-12 * std::max(1.0, std::abs(pos)) || k < 0 || k > ax.count - 1) {
      throw Error(ErrorCode::GridNotInvariant, kModule,
                  fmt::format("node {} reflects to coordinate {} which is not a grid node", i, q[r.axis]));
    }
    auto m = grid.multi_index(i);
    m[r.axis] = static_cast<int>(k);
    perm[i] = grid.index(m);
  }
  return perm;
}

SymmetryReport validate_symmetry(const PotentialSpec& spec, const Grid& grid) {
  involution_permutation(grid, spec.involution);
  SymmetryReport rep;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.point(i);
    const Point ix = spec.involution.apply(x);
    const Point iix = spec.involution.apply(ix);
    for (int k = 0; k < grid.dimension(); ++k) {
      rep.involution_residual = std::max(rep.involution_residual, std::abs(iix[k] - x[k]));
    }
    const double v = spec.v0(x);
    const double w = spec.w(x);
    rep.v0_residual = std::max(rep.v0_residual, std::abs(spec.v0(ix) - v));
    rep.w_residual = std::max(rep.w_residual, std::abs(spec.w(ix) + w));
    rep.v0_scale = std::max(rep.v0_scale, std::abs(v));
    rep.w_scale = std::max(rep.w_scale, std::abs(w));
  }
  const double tol = 1e-12;
  rep.passed = std::isfinite(rep.w_scale) && rep.involution_residual <= tol * grid.min_spacing() &&
               rep.v0_residual <= tol * rep.v0_scale && rep.w_residual <= tol * rep.w_scale;
  return rep;
}

std::vector<bool> sublevel_cells(const Grid& grid, const RealField& values, double zero_tol) {
  std::vector<bool> in(grid.size(), false);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = values[static_cast<Eigen::Index>(i)];
    if (v <= zero_tol) {
      in[i] = true;
      continue;
    }
    bool local_min = true;
    double rise = 0.0;
    for (std::size_t j : grid.face_neighbors(i)) {
      const double vj = values[static_cast<Eigen::Index>(j)];
      if (vj < v) {
        local_min = false;
        break;
      }
      rise = std::max(rise, vj - v);
    }
    in[i] = local_min && v <= rise;
  }
  return in;
}

WellPair locate_wells(const PotentialSpec& spec, const Grid& grid) {
  return locate_wells(grid, sample(spec.v0, grid), spec.involution);
}

WellPair locate_wells(const Grid& grid, const RealField& v0, const Reflection& involution) {
  const auto in = sublevel_cells(grid, v0, 1e-12 * max_abs(v0));

  std::vector<int> component(grid.size(), -1);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (!in[s] || component[s] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    std::queue<std::size_t> q;
    q.push(s);
    component[s] = id;
    while (!q.empty()) {
      const std::size_t i = q.front();
      q.pop();
      comps.back().push_back(i);
      for (std::size_t j : grid.face_neighbors(i)) {
        if (in[j] && component[j] < 0) {
          component[j] = id;
          q.push(j);
        }
      }
    }
  }
  if (comps.size() != 2) {
    throw Error(ErrorCode::WellCountMismatch, kModule,
                fmt::format("expected 2 components of {{V0 <= 0}}, found {}", comps.size()));
  }

  WellPair wells;
  for (auto& cells : comps) {
    std::sort(cells.begin(), cells.end());
    for (std::size_t i : cells) {
      if (grid.is_boundary(i)) {
        throw Error(ErrorCode::WellTouchesBoundary, kModule,
                    fmt::format("well cell {} lies on the domain boundary", i));
      }
    }
    WellSet w;
    w.cells = cells;
    w.representative = *std::min_element(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) {
      return v0[static_cast<Eigen::Index>(a)] < v0[static_cast<Eigen::Index>(b)];
    });
    const double side = grid.point(w.representative)[involution.axis] - involution.center;
    w.label = side > 0 ? 1 : -1;
    (w.label > 0 ? wells.plus : wells.minus) = std::move(w);
  }
  if (wells.plus.cells.empty() || wells.minus.cells.empty()) {
    throw Error(ErrorCode::SymmetryViolation, kModule, "both wells lie on the same side of the reflection");
  }

  const auto perm = involution_permutation(grid, involution);
  std::vector<std::size_t> image;
  for (std::size_t i : wells.minus.cells) image.push_back(perm[i]);
  std::sort(image.begin(), image.end());
  if (image != wells.plus.cells) {
    throw Error(ErrorCode::SymmetryViolation, kModule, "the reflection does not exchange the two wells");
  }
  return wells;
}

double plateau(double d, double delta) {
  const double lo = delta / 3.0;
  if (d <= lo) return 1.0;
  if (d >= delta) return 0.0;
  const double s = (d - lo) / (delta - lo);
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return b / (a + b);
}

FillSpec build_fill(const Grid& grid, const RealField& v0, const WellPair& wells,
                    const AgmonField& from_plus, const AgmonField& from_minus, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::BallsOverlap, kModule, "cut-off radius must be positive");
  const double s0 = well_separation(from_plus, wells);
  bool overlap = delta >= 0.5 * s0;
  for (Eigen::Index i = 0; i < v0.size() && !overlap; ++i) {
    overlap = from_plus.values[i] <= delta && from_minus.values[i] <= delta;
  }
  if (overlap) {
    throw Error(ErrorCode::BallsOverlap, kModule,
                fmt::format("Agmon balls of radius {} around the wells intersect (S0 = {})", delta, s0));
  }

  FillSpec fill;
  fill.cutoff_radius = delta;
  fill.chi_plus = from_plus.values.unaryExpr([delta](double d) { return plateau(d, delta); });
  fill.chi_minus = from_minus.values.unaryExpr([delta](double d) { return plateau(d, delta); });

  const double depth = std::max(0.0, -v0.minCoeff());
  double ball_max = 0.0;
  for (Eigen::Index i = 0; i < v0.size(); ++i) {
    if (from_plus.values[i] <= delta || from_minus.values[i] <= delta) {
      ball_max = std::max(ball_max, std::abs(v0[i]));
    }
  }
  fill.fill_strength = 2.0 * depth + ball_max + 1.0;

  const double zero_tol = 1e-12 * max_abs(v0);
  for (int j : {1, -1}) {
    const RealField filled = v0 + fill.fill_strength * fill.chi(-j);
    const auto in = sublevel_cells(grid, filled, zero_tol);
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (in[i]) cells.push_back(i);
    }
    if (cells != wells[j].cells) {
      throw Error(ErrorCode::FillInsufficient, kModule,
                  fmt::format("filling U_{} with lambda = {} leaves a sublevel set different from U_{}", -j,
                              fill.fill_strength, j));
    }
  }
  return fill;
}

}  // namespace ptwell
