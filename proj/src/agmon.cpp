#include "ptwell/agmon.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include <fmt/format.h>

#include "ptwell/errors.hpp"

namespace ptwell {

namespace {

constexpr const char* kModule = "agmon";

double root_plus(double v) { return std::sqrt(std::max(v, 0.0)); }

}  // namespace

double agmon_edge_weight(const RealField& v0, std::size_t a, std::size_t b, double length) {
  return length * 0.5 *
         (root_plus(v0[static_cast<Eigen::Index>(a)]) + root_plus(v0[static_cast<Eigen::Index>(b)]));
}

AgmonField agmon_distance_field(const Grid& grid, const RealField& v0, std::span<const std::size_t> sources,
                                int label) {
  if (sources.empty()) throw Error(ErrorCode::EmptySource, kModule, "distance field needs a nonempty source");
  if (static_cast<std::size_t>(v0.size()) != grid.size()) {
    throw Error(ErrorCode::EmptySource, kModule, "potential samples do not match the grid");
  }

  const double inf = std::numeric_limits<double>::infinity();
  RealField dist = RealField::Constant(static_cast<Eigen::Index>(grid.size()), inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t s : sources) {
    dist[static_cast<Eigen::Index>(s)] = 0.0;
    heap.emplace(0.0, s);
  }
  std::vector<char> done(grid.size(), 0);
  while (!heap.empty()) {
    const auto [d, i] = heap.top();
    heap.pop();
    if (done[i]) continue;
    done[i] = 1;
    grid.for_each_stencil_neighbor(i, [&](std::size_t j, double length) {
      if (done[j]) return;
      const double nd = d + agmon_edge_weight(v0, i, j, length);
      if (nd < dist[static_cast<Eigen::Index>(j)]) {
        dist[static_cast<Eigen::Index>(j)] = nd;
        heap.emplace(nd, j);
      }
    });
  }
  return {label, std::move(dist), grid.id()};
}

AgmonField agmon_distance_field(const Grid& grid, const RealField& v0, const WellSet& source) {
  return agmon_distance_field(grid, v0, source.cells, source.label);
}

double well_separation(const AgmonField& from_plus, const WellPair& wells) {
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t i : wells.minus.cells) {
    if (i >= static_cast<std::size_t>(from_plus.values.size())) {
      throw Error(ErrorCode::EmptySource, kModule, "well cells do not belong to the field's grid");
    }
    s = std::min(s, from_plus.values[static_cast<Eigen::Index>(i)]);
  }
  return s;
}

double well_diameter(const Grid& grid, const RealField& v0, const WellSet& well) {
  double diam = 0.0;
  for (std::size_t c : well.cells) {
    const std::size_t src[] = {c};
    const auto field = agmon_distance_field(grid, v0, src, well.label);
    for (std::size_t o : well.cells) diam = std::max(diam, field.values[static_cast<Eigen::Index>(o)]);
  }
  return diam;
}

bool diameter_exceeds_cell(const Grid& grid, const RealField& v0, const WellSet& well, double diameter) {
  double step = 0.0;
  for (std::size_t c : well.cells) {
    grid.for_each_stencil_neighbor(c, [&](std::size_t j, double length) {
      step = std::max(step, agmon_edge_weight(v0, c, j, length));
    });
  }
  return diameter > step;
}

EnvelopeReport decay_envelope_check(const ComplexField& u, const AgmonField& field, double h, double delta,
                                    std::optional<double> slack) {
  EnvelopeReport rep;
  rep.slack = slack.value_or(std::log(static_cast<double>(u.size())) + 5.0);
  rep.statistic = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    if (a == 0.0) continue;
    const double e = std::log(a) + (1.0 - delta) * field.values[i] / h;
    if (e > rep.statistic) {
      rep.statistic = e;
      rep.argmax = static_cast<std::size_t>(i);
    }
  }
  rep.passed = rep.statistic <= rep.slack;
  return rep;
}

}  // namespace ptwell
