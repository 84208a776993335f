#include <doctest.h>

#include <cmath>
#include <random>

#include "ptwell/agmon.hpp"
#include "ptwell/errors.hpp"
#include "ptwell/potentials.hpp"
#include "support.hpp"

using namespace ptwell;

TEST_CASE("S0 of the 1D quartic matches the quadrature of sqrt(V0) between the wells") {
  // d(-1, 1) = integral over [-1, 1] of |x^2 - 1| dx.
  const double oracle = testing::simpson([](double x) { return std::abs(x * x - 1.0); }, -1.0, 1.0, 2000);
  CHECK(oracle == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  const auto& g = testing::quartic1d_geometry();
  CHECK(std::abs(g.s0 - oracle) / oracle < 0.01);
  CHECK(well_separation(g.from_minus, WellPair{g.wells.plus, g.wells.minus}) ==
        doctest::Approx(g.s0).epsilon(1e-3));
}

TEST_CASE("Agmon distance is a metric on node triples") {
  const auto& g = testing::quartic1d_geometry();
  std::mt19937_64 rng(20261018);
  std::uniform_int_distribution<std::size_t> pick(0, g.grid.size() - 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
    const std::size_t src_a[] = {a};
    const std::size_t src_b[] = {b};
    const auto da = agmon_distance_field(g.grid, g.v0, src_a);
    const auto db = agmon_distance_field(g.grid, g.v0, src_b);
    const auto i = [](std::size_t k) { return static_cast<Eigen::Index>(k); };
    // Exact up to the summation order of the two paths.
    CHECK(da.values[i(c)] <= da.values[i(b)] + db.values[i(c)] + 1e-12);
    CHECK(std::abs(da.values[i(b)] - db.values[i(a)]) <= 1e-12);
    CHECK(da.values[i(a)] == 0.0);
  }
}

TEST_CASE("Agmon field in 2D is symmetric under the reflection") {
  const Box box{{{-3.0, 3.0}, {-2.0, 2.0}}};
  const auto spec = quartic_2d(box);
  const Grid grid = Grid::from_box(box, {61, 41}).interior();
  const RealField v0 = sample(spec.v0, grid);
  const auto wells = locate_wells(spec, grid);
  const auto dp = agmon_distance_field(grid, v0, wells.plus);
  const auto dm = agmon_distance_field(grid, v0, wells.minus);
  const auto perm = involution_permutation(grid, spec.involution);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    worst = std::max(worst, std::abs(dp.values[static_cast<Eigen::Index>(k)] -
                                     dm.values[static_cast<Eigen::Index>(perm[k])]));
  }
  CHECK(worst < 1e-12);
  // The 8-neighbor graph overestimates the straight path by at most a few percent.
  const double s0 = well_separation(dp, wells);
  CHECK(s0 > 4.0 / 3.0 * 0.99);
  CHECK(s0 < 4.0 / 3.0 * 1.03);
}

TEST_CASE("Agmon field errors") {
  const auto& g = testing::quartic1d_geometry();
  const std::vector<std::size_t> none;
  CHECK_THROWS_AS(agmon_distance_field(g.grid, g.v0, none), Error);
  try {
    agmon_distance_field(g.grid, g.v0, none);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySource);
  }
  const RealField short_v0 = RealField::Zero(3);
  const std::size_t src[] = {0};
  CHECK_THROWS_AS(agmon_distance_field(g.grid, short_v0, src), Error);
}

TEST_CASE("edge weight is the trapezoid of sqrt(V0_+)") {
  RealField v0(3);
  v0 << 4.0, -1.0, 9.0;
  CHECK(agmon_edge_weight(v0, 0, 2, 0.5) == doctest::Approx(0.5 * 2.5));
  CHECK(agmon_edge_weight(v0, 0, 1, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("decay envelope of a profile with the exact rate") {
  const auto& g = testing::quartic1d_geometry();
  const double h = 0.25;
  ComplexField u(static_cast<Eigen::Index>(g.grid.size()));
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = std::exp(-g.from_plus.values[i] / h);
  u /= norm(u, g.grid.cell_volume());
  const auto rep = decay_envelope_check(u, g.from_plus, h, 0.3);
  CHECK(rep.passed);
  // The statistic is max log|u| - 0.3 d / h, attained at the well itself.
  CHECK(rep.statistic == doctest::Approx(std::log(std::abs(u[static_cast<Eigen::Index>(rep.argmax)]))).epsilon(1e-9));

  ComplexField slow(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) slow[i] = std::exp(-0.1 * g.from_plus.values[i] / h);
  slow /= norm(slow, g.grid.cell_volume());
  CHECK_FALSE(decay_envelope_check(slow, g.from_plus, h, 0.3, 1.0).passed);
}
