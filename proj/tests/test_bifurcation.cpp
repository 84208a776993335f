#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ptwell/bifurcation.hpp"
#include "ptwell/errors.hpp"
#include "support.hpp"

using namespace ptwell;

namespace {

// 2x2 PT-symmetric model with exact threshold tau / kappa.
constexpr double kMu = 1.0, kTau = 0.03, kKappa = 0.8;

ReducedModel synthetic_model(double eps) {
  ReducedModel m;
  m.epsilon = eps;
  m.a = Complex(kMu, kKappa * eps);
  m.b = Complex(0.6 * kTau, 0.8 * kTau);
  m.matrix << m.a, m.b, std::conj(m.b), std::conj(m.a);
  return m;
}

OperatorMatrix synthetic_operator(double eps) {
  OperatorMatrix op;
  op.epsilon = eps;
  op.entries.resize(2, 2);
  op.entries.insert(0, 0) = Complex(kMu, kKappa * eps);
  op.entries.insert(0, 1) = kTau;
  op.entries.insert(1, 0) = kTau;
  op.entries.insert(1, 1) = Complex(kMu, -kKappa * eps);
  op.entries.makeCompressed();
  return op;
}

}  // namespace

TEST_CASE("discriminant factors") {
  const Discriminant d = discriminant(Complex(0.0, 0.3), Complex(0.5, 0.0));
  CHECK(d.value == doctest::Approx(0.16));
  CHECK(d.f == doctest::Approx(0.2));
  CHECK(d.sum_factor == doctest::Approx(0.8));
  CHECK(d.f * d.sum_factor == doctest::Approx(d.value));
  CHECK(discriminant(Complex(1.0, 0.5), Complex(0.0, 0.3)).value == doctest::Approx(-0.16));
  CHECK(discriminant(Complex(1.0, 0.5), Complex(0.3, 0.4)).f == doctest::Approx(0.0));
}

TEST_CASE("leading-order threshold") {
  CHECK(predict_threshold(Complex(0.0, 0.0), 1.0) == 0.0);
  CHECK(predict_threshold(Complex(0.0, 1e-6), 0.5) == doctest::Approx(2e-6));
  CHECK_THROWS_AS(predict_threshold(Complex(1.0, 0.0), 0.0), Error);
}

TEST_CASE("threshold locators on a synthetic 2x2 family") {
  const double exact = kTau / kKappa;
  const double tol = 1e-6;
  const double model = locate_threshold(synthetic_model, 0.5 * exact, 2.0 * exact, tol);
  CHECK(std::abs(model - exact) <= tol * exact);

  SpectralWindow w{Complex(kMu, 0.0), 0.5, 32};
  const double direct = locate_threshold_direct(synthetic_operator, w, 0.5 * exact, 2.0 * exact, tol, 1e-12);
  CHECK(std::abs(direct - exact) <= 2.0 * tol * exact);

  try {
    locate_threshold(synthetic_model, 1.2 * exact, 2.0 * exact, tol);
    FAIL("expected BracketInvalid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BracketInvalid);
  }
  CHECK_THROWS_AS(locate_threshold_direct(synthetic_operator, w, 0.1 * exact, 0.5 * exact, tol, 1e-12), Error);
}

TEST_CASE("mirror identity: eps -> -eps conjugates a and b and keeps the eigenvalues") {
  for (double eps : {0.01, 0.0375, 0.05}) {
    const ReducedModel m = synthetic_model(eps);
    const auto [p, q] = reduced_eigenvalues(m.a, m.b);
    const auto [pm, qm] = reduced_eigenvalues(std::conj(m.a), std::conj(m.b));
    CHECK(std::abs(p - pm) < 1e-15);
    CHECK(std::abs(q - qm) < 1e-15);
  }
}

TEST_CASE("epsilon grid") {
  const auto g = epsilon_grid(1.0, 2, 0.0, 0.1, 4.0);
  const std::vector<double> expected{0.0, 0.1, 0.25, 0.5, 2.0, 4.0};
  REQUIRE(g.size() == expected.size());
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(g[k] == doctest::Approx(expected[k]));
  CHECK(std::is_sorted(g.begin(), g.end()));
  const auto clipped = epsilon_grid(1.0, 2, 1.0, 0.1, 4.0);
  CHECK(clipped.back() == doctest::Approx(0.5));
}

TEST_CASE("window_pair refuses windows without exactly two eigenvalues") {
  SpectralWindow w{Complex(kMu + 0.025, 0.0), 0.01, 32};
  try {
    window_pair(synthetic_operator(0.0), w);
    FAIL("expected WindowInvalid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WindowInvalid);
  }
}

TEST_CASE("sweep of the 1D quartic at h = 0.4") {
  const auto& cfg = testing::quartic1d_config();
  const Problem& p = testing::quartic1d_problem(0.4);
  const auto eps = sweep_epsilons(cfg, p);
  const BifurcationReport r = sweep(p.doublet(), eps, sweep_options(cfg, 1));
  for (const auto& c : r.checks) {
    CAPTURE(c.name);
    CAPTURE(c.value);
    CHECK(c.passed);
  }
  CHECK(r.passed());
  REQUIRE(r.find("located_vs_direct") != nullptr);
  CHECK(r.find("no_such_check") == nullptr);

  // Verdicts for eps >= 0: real, one collision, complex.
  std::vector<Verdict> seq;
  for (const auto& row : r.rows) {
    if (row.epsilon >= 0.0) seq.push_back(row.verdict);
  }
  CHECK(std::is_sorted(seq.begin(), seq.end()));
  CHECK(std::count(seq.begin(), seq.end(), Verdict::Collision) == 1);
  CHECK(seq.front() == Verdict::RealDistinct);
  CHECK(seq.back() == Verdict::ComplexPair);

  // Mirrored rows carry the conjugated model.
  for (const auto& row : r.rows) {
    if (row.epsilon >= 0.0) continue;
    const auto twin = std::find_if(r.rows.begin(), r.rows.end(),
                                   [&](const SweepRow& s) { return s.epsilon == -row.epsilon; });
    REQUIRE(twin != r.rows.end());
    CHECK(std::abs(row.a - std::conj(twin->a)) < 1e-12);
    CHECK(std::abs(row.lambda_plus - twin->lambda_plus) < 1e-12);
  }
  CHECK(std::abs(r.epsilon_plus_located - r.epsilon_plus_direct) / r.epsilon_plus_located < 1e-3);
}
