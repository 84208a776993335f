#include <doctest.h>

#include <sstream>
#include <string>

#include "ptwell/errors.hpp"
#include "ptwell/report.hpp"
#include "ptwell/scenario.hpp"
#include "support.hpp"

using namespace ptwell;

namespace {

const std::string kMinimal = R"([potential]
family = quartic1d
[domain]
x = -3 3
nodes = 303
[semiclassical]
h = 0.4
)";

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigInvalid);
    return e.what();
  }
  FAIL("expected ConfigInvalid");
  return {};
}

}  // namespace

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("minimal config takes the defaults") {
  const ScenarioConfig cfg = parse_config(kMinimal);
  CHECK(cfg.family == "quartic1d");
  CHECK(cfg.nodes == std::vector<int>{303});
  CHECK(cfg.h_values == std::vector<double>{0.4});
  CHECK_FALSE(cfg.window_center.has_value());
  CHECK(cfg.radius_fraction == 0.1);
  CHECK(cfg.contour_nodes == 32);
  CHECK(cfg.hash == fnv1a(kMinimal));
  CHECK(cfg.hash_hex().size() == 16);
  CHECK(parse_config(kMinimal + "\n").hash != cfg.hash);
}

TEST_CASE("invalid configs") {
  CHECK(config_error(kMinimal + "[window]\nshape = square\n").find("window.shape") != std::string::npos);
  CHECK(config_error(kMinimal + "[extra]\nk = 1\n").find("extra") != std::string::npos);
  // eps_max above a tenth of the window radius at the default fraction.
  CHECK(config_error(kMinimal + "[window]\ncenter = 0.5\nradius = 0.2\n[epsilon]\nmax = 0.05\n")
            .find("epsilon.max") != std::string::npos);
  // Several problems are reported together.
  const std::string both = config_error(R"([potential]
family = cubic
[domain]
x = 3 -3
nodes = 303
[semiclassical]
h = -1
)");
  CHECK(both.find("potential.family") != std::string::npos);
  CHECK(both.find("semiclassical.h") != std::string::npos);
  CHECK_NOTHROW(parse_config(kMinimal + "[window]\ncenter = 0.5\nradius = 0.2\n[epsilon]\nmax = 0.02\n"));
}

TEST_CASE("sweep grid beyond the admitted fraction is refused") {
  ScenarioConfig cfg = testing::quartic1d_config();
  cfg.radius_fraction = 0.1;
  const Problem& p = testing::quartic1d_problem(0.4);
  CHECK_THROWS_AS(sweep_epsilons(cfg, p), Error);
}

TEST_CASE("bundled scenarios meet the reference resolution") {
  const auto& g = testing::quartic1d_geometry();
  CHECK(g.grid.size() >= 1200);
  CHECK(g.symmetry.passed);
  const ScenarioConfig two = load_config(testing::scenario_path("quartic2d.ini"));
  CHECK(two.nodes[0] - 2 >= 200);
  CHECK(two.nodes[1] - 2 >= 130);
  CHECK(two.name == "quartic2d");
}

TEST_CASE("CSV output") {
  std::ostringstream out;
  CsvWriter w(out, "abc", {"x", "y"});
  w.row({format_number(0.1), format_number(-2.0)});
  CHECK(out.str() == "config_hash,x,y\nabc,0.10000000000000001,-2\n");
  CHECK_THROWS(w.row({"1"}));

  const auto [slope, intercept] = linear_fit({1.0, 2.0, 3.0}, {3.0, 5.0, 7.0});
  CHECK(slope == doctest::Approx(2.0));
  CHECK(intercept == doctest::Approx(1.0));
}

TEST_CASE("agmon CSV is reproducible") {
  const auto& cfg = testing::quartic1d_config();
  std::ostringstream a, b;
  write_agmon_csv(a, cfg, testing::quartic1d_geometry());
  write_agmon_csv(b, cfg, build_geometry(cfg));
  CHECK(a.str() == b.str());
}
