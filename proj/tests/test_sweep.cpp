#include "ldg/sweep.hpp"

#include <doctest.h>

using namespace ldg;
using doctest::Approx;

TEST_CASE("config parsing and validation") {
  SweepConfig c = SweepConfig::from_json({{"b2", 1.0}, {"M_grid", {0.0, 5.0}}, {"R_grid", {10.0}}});
  CHECK(c.b2 == 1.0);
  CHECK(c.M_grid.size() == 2);
  CHECK_NOTHROW(c.validate());
  CHECK(SweepConfig::from_json(c.to_json()).to_json() == c.to_json());

  CHECK_THROWS_AS(SweepConfig::from_json({{"colour", 1}}), std::invalid_argument);
  CHECK_THROWS_AS(SweepConfig::from_json({{"M_grid", {-0.8}}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(SweepConfig::from_json({{"M_grid", {1.0, 0.0}}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(SweepConfig::from_json({{"branches", {"q9"}}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(SweepConfig::from_json({{"R_grid", {-1.0}}}).validate(), std::invalid_argument);
  CHECK(is_radial_branch("q3"));
  CHECK_FALSE(is_radial_branch("nr_vertical"));
}

TEST_CASE("single point equals a direct solve") {
  SweepConfig c;
  c.b2 = 1;
  c.M_grid = {5.0};
  c.R_grid = {10.0};
  c.branches = {"q3"};
  c.radial_N = 500;
  const PhaseDiagram pd = continuation_sweep(c);
  REQUIRE(pd.points.size() == 1);
  MaterialParams p;
  p.b2 = 1;
  p.M = 5;
  p.R = 10;
  RadialOptions o;
  o.N = 500;
  const RadialResult r = minimize_radial(p, Branch::Q3, o);
  CHECK(pd.points[0].energy == Approx(radial_to_field_energy(r.energy, p)).epsilon(1e-8));
  CHECK(pd.points[0].resolved);
  CHECK(pd.unresolved() == 0);
  CHECK(pd.transitions.empty());
}

TEST_CASE("b = 1, R = 10: Q3 to Q2 transition is bracketed") {
  SweepConfig c;
  c.b2 = 1;
  c.M_grid = {-0.55, 0.0, 5.0, 100.0};
  c.R_grid = {10.0};
  c.radial_N = 500;
  const PhaseDiagram pd = continuation_sweep(c);
  REQUIRE(pd.points.size() == 4);
  CHECK(pd.points[0].label == "Q3");
  CHECK(pd.points[3].label == "Q2-");
  bool found = false;
  for (const auto& t : pd.transitions)
    if (t.from == "Q3" && t.to == "Q2-") {
      found = true;
      CHECK(t.M_lo < t.M_hi);
    }
  CHECK(found);
  for (const auto& rec : pd.records) CHECK((rec.pass == "up" || rec.pass == "down"));
}

TEST_CASE("constant label gives no transitions") {
  SweepConfig c;
  c.M_grid = {1.0, 2.0, 3.0};
  c.R_grid = {5.0};
  c.branches = {"q2minus"};
  c.radial_N = 300;
  const PhaseDiagram pd = continuation_sweep(c);
  for (const auto& p : pd.points) CHECK(p.label == "Q2-");
  CHECK(pd.transitions.empty());
}
