#include "ldg/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ldg;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "ldg_test_io";
  fs::create_directories(d);
  return d / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

MaterialParams params() {
  MaterialParams p;
  p.b2 = 1;
  p.M = 0.5;
  p.R = 4;
  return p;
}

}  // namespace

TEST_CASE("profile CSV round trip") {
  const MaterialParams p = params();
  RadialOptions o;
  o.N = 200;
  const RadialResult r = minimize_radial(p, Branch::Q3, o);
  const auto path = scratch("profile.csv").string();
  write_profile_csv(path, r.profile, p);
  MaterialParams back;
  const RadialProfile q = read_profile_csv(path, &back);
  CHECK(q.N() == 200);
  CHECK(q.k == 2);
  CHECK((q.w - r.profile.w).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(back.M == p.M);
  CHECK(back.b2 == p.b2);
  CHECK(radial_energy(q, back) == Approx(r.energy).epsilon(1e-12));

  std::ofstream(scratch("bad.csv")) << "# k=2 R=4\nx,y\n1,2\n";
  CHECK_THROWS_AS(read_profile_csv(scratch("bad.csv").string()), std::runtime_error);
  CHECK_THROWS_AS(read_profile_csv(scratch("missing.csv").string()), std::runtime_error);
}

TEST_CASE("checkpoint round trip and invariant suite") {
  const MaterialParams p = params();
  auto mesh = std::make_shared<const DiskMesh>(build_mesh(4.0, 0.5));
  const Field2D f = field_seed(mesh, p, FieldSeed::NonRadialVertical);
  const auto path = scratch("ck.csv");
  write_field_checkpoint(path.string(), f);
  const CheckpointData c = read_field_checkpoint(path.string());
  CHECK(c.field.num_nodes() == f.num_nodes());
  CHECK(c.field.mesh().num_triangles() == mesh->num_triangles());
  CHECK((c.field.coeffs() - f.coeffs()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(total_energy(c.field) == Approx(total_energy(f)).epsilon(1e-12));
  const CheckReport ok = check_checkpoint(c);
  CHECK(ok.ok);
  CHECK(ok.failures.empty());

  // break the trace of one interior node by editing its Q33 entry
  std::string text = slurp(path);
  const auto at = text.find("\n1,");
  REQUIRE(at != std::string::npos);
  const auto eol = text.find('\n', at + 1);
  const auto comma = text.rfind(',', eol);
  text.replace(comma + 1, eol - comma - 1, "0.5");
  std::ofstream(scratch("ck_bad.csv")) << text;
  const CheckReport bad = check_checkpoint(read_field_checkpoint(scratch("ck_bad.csv").string()));
  CHECK_FALSE(bad.ok);
  CHECK(bad.failures.size() == 1);

  // boundary tampering
  Field2D g = f;
  g.coeffs()(0, mesh->boundary_nodes[0]) += 0.1;
  write_field_checkpoint(scratch("ck_bc.csv").string(), g);
  CHECK_FALSE(check_checkpoint(read_field_checkpoint(scratch("ck_bc.csv").string())).ok);

  std::ofstream(scratch("ck_trunc.csv")) << text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(read_field_checkpoint(scratch("ck_trunc.csv").string()), std::runtime_error);
}

TEST_CASE("glyph and beta tables, manifest, parameters") {
  const MaterialParams p = params();
  auto mesh = std::make_shared<const DiskMesh>(build_mesh(4.0, 1.0));
  const Field2D f = field_seed(mesh, p, FieldSeed::Interpolated);
  write_glyph_csv(scratch("g.csv").string(), glyph_export(f));
  write_beta_csv(scratch("b.csv").string(), f);
  const std::string g = slurp(scratch("g.csv")), b = slurp(scratch("b.csv"));
  CHECK(std::count(g.begin(), g.end(), '\n') == f.num_nodes() + 1);
  CHECK(std::count(b.begin(), b.end(), '\n') == f.num_nodes() + 1);

  write_manifest(scratch("m.json").string(), {{"command", "x"}});
  const auto j = nlohmann::json::parse(slurp(scratch("m.json")));
  CHECK(j["command"] == "x");
  CHECK(j["version"] == code_version());
  CHECK(j.contains("timestamp"));

  const MaterialParams q = params_from_json(params_json(p));
  CHECK(q.a2 == p.a2);
  CHECK(q.b2 == p.b2);
  CHECK(q.M == p.M);
  CHECK(q.R == p.R);
  CHECK(q.k == p.k);
  CHECK_THROWS(params_from_json({{"M", "large"}}));
}
