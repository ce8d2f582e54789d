#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "wex/cli.hpp"
#include "wex/grid.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "wex");
  std::vector<char*> argv;
  argv.reserve(args.size());
  for (auto& a : args) argv.push_back(a.data());
  return wex::run_cli((int)argv.size(), argv.data());
}

fs::path fresh_dir(const std::string& leaf) {
  fs::path d = fs::temp_directory_path() / "wex_cli_test" / leaf;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

json slurp(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  return json::parse(is);
}

json cert(const json& rep, const std::string& name) {
  for (const auto& c : rep.at("certificates")) {
    if (c.at("name") == name) return c;
  }
  FAIL("certificate not found: ", name);
  return json();
}

std::string make_three_point(const fs::path& dir) {
  REQUIRE(run({"fixture", "three_point", "--dim", "1", "--dir", dir.string(),
               "--out", (dir / "fix.json").string()}) == 0);
  return (dir / "jets.csv").string();
}

}  // namespace

TEST_CASE("usage errors and help") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({"check", "--help"}) == 0);
  CHECK(run({}) == 2);                    // a subcommand is required
  CHECK(run({"frobnicate"}) == 2);        // unknown subcommand
  CHECK(run({"check"}) == 2);             // missing required positional
  CHECK(run({"check", "/nonexistent/jets.csv"}) == 2);
  CHECK(run({"modulus", "bad:spec"}) == 2);
  CHECK(run({"fixture", "no_such_fixture"}) == 2);
  CHECK(run({"domain"}) == 2);            // needs --points or --fixture
}

TEST_CASE("fixture then check on the three point line") {
  fs::path dir = fresh_dir("check");
  std::string jets = make_three_point(dir);

  json fix = slurp(dir / "fix.json");
  CHECK(fix.at("command") == "fixture");
  CHECK(fix.at("sites") == 3);
  CHECK(fix.at("pass") == true);
  CHECK(fs::exists(dir / "manifest.json"));

  fs::path out = dir / "check.json";
  REQUIRE(run({"check", jets, "--modulus", "pow:1", "--out", out.string()}) == 0);
  json rep = slurp(out);
  CHECK(rep.at("command") == "check");
  CHECK(rep.at("sites") == 3);
  CHECK(rep.at("dim") == 1);
  CHECK(rep.at("wg").at("m").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.at("wg").at("finite") == true);
  CHECK(rep.at("pass") == true);
  CHECK(cert(rep, "wg-constant-finite").at("pass") == true);
  CHECK(cert(rep, "concave-recertification").at("pass") == true);
  // the taylor profile is present for small datasets
  CHECK(rep.at("profile").contains("r_max"));
}

TEST_CASE("envelope, extend and glue round trip") {
  fs::path dir = fresh_dir("pipeline");
  std::string jets = make_three_point(dir);

  fs::path henv = dir / "h.grd", Henv = dir / "H.grd";
  REQUIRE(run({"envelope", jets, "--modulus", "pow:1", "--box", "-1,3", "--res", "1025",
               "--out-lower", henv.string(), "--out-upper", Henv.string(),
               "--out", (dir / "env.json").string()}) == 0);
  json env = slurp(dir / "env.json");
  CHECK(env.at("m").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(env.at("m_from_scan") == true);
  CHECK(cert(env, "lower-below-upper").at("pass") == true);
  CHECK(cert(env, "site-interpolation").at("pass") == true);
  CHECK(cert(env, "sites-inside-box").at("pass") == true);

  wex::GridFunction h = wex::GridFunction::load(henv.string());
  CHECK(h.dims() == std::vector<int>{1025});
  CHECK(h.box().lo[0] == -1.0);
  CHECK(h.box().hi[0] == 3.0);

  fs::path fgrid = dir / "F.grd";
  REQUIRE(run({"extend", jets, "--modulus", "pow:1", "--box", "-1,3", "--res", "2049",
               "--out-grid", fgrid.string(), "--out", (dir / "ext.json").string()}) == 0);
  json ext = slurp(dir / "ext.json");
  CHECK(ext.at("kernel") == "quadratic");
  CHECK(ext.at("t").get<double>() == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
  CHECK(cert(ext, "insertion-sandwich").at("pass") == true);
  CHECK(cert(ext, "site-interpolation").at("pass") == true);
  CHECK(cert(ext, "gradient-lipschitz").at("pass") == true);
  CHECK_FALSE(ext.contains("warnings"));
  wex::GridFunction F = wex::GridFunction::load(fgrid.string());
  CHECK(F.total() == 2049);

  fs::path gout = dir / "glue.json", ggrid = dir / "G.grd";
  REQUIRE(run({"glue", "--grids", henv.string(), Henv.string(), "--sites", "0,1;2",
               "--radii", "1.2", "1.8", "--jets", jets, "--out-grid", ggrid.string(),
               "--out", gout.string()}) == 0);
  json glue = slurp(gout);
  CHECK(glue.at("pieces") == 2);
  CHECK(glue.at("site_max_error").get<double>() == 0.0);
  CHECK(cert(glue, "partition-of-unity").at("pass") == true);
  CHECK(cert(glue, "site-reproduction").at("pass") == true);
  CHECK(wex::GridFunction::load(ggrid.string()).total() == 1025);

  // leaving a covered site unlisted must fail the consistency certificate
  fs::path bad = dir / "bad.json";
  CHECK(run({"glue", "--grids", henv.string(), Henv.string(), "--sites", "0;2",
             "--radii", "1.2", "1.8", "--jets", jets, "--out", bad.string()}) == 1);
  json badrep = slurp(bad);
  CHECK(cert(badrep, "glue-consistency").at("pass") == false);
  CHECK(badrep.at("pass") == false);
}

TEST_CASE("extend warns above the semiconcavity limit") {
  fs::path dir = fresh_dir("warn");
  std::string jets = make_three_point(dir);
  fs::path out = dir / "ext.json";
  REQUIRE(run({"extend", jets, "--modulus", "pow:1", "--box", "-1,3", "--res", "257",
               "--t", "0.2", "--out", out.string()}) == 0);
  json rep = slurp(out);
  CHECK(rep.at("t").get<double>() == doctest::Approx(0.2));
  CHECK(rep.contains("warnings"));
}

TEST_CASE("domain fixture reports: annulus passes, slit square fails honestly") {
  fs::path dir = fresh_dir("domain");

  fs::path aout = dir / "annulus.json";
  REQUIRE(run({"domain", "--fixture", "annulus", "--out", aout.string()}) == 0);
  json ann = slurp(aout);
  CHECK(ann.at("components") == 1);
  const json& qc = ann.at("quasiconvexity");
  CHECK(qc.at("c_hat").get<double>() >= 1.5);
  CHECK(qc.at("c_hat").get<double>() <= 1.75);
  CHECK(qc.at("slack").get<double>() < 0.3);
  CHECK(cert(ann, "graph-connected").at("pass") == true);
  CHECK(ann.at("pass") == true);

  fs::path sout = dir / "slit.json";
  CHECK(run({"domain", "--fixture", "slit_square", "--out", sout.string()}) == 1);
  json slit = slurp(sout);
  CHECK(slit.at("pass") == false);
  CHECK(cert(slit, "graph-connected").at("pass") == true);
  CHECK(cert(slit, "inner-sandwich").at("pass") == true);
  CHECK(cert(slit, "concave-majorant-within-factor-two").at("pass") == true);
  CHECK(cert(slit, "lipschitz-bound").at("pass") == false);
  // the euclidean deviation steps reach the unit jump across the slit
  const json& euclid = slit.at("inner_modulus").at("euclid");
  CHECK(euclid.at("dev").back().get<double>() >= 1.0 - 1e-6);
}

TEST_CASE("domain on a raw point cloud estimates the radius") {
  fs::path dir = fresh_dir("cloud");
  fs::path csv = dir / "cloud.csv";
  {
    std::ofstream os(csv);
    os << "x1,x2\n";
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) os << 0.1 * i << "," << 0.1 * j << "\n";
  }
  fs::path out = dir / "cloud.json";
  REQUIRE(run({"domain", "--points", csv.string(), "--out", out.string()}) == 0);
  json rep = slurp(out);
  CHECK(rep.at("points") == 36);
  CHECK(rep.at("epsilon").get<double>() == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(rep.at("median_nn").get<double>() == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(rep.at("components") == 1);
  CHECK(rep.at("pass") == true);
}

TEST_CASE("modulus inspection") {
  fs::path dir = fresh_dir("modulus");
  fs::path out = dir / "mod.json";
  REQUIRE(run({"modulus", "pow:0.5", "--out", out.string()}) == 0);
  json rep = slurp(out);
  CHECK(rep.at("concave") == true);
  CHECK(rep.at("subadditive") == true);
  CHECK(rep.at("least_concave_majorant").is_string());
  CHECK(cert(rep, "majorant-between-one-and-two-times").at("pass") == true);
  CHECK(cert(rep, "primitive-lower-bound").at("pass") == true);
  CHECK(rep.at("samples").is_array());

  fs::path out2 = dir / "mod2.json";
  REQUIRE(run({"modulus", "pow:1.3", "--out", out2.string()}) == 0);
  json sup = slurp(out2);
  CHECK(sup.at("concave") == false);
  CHECK(sup.at("subadditive") == false);
  CHECK(sup.at("least_concave_majorant").is_null());
  CHECK(sup.contains("majorant_error"));
}
