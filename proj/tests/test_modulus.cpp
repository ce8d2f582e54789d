#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "doctest.h"
#include "wex/modulus.hpp"

using namespace wex;

namespace {

// Trapezoid rule over the union of breakpoints and a fine uniform grid; exact
// for piecewise-linear integrands up to rounding.
double integral_oracle(const Modulus& w, double t) {
  std::vector<double> knots{0.0, t};
  for (const auto& bp : w.breakpoints())
    if (bp.t > 0.0 && bp.t < t) knots.push_back(bp.t);
  const int fine = 4096;
  for (int i = 1; i < fine; ++i) knots.push_back(t * i / fine);
  std::sort(knots.begin(), knots.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    acc += 0.5 * (w(knots[i]) + w(knots[i + 1])) * (knots[i + 1] - knots[i]);
  return acc;
}

// Least concave majorant at t by brute force: the best chord over sample
// abscissae bracketing t, including the far tail.
double lcm_oracle(const Modulus& w, double t, double far) {
  double best = w(t);
  std::vector<double> grid = log_grid(1e-4, far, 800);
  grid.push_back(0.0);
  for (const auto& bp : w.breakpoints()) grid.push_back(bp.t);
  for (double a : grid) {
    if (a > t) continue;
    for (double b : grid) {
      if (b < t || b <= a) continue;
      const double lam = (t - a) / (b - a);
      best = std::max(best, (1.0 - lam) * w(a) + lam * w(b));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("power family") {
  Modulus w = Modulus::power(0.5);
  CHECK(w(0.0) == 0.0);
  CHECK(w(4.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(w.is_concave());
  CHECK(w.is_subadditive());
  CHECK(w.upper_bound() == std::numeric_limits<double>::infinity());

  Modulus scaled = Modulus::power(0.5, 3.0);
  CHECK(scaled(4.0) == doctest::Approx(6.0).epsilon(1e-14));

  Modulus rough = Modulus::power(1.3);
  CHECK_FALSE(rough.is_concave());
  CHECK_FALSE(rough.is_subadditive());
  CHECK_THROWS_AS(rough.least_concave_majorant(), std::invalid_argument);

  CHECK_THROWS_AS(Modulus::power(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Modulus::power(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(Modulus::power(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("linear capped family") {
  Modulus w = Modulus::linear_capped(2.0, 3.0);
  CHECK(w(1.0) == 2.0);
  CHECK(w(1.5) == 3.0);
  CHECK(w(50.0) == 3.0);
  CHECK(w.is_concave());
  CHECK(w.is_subadditive());
  CHECK(w.upper_bound() == 3.0);

  Modulus lin = Modulus::linear(1.5);
  CHECK(lin(2.0) == 3.0);
  CHECK(lin.upper_bound() == std::numeric_limits<double>::infinity());

  Modulus zero = Modulus::linear(0.0);
  CHECK(zero(7.0) == 0.0);

  CHECK_THROWS_AS(Modulus::linear_capped(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Modulus::linear(-1.0), std::invalid_argument);
}

TEST_CASE("piecewise linear evaluation and exact predicates") {
  // not concave (chord slopes 1, 0.2, 0.6) yet subadditive: the worst sums
  // land on the flat-then-rising part where omega(a+b) - omega(a) - omega(b)
  // stays at most 0 (checked below against a dense scan)
  Modulus w = Modulus::piecewise_linear({{0, 0}, {1, 1}, {2, 1.2}, {3, 1.8}}, 0.0);
  CHECK(w(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w(1.5) == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(w(2.5) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(w(7.0) == doctest::Approx(1.8).epsilon(1e-15));
  CHECK_FALSE(w.is_concave());
  CHECK(w.is_subadditive());
  CHECK(w.upper_bound() == doctest::Approx(1.8));

  double worst = -1e300;
  for (int i = 1; i <= 400; ++i) {
    for (int j = i; j <= 400; ++j) {
      const double a = 4.0 * i / 400, b = 4.0 * j / 400;
      worst = std::max(worst, w(a + b) - w(a) - w(b));
    }
  }
  CHECK(worst <= 1e-12);

  Modulus conc = Modulus::piecewise_linear({{0, 0}, {1, 1}, {3, 2}}, 0.0);
  CHECK(conc(2.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(conc.is_concave());
  CHECK(conc.is_subadditive());

  // rising tail past a shallower segment is not concave
  Modulus rise = Modulus::piecewise_linear({{0, 0}, {1, 2}}, 3.0);
  CHECK_FALSE(rise.is_concave());
  CHECK(rise(2.0) == doctest::Approx(5.0));

  CHECK_THROWS_AS(Modulus::piecewise_linear({{1, 1}, {2, 2}}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Modulus::piecewise_linear({{0, 0}, {2, 2}, {1, 3}}, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(Modulus::piecewise_linear({{0, 0}, {1, 1}, {2, 0.5}}, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(Modulus::piecewise_linear({{0, 0}, {1, 1}}, -0.5), std::invalid_argument);
}

TEST_CASE("least concave majorant pinned cases") {
  // hull drops the sagging middle breakpoint
  Modulus w = Modulus::piecewise_linear({{0, 0}, {1, 1}, {2, 1.2}, {3, 1.8}}, 0.0);
  Modulus L = w.least_concave_majorant();
  CHECK(L.is_concave());
  CHECK(L(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(L(2.0) == doctest::Approx(1.4).epsilon(1e-14));
  CHECK(L(3.0) == doctest::Approx(1.8).epsilon(1e-14));
  CHECK(L(10.0) == doctest::Approx(1.8).epsilon(1e-14));
  for (double t : log_grid(1e-3, 8.0, 200)) {
    CHECK(L(t) >= w(t) - 1e-12);
    CHECK(L(t) == doctest::Approx(lcm_oracle(w, t, 8.0)).epsilon(1e-9));
  }

  // a rising tail forces the majorant onto the asymptotic ray
  Modulus rise = Modulus::piecewise_linear({{0, 0}, {1, 2}}, 3.0);
  Modulus Lr = rise.least_concave_majorant();
  CHECK(Lr(1.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(Lr(2.0) == doctest::Approx(6.0).epsilon(1e-12));

  // concave inputs are fixed points
  Modulus conc = Modulus::piecewise_linear({{0, 0}, {1, 1}, {3, 2}}, 0.0);
  Modulus Lc = conc.least_concave_majorant();
  for (double t : log_grid(1e-3, 8.0, 100))
    CHECK(Lc(t) == doctest::Approx(conc(t)).epsilon(1e-13));
  Modulus Lp = Modulus::power(0.5).least_concave_majorant();
  for (double t : log_grid(1e-3, 8.0, 100))
    CHECK(Lp(t) == doctest::Approx(std::sqrt(t)).epsilon(1e-13));
  Modulus Ll = Modulus::linear_capped(2.0, 3.0).least_concave_majorant();
  CHECK(Ll(1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(Ll(9.0) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("primitive closed forms match quadrature") {
  Primitive p_pow{Modulus::power(0.5)};
  CHECK(p_pow(4.0) == doctest::Approx(16.0 / 3.0).epsilon(1e-13));
  CHECK(p_pow(0.0) == 0.0);
  CHECK(p_pow.derivative(4.0) == doctest::Approx(2.0).epsilon(1e-14));

  Primitive p_quad{Modulus::power(2.0, 3.0)};
  CHECK(p_quad(2.0) == doctest::Approx(8.0).epsilon(1e-13));

  Primitive p_cap{Modulus::linear_capped(2.0, 3.0)};
  CHECK(p_cap(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p_cap(1.5) == doctest::Approx(2.25).epsilon(1e-14));
  CHECK(p_cap(2.0) == doctest::Approx(3.75).epsilon(1e-14));
  CHECK(p_cap(4.0) == doctest::Approx(9.75).epsilon(1e-14));

  Modulus w = Modulus::piecewise_linear({{0, 0}, {1, 1}, {3, 2}}, 0.5);
  Primitive p{w};
  CHECK(p(1.0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(p(3.0) == doctest::Approx(3.5).epsilon(1e-13));
  CHECK(p(5.0) == doctest::Approx(3.5 + 2.0 * 2.0 + 0.5 * 2.0).epsilon(1e-13));
  for (double t : {0.7, 1.5, 2.5, 3.5, 10.0})
    CHECK(p(t) == doctest::Approx(integral_oracle(w, t)).epsilon(1e-10));
  for (double t : {0.25, 1.0, 2.0, 6.0})
    CHECK(p.derivative(t) == doctest::Approx(w(t)).epsilon(1e-14));
}

TEST_CASE("empirical modulus is the least dominating running max") {
  auto em = EmpiricalModulus::from_samples(
      {{2.0, 0.5}, {1.0, 0.7}, {2.0, 0.6}, {3.0, 0.4}});
  CHECK(em(0.5) == 0.0);
  CHECK(em(1.0) == 0.7);
  CHECK(em(2.5) == 0.7);
  CHECK(em(100.0) == 0.7);
  CHECK(em.max_deviation() == 0.7);
  CHECK_FALSE(em.empty());

  auto inc = EmpiricalModulus::from_samples({{1.0, 0.2}, {2.0, 0.5}});
  CHECK(inc(1.0) == 0.2);
  CHECK(inc(1.999) == 0.2);
  CHECK(inc(2.0) == 0.5);
  CHECK(inc.max_distance() == 2.0);
  for (std::size_t i = 1; i < inc.steps().size(); ++i) {
    CHECK(inc.steps()[i].dist > inc.steps()[i - 1].dist);
    CHECK(inc.steps()[i].dev >= inc.steps()[i - 1].dev);
  }

  EmpiricalModulus none;
  CHECK(none.empty());
  CHECK(none(5.0) == 0.0);
}

TEST_CASE("parse and describe round trip") {
  CHECK(Modulus::parse("pow:0.5")(4.0) == doctest::Approx(2.0));
  CHECK(Modulus::parse("pow:0.5:2")(1.0) == doctest::Approx(2.0));
  CHECK(Modulus::parse("lin:1.5")(2.0) == doctest::Approx(3.0));
  CHECK(Modulus::parse("lin:2:cap:3")(5.0) == doctest::Approx(3.0));

  for (const char* spec : {"pow:0.7:1.5", "lin:2.5", "lin:1:cap:4"}) {
    Modulus w = Modulus::parse(spec);
    Modulus back = Modulus::parse(w.describe());
    for (double t : log_grid(1e-3, 20.0, 50))
      CHECK(back(t) == doctest::Approx(w(t)).epsilon(1e-14));
  }

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wex_modulus_test";
  fs::create_directories(dir);
  const fs::path csv = dir / "m.csv";
  {
    std::ofstream os(csv);
    os << "0,0\n1,1\n3,2\ntail,0.5\n";
  }
  Modulus w = Modulus::parse("pwl:" + csv.string());
  CHECK(w(2.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(w(5.0) == doctest::Approx(3.0).epsilon(1e-15));
  // piecewise describe() lists the data rather than a file path
  CHECK(w.describe().rfind("pwl[", 0) == 0);

  for (const char* bad : {"", "pow", "pow:x", "pow:-1", "lin:-2", "lin:1:cap:-3", "hm:1",
                          "pwl:/nonexistent/file.csv"})
    CHECK_THROWS_AS(Modulus::parse(bad), std::exception);
}

TEST_CASE("log grid") {
  auto g = log_grid(0.01, 10.0, 7);
  CHECK(g.size() == 7);
  CHECK(g.front() == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(g.back() == doctest::Approx(10.0).epsilon(1e-14));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("random subadditive moduli: majorant sandwich") {
  // construction keeps omega(t)/t nonincreasing, which implies subadditivity
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int k = 1 + (int)(uni(rng) * 5.99);
    std::vector<double> ts;
    double t = 0.05 + uni(rng);
    for (int j = 0; j < k; ++j) {
      ts.push_back(t);
      t *= 1.2 + 2.0 * uni(rng);
    }
    std::vector<Breakpoint> pts{{0.0, 0.0}};
    double r = 0.2 + 2.8 * uni(rng);
    for (int j = 0; j < k; ++j) {
      if (j > 0) {
        const double lo = r * ts[(std::size_t)j - 1] / ts[(std::size_t)j];
        r = lo + (r - lo) * uni(rng);
      }
      pts.push_back({ts[(std::size_t)j], r * ts[(std::size_t)j]});
    }
    const double tail = r * uni(rng);
    Modulus w = Modulus::piecewise_linear(pts, tail);
    REQUIRE(w.is_subadditive());

    Modulus L = w.least_concave_majorant();
    CHECK(L.is_concave());
    for (double x : log_grid(ts.front() / 8.0, 4.0 * ts.back(), 512)) {
      const double a = w(x), b = L(x);
      REQUIRE(b >= a * (1.0 - 1e-12));
      REQUIRE(b <= 2.0 * a * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("random concave moduli: primitive bound, subadditivity, fixed point") {
  std::mt19937 rng(911);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int k = 1 + (int)(uni(rng) * 4.99);
    std::vector<Breakpoint> pts{{0.0, 0.0}};
    double t = 0.0, v = 0.0, slope = 0.5 + 3.5 * uni(rng);
    for (int j = 0; j < k; ++j) {
      const double dt = 0.1 + 2.0 * uni(rng);
      t += dt;
      v += slope * dt;
      pts.push_back({t, v});
      slope *= 0.3 + 0.65 * uni(rng);
    }
    Modulus w = Modulus::piecewise_linear(pts, slope * uni(rng));
    REQUIRE(w.is_concave());
    REQUIRE(w.is_subadditive());

    Primitive p{w};
    Modulus L = w.least_concave_majorant();
    for (double x : log_grid(1e-3, 4.0 * t, 512)) {
      REQUIRE(x * w(x) <= 2.0 * p(x) * (1.0 + 1e-12));
      REQUIRE(L(x) == doctest::Approx(w(x)).epsilon(1e-12));
    }
  }
}
