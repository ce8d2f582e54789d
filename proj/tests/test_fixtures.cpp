#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "wex/fixtures.hpp"

using namespace wex;

namespace {

constexpr double kPi = 3.14159265358979323846;

// visit every undirected edge once
template <class F>
void for_edges(const DomainSample& s, F&& fn) {
  for (int i = 0; i < s.size(); ++i) {
    for (std::int64_t k = s.offsets[(std::size_t)i]; k < s.offsets[(std::size_t)i + 1]; ++k) {
      const int j = s.nbrs[(std::size_t)k];
      if (j > i) fn(i, j, s.wts[(std::size_t)k]);
    }
  }
}

bool cloud_has(const DomainSample& s, double x, double y) {
  for (int i = 0; i < s.size(); ++i) {
    auto p = s.point(i);
    if (p[0] == x && p[1] == y) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("three point and integer jet contents") {
  JetDataset tp = gen_three_point(3);
  REQUIRE(tp.size() == 3);
  CHECK(tp.site(0)[0] == 0.0);
  CHECK(tp.site(1)[0] == 1.0);
  CHECK(tp.site(2)[0] == 2.0);
  for (int i = 0; i < 3; ++i)
    for (int k = 1; k < 3; ++k) CHECK(tp.site(i)[k] == 0.0);
  CHECK(tp.value(0) == 0.0);
  CHECK(tp.value(1) == 0.0);
  CHECK(tp.value(2) == 1.0);
  CHECK_THROWS_AS(gen_three_point(0), std::invalid_argument);

  JetDataset ij = gen_integer_jet(4);
  REQUIRE(ij.size() == 8);
  for (int i = 0; i < 8; ++i) {
    const int s = i + 1;
    CHECK(ij.site(i)[0] == (double)s);
    CHECK(ij.value(i) == (s % 2 == 1 ? (double)((s + 1) / 2) : 0.0));
    CHECK(ij.gradient(i)[0] == 0.0);
  }
  CHECK_THROWS_AS(gen_integer_jet(1), std::invalid_argument);
}

TEST_CASE("slit square fixture") {
  const int res = 16;
  const double h = 1.0 / res;
  DomainFixture fx = gen_slit_square(res);
  const DomainSample& s = fx.sample;
  CHECK(s.dim == 2);
  CHECK(s.epsilon == 3.0 * h);
  CHECK(s.components == 1);
  REQUIRE(fx.jets.size() == s.size());

  for (int i = 0; i < s.size(); ++i) {
    auto p = s.point(i);
    const double x = p[0], y = p[1];
    CHECK(x > 0.0);
    CHECK(x < 3.0);
    CHECK(y > 0.0);
    CHECK(y < 3.0);
    CHECK_FALSE((x >= 1.0 && x <= 2.0 && y >= 1.0 && y <= 2.0));
    CHECK_FALSE((y == 2.0 && x < 1.0));
    // jets share the cloud sites and encode the channel profile
    CHECK(fx.jets.site(i)[0] == x);
    CHECK(fx.jets.site(i)[1] == y);
    double want = 0.0;
    if (y > 2.0) {
      want = 1.0;
    } else if (x > 2.0 && y >= 1.0) {
      const double a = 0.5 * kPi * (y - 1.0);
      want = std::sin(a) * std::sin(a);
    }
    CHECK(fx.jets.value(i) == want);
    CHECK(fx.jets.gradient(i)[0] == 0.0);
    CHECK(std::abs(fx.jets.gradient(i)[1]) <= 0.5 * kPi + 1e-12);
  }

  // the jump pair across the slit is present
  CHECK(cloud_has(s, 0.5, 2.0 - h));
  CHECK(cloud_has(s, 0.5, 2.0 + h));

  for_edges(s, [&](int i, int j, double w) {
    auto p = s.point(i);
    auto q = s.point(j);
    const double dx = q[0] - p[0], dy = q[1] - p[1];
    CHECK(w == doctest::Approx(std::hypot(dx, dy)).epsilon(1e-14));
    CHECK(w <= s.epsilon * (1.0 + 1e-12));
    // never across the slit
    const double a = p[1] - 2.0, b = q[1] - 2.0;
    if (a * b < 0.0) {
      const double t = a / (a - b);
      CHECK(p[0] + t * dx >= 1.0);
    }
    // never through the removed square (interior sampling)
    for (int step = 1; step < 64; ++step) {
      const double t = step / 64.0;
      const double x = p[0] + t * dx, y = p[1] + t * dy;
      CHECK_FALSE((x > 1.0 && x < 2.0 && y > 1.0 && y < 2.0));
    }
  });

  CHECK_THROWS_AS(gen_slit_square(8), std::invalid_argument);
}

TEST_CASE("parabola cusp fixture") {
  const int res = 16;
  const double h = 1.0 / res;
  DomainFixture fx = gen_parabola_cusp(0.25, res);
  const DomainSample& s = fx.sample;
  CHECK(s.epsilon == 3.0 * h);
  CHECK(s.components == 1);
  REQUIRE(fx.jets.size() == s.size());

  for (int i = 0; i < s.size(); ++i) {
    auto p = s.point(i);
    const double x = p[0], y = p[1];
    CHECK(x * x + y * y < 1.0);
    CHECK_FALSE((x >= 0.0 && std::abs(y) <= x * x));  // outside the closed cusp
    const double want = (x >= 0.0 && y >= 0.0) ? x * x : 0.0;
    CHECK(fx.jets.value(i) == want);
    CHECK(fx.jets.gradient(i)[0] == (x >= 0.0 && y >= 0.0 ? 2.0 * x : 0.0));
    CHECK(fx.jets.gradient(i)[1] == 0.0);
  }

  // witness pairs at halving abscissae down to an eighth of the step
  int expected = 0;
  for (double x = 0.25; x >= h / 8.0; x *= 0.5) ++expected;
  CHECK(expected >= 5);
  for (double x = 0.25; x >= h / 8.0; x *= 0.5) {
    const double y = x * x * (1.0 + 1e-7);
    CHECK(cloud_has(s, x, y));
    CHECK(cloud_has(s, x, -y));
  }

  // edges may only change the sign of y left of the cusp tip
  for_edges(s, [&](int i, int j, double) {
    auto p = s.point(i);
    auto q = s.point(j);
    const double a = p[1], b = q[1];
    if (a * b < 0.0) {
      const double t = a / (a - b);
      CHECK(p[0] + t * (q[0] - p[0]) < 0.0);
    }
  });

  CHECK_THROWS_AS(gen_parabola_cusp(0.75, res), std::invalid_argument);
  CHECK_THROWS_AS(gen_parabola_cusp(0.0, res), std::invalid_argument);
  CHECK_THROWS_AS(gen_parabola_cusp(0.25, 8), std::invalid_argument);
}

TEST_CASE("annulus fixture") {
  const double r = 0.5, R = 1.0;
  const int res = 32;
  DomainSample s = gen_annulus(r, R, res);
  const double h = 2.0 * R / res;
  CHECK(s.epsilon == 3.0 * h);
  CHECK(s.components == 1);
  for (int i = 0; i < s.size(); ++i) {
    auto p = s.point(i);
    const double n2 = p[0] * p[0] + p[1] * p[1];
    CHECK(n2 > r * r);
    CHECK(n2 < R * R);
  }
  // no edge may touch the closed inner disc
  for_edges(s, [&](int i, int j, double) {
    auto p = s.point(i);
    auto q = s.point(j);
    const double dx = q[0] - p[0], dy = q[1] - p[1];
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? -(p[0] * dx + p[1] * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double cx = p[0] + t * dx, cy = p[1] + t * dy;
    CHECK(cx * cx + cy * cy > r * r);
  });
  CHECK_THROWS_AS(gen_annulus(1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(gen_annulus(0.5, 1.0, 8), std::invalid_argument);
}

TEST_CASE("box fixture") {
  for (int dim : {1, 2, 3}) {
    const int res = dim == 3 ? 6 : 12;
    DomainSample s = gen_box(res, dim);
    std::int64_t want = 1;
    for (int k = 0; k < dim; ++k) want *= res - 1;
    CHECK(s.size() == (int)want);
    CHECK(s.components == 1);
    CHECK(s.epsilon == 3.0 / res);
    for (int i = 0; i < s.size(); ++i)
      for (int k = 0; k < dim; ++k) {
        CHECK(s.point(i)[k] > 0.0);
        CHECK(s.point(i)[k] < 1.0);
      }
  }
  CHECK_THROWS_AS(gen_box(3, 2), std::invalid_argument);
  CHECK_THROWS_AS(gen_box(8, 4), std::invalid_argument);
}

TEST_CASE("cone shell fixture") {
  const int res = 64;
  const double h = 4.0 / res;
  DomainFixture fx = gen_cone_shell(res);
  const DomainSample& s = fx.sample;
  CHECK(s.epsilon == 3.0 * h);
  CHECK(s.components == 1);
  REQUIRE(fx.jets.size() == s.size());

  auto in_cone = [](double x, double y) {
    return x > 0.0 && x * x > (15.0 / 16.0) * (x * x + y * y);
  };
  bool saw_deep_cone = false;
  for (int i = 0; i < s.size(); ++i) {
    auto p = s.point(i);
    const double x = p[0], y = p[1], n2 = x * x + y * y;
    CHECK(n2 < 4.0);
    CHECK((n2 > 1.0 || in_cone(x, y)));
    double want = 0.0, gx = 0.0;
    if (in_cone(x, y) && x < 0.5) {
      want = 1.0 - smoothstep01(2.0 * x);
      gx = -2.0 * smoothstep01_deriv(2.0 * x);
      saw_deep_cone = true;
    }
    CHECK(fx.jets.value(i) == want);
    CHECK(fx.jets.gradient(i)[0] == gx);
    CHECK(fx.jets.gradient(i)[1] == 0.0);
    if (n2 > 1.0 && !in_cone(x, y)) CHECK(fx.jets.value(i) == 0.0);
  }
  CHECK(saw_deep_cone);

  // edges stay in the union of the shell and the cone (interior sampling)
  for_edges(s, [&](int i, int j, double) {
    auto p = s.point(i);
    auto q = s.point(j);
    for (int step = 1; step < 64; ++step) {
      const double t = step / 64.0;
      const double x = p[0] + t * (q[0] - p[0]);
      const double y = p[1] + t * (q[1] - p[1]);
      const double n2 = x * x + y * y;
      CHECK(n2 < 4.0 + 1e-9);
      const bool cone_ok = x > -1e-12 && x * x >= (15.0 / 16.0) * n2 - 1e-9;
      CHECK((n2 > 1.0 - 1e-9 || cone_ok));
    }
  });

  CHECK_THROWS_AS(gen_cone_shell(16), std::invalid_argument);
}

TEST_CASE("oscillating strip fixture") {
  DomainSample s = gen_oscillating_domain(64);
  CHECK(s.components == 1);
  CHECK(s.size() > 100);
  for (int i = 0; i < s.size(); ++i) {
    auto p = s.point(i);
    const double x = p[0], y = p[1];
    CHECK(x >= 0.3 - 1e-12);
    CHECK(x <= 0.98 + 1e-12);
    const double base = x * x * std::sin(1.0 / x);
    CHECK(y > base);
    CHECK(y < base + x * x * x * x);
  }
  CHECK_THROWS_AS(gen_oscillating_domain(8), std::invalid_argument);
}

TEST_CASE("quintic smoothstep") {
  CHECK(smoothstep01(-0.5) == 0.0);
  CHECK(smoothstep01(0.0) == 0.0);
  CHECK(smoothstep01(1.0) == 1.0);
  CHECK(smoothstep01(2.0) == 1.0);
  CHECK(smoothstep01(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(smoothstep01_deriv(0.0) == 0.0);
  CHECK(smoothstep01_deriv(1.0) == 0.0);
  CHECK(smoothstep01_deriv(0.5) == doctest::Approx(1.875).epsilon(1e-15));
  double prev = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double u = k / 100.0;
    const double v = smoothstep01(u);
    CHECK(v >= prev);
    prev = v;
    // derivative against a central difference
    if (k < 100) {
      const double fd = (smoothstep01(u + 1e-6) - smoothstep01(u - 1e-6)) / 2e-6;
      CHECK(smoothstep01_deriv(u) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("generators are deterministic") {
  DomainFixture a = gen_slit_square(16), b = gen_slit_square(16);
  CHECK(a.sample.points == b.sample.points);
  CHECK(a.sample.nbrs == b.sample.nbrs);
  DomainFixture c = gen_parabola_cusp(0.25, 16), d = gen_parabola_cusp(0.25, 16);
  CHECK(c.sample.points == d.sample.points);
  for (int i = 0; i < c.jets.size(); ++i) CHECK(c.jets.value(i) == d.jets.value(i));
  CHECK(gen_annulus(0.5, 1.0, 32).points == gen_annulus(0.5, 1.0, 32).points);
  CHECK(gen_oscillating_domain(32).points == gen_oscillating_domain(32).points);
}
