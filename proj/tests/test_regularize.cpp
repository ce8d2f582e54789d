#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "wex/envelope.hpp"
#include "wex/fixtures.hpp"
#include "wex/regularize.hpp"

using namespace wex;

namespace {

GridFunction fill_grid(const Box& box, const std::vector<int>& res,
                       const std::function<double(std::span<const double>)>& fn) {
  GridFunction g = make_grid(box, res);
  for (std::int64_t f = 0; f < g.total(); ++f) {
    auto x = g.node(f);
    g[f] = fn(x);
  }
  return g;
}

EnvelopePair three_point_envelopes(int res) {
  EnvelopeSpec spec = make_envelope_spec(gen_three_point(1), 1.0, Modulus::power(1.0));
  Box box{{-1.0}, {3.0}};
  return envelope_grid(spec, box, {res});
}

}  // namespace

TEST_CASE("quadratic convolutions match the direct quadratic-cost oracle") {
  Box box{{0.0, -1.0}, {1.0, 1.0}};
  GridFunction g = make_grid(box, {9, 7});
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : g.values()) v = u(rng);

  for (double t : {0.05, 0.7}) {
    GridFunction lo = inf_conv_quadratic(g, t);
    GridFunction hi = sup_conv_quadratic(g, t);
    for (std::int64_t f = 0; f < g.total(); ++f) {
      auto x = g.node(f);
      double omin = 1e300, omax = -1e300;
      for (std::int64_t y = 0; y < g.total(); ++y) {
        auto z = g.node(y);
        double d2 = 0.0;
        for (int k = 0; k < 2; ++k) d2 += (x[k] - z[k]) * (x[k] - z[k]);
        omin = std::min(omin, g[y] + d2 / (2.0 * t));
        omax = std::max(omax, g[y] - d2 / (2.0 * t));
      }
      CHECK(lo[f] == doctest::Approx(omin).epsilon(1e-12));
      CHECK(hi[f] == doctest::Approx(omax).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(inf_conv_quadratic(g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sup_conv_quadratic(g, -1.0), std::invalid_argument);
}

TEST_CASE("quadratic fixed point: sup then inf convolution recovers a semiconcave function") {
  Box box{{-2.0}, {2.0}};
  GridFunction g = fill_grid(box, {4097}, [](std::span<const double> x) {
    return -x[0] * x[0] / 2.0;
  });
  GridFunction up = sup_conv_quadratic(g, 1.0);
  GridFunction back = inf_conv_quadratic(up, 1.0);
  for (std::int64_t f = 0; f < g.total(); ++f) {
    const double x = g.node(f)[0];
    if (std::abs(x) > 1.0) continue;  // the attaining point must stay in the box
    CHECK(up[f] == doctest::Approx(-x * x / 4.0).epsilon(0).scale(1).epsilon(1e-6));
    CHECK(back[f] == doctest::Approx(g[f]).scale(1).epsilon(1e-6));
  }
}

TEST_CASE("double envelope insertion on the three point line") {
  JetDataset jets = gen_three_point(1);
  EnvelopePair pair = three_point_envelopes(2049);

  InsertionResult res = insert_c11(pair.h, pair.H, 1.0, std::nullopt, &jets);
  CHECK(res.t_used == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  const auto& d = res.diag;
  CHECK(d.sandwich_ok);
  CHECK(d.sites_ok);
  CHECK(d.grad_lip_ok);
  CHECK_FALSE(d.t_large_warning);
  CHECK(d.sandwich_budget == doctest::Approx(5.0 * pair.h.spacing(0) * 7.0));
  CHECK(d.max_lower_violation <= d.sandwich_budget);
  CHECK(d.max_upper_violation <= d.sandwich_budget);
  CHECK(d.site_max_error <= d.site_budget);
  // the smoothing is governed by the parabola scale 1/t = 12
  CHECK(d.grad_lip <= 12.5);
  CHECK(d.grad_lip >= 6.0);

  InsertionResult big = insert_c11(pair.h, pair.H, 1.0, 0.2, &jets);
  CHECK(big.diag.t_large_warning);

  CHECK_THROWS_AS(insert_c11(pair.H, pair.h, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(insert_c11(pair.h, pair.H, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(insert_c11(pair.h, pair.H, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("general kernel insertion reproduces the quadratic mode for the identity modulus") {
  JetDataset jets = gen_three_point(1);
  EnvelopePair pair = three_point_envelopes(129);

  InsertionResult quad = insert_c11(pair.h, pair.H, 1.0, 1.0 / 12.0, &jets);
  InsertionResult gen = insert_general(pair.h, pair.H, Modulus::power(1.0), 1.0, 12.0, &jets);
  CHECK(gen.t_used == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  for (std::int64_t f = 0; f < quad.f.total(); ++f) {
    CHECK(gen.f[f] == doctest::Approx(quad.f[f]).scale(1).epsilon(1e-9));
  }
  CHECK(gen.diag.sandwich_ok);

  GridFunction big = make_grid(Box{{0.0, 0.0}, {1.0, 1.0}}, {160, 160});
  CHECK_THROWS_AS(insert_general(big, big, Modulus::power(1.0), 1.0, 12.0),
                  std::invalid_argument);
}

TEST_CASE("finite difference gradient is exact on affine data") {
  Box box{{0.0, -1.0}, {2.0, 3.0}};
  GridFunction g = fill_grid(box, {9, 5}, [](std::span<const double> x) {
    return 2.0 * x[0] - 3.0 * x[1] + 0.25;
  });
  auto field = grad_fd(g);
  REQUIRE(field.size() == 2);
  for (std::int64_t f = 0; f < g.total(); ++f) {
    CHECK(field[0][f] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(field[1][f] == doctest::Approx(-3.0).epsilon(1e-12));
  }
}

TEST_CASE("gradient ratio statistics") {
  Box box{{-1.0}, {1.0}};
  GridFunction quad = fill_grid(box, {257}, [](std::span<const double> x) {
    return x[0] * x[0] / 2.0;
  });
  GradientRatioStats lip = lip_of_gradient(grad_fd(quad));
  CHECK(lip.pairs > 0);
  CHECK(lip.max_ratio == doctest::Approx(1.0).epsilon(1e-9));

  GridFunction cusp = fill_grid(box, {513}, [](std::span<const double> x) {
    return std::pow(std::abs(x[0]), 1.5);
  });
  GradientRatioStats hold = holder_of_gradient(grad_fd(cusp), 0.5);
  // the extremal pairs are symmetric ones, ratio 3/sqrt(2)
  CHECK(hold.max_ratio >= 2.0);
  CHECK(hold.max_ratio <= 2.2);

  CHECK_THROWS_AS(holder_of_gradient(grad_fd(quad), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(holder_of_gradient(grad_fd(quad), 1.5), std::invalid_argument);
  CHECK_THROWS_AS(lip_of_gradient({}), std::invalid_argument);
}

TEST_CASE("radial partition of unity") {
  RadialPartition part({1.2, 1.8});
  REQUIRE(part.pieces() == 2);
  CHECK(part.support_lo(0) == 0.0);
  CHECK(part.support_hi(0) == 1.8);
  CHECK(part.support_lo(1) == 1.2);
  CHECK(std::isinf(part.support_hi(1)));

  // exactly 0 or 1 outside the transition band, in squared-radius units
  CHECK(part.weight(0, 1.0) == 1.0);
  CHECK(part.weight(1, 1.0) == 0.0);
  CHECK(part.weight(0, 1.2 * 1.2) == 1.0);
  CHECK(part.weight(0, 4.0) == 0.0);
  CHECK(part.weight(1, 4.0) == 1.0);
  // midpoint of the band in u
  const double umid = (1.44 + 3.24) / 2.0;
  CHECK(part.weight(0, umid) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(part.weight(1, umid) == doctest::Approx(0.5).epsilon(1e-12));

  double w[2];
  for (double u = 0.0; u <= 5.0; u += 0.01) {
    part.weights(u, w);
    CHECK(std::abs(w[0] + w[1] - 1.0) <= 1e-15);
  }

  RadialPartition three({1.0, 2.0, 3.0});
  CHECK(three.support_lo(1) == 1.0);
  CHECK(three.support_hi(1) == 3.0);
  double w3[3];
  for (double u = 0.0; u <= 12.0; u += 0.05) {
    three.weights(u, w3);
    CHECK(std::abs(w3[0] + w3[1] + w3[2] - 1.0) <= 1e-15);
    for (int k = 0; k < 3; ++k) CHECK(w3[k] >= -1e-15);
  }
  three.weights(10.0, w3);  // above every band in squared-radius units
  CHECK(w3[2] == 1.0);

  CHECK_THROWS_AS(RadialPartition({}), std::invalid_argument);
  CHECK_THROWS_AS(RadialPartition({-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(RadialPartition({2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("glue combines certified pieces and reproduces the sites") {
  JetDataset jets = gen_three_point(1);
  EnvelopePair pair = three_point_envelopes(2049);
  RadialPartition part({1.2, 1.8});

  std::vector<GluePiece> pieces;
  pieces.push_back({pair.h, {0, 1}});
  pieces.push_back({pair.H, {2}});
  GlueResult out = glue(pieces, part, jets);
  CHECK(out.partition_max_dev <= 1e-12);
  CHECK(out.site_max_error == 0.0);  // sites are exact grid nodes here

  const GridFunction& F = out.f;
  for (std::int64_t f = 0; f < F.total(); ++f) {
    const double x = F.node(f)[0];
    const double u = x * x;
    if (u <= 1.44) {
      CHECK(F[f] == pair.h[f]);  // weight (1, 0) exactly
    } else if (u >= 3.24) {
      CHECK(F[f] == pair.H[f]);
    } else {
      CHECK(F[f] >= std::min(pair.h[f], pair.H[f]) - 1e-12);
      CHECK(F[f] <= std::max(pair.h[f], pair.H[f]) + 1e-12);
    }
  }

  // piece counts must match the partition
  CHECK_THROWS_AS(glue({pieces[0]}, part, jets), std::invalid_argument);
  // layouts must agree
  {
    EnvelopePair coarse = three_point_envelopes(1025);
    std::vector<GluePiece> bad = pieces;
    bad[1].values = coarse.H;
    CHECK_THROWS_AS(glue(bad, part, jets), std::invalid_argument);
  }
  // a site with positive weight must be listed by the piece
  {
    std::vector<GluePiece> bad = pieces;
    bad[0].sites = {0};
    CHECK_THROWS_AS(glue(bad, part, jets), std::invalid_argument);
  }
  // and must actually be interpolated by it
  {
    std::vector<GluePiece> bad = pieces;
    for (double& v : bad[0].values.values()) v = 42.0;
    CHECK_THROWS_AS(glue(bad, part, jets), std::invalid_argument);
  }
}
