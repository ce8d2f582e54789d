#pragma once
#include "wex/domain.hpp"
#include "wex/jet.hpp"

namespace wex {

// Deterministic generators for the example datasets used across the tests:
// jitter-free lattice clouds clipped to each set definition, with exact edge
// predicates so that graph edges never cross removed obstacles.

struct DomainFixture {
  DomainSample sample;
  JetDataset jets;  // sites coincide with the cloud points
};

// Sites {0, e1, 2e1} in R^n with values (0, 0, 1) and zero gradients.
JetDataset gen_three_point(int n);

// 1-D sites 1..2N with f(2k-1) = k, f(2k) = 0 and zero gradients; the best
// Lipschitz constant is exactly N.
JetDataset gen_integer_jet(int n_pairs);

// (0,3)^2 minus the closed square [1,2]^2 and the slit (0,1)x{2}, sampled at
// `resolution` points per unit.  f is 0 on the bottom strip and the left
// channel, 1 on the top strip, and sin^2(pi/2 (y-1)) on the right channel, so
// it is C^{1,1} along paths yet jumps by 1 across the slit.
DomainFixture gen_slit_square(int resolution = 32);

// Unit disc minus the closed cusp {x >= 0, |y| <= x^2}, with f = x^2 on the
// quadrant {x >= 0, y >= 0} and 0 elsewhere.  Extra point pairs are placed at
// (x_k, +-x_k^2 (1+1e-7)) for x_k halving down from cusp_scale, so the
// cross-cusp Taylor ratio 1/2 appears at arbitrarily small pair distances.
DomainFixture gen_parabola_cusp(double cusp_scale = 0.25, int resolution = 64);

// Strip x^2 sin(1/x) < y < x^4 + x^2 sin(1/x) for x in [0.3, 0.98], sampled
// on columns graded like x^4 so the narrow end stays connected; the x floor
// 0.3 is where oscillations outpace the default resolution.
DomainSample gen_oscillating_domain(int resolution = 64);

// Annulus r < |x| < R in R^2 on a lattice of `resolution` points per 2R.
DomainSample gen_annulus(double r = 0.5, double R = 1.0, int resolution = 64);

// Open unit box (0,1)^dim lattice cloud (convex reference domain).
DomainSample gen_box(int resolution = 48, int dim = 2);

// Shell 1 < |x| < 2 joined with the cone {<x,e1> > 0, sin(angle) < 1/4}
// truncated to |x| < 2, in R^2.  f = phi(x1) with phi a descending quintic
// smoothstep supported on [0, 1/2], so f lives deep in the cone and vanishes
// identically on the shell; gradients are exact.
DomainFixture gen_cone_shell(int resolution = 160);

// Quintic smoothstep: 0 at u<=0, 1 at u>=1, C^2 at the ends.
double smoothstep01(double u);
double smoothstep01_deriv(double u);

}  // namespace wex
