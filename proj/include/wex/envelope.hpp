#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wex/grid.hpp"
#include "wex/jet.hpp"
#include "wex/modulus.hpp"

namespace wex {

// Extremal extension candidates attached to a certified jet dataset:
//   h_z(x) = f(z) + <g(z), x-z> - factor*M*phi(|x-z|)     h = max over sites,
//   H_z(x) = f(z) + <g(z), x-z> + factor*M*phi(|x-z|)     H = min over sites.
// With a concave base modulus and M at least the WG constant, h <= H holds and
// both functions take the value f(z) at every site.
struct EnvelopeSpec {
  JetDataset jets;
  double m_const = 1.0;
  Primitive phi;
  double factor = 6.0;
};

EnvelopeSpec make_envelope_spec(JetDataset jets, double m_const, const Modulus& omega,
                                double factor = 6.0);

double lower_envelope(const EnvelopeSpec& spec, std::span<const double> x);
double upper_envelope(const EnvelopeSpec& spec, std::span<const double> x);

// Gradient of the lower envelope at x.  `tie` is set when two terms attain the
// max within a relative tolerance, in which case `grad` belongs to the first
// attaining site and the envelope may be nonsmooth at x.
struct EnvelopeGradient {
  std::vector<double> grad;
  int site = -1;
  bool tie = false;
};
EnvelopeGradient envelope_gradient(const EnvelopeSpec& spec, std::span<const double> x,
                                   double tie_rtol = 1e-12);

struct EnvelopePair {
  GridFunction h, H;
  std::vector<int> argmax;  // attaining site per node, lower envelope
  std::vector<int> argmin;  // attaining site per node, upper envelope
  bool sites_inside = true;  // cleared when some site falls outside the box
};
EnvelopePair envelope_grid(const EnvelopeSpec& spec, const Box& box, const std::vector<int>& res);

// Midpoint-style semiconvexity test: samples random pairs (x,y) in the box and
// random lambda, and reports the largest value of
//   fn(lx+(1-l)y) - l fn(x) - (1-l) fn(y) - l(1-l) sigma(|x-y|) |x-y|.
// A nonpositive margin (up to tol) passes.
struct SemiconvexityReport {
  double max_margin = 0.0;
  bool pass = false;
};
SemiconvexityReport semiconvexity_check(const std::function<double(std::span<const double>)>& fn,
                                        const std::function<double(double)>& sigma, const Box& box,
                                        int trials, std::uint64_t seed, double tol = 1e-9);

// Empirical modulus of the gradient of nu(x) = phi(|x|), sampled on random
// pairs in the ball of the given radius.  For phi = t^2/2 this is the identity
// map and the reported modulus is (to sampling accuracy) t itself.
EmpiricalModulus radial_kernel_gradient_modulus(const Primitive& phi, int dim, double radius,
                                                int trials, std::uint64_t seed);

}  // namespace wex
