#include "wex/envelope.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "wex/linalg.hpp"

namespace wex {

EnvelopeSpec make_envelope_spec(JetDataset jets, double m_const, const Modulus& omega,
                                double factor) {
  if (!(m_const >= 0.0) || !std::isfinite(m_const))
    throw std::invalid_argument("envelope: M must be finite and nonnegative");
  if (!(factor > 0.0)) throw std::invalid_argument("envelope: kernel factor must be positive");
  return EnvelopeSpec{std::move(jets), m_const, Primitive(omega), factor};
}

namespace {

double term(const EnvelopeSpec& s, int i, std::span<const double> x, double sign) {
  auto z = s.jets.site(i);
  double lin = s.jets.value(i);
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double dk = x[k] - z[k];
    lin += s.jets.gradient(i)[k] * dk;
    d2 += dk * dk;
  }
  double d = std::sqrt(d2);
  return lin + sign * s.factor * s.m_const * s.phi(d);
}

void check_point(const EnvelopeSpec& s, std::span<const double> x) {
  if (static_cast<int>(x.size()) != s.jets.dim())
    throw std::invalid_argument("envelope: point dimension mismatch");
}

}  // namespace

double lower_envelope(const EnvelopeSpec& spec, std::span<const double> x) {
  check_point(spec, x);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.jets.size(); ++i) best = std::max(best, term(spec, i, x, -1.0));
  return best;
}

double upper_envelope(const EnvelopeSpec& spec, std::span<const double> x) {
  check_point(spec, x);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.jets.size(); ++i) best = std::min(best, term(spec, i, x, +1.0));
  return best;
}

EnvelopeGradient envelope_gradient(const EnvelopeSpec& spec, std::span<const double> x,
                                   double tie_rtol) {
  check_point(spec, x);
  double best = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int i = 0; i < spec.jets.size(); ++i) {
    double v = term(spec, i, x, -1.0);
    if (v > best) {
      second = best;
      best = v;
      arg = i;
    } else if (v > second) {
      second = v;
    }
  }
  EnvelopeGradient out;
  out.site = arg;
  double scale = std::max(1.0, std::abs(best));
  out.tie = spec.jets.size() > 1 && best - second <= tie_rtol * scale;
  auto z = spec.jets.site(arg);
  auto g = spec.jets.gradient(arg);
  out.grad.assign(g.begin(), g.end());
  double d = dist(x, z);
  if (d > 0.0) {
    // d/dx of phi(|x-z|) is phi'(|x-z|) (x-z)/|x-z|; at x = z the kernel term
    // has vanishing derivative since phi'(0) = omega(0) = 0.
    double w = spec.factor * spec.m_const * spec.phi.derivative(d) / d;
    for (std::size_t k = 0; k < x.size(); ++k) out.grad[k] -= w * (x[k] - z[k]);
  }
  return out;
}

EnvelopePair envelope_grid(const EnvelopeSpec& spec, const Box& box, const std::vector<int>& res) {
  if (box.dim() != spec.jets.dim())
    throw std::invalid_argument("envelope: box dimension mismatch");
  EnvelopePair out;
  out.h = make_grid(box, res);
  out.H = make_grid(box, res);
  out.argmax.assign((std::size_t)out.h.total(), 0);
  out.argmin.assign((std::size_t)out.h.total(), 0);
  for (int i = 0; i < spec.jets.size(); ++i) {
    auto z = spec.jets.site(i);
    if (!out.h.contains(z)) out.sites_inside = false;
  }
  const std::int64_t total = out.h.total();
  for (std::int64_t f = 0; f < total; ++f) {
    auto x = out.h.node(f);
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    int alo = 0, ahi = 0;
    for (int i = 0; i < spec.jets.size(); ++i) {
      double tl = term(spec, i, x, -1.0);
      if (tl > lo) {
        lo = tl;
        alo = i;
      }
      double th = term(spec, i, x, +1.0);
      if (th < hi) {
        hi = th;
        ahi = i;
      }
    }
    out.h[f] = lo;
    out.H[f] = hi;
    out.argmax[(std::size_t)f] = alo;
    out.argmin[(std::size_t)f] = ahi;
  }
  return out;
}

SemiconvexityReport semiconvexity_check(const std::function<double(std::span<const double>)>& fn,
                                        const std::function<double(double)>& sigma, const Box& box,
                                        int trials, std::uint64_t seed, double tol) {
  if (trials < 1) throw std::invalid_argument("semiconvexity_check: trials must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int n = box.dim();
  std::vector<double> x((std::size_t)n), y((std::size_t)n), mid((std::size_t)n);
  SemiconvexityReport rep;
  rep.max_margin = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    for (int k = 0; k < n; ++k) {
      x[(std::size_t)k] = box.lo[(std::size_t)k] +
                          unit(rng) * (box.hi[(std::size_t)k] - box.lo[(std::size_t)k]);
      y[(std::size_t)k] = box.lo[(std::size_t)k] +
                          unit(rng) * (box.hi[(std::size_t)k] - box.lo[(std::size_t)k]);
    }
    double lam = unit(rng);
    for (int k = 0; k < n; ++k)
      mid[(std::size_t)k] = lam * x[(std::size_t)k] + (1.0 - lam) * y[(std::size_t)k];
    double d = dist(x, y);
    double deficit = fn(mid) - lam * fn(x) - (1.0 - lam) * fn(y);
    double allowance = lam * (1.0 - lam) * sigma(d) * d;
    rep.max_margin = std::max(rep.max_margin, deficit - allowance);
  }
  rep.pass = rep.max_margin <= tol;
  return rep;
}

EmpiricalModulus radial_kernel_gradient_modulus(const Primitive& phi, int dim, double radius,
                                                int trials, std::uint64_t seed) {
  if (dim < 1 || !(radius > 0.0) || trials < 1)
    throw std::invalid_argument("radial_kernel_gradient_modulus: bad arguments");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-radius, radius);
  auto dnu = [&](const std::vector<double>& x) {
    double r = norm(x);
    std::vector<double> g(x.size(), 0.0);
    if (r > 0.0) {
      double w = phi.derivative(r) / r;
      for (std::size_t k = 0; k < x.size(); ++k) g[k] = w * x[k];
    }
    return g;
  };
  std::vector<EmpiricalModulus::Sample> samples;
  samples.reserve((std::size_t)trials);
  std::vector<double> x((std::size_t)dim), y((std::size_t)dim);
  for (int t = 0; t < trials; ++t) {
    for (int k = 0; k < dim; ++k) {
      x[(std::size_t)k] = coord(rng);
      y[(std::size_t)k] = coord(rng);
    }
    auto gx = dnu(x), gy = dnu(y);
    samples.push_back({dist(x, y), dist(gx, gy)});
  }
  return EmpiricalModulus::from_samples(std::move(samples));
}

}  // namespace wex
