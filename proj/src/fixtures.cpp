#include "wex/fixtures.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace wex {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Liang-Barsky style overlap test of a segment with a closed axis box.
bool segment_hits_box(std::span<const double> p, std::span<const double> q, double lo, double hi) {
  double t0 = 0.0, t1 = 1.0;
  for (int k = 0; k < 2; ++k) {
    const double d = q[k] - p[k];
    if (d == 0.0) {
      if (p[k] < lo || p[k] > hi) return false;
      continue;
    }
    double ta = (lo - p[k]) / d, tb = (hi - p[k]) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

double smoothstep01(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return ((6.0 * u - 15.0) * u + 10.0) * u * u * u;
}

double smoothstep01_deriv(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double w = u * (u - 1.0);
  return 30.0 * w * w;
}

JetDataset gen_three_point(int n) {
  if (n < 1) throw std::invalid_argument("gen_three_point: dimension must be >= 1");
  std::vector<double> sites(3 * (std::size_t)n, 0.0);
  sites[(std::size_t)n] = 1.0;      // e1
  sites[2 * (std::size_t)n] = 2.0;  // 2 e1
  std::vector<double> values{0.0, 0.0, 1.0};
  std::vector<double> grads(3 * (std::size_t)n, 0.0);
  return JetDataset(n, std::move(sites), std::move(values), std::move(grads));
}

JetDataset gen_integer_jet(int n_pairs) {
  if (n_pairs < 2) throw std::invalid_argument("gen_integer_jet: need at least 2 pairs");
  std::vector<double> sites, values, grads;
  for (int s = 1; s <= 2 * n_pairs; ++s) {
    sites.push_back((double)s);
    values.push_back(s % 2 == 1 ? (double)((s + 1) / 2) : 0.0);
    grads.push_back(0.0);
  }
  return JetDataset(1, std::move(sites), std::move(values), std::move(grads));
}

DomainFixture gen_slit_square(int resolution) {
  if (resolution < 16) throw std::invalid_argument("gen_slit_square: resolution must be >= 16");
  const double s = 1.0 / resolution;
  std::vector<double> pts, values, grads;
  for (int i = 1; i < 3 * resolution; ++i) {
    for (int j = 1; j < 3 * resolution; ++j) {
      const double x = i * s, y = j * s;
      if (x >= 1.0 && x <= 2.0 && y >= 1.0 && y <= 2.0) continue;  // closed square
      if (j == 2 * resolution && x < 1.0) continue;                // slit row
      pts.push_back(x);
      pts.push_back(y);
      double f = 0.0, gy = 0.0;
      if (y > 2.0) {
        f = 1.0;
      } else if (x > 2.0 && y >= 1.0) {
        const double a = 0.5 * kPi * (y - 1.0);
        f = std::sin(a) * std::sin(a);
        gy = 0.5 * kPi * std::sin(kPi * (y - 1.0));
      }
      values.push_back(f);
      grads.push_back(0.0);
      grads.push_back(gy);
    }
  }
  SegmentPredicate ok = [](std::span<const double> p, std::span<const double> q) {
    if (segment_hits_box(p, q, 1.0, 2.0)) return false;
    const double a = p[1] - 2.0, b = q[1] - 2.0;
    if (a * b < 0.0) {
      const double t = a / (a - b);
      const double x = p[0] + t * (q[0] - p[0]);
      if (x < 1.0) return false;  // crosses the slit; x > 0 holds throughout
    }
    return true;
  };
  DomainFixture fx;
  fx.sample = build_graph(pts, 2, 3.0 * s, ok);
  fx.jets = JetDataset(2, std::move(pts), std::move(values), std::move(grads));
  return fx;
}

DomainFixture gen_parabola_cusp(double cusp_scale, int resolution) {
  if (!(cusp_scale > 0.0) || cusp_scale > 0.5) {
    throw std::invalid_argument("gen_parabola_cusp: cusp scale must be in (0, 0.5]");
  }
  if (resolution < 16) throw std::invalid_argument("gen_parabola_cusp: resolution must be >= 16");
  const double h = 1.0 / resolution;
  std::vector<double> pts;
  for (int i = 1 - resolution; i < resolution; ++i) {
    for (int j = 1 - resolution; j < resolution; ++j) {
      if (i * i + j * j >= resolution * resolution) continue;  // open unit disc
      const double x = i * h, y = j * h;
      if (x >= 0.0 && std::abs(y) <= x * x) continue;  // closed cusp region
      pts.push_back(x);
      pts.push_back(y);
    }
  }
  // Cross-cusp witness pairs hugging the parabola at halving abscissae, down
  // to an eighth of the lattice step; each connects to the lattice through a
  // diagonal edge that stays above (or below) the parabola.
  for (double x = cusp_scale; x >= h / 8.0; x *= 0.5) {
    const double y = x * x * (1.0 + 1e-7);
    pts.push_back(x);
    pts.push_back(y);
    pts.push_back(x);
    pts.push_back(-y);
  }
  std::vector<double> values, grads;
  const int m = (int)(pts.size() / 2);
  values.reserve((std::size_t)m);
  grads.reserve(pts.size());
  for (int i = 0; i < m; ++i) {
    const double x = pts[2 * (std::size_t)i], y = pts[2 * (std::size_t)i + 1];
    if (x >= 0.0 && y >= 0.0) {
      values.push_back(x * x);
      grads.push_back(2.0 * x);
      grads.push_back(0.0);
    } else {
      values.push_back(0.0);
      grads.push_back(0.0);
      grads.push_back(0.0);
    }
  }
  // A segment meets {x >= 0, |y| <= x^2} iff it crosses y = 0 at x >= 0:
  // on either open half-plane y > 0 or y < 0, t -> |y(t)| - x(t)^2 is
  // concave, so with both endpoints outside the region the segment stays
  // outside unless it reaches y = 0.
  SegmentPredicate ok = [](std::span<const double> p, std::span<const double> q) {
    const double a = p[1], b = q[1];
    if (a * b < 0.0) {
      const double t = a / (a - b);
      if (p[0] + t * (q[0] - p[0]) >= 0.0) return false;
    } else if (a == 0.0 || b == 0.0) {
      if (std::max(p[0], q[0]) >= 0.0 && (a == 0.0 && b == 0.0)) return false;
      if (a == 0.0 && p[0] >= 0.0) return false;
      if (b == 0.0 && q[0] >= 0.0) return false;
    }
    return true;
  };
  DomainFixture fx;
  fx.sample = build_graph(pts, 2, 3.0 * h, ok);
  fx.jets = JetDataset(2, std::move(pts), std::move(values), std::move(grads));
  return fx;
}

DomainSample gen_oscillating_domain(int resolution) {
  if (resolution < 16) {
    throw std::invalid_argument("gen_oscillating_domain: resolution must be >= 16");
  }
  const double h = 1.0 / resolution;
  std::vector<double> pts;
  double x = 0.98;
  while (x >= 0.3) {
    const double w = x * x * x * x;
    const double lo = x * x * std::sin(1.0 / x);
    const double sy = std::min(0.5 * h, w / 6.0);
    const int ny = std::max(2, (int)std::ceil(w / sy));
    for (int j = 0; j < ny; ++j) {
      pts.push_back(x);
      pts.push_back(lo + w * (j + 0.5) / ny);
    }
    x -= std::min(h, w / 8.0);
  }
  auto inside = [](double px, double py) {
    if (px <= 0.0 || px >= 1.0) return false;
    const double base = px * px * std::sin(1.0 / px);
    return py > base && py < base + px * px * px * px;
  };
  SegmentPredicate ok = [inside](std::span<const double> p, std::span<const double> q) {
    for (int i = 1; i < 64; ++i) {
      const double t = i / 64.0;
      if (!inside(p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))) return false;
    }
    return true;
  };
  return build_graph(std::move(pts), 2, 3.0 * h, ok);
}

DomainSample gen_annulus(double r, double R, int resolution) {
  if (!(0.0 <= r && r < R)) throw std::invalid_argument("gen_annulus: need 0 <= r < R");
  if (resolution < 16) throw std::invalid_argument("gen_annulus: resolution must be >= 16");
  const double h = 2.0 * R / resolution;
  const int half = resolution / 2;
  std::vector<double> pts;
  for (int i = -half; i <= half; ++i) {
    for (int j = -half; j <= half; ++j) {
      const double x = i * h, y = j * h, n2 = x * x + y * y;
      if (n2 > r * r && n2 < R * R) {
        pts.push_back(x);
        pts.push_back(y);
      }
    }
  }
  const double rr = r * r;
  SegmentPredicate ok = [rr](std::span<const double> p, std::span<const double> q) {
    // closest approach of the segment to the origin
    const double dx = q[0] - p[0], dy = q[1] - p[1];
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? -(p[0] * dx + p[1] * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double cx = p[0] + t * dx, cy = p[1] + t * dy;
    return cx * cx + cy * cy > rr;
  };
  return build_graph(std::move(pts), 2, 3.0 * h, ok);
}

DomainSample gen_box(int resolution, int dim) {
  if (resolution < 4) throw std::invalid_argument("gen_box: resolution must be >= 4");
  if (dim < 1 || dim > 3) throw std::invalid_argument("gen_box: dim must be 1..3");
  const double h = 1.0 / resolution;
  std::vector<double> pts;
  std::vector<int> idx((std::size_t)dim, 1);
  while (true) {
    for (int k = 0; k < dim; ++k) pts.push_back(idx[(std::size_t)k] * h);
    int k = dim - 1;
    while (k >= 0 && ++idx[(std::size_t)k] >= resolution) idx[(std::size_t)k--] = 1;
    if (k < 0) break;
  }
  return build_graph(std::move(pts), dim, 3.0 * h);
}

DomainFixture gen_cone_shell(int resolution) {
  if (resolution < 32) throw std::invalid_argument("gen_cone_shell: resolution must be >= 32");
  const double h = 4.0 / resolution;
  const int half = resolution / 2;
  auto in_cone = [](double x, double y) {
    return x > 0.0 && x * x > (15.0 / 16.0) * (x * x + y * y);
  };
  std::vector<double> pts, values, grads;
  for (int i = -half; i <= half; ++i) {
    for (int j = -half; j <= half; ++j) {
      const double x = i * h, y = j * h, n2 = x * x + y * y;
      if (n2 >= 4.0) continue;
      const bool cone = in_cone(x, y);
      if (n2 <= 1.0 && !cone) continue;
      pts.push_back(x);
      pts.push_back(y);
      if (cone && x < 0.5) {
        values.push_back(1.0 - smoothstep01(2.0 * x));
        grads.push_back(-2.0 * smoothstep01_deriv(2.0 * x));
        grads.push_back(0.0);
      } else {
        values.push_back(0.0);
        grads.push_back(0.0);
        grads.push_back(0.0);
      }
    }
  }
  // A segment is valid iff on the t-interval overlapping the closed unit
  // ball it stays in the cone; both constraints are quadratic/linear in t.
  SegmentPredicate ok = [](std::span<const double> p, std::span<const double> q) {
    const double dx = q[0] - p[0], dy = q[1] - p[1];
    const double a = dx * dx + dy * dy;
    const double b = 2.0 * (p[0] * dx + p[1] * dy);
    const double c = p[0] * p[0] + p[1] * p[1] - 1.0;
    if (a == 0.0) return true;
    const double disc = b * b - 4.0 * a * c;
    if (disc <= 0.0) return true;  // never enters the closed unit ball
    const double sq = std::sqrt(disc);
    const double tA = std::max((-b - sq) / (2.0 * a), 0.0);
    const double tB = std::min((-b + sq) / (2.0 * a), 1.0);
    if (tA > tB) return true;
    const auto lin = [&](double t) { return p[0] + t * dx; };
    const double alpha = dx * dx - (15.0 / 16.0) * a;
    const double beta = 2.0 * p[0] * dx - (15.0 / 16.0) * b;
    const double gamma = p[0] * p[0] - (15.0 / 16.0) * (c + 1.0);
    const auto cone_fn = [&](double t) { return (alpha * t + beta) * t + gamma; };
    if (lin(tA) <= 0.0 || lin(tB) <= 0.0) return false;
    if (cone_fn(tA) <= 0.0 || cone_fn(tB) <= 0.0) return false;
    if (alpha > 0.0) {
      const double tv = -beta / (2.0 * alpha);
      if (tA < tv && tv < tB && cone_fn(tv) <= 0.0) return false;
    }
    return true;
  };
  DomainFixture fx;
  fx.sample = build_graph(pts, 2, 3.0 * h, ok);
  fx.jets = JetDataset(2, std::move(pts), std::move(values), std::move(grads));
  return fx;
}

}  // namespace wex
