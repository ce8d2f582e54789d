#include "wex/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wex/linalg.hpp"
#include "wex/parallel.hpp"

namespace wex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of the parabolas j -> v[j] + w (i-j)^2 over an integer line.
void dt_line(const double* v, double* out, int n, double w, int* vtx, double* z) {
  int k = 0;
  vtx[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      int r = vtx[k];
      s = ((v[q] + w * q * q) - (v[r] + w * r * r)) / (2.0 * w * (q - r));
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    vtx[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int i = 0; i < n; ++i) {
    while (z[k + 1] < i) ++k;
    int r = vtx[k];
    out[i] = v[r] + w * (i - r) * (i - r);
  }
}

void conv_axis(GridFunction& g, int axis, double t) {
  const int n = g.dims()[(std::size_t)axis];
  const double h = g.spacing(axis);
  const double w = h * h / (2.0 * t);
  std::int64_t stride = 1;
  for (int k = axis + 1; k < g.dim(); ++k) stride *= g.dims()[(std::size_t)k];
  const std::int64_t lines = g.total() / n;
  double* vals = g.values().data();
  parallel_for(lines, [&, stride, n, w](std::int64_t line) {
    thread_local std::vector<double> in, out, z;
    thread_local std::vector<int> vtx;
    in.resize((std::size_t)n);
    out.resize((std::size_t)n);
    z.resize((std::size_t)n + 1);
    vtx.resize((std::size_t)n);
    std::int64_t above = line / stride;
    std::int64_t below = line % stride;
    std::int64_t base = above * n * stride + below;
    for (int i = 0; i < n; ++i) in[(std::size_t)i] = vals[base + i * stride];
    dt_line(in.data(), out.data(), n, w, vtx.data(), z.data());
    for (int i = 0; i < n; ++i) vals[base + i * stride] = out[(std::size_t)i];
  });
}

void check_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::invalid_argument("convolution: parameter t must be positive and finite");
}

}  // namespace

GridFunction inf_conv_quadratic(const GridFunction& g, double t) {
  check_t(t);
  GridFunction out = g;
  for (int a = 0; a < g.dim(); ++a) conv_axis(out, a, t);
  return out;
}

GridFunction sup_conv_quadratic(const GridFunction& g, double t) {
  check_t(t);
  GridFunction out = g;
  for (double& v : out.values()) v = -v;
  for (int a = 0; a < g.dim(); ++a) conv_axis(out, a, t);
  for (double& v : out.values()) v = -v;
  return out;
}

namespace {

bool interior(const GridFunction& g, std::int64_t flat, int shell) {
  auto idx = g.unflatten(flat);
  for (int k = 0; k < g.dim(); ++k)
    if (idx[(std::size_t)k] < shell || idx[(std::size_t)k] > g.dims()[(std::size_t)k] - 1 - shell)
      return false;
  return true;
}

void check_sandwich_inputs(const GridFunction& h, const GridFunction& H, double m_const) {
  if (!h.same_layout(H))
    throw std::invalid_argument("insertion: envelope grids must share one layout");
  if (!(m_const >= 0.0) || !std::isfinite(m_const))
    throw std::invalid_argument("insertion: M must be finite and nonnegative");
  double scale = 0.0;
  for (std::int64_t f = 0; f < h.total(); ++f)
    scale = std::max({scale, std::abs(h[f]), std::abs(H[f])});
  double tol = 1e-9 * (1.0 + scale);
  for (std::int64_t f = 0; f < h.total(); ++f)
    if (h[f] > H[f] + tol)
      throw std::invalid_argument("insertion: lower envelope exceeds upper envelope on the grid");
}

InsertionDiagnostics diagnose(const GridFunction& F, const GridFunction& h, const GridFunction& H,
                              double m_const, double t, const JetDataset* jets) {
  InsertionDiagnostics d;
  double s = F.max_spacing();
  d.sandwich_budget = 5.0 * s * (1.0 + 6.0 * m_const);
  d.site_budget = 5.0 * s * s * (1.0 + 6.0 * m_const);
  d.grad_lip_budget = 30.0 * m_const;
  d.t_large_warning = m_const > 0.0 && t >= 1.0 / (6.0 * m_const);
  for (std::int64_t f = 0; f < F.total(); ++f) {
    if (!interior(F, f, 1)) continue;
    d.max_lower_violation = std::max(d.max_lower_violation, h[f] - F[f]);
    d.max_upper_violation = std::max(d.max_upper_violation, F[f] - H[f]);
  }
  d.max_lower_violation = std::max(d.max_lower_violation, 0.0);
  d.max_upper_violation = std::max(d.max_upper_violation, 0.0);
  d.sandwich_ok = d.max_lower_violation <= d.sandwich_budget &&
                  d.max_upper_violation <= d.sandwich_budget;
  if (jets) {
    for (int i = 0; i < jets->size(); ++i) {
      auto z = jets->site(i);
      if (!F.contains(z)) continue;
      d.site_max_error = std::max(d.site_max_error, std::abs(F.interpolate(z) - jets->value(i)));
    }
    d.sites_ok = d.site_max_error <= d.site_budget;
  }
  auto field = grad_fd(F);
  d.grad_lip = lip_of_gradient(field, 1).max_ratio;
  d.grad_lip_ok = d.grad_lip <= d.grad_lip_budget;
  return d;
}

}  // namespace

InsertionResult insert_c11(const GridFunction& h, const GridFunction& H, double m_const,
                           std::optional<double> t, const JetDataset* jets) {
  check_sandwich_inputs(h, H, m_const);
  double tu;
  if (t) {
    tu = *t;
    check_t(tu);
  } else {
    if (!(m_const > 0.0))
      throw std::invalid_argument("insertion: default t = 1/(12M) needs M > 0");
    tu = 1.0 / (12.0 * m_const);
  }
  InsertionResult res;
  res.t_used = tu;
  res.f = inf_conv_quadratic(sup_conv_quadratic(h, tu), tu);
  res.diag = diagnose(res.f, h, H, m_const, tu, jets);
  return res;
}

InsertionResult insert_general(const GridFunction& h, const GridFunction& H, const Modulus& omega,
                               double m_const, double a, const JetDataset* jets) {
  check_sandwich_inputs(h, H, m_const);
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("insertion: kernel scale a must be positive");
  const std::int64_t total = h.total();
  if (total > 20000)
    throw std::invalid_argument("insertion: general kernel mode is quadratic cost; grid too large");
  Primitive phi(omega);
  // cache node coordinates
  const int n = h.dim();
  std::vector<double> coords((std::size_t)(total * n));
  for (std::int64_t f = 0; f < total; ++f) {
    auto x = h.node(f);
    std::copy(x.begin(), x.end(), coords.begin() + (std::size_t)(f * n));
  }
  auto kernel = [&](std::int64_t i, std::int64_t j) {
    const double* xi = coords.data() + i * n;
    const double* xj = coords.data() + j * n;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      double dk = xi[k] - xj[k];
      s += dk * dk;
    }
    return a * phi(std::sqrt(s));
  };
  GridFunction u = h;
  parallel_for(total, [&](std::int64_t x) {
    double best = -kInf;
    for (std::int64_t y = 0; y < total; ++y) best = std::max(best, h[y] - kernel(x, y));
    u[x] = best;
  });
  InsertionResult res;
  res.t_used = 1.0 / a;  // reported for parity with the quadratic mode
  res.f = h;
  GridFunction& F = res.f;
  parallel_for(total, [&](std::int64_t x) {
    double best = kInf;
    for (std::int64_t y = 0; y < total; ++y) best = std::min(best, u[y] + kernel(x, y));
    F[x] = best;
  });
  res.diag = diagnose(res.f, h, H, m_const, res.t_used, jets);
  return res;
}

std::vector<GridFunction> grad_fd(const GridFunction& g) {
  std::vector<GridFunction> field;
  field.reserve((std::size_t)g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    GridFunction c = g;
    const int n = g.dims()[(std::size_t)a];
    const double h = g.spacing(a);
    std::int64_t stride = 1;
    for (int k = a + 1; k < g.dim(); ++k) stride *= g.dims()[(std::size_t)k];
    const std::int64_t lines = g.total() / n;
    parallel_for(lines, [&, stride, n, h](std::int64_t line) {
      std::int64_t above = line / stride;
      std::int64_t below = line % stride;
      std::int64_t base = above * n * stride + below;
      auto at = [&](int i) { return g[base + i * stride]; };
      auto& out = c.values();
      out[(std::size_t)(base)] = (at(1) - at(0)) / h;
      for (int i = 1; i < n - 1; ++i)
        out[(std::size_t)(base + i * stride)] = (at(i + 1) - at(i - 1)) / (2.0 * h);
      out[(std::size_t)(base + (std::int64_t)(n - 1) * stride)] = (at(n - 1) - at(n - 2)) / h;
    });
    field.push_back(std::move(c));
  }
  return field;
}

namespace {

GradientRatioStats ratio_of_gradient(const std::vector<GridFunction>& field, double alpha,
                                     int shell) {
  if (field.empty()) throw std::invalid_argument("gradient stats: empty field");
  const GridFunction& g0 = field.front();
  for (const auto& c : field)
    if (!c.same_layout(g0)) throw std::invalid_argument("gradient stats: layout mismatch");
  const int n = g0.dim();
  if (static_cast<int>(field.size()) != n)
    throw std::invalid_argument("gradient stats: need one component per axis");
  std::vector<double> ratios;
  auto gdiff = [&](std::int64_t a, std::int64_t b) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      double d = field[(std::size_t)k][a] - field[(std::size_t)k][b];
      s += d * d;
    }
    return std::sqrt(s);
  };
  // axis-adjacent interior pairs
  for (int axis = 0; axis < n; ++axis) {
    std::int64_t stride = 1;
    for (int k = axis + 1; k < n; ++k) stride *= g0.dims()[(std::size_t)k];
    double h = g0.spacing(axis);
    double denom = std::pow(h, alpha);
    for (std::int64_t f = 0; f < g0.total(); ++f) {
      if (!interior(g0, f, shell)) continue;
      auto idx = g0.unflatten(f);
      if (idx[(std::size_t)axis] + 1 > g0.dims()[(std::size_t)axis] - 1 - shell) continue;
      ratios.push_back(gdiff(f, f + stride) / denom);
    }
  }
  // deterministic longer pairs
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  auto next = [&]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  };
  std::vector<std::int64_t> inner;
  for (std::int64_t f = 0; f < g0.total(); ++f)
    if (interior(g0, f, shell)) inner.push_back(f);
  if (inner.size() >= 2) {
    std::int64_t want = std::min<std::int64_t>(4 * (std::int64_t)inner.size(), 200000);
    for (std::int64_t k = 0; k < want; ++k) {
      std::int64_t i = (std::int64_t)(next() % inner.size());
      std::int64_t j = (std::int64_t)(next() % inner.size());
      if (i == j) continue;
      auto xi = g0.node(inner[(std::size_t)i]);
      auto xj = g0.node(inner[(std::size_t)j]);
      double d = dist(xi, xj);
      ratios.push_back(gdiff(inner[(std::size_t)i], inner[(std::size_t)j]) / std::pow(d, alpha));
    }
  }
  GradientRatioStats st;
  st.pairs = (std::int64_t)ratios.size();
  if (ratios.empty()) return st;
  st.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  std::size_t k95 = (std::size_t)((double)(ratios.size() - 1) * 0.95);
  std::nth_element(ratios.begin(), ratios.begin() + (std::ptrdiff_t)k95, ratios.end());
  st.q95 = ratios[k95];
  return st;
}

}  // namespace

GradientRatioStats lip_of_gradient(const std::vector<GridFunction>& field, int shell) {
  return ratio_of_gradient(field, 1.0, shell);
}

GradientRatioStats holder_of_gradient(const std::vector<GridFunction>& field, double alpha,
                                      int shell) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("gradient stats: exponent must lie in (0,1]");
  return ratio_of_gradient(field, alpha, shell);
}

RadialPartition::RadialPartition(std::vector<double> radii) : radii_(std::move(radii)) {
  if (radii_.empty()) throw std::invalid_argument("partition: need at least one radius");
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    if (!(radii_[i] > 0.0) || !std::isfinite(radii_[i]))
      throw std::invalid_argument("partition: radii must be positive and finite");
    if (i > 0 && radii_[i] <= radii_[i - 1])
      throw std::invalid_argument("partition: radii must strictly increase");
  }
  sq_.resize(radii_.size());
  for (std::size_t i = 0; i < radii_.size(); ++i) sq_[i] = radii_[i] * radii_[i];
}

namespace {
// quintic smoothstep: C^2, flat to second order at both ends
double smooth01(double w) {
  if (w <= 0.0) return 0.0;
  if (w >= 1.0) return 1.0;
  return ((6.0 * w - 15.0) * w + 10.0) * w * w * w;
}
}  // namespace

void RadialPartition::weights(double u, double* out) const {
  const int K = pieces();
  if (K == 1) {
    out[0] = 1.0;
    return;
  }
  double prev = 1.0;  // 1 - S_{-1}
  for (int g = 0; g < K - 1; ++g) {
    double s = smooth01((u - sq_[(std::size_t)g]) / (sq_[(std::size_t)g + 1] - sq_[(std::size_t)g]));
    out[g] = prev - s;
    prev = s;
  }
  out[K - 1] = prev;
}

double RadialPartition::weight(int piece, double u) const {
  std::vector<double> w((std::size_t)pieces());
  weights(u, w.data());
  return w[(std::size_t)piece];
}

double RadialPartition::support_lo(int piece) const {
  return piece == 0 ? 0.0 : radii_[(std::size_t)piece - 1];
}

double RadialPartition::support_hi(int piece) const {
  return piece == pieces() - 1 ? kInf : radii_[(std::size_t)piece + 1];
}

GlueResult glue(const std::vector<GluePiece>& pieces, const RadialPartition& partition,
                const JetDataset& jets, std::optional<double> site_tol) {
  if (pieces.empty()) throw std::invalid_argument("glue: no pieces");
  if (static_cast<int>(pieces.size()) != partition.pieces())
    throw std::invalid_argument("glue: piece count must match partition");
  const GridFunction& g0 = pieces.front().values;
  for (const auto& p : pieces)
    if (!p.values.same_layout(g0)) throw std::invalid_argument("glue: piece grid layouts differ");
  if (g0.dim() != jets.dim()) throw std::invalid_argument("glue: jet dimension mismatch");
  const int K = partition.pieces();

  double fscale = 0.0;
  for (int i = 0; i < jets.size(); ++i) fscale = std::max(fscale, std::abs(jets.value(i)));
  double tol = site_tol.value_or(1e-6 * (1.0 + fscale));

  // every active piece must cover and reproduce its sites
  for (int i = 0; i < jets.size(); ++i) {
    auto z = jets.site(i);
    if (!g0.contains(z))
      throw std::invalid_argument("glue: site " + std::to_string(i + 1) + " outside the grid box");
    double u = norm2(z);
    std::vector<double> w((std::size_t)K);
    partition.weights(u, w.data());
    for (int k = 0; k < K; ++k) {
      if (w[(std::size_t)k] <= 0.0) continue;
      const auto& moving = pieces[(std::size_t)k].sites;
      if (std::find(moving.begin(), moving.end(), i) == moving.end())
        throw std::invalid_argument("glue: piece " + std::to_string(k + 1) +
                                    " is active at site " + std::to_string(i + 1) +
                                    " but does not list it");
      double err = std::abs(pieces[(std::size_t)k].values.interpolate(z) - jets.value(i));
      if (err > tol)
        throw std::invalid_argument("glue: piece " + std::to_string(k + 1) +
                                    " fails to interpolate site " + std::to_string(i + 1));
    }
  }

  GlueResult res;
  res.f = g0;
  GridFunction& F = res.f;
  std::vector<double> devs((std::size_t)F.total(), 0.0);
  parallel_for(F.total(), [&](std::int64_t f) {
    auto x = g0.node(f);
    double u = norm2(x);
    double w[16];
    partition.weights(u, w);
    double acc = 0.0, ws = 0.0;
    for (int k = 0; k < K; ++k) {
      acc += w[k] * pieces[(std::size_t)k].values[f];
      ws += w[k];
    }
    F[f] = acc;
    devs[(std::size_t)f] = std::abs(ws - 1.0);
  });
  for (double d : devs) res.partition_max_dev = std::max(res.partition_max_dev, d);
  if (res.partition_max_dev > 1e-12)
    throw std::invalid_argument("glue: partition does not sum to 1 on the grid");
  for (int i = 0; i < jets.size(); ++i) {
    auto z = jets.site(i);
    res.site_max_error = std::max(res.site_max_error, std::abs(F.interpolate(z) - jets.value(i)));
  }
  return res;
}

}  // namespace wex
