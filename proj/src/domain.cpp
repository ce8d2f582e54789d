#include "wex/domain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "wex/linalg.hpp"

namespace wex {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integer cell coordinates packed 16 bits per axis; exact for up to 4 axes
// and +-32767 cells, which is checked by the caller.
std::uint64_t pack_cell(const int* c, int dim) {
  std::uint64_t key = 0;
  for (int k = 0; k < dim; ++k) {
    key = (key << 16) | (std::uint64_t)(unsigned)(c[k] + 32768);
  }
  return key;
}

struct CellIndex {
  int dim;
  double h;
  std::vector<double> lo;
  std::unordered_map<std::uint64_t, std::vector<int>> cells;

  CellIndex(const std::vector<double>& pts, int dim_, double h_) : dim(dim_), h(h_) {
    const int m = (int)(pts.size() / (std::size_t)dim);
    lo.assign(dim, kInf);
    std::vector<double> hi(dim, -kInf);
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < dim; ++k) {
        lo[k] = std::min(lo[k], pts[(std::size_t)i * dim + k]);
        hi[k] = std::max(hi[k], pts[(std::size_t)i * dim + k]);
      }
    }
    for (int k = 0; k < dim; ++k) {
      if ((hi[k] - lo[k]) / h > 32000.0) {
        throw std::invalid_argument("cell radius too small relative to the cloud extent");
      }
    }
    cells.reserve((std::size_t)m);
    int c[4];
    for (int i = 0; i < m; ++i) {
      cell_of(pts.data() + (std::size_t)i * dim, c);
      cells[pack_cell(c, dim)].push_back(i);
    }
  }

  void cell_of(const double* x, int* c) const {
    for (int k = 0; k < dim; ++k) c[k] = (int)std::floor((x[k] - lo[k]) / h);
  }

  // Visit all points in the 3^dim block of cells around x.
  template <class Fn>
  void for_candidates(const double* x, Fn&& fn) const {
    int c[4], d[4];
    cell_of(x, c);
    const int total = 1;
    int combos = 1;
    for (int k = 0; k < dim; ++k) combos *= 3;
    (void)total;
    for (int s = 0; s < combos; ++s) {
      int t = s;
      for (int k = 0; k < dim; ++k) {
        d[k] = c[k] + (t % 3) - 1;
        t /= 3;
      }
      auto it = cells.find(pack_cell(d, dim));
      if (it == cells.end()) continue;
      for (int j : it->second) fn(j);
    }
  }
};

struct DSU {
  std::vector<int> parent;
  explicit DSU(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[a] = b;
  }
};

// Dijkstra scratch reusable across sources: distances are reset lazily via
// the touched list so repeated runs stay O(visited log visited).
struct Dijkstra {
  const DomainSample& s;
  std::vector<double> dist;
  std::vector<int> touched;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;

  explicit Dijkstra(const DomainSample& s_) : s(s_), dist((std::size_t)s_.size(), kInf) {}

  // Runs from `source`, stopping past `cap` when cap >= 0; calls
  // visit(node, distance) for every settled node including the source.
  template <class Fn>
  void run(int source, double cap, Fn&& visit) {
    for (int v : touched) dist[(std::size_t)v] = kInf;
    touched.clear();
    dist[(std::size_t)source] = 0.0;
    touched.push_back(source);
    heap.push({0.0, source});
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[(std::size_t)v]) continue;
      visit(v, d);
      for (std::int64_t e = s.offsets[(std::size_t)v]; e < s.offsets[(std::size_t)v + 1]; ++e) {
        const int u = s.nbrs[(std::size_t)e];
        const double nd = d + s.wts[(std::size_t)e];
        if (cap >= 0.0 && nd > cap) continue;
        if (nd < dist[(std::size_t)u]) {
          if (dist[(std::size_t)u] == kInf) touched.push_back(u);
          dist[(std::size_t)u] = nd;
          heap.push({nd, u});
        }
      }
    }
  }
};

double point_dist(const DomainSample& s, int i, int j) { return dist(s.point(i), s.point(j)); }

// Deterministic source spread: coordinate extremes, norm extremes, then
// farthest-point sampling in the Euclidean metric.
std::vector<int> select_sources(const DomainSample& s, int want) {
  const int m = s.size();
  want = std::min(want, m);
  std::vector<char> chosen((std::size_t)m, 0);
  std::vector<int> out;
  auto take = [&](int i) {
    if (i >= 0 && !chosen[(std::size_t)i]) {
      chosen[(std::size_t)i] = 1;
      out.push_back(i);
    }
  };
  for (int k = 0; k < s.dim; ++k) {
    int lo = 0, hi = 0;
    for (int i = 1; i < m; ++i) {
      if (s.point(i)[k] < s.point(lo)[k]) lo = i;
      if (s.point(i)[k] > s.point(hi)[k]) hi = i;
    }
    take(lo);
    take(hi);
  }
  int big = 0, small = 0;
  for (int i = 1; i < m; ++i) {
    if (norm2(s.point(i)) > norm2(s.point(big))) big = i;
    if (norm2(s.point(i)) < norm2(s.point(small))) small = i;
  }
  take(big);
  take(small);
  std::vector<double> mind((std::size_t)m, kInf);
  for (int i = 0; i < m; ++i) {
    for (int c : out) mind[(std::size_t)i] = std::min(mind[(std::size_t)i], point_dist(s, i, c));
  }
  while ((int)out.size() < want) {
    int best = -1;
    for (int i = 0; i < m; ++i) {
      if (!chosen[(std::size_t)i] && (best < 0 || mind[(std::size_t)i] > mind[(std::size_t)best])) {
        best = i;
      }
    }
    if (best < 0 || mind[(std::size_t)best] <= 0.0) break;
    take(best);
    for (int i = 0; i < m; ++i) {
      mind[(std::size_t)i] = std::min(mind[(std::size_t)i], point_dist(s, i, best));
    }
  }
  return out;
}

// Per-bin maximum of (distance, deviation) samples at resolution `w`.  The
// recorded abscissa is the largest distance seen in the bin, so the resulting
// step function never exceeds the running max of the raw samples and lags it
// by at most w in the abscissa.
struct BinAcc {
  double w;
  std::unordered_map<std::int64_t, EmpiricalModulus::Sample> bins;

  explicit BinAcc(double w_) : w(w_) {}
  void add(double d, double dev) {
    auto& e = bins[(std::int64_t)std::floor(d / w)];
    e.dist = std::max(e.dist, d);
    e.dev = std::max(e.dev, dev);
  }
  std::vector<EmpiricalModulus::Sample> dump() const {
    std::vector<EmpiricalModulus::Sample> v;
    v.reserve(bins.size());
    for (const auto& [key, e] : bins) {
      (void)key;
      v.push_back(e);
    }
    return v;
  }
};

}  // namespace

DomainSample build_graph(std::vector<double> points, int dim, double epsilon,
                         const SegmentPredicate& segment_ok) {
  if (dim < 1 || dim > 4) throw std::invalid_argument("build_graph: dim must be 1..4");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("build_graph: epsilon must be positive");
  }
  if (points.size() % (std::size_t)dim != 0) {
    throw std::invalid_argument("build_graph: point array size not a multiple of dim");
  }
  const int m = (int)(points.size() / (std::size_t)dim);
  if (m < 2) throw std::invalid_argument("build_graph: need at least 2 points");
  for (double x : points) {
    if (!std::isfinite(x)) throw std::invalid_argument("build_graph: non-finite coordinate");
  }

  DomainSample s;
  s.dim = dim;
  s.points = std::move(points);
  s.epsilon = epsilon;

  CellIndex cells(s.points, dim, epsilon);
  std::vector<std::tuple<int, int, double>> edges;
  DSU dsu(m);
  for (int i = 0; i < m; ++i) {
    const double* xi = s.points.data() + (std::size_t)i * dim;
    cells.for_candidates(xi, [&](int j) {
      if (j <= i) return;
      const double d = dist({xi, (std::size_t)dim},
                            {s.points.data() + (std::size_t)j * dim, (std::size_t)dim});
      if (d > epsilon) return;
      if (segment_ok &&
          !segment_ok({xi, (std::size_t)dim},
                      {s.points.data() + (std::size_t)j * dim, (std::size_t)dim})) {
        return;
      }
      edges.emplace_back(i, j, d);
      dsu.unite(i, j);
    });
  }

  std::vector<int> degree((std::size_t)m, 0);
  for (const auto& [i, j, d] : edges) {
    (void)d;
    ++degree[(std::size_t)i];
    ++degree[(std::size_t)j];
  }
  s.offsets.assign((std::size_t)m + 1, 0);
  for (int i = 0; i < m; ++i) s.offsets[(std::size_t)i + 1] = s.offsets[(std::size_t)i] + degree[(std::size_t)i];
  s.nbrs.resize((std::size_t)s.offsets[(std::size_t)m]);
  s.wts.resize(s.nbrs.size());
  std::vector<std::int64_t> cursor(s.offsets.begin(), s.offsets.end() - 1);
  for (const auto& [i, j, d] : edges) {
    s.nbrs[(std::size_t)cursor[(std::size_t)i]] = j;
    s.wts[(std::size_t)cursor[(std::size_t)i]++] = d;
    s.nbrs[(std::size_t)cursor[(std::size_t)j]] = i;
    s.wts[(std::size_t)cursor[(std::size_t)j]++] = d;
  }

  s.component.assign((std::size_t)m, -1);
  std::unordered_map<int, int> roots;
  for (int i = 0; i < m; ++i) {
    const int r = dsu.find(i);
    auto [it, fresh] = roots.try_emplace(r, (int)roots.size());
    s.component[(std::size_t)i] = it->second;
    (void)fresh;
  }
  s.components = (int)roots.size();
  s.median_nn = median_nn_distance(s);
  return s;
}

double median_nn_distance(const DomainSample& s) {
  std::vector<double> nn;
  nn.reserve((std::size_t)s.size());
  for (int i = 0; i < s.size(); ++i) {
    double best = kInf;
    for (std::int64_t e = s.offsets[(std::size_t)i]; e < s.offsets[(std::size_t)i + 1]; ++e) {
      best = std::min(best, s.wts[(std::size_t)e]);
    }
    if (best < kInf) nn.push_back(best);
  }
  if (nn.empty()) return 0.0;
  const std::size_t mid = nn.size() / 2;
  std::nth_element(nn.begin(), nn.begin() + mid, nn.end());
  return nn[mid];
}

std::vector<double> shortest_paths(const DomainSample& s, int source, double cap) {
  if (source < 0 || source >= s.size()) throw std::invalid_argument("shortest_paths: bad source");
  Dijkstra dij(s);
  std::vector<double> out((std::size_t)s.size(), kInf);
  dij.run(source, cap, [&](int v, double d) { out[(std::size_t)v] = d; });
  return out;
}

PathInfo path_between(const DomainSample& s, int from, int to) {
  if (from < 0 || from >= s.size() || to < 0 || to >= s.size()) {
    throw std::invalid_argument("path_between: vertex out of range");
  }
  std::vector<double> dist((std::size_t)s.size(), kInf);
  std::vector<int> pred((std::size_t)s.size(), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[(std::size_t)from] = 0.0;
  heap.push({0.0, from});
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[(std::size_t)v]) continue;
    if (v == to) break;
    for (std::int64_t e = s.offsets[(std::size_t)v]; e < s.offsets[(std::size_t)v + 1]; ++e) {
      const int u = s.nbrs[(std::size_t)e];
      const double nd = d + s.wts[(std::size_t)e];
      if (nd < dist[(std::size_t)u]) {
        dist[(std::size_t)u] = nd;
        pred[(std::size_t)u] = v;
        heap.push({nd, u});
      }
    }
  }
  PathInfo info;
  if (dist[(std::size_t)to] == kInf) return info;
  info.found = true;
  info.length = dist[(std::size_t)to];
  for (int v = to; v != -1; v = pred[(std::size_t)v]) info.nodes.push_back(v);
  std::reverse(info.nodes.begin(), info.nodes.end());
  info.hops = (int)info.nodes.size() - 1;
  return info;
}

double lattice_quantization(int dim, double rho) {
  if (dim < 1 || dim > 3) {
    throw std::invalid_argument("lattice_quantization: implemented for dimensions 1-3");
  }
  if (!(rho >= 1.0)) {
    throw std::invalid_argument("lattice_quantization: radius below one lattice step");
  }
  rho = std::min(rho, 8.0);  // clamping down only widens the reported constant
  if (dim == 1) return 1.0;
  const int r = (int)std::floor(rho);
  const double rr = rho * rho * (1.0 + 1e-12);
  if (dim == 2) {
    std::vector<double> angles;
    for (int a = -r; a <= r; ++a) {
      for (int b = -r; b <= r; ++b) {
        if (a == 0 && b == 0) continue;
        if (a * a + b * b > rr) continue;
        angles.push_back(std::atan2((double)b, (double)a));
      }
    }
    std::sort(angles.begin(), angles.end());
    angles.erase(std::unique(angles.begin(), angles.end(),
                             [](double p, double q) { return std::abs(p - q) < 1e-12; }),
                 angles.end());
    double gap = 2.0 * 3.14159265358979323846 + angles.front() - angles.back();
    for (std::size_t i = 1; i < angles.size(); ++i) gap = std::max(gap, angles[i] - angles[i - 1]);
    return 1.0 / std::cos(gap / 2.0);
  }
  // dim == 3: distance from the origin to the hull of the unit directions.
  std::vector<std::array<double, 3>> dirs;
  for (int a = -r; a <= r; ++a) {
    for (int b = -r; b <= r; ++b) {
      for (int c = -r; c <= r; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        const double n2 = (double)(a * a + b * b + c * c);
        if (n2 > rr) continue;
        const double n = std::sqrt(n2);
        dirs.push_back({a / n, b / n, c / n});
      }
    }
  }
  std::sort(dirs.begin(), dirs.end());
  dirs.erase(std::unique(dirs.begin(), dirs.end(),
                         [](const auto& p, const auto& q) {
                           return std::abs(p[0] - q[0]) < 1e-12 && std::abs(p[1] - q[1]) < 1e-12 &&
                                  std::abs(p[2] - q[2]) < 1e-12;
                         }),
             dirs.end());
  const int n = (int)dirs.size();
  double min_facet = kInf;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        const auto &A = dirs[(std::size_t)i], &B = dirs[(std::size_t)j], &C = dirs[(std::size_t)k];
        double u[3] = {B[0] - A[0], B[1] - A[1], B[2] - A[2]};
        double v[3] = {C[0] - A[0], C[1] - A[1], C[2] - A[2]};
        double nor[3] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                         u[0] * v[1] - u[1] * v[0]};
        const double nlen = std::sqrt(nor[0] * nor[0] + nor[1] * nor[1] + nor[2] * nor[2]);
        if (nlen < 1e-12) continue;
        double h = (nor[0] * A[0] + nor[1] * A[1] + nor[2] * A[2]) / nlen;
        double sgn = h < 0.0 ? -1.0 : 1.0;
        h *= sgn;
        bool facet = true;
        for (int l = 0; l < n && facet; ++l) {
          const auto& D = dirs[(std::size_t)l];
          const double side = sgn * (nor[0] * D[0] + nor[1] * D[1] + nor[2] * D[2]) / nlen;
          if (side > h + 1e-9) facet = false;
        }
        if (facet && h > 1e-9) min_facet = std::min(min_facet, h);
      }
    }
  }
  if (!std::isfinite(min_facet)) {
    throw std::invalid_argument("lattice_quantization: degenerate direction set");
  }
  return 1.0 / min_facet;
}

QCReport qc_constant(const DomainSample& s, std::int64_t pair_budget, double pair_floor_mult) {
  const int m = s.size();
  if (m < 2) throw std::invalid_argument("qc_constant: need at least 2 points");
  if (pair_budget < m) pair_budget = m;

  QCReport rep;
  rep.connected = (s.components == 1);
  rep.components = s.components;
  rep.pair_floor = pair_floor_mult * s.epsilon;
  rep.kappa_hat =
      s.median_nn > 0.0 ? lattice_quantization(s.dim, s.epsilon / s.median_nn) : kInf;

  const int want = (int)std::clamp<std::int64_t>(pair_budget / m, 8, 64);
  const std::vector<int> sources = select_sources(s, want);
  rep.sources = (int)sources.size();

  Dijkstra dij(s);
  std::vector<double> ratios;
  ratios.reserve((std::size_t)rep.sources * (std::size_t)m / 4);
  // Fallback witness: the best measured pair, adopted only if nothing ever
  // beats the initial constant (a straight chain measures ratio one
  // everywhere); at equal ratios the wider pair gives the tighter
  // end-correction term in the slack.
  int fb_from = -1, fb_to = -1;
  double fb_ratio = 0.0, fb_dist = 0.0;
  auto note_pair = [&](double ratio, int a, int b, double de) {
    if (ratio > fb_ratio * (1.0 + 1e-12) ||
        (ratio > fb_ratio * (1.0 - 1e-12) && de > fb_dist)) {
      fb_ratio = ratio;
      fb_from = a;
      fb_to = b;
      fb_dist = de;
    }
  };
  std::vector<double> dist_buf((std::size_t)m, kInf);
  for (int src : sources) {
    std::fill(dist_buf.begin(), dist_buf.end(), kInf);
    dij.run(src, -1.0, [&](int v, double d) { dist_buf[(std::size_t)v] = d; });
    for (int v = 0; v < m; ++v) {
      if (v == src) continue;
      const double de = point_dist(s, src, v);
      if (de < rep.pair_floor) continue;
      ++rep.pairs_scanned;
      const double dp = dist_buf[(std::size_t)v];
      if (dp == kInf) {
        if (std::isfinite(rep.c_hat) || rep.worst_from < 0) {
          rep.c_hat = kInf;
          rep.worst_from = src;
          rep.worst_to = v;
          rep.worst_dist = de;
        }
        continue;
      }
      const double ratio = dp / de;
      ratios.push_back(ratio);
      note_pair(ratio, src, v, de);
      if (std::isfinite(rep.c_hat) && ratio > rep.c_hat) {
        rep.c_hat = ratio;
        rep.worst_from = src;
        rep.worst_to = v;
        rep.worst_dist = de;
      }
    }
  }

  // Short-range exact pass: every node becomes the source of a truncated
  // search, so detours across nearby pairs (below the pair floor, where the
  // sampled long pass never looks) are always measured.  A pair whose path
  // exceeds the cap contributes the certified lower bound cap / de to c_hat
  // but stays out of the quantile stream.
  const double short_cap = 2.0 * s.epsilon;
  const CellIndex near_idx(s.points, s.dim, rep.pair_floor);
  for (int u = 0; u < m; ++u) {
    dij.run(u, short_cap, [](int, double) {});
    near_idx.for_candidates(s.points.data() + (std::size_t)u * s.dim, [&](int v) {
      if (v <= u) return;
      const double de = point_dist(s, u, v);
      if (de <= 0.0 || de >= rep.pair_floor) return;
      ++rep.pairs_scanned;
      const double dp = dij.dist[(std::size_t)v];
      // Near-ties keep the long-pass witness: its larger separation makes the
      // end-correction term of the slack meaningful.
      const double ratio = dp < kInf ? dp / de : short_cap / de;
      if (dp < kInf) {
        ratios.push_back(ratio);
        note_pair(ratio, u, v, de);
      }
      if (std::isfinite(rep.c_hat) && ratio > rep.c_hat * (1.0 + 1e-12)) {
        rep.c_hat = ratio;
        rep.worst_from = u;
        rep.worst_to = v;
        rep.worst_dist = de;
      }
    });
  }

  if (!ratios.empty()) {
    auto quantile = [&](double q) {
      std::size_t idx = (std::size_t)(q * (double)(ratios.size() - 1));
      std::nth_element(ratios.begin(), ratios.begin() + (std::ptrdiff_t)idx, ratios.end());
      return ratios[idx];
    };
    rep.ratio_q50 = quantile(0.5);
    rep.ratio_q95 = quantile(0.95);
  }
  if (rep.worst_from < 0 && fb_from >= 0) {
    rep.worst_from = fb_from;
    rep.worst_to = fb_to;
    rep.worst_dist = fb_dist;
    if (fb_ratio > rep.c_hat) rep.c_hat = fb_ratio;
  }
  if (rep.worst_from >= 0) {
    const PathInfo p = path_between(s, rep.worst_from, rep.worst_to);
    rep.worst_hops = p.found ? p.hops : -1;
    if (p.found && rep.worst_dist > 0.0) {
      rep.worst_hop_slack = s.epsilon * (double)p.hops / rep.worst_dist;
    }
  }
  if (rep.pairs_scanned == 0 || rep.worst_dist <= 0.0 || !std::isfinite(rep.c_hat)) {
    rep.slack = kInf;
  } else {
    rep.slack = (rep.kappa_hat - 1.0) * rep.c_hat + 2.0 * s.epsilon / rep.worst_dist;
  }
  return rep;
}

InnerModulusReport inner_modulus(const DomainSample& s, const std::vector<double>& values,
                                 const QCReport* qc, std::int64_t pair_budget,
                                 double short_range_mult) {
  const int m = s.size();
  if ((int)values.size() != m) throw std::invalid_argument("inner_modulus: values/points mismatch");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("inner_modulus: non-finite value");
  }
  if (s.components != 1) throw std::invalid_argument("inner_modulus: graph is disconnected");

  QCReport local;
  if (qc == nullptr) {
    local = qc_constant(s, pair_budget);
    qc = &local;
  }

  const double cap = short_range_mult * s.epsilon;
  BinAcc inner_acc(s.epsilon / 256.0), euclid_acc(s.epsilon / 256.0);

  // Exact short range in the path metric: truncated runs from every vertex.
  Dijkstra dij(s);
  for (int i = 0; i < m; ++i) {
    dij.run(i, cap, [&](int v, double d) {
      if (v > i) inner_acc.add(d, std::abs(values[(std::size_t)v] - values[(std::size_t)i]));
    });
  }
  // Exact short range in the Euclidean metric via a coarse cell index.
  CellIndex cells(s.points, s.dim, cap);
  for (int i = 0; i < m; ++i) {
    cells.for_candidates(s.points.data() + (std::size_t)i * s.dim, [&](int j) {
      if (j <= i) return;
      const double d = point_dist(s, i, j);
      if (d <= cap) euclid_acc.add(d, std::abs(values[(std::size_t)j] - values[(std::size_t)i]));
    });
  }
  // Long range from a source spread, recorded in both metrics so every
  // inner-metric sample also appears as a Euclidean one.
  const int want = (int)std::clamp<std::int64_t>(pair_budget / m, 4, 64);
  std::vector<double> dist_buf((std::size_t)m, kInf);
  for (int src : select_sources(s, want)) {
    std::fill(dist_buf.begin(), dist_buf.end(), kInf);
    dij.run(src, -1.0, [&](int v, double d) { dist_buf[(std::size_t)v] = d; });
    for (int v = 0; v < m; ++v) {
      if (v == src) continue;
      const double dev = std::abs(values[(std::size_t)v] - values[(std::size_t)src]);
      euclid_acc.add(point_dist(s, src, v), dev);
      if (dist_buf[(std::size_t)v] < kInf) inner_acc.add(dist_buf[(std::size_t)v], dev);
    }
  }

  InnerModulusReport rep;
  rep.inner = EmpiricalModulus::from_samples(inner_acc.dump());
  rep.euclid = EmpiricalModulus::from_samples(euclid_acc.dump());

  std::vector<Breakpoint> pts{{0.0, 0.0}};
  for (const auto& st : rep.inner.steps()) pts.push_back({st.dist, st.dev});
  rep.concave = Modulus::piecewise_linear(std::move(pts), 0.0).least_concave_majorant();

  const double scale = 1.0 + rep.inner.max_deviation();
  const double tol = 1e-9 * scale;
  rep.stechkin_ok = true;
  rep.sandwich_lower_ok = true;
  rep.sandwich_upper_ok = true;
  const double upper_factor =
      std::isfinite(qc->slack) ? qc->c_hat * (1.0 + qc->slack) : kInf;
  for (const auto& st : rep.inner.steps()) {
    const double w = rep.concave(st.dist);
    if (st.dev > 0.0) rep.stechkin_max_ratio = std::max(rep.stechkin_max_ratio, w / st.dev);
    if (w > 2.0 * st.dev + tol) rep.stechkin_ok = false;
    if (0.5 * w > st.dev + tol) rep.sandwich_lower_ok = false;
    if (std::isfinite(upper_factor) && st.dev > upper_factor * w + tol) {
      rep.sandwich_upper_ok = false;
    }
  }

  // Sub-additivity on sampled sums of step abscissae.  The tolerance absorbs
  // abscissa quantization: between consecutive sampled distances the running
  // max is flat, which can understate omega(a) + omega(b) by about the
  // deviation accrued over one graph radius from each endpoint.
  const auto& steps = rep.inner.steps();
  std::vector<double> abscissae;
  const std::size_t stride = std::max<std::size_t>(1, steps.size() / 64);
  for (std::size_t i = 0; i < steps.size(); i += stride) abscissae.push_back(steps[i].dist);
  rep.subadd_ok = true;
  const double sub_tol = rep.inner(2.0 * s.epsilon) + tol;
  for (double a : abscissae) {
    for (double b : abscissae) {
      if (b < a) continue;
      const double excess = rep.inner(a + b) - rep.inner(a) - rep.inner(b);
      rep.subadd_excess = std::max(rep.subadd_excess, excess);
      if (excess > sub_tol) rep.subadd_ok = false;
    }
  }
  return rep;
}

namespace {

void require_matching_sites(const DomainSample& s, const JetDataset& jets, const char* who) {
  if (jets.dim() != s.dim || jets.size() != s.size()) {
    throw std::invalid_argument(std::string(who) + ": jets do not match the cloud");
  }
  for (int i = 0; i < s.size(); ++i) {
    auto p = s.point(i);
    auto q = jets.site(i);
    for (int k = 0; k < s.dim; ++k) {
      if (p[k] != q[k]) {
        throw std::invalid_argument(std::string(who) + ": jet sites must coincide with the cloud");
      }
    }
  }
}

}  // namespace

QuasiconvexWGCertificate wg_from_quasiconvex(const DomainSample& s, const JetDataset& jets,
                                             const Modulus& omega, double K, const QCReport& qc) {
  if (!(K > 0.0) || !std::isfinite(K)) {
    throw std::invalid_argument("wg_from_quasiconvex: K must be positive");
  }
  require_matching_sites(s, jets, "wg_from_quasiconvex");

  QuasiconvexWGCertificate cert;
  cert.wg = wg_constant(jets, omega);
  cert.bound = 4.0 * K * qc.c_hat * qc.c_hat * qc.c_hat * (1.0 + qc.slack);
  // an infinite bound is trivially satisfied; an indeterminate one never is
  cert.pass = cert.wg.finite && cert.wg.m <= cert.bound + 1e-9 * (1.0 + cert.bound);

  const PairRef pr = cert.wg.argmax_taylor;
  if (pr.from >= 0 && pr.to >= 0) {
    const PathInfo path = path_between(s, pr.from, pr.to);
    if (path.found && path.hops >= 1) {
      cert.chain_path_length = path.length;
      auto x0 = jets.site(pr.from);
      auto g0 = jets.gradient(pr.from);
      {
        auto y = jets.site(pr.to);
        double lin = 0.0;
        for (int k = 0; k < s.dim; ++k) lin += g0[k] * (y[k] - x0[k]);
        cert.chain_lhs = std::abs(jets.value(pr.to) - jets.value(pr.from) - lin);
      }
      for (std::size_t seg = 0; seg + 1 < path.nodes.size(); ++seg) {
        const int p = path.nodes[seg], q = path.nodes[seg + 1];
        auto xp = jets.site(p);
        auto xq = jets.site(q);
        auto gp = jets.gradient(p);
        double lin = 0.0, drift2 = 0.0;
        for (int k = 0; k < s.dim; ++k) {
          lin += gp[k] * (xq[k] - xp[k]);
          const double dg = gp[k] - g0[k];
          drift2 += dg * dg;
        }
        const double step = dist(xp, xq);
        cert.chain_sum +=
            std::abs(jets.value(q) - jets.value(p) - lin) + std::sqrt(drift2) * step;
      }
      const Modulus conc = omega.is_concave() ? omega : omega.least_concave_majorant();
      cert.chain_bound = 2.0 * qc.c_hat * K * conc(path.length) * path.length *
                         (1.0 + (std::isfinite(qc.slack) ? qc.slack : 0.0));
      const double tol = 1e-9 * (1.0 + std::abs(cert.chain_bound));
      cert.chain_ok =
          cert.chain_lhs <= cert.chain_sum + tol && cert.chain_sum <= cert.chain_bound + tol;
    }
  }
  return cert;
}

LipschitzCertificate lipschitz_from_bounded_gradient(const DomainSample& s, const JetDataset& jets,
                                                     const QCReport& qc) {
  require_matching_sites(s, jets, "lipschitz_from_bounded_gradient");
  if (s.components != 1) {
    throw std::invalid_argument("lipschitz_from_bounded_gradient: graph is disconnected");
  }
  LipschitzCertificate cert;
  const int m = s.size();
  for (int i = 0; i < m; ++i) {
    cert.sup_grad_norm = std::max(cert.sup_grad_norm, norm(jets.gradient(i)));
    for (int j = i + 1; j < m; ++j) {
      const double d = point_dist(s, i, j);
      if (d <= 0.0) continue;
      cert.lip = std::max(cert.lip, std::abs(jets.value(j) - jets.value(i)) / d);
    }
  }
  cert.bound = qc.c_hat * cert.sup_grad_norm * (1.0 + qc.slack);
  // an infinite bound is trivially satisfied; an indeterminate one never is
  cert.pass = cert.lip <= cert.bound + 1e-9 * (1.0 + cert.bound);
  return cert;
}

}  // namespace wex
