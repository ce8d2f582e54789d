#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wex/jet.hpp"
#include "wex/modulus.hpp"

namespace wex {

// Point cloud with the epsilon-neighborhood graph over it: vertices are the
// points, edges join pairs at Euclidean distance <= epsilon (optionally
// filtered by a segment predicate so edges cannot cross removed obstacles),
// weighted by Euclidean length.
struct DomainSample {
  int dim = 0;
  std::vector<double> points;  // flat row-major
  double epsilon = 0.0;
  std::vector<std::int64_t> offsets;  // CSR over vertices
  std::vector<int> nbrs;
  std::vector<double> wts;
  std::vector<int> component;
  int components = 0;
  double median_nn = 0.0;

  int size() const { return static_cast<int>(component.size()); }
  std::span<const double> point(int i) const {
    return {points.data() + (std::size_t)i * (std::size_t)dim, (std::size_t)dim};
  }
};

using SegmentPredicate =
    std::function<bool(std::span<const double>, std::span<const double>)>;

DomainSample build_graph(std::vector<double> points, int dim, double epsilon,
                         const SegmentPredicate& segment_ok = nullptr);

// Median over vertices of the nearest-neighbor distance (graph edges only).
double median_nn_distance(const DomainSample& s);

// Single-source shortest path lengths (inf where unreachable); `cap` stops
// the search beyond that path length.
std::vector<double> shortest_paths(const DomainSample& s, int source,
                                   double cap = -1.0);

struct PathInfo {
  bool found = false;
  double length = 0.0;
  int hops = 0;
  std::vector<int> nodes;
};
PathInfo path_between(const DomainSample& s, int from, int to);

// Quasiconvexity constant estimate: largest (shortest-path length)/(Euclidean
// distance) over pairs (source, vertex) from a deterministic spread of
// sources, restricted to pairs further apart than pair_floor_mult * epsilon
// (closer pairs measure lattice quantization, not the domain).  The slack
// bounds the discretization overshoot: paths in the graph overestimate inner
// distances by at most the lattice direction-quantization factor kappa_hat
// (computed from the offset directions reachable within epsilon on the sample
// lattice) plus an additive end-correction of order epsilon, giving
//   c_hat <= c_true + slack,   slack = (kappa_hat - 1) c_hat + 2 eps / d_worst.
struct QCReport {
  double c_hat = 1.0;
  int worst_from = -1, worst_to = -1;
  double worst_dist = 0.0;
  int worst_hops = 0;
  double ratio_q50 = 1.0, ratio_q95 = 1.0;
  std::int64_t pairs_scanned = 0;
  int sources = 0;
  bool connected = false;
  int components = 0;
  double kappa_hat = 1.0;
  double pair_floor = 0.0;
  double slack = 0.0;
  // informational: epsilon * hops / distance for the worst pair
  double worst_hop_slack = 0.0;
};
QCReport qc_constant(const DomainSample& s, std::int64_t pair_budget = 200000,
                     double pair_floor_mult = 10.0);

// Direction-quantization constant of the integer-lattice offsets reachable
// within radius rho steps; dimensions 1..3.
double lattice_quantization(int dim, double rho);

// Empirical moduli of a scalar sample over the cloud, with deviations
// measured against both the shortest-path metric and the Euclidean one, plus
// the least concave majorant of the former and its certificates.
struct InnerModulusReport {
  EmpiricalModulus inner, euclid;
  Modulus concave;  // least concave majorant of `inner`
  double stechkin_max_ratio = 0.0;  // max concave/inner at step abscissae
  bool stechkin_ok = false;         // <= 2 up to tolerance
  double subadd_excess = 0.0;       // max inner(a+b)-inner(a)-inner(b)
  bool subadd_ok = false;
  bool sandwich_lower_ok = false;  // concave/2 <= euclid at step abscissae
  bool sandwich_upper_ok = false;  // euclid <= c(1+slack) * concave
};
InnerModulusReport inner_modulus(const DomainSample& s, const std::vector<double>& values,
                                 const QCReport* qc = nullptr, std::int64_t pair_budget = 200000,
                                 double short_range_mult = 8.0);

// Certificate that jets sampled on the cloud satisfy the gradient/remainder
// inequalities with M bounded by 4 K c^3 when the gradient has modulus
// K * omega; also reports the telescoped remainder along the worst pair's
// shortest path against the aggregation bound 2 c omega_tilde(L) L.
struct QuasiconvexWGCertificate {
  WGReport wg;
  double bound = 0.0;  // 4 K c_hat^3 (1 + slack)
  bool pass = false;
  double chain_lhs = 0.0;    // |f(y)-f(x)-<g(x),y-x>| at the worst pair
  double chain_sum = 0.0;    // telescoped remainders + gradient drift
  double chain_bound = 0.0;  // 2 c_hat K omega_lcm(L) L (1 + slack)
  double chain_path_length = 0.0;
  bool chain_ok = false;
};
QuasiconvexWGCertificate wg_from_quasiconvex(const DomainSample& s, const JetDataset& jets,
                                             const Modulus& omega, double K, const QCReport& qc);

// Certificate Lip(f) <= c sup|g| (1 + slack) over a connected cloud; the
// Lipschitz constant comes from an exact scan of all site pairs.
struct LipschitzCertificate {
  double lip = 0.0;
  double sup_grad_norm = 0.0;
  double bound = 0.0;
  bool pass = false;
};
LipschitzCertificate lipschitz_from_bounded_gradient(const DomainSample& s, const JetDataset& jets,
                                                     const QCReport& qc);

}  // namespace wex
