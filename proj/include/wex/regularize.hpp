#pragma once
#include <optional>
#include <vector>

#include "wex/grid.hpp"
#include "wex/jet.hpp"
#include "wex/modulus.hpp"

namespace wex {

// Quadratic inf/sup convolutions on the grid's own nodes:
//   (inf)  out(x) = min over nodes y of  g(y) + |x-y|^2 / (2t)
//   (sup)  out(x) = max over nodes y of  g(y) - |x-y|^2 / (2t)
// computed exactly by separable per-axis lower envelopes of parabolas.
GridFunction inf_conv_quadratic(const GridFunction& g, double t);
GridFunction sup_conv_quadratic(const GridFunction& g, double t);

struct InsertionDiagnostics {
  double max_lower_violation = 0.0;  // max(h - F)+ over interior nodes
  double max_upper_violation = 0.0;  // max(F - H)+ over interior nodes
  double sandwich_budget = 0.0;      // 5 * spacing * (1 + 6M)
  bool sandwich_ok = false;
  double site_max_error = 0.0;  // |F - f| at sites, when jets are supplied
  double site_budget = 0.0;     // 5 * spacing^2 * (1 + 6M)
  bool sites_ok = true;
  double grad_lip = 0.0;  // finite-difference Lipschitz estimate of grad F
  double grad_lip_budget = 0.0;  // 30 * M
  bool grad_lip_ok = false;
  bool t_large_warning = false;  // t at or above 1/(6M)
};

struct InsertionResult {
  GridFunction f;
  double t_used = 0.0;
  InsertionDiagnostics diag;
};

// Double-envelope insertion between certified envelopes sharing one grid
// layout: F = inf_conv(sup_conv(h, t), t) with default t = 1/(12M).  The
// parameter must stay below 1/(6M), the semiconcavity threshold of the upper
// envelope, for F <= H to survive; the default halves it for margin and a
// warning is raised otherwise.  Requires h <= H on the grid up to rounding.
InsertionResult insert_c11(const GridFunction& h, const GridFunction& H, double m_const,
                           std::optional<double> t = std::nullopt,
                           const JetDataset* jets = nullptr);

// Experimental general-kernel variant: both passes run with kernel
// a * phi(|x-y|) (phi the primitive of omega) by direct enumeration, so it is
// restricted to coarse grids.  With omega(t) = t and a = 1/t this reproduces
// insert_c11 exactly.
InsertionResult insert_general(const GridFunction& h, const GridFunction& H, const Modulus& omega,
                               double m_const, double a, const JetDataset* jets = nullptr);

// Central-difference gradient field (one-sided at the box faces), one
// component grid per axis.
std::vector<GridFunction> grad_fd(const GridFunction& g);

// Largest ratio |G(x)-G(y)| / |x-y|^alpha over axis-adjacent interior node
// pairs plus a deterministic sample of longer pairs; `shell` grid cells next
// to the boundary are excluded.
struct GradientRatioStats {
  double max_ratio = 0.0;
  double q95 = 0.0;
  std::int64_t pairs = 0;
};
GradientRatioStats lip_of_gradient(const std::vector<GridFunction>& field, int shell = 1);
GradientRatioStats holder_of_gradient(const std::vector<GridFunction>& field, double alpha,
                                      int shell = 1);

// C^2 radial partition of unity from an increasing list of radii: piece k is
// supported on radii (r_{k-1}, r_{k+1}) (piece 0 reaches 0, the last piece
// reaches infinity), built from quintic smoothstep transitions evaluated in
// u = |x|^2, so each weight is exactly 0 or 1 outside its transition bands.
class RadialPartition {
 public:
  explicit RadialPartition(std::vector<double> radii);
  int pieces() const { return static_cast<int>(radii_.size()); }
  // weights at squared radius u; out must hold pieces() entries and the values
  // sum to 1 up to rounding
  void weights(double u, double* out) const;
  double weight(int piece, double u) const;
  // open support interval of a piece, in |x| units
  double support_lo(int piece) const;
  double support_hi(int piece) const;
  const std::vector<double>& radii() const { return radii_; }

 private:
  std::vector<double> radii_;   // increasing, positive
  std::vector<double> sq_;      // squared radii
};

struct GluePiece {
  GridFunction values;
  std::vector<int> sites;  // indices into the shared jet dataset
};

struct GlueResult {
  GridFunction f;
  double partition_max_dev = 0.0;  // max |sum of weights - 1| over nodes
  double site_max_error = 0.0;     // |F - f| at sites
};

// F = sum over pieces of weight_k(|x|^2) F_k.  Every piece must share the
// first piece's grid layout; every site at which a piece has positive weight
// must be listed by that piece and interpolated by it within site_tol.
GlueResult glue(const std::vector<GluePiece>& pieces, const RadialPartition& partition,
                const JetDataset& jets, std::optional<double> site_tol = std::nullopt);

}  // namespace wex
