#pragma once
#include <span>
#include <string>
#include <vector>

#include "wex/modulus.hpp"

namespace wex {

// A 1-jet sample: finitely many distinct sites in R^n carrying a value and a
// candidate gradient each.  Storage is flat row-major.
class JetDataset {
 public:
  JetDataset() = default;
  JetDataset(int dim, std::vector<double> sites, std::vector<double> values,
             std::vector<double> gradients);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(values_.size()); }
  std::span<const double> site(int i) const { return {sites_.data() + i * dim_, (std::size_t)dim_}; }
  double value(int i) const { return values_[(std::size_t)i]; }
  std::span<const double> gradient(int i) const {
    return {grads_.data() + i * dim_, (std::size_t)dim_};
  }
  const std::vector<double>& raw_sites() const { return sites_; }
  const std::vector<double>& raw_values() const { return values_; }
  const std::vector<double>& raw_gradients() const { return grads_; }

  JetDataset subset(const std::vector<int>& idx) const;
  // Flip the sign of all values and gradients.
  JetDataset negated() const;

 private:
  int dim_ = 0;
  std::vector<double> sites_, values_, grads_;
};

// CSV with header "x1,..,xn,f,g1,..,gn".  Errors name the offending row.
JetDataset load_jets(const std::string& path);
void save_jets(const JetDataset& jets, const std::string& path);

struct PairRef {
  int from = -1;
  int to = -1;
};

// Smallest M such that, for all ordered site pairs (x,y),
//   |g(y)-g(x)|           <= M omega(|y-x|)            and
//   |f(y)-f(x)-<g(x),y-x>| <= M omega(|y-x|) |y-x|.
// Computed by an exact scan of the m(m-1) ordered pairs.  When some pair has a
// vanishing omega(|y-x|) against a nonzero numerator, M is +inf and `finite`
// is cleared with the offending pair recorded.
struct WGReport {
  std::string modulus;
  double m_grad = 0.0;
  double m_taylor = 0.0;
  double m = 0.0;
  PairRef argmax_grad, argmax_taylor;
  bool finite = true;
  PairRef offending;
};
WGReport wg_constant(const JetDataset& jets, const Modulus& omega);

// Taylor-remainder profile: r(delta) = max over pairs with |y-x| <= delta of
// |f(y)-f(x)-<g(x),y-x>| / |y-x|, evaluated at each distinct pair distance,
// together with an empirical modulus of the gradient field.
struct WtildeProfile {
  std::vector<double> distances;  // sorted distinct pair distances
  std::vector<double> r;          // running max of the normalized remainder
  EmpiricalModulus gradient_modulus;
};
WtildeProfile wtilde_profile(const JetDataset& jets);

// Exact statistics over the sites inside the closed ball of radius `radius`
// about the origin: best Lipschitz constant of f restricted to those sites,
// sup |g| and sup |f|.
struct BallStats {
  double lip = 0.0;
  double sup_grad_norm = 0.0;
  double sup_abs_value = 0.0;
  int count = 0;
  bool empty = true;
};
BallStats lip_and_bound_stats(const JetDataset& jets, double radius);

// Concave modulus recovery: builds the step profile
//   alpha(delta) = max over pairs with |y-x| <= delta of
//                  max(|g(y)-g(x)|, |f(y)-f(x)-<g(x),y-x>| / |y-x|),
// takes its least concave majorant and re-runs the WG scan against it; the
// certificate is recertified_m <= 1 up to rounding.  `small_scale_jump` is a
// heuristic warning raised when alpha at the smallest sampled distance stays a
// sizable fraction of its overall level, i.e. the ratios show no sign of
// vanishing at sample scale.
struct ConcaveWGResult {
  Modulus omega;
  std::vector<double> alpha_distances;
  std::vector<double> alpha_values;
  double recertified_m = 0.0;
  bool small_scale_jump = false;
};
ConcaveWGResult concave_wg_modulus(const JetDataset& jets);

}  // namespace wex
