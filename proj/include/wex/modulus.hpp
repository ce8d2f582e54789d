#pragma once
#include <string>
#include <string_view>
#include <vector>

namespace wex {

// Moduli of continuity: nondecreasing functions on [0,inf) with omega(0) = 0.
// Three closed families are supported so that concavity, subadditivity and
// majorant construction can be decided exactly rather than on a sample grid:
//   power           omega(t) = C * t^alpha          (alpha > 0, C > 0)
//   linear-capped   omega(t) = min(a*t, b)          (a >= 0, b > 0)
//   piecewise linear: breakpoints plus a tail slope beyond the last one.

struct Breakpoint {
  double t = 0.0;
  double v = 0.0;
};

enum class ModulusKind { Power, LinearCapped, PiecewiseLinear };

class Modulus {
 public:
  Modulus() = default;  // the identity modulus t
  static Modulus power(double alpha, double scale = 1.0);
  static Modulus linear_capped(double slope, double cap);
  static Modulus linear(double slope);  // no cap
  // Breakpoints must start at (0,0), be strictly increasing in t and
  // nondecreasing in v; tail_slope >= 0 extends past the last breakpoint.
  static Modulus piecewise_linear(std::vector<Breakpoint> pts, double tail_slope);

  double operator()(double t) const;

  ModulusKind kind() const { return kind_; }
  bool is_concave() const;
  bool is_subadditive() const;
  // Upper bound used in Lipschitz-style estimates: sup omega, +inf when unbounded.
  double upper_bound() const;

  // Least concave majorant. Exact for piecewise-linear inputs (upper hull of
  // the breakpoints merged with the tail ray). Power inputs require alpha <= 1
  // (they are then already concave); otherwise no majorant with a finite
  // initial slope exists and std::invalid_argument is thrown.
  Modulus least_concave_majorant() const;

  // Mini-language: "pow:<alpha>[:<scale>]", "lin:<slope>[:cap:<b>]",
  // "pwl:<csv-path>" where the file holds "t,v" rows and a final
  // "tail,<slope>" row. Throws std::invalid_argument on malformed input.
  static Modulus parse(std::string_view spec);
  std::string describe() const;

  // accessors (meaningful for the matching kind only)
  double alpha() const { return alpha_; }
  double scale() const { return scale_; }
  double slope() const { return slope_; }
  double cap() const { return cap_; }
  const std::vector<Breakpoint>& breakpoints() const { return pts_; }
  double tail_slope() const { return tail_; }

 private:
  ModulusKind kind_ = ModulusKind::Power;
  double alpha_ = 1.0, scale_ = 1.0;    // power
  double slope_ = 0.0, cap_ = 0.0;      // linear-capped
  std::vector<Breakpoint> pts_;         // piecewise linear
  double tail_ = 0.0;
};

// Running primitive phi(t) = integral_0^t omega. Convex whenever omega is
// nondecreasing; piecewise quadratic for piecewise-linear bases and in closed
// form for the power family.
class Primitive {
 public:
  explicit Primitive(Modulus base);
  double operator()(double t) const;
  double derivative(double t) const;  // equals the base modulus
  const Modulus& base() const { return base_; }

 private:
  Modulus base_;
  std::vector<double> cum_;  // integral up to each breakpoint (piecewise kinds)
  std::vector<Breakpoint> pts_;
  double tail_ = 0.0;
};

// Least nondecreasing step function dominating a finite set of
// (distance, deviation) samples; evaluation is a running maximum.
class EmpiricalModulus {
 public:
  struct Sample {
    double dist = 0.0;
    double dev = 0.0;
  };

  EmpiricalModulus() = default;  // identically zero
  static EmpiricalModulus from_samples(std::vector<Sample> samples);

  double operator()(double delta) const;
  bool empty() const { return steps_.empty(); }
  // consolidated steps: strictly increasing distances, nondecreasing running max
  const std::vector<Sample>& steps() const { return steps_; }
  double max_distance() const { return steps_.empty() ? 0.0 : steps_.back().dist; }
  double max_deviation() const { return steps_.empty() ? 0.0 : steps_.back().dev; }

 private:
  std::vector<Sample> steps_;
};

// Log-spaced verification grid on [lo, hi] (n points, endpoints included).
std::vector<double> log_grid(double lo, double hi, int n = 512);

}  // namespace wex
