#include "wex/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

Modulus Modulus::power(double alpha, double scale) {
  require(finite(alpha) && alpha > 0.0, "modulus: power exponent must be positive");
  require(finite(scale) && scale > 0.0, "modulus: power scale must be positive");
  Modulus m;
  m.kind_ = ModulusKind::Power;
  m.alpha_ = alpha;
  m.scale_ = scale;
  return m;
}

Modulus Modulus::linear_capped(double slope, double cap) {
  require(finite(slope) && slope >= 0.0, "modulus: slope must be nonnegative");
  require(cap > 0.0, "modulus: cap must be positive");
  Modulus m;
  m.kind_ = ModulusKind::LinearCapped;
  m.slope_ = slope;
  m.cap_ = cap;
  return m;
}

Modulus Modulus::linear(double slope) { return linear_capped(slope, kInf); }

Modulus Modulus::piecewise_linear(std::vector<Breakpoint> pts, double tail_slope) {
  require(!pts.empty(), "modulus: need at least one breakpoint");
  require(pts.front().t == 0.0 && pts.front().v == 0.0,
          "modulus: first breakpoint must be (0,0)");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    require(finite(pts[i].t) && finite(pts[i].v), "modulus: non-finite breakpoint");
    require(pts[i].v >= 0.0, "modulus: breakpoint values must be nonnegative");
    if (i > 0) {
      require(pts[i].t > pts[i - 1].t, "modulus: breakpoints must strictly increase in t");
      require(pts[i].v >= pts[i - 1].v, "modulus: breakpoint values must be nondecreasing");
    }
  }
  require(finite(tail_slope) && tail_slope >= 0.0,
          "modulus: tail slope must be finite and nonnegative");
  Modulus m;
  m.kind_ = ModulusKind::PiecewiseLinear;
  m.pts_ = std::move(pts);
  m.tail_ = tail_slope;
  return m;
}

double Modulus::operator()(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("modulus: negative or NaN argument");
  switch (kind_) {
    case ModulusKind::Power:
      return t == 0.0 ? 0.0 : scale_ * std::pow(t, alpha_);
    case ModulusKind::LinearCapped:
      return std::min(slope_ * t, cap_);
    case ModulusKind::PiecewiseLinear: {
      if (t >= pts_.back().t) return pts_.back().v + tail_ * (t - pts_.back().t);
      // last breakpoint with t_i <= t
      auto it = std::upper_bound(pts_.begin(), pts_.end(), t,
                                 [](double x, const Breakpoint& b) { return x < b.t; });
      const Breakpoint& hi = *it;
      const Breakpoint& lo = *(it - 1);
      double w = (t - lo.t) / (hi.t - lo.t);
      return lo.v + w * (hi.v - lo.v);
    }
  }
  return 0.0;
}

bool Modulus::is_concave() const {
  switch (kind_) {
    case ModulusKind::Power:
      return alpha_ <= 1.0;
    case ModulusKind::LinearCapped:
      return true;
    case ModulusKind::PiecewiseLinear: {
      double prev = kInf;
      for (std::size_t i = 1; i < pts_.size(); ++i) {
        double s = (pts_[i].v - pts_[i - 1].v) / (pts_[i].t - pts_[i - 1].t);
        if (s > prev) return false;
        prev = s;
      }
      return tail_ <= prev;
    }
  }
  return false;
}

bool Modulus::is_subadditive() const {
  switch (kind_) {
    case ModulusKind::Power:
      return alpha_ <= 1.0;
    case ModulusKind::LinearCapped:
      return true;
    case ModulusKind::PiecewiseLinear:
      break;
  }
  // omega(s+t) - omega(s) - omega(t) is piecewise affine on the quadrant,
  // subdivided by s = t_i, t = t_i and s + t = t_i.  Its sup is attained at a
  // vertex of that subdivision or in one of the tail limits, so the test below
  // is exact up to rounding.
  const auto& p = pts_;
  const double tol = 1e-12 * std::max(1.0, p.back().v);
  auto excess = [&](double s, double t) { return (*this)(s + t) - (*this)(s) - (*this)(t); };
  for (std::size_t i = 1; i < p.size(); ++i) {
    for (std::size_t j = 1; j < p.size(); ++j) {
      if (excess(p[i].t, p[j].t) > tol) return false;
      double d = p[j].t - p[i].t;
      if (d > 0.0 && excess(p[i].t, d) > tol) return false;
    }
    // s -> inf with t = t_i: limit is tail*t_i - omega(t_i)
    if (tail_ * p[i].t - p[i].v > tol) return false;
  }
  // s, t -> inf: limit is tail*t_k - v_k
  if (tail_ * p.back().t - p.back().v > tol) return false;
  return true;
}

double Modulus::upper_bound() const {
  switch (kind_) {
    case ModulusKind::Power:
    case ModulusKind::PiecewiseLinear:
      if (kind_ == ModulusKind::PiecewiseLinear && tail_ == 0.0) return pts_.back().v;
      return kInf;
    case ModulusKind::LinearCapped:
      return slope_ == 0.0 ? 0.0 : cap_;
  }
  return kInf;
}

Modulus Modulus::least_concave_majorant() const {
  switch (kind_) {
    case ModulusKind::Power:
      if (alpha_ > 1.0)
        throw std::invalid_argument(
            "modulus: no concave majorant with finite initial slope for power > 1");
      return *this;
    case ModulusKind::LinearCapped:
      return *this;
    case ModulusKind::PiecewiseLinear:
      break;
  }
  // Upper concave hull of the breakpoints, then trailing hull segments flatter
  // than the tail ray are absorbed: the majorant leaves its last kept vertex
  // with the tail slope.
  std::vector<Breakpoint> hull;
  for (const Breakpoint& b : pts_) {
    while (hull.size() >= 2) {
      const Breakpoint& a = hull[hull.size() - 2];
      const Breakpoint& m = hull[hull.size() - 1];
      double cross = (m.t - a.t) * (b.v - a.v) - (b.t - a.t) * (m.v - a.v);
      if (cross >= 0.0)
        hull.pop_back();  // middle point is at or below chord a-b
      else
        break;
    }
    hull.push_back(b);
  }
  while (hull.size() >= 2) {
    const Breakpoint& a = hull[hull.size() - 2];
    const Breakpoint& b = hull[hull.size() - 1];
    double s = (b.v - a.v) / (b.t - a.t);
    if (s < tail_)
      hull.pop_back();
    else
      break;
  }
  return piecewise_linear(std::move(hull), tail_);
}

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t nxt = s.find(sep, pos);
    if (nxt == std::string_view::npos) {
      out.emplace_back(s.substr(pos));
      break;
    }
    out.emplace_back(s.substr(pos, nxt - pos));
    pos = nxt + 1;
  }
  return out;
}

double parse_num(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("modulus: bad number for ") + what + ": '" + s + "'");
  }
}

Modulus parse_pwl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("modulus: cannot open pwl file " + path);
  std::vector<Breakpoint> pts;
  double tail = -1.0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != 2)
      throw std::invalid_argument("modulus: pwl line " + std::to_string(lineno) +
                                  " must have two cells");
    if (cells[0] == "tail") {
      tail = parse_num(cells[1], "tail slope");
      continue;
    }
    if (tail >= 0.0)
      throw std::invalid_argument("modulus: pwl tail row must come last");
    pts.push_back({parse_num(cells[0], "breakpoint t"), parse_num(cells[1], "breakpoint v")});
  }
  if (tail < 0.0) throw std::invalid_argument("modulus: pwl file missing tail row");
  return Modulus::piecewise_linear(std::move(pts), tail);
}

}  // namespace

Modulus Modulus::parse(std::string_view spec) {
  auto parts = split(spec, ':');
  if (parts.empty() || parts[0].empty())
    throw std::invalid_argument("modulus: empty spec");
  const std::string& head = parts[0];
  if (head == "pow") {
    if (parts.size() < 2 || parts.size() > 3)
      throw std::invalid_argument("modulus: pow:<alpha>[:<scale>]");
    double a = parse_num(parts[1], "alpha");
    double c = parts.size() == 3 ? parse_num(parts[2], "scale") : 1.0;
    return power(a, c);
  }
  if (head == "lin") {
    if (parts.size() == 2) return linear(parse_num(parts[1], "slope"));
    if (parts.size() == 4 && parts[2] == "cap")
      return linear_capped(parse_num(parts[1], "slope"), parse_num(parts[3], "cap"));
    throw std::invalid_argument("modulus: lin:<slope>[:cap:<b>]");
  }
  if (head == "pwl") {
    if (parts.size() < 2) throw std::invalid_argument("modulus: pwl:<path>");
    // the path may itself contain ':'
    std::string path(spec.substr(4));
    return parse_pwl_file(path);
  }
  throw std::invalid_argument("modulus: unknown family '" + head + "'");
}

std::string Modulus::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case ModulusKind::Power:
      os << "pow:" << alpha_;
      if (scale_ != 1.0) os << ":" << scale_;
      break;
    case ModulusKind::LinearCapped:
      os << "lin:" << slope_;
      if (std::isfinite(cap_)) os << ":cap:" << cap_;
      break;
    case ModulusKind::PiecewiseLinear:
      os << "pwl[";
      for (std::size_t i = 0; i < pts_.size(); ++i) {
        if (i) os << ";";
        os << pts_[i].t << "," << pts_[i].v;
      }
      os << ";tail," << tail_ << "]";
      break;
  }
  return os.str();
}

Primitive::Primitive(Modulus base) : base_(std::move(base)) {
  if (base_.kind() == ModulusKind::PiecewiseLinear) {
    pts_ = base_.breakpoints();
    tail_ = base_.tail_slope();
  } else if (base_.kind() == ModulusKind::LinearCapped) {
    // rebuild as piecewise data: kink where the cap bites (if it does)
    double a = base_.slope(), b = base_.cap();
    pts_.push_back({0.0, 0.0});
    if (a > 0.0 && std::isfinite(b)) {
      pts_.push_back({b / a, b});
      tail_ = 0.0;  // omega is flat past the cap; phi continues linearly below
    } else {
      tail_ = 0.0;
    }
  }
  if (!pts_.empty()) {
    cum_.assign(pts_.size(), 0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      double dt = pts_[i].t - pts_[i - 1].t;
      cum_[i] = cum_[i - 1] + 0.5 * (pts_[i].v + pts_[i - 1].v) * dt;
    }
  }
}

double Primitive::operator()(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("primitive: negative or NaN argument");
  if (base_.kind() == ModulusKind::Power) {
    double a = base_.alpha();
    return t == 0.0 ? 0.0 : base_.scale() * std::pow(t, 1.0 + a) / (1.0 + a);
  }
  if (base_.kind() == ModulusKind::LinearCapped && pts_.size() == 1) {
    // pure linear (no finite cap kink): phi = a t^2 / 2
    return 0.5 * base_.slope() * t * t;
  }
  // piecewise quadratic
  if (t >= pts_.back().t) {
    double dt = t - pts_.back().t;
    return cum_.back() + pts_.back().v * dt + 0.5 * tail_ * dt * dt;
  }
  auto it = std::upper_bound(pts_.begin(), pts_.end(), t,
                             [](double x, const Breakpoint& b) { return x < b.t; });
  std::size_t i = static_cast<std::size_t>(it - pts_.begin());
  const Breakpoint& lo = pts_[i - 1];
  double dt = t - lo.t;
  double slope = (pts_[i].v - lo.v) / (pts_[i].t - lo.t);
  return cum_[i - 1] + lo.v * dt + 0.5 * slope * dt * dt;
}

double Primitive::derivative(double t) const { return base_(t); }

EmpiricalModulus EmpiricalModulus::from_samples(std::vector<Sample> samples) {
  for (const Sample& s : samples) {
    if (!(s.dist >= 0.0) || !std::isfinite(s.dist) || !std::isfinite(s.dev) || s.dev < 0.0)
      throw std::invalid_argument("empirical modulus: samples need dist >= 0, dev >= 0, finite");
  }
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.dist < b.dist; });
  EmpiricalModulus m;
  double run = 0.0;
  for (const Sample& s : samples) {
    run = std::max(run, s.dev);
    if (!m.steps_.empty() && m.steps_.back().dist == s.dist)
      m.steps_.back().dev = run;
    else if (!m.steps_.empty() && m.steps_.back().dev == run)
      continue;  // no new information
    else
      m.steps_.push_back({s.dist, run});
  }
  return m;
}

double EmpiricalModulus::operator()(double delta) const {
  if (!(delta >= 0.0)) throw std::invalid_argument("empirical modulus: negative argument");
  // largest step with dist <= delta
  auto it = std::upper_bound(steps_.begin(), steps_.end(), delta,
                             [](double x, const Sample& s) { return x < s.dist; });
  if (it == steps_.begin()) return 0.0;
  return (it - 1)->dev;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw std::invalid_argument("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(static_cast<std::size_t>(n));
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace wex
