#include "wex/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wex/domain.hpp"
#include "wex/envelope.hpp"
#include "wex/fixtures.hpp"
#include "wex/grid.hpp"
#include "wex/jet.hpp"
#include "wex/modulus.hpp"
#include "wex/regularize.hpp"

namespace wex {
namespace {

using json = nlohmann::ordered_json;

// JSON has no inf/nan literals; keep reports loadable by emitting strings.
json jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json jpair(const PairRef& p) { return json::array({p.from, p.to}); }

struct CertList {
  json arr = json::array();
  bool all_pass = true;

  void add(const std::string& name, bool pass, json detail = json::object()) {
    json j;
    j["name"] = name;
    j["pass"] = pass;
    for (auto& [k, v] : detail.items()) j[k] = v;
    arr.push_back(std::move(j));
    all_pass = all_pass && pass;
  }
};

int emit(json& report, CertList& certs, const std::string& out_path, bool pretty) {
  report["certificates"] = certs.arr;
  report["pass"] = certs.all_pass;
  const std::string text = pretty ? report.dump(2) : report.dump();
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot write " + out_path);
    os << text << "\n";
  }
  return certs.all_pass ? 0 : 1;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
  if (pos != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

// "lo,hi" applied to every axis or "lo1,hi1;lo2,hi2;..." per axis.
Box parse_box(const std::string& text, int dim) {
  Box box;
  auto groups = split(text, ';');
  if ((int)groups.size() != 1 && (int)groups.size() != dim)
    throw std::invalid_argument("box needs 1 or dim 'lo,hi' groups");
  for (int k = 0; k < dim; ++k) {
    const std::string& g = groups[(std::size_t)std::min<int>(k, (int)groups.size() - 1)];
    auto parts = split(g, ',');
    if (parts.size() != 2) throw std::invalid_argument("box group '" + g + "' is not 'lo,hi'");
    double lo = to_double(parts[0]), hi = to_double(parts[1]);
    if (!(lo < hi)) throw std::invalid_argument("box group '" + g + "' has lo >= hi");
    box.lo.push_back(lo);
    box.hi.push_back(hi);
  }
  return box;
}

// "n" applied to every axis or "n1,n2,..." per axis.
std::vector<int> parse_res(const std::string& text, int dim) {
  auto parts = split(text, ',');
  if ((int)parts.size() != 1 && (int)parts.size() != dim)
    throw std::invalid_argument("res needs 1 or dim entries");
  std::vector<int> res;
  for (int k = 0; k < dim; ++k) {
    const std::string& p = parts[(std::size_t)std::min<int>(k, (int)parts.size() - 1)];
    int n = (int)std::lround(to_double(p));
    if (n < 2) throw std::invalid_argument("res entries must be >= 2");
    res.push_back(n);
  }
  return res;
}

Box default_box(const JetDataset& jets) {
  Box box;
  const int d = jets.dim();
  box.lo.assign((std::size_t)d, std::numeric_limits<double>::infinity());
  box.hi.assign((std::size_t)d, -std::numeric_limits<double>::infinity());
  for (int i = 0; i < jets.size(); ++i) {
    auto z = jets.site(i);
    for (int k = 0; k < d; ++k) {
      box.lo[(std::size_t)k] = std::min(box.lo[(std::size_t)k], z[(std::size_t)k]);
      box.hi[(std::size_t)k] = std::max(box.hi[(std::size_t)k], z[(std::size_t)k]);
    }
  }
  double diam = 0.0;
  for (int k = 0; k < d; ++k) diam = std::max(diam, box.hi[(std::size_t)k] - box.lo[(std::size_t)k]);
  const double pad = diam > 0 ? 0.5 * diam : 1.0;
  for (int k = 0; k < d; ++k) {
    box.lo[(std::size_t)k] -= pad;
    box.hi[(std::size_t)k] += pad;
  }
  return box;
}

std::vector<int> default_res(int dim) {
  switch (dim) {
    case 1: return {1025};
    case 2: return {129, 129};
    case 3: return {33, 33, 33};
    default: return std::vector<int>((std::size_t)dim, 17);
  }
}

json box_json(const Box& box) {
  json lo = json::array(), hi = json::array();
  for (double v : box.lo) lo.push_back(v);
  for (double v : box.hi) hi.push_back(v);
  return json{{"lo", lo}, {"hi", hi}};
}

json steps_json(const EmpiricalModulus& em, std::size_t cap = 64) {
  const auto& st = em.steps();
  json dist = json::array(), dev = json::array();
  const std::size_t n = st.size();
  const std::size_t stride = n > cap ? (n + cap - 1) / cap : 1;
  for (std::size_t i = 0; i < n; i += stride) {
    dist.push_back(jnum(st[i].dist));
    dev.push_back(jnum(st[i].dev));
  }
  if (n > 0 && (n - 1) % stride != 0) {
    dist.push_back(jnum(st[n - 1].dist));
    dev.push_back(jnum(st[n - 1].dev));
  }
  return json{{"count", n}, {"dist", dist}, {"dev", dev}};
}

// ---------------------------------------------------------------- cloud csv

struct Cloud {
  int dim = 0;
  std::vector<double> pts;
  std::optional<std::vector<double>> values;
  std::optional<JetDataset> jets;
  int size() const { return dim ? (int)(pts.size() / (std::size_t)dim) : 0; }
};

Cloud load_cloud(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto cols = split(line, ',');
  int dim = 0;
  while (dim < (int)cols.size() && cols[(std::size_t)dim] == "x" + std::to_string(dim + 1)) ++dim;
  if (dim == 0) throw std::runtime_error(path + ": header must start with x1,x2,...");
  int at = dim;
  bool has_f = at < (int)cols.size() && cols[(std::size_t)at] == "f";
  if (has_f) ++at;
  bool has_g = false;
  if (at < (int)cols.size() && cols[(std::size_t)at] == "g1") {
    for (int k = 0; k < dim; ++k, ++at) {
      if (at >= (int)cols.size() || cols[(std::size_t)at] != "g" + std::to_string(k + 1))
        throw std::runtime_error(path + ": gradient columns must be g1..g" + std::to_string(dim));
    }
    has_g = true;
  }
  if (at != (int)cols.size()) throw std::runtime_error(path + ": unrecognized trailing columns");
  if (has_g && !has_f) throw std::runtime_error(path + ": gradients need an f column");

  Cloud c;
  c.dim = dim;
  std::vector<double> values, grads;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto parts = split(line, ',');
    if ((int)parts.size() != (int)cols.size())
      throw std::runtime_error(path + ": row " + std::to_string(row) + " has wrong field count");
    try {
      for (int k = 0; k < dim; ++k) c.pts.push_back(to_double(parts[(std::size_t)k]));
      if (has_f) values.push_back(to_double(parts[(std::size_t)dim]));
      if (has_g)
        for (int k = 0; k < dim; ++k) grads.push_back(to_double(parts[(std::size_t)(dim + 1 + k)]));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": row " + std::to_string(row) + " has a malformed number");
    }
  }
  if (c.pts.empty()) throw std::runtime_error(path + ": no data rows");
  if (has_f) c.values = values;
  if (has_g) c.jets = JetDataset(dim, c.pts, values, grads);
  return c;
}

void save_cloud_points(const std::vector<double>& pts, int dim, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  for (int k = 0; k < dim; ++k) os << (k ? "," : "") << "x" << (k + 1);
  os << "\n";
  os.precision(17);
  const int m = (int)(pts.size() / (std::size_t)dim);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < dim; ++k) os << (k ? "," : "") << pts[(std::size_t)i * dim + k];
    os << "\n";
  }
}

// --------------------------------------------------------------- subcommands

struct CommonOpts {
  std::string out;
  bool pretty = false;
};

struct CheckOpts : CommonOpts {
  std::string jets_path;
  std::string modulus;
  double radius = -1.0;
  bool full = false;
};

int run_check(const CheckOpts& o) {
  JetDataset jets = load_jets(o.jets_path);
  const int n = jets.size();
  const bool heavy = o.full || n <= 4096;

  json report;
  report["command"] = "check";
  report["input"] = o.jets_path;
  report["sites"] = n;
  report["dim"] = jets.dim();
  CertList certs;

  std::optional<ConcaveWGResult> rec;
  if (heavy) rec = concave_wg_modulus(jets);
  if (o.modulus.empty() && !rec)
    throw std::runtime_error("too many sites for modulus recovery; pass --modulus or --full");

  const Modulus omega = o.modulus.empty() ? rec->omega : Modulus::parse(o.modulus);
  report["modulus"] = json{{"spec", omega.describe()},
                           {"concave", omega.is_concave()},
                           {"subadditive", omega.is_subadditive()},
                           {"recovered", o.modulus.empty()}};

  WGReport wg = wg_constant(jets, omega);
  report["wg"] = json{{"m", jnum(wg.m)},
                      {"m_grad", jnum(wg.m_grad)},
                      {"m_taylor", jnum(wg.m_taylor)},
                      {"argmax_grad", jpair(wg.argmax_grad)},
                      {"argmax_taylor", jpair(wg.argmax_taylor)},
                      {"finite", wg.finite},
                      {"offending", jpair(wg.offending)}};
  certs.add("wg-constant-finite", wg.finite, json{{"m", jnum(wg.m)}});

  if (heavy) {
    WtildeProfile prof = wtilde_profile(jets);
    json pd = json::array(), pr = json::array();
    const std::size_t pn = prof.distances.size();
    const std::size_t stride = pn > 64 ? (pn + 63) / 64 : 1;
    for (std::size_t i = 0; i < pn; i += stride) {
      pd.push_back(jnum(prof.distances[i]));
      pr.push_back(jnum(prof.r[i]));
    }
    report["profile"] = json{{"distances", pd},
                             {"r", pr},
                             {"r_max", jnum(pn ? prof.r.back() : 0.0)},
                             {"gradient_modulus", steps_json(prof.gradient_modulus)}};
  } else {
    report["profile"] = json{{"skipped", true}, {"reason", "more than 4096 sites; use --full"}};
  }

  double radius = o.radius;
  if (radius < 0) {
    radius = 0.0;
    for (int i = 0; i < n; ++i) {
      double s2 = 0.0;
      for (double x : jets.site(i)) s2 += x * x;
      radius = std::max(radius, std::sqrt(s2));
    }
  }
  BallStats ball = lip_and_bound_stats(jets, radius);
  report["ball"] = json{{"radius", radius},
                        {"count", ball.count},
                        {"lip", jnum(ball.lip)},
                        {"sup_grad_norm", jnum(ball.sup_grad_norm)},
                        {"sup_abs_value", jnum(ball.sup_abs_value)}};

  if (rec) {
    report["recovery"] = json{{"modulus", rec->omega.describe()},
                              {"recertified_m", jnum(rec->recertified_m)},
                              {"small_scale_jump", rec->small_scale_jump},
                              {"profile_points", rec->alpha_distances.size()}};
    certs.add("concave-recertification", rec->recertified_m <= 1.0 + 1e-9,
              json{{"recertified_m", jnum(rec->recertified_m)}});
  }

  return emit(report, certs, o.out, o.pretty);
}

struct EnvelopeOpts : CommonOpts {
  std::string jets_path;
  std::string modulus;
  double m = -1.0;
  double factor = 6.0;
  std::string box_text, res_text;
  std::string out_lower, out_upper;
};

struct EnvelopeSetup {
  JetDataset jets;
  Modulus omega;
  double m = 0.0;
  bool m_from_scan = false;
};

EnvelopeSetup envelope_setup(const std::string& jets_path, const std::string& modulus_text,
                             double m_opt) {
  EnvelopeSetup s{load_jets(jets_path), Modulus::parse(modulus_text)};
  if (m_opt > 0) {
    s.m = m_opt;
  } else {
    WGReport wg = wg_constant(s.jets, s.omega);
    if (!wg.finite)
      throw std::runtime_error("the jet data admits no finite constant for this modulus; pass --m");
    s.m = std::max(wg.m, 1e-12);
    s.m_from_scan = true;
  }
  return s;
}

int run_envelope(const EnvelopeOpts& o) {
  EnvelopeSetup setup = envelope_setup(o.jets_path, o.modulus, o.m);
  const int dim = setup.jets.dim();
  const Box box = o.box_text.empty() ? default_box(setup.jets) : parse_box(o.box_text, dim);
  const std::vector<int> res = o.res_text.empty() ? default_res(dim) : parse_res(o.res_text, dim);

  EnvelopeSpec spec = make_envelope_spec(setup.jets, setup.m, setup.omega, o.factor);
  EnvelopePair pair = envelope_grid(spec, box, res);

  json report;
  report["command"] = "envelope";
  report["input"] = o.jets_path;
  report["modulus"] = setup.omega.describe();
  report["m"] = jnum(setup.m);
  report["m_from_scan"] = setup.m_from_scan;
  report["factor"] = o.factor;
  report["box"] = box_json(box);
  report["res"] = res;
  CertList certs;

  certs.add("modulus-concave", setup.omega.is_concave(),
            json{{"spec", setup.omega.describe()}});

  double gap_min = std::numeric_limits<double>::infinity();
  double habs = 0.0;
  for (std::int64_t i = 0; i < pair.h.total(); ++i) {
    gap_min = std::min(gap_min, pair.H[i] - pair.h[i]);
    habs = std::max({habs, std::abs(pair.h[i]), std::abs(pair.H[i])});
  }
  report["gap_min"] = jnum(gap_min);
  certs.add("lower-below-upper", gap_min >= -1e-9 * std::max(1.0, habs),
            json{{"gap_min", jnum(gap_min)}});

  certs.add("sites-inside-box", pair.sites_inside);
  if (pair.sites_inside) {
    double err_h = 0.0, err_H = 0.0;
    for (int i = 0; i < setup.jets.size(); ++i) {
      auto z = setup.jets.site(i);
      err_h = std::max(err_h, std::abs(pair.h.interpolate(z) - setup.jets.value(i)));
      err_H = std::max(err_H, std::abs(pair.H.interpolate(z) - setup.jets.value(i)));
    }
    const double sp = pair.h.max_spacing();
    const double budget = 5.0 * (1.0 + o.factor * setup.m) * (sp * sp + sp * setup.omega(sp));
    report["site_error_lower"] = jnum(err_h);
    report["site_error_upper"] = jnum(err_H);
    report["site_budget"] = jnum(budget);
    certs.add("site-interpolation", err_h <= budget && err_H <= budget,
              json{{"max_error", jnum(std::max(err_h, err_H))}, {"budget", jnum(budget)}});
  }

  if (!o.out_lower.empty()) pair.h.save(o.out_lower);
  if (!o.out_upper.empty()) pair.H.save(o.out_upper);

  return emit(report, certs, o.out, o.pretty);
}

struct ExtendOpts : CommonOpts {
  std::string jets_path;
  std::string modulus;
  double m = -1.0;
  double factor = 6.0;
  std::string box_text, res_text;
  double t = -1.0;
  bool general = false;
  double a = -1.0;
  std::string out_grid, out_csv;
};

int run_extend(const ExtendOpts& o) {
  EnvelopeSetup setup = envelope_setup(o.jets_path, o.modulus, o.m);
  const int dim = setup.jets.dim();
  const Box box = o.box_text.empty() ? default_box(setup.jets) : parse_box(o.box_text, dim);
  const std::vector<int> res = o.res_text.empty() ? default_res(dim) : parse_res(o.res_text, dim);

  EnvelopeSpec spec = make_envelope_spec(setup.jets, setup.m, setup.omega, o.factor);
  EnvelopePair pair = envelope_grid(spec, box, res);

  std::optional<double> t;
  if (o.t > 0) t = o.t;
  InsertionResult ins =
      o.general ? insert_general(pair.h, pair.H, setup.omega, setup.m,
                                 o.a > 0 ? o.a : 12.0 * setup.m, &setup.jets)
                : insert_c11(pair.h, pair.H, setup.m, t, &setup.jets);

  json report;
  report["command"] = "extend";
  report["input"] = o.jets_path;
  report["modulus"] = setup.omega.describe();
  report["m"] = jnum(setup.m);
  report["m_from_scan"] = setup.m_from_scan;
  report["factor"] = o.factor;
  report["box"] = box_json(box);
  report["res"] = res;
  report["kernel"] = o.general ? "primitive" : "quadratic";
  report["t"] = jnum(ins.t_used);
  CertList certs;

  certs.add("modulus-concave", setup.omega.is_concave());

  const InsertionDiagnostics& d = ins.diag;
  report["diagnostics"] =
      json{{"max_lower_violation", jnum(d.max_lower_violation)},
           {"max_upper_violation", jnum(d.max_upper_violation)},
           {"sandwich_budget", jnum(d.sandwich_budget)},
           {"site_max_error", jnum(d.site_max_error)},
           {"site_budget", jnum(d.site_budget)},
           {"grad_lip", jnum(d.grad_lip)},
           {"grad_lip_budget", jnum(d.grad_lip_budget)}};
  certs.add("insertion-sandwich", d.sandwich_ok,
            json{{"max_violation", jnum(std::max(d.max_lower_violation, d.max_upper_violation))},
                 {"budget", jnum(d.sandwich_budget)}});
  certs.add("site-interpolation", d.sites_ok,
            json{{"max_error", jnum(d.site_max_error)}, {"budget", jnum(d.site_budget)}});
  certs.add("gradient-lipschitz", d.grad_lip_ok,
            json{{"estimate", jnum(d.grad_lip)}, {"budget", jnum(d.grad_lip_budget)}});
  if (d.t_large_warning)
    report["warnings"] = json::array({"smoothing parameter at or above the semiconcavity limit"});

  if (!o.out_grid.empty()) ins.f.save(o.out_grid);
  if (!o.out_csv.empty()) ins.f.save_csv(o.out_csv);

  return emit(report, certs, o.out, o.pretty);
}

struct GlueOpts : CommonOpts {
  std::vector<std::string> grid_paths;
  std::string sites_text;
  std::vector<double> radii;
  std::string jets_path;
  double site_tol = -1.0;
  std::string out_grid;
};

int run_glue(const GlueOpts& o) {
  JetDataset jets = load_jets(o.jets_path);
  std::vector<GluePiece> pieces;
  for (const auto& p : o.grid_paths) pieces.push_back(GluePiece{GridFunction::load(p), {}});

  auto groups = split(o.sites_text, ';');
  if (groups.size() != pieces.size())
    throw std::runtime_error("--sites needs one ';'-group per grid");
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].empty()) continue;
    for (const auto& tok : split(groups[k], ',')) {
      int idx = (int)std::lround(to_double(tok));
      if (idx < 0 || idx >= jets.size()) throw std::runtime_error("site index out of range");
      pieces[k].sites.push_back(idx);
    }
  }

  json report;
  report["command"] = "glue";
  report["pieces"] = o.grid_paths.size();
  report["sites"] = jets.size();
  json jr = json::array();
  for (double r : o.radii) jr.push_back(r);
  report["radii"] = jr;
  CertList certs;

  try {
    RadialPartition partition(o.radii);
    std::optional<double> tol;
    if (o.site_tol > 0) tol = o.site_tol;
    GlueResult res = glue(pieces, partition, jets, tol);
    report["partition_max_dev"] = jnum(res.partition_max_dev);
    report["site_max_error"] = jnum(res.site_max_error);
    certs.add("partition-of-unity", res.partition_max_dev <= 1e-12,
              json{{"max_dev", jnum(res.partition_max_dev)}});
    double fscale = 0.0;
    for (int i = 0; i < jets.size(); ++i) fscale = std::max(fscale, std::abs(jets.value(i)));
    const double tol_used = o.site_tol > 0 ? o.site_tol : 1e-6 * (1.0 + fscale);
    certs.add("site-reproduction", res.site_max_error <= tol_used,
              json{{"max_error", jnum(res.site_max_error)}, {"tol", jnum(tol_used)}});
    if (!o.out_grid.empty()) res.f.save(o.out_grid);
  } catch (const std::invalid_argument& e) {
    report["error"] = e.what();
    certs.add("glue-consistency", false, json{{"error", e.what()}});
  }

  return emit(report, certs, o.out, o.pretty);
}

struct DomainOpts : CommonOpts {
  std::string points_path;
  std::string fixture;
  int resolution = 0;
  double cusp_scale = 0.25;
  double annulus_inner = 0.5, annulus_outer = 1.0;
  double epsilon = -1.0;
  double epsilon_mult = 3.0;
  std::int64_t pair_budget = 200000;
  std::string modulus;
  double k_const = -1.0;
};

struct DomainInput {
  DomainSample sample;
  std::optional<std::vector<double>> values;
  std::optional<JetDataset> jets;
  json params = json::object();
};

DomainInput domain_fixture(const DomainOpts& o) {
  DomainInput in;
  auto res_or = [&](int dflt) { return o.resolution > 0 ? o.resolution : dflt; };
  if (o.fixture == "slit_square") {
    DomainFixture f = gen_slit_square(res_or(32));
    in.sample = std::move(f.sample);
    in.jets = std::move(f.jets);
    in.params["resolution"] = res_or(32);
  } else if (o.fixture == "parabola_cusp") {
    DomainFixture f = gen_parabola_cusp(o.cusp_scale, res_or(64));
    in.sample = std::move(f.sample);
    in.jets = std::move(f.jets);
    in.params["resolution"] = res_or(64);
    in.params["cusp_scale"] = o.cusp_scale;
  } else if (o.fixture == "oscillating") {
    in.sample = gen_oscillating_domain(res_or(64));
    in.params["resolution"] = res_or(64);
  } else if (o.fixture == "annulus") {
    in.sample = gen_annulus(o.annulus_inner, o.annulus_outer, res_or(64));
    in.params["resolution"] = res_or(64);
    in.params["inner"] = o.annulus_inner;
    in.params["outer"] = o.annulus_outer;
  } else if (o.fixture == "cone_shell") {
    DomainFixture f = gen_cone_shell(res_or(160));
    in.sample = std::move(f.sample);
    in.jets = std::move(f.jets);
    in.params["resolution"] = res_or(160);
  } else {
    throw std::runtime_error("unknown fixture '" + o.fixture +
                             "' (slit_square, parabola_cusp, oscillating, annulus, cone_shell)");
  }
  if (in.jets) in.values = in.jets->raw_values();
  return in;
}

DomainInput domain_points(const DomainOpts& o) {
  Cloud c = load_cloud(o.points_path);
  double eps = o.epsilon;
  if (eps <= 0) {
    // auto-estimate: provisional graph at a mean-spacing guess, grown until
    // the median nearest-neighbor distance exists, then epsilon_mult times it
    double diam = 0.0;
    const int m = c.size();
    for (int k = 0; k < c.dim; ++k) {
      double lo = c.pts[(std::size_t)k], hi = lo;
      for (int i = 1; i < m; ++i) {
        lo = std::min(lo, c.pts[(std::size_t)i * c.dim + k]);
        hi = std::max(hi, c.pts[(std::size_t)i * c.dim + k]);
      }
      diam = std::max(diam, hi - lo);
    }
    if (diam <= 0) throw std::runtime_error("degenerate cloud: zero extent");
    double guess = diam * std::pow(1.0 / std::max(2, m), 1.0 / c.dim);
    double med = 0.0;
    for (int it = 0; it < 40; ++it) {
      DomainSample probe = build_graph(c.pts, c.dim, guess);
      med = probe.median_nn;
      if (std::isfinite(med) && med > 0) break;
      guess *= 2.0;
    }
    if (!(std::isfinite(med) && med > 0))
      throw std::runtime_error("could not estimate a neighborhood radius; pass --epsilon");
    eps = o.epsilon_mult * med;
  }
  DomainInput in;
  in.sample = build_graph(c.pts, c.dim, eps);
  in.values = c.values;
  in.jets = c.jets;
  in.params["source"] = o.points_path;
  return in;
}

int run_domain(const DomainOpts& o) {
  if (o.points_path.empty() == o.fixture.empty())
    throw std::runtime_error("pass exactly one of --points or --fixture");
  DomainInput in = o.fixture.empty() ? domain_points(o) : domain_fixture(o);
  const DomainSample& s = in.sample;

  json report;
  report["command"] = "domain";
  if (!o.fixture.empty()) report["fixture"] = o.fixture;
  report["params"] = in.params;
  report["dim"] = s.dim;
  report["points"] = s.size();
  report["epsilon"] = jnum(s.epsilon);
  report["median_nn"] = jnum(s.median_nn);
  report["components"] = s.components;
  CertList certs;

  certs.add("graph-connected", s.components == 1, json{{"components", s.components}});
  if (s.components != 1) return emit(report, certs, o.out, o.pretty);

  QCReport qc = qc_constant(s, o.pair_budget);
  report["quasiconvexity"] = json{{"c_hat", jnum(qc.c_hat)},
                                  {"slack", jnum(qc.slack)},
                                  {"kappa_hat", jnum(qc.kappa_hat)},
                                  {"ratio_q50", jnum(qc.ratio_q50)},
                                  {"ratio_q95", jnum(qc.ratio_q95)},
                                  {"worst_pair", json::array({qc.worst_from, qc.worst_to})},
                                  {"worst_dist", jnum(qc.worst_dist)},
                                  {"worst_hops", qc.worst_hops},
                                  {"worst_hop_slack", jnum(qc.worst_hop_slack)},
                                  {"pairs_scanned", qc.pairs_scanned},
                                  {"sources", qc.sources},
                                  {"pair_floor", jnum(qc.pair_floor)}};

  if (in.values) {
    InnerModulusReport im = inner_modulus(s, *in.values, &qc, o.pair_budget);
    report["inner_modulus"] = json{{"inner", steps_json(im.inner)},
                                   {"euclid", steps_json(im.euclid)},
                                   {"concave", im.concave.describe()},
                                   {"stechkin_max_ratio", jnum(im.stechkin_max_ratio)},
                                   {"subadd_excess", jnum(im.subadd_excess)}};
    certs.add("concave-majorant-within-factor-two", im.stechkin_ok,
              json{{"max_ratio", jnum(im.stechkin_max_ratio)}});
    certs.add("inner-subadditivity", im.subadd_ok, json{{"excess", jnum(im.subadd_excess)}});
    certs.add("inner-sandwich", im.sandwich_lower_ok && im.sandwich_upper_ok,
              json{{"lower_ok", im.sandwich_lower_ok}, {"upper_ok", im.sandwich_upper_ok}});
  }

  if (in.jets) {
    LipschitzCertificate lc = lipschitz_from_bounded_gradient(s, *in.jets, qc);
    report["lipschitz"] = json{{"lip", jnum(lc.lip)},
                               {"sup_grad_norm", jnum(lc.sup_grad_norm)},
                               {"bound", jnum(lc.bound)}};
    certs.add("lipschitz-bound", lc.pass,
              json{{"lip", jnum(lc.lip)}, {"bound", jnum(lc.bound)}});
    if (!o.modulus.empty() && o.k_const > 0) {
      Modulus omega = Modulus::parse(o.modulus);
      QuasiconvexWGCertificate qw = wg_from_quasiconvex(s, *in.jets, omega, o.k_const, qc);
      report["wg_quasiconvex"] = json{{"m", jnum(qw.wg.m)},
                                      {"bound", jnum(qw.bound)},
                                      {"chain_lhs", jnum(qw.chain_lhs)},
                                      {"chain_sum", jnum(qw.chain_sum)},
                                      {"chain_bound", jnum(qw.chain_bound)},
                                      {"chain_path_length", jnum(qw.chain_path_length)}};
      certs.add("wg-quasiconvex-budget", qw.pass,
                json{{"m", jnum(qw.wg.m)}, {"bound", jnum(qw.bound)}});
      certs.add("chain-aggregation", qw.chain_ok,
                json{{"sum", jnum(qw.chain_sum)}, {"bound", jnum(qw.chain_bound)}});
    }
  }

  return emit(report, certs, o.out, o.pretty);
}

struct ModulusOpts : CommonOpts {
  std::string spec;
  double lo = 1e-3, hi = 10.0;
  int samples = 9;
};

int run_modulus(const ModulusOpts& o) {
  Modulus omega = Modulus::parse(o.spec);
  Primitive phi(omega);

  json report;
  report["command"] = "modulus";
  report["spec"] = omega.describe();
  report["concave"] = omega.is_concave();
  report["subadditive"] = omega.is_subadditive();
  report["upper_bound"] = jnum(omega.upper_bound());
  CertList certs;

  std::optional<Modulus> lcm;
  try {
    lcm = omega.least_concave_majorant();
    report["least_concave_majorant"] = lcm->describe();
  } catch (const std::invalid_argument& e) {
    report["least_concave_majorant"] = nullptr;
    report["majorant_error"] = e.what();
  }

  json table = json::array();
  for (double t : log_grid(o.lo, o.hi, std::max(2, o.samples))) {
    json row{{"t", jnum(t)}, {"omega", jnum(omega(t))}, {"phi", jnum(phi(t))}};
    if (lcm) row["majorant"] = jnum((*lcm)(t));
    table.push_back(row);
  }
  report["samples"] = table;

  if (omega.is_subadditive()) {
    bool ok = (bool)lcm;
    double worst = 0.0;
    if (lcm) {
      for (double t : log_grid(o.lo, o.hi, 512)) {
        const double w = omega(t), c = (*lcm)(t);
        if (w <= 0) continue;
        worst = std::max(worst, c / w);
        if (c < w * (1.0 - 1e-9) || c > 2.0 * w * (1.0 + 1e-9)) ok = false;
      }
    }
    certs.add("majorant-between-one-and-two-times", ok, json{{"max_ratio", jnum(worst)}});
  }
  if (omega.is_concave()) {
    bool ok = true;
    double worst = 0.0;
    for (double t : log_grid(o.lo, o.hi, 512)) {
      const double lhs = t * omega(t), rhs = 2.0 * phi(t);
      if (lhs > rhs * (1.0 + 1e-9)) ok = false;
      if (rhs > 0) worst = std::max(worst, lhs / rhs);
    }
    certs.add("primitive-lower-bound", ok, json{{"max_ratio", jnum(worst)}});
  }

  return emit(report, certs, o.out, o.pretty);
}

struct FixtureOpts : CommonOpts {
  std::string name;
  std::string out_dir;
  int resolution = 0;
  int pairs = 3;
  int dim = 2;
  double cusp_scale = 0.25;
  double annulus_inner = 0.5, annulus_outer = 1.0;
};

int run_fixture(const FixtureOpts& o) {
  json manifest;
  manifest["fixture"] = o.name;
  json params = json::object();
  json files = json::object();
  json expected = json::object();
  auto res_or = [&](int dflt) { return o.resolution > 0 ? o.resolution : dflt; };

  std::optional<JetDataset> jets;
  std::optional<DomainSample> sample;

  if (o.name == "three_point") {
    params["dim"] = o.dim;
    jets = gen_three_point(o.dim);
    expected["wg_m_identity"] = 1.0;
    expected["note"] = "minimal constant 1 for the identity modulus, from the middle-to-right pair";
  } else if (o.name == "integer_jet") {
    params["pairs"] = o.pairs;
    jets = gen_integer_jet(o.pairs);
    expected["lipschitz"] = (double)o.pairs;
    expected["note"] = "best Lipschitz constant equals the pair count";
  } else if (o.name == "slit_square") {
    params["resolution"] = res_or(32);
    DomainFixture f = gen_slit_square(res_or(32));
    sample = std::move(f.sample);
    jets = std::move(f.jets);
    expected["euclid_jump_min"] = 1.0;
    expected["note"] = "values jump across the slit while the path metric keeps them slowly varying";
  } else if (o.name == "parabola_cusp") {
    params["resolution"] = res_or(64);
    params["cusp_scale"] = o.cusp_scale;
    DomainFixture f = gen_parabola_cusp(o.cusp_scale, res_or(64));
    sample = std::move(f.sample);
    jets = std::move(f.jets);
    expected["taylor_ratio_floor"] = 0.5;
    expected["note"] = "cross-cusp remainder ratios stay near 1/2 at all sampled scales";
  } else if (o.name == "oscillating") {
    params["resolution"] = res_or(64);
    sample = gen_oscillating_domain(res_or(64));
    expected["connected"] = true;
    expected["note"] = "graded columns keep the narrowing strip connected";
  } else if (o.name == "annulus") {
    params["resolution"] = res_or(64);
    params["inner"] = o.annulus_inner;
    params["outer"] = o.annulus_outer;
    sample = gen_annulus(o.annulus_inner, o.annulus_outer, res_or(64));
    expected["note"] = "path-to-chord ratios stay below pi/2 plus lattice slack";
  } else if (o.name == "cone_shell") {
    params["resolution"] = res_or(160);
    DomainFixture f = gen_cone_shell(res_or(160));
    sample = std::move(f.sample);
    jets = std::move(f.jets);
    expected["note"] = "narrow cone entrance forces a path-to-chord ratio of a few units";
  } else {
    throw std::runtime_error("unknown fixture '" + o.name +
                             "' (three_point, integer_jet, slit_square, parabola_cusp, "
                             "oscillating, annulus, cone_shell)");
  }

  const std::string dir = o.out_dir.empty() ? "." : o.out_dir;
  std::filesystem::create_directories(dir);
  if (jets) {
    const std::string p = dir + "/jets.csv";
    save_jets(*jets, p);
    files["jets"] = p;
    manifest["sites"] = jets->size();
    manifest["dim"] = jets->dim();
  }
  if (sample) {
    if (!jets) {
      const std::string p = dir + "/cloud.csv";
      save_cloud_points(sample->points, sample->dim, p);
      files["cloud"] = p;
    }
    manifest["points"] = sample->size();
    manifest["dim"] = sample->dim;
    manifest["epsilon"] = jnum(sample->epsilon);
    manifest["components"] = sample->components;
  }
  manifest["params"] = params;
  manifest["files"] = files;
  manifest["expected"] = expected;

  const std::string mp = dir + "/manifest.json";
  std::ofstream os(mp);
  if (!os) throw std::runtime_error("cannot write " + mp);
  os << manifest.dump(2) << "\n";

  json report = manifest;
  report["command"] = "fixture";
  CertList certs;
  certs.add("fixture-written", true, json{{"manifest", mp}});
  return emit(report, certs, o.out, o.pretty);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"certified 1-jet extension toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");

  CheckOpts check_o;
  EnvelopeOpts env_o;
  ExtendOpts ext_o;
  GlueOpts glue_o;
  DomainOpts dom_o;
  ModulusOpts mod_o;
  FixtureOpts fix_o;

  auto add_common = [](CLI::App* sub, CommonOpts& c) {
    sub->add_option("--out", c.out, "write the JSON report here instead of stdout");
    sub->add_flag("--pretty", c.pretty, "indent the JSON report");
  };

  auto* check = app.add_subcommand("check", "scan a jet dataset for the minimal constant");
  check->add_option("jets", check_o.jets_path, "jet CSV (x1..xn,f,g1..gn)")->required();
  check->add_option("--modulus", check_o.modulus, "modulus spec (default: recovered concave one)");
  check->add_option("--radius", check_o.radius, "ball radius for the Lipschitz/bound stats");
  check->add_flag("--full", check_o.full, "run the quadratic-cost profiles regardless of size");
  add_common(check, check_o);

  auto* env = app.add_subcommand("envelope", "evaluate the extremal envelopes on a grid");
  env->add_option("jets", env_o.jets_path)->required();
  env->add_option("--modulus", env_o.modulus, "modulus spec")->required();
  env->add_option("--m", env_o.m, "constant (default: scanned from the data)");
  env->add_option("--factor", env_o.factor, "kernel factor")->capture_default_str();
  env->add_option("--box", env_o.box_text, "'lo,hi' or 'lo1,hi1;lo2,hi2;...'");
  env->add_option("--res", env_o.res_text, "nodes per axis, 'n' or 'n1,n2,...'");
  env->add_option("--out-lower", env_o.out_lower, "save the lower envelope grid");
  env->add_option("--out-upper", env_o.out_upper, "save the upper envelope grid");
  add_common(env, env_o);

  auto* ext = app.add_subcommand("extend", "build the smoothed extension between the envelopes");
  ext->add_option("jets", ext_o.jets_path)->required();
  ext->add_option("--modulus", ext_o.modulus, "modulus spec")->required();
  ext->add_option("--m", ext_o.m, "constant (default: scanned from the data)");
  ext->add_option("--factor", ext_o.factor, "kernel factor")->capture_default_str();
  ext->add_option("--box", ext_o.box_text, "'lo,hi' or 'lo1,hi1;lo2,hi2;...'");
  ext->add_option("--res", ext_o.res_text, "nodes per axis, 'n' or 'n1,n2,...'");
  ext->add_option("--t", ext_o.t, "smoothing parameter (default 1/(12 m))");
  ext->add_flag("--general", ext_o.general, "use the primitive kernel in both passes");
  ext->add_option("--a", ext_o.a, "primitive kernel weight (with --general; default 12 m)");
  ext->add_option("--out-grid", ext_o.out_grid, "save the extension grid (binary)");
  ext->add_option("--out-csv", ext_o.out_csv, "save the extension grid (CSV)");
  add_common(ext, ext_o);

  auto* glue_c = app.add_subcommand("glue", "blend piecewise extensions with a radial partition");
  glue_c->add_option("--grids", glue_o.grid_paths, "piece grids (binary format)")->required();
  glue_c->add_option("--sites", glue_o.sites_text, "site indices per piece, e.g. '0,1;2'")
      ->required();
  glue_c->add_option("--radii", glue_o.radii, "increasing partition radii")->required();
  glue_c->add_option("--jets", glue_o.jets_path, "shared jet CSV")->required();
  glue_c->add_option("--site-tol", glue_o.site_tol, "site reproduction tolerance");
  glue_c->add_option("--out-grid", glue_o.out_grid, "save the blended grid");
  add_common(glue_c, glue_o);

  auto* dom = app.add_subcommand("domain", "analyze a point cloud's neighborhood graph");
  dom->add_option("--points", dom_o.points_path, "cloud CSV (x1..xn[,f][,g1..gn])");
  dom->add_option("--fixture", dom_o.fixture,
                  "built-in cloud: slit_square, parabola_cusp, oscillating, annulus, cone_shell");
  dom->add_option("--resolution", dom_o.resolution, "fixture resolution override");
  dom->add_option("--cusp-scale", dom_o.cusp_scale, "parabola_cusp: largest witness abscissa")
      ->capture_default_str();
  dom->add_option("--annulus-inner", dom_o.annulus_inner, "annulus: inner radius")->capture_default_str();
  dom->add_option("--annulus-outer", dom_o.annulus_outer, "annulus: outer radius")->capture_default_str();
  dom->add_option("--epsilon", dom_o.epsilon, "neighborhood radius (default: estimated)");
  dom->add_option("--epsilon-mult", dom_o.epsilon_mult,
                  "estimated epsilon = this times the median nearest-neighbor distance")
      ->capture_default_str();
  dom->add_option("--pair-budget", dom_o.pair_budget, "sampled pair budget")->capture_default_str();
  dom->add_option("--modulus", dom_o.modulus, "gradient modulus spec (with --k)");
  dom->add_option("--k", dom_o.k_const, "gradient modulus constant (with --modulus)");
  add_common(dom, dom_o);

  auto* mod = app.add_subcommand("modulus", "inspect a modulus spec and its derived objects");
  mod->add_option("spec", mod_o.spec, "pow:<a>[:<C>], lin:<a>[:cap:<b>] or pwl:<csv>")->required();
  mod->add_option("--lo", mod_o.lo, "sample range start")->capture_default_str();
  mod->add_option("--hi", mod_o.hi, "sample range end")->capture_default_str();
  mod->add_option("--samples", mod_o.samples, "sample count")->capture_default_str();
  add_common(mod, mod_o);

  auto* fix = app.add_subcommand("fixture", "write a built-in dataset to disk");
  fix->add_option("name", fix_o.name, "three_point, integer_jet, slit_square, parabola_cusp, "
                                      "oscillating, annulus, cone_shell")
      ->required();
  fix->add_option("--dir", fix_o.out_dir, "output directory (default: current)");
  fix->add_option("--resolution", fix_o.resolution, "resolution override");
  fix->add_option("--pairs", fix_o.pairs, "integer_jet: pair count")->capture_default_str();
  fix->add_option("--dim", fix_o.dim, "three_point: ambient dimension")->capture_default_str();
  fix->add_option("--cusp-scale", fix_o.cusp_scale, "parabola_cusp: largest witness abscissa")
      ->capture_default_str();
  fix->add_option("--annulus-inner", fix_o.annulus_inner, "annulus: inner radius")->capture_default_str();
  fix->add_option("--annulus-outer", fix_o.annulus_outer, "annulus: outer radius")->capture_default_str();
  add_common(fix, fix_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (check->parsed()) return run_check(check_o);
    if (env->parsed()) return run_envelope(env_o);
    if (ext->parsed()) return run_extend(ext_o);
    if (glue_c->parsed()) return run_glue(glue_o);
    if (dom->parsed()) return run_domain(dom_o);
    if (mod->parsed()) return run_modulus(mod_o);
    if (fix->parsed()) return run_fixture(fix_o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace wex
