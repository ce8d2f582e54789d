#include "wex/grid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace wex {

namespace {
constexpr char kMagic[4] = {'W', 'G', 'R', 'D'};
constexpr std::uint32_t kVersion = 1;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

GridFunction::GridFunction(Box box, std::vector<int> dims) : box_(std::move(box)), dims_(std::move(dims)) {
  int n = box_.dim();
  require(n >= 1 && n <= kMaxDim, "grid: dimension must be in [1,4]");
  require(static_cast<int>(box_.hi.size()) == n, "grid: box lo/hi length mismatch");
  require(static_cast<int>(dims_.size()) == n, "grid: dims length mismatch");
  std::int64_t total = 1;
  for (int k = 0; k < n; ++k) {
    require(std::isfinite(box_.lo[(std::size_t)k]) && std::isfinite(box_.hi[(std::size_t)k]) &&
                box_.hi[(std::size_t)k] > box_.lo[(std::size_t)k],
            "grid: box must have positive extent");
    require(dims_[(std::size_t)k] >= 2, "grid: need at least two nodes per axis");
    total *= dims_[(std::size_t)k];
    require(total <= kMaxValues, "grid: node count exceeds configured cap");
  }
  spacing_.resize((std::size_t)n);
  for (int k = 0; k < n; ++k)
    spacing_[(std::size_t)k] =
        (box_.hi[(std::size_t)k] - box_.lo[(std::size_t)k]) / (dims_[(std::size_t)k] - 1);
  values_.assign((std::size_t)total, 0.0);
}

double GridFunction::max_spacing() const {
  double s = 0.0;
  for (double v : spacing_) s = std::max(s, v);
  return s;
}

std::int64_t GridFunction::flat_index(std::span<const int> idx) const {
  std::int64_t f = 0;
  for (int k = 0; k < dim(); ++k) f = f * dims_[(std::size_t)k] + idx[(std::size_t)k];
  return f;
}

std::vector<int> GridFunction::unflatten(std::int64_t flat) const {
  std::vector<int> idx((std::size_t)dim());
  for (int k = dim() - 1; k >= 0; --k) {
    idx[(std::size_t)k] = static_cast<int>(flat % dims_[(std::size_t)k]);
    flat /= dims_[(std::size_t)k];
  }
  return idx;
}

std::vector<double> GridFunction::node(std::int64_t flat) const {
  auto idx = unflatten(flat);
  std::vector<double> x((std::size_t)dim());
  for (int k = 0; k < dim(); ++k) x[(std::size_t)k] = coord(k, idx[(std::size_t)k]);
  return x;
}

bool GridFunction::same_layout(const GridFunction& other) const {
  return dims_ == other.dims_ && box_.lo == other.box_.lo && box_.hi == other.box_.hi;
}

bool GridFunction::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int k = 0; k < dim(); ++k)
    if (x[(std::size_t)k] < box_.lo[(std::size_t)k] || x[(std::size_t)k] > box_.hi[(std::size_t)k])
      return false;
  return true;
}

double GridFunction::interpolate(std::span<const double> x) const {
  if (!contains(x)) throw std::invalid_argument("grid: interpolation point outside box");
  int n = dim();
  std::vector<int> base((std::size_t)n);
  std::vector<double> frac((std::size_t)n);
  for (int k = 0; k < n; ++k) {
    double u = (x[(std::size_t)k] - box_.lo[(std::size_t)k]) / spacing_[(std::size_t)k];
    int i = static_cast<int>(std::floor(u));
    i = std::min(std::max(i, 0), dims_[(std::size_t)k] - 2);
    base[(std::size_t)k] = i;
    frac[(std::size_t)k] = u - i;
  }
  double acc = 0.0;
  int corners = 1 << n;
  std::vector<int> idx((std::size_t)n);
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    for (int k = 0; k < n; ++k) {
      int bit = (c >> k) & 1;
      idx[(std::size_t)k] = base[(std::size_t)k] + bit;
      w *= bit ? frac[(std::size_t)k] : 1.0 - frac[(std::size_t)k];
    }
    if (w != 0.0) acc += w * values_[(std::size_t)flat_index(idx)];
  }
  return acc;
}

void GridFunction::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("grid: cannot write " + path);
  out.write(kMagic, 4);
  auto w32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto w64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  auto wd = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  w32(kVersion);
  w32(static_cast<std::uint32_t>(dim()));
  for (int k = 0; k < dim(); ++k) w64(static_cast<std::uint64_t>(dims_[(std::size_t)k]));
  for (int k = 0; k < dim(); ++k) {
    wd(box_.lo[(std::size_t)k]);
    wd(box_.hi[(std::size_t)k]);
  }
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(values_.size() * sizeof(double)));
  if (!out) throw std::runtime_error("grid: short write to " + path);
}

GridFunction GridFunction::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("grid: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("grid: " + path + " is not a grid file");
  auto r32 = [&]() {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto r64 = [&]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  auto rd = [&]() {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  std::uint32_t version = r32();
  if (version != kVersion) throw std::runtime_error("grid: unsupported version in " + path);
  int n = static_cast<int>(r32());
  if (n < 1 || n > kMaxDim) throw std::runtime_error("grid: bad dimension in " + path);
  std::vector<int> dims((std::size_t)n);
  for (int k = 0; k < n; ++k) dims[(std::size_t)k] = static_cast<int>(r64());
  Box box;
  box.lo.resize((std::size_t)n);
  box.hi.resize((std::size_t)n);
  for (int k = 0; k < n; ++k) {
    box.lo[(std::size_t)k] = rd();
    box.hi[(std::size_t)k] = rd();
  }
  if (!in) throw std::runtime_error("grid: truncated header in " + path);
  GridFunction g(std::move(box), std::move(dims));
  in.read(reinterpret_cast<char*>(g.values().data()),
          static_cast<std::streamsize>(g.values().size() * sizeof(double)));
  if (!in) throw std::runtime_error("grid: truncated payload in " + path);
  return g;
}

void GridFunction::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("grid: cannot write " + path);
  out.precision(17);
  for (int k = 0; k < dim(); ++k) out << "x" << k + 1 << ",";
  out << "value\n";
  for (std::int64_t f = 0; f < total(); ++f) {
    auto x = node(f);
    for (double c : x) out << c << ",";
    out << values_[(std::size_t)f] << "\n";
  }
}

GridFunction make_grid(const Box& box, const std::vector<int>& res) {
  return GridFunction(box, res);
}

}  // namespace wex
