#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wex {

struct Box {
  std::vector<double> lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
};

// Scalar samples on a regular grid over a box, row-major with the last axis
// fastest.  Axis k has dims[k] >= 2 nodes, node 0 at lo[k], the last at hi[k].
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Box box, std::vector<int> dims);

  static constexpr int kMaxDim = 4;
  static constexpr std::int64_t kMaxValues = int64_t(1) << 24;

  int dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  const std::vector<int>& dims() const { return dims_; }
  double spacing(int axis) const { return spacing_[(std::size_t)axis]; }
  double max_spacing() const;
  std::int64_t total() const { return static_cast<std::int64_t>(values_.size()); }

  double& operator[](std::int64_t flat) { return values_[(std::size_t)flat]; }
  double operator[](std::int64_t flat) const { return values_[(std::size_t)flat]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  std::int64_t flat_index(std::span<const int> idx) const;
  std::vector<int> unflatten(std::int64_t flat) const;
  double coord(int axis, int i) const { return box_.lo[(std::size_t)axis] + spacing_[(std::size_t)axis] * i; }
  std::vector<double> node(std::int64_t flat) const;
  bool same_layout(const GridFunction& other) const;
  bool contains(std::span<const double> x) const;

  // Multilinear interpolation; x must lie inside the box.
  double interpolate(std::span<const double> x) const;

  // Binary format shared across tools: magic, version, dims, box, row-major
  // float64 payload.
  void save(const std::string& path) const;
  static GridFunction load(const std::string& path);
  // CSV: one row per node, "x1,..,xn,value".
  void save_csv(const std::string& path) const;

 private:
  Box box_;
  std::vector<int> dims_;
  std::vector<double> spacing_;
  std::vector<double> values_;
};

// Uniform grid over `box` with `res` nodes per axis.
GridFunction make_grid(const Box& box, const std::vector<int>& res);

}  // namespace wex
