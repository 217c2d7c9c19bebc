#pragma once

#include <Eigen/Dense>

#include <vector>

namespace mdual {

/// Uniform axis-aligned box grid on [0, L_1] x ... x [0, L_d]. Cells are
/// numbered with the first axis fastest.
class Grid {
 public:
  Grid() = default;
  Grid(std::vector<int> extents, std::vector<double> lengths, bool periodic = true);

  /// One-dimensional grid of `cells` cells on [0, length].
  static Grid line(int cells, double length = 1.0, bool periodic = true);

  int dim() const { return static_cast<int>(extents_.size()); }
  int cell_count() const { return count_; }
  const std::vector<int>& extents() const { return extents_; }
  const std::vector<double>& lengths() const { return lengths_; }
  bool periodic() const { return periodic_; }

  double spacing(int axis) const { return lengths_[axis] / extents_[axis]; }
  /// Smallest cell width over all axes.
  double cell_width() const;
  double cell_volume() const { return volume_; }
  double domain_volume() const { return volume_ * count_; }

  std::vector<int> coords(int cell) const;
  int index(const std::vector<int>& coords) const;
  Eigen::VectorXd center(int cell) const;
  /// Signed integer offset from `a` to `b` along `axis`, using the minimal
  /// image on periodic grids.
  int offset(int a, int b, int axis) const;
  /// Euclidean distance between cell centers (minimal image when periodic).
  /// Computed from integer offsets, so neighbours are exactly one spacing apart.
  double distance(int a, int b) const;

  bool operator==(const Grid& other) const;

 private:
  std::vector<int> extents_;
  std::vector<double> lengths_;
  bool periodic_ = true;
  int count_ = 0;
  double volume_ = 0.0;
};

}  // namespace mdual
