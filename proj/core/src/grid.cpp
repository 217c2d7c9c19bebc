#include "mdual/grid.hpp"

#include <cmath>
#include <cstdlib>

#include "mdual/errors.hpp"

namespace mdual {

Grid::Grid(std::vector<int> extents, std::vector<double> lengths, bool periodic)
    : extents_(std::move(extents)), lengths_(std::move(lengths)), periodic_(periodic) {
  if (extents_.empty()) throw DomainError("grid needs at least one axis");
  if (extents_.size() != lengths_.size()) {
    throw DimensionMismatch("grid extents and lengths have different sizes");
  }
  count_ = 1;
  volume_ = 1.0;
  for (size_t k = 0; k < extents_.size(); ++k) {
    if (extents_[k] < 1) throw DomainError("grid extent must be positive");
    if (!(lengths_[k] > 0.0) || !std::isfinite(lengths_[k])) {
      throw DomainError("grid length must be positive and finite");
    }
    count_ *= extents_[k];
    volume_ *= lengths_[k] / extents_[k];
  }
}

Grid Grid::line(int cells, double length, bool periodic) {
  return Grid({cells}, {length}, periodic);
}

double Grid::cell_width() const {
  double h = spacing(0);
  for (int k = 1; k < dim(); ++k) h = std::min(h, spacing(k));
  return h;
}

std::vector<int> Grid::coords(int cell) const {
  std::vector<int> c(extents_.size());
  for (size_t k = 0; k < extents_.size(); ++k) {
    c[k] = cell % extents_[k];
    cell /= extents_[k];
  }
  return c;
}

int Grid::index(const std::vector<int>& coords) const {
  int flat = 0;
  int stride = 1;
  for (size_t k = 0; k < extents_.size(); ++k) {
    int c = coords[k];
    if (periodic_) c = ((c % extents_[k]) + extents_[k]) % extents_[k];
    if (c < 0 || c >= extents_[k]) throw DomainError("cell coordinate outside the grid");
    flat += c * stride;
    stride *= extents_[k];
  }
  return flat;
}

Eigen::VectorXd Grid::center(int cell) const {
  const auto c = coords(cell);
  Eigen::VectorXd x(dim());
  for (int k = 0; k < dim(); ++k) x[k] = (c[k] + 0.5) * spacing(k);
  return x;
}

int Grid::offset(int a, int b, int axis) const {
  int stride = 1;
  for (int k = 0; k < axis; ++k) stride *= extents_[k];
  const int n = extents_[axis];
  int d = (b / stride) % n - (a / stride) % n;
  if (periodic_) {
    if (d > n / 2) d -= n;
    if (d < -(n - 1) / 2) d += n;
  }
  return d;
}

double Grid::distance(int a, int b) const {
  double s = 0.0;
  for (int k = 0; k < dim(); ++k) {
    const double d = offset(a, b, k) * spacing(k);
    s += d * d;
  }
  return std::sqrt(s);
}

bool Grid::operator==(const Grid& other) const {
  return extents_ == other.extents_ && lengths_ == other.lengths_ &&
         periodic_ == other.periodic_;
}

}  // namespace mdual
