#include "kflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "kflow/error.hpp"

namespace kflow {

const char* to_string(ModelKind kind) {
  return kind == ModelKind::periodic_torus ? "periodic_torus" : "radial_plane";
}

Grid Grid::torus(int n, std::vector<int> dims) {
  if (n != 1 && n != 2) throw InvalidArgument("torus grids support n = 1 or n = 2");
  if (static_cast<int>(dims.size()) != 2 * n)
    throw InvalidArgument("torus grid needs one node count per real axis");
  Grid g;
  g.kind = ModelKind::periodic_torus;
  g.n = n;
  for (int d : dims) {
    if (d < 3) throw InvalidArgument("torus axes need at least 3 nodes");
    g.spacing.push_back(2.0 * std::numbers::pi / d);
  }
  g.dims = std::move(dims);
  return g;
}

Grid Grid::radial(int n, int count, double s_min, double s_max) {
  if (n < 2) throw InvalidArgument("radial model requires n >= 2");
  if (count < 5) throw InvalidArgument("radial grid needs at least 5 nodes");
  if (!(s_min < s_max)) throw InvalidArgument("radial grid requires s_min < s_max");
  Grid g;
  g.kind = ModelKind::radial_plane;
  g.n = n;
  g.dims = {count};
  g.spacing = {(s_max - s_min) / (count - 1)};
  g.s_min = s_min;
  g.s_max = s_max;
  return g;
}

std::size_t Grid::size() const {
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  return total;
}

double Grid::min_spacing() const { return *std::min_element(spacing.begin(), spacing.end()); }

double Grid::cell_volume() const {
  double v = 1.0;
  for (double h : spacing) v *= h;
  return v;
}

std::size_t Grid::stride(int axis) const {
  std::size_t s = 1;
  for (int a = axes() - 1; a > axis; --a) s *= static_cast<std::size_t>(dims[a]);
  return s;
}

double Grid::s(std::size_t i) const {
  if (i + 1 == static_cast<std::size_t>(dims[0])) return s_max;
  return s_min + static_cast<double>(i) * spacing[0];
}

double Grid::coordinate(std::size_t node, int axis) const {
  if (kind == ModelKind::radial_plane) return s(node);
  const std::size_t idx = (node / stride(axis)) % static_cast<std::size_t>(dims[axis]);
  return static_cast<double>(idx) * spacing[axis];
}

// ---------------------------------------------------------------------------

GridField::GridField(GridPtr grid, double value)
    : grid_(std::move(grid)), values_(grid_->size(), value) {}

GridField::GridField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size())
    throw ShapeError("field has " + std::to_string(values_.size()) + " values, grid has " +
                     std::to_string(grid_->size()) + " nodes");
}

bool GridField::same_shape(const GridField& other) const {
  if (!grid_ || !other.grid_) return false;
  return grid_ == other.grid_ || *grid_ == *other.grid_;
}

void GridField::require_grid(const Grid& grid, const char* what) const {
  if (!grid_ || !(*grid_ == grid))
    throw ShapeError(std::string(what) + ": field is not shaped for this model");
}

GridField& GridField::operator+=(const GridField& other) { return axpy(1.0, other); }
GridField& GridField::operator-=(const GridField& other) { return axpy(-1.0, other); }

GridField& GridField::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

GridField& GridField::axpy(double a, const GridField& other) {
  if (!same_shape(other)) throw ShapeError("grid field shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * other.values_[i];
  return *this;
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool GridField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(double a, GridField b) { return b *= a; }

// ---------------------------------------------------------------------------

FormLayout layout_for(const Grid& grid) {
  if (grid.kind == ModelKind::radial_plane) return FormLayout::radial_pair;
  return grid.n == 1 ? FormLayout::scalar : FormLayout::full2;
}

int components(FormLayout layout) {
  switch (layout) {
    case FormLayout::scalar: return 1;
    case FormLayout::full2: return 4;
    case FormLayout::radial_pair: return 2;
  }
  return 0;
}

HermitianField::HermitianField(GridPtr grid)
    : grid_(std::move(grid)),
      layout_(layout_for(*grid_)),
      comps_(kflow::components(layout_)),
      data_(grid_->size() * static_cast<std::size_t>(comps_), 0.0) {}

HermitianField HermitianField::identity(GridPtr grid) { return scalar(std::move(grid), 1.0); }

HermitianField HermitianField::scalar(GridPtr grid, double c) {
  HermitianField f(std::move(grid));
  for (std::size_t i = 0; i < f.nodes(); ++i) {
    double* a = f.at(i);
    switch (f.layout_) {
      case FormLayout::scalar: a[0] = c; break;
      case FormLayout::full2: a[0] = c; a[1] = c; break;
      case FormLayout::radial_pair: a[0] = c; a[1] = c; break;
    }
  }
  return f;
}

bool HermitianField::same_shape(const HermitianField& other) const {
  if (!grid_ || !other.grid_) return false;
  return grid_ == other.grid_ || *grid_ == *other.grid_;
}

void HermitianField::require_shape(const HermitianField& other, const char* what) const {
  if (!same_shape(other)) throw ShapeError(std::string(what) + ": form shape mismatch");
}

HermitianField& HermitianField::operator+=(const HermitianField& other) { return axpy(1.0, other); }
HermitianField& HermitianField::operator-=(const HermitianField& other) {
  return axpy(-1.0, other);
}

HermitianField& HermitianField::operator*=(double a) {
  for (double& v : data_) v *= a;
  return *this;
}

HermitianField& HermitianField::axpy(double a, const HermitianField& other) {
  require_shape(other, "axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * other.data_[i];
  return *this;
}

double HermitianField::max_abs_component() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

HermitianField operator+(HermitianField a, const HermitianField& b) { return a += b; }
HermitianField operator-(HermitianField a, const HermitianField& b) { return a -= b; }
HermitianField operator*(double a, HermitianField b) { return b *= a; }

// ---------------------------------------------------------------------------

namespace node {

namespace {

Eigen::Matrix2cd full2_matrix(const double* a) {
  Eigen::Matrix2cd m;
  m(0, 0) = a[0];
  m(1, 1) = a[1];
  m(0, 1) = std::complex<double>(a[2], a[3]);
  m(1, 0) = std::complex<double>(a[2], -a[3]);
  return m;
}

}  // namespace

double det(FormLayout layout, int n, const double* a) {
  switch (layout) {
    case FormLayout::scalar: return a[0];
    case FormLayout::full2: return a[0] * a[1] - (a[2] * a[2] + a[3] * a[3]);
    case FormLayout::radial_pair: return std::pow(a[0], n - 1) * a[1];
  }
  return 0.0;
}

double min_eigenvalue(FormLayout layout, int n, const double* a) {
  switch (layout) {
    case FormLayout::scalar: return a[0];
    case FormLayout::full2: {
      const double half_tr = 0.5 * (a[0] + a[1]);
      const double half_gap = std::hypot(0.5 * (a[0] - a[1]), std::hypot(a[2], a[3]));
      return half_tr - half_gap;
    }
    case FormLayout::radial_pair: return n > 1 ? std::min(a[0], a[1]) : a[1];
  }
  return 0.0;
}

double trace_inverse(FormLayout layout, int n, const double* g, const double* a) {
  switch (layout) {
    case FormLayout::scalar: return a[0] / g[0];
    case FormLayout::full2: {
      const double d = det(layout, n, g);
      return (g[1] * a[0] + g[0] * a[1] - 2.0 * (g[2] * a[2] + g[3] * a[3])) / d;
    }
    case FormLayout::radial_pair: return (n - 1) * a[0] / g[0] + a[1] / g[1];
  }
  return 0.0;
}

double norm_sq(FormLayout layout, int n, const double* g, const double* a) {
  switch (layout) {
    case FormLayout::scalar: {
      const double r = a[0] / g[0];
      return r * r;
    }
    case FormLayout::full2: {
      const Eigen::Matrix2cd gi = full2_matrix(g).inverse();
      const Eigen::Matrix2cd m = gi * full2_matrix(a);
      return (m * m).trace().real();
    }
    case FormLayout::radial_pair: {
      const double p = a[0] / g[0];
      const double r = a[1] / g[1];
      return (n - 1) * p * p + r * r;
    }
  }
  return 0.0;
}

void generalized_range(FormLayout layout, int n, const double* a, const double* b, double& lo,
                       double& hi) {
  switch (layout) {
    case FormLayout::scalar:
      lo = hi = a[0] / b[0];
      return;
    case FormLayout::full2: {
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2cd> es(
          full2_matrix(a), full2_matrix(b), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
      lo = es.eigenvalues()(0);
      hi = es.eigenvalues()(1);
      return;
    }
    case FormLayout::radial_pair: {
      const double r = a[1] / b[1];
      if (n > 1) {
        const double p = a[0] / b[0];
        lo = std::min(p, r);
        hi = std::max(p, r);
      } else {
        lo = hi = r;
      }
      return;
    }
  }
}

}  // namespace node

}  // namespace kflow
