#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace kflow {

enum class ModelKind { periodic_torus, radial_plane };

const char* to_string(ModelKind kind);

/// Node layout of a model. Torus grids carry one real axis per real coordinate,
/// ordered (x1, y1, x2, y2) with the last axis fastest; radial grids carry a
/// single uniform axis in s = log r^2 including both end points.
struct Grid {
  ModelKind kind = ModelKind::periodic_torus;
  int n = 1;                      ///< complex dimension
  std::vector<int> dims;          ///< node count per real axis
  std::vector<double> spacing;    ///< h per real axis
  double s_min = 0.0;             ///< radial only
  double s_max = 0.0;             ///< radial only

  static Grid torus(int n, std::vector<int> dims);
  static Grid radial(int n, int count, double s_min, double s_max);

  std::size_t size() const;
  int axes() const { return static_cast<int>(dims.size()); }
  double min_spacing() const;
  /// Volume of one grid cell in coordinate measure (torus only).
  double cell_volume() const;
  /// Stride of an axis in the row-major node numbering.
  std::size_t stride(int axis) const;
  /// Radial coordinate s of node i.
  double s(std::size_t i) const;
  /// Coordinate of `node` along `axis` (torus: i*h on [0, 2pi); radial: s).
  double coordinate(std::size_t node, int axis) const;

  bool operator==(const Grid& other) const = default;
};

using GridPtr = std::shared_ptr<const Grid>;

/// One real value per node.
class GridField {
 public:
  GridField() = default;
  explicit GridField(GridPtr grid, double value = 0.0);
  GridField(GridPtr grid, std::vector<double> values);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

  bool same_shape(const GridField& other) const;
  /// Throws ShapeError when `grid` does not describe this field.
  void require_grid(const Grid& grid, const char* what) const;

  GridField& operator+=(const GridField& other);
  GridField& operator-=(const GridField& other);
  GridField& operator*=(double a);
  /// this += a * other
  GridField& axpy(double a, const GridField& other);

  double max_abs() const;
  double min() const;
  double max() const;
  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(double a, GridField b);

/// Storage layout of a Hermitian (1,1) form at one node.
enum class FormLayout {
  scalar,       ///< torus n = 1: the single real entry a_{1 1bar}
  full2,        ///< torus n = 2: a11, a22, Re a12, Im a12
  radial_pair,  ///< radial: (lambda_perp with multiplicity n-1, lambda_rad)
};

FormLayout layout_for(const Grid& grid);
int components(FormLayout layout);

/// One n x n Hermitian matrix per node, packed by FormLayout. Every layout is
/// linear in its packed components, so sums and scalings act componentwise.
class HermitianField {
 public:
  HermitianField() = default;
  explicit HermitianField(GridPtr grid);

  const GridPtr& grid() const { return grid_; }
  FormLayout layout() const { return layout_; }
  int n() const { return grid_->n; }
  int components() const { return comps_; }
  std::size_t nodes() const { return data_.size() / static_cast<std::size_t>(comps_); }

  double* at(std::size_t node) { return data_.data() + node * comps_; }
  const double* at(std::size_t node) const { return data_.data() + node * comps_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Identity form (the flat metric) at every node.
  static HermitianField identity(GridPtr grid);
  /// c times identity.
  static HermitianField scalar(GridPtr grid, double c);

  bool same_shape(const HermitianField& other) const;
  void require_shape(const HermitianField& other, const char* what) const;

  HermitianField& operator+=(const HermitianField& other);
  HermitianField& operator-=(const HermitianField& other);
  HermitianField& operator*=(double a);
  HermitianField& axpy(double a, const HermitianField& other);

  double max_abs_component() const;

 private:
  GridPtr grid_;
  FormLayout layout_ = FormLayout::scalar;
  int comps_ = 1;
  std::vector<double> data_;
};

HermitianField operator+(HermitianField a, const HermitianField& b);
HermitianField operator-(HermitianField a, const HermitianField& b);
HermitianField operator*(double a, HermitianField b);

/// Node-wise algebra on packed forms. `n` is the complex dimension (only used
/// for the multiplicity of lambda_perp in the radial layout).
namespace node {

double det(FormLayout layout, int n, const double* a);
/// Smallest eigenvalue against the identity.
double min_eigenvalue(FormLayout layout, int n, const double* a);
/// tr(g^{-1} a), i.e. g^{i jbar} a_{i jbar}.
double trace_inverse(FormLayout layout, int n, const double* g, const double* a);
/// tr(g^{-1} a g^{-1} a), the squared g-norm of a.
double norm_sq(FormLayout layout, int n, const double* g, const double* a);
/// Smallest and largest eigenvalue of b^{-1} a.
void generalized_range(FormLayout layout, int n, const double* a, const double* b,
                       double& lo, double& hi);

}  // namespace node

}  // namespace kflow
