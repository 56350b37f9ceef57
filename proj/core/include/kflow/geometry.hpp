#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "kflow/grid.hpp"

namespace kflow {

/// Metric eigenvalues below this are treated as degenerate.
inline constexpr double kPositivityFloor = 1e-10;

/// Radial Kahler potential P0(s) of the background metric, sampled with its
/// first two s-derivatives. The metric eigenvalues are e^{-s}P0' (multiplicity
/// n-1) and e^{-s}P0''.
struct RadialProfile {
  std::string name;
  std::function<double(double)> p;
  std::function<double(double)> dp;
  std::function<double(double)> d2p;

  /// P0 = e^s, the flat metric of C^n.
  static RadialProfile flat();
  /// P0 = e^s + (a/k) log(1 + e^{k(s - center)}): flat plus a bump of
  /// positive curvature near r^2 = e^center. For k >= 2 the curvature
  /// vanishes at the origin.
  static RadialProfile log_bump(double a, double center = 0.0, int order = 1);
  /// P0 = log(1 + e^s): Fubini-Study on the affine chart.
  static RadialProfile fubini_study();
  /// Lookup by name ("flat", "log_bump", "fubini_study"); `param`, `center`
  /// and `order` configure log_bump.
  static RadialProfile named(const std::string& name, double param = 0.0, double center = 0.0,
                             int order = 1);
};

/// Function of the node coordinates (torus: (x1, y1, ...); radial: s).
using CoordFn = std::function<double(const double*)>;

/// Globally coordinatized model geometry carrying the background metric g0.
class ModelGeometry {
 public:
  /// Periodic torus (R^2/2piZ^2)^n with g0 = I + ddbar psi. An empty psi means flat.
  static ModelGeometry torus(int n, int resolution, const CoordFn& psi = {});
  static ModelGeometry torus(int n, std::vector<int> dims, const CoordFn& psi = {});
  /// Radial model on s in [s_min, s_max].
  static ModelGeometry radial(int n, int count, double s_min, double s_max,
                              RadialProfile profile = RadialProfile::flat());

  ModelKind kind() const { return grid_->kind; }
  int n() const { return grid_->n; }
  const GridPtr& grid() const { return grid_; }
  const HermitianField& g0() const { return g0_; }
  const GridField& log_det_g0() const { return log_det_g0_; }
  /// Torus background perturbation (zero field when flat).
  const GridField& psi() const { return psi_; }
  /// Sampled P0, P0', P0'' (radial only).
  const GridField& p0() const { return p0_; }
  const GridField& dp0() const { return dp0_; }
  const GridField& d2p0() const { return d2p0_; }
  const std::string& profile_name() const { return profile_; }
  /// Equivalence bounds (kappa1, kappa2) of g0 against the Euclidean metric.
  std::pair<double, double> equivalence_to_euclidean() const { return kappa_; }

  GridField sample(const CoordFn& fn) const;
  GridField zeros() const { return GridField(grid_); }

 private:
  explicit ModelGeometry(GridPtr grid);

  GridPtr grid_;
  HermitianField g0_;
  GridField log_det_g0_;
  GridField psi_;
  GridField p0_, dp0_, d2p0_;
  std::string profile_ = "flat";
  std::pair<double, double> kappa_{1.0, 1.0};
};

/// Node-wise log det of a form, failing below the positivity floor.
GridField log_det(const HermitianField& g, double time = std::numeric_limits<double>::quiet_NaN());
/// Throws DegenerateMetricError when any node is below `floor`.
void require_positive(const HermitianField& g, const char* what,
                      double time = std::numeric_limits<double>::quiet_NaN(),
                      double floor = kPositivityFloor);
/// Smallest eigenvalue over all nodes and the node attaining it.
std::pair<double, std::size_t> min_eigenvalue(const HermitianField& g);

/// Complex Hessian u_{i jbar}.
HermitianField complex_hessian(const GridField& u, const ModelGeometry& model);
/// Delta_g u = g^{i jbar} u_{i jbar}.
GridField laplacian(const GridField& u, const HermitianField& g, const ModelGeometry& model);
/// R_{i jbar} = -d_i d_jbar log det g.
HermitianField ricci_form(const HermitianField& g, const ModelGeometry& model);
/// Pointwise |Rm|_g (torus n = 1 or radial).
GridField curvature_norm(const HermitianField& g, const ModelGeometry& model);
/// rho >= 1, comparable to distance from the origin (radial); 1 on the torus.
GridField distance_like(const ModelGeometry& model);
/// Global extremes over nodes of the eigenvalues of B^{-1} A.
std::pair<double, double> eigen_range(const HermitianField& a, const HermitianField& b);
/// Node-wise |A|_g.
GridField form_norm(const HermitianField& a, const HermitianField& g);

/// d/ds with the radial stencils (centered inside, one-sided second order at the ends).
GridField radial_d1(const GridField& u);
GridField radial_d2(const GridField& u);

}  // namespace kflow
