#pragma once

#include <optional>
#include <string>

#include "kflow/geometry.hpp"

namespace kflow {

enum class ScheduleKind { constant, krf_linear, interpolation };

const char* to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

/// sigma(t) = sigma(0) + t * slope. All three kinds are affine in t, so the
/// smallest eigenvalue is concave and the largest convex along the path;
/// checking the two endpoints certifies the whole interval.
class BackgroundPath {
 public:
  BackgroundPath() = default;
  BackgroundPath(ScheduleKind kind, HermitianField sigma0, HermitianField slope, double horizon);

  ScheduleKind kind() const { return kind_; }
  double horizon() const { return horizon_; }
  const HermitianField& sigma0() const { return sigma0_; }
  /// d sigma / dt (constant in t).
  const HermitianField& rate() const { return slope_; }
  HermitianField at(double t) const;
  /// Evaluates into `out` without allocating.
  void at(double t, HermitianField& out) const;
  bool is_static() const { return slope_.max_abs_component() == 0.0; }

  /// c >= 1 with c^{-1} g0 <= sigma(t) <= c g0 on [0, horizon].
  double realized_c() const { return c_; }
  /// Throws DegenerateMetricError when sigma fails positivity on [0, horizon]
  /// (or only at t = 0 when `include_end` is false).
  void validate(const HermitianField& g0, bool include_end = true);

 private:
  ScheduleKind kind_ = ScheduleKind::constant;
  HermitianField sigma0_;
  HermitianField slope_;
  double horizon_ = 0.0;
  double c_ = 1.0;
};

struct ScheduleParams {
  /// Horizon T. For krf_linear and interpolation it bounds the positivity check.
  double horizon = 1.0;
  /// Starting form; defaults to g0.
  std::optional<HermitianField> sigma0;
  /// End form sigma(T) (interpolation only).
  std::optional<HermitianField> sigma_end;
  /// Require positivity at T as well as at 0. Off when a barrier gauge is
  /// applied afterwards to restore positivity.
  bool check_end = true;
};

/// constant: sigma = sigma0. krf_linear: sigma0 - t Ric(g0). interpolation:
/// ((T - t) sigma0 + t sigma_end) / T.
BackgroundPath make_schedule(ScheduleKind kind, const ModelGeometry& model,
                             const ScheduleParams& params = {});

struct DecayParams {
  double c1 = 0.0;
  double eps = 1.0;
};

/// f(t) = f0 + t f1.
struct Forcing {
  GridField f0;
  GridField f1;
  std::optional<DecayParams> decay;

  static Forcing zero(const ModelGeometry& model);
  static Forcing fixed(GridField f0);
  GridField at(double t) const;
  bool is_static() const { return f1.max_abs() == 0.0; }
};

/// f0 = C1 / (1 + rho^{2+eps}).
Forcing forcing_profile(double c1, double eps, const ModelGeometry& model);
/// max over nodes of |f0| (1 + rho^{2+eps}); equals C1 for forcing_profile output.
double decay_certificate(const Forcing& forcing, const ModelGeometry& model);

struct PrescribedForm {
  HermitianField omega;
  std::string provenance;
};

/// Omega = Ric(g0) - ddbar f0.
PrescribedForm prescribed_from_forcing(const ModelGeometry& model, const GridField& f0);
/// sup |Ric(g0) - Omega - ddbar f0|.
double prescribed_consistency(const ModelGeometry& model, const PrescribedForm& omega,
                              const GridField& f0);

/// Inverts ddbar on an exact form. Torus: zero-mean potential through discrete
/// Fourier inversion of the trace. Radial: potential vanishing at s_max.
/// Throws CompatibilityError naming the violated residual.
GridField potential_from_form(const HermitianField& form, const ModelGeometry& model,
                              double tol = 1e-8);

/// Time-affine potential shift q(t) = offset + t * rate. A problem rewritten by
/// a gauge has solutions v_new = v_old - q(t) with the same metric.
struct GaugeShift {
  GridField offset;
  GridField rate;
  GridField at(double t) const;
};

struct GaugedData {
  BackgroundPath path;
  Forcing forcing;
  GaugeShift shift;
};

/// Absorbs initial data u and static forcing into the background:
/// sigma~ = sigma + ddbar(u - t f0), forcing 0, v~ = v - u + t f0.
GaugedData normalize_initial_data(const BackgroundPath& path, const Forcing& forcing,
                                  const GridField& u, const ModelGeometry& model);

}  // namespace kflow
