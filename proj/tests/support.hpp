#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "kflow/run.hpp"

namespace kflow::testing {

inline constexpr double kPi = std::numbers::pi;

inline std::shared_ptr<const ModelGeometry> torus(int n, int resolution, const CoordFn& psi = {}) {
  return std::make_shared<const ModelGeometry>(ModelGeometry::torus(n, resolution, psi));
}

inline std::shared_ptr<const ModelGeometry> radial(int n, int count, double s_min, double s_max,
                                                   RadialProfile profile = RadialProfile::flat()) {
  return std::make_shared<const ModelGeometry>(
      ModelGeometry::radial(n, count, s_min, s_max, std::move(profile)));
}

/// Node of the n = 1 torus with x index i and y index j.
inline std::size_t node1(const Grid& g, int i, int j = 0) {
  return static_cast<std::size_t>(i) * g.stride(0) + static_cast<std::size_t>(j) * g.stride(1);
}

/// Factor (2 - 2 cos kh) / (k h)^2 by which the centered second difference
/// scales the second derivative of a mode with wave number k.
inline double second_difference_symbol(double h, double k = 1.0) {
  return (2.0 - 2.0 * std::cos(k * h)) / (k * k * h * h);
}

/// Manufactured forcing f0 = log det(g0 + ddbar phi) - log det g0 on the torus.
struct Manufactured {
  std::shared_ptr<const ModelGeometry> model;
  HermitianField g1;
  GridField f0;
  Problem problem;
};

inline Manufactured manufactured(int resolution, double amplitude = 0.1) {
  Manufactured m;
  m.model = torus(1, resolution);
  const GridField phi =
      m.model->sample([amplitude](const double* x) { return amplitude * std::cos(x[0]); });
  m.g1 = m.model->g0() + complex_hessian(phi, *m.model);
  m.f0 = log_det(m.g1);
  m.f0 -= m.model->log_det_g0();
  m.problem = make_problem(m.model, make_schedule(ScheduleKind::constant, *m.model),
                           Forcing::fixed(m.f0));
  return m;
}

/// Smooth random periodic field: a few low modes with random amplitudes.
inline GridField random_trig(const ModelGeometry& model, std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  const int axes = model.grid()->axes();
  struct Mode {
    std::vector<int> k;
    double a, b;
  };
  std::vector<Mode> modes;
  for (int m = 0; m < 4; ++m) {
    Mode md;
    for (int a = 0; a < axes; ++a) md.k.push_back(static_cast<int>(rng() % 3));
    md.a = u(rng);
    md.b = u(rng);
    modes.push_back(md);
  }
  return model.sample([modes, axes](const double* x) {
    double out = 0.0;
    for (const auto& m : modes) {
      double ph = 0.0;
      for (int a = 0; a < axes; ++a) ph += m.k[static_cast<std::size_t>(a)] * x[a];
      out += m.a * std::cos(ph) + m.b * std::sin(ph);
    }
    return out;
  });
}

}  // namespace kflow::testing
