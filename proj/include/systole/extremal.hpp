#pragma once

// Metrics on T^2 = [0,1)^2 for which the projection (u, v) -> l u onto the
// circle R / lZ is a Riemannian submersion with minimal (geodesic) fibers.
//
// Inputs are a fiber density rho(u, v) (fiber metric rho^2 dv^2) whose
// fiber lengths do not depend on u, and a free function c(u).  The
// horizontal field du + h dv is chosen so that its flow carries the fiber
// volume forms into each other:
//
//     d_u rho + d_v (rho h) = 0,
//
// solved fiberwise by h = (c(u) - int_0^v d_u rho) / rho.  The metric then
// makes the horizontal field orthogonal to the fibers with length l.

#include <functional>
#include <vector>

#include "systole/hodge.hpp"

namespace systole {

class FiberFamily {
 public:
  /// Samples rho at u_i = i/M, v_j = j/K.  Domain error if rho <= 0 anywhere.
  FiberFamily(double base_length, int base_res, int fiber_res, const ScalarField& rho);
  FiberFamily(double base_length, int base_res, int fiber_res, std::vector<double> rho);

  double base_length() const noexcept { return base_length_; }
  int base_res() const noexcept { return m_; }
  int fiber_res() const noexcept { return k_; }
  double rho(int i, int j) const { return rho_[static_cast<std::size_t>(i) * k_ + j]; }
  const std::vector<double>& rho() const noexcept { return rho_; }

  /// Periodic trapezoidal integral of rho over fiber i.
  double fiber_length(int i) const;

 private:
  double base_length_;
  int m_, k_;
  std::vector<double> rho_;
};

struct FiberValidation {
  bool ok = false;
  double fiber_volume = 0.0;
  int worst_column = 0;
  double worst_deviation = 0.0;
};

inline constexpr double kFiberVolumeTolerance = 1e-10;

/// ok iff every fiber length matches fiber_volume within 1e-10.
FiberValidation validate_fiber_family(const FiberFamily& family, double fiber_volume);
/// Same, against the length of fiber 0.
FiberValidation validate_fiber_family(const FiberFamily& family);

struct HorizontalLift {
  std::vector<double> h;  // M x K, row-major like rho
  std::vector<double> c;  // M
  double residual = 0.0;  // max |d_u rho + d_v(rho h)| on the grid
};

inline constexpr double kLiftResidualTolerance = 1e-8;

/// Spectral in both directions.  Precondition error if the family fails
/// validation; Numerical error if the residual exceeds 1e-8.
HorizontalLift moser_lift(const FiberFamily& family, const std::function<double(double)>& c);
/// h = 0: not volume preserving unless rho is independent of u.  Used as a
/// negative control; skips validation.
HorizontalLift zero_lift(const FiberFamily& family);

/// max |d_u rho + d_v(rho h)|, spectral derivatives.
double lift_residual(const FiberFamily& family, const std::vector<double>& h);

class ConstructedMetric {
 public:
  ConstructedMetric(const FiberFamily& family, const HorizontalLift& lift);
  /// Direct grid metric, e.g. for negative controls.
  ConstructedMetric(double base_length, int m, int k, std::vector<FaceMetric> cells);

  double base_length() const noexcept { return base_length_; }
  int base_res() const noexcept { return m_; }
  int fiber_res() const noexcept { return k_; }
  const FaceMetric& cell(int i, int j) const { return cells_[static_cast<std::size_t>(i) * k_ + j]; }
  FaceMetric& cell(int i, int j) { return cells_[static_cast<std::size_t>(i) * k_ + j]; }

  /// Bilinear periodic interpolation.  Metrics assembled from (rho, h)
  /// interpolate rho and h and reapply the assembly formulas, so g^{uu} =
  /// 1/l^2 holds exactly off the grid too.
  FaceMetric at(double u, double v) const;

  /// Mesh of [0,1)^2 with deck lattice diag(1,1) carrying this metric.
  TorusMesh to_mesh(int n) const;

 private:
  double base_length_;
  int m_, k_;
  std::vector<FaceMetric> cells_;
  std::vector<double> rho_, h_;  // empty for direct grid metrics
};

/// g_vv = rho^2, g_uv = -h rho^2, g_uu = l^2 + h^2 rho^2.
FaceMetric assemble_cell(double base_length, double rho, double h);
ConstructedMetric assemble_metric(const FiberFamily& family, const HorizontalLift& lift);

struct SubmersionCheck {
  bool pass = false;
  double max_deviation = 0.0;  // max | |du|_g - 1/l |
};

inline constexpr double kSubmersionTolerance = 1e-9;

SubmersionCheck check_submersion(const ConstructedMetric& metric);

/// tol(M, K) = kMinimalFiberConstant (1/M^2 + 1/K^2).
inline constexpr double kMinimalFiberConstant = 100.0;
double minimal_fiber_tolerance(int m, int k);

struct MinimalFiberCheck {
  bool pass = false;
  double residual = 0.0;  // max geodesic curvature of the fibers u = const
  double tolerance = 0.0;
};

/// Geodesic curvature of each fiber from Christoffel symbols built with
/// periodic central differences.
MinimalFiberCheck check_minimal_fibers(const ConstructedMetric& metric);

inline constexpr int kHarmonicCheckResolution = 64;
inline constexpr double kHarmonicNormTolerance = 1e-3;

struct HarmonicNormCheck {
  bool pass = false;
  double deviation = 0.0;
  double mean_norm = 0.0;  // expected 1/l for submersions
};

/// Harmonic representative of the base class (1, 0) on a mesh carrying the
/// metric, then the constant-norm test.
HarmonicNormCheck check_harmonic_constant_norm(const ConstructedMetric& metric,
                                               int n = kHarmonicCheckResolution,
                                               double tol = kHarmonicNormTolerance);

struct HebdaToyReport {
  double base_systole = 0.0;   // shortest loop over classes (1, k)
  double fiber_systole = 0.0;  // shortest loop in class (0, 1)
  double volume = 0.0;
  double ratio = 0.0;  // base * fiber / volume
};

inline constexpr int kHebdaStencil = 3;

/// Discrete pipeline: mesh at resolution n, lifted-graph shortest loops and
/// the face-area sum.
HebdaToyReport hebda_equality(const ConstructedMetric& metric, int n = kHarmonicCheckResolution,
                              int stencil = kHebdaStencil);

/// Spectral derivative / zero-mean antiderivative of a periodic sample on [0,1).
std::vector<double> spectral_derivative(const std::vector<double>& f);
std::vector<double> spectral_antiderivative(const std::vector<double>& f);

}  // namespace systole
