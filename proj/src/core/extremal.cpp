#include "systole/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "systole/error.hpp"

namespace systole {

namespace {

using Complex = std::complex<double>;

// Signed wavenumber of DFT bin m; the Nyquist bin of an even grid maps to 0
// so derivatives of real data stay real.
double wavenumber(int m, int n) {
  if (2 * m == n) return 0.0;
  return m <= n / 2 ? m : m - n;
}

template <class Scale>
std::vector<double> spectral_apply(const std::vector<double>& f, Scale scale) {
  const int n = static_cast<int>(f.size());
  Eigen::FFT<double> fft;
  std::vector<Complex> in(f.begin(), f.end()), spec, back;
  fft.fwd(spec, in);
  for (int m = 0; m < n; ++m) spec[m] *= scale(wavenumber(m, n));
  fft.inv(back, spec);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = back[i].real();
  return out;
}

}  // namespace

std::vector<double> spectral_derivative(const std::vector<double>& f) {
  return spectral_apply(f, [](double k) { return Complex(0.0, 2.0 * std::numbers::pi * k); });
}

std::vector<double> spectral_antiderivative(const std::vector<double>& f) {
  auto out = spectral_apply(f, [](double k) {
    return k == 0.0 ? Complex(0.0) : 1.0 / Complex(0.0, 2.0 * std::numbers::pi * k);
  });
  const double at0 = out.front();
  for (auto& x : out) x -= at0;
  return out;
}

// ---------------------------------------------------------------------------

FiberFamily::FiberFamily(double base_length, int base_res, int fiber_res, std::vector<double> rho)
    : base_length_(base_length), m_(base_res), k_(fiber_res), rho_(std::move(rho)) {
  if (!(base_length > 0.0)) fail(ErrorCode::Domain, "base length must be positive");
  if (m_ < 4 || k_ < 4) fail(ErrorCode::Resolution, "fiber family grid must be at least 4x4");
  if (rho_.size() != static_cast<std::size_t>(m_) * k_)
    fail(ErrorCode::InvalidArgument, "density grid has wrong size");
  for (double r : rho_)
    if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::Domain, "fiber density must be positive");
}

namespace {
std::vector<double> sample(int m, int k, const ScalarField& f) {
  std::vector<double> out(static_cast<std::size_t>(m) * k);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) out[static_cast<std::size_t>(i) * k + j] = f(double(i) / m, double(j) / k);
  return out;
}
}  // namespace

FiberFamily::FiberFamily(double base_length, int base_res, int fiber_res, const ScalarField& rho)
    : FiberFamily(base_length, base_res, fiber_res, sample(base_res, fiber_res, rho)) {}

double FiberFamily::fiber_length(int i) const {
  double s = 0.0;
  for (int j = 0; j < k_; ++j) s += rho(i, j);
  return s / k_;
}

FiberValidation validate_fiber_family(const FiberFamily& family, double fiber_volume) {
  FiberValidation out;
  out.fiber_volume = fiber_volume;
  for (int i = 0; i < family.base_res(); ++i) {
    const double dev = std::abs(family.fiber_length(i) - fiber_volume);
    if (dev > out.worst_deviation) {
      out.worst_deviation = dev;
      out.worst_column = i;
    }
  }
  out.ok = out.worst_deviation <= kFiberVolumeTolerance;
  return out;
}

FiberValidation validate_fiber_family(const FiberFamily& family) {
  return validate_fiber_family(family, family.fiber_length(0));
}

// ---------------------------------------------------------------------------

namespace {

// d_u rho on the grid, spectral along u for every fixed v_j.
std::vector<double> du_rho(const FiberFamily& family) {
  const int m = family.base_res(), k = family.fiber_res();
  std::vector<double> out(static_cast<std::size_t>(m) * k);
  std::vector<double> column(m);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < m; ++i) column[i] = family.rho(i, j);
    const auto d = spectral_derivative(column);
    for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i) * k + j] = d[i];
  }
  return out;
}

}  // namespace

double lift_residual(const FiberFamily& family, const std::vector<double>& h) {
  const int m = family.base_res(), k = family.fiber_res();
  const auto du = du_rho(family);
  double worst = 0.0;
  std::vector<double> flux(k);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) flux[j] = family.rho(i, j) * h[static_cast<std::size_t>(i) * k + j];
    const auto dv = spectral_derivative(flux);
    for (int j = 0; j < k; ++j)
      worst = std::max(worst, std::abs(du[static_cast<std::size_t>(i) * k + j] + dv[j]));
  }
  return worst;
}

HorizontalLift moser_lift(const FiberFamily& family, const std::function<double(double)>& c) {
  const FiberValidation v = validate_fiber_family(family);
  if (!v.ok) {
    std::ostringstream os;
    os << "fiber family fails the constant fiber-volume constraint (column " << v.worst_column
       << " deviates by " << v.worst_deviation << "); the lift would not be periodic";
    fail(ErrorCode::Precondition, os.str());
  }
  const int m = family.base_res(), k = family.fiber_res();
  const auto du = du_rho(family);
  HorizontalLift lift;
  lift.h.resize(static_cast<std::size_t>(m) * k);
  lift.c.resize(m);
  std::vector<double> fiber(k);
  for (int i = 0; i < m; ++i) {
    lift.c[i] = c(double(i) / m);
    for (int j = 0; j < k; ++j) fiber[j] = du[static_cast<std::size_t>(i) * k + j];
    const auto antiderivative = spectral_antiderivative(fiber);
    for (int j = 0; j < k; ++j)
      lift.h[static_cast<std::size_t>(i) * k + j] = (lift.c[i] - antiderivative[j]) / family.rho(i, j);
  }
  lift.residual = lift_residual(family, lift.h);
  if (lift.residual > kLiftResidualTolerance) {
    std::ostringstream os;
    os << "volume-preservation residual " << lift.residual << " exceeds " << kLiftResidualTolerance;
    fail(ErrorCode::Numerical, os.str());
  }
  return lift;
}

HorizontalLift zero_lift(const FiberFamily& family) {
  HorizontalLift lift;
  lift.h.assign(family.rho().size(), 0.0);
  lift.c.assign(family.base_res(), 0.0);
  lift.residual = lift_residual(family, lift.h);
  return lift;
}

// ---------------------------------------------------------------------------

FaceMetric assemble_cell(double l, double rho, double h) {
  const double r2 = rho * rho;
  return FaceMetric{l * l + h * h * r2, -h * r2, r2};
}

ConstructedMetric::ConstructedMetric(const FiberFamily& family, const HorizontalLift& lift)
    : base_length_(family.base_length()),
      m_(family.base_res()),
      k_(family.fiber_res()),
      rho_(family.rho()),
      h_(lift.h) {
  if (lift.h.size() != rho_.size()) fail(ErrorCode::InvalidArgument, "lift does not match the family grid");
  cells_.reserve(rho_.size());
  for (std::size_t c = 0; c < rho_.size(); ++c) cells_.push_back(assemble_cell(base_length_, rho_[c], h_[c]));
}

ConstructedMetric::ConstructedMetric(double base_length, int m, int k, std::vector<FaceMetric> cells)
    : base_length_(base_length), m_(m), k_(k), cells_(std::move(cells)) {
  if (cells_.size() != static_cast<std::size_t>(m) * k)
    fail(ErrorCode::InvalidArgument, "metric grid has wrong size");
}

FaceMetric ConstructedMetric::at(double u, double v) const {
  u -= std::floor(u);
  v -= std::floor(v);
  const double x = u * m_, y = v * k_;
  const int i0 = static_cast<int>(x) % m_, j0 = static_cast<int>(y) % k_;
  const int i1 = (i0 + 1) % m_, j1 = (j0 + 1) % k_;
  const double a = x - std::floor(x), b = y - std::floor(y);
  auto idx = [&](int i, int j) { return static_cast<std::size_t>(i) * k_ + j; };
  auto lerp = [&](auto get) {
    return (1 - a) * (1 - b) * get(idx(i0, j0)) + a * (1 - b) * get(idx(i1, j0)) +
           (1 - a) * b * get(idx(i0, j1)) + a * b * get(idx(i1, j1));
  };
  if (!rho_.empty()) {
    const double r = lerp([&](std::size_t c) { return rho_[c]; });
    const double h = lerp([&](std::size_t c) { return h_[c]; });
    return assemble_cell(base_length_, r, h);
  }
  return FaceMetric{lerp([&](std::size_t c) { return cells_[c].uu; }),
                    lerp([&](std::size_t c) { return cells_[c].uv; }),
                    lerp([&](std::size_t c) { return cells_[c].vv; })};
}

TorusMesh ConstructedMetric::to_mesh(int n) const {
  return TorusMesh::with_metric(Mat2::Identity(), n, [this](double u, double v) { return at(u, v); });
}

ConstructedMetric assemble_metric(const FiberFamily& family, const HorizontalLift& lift) {
  return ConstructedMetric(family, lift);
}

// ---------------------------------------------------------------------------

SubmersionCheck check_submersion(const ConstructedMetric& metric) {
  SubmersionCheck out;
  const double target = 1.0 / metric.base_length();
  for (int i = 0; i < metric.base_res(); ++i)
    for (int j = 0; j < metric.fiber_res(); ++j) {
      const FaceMetric& g = metric.cell(i, j);
      const double du_norm = std::sqrt(g.vv / g.det());  // sqrt(g^{uu})
      out.max_deviation = std::max(out.max_deviation, std::abs(du_norm - target));
    }
  out.pass = out.max_deviation <= kSubmersionTolerance;
  return out;
}

double minimal_fiber_tolerance(int m, int k) {
  return kMinimalFiberConstant * (1.0 / (double(m) * m) + 1.0 / (double(k) * k));
}

MinimalFiberCheck check_minimal_fibers(const ConstructedMetric& metric) {
  const int m = metric.base_res(), k = metric.fiber_res();
  const double hu = 1.0 / m, hv = 1.0 / k;
  MinimalFiberCheck out;
  out.tolerance = minimal_fiber_tolerance(m, k);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) {
      const FaceMetric& g = metric.cell(i, j);
      const FaceMetric& gu_p = metric.cell((i + 1) % m, j);
      const FaceMetric& gu_m = metric.cell((i + m - 1) % m, j);
      const FaceMetric& gv_p = metric.cell(i, (j + 1) % k);
      const FaceMetric& gv_m = metric.cell(i, (j + k - 1) % k);
      const double dv_guv = (gv_p.uv - gv_m.uv) / (2 * hv);
      const double dv_gvv = (gv_p.vv - gv_m.vv) / (2 * hv);
      const double du_gvv = (gu_p.vv - gu_m.vv) / (2 * hu);
      const double det = g.det();
      const double inv_uu = g.vv / det;
      const double inv_uv = -g.uv / det;
      // Gamma^u_vv; the u-component of nabla_T T for T = d_v.
      const double gamma = 0.5 * inv_uu * (2 * dv_guv - du_gvv) + 0.5 * inv_uv * dv_gvv;
      // Normal part over |T|^2: |du(W)| / (|du| |T|^2).
      const double curvature = std::abs(gamma) / (std::sqrt(inv_uu) * g.vv);
      out.residual = std::max(out.residual, curvature);
    }
  out.pass = out.residual <= out.tolerance;
  return out;
}

HarmonicNormCheck check_harmonic_constant_norm(const ConstructedMetric& metric, int n, double tol) {
  const TorusMesh mesh = metric.to_mesh(n);
  const HarmonicResult harmonic = harmonic_representative(mesh, {1, 0});
  const ConstantNormCheck c = check_constant_norm(mesh, harmonic.form, tol);
  HarmonicNormCheck out;
  out.deviation = c.deviation;
  out.pass = c.constant;
  const auto norms = face_norms(mesh, harmonic.form);
  double weighted = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) weighted += norms[f] * mesh.face_area(f);
  out.mean_norm = weighted / mesh.total_area();
  return out;
}

HebdaToyReport hebda_equality(const ConstructedMetric& metric, int n, int stencil) {
  const TorusMesh mesh = metric.to_mesh(n);
  LoopSearchOptions options;
  options.stencil = stencil;
  std::vector<CohomologyClass> base_classes;
  for (int k = -2; k <= 2; ++k) base_classes.push_back({1, k});
  HebdaToyReport rep;
  rep.base_systole = shortest_loop_in_classes(mesh, base_classes, options).length;
  rep.fiber_systole = shortest_loop_in_class(mesh, {0, 1}, options);
  rep.volume = mesh.total_area();
  rep.ratio = rep.base_systole * rep.fiber_systole / rep.volume;
  return rep;
}

}  // namespace systole
