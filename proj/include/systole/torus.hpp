#pragma once

// Closed-form systolic quantities of flat tori R^b / L.  For a flat torus
// the stable 1-systole is lambda1(L), the conformal 1-systole rescales it by
// vol^{-1/n}, and the (n-1)-systole is lambda1(L*) vol.

#include <optional>

#include "systole/lattice.hpp"

namespace systole {

class FlatTorus {
 public:
  explicit FlatTorus(GramMatrix gram);

  const GramMatrix& gram() const noexcept { return gram_; }
  int dim() const noexcept { return gram_.dim(); }
  double volume() const noexcept { return volume_; }

 private:
  GramMatrix gram_;
  double volume_;
};

struct SystoleReport {
  int dim = 0;
  double stsys1 = 0.0;
  double confsys1 = 0.0;
  double sys_nminus1 = 0.0;
  double volume = 0.0;
  double lhs = 0.0;  // confsys1 * sys_nminus1
  /// gamma'_b vol^{(n-1)/n} for b <= 3; (2b/3) vol^{(n-1)/n} in bound-only mode.
  double rhs = 0.0;
  bool bound_only = false;
  std::optional<double> equality_gap;  // rhs - lhs, definite rhs only
};

SystoleReport torus_systoles(const FlatTorus& torus, const EnumerationOptions& options = {});

struct InequalityCheck {
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;           // rhs - lhs
  double relative_gap = 0.0;  // gap / rhs
  bool bound_only = false;
};

inline constexpr double kInequalitySlack = 1e-9;

InequalityCheck verify_main_inequality(const FlatTorus& torus,
                                       const EnumerationOptions& options = {});

struct IdentityCheck {
  bool pass = false;
  double left = 0.0;
  double right = 0.0;
  double relative_deviation = 0.0;
};

/// stsys1 == confsys1 * vol^{1/n} (flat tori attain equality).
IdentityCheck verify_stable_conformal_relation(const FlatTorus& torus,
                                               const EnumerationOptions& options = {});

struct HebdaReport {
  double stsys1 = 0.0;
  double sys_nminus1 = 0.0;
  double volume = 0.0;
  double product = 0.0;
  double relative_deviation = 0.0;
  bool pass = false;
};

/// Circle lattice cZ: stsys1 * sys_0 = vol.  Domain error unless b = 1.
HebdaReport hebda_specialization(const FlatTorus& torus);

/// For a nonzero integral class theta (coefficients on the dual basis) the
/// L^2 side |theta|_* vol is compared against the volume of the minimal
/// hypersurface dual to theta, obtained independently as the covolume of
/// L intersected with ker(theta) times the divisibility of theta.
IdentityCheck coarea_lower_bound_check(const FlatTorus& torus, const IntVector& klass);

/// Integer basis (columns) of {v in Z^b : theta . v = 0} for primitive theta.
IntMatrix integer_kernel(const IntVector& primitive_theta);

}  // namespace systole
