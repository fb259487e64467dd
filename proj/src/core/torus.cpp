#include "systole/torus.hpp"

#include <cmath>

#include "systole/dual_criteria.hpp"
#include "systole/error.hpp"

namespace systole {

FlatTorus::FlatTorus(GramMatrix gram)
    : gram_(std::move(gram)), volume_(std::sqrt(gram_.determinant())) {}

SystoleReport torus_systoles(const FlatTorus& torus, const EnumerationOptions& options) {
  const int n = torus.dim();
  const BmProduct bm = bm_product_detail(torus.gram(), options);
  SystoleReport rep;
  rep.dim = n;
  rep.volume = torus.volume();
  rep.stsys1 = bm.lambda1;
  rep.confsys1 = bm.lambda1 * std::pow(rep.volume, -1.0 / n);
  rep.sys_nminus1 = bm.dual_lambda1 * rep.volume;
  rep.lhs = rep.confsys1 * rep.sys_nminus1;
  const double vol_factor = std::pow(rep.volume, (n - 1.0) / n);
  if (auto gamma = known_bm_constant(n)) {
    rep.rhs = *gamma * vol_factor;
    rep.equality_gap = rep.rhs - rep.lhs;
    if (bm.value_squared_exact && *bm.value_squared_exact == *known_bm_constant_squared(n))
      rep.equality_gap = 0.0;
  } else {
    rep.rhs = (2.0 * n / 3.0) * vol_factor;
    rep.bound_only = true;
  }
  return rep;
}

InequalityCheck verify_main_inequality(const FlatTorus& torus, const EnumerationOptions& options) {
  const SystoleReport rep = torus_systoles(torus, options);
  InequalityCheck out;
  out.lhs = rep.lhs;
  out.rhs = rep.rhs;
  out.bound_only = rep.bound_only;
  out.gap = rep.equality_gap ? *rep.equality_gap : rep.rhs - rep.lhs;
  out.relative_gap = out.gap / rep.rhs;
  out.pass = rep.lhs <= rep.rhs + kInequalitySlack;
  return out;
}

IdentityCheck verify_stable_conformal_relation(const FlatTorus& torus,
                                               const EnumerationOptions& options) {
  const SystoleReport rep = torus_systoles(torus, options);
  IdentityCheck out;
  out.left = rep.stsys1;
  out.right = rep.confsys1 * std::pow(rep.volume, 1.0 / rep.dim);
  out.relative_deviation = std::abs(out.left - out.right) / out.left;
  out.pass = out.relative_deviation <= 1e-12;
  return out;
}

HebdaReport hebda_specialization(const FlatTorus& torus) {
  if (torus.dim() != 1) fail(ErrorCode::Domain, "the circle specialization requires b = 1");
  const double c2 = torus.gram()(0, 0);
  HebdaReport rep;
  rep.volume = torus.volume();
  rep.stsys1 = std::sqrt(c2);
  rep.sys_nminus1 = std::sqrt(1.0 / c2) * rep.volume;
  rep.product = rep.stsys1 * rep.sys_nminus1;
  rep.relative_deviation = std::abs(rep.product - rep.volume) / rep.volume;
  rep.pass = rep.relative_deviation <= 1e-12;
  return rep;
}

IntMatrix integer_kernel(const IntVector& theta) {
  const int n = static_cast<int>(theta.size());
  IntVector row = theta;
  IntMatrix u = IntMatrix::Identity(n, n);
  // Column operations drive row to (+-1, 0, ..., 0); U stays unimodular.
  for (int j = 1; j < n; ++j) {
    while (row[j] != 0) {
      const std::int64_t q = row[0] / row[j];
      row[0] -= q * row[j];
      u.col(0) -= q * u.col(j);
      std::swap(row[0], row[j]);
      u.col(0).swap(u.col(j));
    }
  }
  if (row[0] != 1 && row[0] != -1) fail(ErrorCode::Domain, "class is not primitive");
  return u.rightCols(n - 1);
}

IdentityCheck coarea_lower_bound_check(const FlatTorus& torus, const IntVector& klass) {
  const int n = torus.dim();
  if (static_cast<int>(klass.size()) != n)
    fail(ErrorCode::InvalidArgument, "class has wrong dimension");
  const std::int64_t k = gcd_of(klass);
  if (k == 0) fail(ErrorCode::Domain, "zero class");

  const GramMatrix dual = dual_gram(torus.gram());
  const double dual_norm = std::sqrt(dual.norm2(klass));

  IntVector primitive(klass);
  for (auto& c : primitive) c /= k;
  double hypersurface = 1.0;
  if (n > 1) {
    const Matrix kernel = integer_kernel(primitive).cast<double>();
    const Matrix sub = kernel.transpose() * torus.gram().entries() * kernel;
    hypersurface = std::sqrt(sub.determinant());
  }

  IdentityCheck out;
  out.left = dual_norm * torus.volume();
  out.right = static_cast<double>(k) * hypersurface;
  out.relative_deviation = std::abs(out.left - out.right) / out.right;
  out.pass = out.relative_deviation <= 1e-9;
  return out;
}

}  // namespace systole
