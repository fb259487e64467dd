#include "systole/dual_criteria.hpp"

#include <cmath>

#include "systole/error.hpp"

namespace systole {

const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::CriticalWithinTol: return "critical-within-tol";
    case Verdict::Suboptimal: return "suboptimal";
    case Verdict::ExceedsKnown: return "exceeds-known";
    case Verdict::UnknownDimension: return "unknown-dimension";
  }
  return "unknown";
}

std::vector<Vector> short_vector_footprint(const GramMatrix& g,
                                           const EnumerationOptions& options) {
  const int n = g.dim();
  const Matrix r = g.upper_factor();
  const Matrix r_inv_t = r.transpose().triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));

  std::vector<Vector> out;
  auto embed = [&](const Matrix& m, const IntVector& v) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = static_cast<double>(v[i]);
    out.emplace_back(m * x);
  };
  for (const auto& v : shortest_vectors(g, options).vectors) embed(r, v);
  for (const auto& w : shortest_vectors(dual_gram(g), options).vectors) embed(r_inv_t, w);
  return out;
}

namespace {

int sym_dim(int n) { return n * (n + 1) / 2; }

// Upper-triangle coordinates of s s^T.  Scaling off-diagonals by sqrt(2)
// would make this an isometry; rank does not care.
template <class T, class V>
std::vector<T> sym_coords(const V& s, int n) {
  std::vector<T> out;
  out.reserve(sym_dim(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) out.push_back(s[i] * s[j]);
  return out;
}

int rational_rank(std::vector<std::vector<mpq_class>> rows) {
  if (rows.empty()) return 0;
  const auto cols = rows.front().size();
  int rank = 0;
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
    int pivot = -1;
    for (std::size_t r = rank; r < rows.size(); ++r)
      if (sgn(rows[r][c]) != 0) {
        pivot = static_cast<int>(r);
        break;
      }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    for (std::size_t r = rank + 1; r < rows.size(); ++r) {
      if (sgn(rows[r][c]) == 0) continue;
      const mpq_class f = rows[r][c] / rows[rank][c];
      for (std::size_t k = c; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

RankOneSpanReport exact_span(const GramMatrix& g, const EnumerationOptions& options) {
  const int n = g.dim();
  const GramMatrix dual = dual_gram(g);
  const RationalMatrix& ginv = dual.exact();
  std::vector<std::vector<mpq_class>> rows;
  for (const auto& v : shortest_vectors(g, options).vectors) {
    std::vector<mpq_class> s(n);
    for (int i = 0; i < n; ++i) s[i] = mpq_class(static_cast<long>(v[i]));
    rows.push_back(sym_coords<mpq_class>(s, n));
  }
  for (const auto& w : shortest_vectors(dual, options).vectors) {
    std::vector<mpq_class> s(n);
    for (int i = 0; i < n; ++i) {
      s[i] = 0;
      for (int j = 0; j < n; ++j) s[i] += ginv(i, j) * mpq_class(static_cast<long>(w[j]));
    }
    rows.push_back(sym_coords<mpq_class>(s, n));
  }
  RankOneSpanReport rep;
  rep.target_dim = sym_dim(n);
  rep.footprint_size = static_cast<int>(rows.size());
  rep.span_dim = rational_rank(std::move(rows));
  rep.is_dual_perfect = rep.span_dim == rep.target_dim;
  return rep;
}

}  // namespace

RankOneSpanReport is_dual_perfect(const GramMatrix& g, const EnumerationOptions& options) {
  if (options.arithmetic == Arithmetic::Exact) return exact_span(g, options);

  const int n = g.dim();
  const auto footprint = short_vector_footprint(g, options);
  Matrix rows(static_cast<int>(footprint.size()), sym_dim(n));
  for (int k = 0; k < rows.rows(); ++k) {
    const Vector s = footprint[k].normalized();
    const auto c = sym_coords<double>(s, n);
    for (int j = 0; j < rows.cols(); ++j) rows(k, j) = c[j];
  }
  RankOneSpanReport rep;
  rep.target_dim = sym_dim(n);
  rep.footprint_size = static_cast<int>(footprint.size());
  Eigen::JacobiSVD<Matrix> svd(rows);
  const Vector sv = svd.singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankThreshold * top) ++rep.span_dim;
  rep.is_dual_perfect = rep.span_dim == rep.target_dim;
  return rep;
}

std::optional<double> known_bm_constant(int dim) {
  switch (dim) {
    case 1: return 1.0;
    case 2: return 2.0 / std::sqrt(3.0);
    case 3: return std::sqrt(1.5);
    default: return std::nullopt;
  }
}

std::optional<mpq_class> known_bm_constant_squared(int dim) {
  switch (dim) {
    case 1: return mpq_class(1);
    case 2: return mpq_class(4, 3);
    case 3: return mpq_class(3, 2);
    default: return std::nullopt;
  }
}

DualCriticalCertificate certify_against_known(const GramMatrix& g,
                                              const EnumerationOptions& options) {
  const bool exact = options.arithmetic == Arithmetic::Exact;
  const BmProduct bm = bm_product_detail(g, options);
  DualCriticalCertificate cert;
  cert.bm_value = bm.value;
  cert.tolerance = exact ? kCriticalTolExact : kCriticalTolFloat;
  cert.known_constant = known_bm_constant(g.dim());
  if (!cert.known_constant) {
    cert.verdict = Verdict::UnknownDimension;
    return cert;
  }
  cert.gap = *cert.known_constant - bm.value;
  if (exact && bm.value_squared_exact) {
    // Exact comparison of squares; the double gap is reported alongside.
    const mpq_class known2 = *known_bm_constant_squared(g.dim());
    const mpq_class diff = known2 - *bm.value_squared_exact;
    if (sgn(diff) == 0 || std::abs(*cert.gap) <= cert.tolerance)
      cert.verdict = Verdict::CriticalWithinTol;
    else
      cert.verdict = sgn(diff) > 0 ? Verdict::Suboptimal : Verdict::ExceedsKnown;
    if (sgn(diff) == 0) cert.gap = 0.0;
    return cert;
  }
  if (std::abs(*cert.gap) <= cert.tolerance)
    cert.verdict = Verdict::CriticalWithinTol;
  else
    cert.verdict = *cert.gap > 0 ? Verdict::Suboptimal : Verdict::ExceedsKnown;
  return cert;
}

}  // namespace systole
