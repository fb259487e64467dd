#include "systole/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "systole/error.hpp"

namespace systole {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "ok";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::DegenerateLattice: return "degenerate-lattice";
    case ErrorCode::IllConditioned: return "ill-conditioned";
    case ErrorCode::Capacity: return "capacity";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Resolution: return "resolution";
    case ErrorCode::Numerical: return "numerical";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Reconstruction: return "reconstruction";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// RationalMatrix

Matrix RationalMatrix::to_double() const {
  Matrix out(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) out(i, j) = (*this)(i, j).get_d();
  return out;
}

RationalMatrix RationalMatrix::identity(int dim) {
  RationalMatrix out(dim);
  for (int i = 0; i < dim; ++i) out(i, i) = 1;
  return out;
}

RationalMatrix inverse(const RationalMatrix& m) {
  const int n = m.dim();
  RationalMatrix a = m;
  RationalMatrix inv = RationalMatrix::identity(n);
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r) {
      if (sgn(a(r, col)) != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) fail(ErrorCode::DegenerateLattice, "rational matrix is singular");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a(pivot, j), a(col, j));
        std::swap(inv(pivot, j), inv(col, j));
      }
    }
    const mpq_class p = a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || sgn(a(r, col)) == 0) continue;
      const mpq_class f = a(r, col);
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

// ---------------------------------------------------------------------------
// GramMatrix

namespace {

void validate_float(const Matrix& g) {
  if (g.rows() < 1 || g.rows() != g.cols())
    fail(ErrorCode::InvalidArgument, "Gram matrix must be square with dim >= 1");
  if (!g.allFinite()) fail(ErrorCode::InvalidArgument, "Gram matrix has non-finite entries");
  const double scale = g.cwiseAbs().maxCoeff();
  for (int i = 0; i < g.rows(); ++i)
    for (int j = i + 1; j < g.cols(); ++j)
      if (std::abs(g(i, j) - g(j, i)) > 1e-12 * std::max(scale, 1.0))
        fail(ErrorCode::InvalidArgument, "Gram matrix is not symmetric");
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::DegenerateLattice, "Gram matrix is not positive definite");
  const Matrix l = llt.matrixL();
  for (int i = 0; i < g.rows(); ++i)
    if (!(l(i, i) > 0.0)) fail(ErrorCode::DegenerateLattice, "Gram matrix is not positive definite");
}

// Exact positive-definiteness via rational LDL^T pivots.
void validate_exact(const RationalMatrix& g) {
  const int n = g.dim();
  if (n < 1) fail(ErrorCode::InvalidArgument, "Gram matrix must have dim >= 1");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (g(i, j) != g(j, i)) fail(ErrorCode::InvalidArgument, "Gram matrix is not symmetric");
  RationalMatrix a = g;
  for (int k = 0; k < n; ++k) {
    if (sgn(a(k, k)) <= 0) fail(ErrorCode::DegenerateLattice, "Gram matrix is not positive definite");
    for (int i = k + 1; i < n; ++i) {
      const mpq_class f = a(i, k) / a(k, k);
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
}

Matrix symmetrized(const Matrix& g) { return 0.5 * (g + g.transpose()); }

}  // namespace

GramMatrix::GramMatrix(Matrix entries) : entries_(std::move(entries)) {
  validate_float(entries_);
  entries_ = symmetrized(entries_);
}

GramMatrix::GramMatrix(RationalMatrix entries) {
  for (int i = 0; i < entries.dim(); ++i)
    for (int j = 0; j < entries.dim(); ++j) entries(i, j).canonicalize();
  validate_exact(entries);
  entries_ = entries.to_double();
  validate_float(entries_);
  exact_ = std::move(entries);
}

const RationalMatrix& GramMatrix::exact() const {
  if (!exact_) fail(ErrorCode::Precondition, "Gram matrix carries no exact entries");
  return *exact_;
}

double GramMatrix::determinant() const {
  if (exact_) {
    // Rational elimination keeps det exact up to the final conversion.
    RationalMatrix a = *exact_;
    const int n = dim();
    mpq_class det = 1;
    for (int k = 0; k < n; ++k) {
      det *= a(k, k);
      for (int i = k + 1; i < n; ++i) {
        const mpq_class f = a(i, k) / a(k, k);
        for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      }
    }
    return det.get_d();
  }
  const Matrix l = Eigen::LLT<Matrix>(entries_).matrixL();
  double d = 1.0;
  for (int i = 0; i < dim(); ++i) d *= l(i, i) * l(i, i);
  return d;
}

Matrix GramMatrix::upper_factor() const {
  return Eigen::LLT<Matrix>(entries_).matrixU();
}

double GramMatrix::norm2(std::span<const std::int64_t> v) const {
  const int n = dim();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (v[i] == 0) continue;
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += entries_(i, j) * static_cast<double>(v[j]);
    s += static_cast<double>(v[i]) * row;
  }
  return s;
}

mpq_class GramMatrix::exact_norm2(std::span<const std::int64_t> v) const {
  const RationalMatrix& g = exact();
  const int n = dim();
  mpq_class s = 0;
  for (int i = 0; i < n; ++i) {
    if (v[i] == 0) continue;
    for (int j = 0; j < n; ++j) {
      if (v[j] == 0) continue;
      s += g(i, j) * mpq_class(static_cast<long>(v[i])) * mpq_class(static_cast<long>(v[j]));
    }
  }
  return s;
}

GramMatrix GramMatrix::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorCode::Domain, "scale factor must be positive");
  return GramMatrix(Matrix(c * entries_));
}

GramMatrix GramMatrix::scaled(const mpq_class& c) const {
  if (sgn(c) <= 0) fail(ErrorCode::Domain, "scale factor must be positive");
  if (!exact_) return scaled(c.get_d());
  RationalMatrix out = *exact_;
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) out(i, j) *= c;
  return GramMatrix(std::move(out));
}

GramMatrix GramMatrix::transformed(const IntMatrix& u) const {
  const int n = dim();
  if (u.rows() != n || u.cols() != n)
    fail(ErrorCode::InvalidArgument, "transform has wrong shape");
  if (exact_) {
    RationalMatrix out(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        mpq_class s = 0;
        for (int k = 0; k < n; ++k) {
          if (u(k, i) == 0) continue;
          for (int l = 0; l < n; ++l) {
            if (u(l, j) == 0) continue;
            s += mpq_class(static_cast<long>(u(k, i))) * (*exact_)(k, l) *
                 mpq_class(static_cast<long>(u(l, j)));
          }
        }
        out(i, j) = s;
      }
    }
    return GramMatrix(std::move(out));
  }
  const Matrix ud = u.cast<double>();
  const Matrix t = ud.transpose() * entries_ * ud;
  return GramMatrix(Matrix(0.5 * (t + t.transpose())));
}

// ---------------------------------------------------------------------------

GramMatrix gram_from_basis(const LatticeBasis& basis) {
  const Matrix& b = basis.columns;
  if (b.rows() < 1 || b.rows() != b.cols())
    fail(ErrorCode::InvalidArgument, "basis must be square");
  if (!b.allFinite()) fail(ErrorCode::InvalidArgument, "basis has non-finite entries");
  double scale = 1.0;
  for (int j = 0; j < b.cols(); ++j) scale *= std::max(b.col(j).norm(), 1e-300);
  if (std::abs(b.determinant()) <= 1e-12 * scale)
    fail(ErrorCode::DegenerateLattice, "basis columns are linearly dependent");
  return GramMatrix(Matrix(b.transpose() * b));
}

GramMatrix dual_gram(const GramMatrix& g) {
  if (g.has_exact()) return GramMatrix(inverse(g.exact()));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g.entries(), Eigen::EigenvaluesOnly);
  const Vector ev = eig.eigenvalues();
  const double cond = ev.maxCoeff() / ev.minCoeff();
  if (!(ev.minCoeff() > 0.0) || cond > kIllConditionedThreshold) {
    std::ostringstream os;
    os << "Gram matrix condition number " << cond << " exceeds " << kIllConditionedThreshold;
    fail(ErrorCode::IllConditioned, os.str());
  }
  const int n = g.dim();
  Matrix inv = Eigen::LLT<Matrix>(g.entries()).solve(Matrix::Identity(n, n));
  return GramMatrix(symmetrized(inv));
}

// ---------------------------------------------------------------------------
// LLL on the Gram form.  Gram-Schmidt data is recomputed from G after every
// change; b <= 12 keeps that cheap.

namespace {

struct GsData {
  Matrix mu;
  Vector bstar;  // squared lengths of the Gram-Schmidt vectors
};

GsData gram_schmidt(const Matrix& g) {
  const int n = static_cast<int>(g.rows());
  GsData d{Matrix::Zero(n, n), Vector::Zero(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      double s = g(i, j);
      for (int l = 0; l < j; ++l) s -= d.mu(j, l) * d.mu(i, l) * d.bstar(l);
      d.mu(i, j) = s / d.bstar(j);
    }
    double s = g(i, i);
    for (int l = 0; l < i; ++l) s -= d.mu(i, l) * d.mu(i, l) * d.bstar(l);
    d.bstar(i) = s;
  }
  return d;
}

// b_k <- b_k - q b_j on both G and U.
void add_multiple(Matrix& g, IntMatrix& u, int k, int j, std::int64_t q) {
  const double qd = static_cast<double>(q);
  const int n = static_cast<int>(g.rows());
  const double gkk = g(k, k) - 2.0 * qd * g(k, j) + qd * qd * g(j, j);
  for (int l = 0; l < n; ++l) {
    if (l == k) continue;
    g(k, l) -= qd * g(j, l);
    g(l, k) = g(k, l);
  }
  g(k, k) = gkk;
  u.col(k) -= q * u.col(j);
}

void swap_vectors(Matrix& g, IntMatrix& u, int a, int b) {
  g.row(a).swap(g.row(b));
  g.col(a).swap(g.col(b));
  u.col(a).swap(u.col(b));
}

}  // namespace

ReducedBasis reduce_basis(const GramMatrix& gram) {
  constexpr double delta = 0.99;
  const int n = gram.dim();
  Matrix g = gram.entries();
  IntMatrix u = IntMatrix::Identity(n, n);
  int k = 1;
  long guard = 0;
  while (k < n) {
    if (++guard > 1000000) fail(ErrorCode::Numerical, "LLL did not terminate");
    GsData gs = gram_schmidt(g);
    for (int j = k - 1; j >= 0; --j) {
      const double q = std::round(gs.mu(k, j));
      if (q != 0.0) {
        add_multiple(g, u, k, j, static_cast<std::int64_t>(q));
        gs = gram_schmidt(g);
      }
    }
    if (gs.bstar(k) >= (delta - gs.mu(k, k - 1) * gs.mu(k, k - 1)) * gs.bstar(k - 1)) {
      ++k;
    } else {
      swap_vectors(g, u, k, k - 1);
      k = std::max(k - 1, 1);
    }
  }
  return ReducedBasis{gram.transformed(u), u};
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

class Enumerator {
 public:
  Enumerator(const Matrix& r, double bound2, bool shrink, double shell)
      : n_(static_cast<int>(r.rows())), shrink_(shrink), shell2_((1.0 + shell) * (1.0 + shell)),
        bound2_(bound2), rii2_(n_), mu_(n_, n_), x_(n_, 0), partial_(n_ + 1, 0.0) {
    for (int i = 0; i < n_; ++i) {
      rii2_[i] = r(i, i) * r(i, i);
      for (int j = 0; j < n_; ++j) mu_(i, j) = r(i, j) / r(i, i);
    }
  }

  void run() { recurse(n_ - 1); }

  const std::vector<std::pair<double, IntVector>>& found() const { return found_; }
  double best() const { return best_; }

 private:
  void recurse(int i) {
    double center = 0.0;
    for (int j = i + 1; j < n_; ++j) center -= mu_(i, j) * static_cast<double>(x_[j]);
    const double room = bound2_ - partial_[i + 1];
    if (room < 0.0) return;
    const double half = std::sqrt(room / rii2_[i]);
    const auto lo = static_cast<std::int64_t>(std::ceil(center - half - 1e-12));
    const auto hi = static_cast<std::int64_t>(std::floor(center + half + 1e-12));
    for (std::int64_t xi = lo; xi <= hi; ++xi) {
      const double d = static_cast<double>(xi) - center;
      const double l = partial_[i + 1] + rii2_[i] * d * d;
      if (l > bound2_) continue;
      x_[i] = xi;
      partial_[i] = l;
      if (i > 0) {
        recurse(i - 1);
      } else if (l > 0.0 && !is_zero()) {
        found_.emplace_back(l, x_);
        if (l < best_) {
          best_ = l;
          if (shrink_) bound2_ = std::min(bound2_, l * shell2_ * (1.0 + 1e-12));
        }
      }
    }
    x_[i] = 0;
  }

  bool is_zero() const {
    return std::all_of(x_.begin(), x_.end(), [](std::int64_t v) { return v == 0; });
  }

  int n_;
  bool shrink_;
  double shell2_;
  double bound2_;
  std::vector<double> rii2_;
  Matrix mu_;
  IntVector x_;
  std::vector<double> partial_;
  std::vector<std::pair<double, IntVector>> found_;
  double best_ = std::numeric_limits<double>::infinity();
};

IntVector apply(const IntMatrix& u, const IntVector& x) {
  const auto n = static_cast<int>(x.size());
  IntVector out(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i] += u(i, j) * x[j];
  return out;
}

bool positive_leading(const IntVector& v) {
  for (auto c : v)
    if (c != 0) return c > 0;
  return false;
}

void sort_unique(std::vector<IntVector>& vs) {
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
}

void check_cap(const GramMatrix& g, const EnumerationOptions& options) {
  if (g.dim() > options.dimension_cap) {
    std::ostringstream os;
    os << "dimension " << g.dim() << " exceeds enumeration cap " << options.dimension_cap;
    fail(ErrorCode::Capacity, os.str());
  }
}

}  // namespace

IntVector sign_normalized(IntVector v) {
  if (!positive_leading(v))
    for (auto& c : v) c = -c;
  return v;
}

std::int64_t gcd_of(std::span<const std::int64_t> v) {
  std::int64_t g = 0;
  for (auto c : v) g = std::gcd(g, c < 0 ? -c : c);
  return g;
}

std::vector<IntVector> enumerate_ball(const GramMatrix& g, double bound2) {
  EnumerationOptions opts;
  check_cap(g, opts);
  Enumerator e(g.upper_factor(), bound2, false, 0.0);
  e.run();
  std::vector<IntVector> out;
  for (const auto& [len, x] : e.found())
    if (positive_leading(x)) out.push_back(x);
  sort_unique(out);
  return out;
}

ShortVectorSet shortest_vectors(const GramMatrix& g, const EnumerationOptions& options) {
  check_cap(g, options);
  const bool exact = options.arithmetic == Arithmetic::Exact;
  if (exact && !g.has_exact())
    fail(ErrorCode::Precondition, "exact arithmetic requested for a Gram matrix without rational entries");

  const ReducedBasis red = reduce_basis(g);
  const double seed2 = red.gram(0, 0);
  // The exact route widens the float shell and settles ties in Q afterwards.
  const double shell = exact ? 1e-6 : options.shell_tolerance;
  Enumerator e(red.gram.upper_factor(), seed2 * (1.0 + 1e-9), true, shell);
  e.run();
  if (e.found().empty()) fail(ErrorCode::Numerical, "enumeration found no nonzero vector");

  ShortVectorSet out;
  out.radius_used = std::sqrt(seed2);
  const double best = e.best();
  const double cut = best * (1.0 + shell) * (1.0 + shell);

  std::vector<IntVector> candidates;
  for (const auto& [len, x] : e.found()) {
    if (len > cut) continue;
    IntVector v = apply(red.transform, x);
    if (positive_leading(v)) candidates.push_back(std::move(v));
  }
  sort_unique(candidates);

  if (!exact) {
    out.lambda1 = std::sqrt(best);
    out.vectors = std::move(candidates);
    return out;
  }

  std::optional<mpq_class> min2;
  for (const auto& v : candidates) {
    const mpq_class q = g.exact_norm2(v);
    if (!min2 || q < *min2) min2 = q;
  }
  for (const auto& v : candidates)
    if (g.exact_norm2(v) == *min2) out.vectors.push_back(v);
  out.lambda1_squared_exact = *min2;
  out.lambda1 = std::sqrt(min2->get_d());
  return out;
}

BmProduct bm_product_detail(const GramMatrix& g, const EnumerationOptions& options) {
  const ShortVectorSet primal = shortest_vectors(g, options);
  const ShortVectorSet dual = shortest_vectors(dual_gram(g), options);
  BmProduct out;
  out.lambda1 = primal.lambda1;
  out.dual_lambda1 = dual.lambda1;
  if (primal.lambda1_squared_exact && dual.lambda1_squared_exact) {
    out.value_squared_exact = *primal.lambda1_squared_exact * *dual.lambda1_squared_exact;
    out.value = std::sqrt(out.value_squared_exact->get_d());
  } else {
    out.value = primal.lambda1 * dual.lambda1;
  }
  return out;
}

double bm_product(const GramMatrix& g, const EnumerationOptions& options) {
  return bm_product_detail(g, options).value;
}

// ---------------------------------------------------------------------------

mpq_class parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) fail(ErrorCode::Parse, "empty number");
  try {
    if (s.find('/') != std::string::npos) {
      const auto slash = s.find('/');
      mpq_class num = parse_rational(s.substr(0, slash));
      mpq_class den = parse_rational(s.substr(slash + 1));
      if (sgn(den) == 0) fail(ErrorCode::Parse, "zero denominator in '" + text + "'");
      mpq_class q = num / den;
      q.canonicalize();
      return q;
    }
    std::string mantissa = s;
    long exponent = 0;
    if (const auto e = s.find_first_of("eE"); e != std::string::npos) {
      mantissa = s.substr(0, e);
      std::size_t used = 0;
      exponent = std::stol(s.substr(e + 1), &used);
      if (used != s.size() - e - 1) fail(ErrorCode::Parse, "bad exponent in '" + text + "'");
    }
    bool negative = false;
    if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
      negative = mantissa[0] == '-';
      mantissa.erase(0, 1);
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_dot = false;
    for (char c : mantissa) {
      if (c == '.') {
        if (seen_dot) fail(ErrorCode::Parse, "bad number '" + text + "'");
        seen_dot = true;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        digits.push_back(c);
        if (seen_dot) ++frac_digits;
      } else {
        fail(ErrorCode::Parse, "bad number '" + text + "'");
      }
    }
    if (digits.empty()) fail(ErrorCode::Parse, "bad number '" + text + "'");
    mpz_class num(digits, 10);
    if (negative) num = -num;
    const long shift = exponent - frac_digits;
    mpz_class pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
    mpq_class q = shift >= 0 ? mpq_class(num * pow10) : mpq_class(num, pow10);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    fail(ErrorCode::Parse, "bad number '" + text + "'");
  } catch (const std::out_of_range&) {
    fail(ErrorCode::Parse, "number out of range '" + text + "'");
  }
}

namespace known {

GramMatrix identity(int dim) { return GramMatrix(RationalMatrix::identity(dim)); }

GramMatrix hexagonal() {
  RationalMatrix g(2);
  g(0, 0) = 1;
  g(1, 1) = 1;
  g(0, 1) = g(1, 0) = mpq_class(1, 2);
  return GramMatrix(std::move(g));
}

GramMatrix fcc() {
  RationalMatrix g(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = i == j ? 2 : 1;
  return GramMatrix(std::move(g));
}

}  // namespace known

}  // namespace systole
