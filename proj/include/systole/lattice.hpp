#pragma once

// Lattice primitives: Gram matrices, duals, LLL reduction, Fincke-Pohst
// shortest-vector enumeration and the product lambda1(L) * lambda1(L*).
//
// A lattice is carried by its Gram matrix G (G_ij = <b_i, b_j>).  Two
// arithmetic routes exist: double precision everywhere, and an exact route
// where the Gram matrix is rational and squared minima are certified in Q.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gmpxx.h>

namespace systole {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = std::vector<std::int64_t>;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Square matrix over Q, row-major.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  explicit RationalMatrix(int dim) : dim_(dim), data_(std::size_t(dim) * dim) {}

  int dim() const noexcept { return dim_; }
  mpq_class& operator()(int i, int j) { return data_[std::size_t(i) * dim_ + j]; }
  const mpq_class& operator()(int i, int j) const {
    return data_[std::size_t(i) * dim_ + j];
  }

  Matrix to_double() const;
  static RationalMatrix identity(int dim);

 private:
  int dim_ = 0;
  std::vector<mpq_class> data_;
};

/// Exact inverse by Gauss-Jordan; throws DegenerateLattice when singular.
RationalMatrix inverse(const RationalMatrix& m);

enum class Arithmetic { Float, Exact };

inline constexpr int kDefaultDimensionCap = 12;
inline constexpr double kShellTolerance = 1e-9;
inline constexpr double kIllConditionedThreshold = 1e12;

/// Symmetric positive-definite Gram matrix.  Construction validates the
/// invariants, so every live GramMatrix is usable by the enumerator.
/// When built from rationals the exact entries are kept alongside the
/// double copy.
class GramMatrix {
 public:
  explicit GramMatrix(Matrix entries);
  explicit GramMatrix(RationalMatrix entries);

  int dim() const noexcept { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const noexcept { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  bool has_exact() const noexcept { return exact_.has_value(); }
  const RationalMatrix& exact() const;

  double determinant() const;
  /// Upper-triangular R with G = R^T R.
  Matrix upper_factor() const;

  /// v^T G v for an integer coefficient vector.
  double norm2(std::span<const std::int64_t> v) const;
  mpq_class exact_norm2(std::span<const std::int64_t> v) const;

  /// c * G; exact entries are kept when c is rational.
  GramMatrix scaled(double c) const;
  GramMatrix scaled(const mpq_class& c) const;
  /// U^T G U.
  GramMatrix transformed(const IntMatrix& u) const;

 private:
  Matrix entries_;
  std::optional<RationalMatrix> exact_;
};

struct LatticeBasis {
  Matrix columns;  // b x b, one basis vector per column
};

struct ShortVectorSet {
  double lambda1 = 0.0;
  /// Present when computed on the exact route.
  std::optional<mpq_class> lambda1_squared_exact;
  std::vector<IntVector> vectors;  // one per +/- pair, sorted
  double radius_used = 0.0;
};

struct ReducedBasis {
  GramMatrix gram;
  IntMatrix transform;  // gram = U^T G U
};

struct EnumerationOptions {
  Arithmetic arithmetic = Arithmetic::Float;
  int dimension_cap = kDefaultDimensionCap;
  double shell_tolerance = kShellTolerance;
};

GramMatrix gram_from_basis(const LatticeBasis& basis);

/// G^{-1}.  Exact inverse when G carries rationals.
GramMatrix dual_gram(const GramMatrix& g);

/// LLL with delta = 0.99 on the Gram form.
ReducedBasis reduce_basis(const GramMatrix& g);

ShortVectorSet shortest_vectors(const GramMatrix& g,
                                const EnumerationOptions& options = {});

/// All nonzero v (one per sign pair) with v^T G v <= bound2.  Used by the
/// oracles in the tests as well as internally; no reduction is applied.
std::vector<IntVector> enumerate_ball(const GramMatrix& g, double bound2);

struct BmProduct {
  double value = 0.0;
  double lambda1 = 0.0;
  double dual_lambda1 = 0.0;
  /// lambda1(L)^2 * lambda1(L*)^2 in Q, exact route only.
  std::optional<mpq_class> value_squared_exact;
};

BmProduct bm_product_detail(const GramMatrix& g,
                            const EnumerationOptions& options = {});
double bm_product(const GramMatrix& g, const EnumerationOptions& options = {});

/// Keep the representative whose first nonzero coefficient is positive.
IntVector sign_normalized(IntVector v);
std::int64_t gcd_of(std::span<const std::int64_t> v);

/// Parses "3", "-0.25", "1/3", "1e-3" into an exact rational.
mpq_class parse_rational(const std::string& text);

/// Built-in Gram matrices used throughout the tests and the CLI.
namespace known {
GramMatrix identity(int dim);
GramMatrix hexagonal();
GramMatrix fcc();
}  // namespace known

}  // namespace systole
