#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "systole/dual_criteria.hpp"
#include "systole/error.hpp"

using namespace systole;

namespace {

EnumerationOptions exact() {
  EnumerationOptions o;
  o.arithmetic = Arithmetic::Exact;
  return o;
}

// Rank of {s s^T} in Sym(R^b) via an SVD written against the test's own
// coordinates (diagonal, then sqrt(2) off-diagonal).
int span_rank(const std::vector<Vector>& footprint) {
  const int b = static_cast<int>(footprint.front().size());
  const int m = b * (b + 1) / 2;
  Matrix rows(footprint.size(), m);
  for (std::size_t r = 0; r < footprint.size(); ++r) {
    const Vector& s = footprint[r];
    int c = 0;
    for (int i = 0; i < b; ++i) rows(r, c++) = s(i) * s(i);
    for (int i = 0; i < b; ++i)
      for (int j = i + 1; j < b; ++j) rows(r, c++) = std::sqrt(2.0) * s(i) * s(j);
  }
  Eigen::JacobiSVD<Matrix> svd(rows);
  const auto sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-8 * sv(0)) ++rank;
  return rank;
}

Matrix random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ();
}

}  // namespace

TEST_CASE("footprint sizes") {
  CHECK(short_vector_footprint(known::identity(1)).size() == 2);
  CHECK(short_vector_footprint(known::hexagonal()).size() == 6);
  const auto z2 = short_vector_footprint(known::identity(2));
  REQUIRE(z2.size() == 4);
  // Z^2 is self-dual: the two halves coincide up to sign.
  for (int i = 0; i < 2; ++i) {
    bool matched = false;
    for (int j = 2; j < 4; ++j) matched = matched || (z2[i] - z2[j]).norm() < 1e-14 || (z2[i] + z2[j]).norm() < 1e-14;
    CHECK(matched);
  }
}

TEST_CASE("footprint vectors have the lattice minima as lengths") {
  const auto f = short_vector_footprint(known::fcc());
  REQUIRE(f.size() == 10);
  for (int i = 0; i < 6; ++i) CHECK(f[i].norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  for (int i = 6; i < 10; ++i) CHECK(f[i].norm() == doctest::Approx(std::sqrt(0.75)).epsilon(1e-14));
}

TEST_CASE("dual perfection of the reference lattices") {
  for (auto o : {EnumerationOptions{}, exact()}) {
    const auto z1 = is_dual_perfect(known::identity(1), o);
    CHECK(z1.is_dual_perfect);
    CHECK(z1.span_dim == 1);
    CHECK(z1.target_dim == 1);

    const auto hex = is_dual_perfect(known::hexagonal(), o);
    CHECK(hex.is_dual_perfect);
    CHECK(hex.span_dim == 3);
    CHECK(hex.footprint_size == 6);

    const auto fcc = is_dual_perfect(known::fcc(), o);
    CHECK(fcc.is_dual_perfect);
    CHECK(fcc.span_dim == 6);

    const auto z2 = is_dual_perfect(known::identity(2), o);
    CHECK_FALSE(z2.is_dual_perfect);
    CHECK(z2.span_dim == 2);

    const auto z3 = is_dual_perfect(known::identity(3), o);
    CHECK_FALSE(z3.is_dual_perfect);
    CHECK(z3.span_dim == 3);
    CHECK(z3.target_dim == 6);
  }
}

TEST_CASE("float and exact routes give the same span") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 40; ++t) {
    const GramMatrix g = oracle::random_rational_gram(1 + t % 4, rng);
    const auto a = is_dual_perfect(g);
    const auto b = is_dual_perfect(g, exact());
    CHECK(a.span_dim == b.span_dim);
    CHECK(a.is_dual_perfect == b.is_dual_perfect);
    CHECK(a.span_dim == span_rank(short_vector_footprint(g)));
    CHECK(a.span_dim <= a.target_dim);
    CHECK(a.is_dual_perfect == (a.span_dim == a.target_dim));
  }
}

TEST_CASE("span is invariant under isometries of the footprint") {
  std::mt19937_64 rng(2);
  for (auto g : {known::hexagonal(), known::fcc(), known::identity(3)}) {
    const auto f = short_vector_footprint(g);
    const int base = span_rank(f);
    CHECK(base == is_dual_perfect(g).span_dim);
    for (int t = 0; t < 5; ++t) {
      const Matrix q = random_orthogonal(g.dim(), rng);
      std::vector<Vector> rotated;
      for (const auto& s : f) rotated.push_back(q * s);
      CHECK(span_rank(rotated) == base);
    }
  }
}

TEST_CASE("certificates against the known constants") {
  const auto hex = certify_against_known(known::hexagonal(), exact());
  CHECK(hex.verdict == Verdict::CriticalWithinTol);
  CHECK(std::abs(*hex.gap) <= 1e-12);
  CHECK(hex.tolerance == kCriticalTolExact);

  CHECK(certify_against_known(known::fcc(), exact()).verdict == Verdict::CriticalWithinTol);
  CHECK(certify_against_known(known::fcc()).verdict == Verdict::CriticalWithinTol);
  CHECK(certify_against_known(known::fcc()).tolerance == kCriticalTolFloat);

  const auto z2 = certify_against_known(known::identity(2), exact());
  CHECK(z2.verdict == Verdict::Suboptimal);
  CHECK(*z2.gap == doctest::Approx(2.0 / std::sqrt(3.0) - 1.0).epsilon(1e-12));

  const auto z4 = certify_against_known(known::identity(4));
  CHECK(z4.verdict == Verdict::UnknownDimension);
  CHECK_FALSE(z4.known_constant.has_value());
  CHECK_FALSE(z4.gap.has_value());

  CHECK(std::string(verdict_name(Verdict::CriticalWithinTol)) == "critical-within-tol");
  CHECK(std::string(verdict_name(Verdict::UnknownDimension)) == "unknown-dimension");
}

TEST_CASE("critical certificates imply dual perfection") {
  std::mt19937_64 rng(77);
  std::vector<GramMatrix> candidates{known::identity(1), known::hexagonal(), known::fcc(),
                                     dual_gram(known::fcc()), known::hexagonal().scaled(mpq_class(5, 2))};
  for (int t = 0; t < 30; ++t) candidates.push_back(oracle::random_rational_gram(1 + t % 3, rng));
  for (const auto& g : candidates) {
    const auto c = certify_against_known(g, exact());
    if (c.verdict == Verdict::CriticalWithinTol) CHECK(is_dual_perfect(g, exact()).is_dual_perfect);
    CHECK(c.verdict != Verdict::ExceedsKnown);
  }
}

TEST_CASE("known constant table") {
  CHECK(*known_bm_constant(1) == 1.0);
  CHECK(*known_bm_constant(2) == doctest::Approx(1.1547005383792515).epsilon(1e-15));
  CHECK(*known_bm_constant(3) == doctest::Approx(1.2247448713915889).epsilon(1e-15));
  CHECK_FALSE(known_bm_constant(4).has_value());
  CHECK(*known_bm_constant_squared(2) == mpq_class(4, 3));
  CHECK(*known_bm_constant_squared(3) == mpq_class(3, 2));
}
