#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "systole/error.hpp"
#include "systole/lattice.hpp"

using namespace systole;

namespace {

RationalMatrix rational(std::initializer_list<std::initializer_list<const char*>> rows) {
  const int n = static_cast<int>(rows.size());
  RationalMatrix m(n);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (const char* x : row) m(i, j++) = parse_rational(x);
    ++i;
  }
  return m;
}

EnumerationOptions exact() {
  EnumerationOptions o;
  o.arithmetic = Arithmetic::Exact;
  return o;
}

}  // namespace

TEST_CASE("gram_from_basis reproduces hand dot products") {
  LatticeBasis id{Matrix::Identity(2, 2)};
  CHECK(gram_from_basis(id).entries().isApprox(Matrix::Identity(2, 2)));

  LatticeBasis hex{Matrix(2, 2)};
  hex.columns << 1, 0.5, 0, std::sqrt(3.0) / 2;
  const Matrix g = gram_from_basis(hex).entries();
  CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g(1, 1) == doctest::Approx(1.0).epsilon(1e-15));

  LatticeBasis fcc{Matrix(3, 3)};
  fcc.columns << 1, 1, 0, 1, 0, 1, 0, 1, 1;
  Matrix expected(3, 3);
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  CHECK((gram_from_basis(fcc).entries() - expected).norm() < 1e-15);
}

TEST_CASE("singular basis is a degenerate lattice") {
  LatticeBasis b{Matrix(2, 2)};
  b.columns << 1, 2, 2, 4;
  try {
    gram_from_basis(b);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateLattice);
  }
}

TEST_CASE("GramMatrix rejects invalid input") {
  Matrix asym(2, 2);
  asym << 1, 0.3, 0.1, 1;
  CHECK_THROWS_AS(GramMatrix{asym}, Error);
  Matrix indef(2, 2);
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(GramMatrix{indef}, Error);
  Matrix nan(1, 1);
  nan << std::nan("");
  CHECK_THROWS_AS(GramMatrix{nan}, Error);
  CHECK_THROWS_AS(GramMatrix(rational({{"1", "1"}, {"1", "1"}})), Error);
}

TEST_CASE("dual_gram matches hand inverses") {
  CHECK(dual_gram(known::identity(3)).entries().isApprox(Matrix::Identity(3, 3)));

  const GramMatrix hd = dual_gram(known::hexagonal());
  REQUIRE(hd.has_exact());
  CHECK(hd.exact()(0, 0) == mpq_class(4, 3));
  CHECK(hd.exact()(0, 1) == mpq_class(-2, 3));
  CHECK(hd.exact()(1, 1) == mpq_class(4, 3));

  const GramMatrix fd = dual_gram(known::fcc());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(fd.exact()(i, j) == (i == j ? mpq_class(3, 4) : mpq_class(-1, 4)));

  Matrix f(2, 2);
  f << 2.0, 0.3, 0.3, 0.7;
  const Matrix inv = dual_gram(GramMatrix(f)).entries();
  const double det = 2.0 * 0.7 - 0.09;
  CHECK(inv(0, 0) == doctest::Approx(0.7 / det).epsilon(1e-14));
  CHECK(inv(0, 1) == doctest::Approx(-0.3 / det).epsilon(1e-14));
}

TEST_CASE("dual_gram is an involution") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 30; ++t) {
    const GramMatrix g = oracle::random_float_gram(1 + t % 4, rng);
    CHECK((dual_gram(dual_gram(g)).entries() - g.entries()).norm() <= 1e-10 * g.entries().norm());
    const GramMatrix q = oracle::random_rational_gram(1 + t % 4, rng);
    const GramMatrix qq = dual_gram(dual_gram(q));
    for (int i = 0; i < q.dim(); ++i)
      for (int j = 0; j < q.dim(); ++j) CHECK(qq.exact()(i, j) == q.exact()(i, j));
  }
}

TEST_CASE("near-singular Gram is ill-conditioned") {
  Matrix g(2, 2);
  g << 1.0, 1.0 - 1e-14, 1.0 - 1e-14, 1.0;
  try {
    dual_gram(GramMatrix(g));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::IllConditioned || e.code() == ErrorCode::DegenerateLattice));
  }
}

TEST_CASE("reduce_basis returns a unimodular transform and the quality bound") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 60; ++t) {
    const int dim = 2 + t % 3;
    // Exact entries so the skewed basis carries no rounding of its own.
    const GramMatrix base = oracle::random_rational_gram(dim, rng);
    const GramMatrix g = base.transformed(oracle::random_unimodular(dim, rng, 20));
    const ReducedBasis r = reduce_basis(g);
    const Matrix u = r.transform.cast<double>();
    CHECK(std::abs(std::abs(u.determinant()) - 1.0) < 1e-9);
    CHECK((u.transpose() * g.entries() * u - r.gram.entries()).norm() <= 1e-9 * g.entries().norm());
    const double lambda2 = oracle::brute_force_svp(base).min2;
    CHECK(r.gram(0, 0) <= std::pow(2.0, dim - 1) * lambda2 * (1 + 1e-12));
    CHECK(shortest_vectors(r.gram).lambda1 == doctest::Approx(std::sqrt(lambda2)).epsilon(1e-12));
    CHECK(*shortest_vectors(r.gram, exact()).lambda1_squared_exact == oracle::brute_force_svp(base).min2_exact);
  }
}

TEST_CASE("shortest vectors of the reference lattices") {
  const ShortVectorSet z2 = shortest_vectors(known::identity(2));
  CHECK(z2.lambda1 == 1.0);
  CHECK(z2.vectors == std::vector<IntVector>{{0, 1}, {1, 0}});

  const ShortVectorSet hex = shortest_vectors(known::hexagonal(), exact());
  CHECK(hex.lambda1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*hex.lambda1_squared_exact == 1);
  CHECK(hex.vectors == std::vector<IntVector>{{0, 1}, {1, -1}, {1, 0}});

  const ShortVectorSet fcc = shortest_vectors(known::fcc(), exact());
  CHECK(*fcc.lambda1_squared_exact == 2);
  CHECK(fcc.vectors.size() == 6);

  const ShortVectorSet fccd = shortest_vectors(dual_gram(known::fcc()), exact());
  CHECK(*fccd.lambda1_squared_exact == mpq_class(3, 4));
  CHECK(fccd.vectors.size() == 4);
}

TEST_CASE("ShortVectorSet invariants on random lattices") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 80; ++t) {
    const GramMatrix g = oracle::random_float_gram(1 + t % 4, rng);
    const ShortVectorSet s = shortest_vectors(g);
    REQUIRE(!s.vectors.empty());
    for (const auto& v : s.vectors) {
      CHECK(std::abs(std::sqrt(g.norm2(v)) - s.lambda1) <= 1e-9 * s.lambda1);
      CHECK(gcd_of(v) == 1);
      CHECK(sign_normalized(v) == v);
    }
    for (std::size_t i = 0; i < s.vectors.size(); ++i)
      for (std::size_t j = 0; j < s.vectors.size(); ++j) {
        IntVector neg = s.vectors[j];
        for (auto& x : neg) x = -x;
        CHECK(s.vectors[i] != neg);
      }
    CHECK(std::is_sorted(s.vectors.begin(), s.vectors.end()));
  }
}

TEST_CASE("shortest_vectors agrees with brute force (float and exact)") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 60; ++t) {
    const int dim = 1 + t % 4;
    const GramMatrix gf = oracle::random_float_gram(dim, rng);
    const auto bf = oracle::brute_force_svp(gf);
    const ShortVectorSet sf = shortest_vectors(gf);
    CHECK(sf.vectors == bf.vectors);
    CHECK(sf.lambda1 == doctest::Approx(std::sqrt(bf.min2)).epsilon(1e-12));

    const GramMatrix gq = oracle::random_rational_gram(dim, rng);
    const auto bq = oracle::brute_force_svp(gq);
    const ShortVectorSet sq = shortest_vectors(gq, exact());
    CHECK(sq.vectors == bq.vectors);
    CHECK(*sq.lambda1_squared_exact == bq.min2_exact);
  }
}

TEST_CASE("lambda1 scales with the square root of the Gram scale") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const GramMatrix g = oracle::random_float_gram(2 + t % 3, rng);
    const double c = 0.1 + 0.3 * t;
    const ShortVectorSet a = shortest_vectors(g), b = shortest_vectors(g.scaled(c));
    CHECK(b.lambda1 == doctest::Approx(std::sqrt(c) * a.lambda1).epsilon(1e-12));
    CHECK(a.vectors == b.vectors);
  }
}

TEST_CASE("lambda1 is invariant under unimodular change of basis") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 40; ++t) {
    const int dim = 2 + t % 3;
    const GramMatrix g = oracle::random_rational_gram(dim, rng);
    const IntMatrix u = oracle::random_unimodular(dim, rng);
    const ShortVectorSet a = shortest_vectors(g, exact());
    const ShortVectorSet b = shortest_vectors(g.transformed(u), exact());
    CHECK(*a.lambda1_squared_exact == *b.lambda1_squared_exact);
    CHECK(a.vectors.size() == b.vectors.size());
  }
}

TEST_CASE("bm_product reference values") {
  CHECK(bm_product(known::identity(1), exact()) == 1.0);
  CHECK(bm_product(known::identity(3), exact()) == 1.0);
  CHECK(std::abs(bm_product(known::hexagonal(), exact()) - 2.0 / std::sqrt(3.0)) <= 1e-12);
  CHECK(std::abs(bm_product(known::fcc(), exact()) - std::sqrt(1.5)) <= 1e-12);
  const BmProduct h = bm_product_detail(known::hexagonal(), exact());
  CHECK(*h.value_squared_exact == mpq_class(4, 3));
  CHECK(h.dual_lambda1 == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("bm_product is scale-free, basis-free and symmetric under duality") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    const int dim = 1 + t % 4;
    const GramMatrix g = oracle::random_rational_gram(dim, rng);
    const mpq_class v = *bm_product_detail(g, exact()).value_squared_exact;
    CHECK(*bm_product_detail(g.scaled(mpq_class(7, 3)), exact()).value_squared_exact == v);
    CHECK(*bm_product_detail(dual_gram(g), exact()).value_squared_exact == v);
    CHECK(*bm_product_detail(g.transformed(oracle::random_unimodular(dim, rng)), exact()).value_squared_exact == v);
  }
}

TEST_CASE("dimension cap is a capacity error") {
  EnumerationOptions o;
  o.dimension_cap = 3;
  try {
    shortest_vectors(known::identity(4), o);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Capacity);
  }
}

TEST_CASE("enumerate_ball against the box oracle") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const GramMatrix g = oracle::random_float_gram(1 + t % 3, rng);
    const double bound2 = 2.5 * g(0, 0);
    std::vector<IntVector> expected;
    const int box = static_cast<int>(std::ceil(oracle::coefficient_bound(g.entries(), bound2)));
    oracle::for_each_in_box(g.dim(), box, [&](const IntVector& v) {
      if (oracle::positive_leading(v) && oracle::quad(g.entries(), v) <= bound2) expected.push_back(v);
    });
    std::sort(expected.begin(), expected.end());
    CHECK(enumerate_ball(g, bound2) == expected);
  }
}

TEST_CASE("parse_rational forms") {
  CHECK(parse_rational("3") == 3);
  CHECK(parse_rational("-0.25") == mpq_class(-1, 4));
  CHECK(parse_rational("1/3") == mpq_class(1, 3));
  CHECK(parse_rational("1e-3") == mpq_class(1, 1000));
  CHECK(parse_rational("2.5E2") == 250);
  CHECK_THROWS_AS(parse_rational("abc"), Error);
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
}

TEST_CASE("sign normalization and gcd") {
  CHECK(sign_normalized({0, -2, 3}) == IntVector{0, 2, -3});
  CHECK(sign_normalized({1, -1}) == IntVector{1, -1});
  const IntVector v{4, -6, 10};
  CHECK(gcd_of(v) == 2);
}
