#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "systole/error.hpp"
#include "systole/hodge.hpp"
#include "systole/torus.hpp"

using namespace systole;

namespace {

constexpr double kPi = std::numbers::pi;
const double kHex = 2.0 / std::sqrt(3.0);

Mat2 lattice_of(const GramMatrix& g) { return g.upper_factor(); }

ScalarField flat() {
  return [](double, double) { return 0.0; };
}

// Smooth periodic conformal exponent with a few random modes.
ScalarField random_phi(std::mt19937_64& rng, double amplitude) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0), phase(0.0, 2 * kPi);
  std::uniform_int_distribution<int> mode(-2, 2);
  struct Term {
    double a;
    int k, m;
    double p;
  };
  std::vector<Term> terms;
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    int k = mode(rng), m = mode(rng);
    if (k == 0 && m == 0) k = 1;
    terms.push_back({unit(rng), k, m, phase(rng)});
    total += std::abs(terms.back().a);
  }
  for (auto& t : terms) t.a *= amplitude / total;
  return [terms](double s, double t) {
    double v = 0.0;
    for (const auto& term : terms) v += term.a * std::sin(2 * kPi * (term.k * s + term.m * t) + term.p);
    return v;
  };
}

// |w|_{L^2}^2 from edge values and corner positions only:
// per face sum w^T (E^T g E)^{-1} w * (1/2) sqrt(det(E^T g E)), where E holds
// the two edge vectors leaving corner 0 in parameter space.
double l2_squared_oracle(const TorusMesh& mesh, const DiscreteOneForm& form) {
  double total = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces()[f];
    Mat2 e;
    e.col(0) = face.corners[1] - face.corners[0];
    e.col(1) = face.corners[2] - face.corners[0];
    const Mat2 m = e.transpose() * mesh.face_metrics()[f].matrix() * e;
    const double w01 = face.edges[0].sign * form.edge_values[face.edges[0].edge];
    const double w20 = face.edges[2].sign * form.edge_values[face.edges[2].edge];
    const Vec2 w(w01, -w20);
    total += w.dot(m.inverse() * w) * 0.5 * std::sqrt(m.determinant());
  }
  return total;
}

double area_oracle(const Mat2& a, int n, const ScalarField& phi) {
  double s = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      s += std::exp(2 * phi((i + 2.0 / 3.0) / n, (j + 1.0 / 3.0) / n));
      s += std::exp(2 * phi((i + 1.0 / 3.0) / n, (j + 2.0 / 3.0) / n));
    }
  return s * std::abs(a.determinant()) / (2.0 * n * n);
}

}  // namespace

TEST_CASE("mesh counts and areas") {
  const TorusMesh sq = TorusMesh::conformal(Mat2::Identity(), 8, flat());
  CHECK(sq.vertex_count() == 64);
  CHECK(sq.face_count() == 128);
  CHECK(sq.euler_characteristic() == 0);
  CHECK(sq.total_area() == doctest::Approx(1.0).epsilon(1e-14));
  for (int e = 0; e < sq.edge_count(); ++e) {
    CHECK(sq.edge_faces(e)[0] >= 0);
    CHECK(sq.edge_faces(e)[1] >= 0);
    CHECK(sq.edge_faces(e)[0] != sq.edge_faces(e)[1]);
  }

  const TorusMesh hex = TorusMesh::conformal(lattice_of(known::hexagonal()), 16, flat());
  CHECK(std::abs(hex.total_area() - std::sqrt(3.0) / 2) <= 1e-12);

  const ScalarField phi = [](double s, double) { return 0.2 * std::sin(2 * kPi * s); };
  const TorusMesh bumped = TorusMesh::conformal(Mat2::Identity(), 16, phi);
  CHECK(bumped.total_area() > 1.0);
  CHECK(bumped.total_area() == doctest::Approx(area_oracle(Mat2::Identity(), 16, phi)).epsilon(1e-13));

  std::mt19937_64 rng(4);
  for (int t = 0; t < 5; ++t) {
    const ScalarField p = random_phi(rng, 0.3);
    const Mat2 a = lattice_of(known::hexagonal().scaled(1.7));
    CHECK(TorusMesh::conformal(a, 24, p).total_area() == doctest::Approx(area_oracle(a, 24, p)).epsilon(1e-13));
  }
}

TEST_CASE("mesh construction errors") {
  try {
    TorusMesh::conformal(Mat2::Identity(), 7, flat());
    FAIL("expected a resolution error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Resolution);
  }
  Mat2 degenerate;
  degenerate << 1, 2, 2, 4;
  CHECK_THROWS_AS(TorusMesh::conformal(degenerate, 8, flat()), Error);
}

TEST_CASE("closed reference forms") {
  const TorusMesh mesh = TorusMesh::conformal(Mat2::Identity(), 8, flat());
  const auto zero = closed_reference_form(mesh, {0, 0});
  for (double v : zero.edge_values) CHECK(v == 0.0);

  const auto dx = closed_reference_form(mesh, {1, 0});
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) {
      CHECK(dx.edge_values[mesh.edge(i, j, 0)] == doctest::Approx(1.0 / 8));
      CHECK(dx.edge_values[mesh.edge(i, j, 1)] == doctest::Approx(0.0));
      CHECK(dx.edge_values[mesh.edge(i, j, 2)] == doctest::Approx(1.0 / 8));
    }

  std::mt19937_64 rng(6);
  const TorusMesh curved = TorusMesh::conformal(lattice_of(known::hexagonal()), 16, random_phi(rng, 0.3));
  for (CohomologyClass k : {CohomologyClass{2, -1}, CohomologyClass{0, 3}, CohomologyClass{-5, 7}}) {
    const auto w = closed_reference_form(curved, k);
    for (double d : exterior_derivative(curved, w)) CHECK(std::abs(d) <= 1e-12);
    const auto per = periods(curved, w);
    CHECK(per[0] == doctest::Approx(double(k.a)).epsilon(1e-13));
    CHECK(per[1] == doctest::Approx(double(k.b)).epsilon(1e-13));
  }
}

TEST_CASE("flat harmonic forms are constant") {
  for (const GramMatrix& g : {known::identity(2), known::hexagonal()}) {
    const TorusMesh mesh = TorusMesh::conformal(lattice_of(g), 16, flat());
    for (CohomologyClass k : {CohomologyClass{1, 0}, CohomologyClass{0, 1}, CohomologyClass{2, -3}}) {
      const HarmonicResult h = harmonic_representative(mesh, k);
      const auto ref = closed_reference_form(mesh, k);
      for (int e = 0; e < mesh.edge_count(); ++e) CHECK(std::abs(h.form.edge_values[e] - ref.edge_values[e]) <= 1e-10);
      const ConstantNormCheck c = check_constant_norm(mesh, h.form, 1e-12);
      CHECK(c.constant);
      CHECK(c.deviation <= 1e-12);
    }
  }
  const TorusMesh mesh = TorusMesh::conformal(Mat2::Identity(), 8, flat());
  const HarmonicResult z = harmonic_representative(mesh, {0, 0});
  for (double v : z.form.edge_values) CHECK(std::abs(v) <= 1e-14);
}

TEST_CASE("harmonic representative on a perturbed metric") {
  const ScalarField phi = [](double s, double t) { return 0.2 * std::sin(2 * kPi * s) * std::sin(2 * kPi * t); };
  const TorusMesh mesh = TorusMesh::conformal(Mat2::Identity(), 32, phi);
  const HarmonicResult h = harmonic_representative(mesh, {1, 0});
  CHECK(h.codifferential_residual <= 1e-10);
  for (double r : codifferential(mesh, h.form)) CHECK(std::abs(r) <= 1e-10);
  const auto per = periods(mesh, h.form);
  CHECK(per[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(per[1]) <= 1e-12);
  for (double d : exterior_derivative(mesh, h.form)) CHECK(std::abs(d) <= 1e-12);
  CHECK_FALSE(check_constant_norm(mesh, h.form, 1e-3).constant);
}

TEST_CASE("L2 norm against an independent quadrature") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> normal;
  const TorusMesh mesh = TorusMesh::conformal(lattice_of(known::hexagonal()), 16, random_phi(rng, 0.3));
  for (int t = 0; t < 10; ++t) {
    std::vector<double> f(mesh.vertex_count());
    for (auto& x : f) x = normal(rng);
    const auto w = add(closed_reference_form(mesh, {t % 3 - 1, 1}), differential(mesh, f));
    const double oracle = std::sqrt(l2_squared_oracle(mesh, w));
    CHECK(lp_norm(mesh, w, 2.0) == doctest::Approx(oracle).epsilon(1e-12));
  }
  DiscreteOneForm zero{std::vector<double>(mesh.edge_count(), 0.0)};
  for (double p : {1.0, 2.0, 3.5, kInfinity}) CHECK(lp_norm(mesh, zero, p) == 0.0);
  CHECK_THROWS_AS(lp_norm(mesh, zero, 0.5), Error);
}

TEST_CASE("constant form on the unit flat torus has unit normalized norms") {
  const TorusMesh mesh = TorusMesh::conformal(Mat2::Identity(), 8, flat());
  const auto dx = closed_reference_form(mesh, {1, 0});
  for (double p : {1.0, 2.0, 4.0, 7.0, kInfinity})
    CHECK(normalized_lp_norm(mesh, dx, p) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("reconstruction rejects non-closed edge data") {
  const TorusMesh mesh = TorusMesh::conformal(Mat2::Identity(), 8, flat());
  auto w = closed_reference_form(mesh, {1, 0});
  w.edge_values[mesh.edge(3, 3, 2)] += 0.01;
  try {
    lp_norm(mesh, w, 2.0);
    FAIL("expected a reconstruction error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Reconstruction);
  }
}

TEST_CASE("harmonic representative minimizes L2 energy") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  const TorusMesh mesh = TorusMesh::conformal(Mat2::Identity(), 16, random_phi(rng, 0.4));
  const CohomologyClass k{1, 2};
  const HarmonicResult h = harmonic_representative(mesh, k);
  const double best = lp_norm(mesh, h.form, 2.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> f(mesh.vertex_count());
    const double scale = std::pow(10.0, -4.0 + 4.0 * t / 99.0);
    for (auto& x : f) x = scale * normal(rng);
    CHECK(best <= lp_norm(mesh, add(h.form, differential(mesh, f)), 2.0) + 1e-14);
  }
}

TEST_CASE("Hölder chain") {
  const std::vector<double> ps{1.0, 2.0, 4.0, kInfinity};
  const TorusMesh flat_mesh = TorusMesh::conformal(lattice_of(known::hexagonal()), 32, flat());
  const NormTable ft = holder_chain(flat_mesh, {1, 0}, ps);
  CHECK(ft.monotone);
  for (const auto& e : ft.entries) CHECK(std::abs(e.value - ft.entries[1].value) <= 1e-10);
  CHECK(ft.entries[0].upper_bound);
  CHECK_FALSE(ft.entries[1].upper_bound);

  std::mt19937_64 rng(20);
  for (int t = 0; t < 10; ++t) {
    const TorusMesh mesh = TorusMesh::conformal(Mat2::Identity(), 32, random_phi(rng, 0.2));
    const NormTable table = holder_chain(mesh, {1, t % 2}, {2.0, 4.0, kInfinity});
    CHECK(table.monotone);
    CHECK(table.min_increment >= -kHolderSlack);
    for (const auto& e : table.entries) CHECK((std::isfinite(e.value) && e.value > 0.0));
  }

  double previous = 0.0;
  for (double amp : {0.05, 0.1, 0.2, 0.4}) {
    const ScalarField phi = [amp](double s, double t) { return amp * std::sin(2 * kPi * s) * std::cos(2 * kPi * t); };
    const TorusMesh mesh = TorusMesh::conformal(Mat2::Identity(), 32, phi);
    const NormTable table = holder_chain(mesh, {1, 0}, {2.0, kInfinity});
    const double margin = table.entries[1].value - table.entries[0].value;
    CHECK(margin > previous);
    previous = margin;
  }

  CHECK_THROWS_AS(holder_chain(flat_mesh, {0, 0}, ps), Error);
  CHECK_THROWS_AS(holder_chain(flat_mesh, {1, 0}, {4.0, 2.0}), Error);
  CHECK_THROWS_AS(holder_chain(flat_mesh, {1, 0}, {1.0, 4.0}), Error);
}

TEST_CASE("shortest loops") {
  for (int n : {8, 16, 33}) {
    const LoopResult r = shortest_loop(TorusMesh::conformal(Mat2::Identity(), n, flat()));
    CHECK(r.length == doctest::Approx(1.0).epsilon(1e-14));
  }
  const TorusMesh hex = TorusMesh::conformal(lattice_of(known::hexagonal()), 32, flat());
  const double l1 = shortest_vectors(known::hexagonal()).lambda1;
  const LoopResult r = shortest_loop(hex);
  CHECK(r.length >= l1 - 1e-12);
  CHECK(r.length <= l1 * (1.0 + 2.0 / 32));

  // A bump far from the row j = 0 leaves that row's loop untouched.
  const ScalarField bump = [](double s, double t) {
    return 0.5 * std::exp(-((s - 0.5) * (s - 0.5) + (t - 0.5) * (t - 0.5)) / 0.005);
  };
  CHECK(shortest_loop(TorusMesh::conformal(Mat2::Identity(), 32, bump)).length == doctest::Approx(1.0).epsilon(1e-12));

  const TorusMesh sq = TorusMesh::conformal(Mat2::Identity(), 16, flat());
  CHECK(shortest_loop_in_class(sq, {1, -1}) == doctest::Approx(2.0));
  LoopSearchOptions wide;
  wide.stencil = 3;
  CHECK(shortest_loop_in_class(sq, {1, -1}, wide) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(shortest_loop_in_class(sq, {0, 0}), Error);
  LoopSearchOptions bad;
  bad.stencil = 0;
  CHECK_THROWS_AS(shortest_loop(sq, bad), Error);
}

TEST_CASE("Loewner check") {
  const TorusMesh sq = TorusMesh::conformal(Mat2::Identity(), 32, flat());
  const LoewnerReport s = loewner_check(sq);
  CHECK(s.ratio == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(s.pass);

  for (int n : {64, 128}) {
    const LoewnerReport h = loewner_check(TorusMesh::conformal(lattice_of(known::hexagonal()), n, flat()));
    CHECK(std::abs(h.ratio / kHex - 1.0) <= 0.02);
    CHECK(h.pass);
  }

  std::mt19937_64 rng(30);
  const Mat2 a = lattice_of(known::hexagonal());
  for (int t = 0; t < 5; ++t) {
    const LoewnerReport p = loewner_check(TorusMesh::conformal(a, 64, random_phi(rng, 0.2)));
    CHECK(p.ratio < kHex);
    CHECK(p.pass);
  }

  // The systolic loop of this metric runs along the anti-diagonal, where
  // straight segments make the length quadrature spectrally accurate.
  const ScalarField phi = [](double s, double t) { return 0.2 * std::sin(2 * kPi * s) * std::sin(2 * kPi * t); };
  LoopSearchOptions o;
  o.stencil = 3;
  const double limit = loewner_check(TorusMesh::conformal(a, 64, phi), o).ratio;
  CHECK(limit == doctest::Approx(loewner_check(TorusMesh::conformal(a, 32, phi), o).ratio).epsilon(1e-9));
  std::vector<double> ratios;
  for (int n : {16, 32, 64, 128}) ratios.push_back(loewner_check(TorusMesh::conformal(a, n, phi)).ratio);
  for (std::size_t i = 1; i < ratios.size(); ++i)
    CHECK(std::abs(ratios[i] - limit) <= std::abs(ratios[i - 1] - limit) + 1e-9);
}

TEST_CASE("conformal systole") {
  CHECK(confsys_estimate(TorusMesh::conformal(Mat2::Identity(), 16, flat())).confsys ==
        doctest::Approx(1.0).epsilon(1e-12));

  const GramMatrix hex = known::hexagonal();
  const TorusMesh mesh = TorusMesh::conformal(lattice_of(hex), 32, flat());
  const double flat_value = confsys_estimate(mesh).confsys;
  const SystoleReport torus = torus_systoles(FlatTorus(hex));
  CHECK(std::abs(flat_value - torus.stsys1 / std::sqrt(torus.volume)) <= 1e-10);

  const ConfsysReport rep = confsys_estimate(mesh);
  CHECK((rep.cohomology_gram * rep.homology_gram - Mat2::Identity()).norm() <= 1e-12);

  std::mt19937_64 rng(40);
  for (int t = 0; t < 5; ++t) {
    const double v = confsys_estimate(TorusMesh::conformal(lattice_of(hex), 32, random_phi(rng, 0.3))).confsys;
    CHECK(std::abs(v / flat_value - 1.0) <= 1e-8);
  }
}

TEST_CASE("constant norm check") {
  const TorusMesh mesh = TorusMesh::conformal(Mat2::Identity(), 16, flat());
  DiscreteOneForm zero{std::vector<double>(mesh.edge_count(), 0.0)};
  try {
    check_constant_norm(mesh, zero, 1e-6);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
  const ScalarField phi = [](double s, double t) { return 0.2 * std::sin(2 * kPi * s) * std::sin(2 * kPi * t); };
  const TorusMesh curved = TorusMesh::conformal(Mat2::Identity(), 32, phi);
  const ConstantNormCheck c = check_constant_norm(curved, harmonic_representative(curved, {1, 0}).form, 1e-3);
  CHECK_FALSE(c.constant);
  CHECK(c.deviation > 0.1);
}
