#pragma once

// Discrete Hodge theory on triangulated 2-tori.
//
// The fundamental domain is parametrized by (s, t) in [0,1)^2, mapped to the
// plane by the deck basis A (x = A (s,t)^T).  An N x N grid is split into
// 2N^2 triangles; every triangle carries a constant 2x2 metric expressed in
// (s, t) coordinates.  The flat metric is A^T A; conformal metrics multiply
// it by exp(2 phi) at the triangle barycenter, and arbitrary face metrics can
// be supplied directly.
//
// Edges are stored once, oriented from vertex (i,j) to (i,j)+step with step
// in {(1,0), (0,1), (1,1)}, so a 1-form is one real per edge and
// antisymmetry holds by construction.

#include <array>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "systole/lattice.hpp"

namespace systole {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

/// Symmetric positive-definite [[uu, uv], [uv, vv]].
struct FaceMetric {
  double uu = 1.0;
  double uv = 0.0;
  double vv = 1.0;

  double det() const { return uu * vv - uv * uv; }
  Mat2 matrix() const { return (Mat2() << uu, uv, uv, vv).finished(); }
  Mat2 inverse() const { return (Mat2() << vv, -uv, -uv, uu).finished() / det(); }
};

using ScalarField = std::function<double(double, double)>;
using MetricField = std::function<FaceMetric(double, double)>;

struct EdgeRef {
  int edge;
  int sign;  // +1 if the face boundary runs along the stored orientation
};

struct Face {
  std::array<int, 3> vertices;
  std::array<Vec2, 3> corners;  // lifted (s,t) positions, corners[0] at the cell origin
  std::array<EdgeRef, 3> edges;  // boundary edges: 0->1, 1->2, 2->0
};

inline constexpr int kMinResolution = 8;

class TorusMesh {
 public:
  /// Conformally flat mesh: face metric exp(2 phi(barycenter)) A^T A.
  static TorusMesh conformal(const Mat2& lattice, int n, const ScalarField& phi);
  /// Arbitrary per-face metric sampled at barycenters.
  static TorusMesh with_metric(const Mat2& lattice, int n, const MetricField& metric);

  const Mat2& lattice() const noexcept { return lattice_; }
  int resolution() const noexcept { return n_; }
  double spacing() const noexcept { return 1.0 / n_; }

  int vertex_count() const noexcept { return n_ * n_; }
  int edge_count() const noexcept { return 3 * n_ * n_; }
  int face_count() const noexcept { return 2 * n_ * n_; }
  int euler_characteristic() const noexcept {
    return vertex_count() - edge_count() + face_count();
  }

  int vertex(int i, int j) const { return wrap(i) + n_ * wrap(j); }
  /// Edge leaving (i,j); kind 0 = +s, 1 = +t, 2 = diagonal.
  int edge(int i, int j, int kind) const { return 3 * vertex(i, j) + kind; }
  /// (di, dj) of an edge kind.
  static std::array<int, 2> edge_step(int kind);

  const std::vector<Face>& faces() const noexcept { return faces_; }
  const std::vector<FaceMetric>& face_metrics() const noexcept { return metrics_; }
  const std::vector<double>& conformal_factor() const noexcept { return conformal_factor_; }
  /// The (up to two) faces adjacent to an edge.
  const std::array<int, 2>& edge_faces(int e) const { return edge_faces_[e]; }

  double face_area(int f) const;
  double total_area() const;
  int face_at(double s, double t) const;

  void write_off(std::ostream& os) const;

 private:
  TorusMesh(const Mat2& lattice, int n);
  void finish(const MetricField& metric);
  int wrap(int i) const { return ((i % n_) + n_) % n_; }

  Mat2 lattice_;
  int n_;
  std::vector<Face> faces_;
  std::vector<FaceMetric> metrics_;
  std::vector<double> conformal_factor_;
  std::vector<std::array<int, 2>> edge_faces_;
};

struct DiscreteOneForm {
  std::vector<double> edge_values;
};

/// Integer periods over the two deck generators (the s-loop and t-loop).
struct CohomologyClass {
  std::int64_t a = 0;
  std::int64_t b = 0;
  bool is_zero() const { return a == 0 && b == 0; }
};

DiscreteOneForm closed_reference_form(const TorusMesh& mesh, CohomologyClass klass);

/// Sum of edge values around each face; zero for closed forms.
std::vector<double> exterior_derivative(const TorusMesh& mesh, const DiscreteOneForm& form);

/// Integral along the s-loop (j = 0 row) and the t-loop (i = 0 column).
std::array<double, 2> periods(const TorusMesh& mesh, const DiscreteOneForm& form);

/// Constant covector on a face in (s,t) coordinates; throws Reconstruction
/// when the three edge values disagree beyond tolerance.
Vec2 face_covector(const TorusMesh& mesh, const DiscreteOneForm& form, int face);

/// Pointwise norm per face, |xi|_g = sqrt(xi^T g^{-1} xi).
std::vector<double> face_norms(const TorusMesh& mesh, const DiscreteOneForm& form);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// (integral |w|^p dA)^{1/p}; p = kInfinity takes the max over faces.
double lp_norm(const TorusMesh& mesh, const DiscreteOneForm& form, double p);
/// lp_norm * area^{-1/p}.
double normalized_lp_norm(const TorusMesh& mesh, const DiscreteOneForm& form, double p);

/// Exact form d f.
DiscreteOneForm differential(const TorusMesh& mesh, const std::vector<double>& potential);
DiscreteOneForm add(const DiscreteOneForm& a, const DiscreteOneForm& b);

struct HarmonicResult {
  DiscreteOneForm form;
  std::vector<double> potential;
  double codifferential_residual = 0.0;  // max |weak divergence| over vertices
};

inline constexpr double kSolverTolerance = 1e-10;

/// omega0 + df minimizing the discrete L^2 energy; throws Numerical when the
/// codifferential residual exceeds kSolverTolerance.
HarmonicResult harmonic_representative(const TorusMesh& mesh, CohomologyClass klass);

/// Weak codifferential per vertex: sum_f A_f grad(hat_i)^T g_f^{-1} xi_f.
std::vector<double> codifferential(const TorusMesh& mesh, const DiscreteOneForm& form);

struct NormEntry {
  double p = 2.0;
  double value = 0.0;       // normalized norm of the harmonic representative
  bool upper_bound = false;  // surrogate for the infimum (p != 2)
};

struct NormTable {
  std::vector<NormEntry> entries;
  bool monotone = false;  // over entries with p >= 2
  double min_increment = 0.0;
};

inline constexpr double kHolderSlack = 1e-8;

NormTable holder_chain(const TorusMesh& mesh, CohomologyClass klass, const std::vector<double>& ps);

struct LoopSearchOptions {
  /// Flat length |A h| bound on the deck classes searched; <= 0 means
  /// 2 lambda1 of the deck lattice.
  double class_bound = 0.0;
  /// 1: mesh edges only.  k > 1 adds straight segments to (i+a, j+b) for
  /// coprime (a, b) with max(|a|,|b|) <= k, lengths integrated over faces.
  int stencil = 1;
};

struct LoopResult {
  double length = 0.0;
  CohomologyClass klass;
};

/// Metric length of a mesh edge: mean of its lengths in the adjacent faces.
double edge_length(const TorusMesh& mesh, int e);

LoopResult shortest_loop(const TorusMesh& mesh, const LoopSearchOptions& options = {});
double shortest_loop_in_class(const TorusMesh& mesh, CohomologyClass klass,
                              const LoopSearchOptions& options = {});
/// Shortest loop whose class is any of `classes` (sign ignored).
LoopResult shortest_loop_in_classes(const TorusMesh& mesh, const std::vector<CohomologyClass>& classes,
                                    const LoopSearchOptions& options = {});

inline constexpr double kLoewnerSlack = 1.0;  // tau(N) = kLoewnerSlack / N

struct LoewnerReport {
  double systole = 0.0;
  double area = 0.0;
  double ratio = 0.0;
  double bound = 0.0;  // 2/sqrt(3) + tau(N)
  bool pass = false;
  CohomologyClass klass;
};

LoewnerReport loewner_check(const TorusMesh& mesh, const LoopSearchOptions& options = {});

struct ConfsysReport {
  double confsys = 0.0;
  Mat2 cohomology_gram;  // L^2 Gram of the harmonic basis
  Mat2 homology_gram;    // its inverse
};

ConfsysReport confsys_estimate(const TorusMesh& mesh);

struct ConstantNormCheck {
  bool constant = false;
  double deviation = 0.0;  // (max - min) / mean
};

ConstantNormCheck check_constant_norm(const TorusMesh& mesh, const DiscreteOneForm& form,
                                      double tol);

}  // namespace systole
