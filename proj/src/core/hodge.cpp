#include "systole/hodge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>

#include <Eigen/Sparse>

#include "systole/error.hpp"

namespace systole {

// ---------------------------------------------------------------------------
// Mesh

std::array<int, 2> TorusMesh::edge_step(int kind) {
  switch (kind) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    default: return {1, 1};
  }
}

TorusMesh::TorusMesh(const Mat2& lattice, int n) : lattice_(lattice), n_(n) {
  if (n < kMinResolution) {
    std::ostringstream os;
    os << "mesh resolution " << n << " is below the minimum " << kMinResolution;
    fail(ErrorCode::Resolution, os.str());
  }
  if (!lattice.allFinite() || std::abs(lattice.determinant()) <= 1e-12 * lattice.squaredNorm())
    fail(ErrorCode::DegenerateLattice, "deck lattice basis is degenerate");

  const double h = spacing();
  faces_.reserve(face_count());
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      const Vec2 o(i * h, j * h);
      Face lower{{vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1)},
                 {o, o + Vec2(h, 0), o + Vec2(h, h)},
                 {EdgeRef{edge(i, j, 0), +1}, EdgeRef{edge(i + 1, j, 1), +1},
                  EdgeRef{edge(i, j, 2), -1}}};
      Face upper{{vertex(i, j), vertex(i + 1, j + 1), vertex(i, j + 1)},
                 {o, o + Vec2(h, h), o + Vec2(0, h)},
                 {EdgeRef{edge(i, j, 2), +1}, EdgeRef{edge(i, j + 1, 0), -1},
                  EdgeRef{edge(i, j, 1), -1}}};
      faces_.push_back(lower);
      faces_.push_back(upper);
    }
  }
  edge_faces_.assign(edge_count(), {-1, -1});
  for (int f = 0; f < face_count(); ++f) {
    for (const auto& er : faces_[f].edges) {
      auto& slot = edge_faces_[er.edge];
      (slot[0] < 0 ? slot[0] : slot[1]) = f;
    }
  }
  for (const auto& slot : edge_faces_)
    if (slot[0] < 0 || slot[1] < 0) fail(ErrorCode::Numerical, "mesh edge is not shared by two faces");
}

void TorusMesh::finish(const MetricField& metric) {
  metrics_.reserve(face_count());
  for (const auto& f : faces_) {
    const Vec2 c = (f.corners[0] + f.corners[1] + f.corners[2]) / 3.0;
    const FaceMetric m = metric(c.x(), c.y());
    if (!(m.uu > 0.0) || !(m.det() > 0.0) || !std::isfinite(m.uv))
      fail(ErrorCode::InvalidArgument, "face metric is not positive definite");
    metrics_.push_back(m);
  }
}

TorusMesh TorusMesh::conformal(const Mat2& lattice, int n, const ScalarField& phi) {
  TorusMesh mesh(lattice, n);
  const Mat2 flat = lattice.transpose() * lattice;
  mesh.conformal_factor_.resize(mesh.vertex_count());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      mesh.conformal_factor_[mesh.vertex(i, j)] = std::exp(2.0 * phi(double(i) / n, double(j) / n));
  mesh.finish([&](double s, double t) {
    const double w = std::exp(2.0 * phi(s, t));
    return FaceMetric{w * flat(0, 0), w * flat(0, 1), w * flat(1, 1)};
  });
  return mesh;
}

TorusMesh TorusMesh::with_metric(const Mat2& lattice, int n, const MetricField& metric) {
  TorusMesh mesh(lattice, n);
  mesh.finish(metric);
  return mesh;
}

double TorusMesh::face_area(int f) const {
  const double h = spacing();
  return std::sqrt(metrics_[f].det()) * 0.5 * h * h;
}

double TorusMesh::total_area() const {
  double a = 0.0;
  for (int f = 0; f < face_count(); ++f) a += face_area(f);
  return a;
}

int TorusMesh::face_at(double s, double t) const {
  s -= std::floor(s);
  t -= std::floor(t);
  int i = std::min(static_cast<int>(s * n_), n_ - 1);
  int j = std::min(static_cast<int>(t * n_), n_ - 1);
  const double fs = s * n_ - i;
  const double ft = t * n_ - j;
  return 2 * (i + n_ * j) + (ft <= fs ? 0 : 1);
}

void TorusMesh::write_off(std::ostream& os) const {
  // Unwrapped (N+1)^2 grid so the fundamental domain renders as a sheet.
  const int m = n_ + 1;
  os << "OFF\n" << m * m << ' ' << face_count() << " 0\n";
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const Vec2 x = lattice_ * Vec2(double(i) / n_, double(j) / n_);
      os << x.x() << ' ' << x.y() << " 0\n";
    }
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) {
      const int a = i + m * j, b = a + 1, c = a + m + 1, d = a + m;
      os << "3 " << a << ' ' << b << ' ' << c << '\n';
      os << "3 " << a << ' ' << c << ' ' << d << '\n';
    }
}

// ---------------------------------------------------------------------------
// Forms

DiscreteOneForm closed_reference_form(const TorusMesh& mesh, CohomologyClass klass) {
  const int n = mesh.resolution();
  const double h = mesh.spacing();
  DiscreteOneForm out{std::vector<double>(mesh.edge_count(), 0.0)};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < 3; ++k) {
        const auto step = TorusMesh::edge_step(k);
        out.edge_values[mesh.edge(i, j, k)] =
            static_cast<double>(klass.a) * step[0] * h + static_cast<double>(klass.b) * step[1] * h;
      }
  return out;
}

std::vector<double> exterior_derivative(const TorusMesh& mesh, const DiscreteOneForm& form) {
  std::vector<double> out;
  out.reserve(mesh.face_count());
  for (const auto& f : mesh.faces()) {
    double s = 0.0;
    for (const auto& e : f.edges) s += e.sign * form.edge_values[e.edge];
    out.push_back(s);
  }
  return out;
}

std::array<double, 2> periods(const TorusMesh& mesh, const DiscreteOneForm& form) {
  std::array<double, 2> p{0.0, 0.0};
  for (int i = 0; i < mesh.resolution(); ++i) {
    p[0] += form.edge_values[mesh.edge(i, 0, 0)];
    p[1] += form.edge_values[mesh.edge(0, i, 1)];
  }
  return p;
}

namespace {

// Rows are the lifted displacements corners[1]-corners[0], corners[2]-corners[0].
Mat2 corner_frame(const Face& f) {
  Mat2 e;
  e.row(0) = (f.corners[1] - f.corners[0]).transpose();
  e.row(1) = (f.corners[2] - f.corners[0]).transpose();
  return e;
}

// Gradient operator: corner values (f0, f1, f2) -> covector.
Eigen::Matrix<double, 2, 3> gradient_operator(const Face& f) {
  Eigen::Matrix<double, 2, 3> diff;
  diff << -1, 1, 0, -1, 0, 1;
  return corner_frame(f).inverse() * diff;
}

}  // namespace

Vec2 face_covector(const TorusMesh& mesh, const DiscreteOneForm& form, int face) {
  const Face& f = mesh.faces()[face];
  const double w01 = f.edges[0].sign * form.edge_values[f.edges[0].edge];
  const double w12 = f.edges[1].sign * form.edge_values[f.edges[1].edge];
  const double w20 = f.edges[2].sign * form.edge_values[f.edges[2].edge];
  const double scale = 1.0 + std::max({std::abs(w01), std::abs(w12), std::abs(w20)});
  if (std::abs(w01 + w12 + w20) > 1e-9 * scale) {
    std::ostringstream os;
    os << "edge values on face " << face << " are not closed (circulation " << w01 + w12 + w20 << ")";
    fail(ErrorCode::Reconstruction, os.str());
  }
  // xi . (c1 - c0) = w01, xi . (c2 - c0) = w01 + w12
  return corner_frame(f).inverse() * Vec2(w01, w01 + w12);
}

std::vector<double> face_norms(const TorusMesh& mesh, const DiscreteOneForm& form) {
  std::vector<double> out(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Vec2 xi = face_covector(mesh, form, f);
    out[f] = std::sqrt(std::max(0.0, xi.dot(mesh.face_metrics()[f].inverse() * xi)));
  }
  return out;
}

double lp_norm(const TorusMesh& mesh, const DiscreteOneForm& form, double p) {
  if (!(p >= 1.0)) fail(ErrorCode::InvalidArgument, "p must lie in [1, inf]");
  const auto norms = face_norms(mesh, form);
  if (std::isinf(p)) return *std::max_element(norms.begin(), norms.end());
  double s = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) s += std::pow(norms[f], p) * mesh.face_area(f);
  return std::pow(s, 1.0 / p);
}

double normalized_lp_norm(const TorusMesh& mesh, const DiscreteOneForm& form, double p) {
  const double v = lp_norm(mesh, form, p);
  if (std::isinf(p)) return v;
  return v * std::pow(mesh.total_area(), -1.0 / p);
}

DiscreteOneForm differential(const TorusMesh& mesh, const std::vector<double>& potential) {
  const int n = mesh.resolution();
  DiscreteOneForm out{std::vector<double>(mesh.edge_count(), 0.0)};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < 3; ++k) {
        const auto step = TorusMesh::edge_step(k);
        out.edge_values[mesh.edge(i, j, k)] =
            potential[mesh.vertex(i + step[0], j + step[1])] - potential[mesh.vertex(i, j)];
      }
  return out;
}

DiscreteOneForm add(const DiscreteOneForm& a, const DiscreteOneForm& b) {
  DiscreteOneForm out = a;
  for (std::size_t e = 0; e < out.edge_values.size(); ++e) out.edge_values[e] += b.edge_values[e];
  return out;
}

std::vector<double> codifferential(const TorusMesh& mesh, const DiscreteOneForm& form) {
  std::vector<double> out(mesh.vertex_count(), 0.0);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces()[f];
    const Vec2 flux = mesh.face_area(f) * (mesh.face_metrics()[f].inverse() * face_covector(mesh, form, f));
    const auto grad = gradient_operator(face);
    for (int c = 0; c < 3; ++c) out[face.vertices[c]] += grad.col(c).dot(flux);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Harmonic representative: minimize sum_f A_f |xi0 + grad f|^2_g over f.
// Normal equations K f = -b with K the metric P1 stiffness matrix; the
// constant kernel is removed by pinning vertex 0.

HarmonicResult harmonic_representative(const TorusMesh& mesh, CohomologyClass klass) {
  const int nv = mesh.vertex_count();
  const DiscreteOneForm reference = closed_reference_form(mesh, klass);
  HarmonicResult out;
  if (klass.is_zero()) {
    out.form = reference;
    out.potential.assign(nv, 0.0);
    return out;
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * mesh.face_count());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv - 1);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Face& face = mesh.faces()[f];
    const auto grad = gradient_operator(face);
    const Mat2 ginv = mesh.face_metrics()[f].inverse();
    const double area = mesh.face_area(f);
    const Eigen::Matrix3d k = area * grad.transpose() * ginv * grad;
    const Eigen::Vector3d b = area * grad.transpose() * (ginv * face_covector(mesh, reference, f));
    for (int a = 0; a < 3; ++a) {
      const int va = face.vertices[a];
      if (va == 0) continue;
      rhs(va - 1) -= b(a);
      for (int c = 0; c < 3; ++c) {
        const int vc = face.vertices[c];
        if (vc == 0) continue;
        triplets.emplace_back(va - 1, vc - 1, k(a, c));
      }
    }
  }
  Eigen::SparseMatrix<double> stiffness(nv - 1, nv - 1);
  stiffness.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(stiffness);
  if (solver.info() != Eigen::Success) fail(ErrorCode::Numerical, "Laplace factorization failed");
  const Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success) fail(ErrorCode::Numerical, "Laplace solve failed");

  out.potential.assign(nv, 0.0);
  for (int v = 1; v < nv; ++v) out.potential[v] = x(v - 1);
  out.form = add(reference, differential(mesh, out.potential));

  const auto div = codifferential(mesh, out.form);
  for (double d : div) out.codifferential_residual = std::max(out.codifferential_residual, std::abs(d));
  if (out.codifferential_residual > kSolverTolerance) {
    std::ostringstream os;
    os << "harmonic solve did not converge: codifferential residual " << out.codifferential_residual;
    fail(ErrorCode::Numerical, os.str());
  }
  return out;
}

NormTable holder_chain(const TorusMesh& mesh, CohomologyClass klass, const std::vector<double>& ps) {
  if (klass.is_zero()) fail(ErrorCode::Domain, "the Hölder chain needs a nonzero class");
  if (!std::is_sorted(ps.begin(), ps.end()))
    fail(ErrorCode::InvalidArgument, "p list must be sorted ascending");
  if (std::find(ps.begin(), ps.end(), 2.0) == ps.end())
    fail(ErrorCode::InvalidArgument, "p list must contain 2");

  const HarmonicResult harmonic = harmonic_representative(mesh, klass);
  NormTable table;
  for (double p : ps)
    table.entries.push_back({p, normalized_lp_norm(mesh, harmonic.form, p), p != 2.0});

  table.monotone = true;
  table.min_increment = kInfinity;
  const NormEntry* prev = nullptr;
  for (const auto& e : table.entries) {
    if (e.p < 2.0) continue;
    if (prev) {
      const double inc = e.value - prev->value;
      table.min_increment = std::min(table.min_increment, inc);
      if (inc < -kHolderSlack) table.monotone = false;
    }
    prev = &e;
  }
  return table;
}

// ---------------------------------------------------------------------------
// Shortest noncontractible loops on the Z^2 cover.

double edge_length(const TorusMesh& mesh, int e) {
  const auto step = TorusMesh::edge_step(e % 3);
  const Vec2 d(step[0] * mesh.spacing(), step[1] * mesh.spacing());
  double len = 0.0;
  for (int f : mesh.edge_faces(e)) len += std::sqrt(d.dot(mesh.face_metrics()[f].matrix() * d));
  return 0.5 * len;
}

namespace {

struct Arc {
  int to;
  int dx, dy;  // deck offset picked up along the arc
  double length;
};

double segment_length(const TorusMesh& mesh, const Vec2& start, const Vec2& d) {
  const int samples = 8 * static_cast<int>(std::max(std::abs(d.x()), std::abs(d.y())) * mesh.resolution() + 0.5);
  double len = 0.0;
  for (int q = 0; q < samples; ++q) {
    const Vec2 p = start + (q + 0.5) / samples * d;
    const FaceMetric& g = mesh.face_metrics()[mesh.face_at(p.x(), p.y())];
    len += std::sqrt(d.dot(g.matrix() * d)) / samples;
  }
  return len;
}

std::vector<std::vector<Arc>> build_graph(const TorusMesh& mesh, int stencil) {
  const int n = mesh.resolution();
  const double h = mesh.spacing();
  std::vector<std::vector<Arc>> adj(mesh.vertex_count());
  auto link = [&](int i, int j, int a, int b, double len) {
    const int ti = i + a, tj = j + b;
    const int dx = (ti >= n) - (ti < 0);
    const int dy = (tj >= n) - (tj < 0);
    const int from = mesh.vertex(i, j), to = mesh.vertex(ti, tj);
    adj[from].push_back({to, dx, dy, len});
    adj[to].push_back({from, -dx, -dy, len});
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < 3; ++k) {
        const auto step = TorusMesh::edge_step(k);
        link(i, j, step[0], step[1], edge_length(mesh, mesh.edge(i, j, k)));
      }
  if (stencil > 1) {
    for (int a = 0; a <= stencil; ++a)
      for (int b = -stencil; b <= stencil; ++b) {
        if (a == 0 && b <= 0) continue;
        if (std::gcd(a, std::abs(b)) != 1) continue;
        const bool mesh_edge = (a == 1 && b == 0) || (a == 0 && b == 1) || (a == 1 && b == 1);
        if (mesh_edge) continue;
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i)
            link(i, j, a, b, segment_length(mesh, Vec2(i * h, j * h), Vec2(a * h, b * h)));
      }
  }
  return adj;
}

struct ClassTarget {
  int dx, dy;
};

// One Dijkstra per source on the window [-w, w]^2 of the cover.
LoopResult search(const TorusMesh& mesh, const std::vector<std::vector<Arc>>& adj,
                  const std::vector<ClassTarget>& targets, int stencil) {
  const int n = mesh.resolution();
  const int nv = mesh.vertex_count();
  int w = 1;
  for (const auto& t : targets) w = std::max({w, std::abs(t.dx) + 1, std::abs(t.dy) + 1});
  const int side = 2 * w + 1;
  auto node = [&](int v, int dx, int dy) { return v + nv * ((dx + w) + side * (dy + w)); };

  std::vector<char> is_target(side * side, 0);
  for (const auto& t : targets) is_target[(t.dx + w) + side * (t.dy + w)] = 1;

  // A loop whose class has a nonzero t-period crosses the rows j < stencil,
  // and one with a nonzero s-period crosses the columns i < stencil.
  std::vector<int> sources;
  for (int j = 0; j < std::min(stencil, n); ++j)
    for (int i = 0; i < n; ++i) sources.push_back(mesh.vertex(i, j));
  for (int i = 0; i < std::min(stencil, n); ++i)
    for (int j = stencil; j < n; ++j) sources.push_back(mesh.vertex(i, j));

  std::vector<double> dist(static_cast<std::size_t>(nv) * side * side, kInfinity);
  std::vector<int> touched;
  LoopResult best{kInfinity, {}};
  using Item = std::pair<double, int>;

  for (int src : sources) {
    for (int t : touched) dist[t] = kInfinity;
    touched.clear();
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    const int start = node(src, 0, 0);
    dist[start] = 0.0;
    touched.push_back(start);
    heap.emplace(0.0, start);
    while (!heap.empty()) {
      const auto [d, id] = heap.top();
      heap.pop();
      if (d > dist[id]) continue;
      if (d >= best.length) break;
      const int v = id % nv;
      const int cell = id / nv;
      const int dx = cell % side - w;
      const int dy = cell / side - w;
      if (v == src && is_target[cell]) {
        best = {d, {dx, dy}};
        break;
      }
      for (const Arc& arc : adj[v]) {
        const int ndx = dx + arc.dx, ndy = dy + arc.dy;
        if (std::abs(ndx) > w || std::abs(ndy) > w) continue;
        const int nid = node(arc.to, ndx, ndy);
        const double nd = d + arc.length;
        if (nd < dist[nid]) {
          if (dist[nid] == kInfinity) touched.push_back(nid);
          dist[nid] = nd;
          heap.emplace(nd, nid);
        }
      }
    }
  }
  return best;
}

void check_stencil(int stencil) {
  if (stencil < 1) fail(ErrorCode::InvalidArgument, "stencil must be >= 1");
}

}  // namespace

LoopResult shortest_loop(const TorusMesh& mesh, const LoopSearchOptions& options) {
  check_stencil(options.stencil);
  const Mat2& a = mesh.lattice();
  double bound = options.class_bound;
  if (bound <= 0.0) {
    const GramMatrix deck(Matrix(a.transpose() * a));
    bound = 2.0 * shortest_vectors(deck).lambda1;
  }
  std::vector<ClassTarget> targets;
  const GramMatrix deck(Matrix(a.transpose() * a));
  for (const auto& v : enumerate_ball(deck, bound * bound * (1.0 + 1e-12))) {
    targets.push_back({static_cast<int>(v[0]), static_cast<int>(v[1])});
    targets.push_back({static_cast<int>(-v[0]), static_cast<int>(-v[1])});
  }
  if (targets.empty()) fail(ErrorCode::InvalidArgument, "class bound admits no nonzero deck class");
  const auto adj = build_graph(mesh, options.stencil);
  LoopResult r = search(mesh, adj, targets, options.stencil);
  if (r.klass.a < 0 || (r.klass.a == 0 && r.klass.b < 0)) r.klass = {-r.klass.a, -r.klass.b};
  return r;
}

LoopResult shortest_loop_in_classes(const TorusMesh& mesh, const std::vector<CohomologyClass>& classes,
                                    const LoopSearchOptions& options) {
  check_stencil(options.stencil);
  std::vector<ClassTarget> targets;
  for (const auto& k : classes) {
    if (k.is_zero()) fail(ErrorCode::Domain, "loop class must be nonzero");
    const int a = static_cast<int>(k.a), b = static_cast<int>(k.b);
    targets.push_back({a, b});
    targets.push_back({-a, -b});
  }
  if (targets.empty()) fail(ErrorCode::InvalidArgument, "no loop classes given");
  const auto adj = build_graph(mesh, options.stencil);
  return search(mesh, adj, targets, options.stencil);
}

double shortest_loop_in_class(const TorusMesh& mesh, CohomologyClass klass,
                              const LoopSearchOptions& options) {
  return shortest_loop_in_classes(mesh, {klass}, options).length;
}

LoewnerReport loewner_check(const TorusMesh& mesh, const LoopSearchOptions& options) {
  const LoopResult loop = shortest_loop(mesh, options);
  LoewnerReport rep;
  rep.systole = loop.length;
  rep.klass = loop.klass;
  rep.area = mesh.total_area();
  rep.ratio = loop.length * loop.length / rep.area;
  rep.bound = 2.0 / std::sqrt(3.0) + kLoewnerSlack / mesh.resolution();
  rep.pass = rep.ratio <= rep.bound;
  return rep;
}

ConfsysReport confsys_estimate(const TorusMesh& mesh) {
  const DiscreteOneForm w1 = harmonic_representative(mesh, {1, 0}).form;
  const DiscreteOneForm w2 = harmonic_representative(mesh, {0, 1}).form;
  Mat2 m = Mat2::Zero();
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Vec2 a = face_covector(mesh, w1, f);
    const Vec2 b = face_covector(mesh, w2, f);
    const Mat2 ginv = mesh.face_metrics()[f].inverse();
    const double area = mesh.face_area(f);
    m(0, 0) += area * a.dot(ginv * a);
    m(0, 1) += area * a.dot(ginv * b);
    m(1, 1) += area * b.dot(ginv * b);
  }
  m(1, 0) = m(0, 1);
  ConfsysReport rep;
  rep.cohomology_gram = m;
  rep.homology_gram = m.inverse();
  rep.homology_gram = 0.5 * (rep.homology_gram + rep.homology_gram.transpose()).eval();
  rep.confsys = shortest_vectors(GramMatrix(Matrix(rep.homology_gram))).lambda1;
  return rep;
}

ConstantNormCheck check_constant_norm(const TorusMesh& mesh, const DiscreteOneForm& form, double tol) {
  const auto norms = face_norms(mesh, form);
  double weighted = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) weighted += norms[f] * mesh.face_area(f);
  const double mean = weighted / mesh.total_area();
  if (!(mean > 0.0)) fail(ErrorCode::Domain, "constant-norm check of the zero form");
  const auto [lo, hi] = std::minmax_element(norms.begin(), norms.end());
  ConstantNormCheck out;
  out.deviation = (*hi - *lo) / mean;
  out.constant = out.deviation <= tol;
  return out;
}

}  // namespace systole
