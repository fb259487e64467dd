#include "systole/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

#include "systole/error.hpp"

namespace systole {

void OptimizerConfig::validate() const {
  if (restarts < 1 || max_iters < 1 || reduce_every < 1 || stall_window < 1)
    fail(ErrorCode::InvalidArgument, "optimizer counts must be positive");
  if (!(step_decay > 0.0 && step_decay < 1.0))
    fail(ErrorCode::InvalidArgument, "step_decay must lie in (0, 1)");
  if (!(step_growth >= 1.0))
    fail(ErrorCode::InvalidArgument, "step_growth must be at least 1");
  if (!(initial_step > 0.0) || !(tolerance > 0.0))
    fail(ErrorCode::InvalidArgument, "initial_step and tolerance must be positive");
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer applied twice
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(seed) ^ (stream * 0xd1342543de82ef95ULL + 1));
}

GramMatrix normalize_det(const GramMatrix& g) {
  const double det = g.determinant();
  return g.scaled(std::pow(det, -1.0 / g.dim()));
}

namespace {

std::optional<GramMatrix> try_gram(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Matrix l = llt.matrixL();
  for (int i = 0; i < m.rows(); ++i)
    if (!(l(i, i) > 1e-12)) return std::nullopt;
  try {
    return normalize_det(GramMatrix(m));
  } catch (const Error&) {
    return std::nullopt;
  }
}

double objective(const GramMatrix& g) { return bm_product(g); }

// Steepest ascent direction of log bm at a unit-determinant G, restricted to
// the quadratics within `window` (relative) of the primal and dual minima:
// the minimum-norm element of conv{A_v} + conv{B_w}, found by Frank-Wolfe.
// Zero when the active gradients admit no common ascent direction.
Matrix ascent_direction(const GramMatrix& current, double window) {
  const Matrix& g = current.entries();
  const int n = static_cast<int>(g.rows());
  const Matrix inv = g.inverse();
  const GramMatrix dual(Matrix(0.5 * (inv + inv.transpose())));

  auto near_minimal = [&](const GramMatrix& form) {
    const double l1 = shortest_vectors(form).lambda1;
    return enumerate_ball(form, l1 * l1 * (1.0 + window));
  };
  std::vector<Matrix> primal, dual_grads;
  for (const IntVector& iv : near_minimal(current)) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = static_cast<double>(iv[i]);
    primal.push_back(v * v.transpose() / v.dot(g * v) - inv / n);
  }
  for (const IntVector& iw : near_minimal(dual)) {
    Vector w(n);
    for (int i = 0; i < n; ++i) w(i) = static_cast<double>(iw[i]);
    const Vector u = inv * w;
    dual_grads.push_back(-u * u.transpose() / w.dot(u) + inv / n);
  }

  std::vector<double> alpha(primal.size(), 1.0 / primal.size());
  std::vector<double> beta(dual_grads.size(), 1.0 / dual_grads.size());
  auto combine = [&] {
    Matrix d = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < primal.size(); ++i) d += alpha[i] * primal[i];
    for (std::size_t j = 0; j < dual_grads.size(); ++j) d += beta[j] * dual_grads[j];
    return d;
  };
  Matrix d = combine();
  for (int it = 0; it < 200; ++it) {
    auto vertex = [&](const std::vector<Matrix>& set) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < set.size(); ++i)
        if ((set[i].array() * d.array()).sum() < (set[best].array() * d.array()).sum()) best = i;
      return best;
    };
    const std::size_t i = vertex(primal), j = vertex(dual_grads);
    const Matrix target = primal[i] + dual_grads[j];
    const Matrix delta = target - d;
    const double denom = delta.squaredNorm();
    if (denom == 0.0) break;
    const double t = std::clamp(-(d.array() * delta.array()).sum() / denom, 0.0, 1.0);
    if (t == 0.0) break;
    for (auto& x : alpha) x *= 1.0 - t;
    for (auto& x : beta) x *= 1.0 - t;
    alpha[i] += t;
    beta[j] += t;
    d = combine();
  }
  return d;
}

}  // namespace

OptimizationTrace perturb_ascend(const GramMatrix& g0, const OptimizerConfig& config, int stream) {
  config.validate();
  const int n = g0.dim();
  std::mt19937_64 rng(stream_seed(config.seed, static_cast<std::uint64_t>(stream)));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution guided(0.5);
  std::uniform_real_distribution<double> noise_exponent(-4.0, 0.0);

  GramMatrix current = normalize_det(GramMatrix(g0.entries()));
  double value = objective(current);
  OptimizationTrace trace{current, value, {{0, value}}, stream, 0, 0};

  double step = config.initial_step;
  int rejections = 0;
  std::optional<Matrix> direction;  // cached until the next accepted move or step change
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    trace.iterations_run = iter;
    if (n == 1) break;  // a single lattice up to scale

    Matrix s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) s(i, j) = s(j, i) = normal(rng);
    s /= s.norm();
    if (guided(rng)) {
      if (!direction) {
        const Matrix d = ascent_direction(current, std::min(0.1, 4.0 * step));
        direction = d.norm() > 1e-12 ? Matrix(d / d.norm()) : Matrix::Zero(n, n);
      }
      if (!direction->isZero()) {
        s = *direction + std::pow(10.0, noise_exponent(rng)) * s;
        s /= s.norm();
      }
    }
    const Matrix& g = current.entries();
    const Matrix candidate = g + (step * g.norm()) * s;

    bool accepted = false;
    if (auto next = try_gram(candidate)) {
      const double v = objective(*next);
      if (v > value) {
        current = std::move(*next);
        value = v;
        accepted = true;
        trace.history.emplace_back(iter, value);
        trace.best_gram = current;
        trace.best_value = value;
      }
    } else {
      ++trace.rejected_indefinite;
    }

    if (accepted) {
      direction.reset();
      rejections = 0;
      step = std::min(config.initial_step, step * config.step_growth);
    } else if (++rejections >= config.stall_window) {
      direction.reset();
      rejections = 0;
      step *= config.step_decay;
      if (step < config.tolerance) step = config.initial_step;
    }

    if (iter % config.reduce_every == 0) {
      current = normalize_det(reduce_basis(current).gram);
      trace.best_gram = current;
      direction.reset();
    }
  }
  return trace;
}

namespace {

GramMatrix random_start(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix r = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    r(i, i) = std::exp(0.3 * normal(rng));
    for (int j = i + 1; j < n; ++j) r(i, j) = 0.5 * normal(rng);
  }
  return normalize_det(GramMatrix(Matrix(r.transpose() * r)));
}

int worker_count() {
  if (const char* env = std::getenv("SYSTOLE_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 1;
}

}  // namespace

BmEstimate estimate_bm_constant(int dim, const OptimizerConfig& config) {
  if (dim < 1 || dim > 6) fail(ErrorCode::Domain, "estimate_bm_constant supports 1 <= b <= 6");
  config.validate();

  std::vector<std::optional<OptimizationTrace>> traces(config.restarts);
  auto run = [&](int r) {
    // Start stream is disjoint from the perturbation stream of the same restart.
    const GramMatrix start = random_start(dim, stream_seed(config.seed, 0x5eed0000ULL + r));
    traces[r] = perturb_ascend(start, config, r);
  };

  const int workers = std::min(worker_count(), config.restarts);
  if (workers <= 1) {
    for (int r = 0; r < config.restarts; ++r) run(r);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int r = w; r < config.restarts; r += workers) run(r);
      });
    for (auto& t : pool) t.join();
  }

  BmEstimate out{*traces[0], {}};
  for (int r = 0; r < config.restarts; ++r) {
    out.restart_values.push_back(traces[r]->best_value);
    if (traces[r]->best_value > out.best.best_value) out.best = *traces[r];
  }
  return out;
}

BoundsReport check_bounds(int dim, double value, double tolerance) {
  if (dim < 2) fail(ErrorCode::Domain, "check_bounds requires b >= 2");
  const double e = std::numbers::e;
  const double pi = std::numbers::pi;
  BoundsReport rep;
  rep.dim = dim;
  rep.value = value;
  rep.upper_bound = 2.0 * dim / 3.0;
  rep.pass = value <= rep.upper_bound + tolerance;
  rep.asymptotic_low = dim / (2.0 * pi * e);
  rep.asymptotic_high = dim / (pi * e);
  return rep;
}

}  // namespace systole
