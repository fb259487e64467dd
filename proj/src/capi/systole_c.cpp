#include "systole/systole.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <string>

#include "../common/json_io.hpp"
#include "systole/dual_criteria.hpp"
#include "systole/error.hpp"
#include "systole/expr.hpp"
#include "systole/extremal.hpp"
#include "systole/optimizer.hpp"
#include "systole/torus.hpp"

struct systole_gram {
  systole::GramMatrix gram;
};

struct systole_mesh {
  systole::TorusMesh mesh;
};

namespace {

using namespace systole;
using io::Json;

constexpr const char* kVersion = "0.1.0";

thread_local std::string last_error;

template <class F>
int guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return SYSTOLE_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return SYSTOLE_E_PARSE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SYSTOLE_E_CAPACITY;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SYSTOLE_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(const Json& j, char** out) {
  require(out != nullptr, "output pointer is null");
  *out = duplicate(io::dump(j));
}

EnumerationOptions options_for(int mode) {
  EnumerationOptions o;
  if (mode == SYSTOLE_MODE_EXACT) o.arithmetic = Arithmetic::Exact;
  else require(mode == SYSTOLE_MODE_FLOAT, "mode must be SYSTOLE_MODE_FLOAT or SYSTOLE_MODE_EXACT");
  return o;
}

const char* mode_name(int mode) { return mode == SYSTOLE_MODE_EXACT ? "exact" : "float"; }

Json int_vector(const IntVector& v) {
  Json a = Json::array();
  for (auto x : v) a.push_back(x);
  return a;
}

Json gram_json(const GramMatrix& g) {
  Json rows = Json::array();
  for (int i = 0; i < g.dim(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < g.dim(); ++j) {
      if (g.has_exact()) row.push_back(g.exact()(i, j).get_str());
      else row.push_back(io::number(g(i, j)));
    }
    rows.push_back(row);
  }
  Json j;
  j["dim"] = g.dim();
  j["gram"] = rows;
  return j;
}

Json int_matrix_json(const IntMatrix& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json short_vectors_json(const ShortVectorSet& s) {
  Json j;
  j["lambda1"] = s.lambda1;
  if (s.lambda1_squared_exact) j["lambda1_squared"] = s.lambda1_squared_exact->get_str();
  j["radius_used"] = s.radius_used;
  j["count"] = s.vectors.size();
  Json vs = Json::array();
  for (const auto& v : s.vectors) vs.push_back(int_vector(v));
  j["vectors"] = vs;
  return j;
}

Json optional_number(const std::optional<double>& x) { return x ? io::number(*x) : Json(nullptr); }

Json identity_json(const IdentityCheck& c) {
  Json j;
  j["pass"] = c.pass;
  j["left"] = c.left;
  j["right"] = c.right;
  j["relative_deviation"] = c.relative_deviation;
  return j;
}

OptimizerConfig to_config(const systole_optimizer_config* c) {
  OptimizerConfig out;
  if (!c) return out;
  out.restarts = c->restarts;
  out.max_iters = c->max_iters;
  out.initial_step = c->initial_step;
  out.step_decay = c->step_decay;
  out.reduce_every = c->reduce_every;
  out.seed = c->seed;
  out.tolerance = c->tolerance;
  out.stall_window = c->stall_window;
  out.step_growth = c->step_growth;
  out.validate();
  return out;
}

Json trace_json(const OptimizationTrace& t) {
  Json j;
  j["restart_index"] = t.restart_index;
  j["best_value"] = t.best_value;
  j["best_gram"] = gram_json(t.best_gram);
  j["best_gram_det"] = t.best_gram.determinant();
  j["iterations_run"] = t.iterations_run;
  j["rejected_indefinite"] = t.rejected_indefinite;
  Json h = Json::array();
  for (const auto& [iter, value] : t.history) h.push_back(Json::array({iter, io::number(value)}));
  j["history"] = h;
  return j;
}

Json entry_of(const Json& array, std::size_t i, const char* what) {
  if (!array.is_array() || i >= array.size()) fail(ErrorCode::Parse, what);
  return array[i];
}

mpq_class rational_entry(const Json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return mpq_class(v.dump());
  if (v.is_number()) return parse_rational(v.dump());  // shortest round-trip text
  fail(ErrorCode::Parse, "gram entries must be numbers or numeric strings");
}

GramMatrix gram_from_document(const Json& doc, bool exact) {
  if (!doc.is_object()) fail(ErrorCode::Parse, "gram document must be an object");
  if (!doc.contains("gram")) fail(ErrorCode::Parse, "gram document needs a \"gram\" array");
  const Json& rows = doc["gram"];
  if (!rows.is_array() || rows.empty()) fail(ErrorCode::Parse, "\"gram\" must be a non-empty array of rows");
  const int dim = static_cast<int>(rows.size());
  if (doc.contains("dim")) {
    if (!doc["dim"].is_number_integer() || doc["dim"].get<int>() != dim)
      fail(ErrorCode::Parse, "\"dim\" does not match the number of rows");
  }
  RationalMatrix q(dim);
  Matrix d(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const Json& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      fail(ErrorCode::Parse, "row " + std::to_string(i) + " must have " + std::to_string(dim) + " entries");
    for (int j = 0; j < dim; ++j) {
      const Json v = entry_of(row, j, "bad row");
      if (exact) {
        q(i, j) = rational_entry(v);
      } else {
        if (v.is_number()) d(i, j) = v.get<double>();
        else d(i, j) = rational_entry(v).get_d();
      }
    }
  }
  return exact ? GramMatrix(q) : GramMatrix(d);
}

std::function<double(double, double)> field(const std::string& text, std::vector<std::string> vars) {
  auto e = std::make_shared<Expression>(text, std::move(vars));
  return [e](double a, double b) { return (*e)(a, b); };
}

}  // namespace

extern "C" {

const char* systole_version(void) { return kVersion; }
const char* systole_last_error(void) { return last_error.c_str(); }

const char* systole_status_name(int status) {
  if (status == SYSTOLE_E_INTERNAL) return "internal";
  if (status < 0 || status > SYSTOLE_E_RECONSTRUCTION) return "unknown";
  return error_code_name(static_cast<ErrorCode>(status));
}

void systole_string_free(char* s) { std::free(s); }

int systole_gram_create(int dim, const double* entries, systole_gram** out) {
  return guarded([&] {
    require(out && entries && dim >= 1, "invalid arguments");
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = entries[i * dim + j];
    *out = new systole_gram{GramMatrix(m)};
  });
}

int systole_gram_create_rational(int dim, const char* const* entries, systole_gram** out) {
  return guarded([&] {
    require(out && entries && dim >= 1, "invalid arguments");
    RationalMatrix m(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        require(entries[i * dim + j] != nullptr, "null entry");
        m(i, j) = parse_rational(entries[i * dim + j]);
      }
    *out = new systole_gram{GramMatrix(m)};
  });
}

int systole_gram_from_json(const char* text, int exact, systole_gram** out) {
  return guarded([&] {
    require(out && text, "invalid arguments");
    const std::string s(text);
    Json doc;
    try {
      doc = Json::parse(s);
    } catch (const nlohmann::json::parse_error& e) {
      const auto [line, col] = io::line_column(s, e.byte > 0 ? e.byte - 1 : 0);
      std::string msg = e.what();
      if (auto p = msg.find(": syntax error"); p != std::string::npos) msg = msg.substr(p + 2);
      fail(ErrorCode::Parse, "malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col) +
                                 ": " + msg);
    }
    *out = new systole_gram{gram_from_document(doc, exact != 0)};
  });
}

int systole_gram_from_basis(int dim, const double* columns, systole_gram** out) {
  return guarded([&] {
    require(out && columns && dim >= 1, "invalid arguments");
    LatticeBasis b{Matrix(dim, dim)};
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) b.columns(i, j) = columns[i * dim + j];
    *out = new systole_gram{gram_from_basis(b)};
  });
}

int systole_gram_known(const char* name, int dim, systole_gram** out) {
  return guarded([&] {
    require(out && name, "invalid arguments");
    const std::string n(name);
    if (n == "identity") {
      require(dim >= 1, "identity needs dim >= 1");
      *out = new systole_gram{known::identity(dim)};
    } else if (n == "hexagonal") {
      require(dim == 2 || dim == 0, "hexagonal is 2-dimensional");
      *out = new systole_gram{known::hexagonal()};
    } else if (n == "fcc") {
      require(dim == 3 || dim == 0, "fcc is 3-dimensional");
      *out = new systole_gram{known::fcc()};
    } else {
      fail(ErrorCode::InvalidArgument, "unknown lattice '" + n + "' (identity, hexagonal, fcc)");
    }
  });
}

void systole_gram_free(systole_gram* g) { delete g; }

int systole_gram_dim(const systole_gram* g, int* dim) {
  return guarded([&] {
    require(g && dim, "invalid arguments");
    *dim = g->gram.dim();
  });
}

int systole_gram_entries(const systole_gram* g, double* out) {
  return guarded([&] {
    require(g && out, "invalid arguments");
    const int n = g->gram.dim();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = g->gram(i, j);
  });
}

int systole_gram_to_json(const systole_gram* g, char** json) {
  return guarded([&] {
    require(g != nullptr, "null gram");
    emit(gram_json(g->gram), json);
  });
}

int systole_gram_normalized(const systole_gram* g, systole_gram** out) {
  return guarded([&] {
    require(g && out, "invalid arguments");
    *out = new systole_gram{normalize_det(g->gram)};
  });
}

int systole_dual_gram(const systole_gram* g, systole_gram** out) {
  return guarded([&] {
    require(g && out, "invalid arguments");
    *out = new systole_gram{dual_gram(g->gram)};
  });
}

int systole_reduce_basis_json(const systole_gram* g, char** json) {
  return guarded([&] {
    require(g != nullptr, "null gram");
    const ReducedBasis r = reduce_basis(g->gram);
    Json j;
    j["gram"] = gram_json(r.gram);
    j["transform"] = int_matrix_json(r.transform);
    emit(j, json);
  });
}

int systole_shortest_vectors_json(const systole_gram* g, int mode, char** json) {
  return guarded([&] {
    require(g != nullptr, "null gram");
    Json j;
    j["mode"] = mode_name(mode);
    j["dim"] = g->gram.dim();
    j.update(short_vectors_json(shortest_vectors(g->gram, options_for(mode))));
    emit(j, json);
  });
}

int systole_bm_product(const systole_gram* g, int mode, double* value) {
  return guarded([&] {
    require(g && value, "invalid arguments");
    *value = bm_product(g->gram, options_for(mode));
  });
}

int systole_bm_product_json(const systole_gram* g, int mode, char** json) {
  return guarded([&] {
    require(g != nullptr, "null gram");
    const EnumerationOptions o = options_for(mode);
    const BmProduct bm = bm_product_detail(g->gram, o);
    const DualCriticalCertificate cert = certify_against_known(g->gram, o);
    Json j;
    j["mode"] = mode_name(mode);
    j["dim"] = g->gram.dim();
    j["value"] = bm.value;
    if (bm.value_squared_exact) j["value_squared"] = bm.value_squared_exact->get_str();
    j["lambda1"] = bm.lambda1;
    j["dual_lambda1"] = bm.dual_lambda1;
    Json c;
    c["known_constant"] = optional_number(cert.known_constant);
    c["gap"] = optional_number(cert.gap);
    c["verdict"] = verdict_name(cert.verdict);
    c["tolerance"] = cert.tolerance;
    j["certificate"] = c;
    if (g->gram.dim() >= 2) {
      const BoundsReport b = check_bounds(g->gram.dim(), bm.value);
      Json bj;
      bj["upper_bound"] = b.upper_bound;
      bj["pass"] = b.pass;
      bj["asymptotic_window"] = Json::array({b.asymptotic_low, b.asymptotic_high});
      bj["asymptotic_window_informational"] = true;
      j["bounds"] = bj;
    }
    emit(j, json);
  });
}

int systole_dual_perfect_json(const systole_gram* g, int mode, char** json) {
  return guarded([&] {
    require(g != nullptr, "null gram");
    const EnumerationOptions o = options_for(mode);
    const RankOneSpanReport r = is_dual_perfect(g->gram, o);
    Json j;
    j["mode"] = mode_name(mode);
    j["dim"] = g->gram.dim();
    j["span_dim"] = r.span_dim;
    j["target_dim"] = r.target_dim;
    j["is_dual_perfect"] = r.is_dual_perfect;
    j["footprint_size"] = r.footprint_size;
    j["short_vectors"] = short_vectors_json(shortest_vectors(g->gram, o));
    j["dual_short_vectors"] = short_vectors_json(shortest_vectors(dual_gram(g->gram), o));
    emit(j, json);
  });
}

int systole_certify_json(const systole_gram* g, int mode, char** json) {
  return guarded([&] {
    require(g != nullptr, "null gram");
    const DualCriticalCertificate c = certify_against_known(g->gram, options_for(mode));
    Json j;
    j["mode"] = mode_name(mode);
    j["dim"] = g->gram.dim();
    j["bm_value"] = c.bm_value;
    j["known_constant"] = optional_number(c.known_constant);
    j["gap"] = optional_number(c.gap);
    j["verdict"] = verdict_name(c.verdict);
    j["tolerance"] = c.tolerance;
    emit(j, json);
  });
}

int systole_known_bm_constant(int dim, double* known) {
  return guarded([&] {
    require(known != nullptr, "null output");
    const auto k = known_bm_constant(dim);
    if (!k) fail(ErrorCode::Domain, "gamma'_b is only tabulated for b <= 3");
    *known = *k;
  });
}

void systole_optimizer_config_default(systole_optimizer_config* config) {
  if (!config) return;
  const OptimizerConfig d;
  *config = {d.restarts, d.max_iters, d.initial_step, d.step_decay, d.reduce_every,
             d.seed,     d.tolerance, d.stall_window, d.step_growth};
}

int systole_optimize_json(int dim, const systole_optimizer_config* config, char** json) {
  return guarded([&] {
    const OptimizerConfig c = to_config(config);
    const BmEstimate e = estimate_bm_constant(dim, c);
    Json j;
    j["dim"] = dim;
    Json cj;
    cj["restarts"] = c.restarts;
    cj["max_iters"] = c.max_iters;
    cj["initial_step"] = c.initial_step;
    cj["step_decay"] = c.step_decay;
    cj["reduce_every"] = c.reduce_every;
    cj["seed"] = c.seed;
    cj["tolerance"] = c.tolerance;
    cj["stall_window"] = c.stall_window;
    cj["step_growth"] = c.step_growth;
    j["config"] = cj;
    j["best_value"] = e.best.best_value;
    const auto known = known_bm_constant(dim);
    j["known_constant"] = optional_number(known);
    j["gap"] = known ? io::number(*known - e.best.best_value) : Json(nullptr);
    Json rv = Json::array();
    for (double v : e.restart_values) rv.push_back(io::number(v));
    j["restart_values"] = rv;
    if (dim >= 2) {
      const BoundsReport b = check_bounds(dim, e.best.best_value);
      Json bj;
      bj["upper_bound"] = b.upper_bound;
      bj["pass"] = b.pass;
      bj["asymptotic_window"] = Json::array({b.asymptotic_low, b.asymptotic_high});
      bj["asymptotic_window_informational"] = true;
      j["bounds"] = bj;
    }
    j["trace"] = trace_json(e.best);
    emit(j, json);
  });
}

int systole_perturb_ascend_json(const systole_gram* g, const systole_optimizer_config* config, int stream,
                                char** json) {
  return guarded([&] {
    require(g != nullptr, "null gram");
    emit(trace_json(perturb_ascend(g->gram, to_config(config), stream)), json);
  });
}

int systole_torus_verify_json(const systole_gram* g, int mode, char** json) {
  return guarded([&] {
    require(g != nullptr, "null gram");
    const EnumerationOptions o = options_for(mode);
    const FlatTorus torus(g->gram);
    const int n = torus.dim();
    const SystoleReport r = torus_systoles(torus, o);
    Json j;
    j["mode"] = mode_name(mode);
    j["dim"] = n;
    Json rep;
    rep["stsys1"] = r.stsys1;
    rep["confsys1"] = r.confsys1;
    rep["sys_nminus1"] = r.sys_nminus1;
    rep["volume"] = r.volume;
    rep["lhs"] = r.lhs;
    rep["rhs"] = r.rhs;
    rep["bound_only"] = r.bound_only;
    rep["equality_gap"] = optional_number(r.equality_gap);
    j["systole_report"] = rep;

    const InequalityCheck ineq = verify_main_inequality(torus, o);
    Json ij;
    ij["pass"] = ineq.pass;
    ij["lhs"] = ineq.lhs;
    ij["rhs"] = ineq.rhs;
    ij["gap"] = ineq.gap;
    ij["relative_gap"] = ineq.relative_gap;
    ij["bound_only"] = ineq.bound_only;
    j["main_inequality"] = ij;
    j["stable_conformal_relation"] = identity_json(verify_stable_conformal_relation(torus, o));

    Json coarea = Json::array();
    bool coarea_pass = true;
    auto add_class = [&](const IntVector& k) {
      const IdentityCheck c = coarea_lower_bound_check(torus, k);
      Json cj = identity_json(c);
      cj["class"] = int_vector(k);
      coarea.push_back(cj);
      coarea_pass = coarea_pass && c.pass;
    };
    for (int i = 0; i < n; ++i) {
      IntVector e(n, 0);
      e[i] = 1;
      add_class(e);
    }
    add_class(shortest_vectors(dual_gram(g->gram), o).vectors.front());
    j["coarea_checks"] = coarea;

    bool pass = ineq.pass && j["stable_conformal_relation"]["pass"].get<bool>() && coarea_pass;
    if (n == 1) {
      const HebdaReport h = hebda_specialization(torus);
      Json hj;
      hj["stsys1"] = h.stsys1;
      hj["sys_nminus1"] = h.sys_nminus1;
      hj["volume"] = h.volume;
      hj["product"] = h.product;
      hj["relative_deviation"] = h.relative_deviation;
      hj["pass"] = h.pass;
      j["circle_equality"] = hj;
      pass = pass && h.pass;
    }
    j["pass"] = pass;
    emit(j, json);
  });
}

int systole_coarea_check_json(const systole_gram* g, const int64_t* klass, char** json) {
  return guarded([&] {
    require(g && klass, "invalid arguments");
    const IntVector k(klass, klass + g->gram.dim());
    Json j = identity_json(coarea_lower_bound_check(FlatTorus(g->gram), k));
    j["class"] = int_vector(k);
    emit(j, json);
  });
}

int systole_mesh_create(const systole_gram* lattice, int n, const char* phi, systole_mesh** out) {
  return guarded([&] {
    require(lattice && out, "invalid arguments");
    if (lattice->gram.dim() != 2) fail(ErrorCode::Domain, "mesh lattice must be 2-dimensional");
    const Mat2 a = lattice->gram.upper_factor();
    ScalarField f = [](double, double) { return 0.0; };
    if (phi && *phi) f = field(phi, {"x", "y"});
    *out = new systole_mesh{TorusMesh::conformal(a, n, f)};
  });
}

void systole_mesh_free(systole_mesh* mesh) { delete mesh; }

int systole_mesh_area(const systole_mesh* mesh, double* area) {
  return guarded([&] {
    require(mesh && area, "invalid arguments");
    *area = mesh->mesh.total_area();
  });
}

int systole_mesh_write_off(const systole_mesh* mesh, const char* path) {
  return guarded([&] {
    require(mesh && path, "invalid arguments");
    std::ofstream os(path);
    if (!os) fail(ErrorCode::InvalidArgument, std::string("cannot open ") + path);
    mesh->mesh.write_off(os);
  });
}

int systole_hodge_report(const systole_mesh* mesh, const int64_t* classes, int n_classes, const double* ps,
                         int n_ps, char** json, char** csv) {
  return guarded([&] {
    require(mesh && classes && ps && n_classes >= 1 && n_ps >= 1, "invalid arguments");
    const TorusMesh& m = mesh->mesh;
    const std::vector<double> plist(ps, ps + n_ps);
    Json j;
    j["resolution"] = m.resolution();
    j["vertices"] = m.vertex_count();
    j["edges"] = m.edge_count();
    j["faces"] = m.face_count();
    j["area"] = m.total_area();
    Json tables = Json::array();
    std::string table_csv = "class_a,class_b,p,value,upper_bound\n";
    bool monotone = true;
    for (int c = 0; c < n_classes; ++c) {
      const CohomologyClass k{classes[2 * c], classes[2 * c + 1]};
      const NormTable t = holder_chain(m, k, plist);
      const HarmonicResult h = harmonic_representative(m, k);
      Json tj;
      tj["class"] = Json::array({k.a, k.b});
      Json entries = Json::array();
      for (const auto& e : t.entries) {
        Json ej;
        ej["p"] = io::number(e.p);
        ej["value"] = e.value;
        ej["upper_bound"] = e.upper_bound;
        entries.push_back(ej);
        table_csv += std::to_string(k.a) + "," + std::to_string(k.b) + "," +
                     (std::isinf(e.p) ? std::string("inf") : io::format_double(e.p)) + "," +
                     io::format_double(e.value) + "," + (e.upper_bound ? "true" : "false") + "\n";
      }
      tj["entries"] = entries;
      tj["monotone"] = t.monotone;
      tj["min_increment"] = io::number(t.min_increment);
      tj["codifferential_residual"] = h.codifferential_residual;
      const ConstantNormCheck cn = check_constant_norm(m, h.form, 1e-10);
      tj["constant_norm"] = cn.constant;
      tj["norm_deviation"] = cn.deviation;
      tables.push_back(tj);
      monotone = monotone && t.monotone;
    }
    j["norm_tables"] = tables;
    j["surrogates"] =
        "entries with upper_bound=true evaluate the harmonic representative, an upper bound for the infimum "
        "over the class";

    const LoewnerReport l = loewner_check(m);
    Json lj;
    lj["systole"] = l.systole;
    lj["class"] = Json::array({l.klass.a, l.klass.b});
    lj["area"] = l.area;
    lj["ratio"] = l.ratio;
    lj["bound"] = l.bound;
    lj["pass"] = l.pass;
    j["loewner"] = lj;

    const ConfsysReport cs = confsys_estimate(m);
    Json cj;
    cj["confsys"] = cs.confsys;
    cj["cohomology_gram"] = Json::array({Json::array({cs.cohomology_gram(0, 0), cs.cohomology_gram(0, 1)}),
                                         Json::array({cs.cohomology_gram(1, 0), cs.cohomology_gram(1, 1)})});
    cj["homology_gram"] = Json::array({Json::array({cs.homology_gram(0, 0), cs.homology_gram(0, 1)}),
                                       Json::array({cs.homology_gram(1, 0), cs.homology_gram(1, 1)})});
    j["confsys"] = cj;
    j["pass"] = monotone && l.pass;
    emit(j, json);
    if (csv) *csv = duplicate(table_csv);
  });
}

int systole_shortest_loop(const systole_mesh* mesh, double* length, int64_t* klass) {
  return guarded([&] {
    require(mesh && length, "invalid arguments");
    const LoopResult r = shortest_loop(mesh->mesh);
    *length = r.length;
    if (klass) {
      klass[0] = r.klass.a;
      klass[1] = r.klass.b;
    }
  });
}

int systole_confsys_estimate(const systole_mesh* mesh, double* confsys) {
  return guarded([&] {
    require(mesh && confsys, "invalid arguments");
    *confsys = confsys_estimate(mesh->mesh).confsys;
  });
}

int systole_construct_json(const char* rho, const char* c, double base_length, int m, int k, unsigned checks,
                           char** json) {
  return guarded([&] {
    require(rho != nullptr, "rho expression is required");
    const FiberFamily family(base_length, m, k, field(rho, {"u", "v"}));
    auto cexpr = std::make_shared<Expression>(c && *c ? c : "0", std::vector<std::string>{"u"});
    Json j;
    j["rho"] = rho;
    j["c"] = cexpr->text();
    j["base_length"] = base_length;
    j["grid"] = Json::array({m, k});
    const FiberValidation v = validate_fiber_family(family);
    Json vj;
    vj["ok"] = v.ok;
    vj["fiber_volume"] = v.fiber_volume;
    vj["worst_column"] = v.worst_column;
    vj["worst_deviation"] = v.worst_deviation;
    vj["tolerance"] = kFiberVolumeTolerance;
    j["fiber_validation"] = vj;
    const HorizontalLift lift = moser_lift(family, [cexpr](double u) { return (*cexpr)({u}); });
    j["lift_residual"] = lift.residual;
    const ConstructedMetric metric(family, lift);

    bool pass = true;
    Json cj;
    if (checks & SYSTOLE_CHECK_SUBMERSION) {
      const SubmersionCheck s = check_submersion(metric);
      cj["submersion"] = {{"pass", s.pass}, {"max_deviation", s.max_deviation}, {"tolerance", kSubmersionTolerance}};
      pass = pass && s.pass;
    }
    if (checks & SYSTOLE_CHECK_MINIMAL) {
      const MinimalFiberCheck s = check_minimal_fibers(metric);
      cj["minimal_fibers"] = {{"pass", s.pass}, {"residual", s.residual}, {"tolerance", s.tolerance}};
      pass = pass && s.pass;
    }
    if (checks & SYSTOLE_CHECK_HARMONIC) {
      const HarmonicNormCheck s = check_harmonic_constant_norm(metric);
      cj["harmonic_constant_norm"] = {{"pass", s.pass},
                                      {"deviation", s.deviation},
                                      {"tolerance", kHarmonicNormTolerance},
                                      {"mean_norm", s.mean_norm},
                                      {"resolution", kHarmonicCheckResolution}};
      pass = pass && s.pass;
    }
    if (checks & SYSTOLE_CHECK_HEBDA) {
      const HebdaToyReport h = hebda_equality(metric);
      const bool ok = std::abs(h.ratio - 1.0) <= 0.02;
      cj["hebda_equality"] = {{"pass", ok},
                              {"base_systole", h.base_systole},
                              {"fiber_systole", h.fiber_systole},
                              {"volume", h.volume},
                              {"ratio", h.ratio},
                              {"window", Json::array({0.98, 1.02})},
                              {"resolution", kHarmonicCheckResolution},
                              {"stencil", kHebdaStencil}};
      pass = pass && ok;
    }
    j["checks"] = cj;
    j["pass"] = pass;
    emit(j, json);
  });
}

}  // extern "C"
