#ifndef SYSTOLE_H
#define SYSTOLE_H

/* C interface to libsystole.
 *
 * Every function returns a status code; 0 is success.  On failure the
 * message for the calling thread is available from systole_last_error().
 * Strings returned through char** are owned by the caller and released with
 * systole_string_free().  Structured results are JSON documents with stable
 * key order and doubles printed with 17 significant digits.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SYSTOLE_API __declspec(dllexport)
#else
#define SYSTOLE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum systole_status {
  SYSTOLE_OK = 0,
  SYSTOLE_E_INVALID_ARGUMENT = 1,
  SYSTOLE_E_DEGENERATE_LATTICE = 2,
  SYSTOLE_E_ILL_CONDITIONED = 3,
  SYSTOLE_E_CAPACITY = 4,
  SYSTOLE_E_DOMAIN = 5,
  SYSTOLE_E_RESOLUTION = 6,
  SYSTOLE_E_NUMERICAL = 7,
  SYSTOLE_E_PRECONDITION = 8,
  SYSTOLE_E_PARSE = 9,
  SYSTOLE_E_RECONSTRUCTION = 10,
  SYSTOLE_E_INTERNAL = 99
};

enum systole_mode { SYSTOLE_MODE_FLOAT = 0, SYSTOLE_MODE_EXACT = 1 };

typedef struct systole_gram systole_gram;
typedef struct systole_mesh systole_mesh;

SYSTOLE_API const char* systole_version(void);
SYSTOLE_API const char* systole_last_error(void);
SYSTOLE_API const char* systole_status_name(int status);
SYSTOLE_API void systole_string_free(char* s);

/* ---- Gram matrices ---------------------------------------------------- */

/* Row-major dim x dim doubles. */
SYSTOLE_API int systole_gram_create(int dim, const double* entries, systole_gram** out);
/* Row-major rational strings ("1/2", "0.25", "3"); keeps exact entries. */
SYSTOLE_API int systole_gram_create_rational(int dim, const char* const* entries, systole_gram** out);
/* {"dim": b, "gram": [[...]]}; entries may be numbers or decimal/rational
 * strings.  exact != 0 keeps rational entries.  Malformed text fails with
 * SYSTOLE_E_PARSE and a message carrying line and column. */
SYSTOLE_API int systole_gram_from_json(const char* text, int exact, systole_gram** out);
/* Columns of a basis, row-major b x b (entry (i, j) = coordinate i of column j). */
SYSTOLE_API int systole_gram_from_basis(int dim, const double* columns, systole_gram** out);
/* "identity" (any dim), "hexagonal" (2), "fcc" (3); exact entries. */
SYSTOLE_API int systole_gram_known(const char* name, int dim, systole_gram** out);
SYSTOLE_API void systole_gram_free(systole_gram* g);

SYSTOLE_API int systole_gram_dim(const systole_gram* g, int* dim);
SYSTOLE_API int systole_gram_entries(const systole_gram* g, double* out);
SYSTOLE_API int systole_gram_to_json(const systole_gram* g, char** json);
SYSTOLE_API int systole_gram_normalized(const systole_gram* g, systole_gram** out);

/* ---- lattice core ----------------------------------------------------- */

SYSTOLE_API int systole_dual_gram(const systole_gram* g, systole_gram** out);
/* {"gram": ..., "transform": [[...]]} */
SYSTOLE_API int systole_reduce_basis_json(const systole_gram* g, char** json);
/* {"lambda1", "lambda1_squared"?, "radius_used", "vectors"} */
SYSTOLE_API int systole_shortest_vectors_json(const systole_gram* g, int mode, char** json);
SYSTOLE_API int systole_bm_product(const systole_gram* g, int mode, double* value);
SYSTOLE_API int systole_bm_product_json(const systole_gram* g, int mode, char** json);

/* ---- dual criteria ---------------------------------------------------- */

SYSTOLE_API int systole_dual_perfect_json(const systole_gram* g, int mode, char** json);
SYSTOLE_API int systole_certify_json(const systole_gram* g, int mode, char** json);
/* Sets *known to gamma'_b and returns SYSTOLE_OK for b <= 3; SYSTOLE_E_DOMAIN otherwise. */
SYSTOLE_API int systole_known_bm_constant(int dim, double* known);

/* ---- optimizer -------------------------------------------------------- */

typedef struct systole_optimizer_config {
  int restarts;
  int max_iters;
  double initial_step;
  double step_decay;
  int reduce_every;
  uint64_t seed;
  double tolerance;
  int stall_window;
  double step_growth;
} systole_optimizer_config;

SYSTOLE_API void systole_optimizer_config_default(systole_optimizer_config* config);
/* Trace of the best restart plus every restart's final value and the bounds check. */
SYSTOLE_API int systole_optimize_json(int dim, const systole_optimizer_config* config, char** json);
/* Single climb from g (restart index `stream`). */
SYSTOLE_API int systole_perturb_ascend_json(const systole_gram* g, const systole_optimizer_config* config,
                                            int stream, char** json);

/* ---- flat tori -------------------------------------------------------- */

/* SystoleReport, main inequality, stable/conformal identity, coarea checks
 * on the basis covectors and the shortest dual class; circle check for b = 1. */
SYSTOLE_API int systole_torus_verify_json(const systole_gram* g, int mode, char** json);
SYSTOLE_API int systole_coarea_check_json(const systole_gram* g, const int64_t* klass, char** json);

/* ---- discrete Hodge on T^2 -------------------------------------------- */

/* Deck basis is the Cholesky factor of the 2x2 Gram; phi is an expression
 * in x, y over the fundamental domain [0,1)^2 (empty or NULL = flat). */
SYSTOLE_API int systole_mesh_create(const systole_gram* lattice, int n, const char* phi, systole_mesh** out);
SYSTOLE_API void systole_mesh_free(systole_mesh* mesh);
SYSTOLE_API int systole_mesh_area(const systole_mesh* mesh, double* area);
SYSTOLE_API int systole_mesh_write_off(const systole_mesh* mesh, const char* path);

/* classes: n_classes (a, b) pairs; ps ascending, containing 2; infinity as
 * HUGE_VAL.  JSON report (per-class norm tables, Loewner check, conformal
 * systole) and a CSV norm table (class_a,class_b,p,value,upper_bound). */
SYSTOLE_API int systole_hodge_report(const systole_mesh* mesh, const int64_t* classes, int n_classes,
                                     const double* ps, int n_ps, char** json, char** csv);
SYSTOLE_API int systole_shortest_loop(const systole_mesh* mesh, double* length, int64_t* klass);
SYSTOLE_API int systole_confsys_estimate(const systole_mesh* mesh, double* confsys);

/* ---- extremal construction -------------------------------------------- */

enum systole_checks {
  SYSTOLE_CHECK_SUBMERSION = 1,
  SYSTOLE_CHECK_MINIMAL = 2,
  SYSTOLE_CHECK_HARMONIC = 4,
  SYSTOLE_CHECK_HEBDA = 8,
  SYSTOLE_CHECK_ALL = 15
};

/* rho(u, v) and c(u) are expressions; grid m x k.  Report carries the fiber
 * validation, lift residual and one entry per requested check with "pass". */
SYSTOLE_API int systole_construct_json(const char* rho, const char* c, double base_length, int m, int k,
                                       unsigned checks, char** json);

#ifdef __cplusplus
}
#endif

#endif
