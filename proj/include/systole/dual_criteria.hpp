#pragma once

// Dual-perfection test for a pair (L, L*) and comparison of
// lambda1(L) lambda1(L*) against the known dual-critical values.

#include <optional>
#include <vector>

#include "systole/lattice.hpp"

namespace systole {

struct RankOneSpanReport {
  int span_dim = 0;
  int target_dim = 0;  // b(b+1)/2
  bool is_dual_perfect = false;
  int footprint_size = 0;
};

enum class Verdict { CriticalWithinTol, Suboptimal, ExceedsKnown, UnknownDimension };

const char* verdict_name(Verdict v) noexcept;

struct DualCriticalCertificate {
  double bm_value = 0.0;
  std::optional<double> known_constant;
  std::optional<double> gap;  // known - bm_value
  Verdict verdict = Verdict::UnknownDimension;
  double tolerance = 0.0;
};

inline constexpr double kRankThreshold = 1e-8;
inline constexpr double kCriticalTolExact = 1e-9;
inline constexpr double kCriticalTolFloat = 1e-6;

/// Short vectors of L embedded by R (G = R^T R) followed by those of L*
/// embedded by R^{-T}; both sets live in the same Euclidean space.
std::vector<Vector> short_vector_footprint(const GramMatrix& g,
                                           const EnumerationOptions& options = {});

/// Rank of {s s^T : s in footprint} inside Sym(R^b).  The float route uses an
/// SVD with relative threshold kRankThreshold; the exact route (rational G)
/// works in coefficient coordinates, where the footprint maps to
/// {v v^T} u {(G^{-1} w)(G^{-1} w)^T} under a congruence, and ranks in Q.
RankOneSpanReport is_dual_perfect(const GramMatrix& g, const EnumerationOptions& options = {});

/// gamma'_b for b <= 3, nullopt otherwise.
std::optional<double> known_bm_constant(int dim);
/// (gamma'_b)^2 as a rational for b <= 3.
std::optional<mpq_class> known_bm_constant_squared(int dim);

DualCriticalCertificate certify_against_known(const GramMatrix& g,
                                              const EnumerationOptions& options = {});

}  // namespace systole
