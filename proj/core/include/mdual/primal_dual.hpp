#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdual/extended_real.hpp"
#include "mdual/problem.hpp"

namespace mdual {

/// Dual variable w* with A* w* and R[w*] cached.
struct DualCertificate {
  Vector wstar;
  Vector astar_wstar;
  ExtendedReal r_value;
};

/// Evaluates A* w and R[w].
DualCertificate make_certificate(const Problem& p, Vector wstar,
                                 const ConjugateOptions& conj = {});

/// F[u] = sum_cells f(x_c, u_c) dx.
double primal_energy(const Problem& p, const Vector& u);
/// Gradient of F in the Euclidean coordinates of u (includes the dx
/// factor), built from subgradient elements.
Vector primal_subgradient(const Problem& p, const Vector& u);

/// Relaxed energy Fbar of a measure in u0 + ker A. Throws
/// Infeasible when apply_to_measure(op, mu - u0) exceeds its tolerance.
double relaxed_energy(const Problem& p, const DiscreteMeasure& mu, double tol_ker = 1e-8);

/// R[w] = <w, tau> dx - sum f*(x_c, (A* w)_c) dx; -inf when some conjugate
/// is +inf.
ExtendedReal dual_energy(const Problem& p, const Vector& wstar,
                         const ConjugateOptions& conj = {});

/// F[u] - dx <w, A u - tau>.
double lagrangian(const Problem& p, const Vector& u, const Vector& wstar);

struct DualOptions {
  int max_iter = 4000;
  /// Stop once the best value improved by less than tol * (1 + |best|)
  /// over the last `window` iterations.
  double tol = 1e-12;
  int window = 400;
  /// Backtracking ascent steps run from the best subgradient iterate.
  int polish_iter = 400;
  std::optional<Vector> initial;
  ConjugateOptions conj;
};

struct DualSolveInfo {
  int iterations = 0;
  bool converged = false;
};

/// Projected supergradient ascent on R with step (volume / (1 + |tau|)) / sqrt(k)
/// along the normalized direction tau - A z, z the conjugate argmax per cell.
/// Iterates are pulled back into dom f* by scaling w. Returns the best
/// iterate. Throws Stalled if no iterate has a finite value.
DualCertificate solve_dual(const Problem& p, const DualOptions& opts = {},
                           DualSolveInfo* info = nullptr);

/// Dual recovery from a primal point through the Fenchel identity: p
/// collects subgradients of f at the density (and of f^inf at atoms),
/// is projected onto (ker A)^perp = im A*, scaled into dom f*, and w is the
/// minimal-norm solution of A* w = p.
DualCertificate certificate_from_primal(const Problem& p, const DiscreteMeasure& mu,
                                        const ConjugateOptions& conj = {});

struct PrimalOptions {
  int max_iter = 4000;
  /// Initial step of the normalized subgradient phase, in kernel coordinates.
  /// Non-positive means max(1, |u0|_inf).
  double step = 0.0;
  int polish_iter = 2000;
  /// Atoms are introduced only when they lower the relaxed energy by more
  /// than this.
  double atom_tol = 1e-6;
  std::uint64_t seed = 0;
  /// Random initial kernel coordinates are drawn when seed != 0.
  double start_spread = 1.0;
};

struct PrimalSolveInfo {
  int iterations = 0;
  double energy = 0.0;
  bool polished = false;
  int atoms_added = 0;
};

/// Kernel-coordinate subgradient descent on F from u0 (or a seeded random
/// start), a gradient polish with Armijo backtracking, then a singular
/// refinement pass. The result is feasible by construction.
DiscreteMeasure solve_primal(const Problem& p, const PrimalOptions& opts = {},
                             PrimalSolveInfo* info = nullptr);

/// Fbar[mu] - R[w*]; +inf for an infinite certificate.
double duality_gap(const Problem& p, const DiscreteMeasure& mu, const DualCertificate& cert);

struct SolveOptions {
  PrimalOptions primal;
  DualOptions dual;
};

struct SolveReport {
  DiscreteMeasure primal;
  DualCertificate certificate;
  double relaxed_energy = 0.0;
  double gap = 0.0;
  int primal_iterations = 0;
  int dual_iterations = 0;
  bool dual_converged = false;
};

/// Primal solve followed by the best of: dual ascent from 0, the certificate
/// recovered from the primal, and ascent warm-started from that certificate.
SolveReport solve(const Problem& p, const SolveOptions& opts = {});

/// The problem with f replaced by its mollification of radius delta.
Problem mollified_family(const Problem& p, double delta);

// ---------------------------------------------------------------------------
// Brute-force oracles for at most three degrees of freedom.

struct OracleOptions {
  int points = 401;
  int refine_points = 21;
  int max_dofs = 3;
  ConjugateOptions conj;
};

struct OracleResult {
  double value = 0.0;
  /// Minimizer u (primal) or maximizer w* (dual) in grid coordinates.
  Vector argument;
  /// The same point in scan coordinates.
  Vector coords;
  long long evaluations = 0;
};

/// Grid scan over kernel coordinates |c_k| <= (M F[u0] + |Omega|) / dx + |u0|,
/// which contains every u with F[u] <= F[u0] by coercivity. Throws TooLarge
/// beyond max_dofs.
OracleResult brute_force_primal(const Problem& p, const OracleOptions& opts = {});

/// Grid scan over w = B c with B an orthonormal basis of `subspace` (default:
/// im A) and |c| <= sqrt(cells) M / sigma_min, skipping points outside dom f*.
OracleResult brute_force_dual(const Problem& p, const OracleOptions& opts = {},
                              const std::optional<Eigen::MatrixXd>& subspace = std::nullopt);

/// Columns spanning {w in im A : A* w constant on each level set of u0}, for
/// problems whose optimal A* w* is a function of u0.
Eigen::MatrixXd level_set_reduction(const Problem& p, double tol = 1e-12);

// ---------------------------------------------------------------------------

struct EkelandReport {
  double epsilon = 0.0;
  double energy_ubar = 0.0;
  double energy_uhat = 0.0;
  double l1_distance = 0.0;
  double kernel_pairing = 0.0;  // max_eta |<v*, eta>| / |eta|_L1
  double bound = 0.0;           // sqrt(epsilon)
  int recenterings = 0;
  bool energy_ok = false;
  bool distance_ok = false;
  bool pairing_ok = false;
  /// ubar <= inf + epsilon checked against a supplied lower bound.
  bool precondition_verified = false;
  std::string warning;
  bool pass() const { return energy_ok && distance_ok && pairing_ok; }
};

struct EkelandResult {
  Vector uhat;
  Vector vstar;
  EkelandReport report;
};

/// Minimizes F(u) + sqrt(eps) |u - center|_L1 over u0 + ker A by line
/// searches along kernel directions, re-centering at most ceil(log2(1/eps))
/// times. Requires differentiable f. Throws CertificateFailed if a bound
/// fails.
EkelandResult ekeland_certificate(const Problem& p, const Vector& ubar, double epsilon,
                                  std::optional<double> lower_bound = std::nullopt);

}  // namespace mdual
