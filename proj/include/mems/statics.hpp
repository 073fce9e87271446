#pragma once

// Stationary coupled problem: u_xx = lambda (1 + eps^2 u_x^2)/(1+u)^2 |phi_eta(x,1)|^2,
// u(+-1) = 0, together with L_u(phi) = 0.

#include "mems/core.hpp"
#include "mems/potential.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace mems {

enum class BranchTag { Upper, Lower };

/// Which of the two coexisting stationary solutions to follow.
///
/// The slope ranges are the regions of initial guesses for u'(-1) that lead
/// to each branch; the shooting solver itself scans the union (-3, 0) and
/// picks the root of u(1; s) nearest 0 for Upper and the next one for Lower.
struct Branch {
    BranchTag tag = BranchTag::Upper;

    static Branch upper() { return {BranchTag::Upper}; }
    static Branch lower() { return {BranchTag::Lower}; }

    double slope_lo() const { return tag == BranchTag::Upper ? -1.5 : -3.0; }
    double slope_hi() const { return tag == BranchTag::Upper ? 0.0 : -1.5; }
    std::string_view name() const { return tag == BranchTag::Upper ? "upper" : "lower"; }
};

/// Slope interval scanned by the shooting method.
inline constexpr double kSlopeScanLo = -3.0;
inline constexpr double kSlopeScanHi = 0.0;

struct ShootResult {
    Deflection defl;
    double slope = 0.0;  ///< u'(-1)
    bool merged = false; ///< both branches gave the same root (fold)
};

/// Shooting solution of the elastic two-point problem for a given boundary
/// flux q(x) sampled at the x nodes. Throws NoSolutionError when the branch
/// does not exist at this lambda.
ShootResult shoot_deflection(std::span<const double> flux, double lambda, double eps,
                             const Grid& grid, Branch branch, const Tolerances& tol);

/// u(1; s) for the initial-value problem with u(-1) = 0, u'(-1) = s, or
/// nullopt if the trajectory gets within quench_delta of -1.
std::optional<double> shoot_endpoint(std::span<const double> flux, double lambda, double eps,
                                     const Grid& grid, double slope, double quench_delta);

struct StationaryState {
    Deflection defl;
    Potential phi;
    std::vector<double> flux;
    double lambda = 0.0;
    double residual = 0.0; ///< last Picard change in u (max norm)
    double u0 = 0.0;
    double slope = 0.0;
    int picard_iterations = 0;
    long jacobi_sweeps = 0;
    bool relaxed = false; ///< under-relaxed retry was needed
    bool merged = false;
};

/// Picard iteration between shooting and the potential solve, starting from
/// the flat-membrane flux q = 1. The iterate is the boundary flux. If the
/// sweep-to-sweep change in u grows for 5 sweeps, or shooting fails after
/// the first sweep, the iteration is restarted once with the flux update
/// under-relaxed by 0.5. Throws NoSolutionError when no stationary solution
/// is found (shooting failure or Picard cap).
StationaryState solve_stationary(double lambda, double eps, const Grid& grid, Branch branch,
                                 const Tolerances& tol);

/// Result of a bisection on lambda.
struct Threshold {
    double lo = 0.0;  ///< largest lambda classified below the threshold
    double hi = 0.0;  ///< smallest lambda classified above it
    int probes = 0;
    double value() const { return 0.5 * (lo + hi); }
};

inline constexpr double kThresholdBracketLo = 0.05;
inline constexpr double kThresholdBracketHi = 1.0;

/// Largest lambda admitting an Upper-branch stationary solution.
Threshold find_static_pullin(double eps, const Grid& grid, const Tolerances& tol);

struct BifurcationPoint {
    double lambda = 0.0;
    double u0 = 0.0;
    BranchTag branch = BranchTag::Upper;
    bool converged = false;
};

/// Both branches sampled on lambda in (0, lambda_s*], clustered towards the
/// fold. Sorted by branch (Upper first) then lambda; failed solves are kept
/// with converged = false.
struct BifurcationCurve {
    Threshold pullin;
    std::vector<BifurcationPoint> points;
};

BifurcationCurve bifurcation_curve(double eps, const Grid& grid, int n_points, const Tolerances& tol);

/// The lambda values bifurcation_curve samples for a given fold location.
std::vector<double> bifurcation_lambdas(double lambda_star, int n_points, double bisect_tol);

} // namespace mems
