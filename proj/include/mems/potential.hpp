#pragma once

// Transformed electrostatic problem on the fixed rectangle:
//
//   L_u(phi) = a_xx phi_xx + a_xeta phi_xeta + a_etaeta phi_etaeta + a_eta phi_eta = 0,
//   phi = eta on the boundary,
//
// with coefficients depending on the membrane profile u, u_x, u_xx.

#include "mems/core.hpp"

#include <optional>
#include <vector>

namespace mems {

/// Coefficients of L_u, stored per x-column. Their eta dependence is explicit:
///   a_xx     = eps^2
///   a_xeta   = -2 eps^2 eta alpha_i
///   a_etaeta = beta_i + eta^2 gamma_i
///   a_eta    = eps^2 eta kappa_i
/// where alpha = u_x/(1+u), beta = 1/(1+u)^2, gamma = eps^2 u_x^2/(1+u)^2,
/// kappa = 2 alpha^2 - u_xx/(1+u).
class OperatorCoefficients {
public:
    OperatorCoefficients(const Deflection& defl, double eps);

    double eps2() const { return eps2_; }
    double a_xx() const { return eps2_; }
    double a_xeta(int i, double eta) const { return -2.0 * eps2_ * eta * alpha_[i]; }
    double a_etaeta(int i, double eta) const { return beta_[i] + eta * eta * gamma_[i]; }
    double a_eta(int i, double eta) const { return eps2_ * eta * kappa_[i]; }

    const std::vector<double>& alpha() const { return alpha_; }
    const std::vector<double>& beta() const { return beta_; }
    const std::vector<double>& gamma() const { return gamma_; }
    const std::vector<double>& kappa() const { return kappa_; }

private:
    double eps2_;
    std::vector<double> alpha_;
    std::vector<double> beta_;
    std::vector<double> gamma_;
    std::vector<double> kappa_;
};

/// Discrete L_u(phi) at interior nodes, zero on the boundary. Same layout as
/// Potential::values().
std::vector<double> apply_operator(const Potential& phi, const Deflection& defl, double eps,
                                   const Grid& grid);

namespace detail {

// Discrete L_u on one grid level, split into tridiagonal eta-columns.
// Column i of the level uses the coefficients of fine column stride * i.
class ColumnOperator {
public:
    void factor(const OperatorCoefficients& c, const Grid& grid, int stride = 1);

    int nx() const { return nx_; }
    int neta() const { return neta_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_ + 1) * static_cast<std::size_t>(neta_ + 1); }

    // next = (1 - omega) cur + omega * (exact column solve of A cur = f with
    // the neighbouring columns frozen). Boundary entries of next are not
    // written. f == nullptr means f = 0. Returns max |(A cur - f) / diag|.
    double sweep(const std::vector<double>& cur, std::vector<double>& next, const double* f, double omega);
    // r = f - A cur at interior nodes; returns max |r / diag|.
    double residual(const std::vector<double>& cur, const double* f, std::vector<double>& r) const;

private:
    int nx_ = 0;
    int neta_ = 0;
    std::size_t m_ = 0;
    double xcoupling_ = 0.0;
    std::vector<double> lo_, diag_, up_, cprime_, invden_, mixed_;
    std::vector<double> rhs_;
};

// Plain (undamped) column Jacobi: sweeps phi in place until its scaled
// residual is <= target. Returns the number of sweeps that changed phi.
int column_jacobi(ColumnOperator& op, std::vector<double>& phi, double target, int max_iter, double& residual);

// Multigrid with coarsening in x only and damped column Jacobi smoothing.
class SemiCoarsening {
public:
    void setup(const OperatorCoefficients& c, const Grid& grid);
    // V-cycles on phi (boundary values fixed) until its scaled residual is
    // <= target. Returns the number of fine-level smoothing sweeps.
    int solve(std::vector<double>& phi, double target, int max_cycles, double& residual);

private:
    struct Level {
        ColumnOperator op;
        std::vector<double> x, tmp, f, r;
    };
    void cycle(std::size_t l);

    std::vector<Level> levels_;
    int fine_sweeps_ = 0;
};

} // namespace detail

struct PotentialSolve {
    Potential phi;
    int sweeps = 0;          ///< fine-grid column sweeps performed
    double residual = 0.0;   ///< diagonal-scaled max-norm residual of phi
};

/// Solves L_u(phi) = 0, phi = eta on the boundary.
///
/// The smoother is column Jacobi: each eta-column is solved exactly
/// (tridiagonal) with the neighbouring columns frozen at the previous sweep.
/// Smooth-in-x error is removed on successively coarser x-grids. The
/// iteration stops once the residual of the current iterate, divided by the
/// point diagonal 2 eps^2/dx^2 + 2 a_etaeta/deta^2, is at most
/// tol.jacobi_tol in max norm; tol.jacobi_max_iter caps the number of cycles.
PotentialSolve solve_potential(const Deflection& defl, double eps, const Grid& grid,
                               const Tolerances& tol,
                               const std::optional<Potential>& init = std::nullopt);

/// phi_eta(x_i, 1) by the one-sided second-order stencil.
std::vector<double> boundary_flux(const Potential& phi, const Grid& grid);

struct PhysicalSample {
    double x;
    double z;
    double psi;
};

/// Maps every node (x_i, eta_j) back to the deformed region:
/// z = (1 + u(x_i)) eta_j - 1, psi = phi_ij.
std::vector<PhysicalSample> untransform_potential(const Potential& phi, const Deflection& defl,
                                                  const Grid& grid);

/// Potential kept in sync with a slowly changing membrane during time
/// stepping.
///
/// After every update() the stored potential meets jacobi_tol for the new
/// profile. A rigorous bound on how far the coefficients moved since the last
/// verified solve lets most steps skip the sweeps and the residual evaluation.
/// Solves that do run go to a fraction of the tolerance, which is what leaves
/// room for the following skips.
inline constexpr double kWarmSolveFraction = 0.1;
inline constexpr double kMaxExtrapolation = 4.0;

class WarmPotential {
public:
    WarmPotential(const Grid& grid, double eps);

    /// Re-solves (or certifies) the potential for the profile at time t.
    /// Solves start from a linear extrapolation in t of the last two solves.
    void update(const Deflection& defl, const Tolerances& tol, double t);

    const Potential& phi() const { return phi_; }
    const std::vector<double>& flux() const { return flux_; }

    long solves() const { return solves_; }
    long skips() const { return skips_; }
    long sweeps() const { return sweeps_; }

private:
    void refresh_bounds();
    double residual_bound(const OperatorCoefficients& coeff) const;

    Grid grid_;
    double eps_;
    Potential phi_;
    std::vector<double> flux_;
    std::optional<OperatorCoefficients> at_;  // coefficients phi_ was verified against

    // Per-column maxima used by residual_bound().
    std::vector<double> res_max_;   // max_j |R(i,j)|
    std::vector<double> mixed_max_; // max_j eta |D_xeta phi|
    std::vector<double> d2_max_;    // max_j |D_etaeta phi|
    std::vector<double> d2eta_max_; // max_j eta^2 |D_etaeta phi|
    std::vector<double> d1_max_;    // max_j eta |D_eta phi|

    detail::SemiCoarsening solver_;
    std::vector<double> prev_;  // previous verified solve
    double t_at_ = 0.0;
    double t_prev_ = 0.0;

    long solves_ = 0;
    long skips_ = 0;
    long sweeps_ = 0;
};

} // namespace mems
