#pragma once

// Shared domain types for the coupled membrane / potential solvers.
//
// The potential lives on the fixed rectangle (-1,1) x (0,1) obtained by the
// change of variables eta = (1 + z) / (1 + u(x)). Nodes are
//   x_i   = -1 + i * dx,  i = 0..nx
//   eta_j =      j * deta, j = 0..neta
// and 2-D fields are stored column-major: index = i * (neta + 1) + j, so that
// each eta-line is contiguous.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mems {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration or grid; reported before any computation starts.
class ConfigError : public Error {
public:
    using Error::Error;
};

class InvalidGridError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// The membrane touched (or passed) the ground plate, min(u) <= -1.
class QuenchedStateError : public Error {
public:
    using Error::Error;
};

/// An iterative solver hit its iteration cap.
class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// No solution of the requested kind exists (shooting or Picard failed).
class NoSolutionError : public Error {
public:
    using Error::Error;
};

/// The initial bracket of a threshold search does not bracket the threshold.
class BracketError : public Error {
public:
    using Error::Error;
};

/// A dynamic run neither quenched nor settled before t_max.
class InconclusiveError : public Error {
public:
    InconclusiveError(const std::string& what, double lambda, double t_max)
        : Error(what), lambda_(lambda), t_max_(t_max) {}
    double lambda() const { return lambda_; }
    double t_max() const { return t_max_; }

private:
    double lambda_;
    double t_max_;
};

// ---------------------------------------------------------------------------
// Parameters

struct Params {
    double epsilon = 0.0; ///< aspect ratio, in [0, 1)
    double lambda = 0.0;  ///< voltage parameter
    double gamma = 0.0;   ///< inertia / damping ratio

    void validate() const;
};

/// Uniform grid on the rectangle plus an optional time step.
///
/// Node counts are stored, spacings are derived, so nx * dx == 2 and
/// neta * deta == 1 hold by construction.
class Grid {
public:
    Grid(int nx, int neta, double dt = 0.0);

    /// Builds the grid whose spacings are the given ones; throws if 2/dx or
    /// 1/deta is not (close to) an integer.
    static Grid from_spacing(double dx, double deta, double dt = 0.0);

    int nx() const { return nx_; }
    int neta() const { return neta_; }
    double dx() const { return 2.0 / nx_; }
    double deta() const { return 1.0 / neta_; }
    double dt() const { return dt_; }

    double x(int i) const { return -1.0 + 2.0 * i / nx_; }
    double eta(int j) const { return static_cast<double>(j) / neta_; }

    std::size_t x_nodes() const { return static_cast<std::size_t>(nx_) + 1; }
    std::size_t eta_nodes() const { return static_cast<std::size_t>(neta_) + 1; }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * eta_nodes() + static_cast<std::size_t>(j);
    }

    Grid with_dt(double dt) const { return Grid(nx_, neta_, dt); }

private:
    int nx_;
    int neta_;
    double dt_;
};

/// Stopping rules for every iterative piece of the solver.
struct Tolerances {
    double jacobi_tol = 1e-8;
    int jacobi_max_iter = 200000;
    double picard_tol = 1e-8;
    int picard_max_iter = 2000;
    double shoot_tol = 1e-10;
    double bisect_tol = 1e-5;
    double quench_delta = 1e-2;
    double steady_rate_tol = 1e-6;
    double t_max = 100.0;

    void validate() const;
};

/// Membrane profile u(x_i) with its finite-difference derivatives.
class Deflection {
public:
    Deflection() = default;

    /// Takes ownership of the nodal values; the endpoints must be zero and
    /// min(u) > -1, otherwise ConfigError / QuenchedStateError.
    static Deflection from_values(std::vector<double> u, double dx);

    static Deflection zero(const Grid& grid);

    const std::vector<double>& u() const { return u_; }
    const std::vector<double>& ux() const { return ux_; }
    const std::vector<double>& uxx() const { return uxx_; }
    std::size_t size() const { return u_.size(); }

    /// u at the midpoint node (nx must be even).
    double u0() const { return u_[u_.size() / 2]; }
    double min() const;

private:
    std::vector<double> u_;
    std::vector<double> ux_;
    std::vector<double> uxx_;
};

/// Transformed potential phi(x_i, eta_j) on the rectangle grid.
class Potential {
public:
    Potential() = default;
    Potential(const Grid& grid, std::vector<double> values);

    /// phi = eta, the exact solution for a flat membrane or eps = 0.
    static Potential linear(const Grid& grid);

    int nx() const { return nx_; }
    int neta() const { return neta_; }
    double operator()(int i, int j) const { return phi_[index(i, j)]; }
    double& operator()(int i, int j) { return phi_[index(i, j)]; }
    std::span<const double> column(int i) const {
        return {phi_.data() + index(i, 0), static_cast<std::size_t>(neta_) + 1};
    }
    const std::vector<double>& values() const { return phi_; }
    std::vector<double>& values() { return phi_; }

    bool matches(const Grid& grid) const { return nx_ == grid.nx() && neta_ == grid.neta(); }

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * (static_cast<std::size_t>(neta_) + 1) +
               static_cast<std::size_t>(j);
    }

    int nx_ = 0;
    int neta_ = 0;
    std::vector<double> phi_;
};

// ---------------------------------------------------------------------------
// Finite-difference stencils

/// Centred first derivative at interior nodes, second-order one-sided at the
/// two endpoints.
std::vector<double> first_derivative(std::span<const double> v, double dx);

/// Centred second derivative at interior nodes; each endpoint copies its
/// neighbouring interior value.
std::vector<double> second_derivative(std::span<const double> v, double dx);

double max_abs(std::span<const double> v);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

} // namespace mems
