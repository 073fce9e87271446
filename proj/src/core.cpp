#include "mems/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mems {

namespace {

std::string describe(const char* name, double value) {
    std::ostringstream os;
    os << name << " = " << value;
    return os.str();
}

int spacing_to_count(double length, double h, const char* name) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw InvalidGridError(describe(name, h) + ": spacing must be positive");
    }
    const double n = length / h;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-6 * rounded) {
        throw InvalidGridError(describe(name, h) + ": spacing does not divide the interval");
    }
    return static_cast<int>(rounded);
}

} // namespace

void Params::validate() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw ConfigError(describe("epsilon", epsilon) + " outside [0, 1)");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ConfigError(describe("lambda", lambda) + " must be >= 0");
    }
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw ConfigError(describe("gamma", gamma) + " must be >= 0");
    }
}

Grid::Grid(int nx, int neta, double dt) : nx_(nx), neta_(neta), dt_(dt) {
    if (nx < 8) throw InvalidGridError(describe("nx", nx) + ": need at least 8 intervals");
    if (neta < 8) throw InvalidGridError(describe("neta", neta) + ": need at least 8 intervals");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw InvalidGridError(describe("dt", dt) + " must be >= 0");
}

Grid Grid::from_spacing(double dx, double deta, double dt) {
    return Grid(spacing_to_count(2.0, dx, "dx"), spacing_to_count(1.0, deta, "deta"), dt);
}

void Tolerances::validate() const {
    const std::pair<const char*, double> positive[] = {
        {"jacobi_tol", jacobi_tol},       {"picard_tol", picard_tol},
        {"shoot_tol", shoot_tol},         {"bisect_tol", bisect_tol},
        {"quench_delta", quench_delta},   {"steady_rate_tol", steady_rate_tol},
        {"t_max", t_max},
    };
    for (const auto& [name, value] : positive) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw ConfigError(describe(name, value) + " must be strictly positive");
        }
    }
    if (jacobi_max_iter <= 0) throw ConfigError(describe("jacobi_max_iter", jacobi_max_iter) + " must be positive");
    if (picard_max_iter <= 0) throw ConfigError(describe("picard_max_iter", picard_max_iter) + " must be positive");
    if (quench_delta >= 1.0) throw ConfigError(describe("quench_delta", quench_delta) + " must be < 1");
}

Deflection Deflection::from_values(std::vector<double> u, double dx) {
    if (u.size() < 3) throw InvalidGridError("deflection needs at least 3 nodes");
    if (u.front() != 0.0 || u.back() != 0.0) {
        throw ConfigError("deflection must vanish at x = -1 and x = 1");
    }
    for (double v : u) {
        if (!std::isfinite(v)) throw QuenchedStateError("non-finite deflection value");
        if (v <= -1.0) throw QuenchedStateError(describe("min(u)", v) + ": membrane touches the ground plate");
    }
    Deflection d;
    d.ux_ = first_derivative(u, dx);
    d.uxx_ = second_derivative(u, dx);
    d.u_ = std::move(u);
    return d;
}

Deflection Deflection::zero(const Grid& grid) {
    return from_values(std::vector<double>(grid.x_nodes(), 0.0), grid.dx());
}

double Deflection::min() const {
    return *std::min_element(u_.begin(), u_.end());
}

Potential::Potential(const Grid& grid, std::vector<double> values)
    : nx_(grid.nx()), neta_(grid.neta()), phi_(std::move(values)) {
    if (phi_.size() != grid.x_nodes() * grid.eta_nodes()) {
        throw InvalidGridError("potential size does not match the grid");
    }
}

Potential Potential::linear(const Grid& grid) {
    std::vector<double> values(grid.x_nodes() * grid.eta_nodes());
    for (int i = 0; i <= grid.nx(); ++i) {
        for (int j = 0; j <= grid.neta(); ++j) values[grid.index(i, j)] = grid.eta(j);
    }
    return Potential(grid, std::move(values));
}

std::vector<double> first_derivative(std::span<const double> v, double dx) {
    const std::size_t n = v.size();
    if (n < 3) throw InvalidGridError("first_derivative needs at least 3 nodes");
    std::vector<double> d(n);
    const double inv2h = 1.0 / (2.0 * dx);
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) * inv2h;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) * inv2h;
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) * inv2h;
    return d;
}

std::vector<double> second_derivative(std::span<const double> v, double dx) {
    const std::size_t n = v.size();
    if (n < 3) throw InvalidGridError("second_derivative needs at least 3 nodes");
    std::vector<double> d(n);
    const double invh2 = 1.0 / (dx * dx);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * invh2;
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    return d;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace mems
