#include "mems/potential.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace mems;

namespace {

Deflection profile(const Grid& g, double depth, bool cosine = false) {
    std::vector<double> u(g.x_nodes());
    for (int i = 0; i <= g.nx(); ++i) {
        const double x = g.x(i);
        u[static_cast<std::size_t>(i)] = cosine ? -depth * std::cos(0.5 * std::numbers::pi * x) : -depth * (1.0 - x * x);
    }
    u.front() = 0.0;
    u.back() = 0.0;
    return Deflection::from_values(std::move(u), g.dx());
}

// Max over interior nodes of |L_u phi| divided by the point diagonal.
double scaled_residual(const Potential& phi, const Deflection& d, double eps, const Grid& g) {
    const OperatorCoefficients c(d, eps);
    const auto r = apply_operator(phi, d, eps, g);
    double m = 0.0;
    for (int i = 1; i < g.nx(); ++i) {
        for (int j = 1; j < g.neta(); ++j) {
            const double eta = g.eta(j);
            const double diag = 2.0 * c.a_xx() / (g.dx() * g.dx()) + 2.0 * c.a_etaeta(i, eta) / (g.deta() * g.deta());
            m = std::max(m, std::abs(r[g.index(i, j)]) / diag);
        }
    }
    return m;
}

double flux_mid(const Deflection& d, double eps, int nx, const Tolerances& tol) {
    const Grid g(nx, nx / 2);
    const auto s = solve_potential(d, eps, g, tol);
    return boundary_flux(s.phi, g)[static_cast<std::size_t>(nx / 2)];
}

} // namespace

TEST_SUITE("potential") {

TEST_CASE("flat membrane gives the linear potential") {
    const Grid g(40, 20);
    const auto s = solve_potential(Deflection::zero(g), 0.2, g, {});
    for (int i = 0; i <= g.nx(); ++i)
        for (int j = 0; j <= g.neta(); ++j) CHECK(std::abs(s.phi(i, j) - g.eta(j)) < 1e-12);
    for (double q : boundary_flux(s.phi, g)) CHECK(q == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("eps = 0 decouples the columns") {
    const Grid g(40, 20);
    const auto d = profile(g, 0.4);
    const auto s = solve_potential(d, 0.0, g, {});
    for (int i = 0; i <= g.nx(); ++i)
        for (int j = 0; j <= g.neta(); ++j) CHECK(std::abs(s.phi(i, j) - g.eta(j)) < 1e-10);
}

TEST_CASE("operator is exact on a manufactured potential") {
    const double eps = 0.2;
    const Grid g(40, 20);
    const auto d = profile(g, 0.1);
    std::vector<double> v(g.x_nodes() * g.eta_nodes());
    for (int i = 0; i <= g.nx(); ++i)
        for (int j = 0; j <= g.neta(); ++j) {
            const double x = g.x(i), eta = g.eta(j);
            v[g.index(i, j)] = eta + (1.0 - x * x) * eta * (1.0 - eta);
        }
    const Potential phi(g, v);
    const auto r = apply_operator(phi, d, eps, g);
    const double e2 = eps * eps;
    for (int i = 1; i < g.nx(); ++i) {
        const double x = g.x(i);
        const double u = -0.1 * (1.0 - x * x), ux = 0.2 * x, uxx = 0.2;
        const double alpha = ux / (1.0 + u), beta = 1.0 / ((1.0 + u) * (1.0 + u));
        const double gam = e2 * ux * ux * beta, kappa = 2.0 * alpha * alpha - uxx / (1.0 + u);
        for (int j = 1; j < g.neta(); ++j) {
            const double eta = g.eta(j);
            const double pxx = -2.0 * eta * (1.0 - eta);
            const double pxe = -2.0 * x * (1.0 - 2.0 * eta);
            const double pee = -2.0 * (1.0 - x * x);
            const double pe = 1.0 + (1.0 - x * x) * (1.0 - 2.0 * eta);
            const double exact = e2 * pxx - 2.0 * e2 * eta * alpha * pxe + (beta + eta * eta * gam) * pee +
                                 e2 * eta * kappa * pe;
            CHECK(r[g.index(i, j)] == doctest::Approx(exact).epsilon(1e-9));
        }
    }
    // the profile is quadratic, so the one-sided stencil is exact: phi_eta(x, 1) = x^2
    const auto q = boundary_flux(phi, g);
    for (int i = 0; i <= g.nx(); ++i) CHECK(q[static_cast<std::size_t>(i)] == doctest::Approx(g.x(i) * g.x(i)));
    CHECK(r[g.index(0, 5)] == 0.0);
    CHECK(r[g.index(7, 0)] == 0.0);
}

TEST_CASE("solution keeps the boundary data and is bounded") {
    const Grid g(64, 32);
    const auto d = profile(g, 0.5, true);
    const auto s = solve_potential(d, 0.3, g, {});
    for (int i = 0; i <= g.nx(); ++i) {
        CHECK(s.phi(i, 0) == 0.0);
        CHECK(s.phi(i, g.neta()) == 1.0);
    }
    for (int j = 0; j <= g.neta(); ++j) {
        CHECK(s.phi(0, j) == g.eta(j));
        CHECK(s.phi(g.nx(), j) == g.eta(j));
    }
    const double slack = 10.0 * g.deta();
    for (double v : s.phi.values()) {
        CHECK(v >= -slack);
        CHECK(v <= 1.0 + slack);
    }
    CHECK(s.residual <= 1e-8);
    CHECK(scaled_residual(s.phi, d, 0.3, g) <= 1.01e-8);
}

TEST_CASE("flux converges at second order") {
    const Tolerances tol{.jacobi_tol = 1e-12};
    auto at = [&](int nx) { return flux_mid(profile(Grid(nx, nx / 2), 0.3, true), 0.3, nx, tol); };
    const double f1 = at(32), f2 = at(64), f3 = at(128);
    CHECK(f1 > 1.0);
    const double order = std::log2(std::abs(f1 - f2) / std::abs(f2 - f3));
    MESSAGE("observed order " << order);
    CHECK(order >= 1.8);
}

TEST_CASE("multigrid and column Jacobi agree") {
    const Grid g(16, 8);
    const auto d = profile(g, 0.3, true);
    const OperatorCoefficients c(d, 0.4);

    auto phi_mg = Potential::linear(g).values();
    detail::SemiCoarsening mg;
    mg.setup(c, g);
    double res_mg = 0.0;
    mg.solve(phi_mg, 1e-13, 1000, res_mg);

    auto phi_cj = Potential::linear(g).values();
    detail::ColumnOperator op;
    op.factor(c, g);
    double res_cj = 0.0;
    const int n = detail::column_jacobi(op, phi_cj, 1e-13, 100000, res_cj);
    CHECK(n > 0);
    CHECK(res_mg <= 1e-13);
    CHECK(res_cj <= 1e-13);
    CHECK(max_abs_diff(phi_mg, phi_cj) < 1e-10);
}

TEST_CASE("iteration cap is reported") {
    const Grid g(64, 32);
    const Tolerances tol{.jacobi_tol = 1e-14, .jacobi_max_iter = 1};
    CHECK_THROWS_AS(solve_potential(profile(g, 0.5, true), 0.3, g, tol), NoConvergenceError);
}

TEST_CASE("warm start reaches the cold-start answer") {
    const Grid g(64, 32);
    const Tolerances tol{.jacobi_tol = 1e-10};
    const auto d1 = profile(g, 0.30, true);
    const auto d2 = profile(g, 0.31, true);
    const auto cold = solve_potential(d2, 0.2, g, tol);
    const auto first = solve_potential(d1, 0.2, g, tol);
    const auto warm = solve_potential(d2, 0.2, g, tol, first.phi);
    CHECK(warm.sweeps <= cold.sweeps);
    CHECK(max_abs_diff(warm.phi.values(), cold.phi.values()) < 1e-7);
    CHECK_THROWS_AS(solve_potential(d2, 0.2, g, tol, Potential::linear(Grid(32, 16))), InvalidGridError);
}

TEST_CASE("warm potential stays within tolerance") {
    const Grid g(64, 32);
    const Tolerances tol;
    WarmPotential w(g, 0.2);
    for (int k = 0; k <= 40; ++k) {
        const auto d = profile(g, 0.005 * k, true);
        w.update(d, tol, 0.01 * k);
        CHECK(scaled_residual(w.phi(), d, 0.2, g) <= tol.jacobi_tol * (1.0 + 1e-6));
        const auto q = boundary_flux(w.phi(), g);
        CHECK(max_abs_diff(q, w.flux()) == 0.0);
    }
    CHECK(w.solves() + w.skips() == 41);
}

TEST_CASE("tiny aspect ratio is close to the explicit potential") {
    const Grid g(64, 32);
    const auto d = profile(g, 0.6, true);
    const auto s = solve_potential(d, 1e-4, g, {});
    for (int i = 0; i <= g.nx(); ++i)
        for (int j = 0; j <= g.neta(); ++j) CHECK(std::abs(s.phi(i, j) - g.eta(j)) < 1e-4);
}

TEST_CASE("untransform maps back to the deformed gap") {
    const Grid g(8, 8);
    const auto d = profile(g, 0.3);
    const auto s = untransform_potential(Potential::linear(g), d, g);
    REQUIRE(s.size() == g.x_nodes() * g.eta_nodes());
    auto find = [&](double x, double psi) {
        return *std::find_if(s.begin(), s.end(), [&](const PhysicalSample& p) { return p.x == x && p.psi == psi; });
    };
    CHECK(find(0.0, 1.0).z == doctest::Approx(-0.3));
    CHECK(find(0.0, 0.0).z == doctest::Approx(-1.0));
    CHECK(find(0.0, 0.5).z == doctest::Approx(-0.65));
    CHECK(find(-1.0, 1.0).z == doctest::Approx(0.0));
}

}
