// Acceptance harness: one PASS/FAIL line per criterion, with the measured
// numbers above it. Exits 0 once every criterion has been evaluated; a FAIL
// line is a result, not a harness error.

#include "mems/dynamics.hpp"
#include "mems/limits.hpp"
#include "mems/potential.hpp"
#include "mems/statics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace mems;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Grid fine(double dt = 0.0) { return Grid::from_spacing(5e-3, 5e-3, dt); }
Grid coarse(double dt = 0.0) { return Grid::from_spacing(2e-2, 2e-2, dt); }

constexpr double kHeatDtFine = 1e-5;
constexpr double kHeatDtCoarse = 1e-4;
constexpr double kWaveDt = 2e-3;
// Runs near a threshold pass through a slow bottleneck; 100 time units is
// not enough to classify them.
constexpr double kThresholdTmax = 2000.0;

Tolerances threshold_tol(double bisect_tol = 1e-5) {
    Tolerances t;
    t.t_max = kThresholdTmax;
    t.bisect_tol = bisect_tol;
    return t;
}

std::string num(double v, int digits = 7) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

void note(const std::string& s) { std::cout << "  " << s << std::endl; }

bool within(const std::string& what, double got, double want, double tol) {
    const bool ok = std::abs(got - want) <= tol;
    note(what + " = " + num(got) + " (target " + num(want) + " +- " + num(tol, 2) + ", off by " +
         num(std::abs(got - want), 2) + ") " + (ok ? "ok" : "MISS"));
    return ok;
}

bool check(const std::string& what, bool ok) {
    note(what + (ok ? " ok" : " MISS"));
    return ok;
}

// Thresholds shared between criteria, computed once.
struct Cache {
    std::map<double, double> static_fine;
    std::map<double, double> static_coarse;
    std::map<double, double> heat_coarse;

    double lambda_s_fine(double eps) {
        auto it = static_fine.find(eps);
        if (it == static_fine.end()) it = static_fine.emplace(eps, find_static_pullin(eps, fine(), {}).value()).first;
        return it->second;
    }
    double lambda_s_coarse(double eps) {
        auto it = static_coarse.find(eps);
        if (it == static_coarse.end())
            it = static_coarse.emplace(eps, find_static_pullin(eps, coarse(), {}).value()).first;
        return it->second;
    }
    double lambda_h_coarse(double eps) {
        auto it = heat_coarse.find(eps);
        if (it == heat_coarse.end()) {
            const auto th = find_dynamic_pullin(eps, 0.0, Equation::Heat, coarse(kHeatDtCoarse), threshold_tol());
            it = heat_coarse.emplace(eps, th.value()).first;
        }
        return it->second;
    }
};

Cache cache;

// ---------------------------------------------------------------------------

bool criterion1() {
    const auto t0 = Clock::now();
    const double v = cache.lambda_s_fine(1e-4);
    const double elapsed = seconds_since(t0);
    bool ok = within("lambda_s(1e-4), dx = deta = 5e-3", v, 0.350000, 5e-5);
    ok &= check("runtime " + num(elapsed, 3) + " s <= 600 s", elapsed <= 600.0);
    ok &= within("lambda_s(1e-4), dx = deta = 2e-2", cache.lambda_s_coarse(1e-4), 0.350004, 2e-3);
    return ok;
}

bool criterion2() {
    const std::vector<std::pair<double, double>> table{{0.01, 0.34997}, {0.1, 0.34536}, {0.2, 0.32738}, {0.3, 0.29356}};
    bool ok = true;
    for (auto [eps, want] : table) {
        ok &= within("lambda_s(" + num(eps) + "), dx = 5e-3", cache.lambda_s_fine(eps), want, 5e-4);
        ok &= within("lambda_s(" + num(eps) + "), dx = 2e-2", cache.lambda_s_coarse(eps), want, 2e-3);
    }
    return ok;
}

bool criterion3() {
    bool ok = true;
    for (double eps : {0.01, 0.1, 0.2, 0.3}) {
        const double h = cache.lambda_h_coarse(eps);
        const double s = cache.lambda_s_coarse(eps);
        ok &= within("lambda_h(" + num(eps) + ") vs lambda_s, dx = 2e-2, dt = 1e-4", h, s, 5e-5);
    }
    const auto th = find_dynamic_pullin(1e-4, 0.0, Equation::Heat, fine(kHeatDtFine), threshold_tol());
    ok &= within("lambda_h(1e-4), dx = 5e-3, dt = 1e-5", th.value(), 0.350006, 5e-5);
    return ok;
}

bool criterion4() {
    bool ok = true;
    // The tolerance is 1e-3, so a 1e-4 bracket resolves the comparison.
    for (auto [eps, want] : std::vector<std::pair<double, double>>{{0.1, 0.34468}, {0.2, 0.3251}}) {
        const auto t0 = Clock::now();
        const auto th = find_dynamic_pullin(eps, 0.7, Equation::Wave, fine(kWaveDt), threshold_tol(1e-4));
        ok &= within("lambda_w(" + num(eps) + ", 0.7), dx = 5e-3, dt = 2e-3 [" + num(seconds_since(t0), 3) + " s]",
                     th.value(), want, 1e-3);
    }
    return ok;
}

bool criterion5() {
    const double slack = 2e-5; // 2 * bisect_tol
    const std::vector<double> gammas{0.1, 0.3, 0.5, 0.7};
    const std::vector<double> epss{0.01, 0.1, 0.2};
    std::map<std::pair<double, double>, double> w;
    bool ok = true;
    for (double eps : epss) {
        const double h = cache.lambda_h_coarse(eps);
        std::string row = "eps " + num(eps) + ": lambda_h " + num(h) + ", lambda_w";
        for (double g : gammas) {
            w[{eps, g}] = find_dynamic_pullin(eps, g, Equation::Wave, coarse(kWaveDt), threshold_tol()).value();
            row += " " + num(w[{eps, g}]);
        }
        note(row + " (dx = 2e-2)");
        for (std::size_t k = 0; k < gammas.size(); ++k) {
            ok &= check("lambda_w(" + num(eps) + ", " + num(gammas[k]) + ") <= lambda_h", w[{eps, gammas[k]}] <= h + slack);
            if (k > 0)
                ok &= check("lambda_w non-increasing from gamma " + num(gammas[k - 1]) + " to " + num(gammas[k]),
                            w[{eps, gammas[k]}] <= w[{eps, gammas[k - 1]}] + slack);
        }
    }
    double prev = 1.0;
    for (double eps : {1e-4, 0.01, 0.1, 0.2, 0.3}) {
        const double s = cache.lambda_s_fine(eps);
        ok &= check("lambda_s(" + num(eps) + ") = " + num(s) + " <= previous", s <= prev + slack);
        prev = s;
    }
    for (double g : {0.1, 0.3, 0.5, 0.7}) {
        const double eps_var = std::abs(w[{0.2, g}] - w[{0.01, g}]);
        for (double eps : epss) {
            const double gamma_var = std::abs(w[{eps, 0.7}] - w[{eps, 0.1}]);
            ok &= check("gamma " + num(g) + ", eps " + num(eps) + ": eps-variation " + num(eps_var, 3) +
                            " > gamma-variation " + num(gamma_var, 3),
                        eps_var > gamma_var);
        }
    }
    return ok;
}

bool criterion6() {
    bool ok = true;
    {
        bool monotone = true;
        EvolveOptions opts;
        opts.observer = [&](const DynState& s) {
            const auto& u = s.u_curr.u();
            const auto& up = s.u_prev.u();
            for (std::size_t i = 0; i < u.size(); ++i) monotone = monotone && u[i] <= up[i] + 1e-10;
        };
        const auto o = evolve({0.2, 0.327, 0.0}, fine(kHeatDtFine), Equation::Heat, {}, opts);
        note("heat eps 0.2, lambda 0.327: " + std::string(to_string(o.kind)) + " at t = " + num(o.t_event) +
             ", u0 = " + num(o.final_u0));
        ok &= check("heat run steady by t = 11", o.kind == OutcomeKind::Steady && o.t_event <= 11.0);
        ok &= check("heat profiles monotone in time", monotone);
    }
    {
        EvolveOptions opts;
        opts.sample_every = 10;
        const auto o = evolve({0.1, 0.34, 0.7}, fine(kWaveDt), Equation::Wave, {}, opts);
        TrajectorySample deepest = o.trajectory.front();
        for (const auto& s : o.trajectory)
            if (s.u0 < deepest.u0) deepest = s;
        note("wave eps 0.1, gamma 0.7, lambda 0.34: " + std::string(to_string(o.kind)) + " at t = " + num(o.t_event) +
             ", deepest u0 = " + num(deepest.u0) + " at t = " + num(deepest.t) + ", final u0 = " + num(o.final_u0));
        ok &= check("overshoot: deepest point in t in [2, 4] and below the final state",
                    deepest.t >= 2.0 && deepest.t <= 4.0 && deepest.u0 < o.final_u0 - 1e-4);
        ok &= check("wave run settles by t = 11", o.kind == OutcomeKind::Steady && o.t_event <= 11.0);
    }
    {
        const auto th = find_static_pullin(0.2, fine(), {});
        const double u_crit = solve_stationary(th.lo, 0.2, fine(), Branch::upper(), {}).u0;
        EvolveOptions opts;
        opts.sample_every = 5;
        Tolerances tol;
        tol.t_max = kThresholdTmax;
        const auto o = evolve({0.2, 0.327, 0.7}, fine(kWaveDt), Equation::Wave, tol, opts);
        double near = 0.0;
        for (std::size_t k = 1; k < o.trajectory.size(); ++k)
            if (std::abs(o.trajectory[k].u0 - u_crit) < 0.1 * std::abs(u_crit))
                near += o.trajectory[k].t - o.trajectory[k - 1].t;
        note("wave eps 0.2, gamma 0.7, lambda 0.327: " + std::string(to_string(o.kind)) + " at t = " +
             num(o.t_event) + ", final u0 = " + num(o.final_u0) + ", static-critical u0 = " + num(u_crit));
        ok &= check("wave run quenches", o.kind == OutcomeKind::Quenched);
        if (o.kind == OutcomeKind::Quenched)
            ok &= check("plateau fraction " + num(near / o.t_event, 3) + " >= 0.3", near >= 0.3 * o.t_event);
    }
    return ok;
}

// Manufactured potential phi = eta + a (1 - x^2) sin(pi eta) under the
// membrane u = -b cos(pi x / 2): truncation error of the discrete operator.
double manufactured_error(int nx, double eps) {
    const Grid g(nx, nx / 2);
    const double a = 0.3, b = 0.2, pi = std::numbers::pi;
    std::vector<double> u(g.x_nodes()), v(g.x_nodes() * g.eta_nodes());
    for (int i = 0; i <= g.nx(); ++i) {
        u[static_cast<std::size_t>(i)] = (i == 0 || i == g.nx()) ? 0.0 : -b * std::cos(0.5 * pi * g.x(i));
        for (int j = 0; j <= g.neta(); ++j) {
            const double x = g.x(i), eta = g.eta(j);
            v[g.index(i, j)] = eta + a * (1.0 - x * x) * std::sin(pi * eta);
        }
    }
    const auto d = Deflection::from_values(u, g.dx());
    const auto r = apply_operator(Potential(g, v), d, eps, g);
    const double e2 = eps * eps;
    double err = 0.0;
    for (int i = 1; i < g.nx(); ++i) {
        const double x = g.x(i);
        const double uu = -b * std::cos(0.5 * pi * x), ux = 0.5 * pi * b * std::sin(0.5 * pi * x),
                     uxx = 0.25 * pi * pi * b * std::cos(0.5 * pi * x);
        const double alpha = ux / (1.0 + uu), beta = 1.0 / ((1.0 + uu) * (1.0 + uu));
        const double gam = e2 * ux * ux * beta, kappa = 2.0 * alpha * alpha - uxx / (1.0 + uu);
        for (int j = 1; j < g.neta(); ++j) {
            const double eta = g.eta(j), s = std::sin(pi * eta), c = std::cos(pi * eta);
            const double pxx = -2.0 * a * s;
            const double pxe = -2.0 * a * x * pi * c;
            const double pee = -a * (1.0 - x * x) * pi * pi * s;
            const double pe = 1.0 + a * (1.0 - x * x) * pi * c;
            const double exact = e2 * pxx - 2.0 * e2 * eta * alpha * pxe + (beta + eta * eta * gam) * pee +
                                 e2 * eta * kappa * pe;
            err = std::max(err, std::abs(r[g.index(i, j)] - exact));
        }
    }
    return err;
}

double flux_mid(int nx, double eps) {
    const Grid g(nx, nx / 2);
    std::vector<double> u(g.x_nodes());
    for (int i = 1; i < g.nx(); ++i) u[static_cast<std::size_t>(i)] = -0.3 * std::cos(0.5 * std::numbers::pi * g.x(i));
    Tolerances tol;
    tol.jacobi_tol = 1e-12;
    const auto s = solve_potential(Deflection::from_values(u, g.dx()), eps, g, tol);
    return boundary_flux(s.phi, g)[static_cast<std::size_t>(nx / 2)];
}

bool criterion7() {
    bool ok = true;
    const double e1 = manufactured_error(100, 0.2), e2 = manufactured_error(200, 0.2);
    ok &= check("manufactured-solution truncation order " + num(std::log2(e1 / e2), 4) + " >= 1.9",
                std::log2(e1 / e2) >= 1.9);
    const double f1 = flux_mid(50, 0.2), f2 = flux_mid(100, 0.2), f3 = flux_mid(200, 0.2);
    const double order = std::log2(std::abs(f1 - f2) / std::abs(f2 - f3));
    ok &= check("solver convergence order of phi_eta(0, 1): " + num(order, 4) + " >= 1.9", order >= 1.9);

    const Grid g = fine();
    double flat = 0.0, limit = 0.0;
    {
        const auto s = solve_potential(Deflection::zero(g), 0.2, g, {});
        for (int i = 0; i <= g.nx(); ++i)
            for (int j = 0; j <= g.neta(); ++j) flat = std::max(flat, std::abs(s.phi(i, j) - g.eta(j)));
        std::vector<double> u(g.x_nodes());
        for (int i = 1; i < g.nx(); ++i) u[static_cast<std::size_t>(i)] = -0.4 * (1.0 - g.x(i) * g.x(i));
        const auto t = solve_potential(Deflection::from_values(u, g.dx()), 0.0, g, {});
        for (int i = 0; i <= g.nx(); ++i)
            for (int j = 0; j <= g.neta(); ++j) limit = std::max(limit, std::abs(t.phi(i, j) - g.eta(j)));
    }
    ok &= check("phi = eta for u = 0 (max error " + num(flat, 2) + ")", flat <= 1e-12);
    ok &= check("phi = eta for eps = 0 (max error " + num(limit, 2) + ")", limit <= 1e-12);

    const auto curve = bifurcation_curve(0.2, g, 24, {});
    std::vector<BifurcationPoint> up, lo;
    for (const auto& p : curve.points)
        if (p.converged) (p.branch == BranchTag::Upper ? up : lo).push_back(p);
    bool mono_up = true, mono_lo = true;
    for (std::size_t k = 1; k < up.size(); ++k) mono_up = mono_up && up[k].u0 < up[k - 1].u0;
    for (std::size_t k = 1; k < lo.size(); ++k) mono_lo = mono_lo && lo[k].u0 > lo[k - 1].u0;
    note("bifurcation eps 0.2: " + num(static_cast<double>(up.size())) + " upper and " +
         num(static_cast<double>(lo.size())) + " lower points, lambda_s in [" + num(curve.pullin.lo) + ", " +
         num(curve.pullin.hi) + "]");
    ok &= check("every point converged", up.size() + lo.size() == curve.points.size());
    ok &= check("u0 decreasing along the upper branch", mono_up);
    ok &= check("u0 increasing along the lower branch", mono_lo);
    if (!up.empty() && !lo.empty()) {
        const double gap = std::abs(up.back().u0 - lo.back().u0);
        ok &= check("branches meet at lambda = " + num(up.back().lambda) + " (u0 gap " + num(gap, 3) + ")",
                    up.back().lambda == lo.back().lambda && gap < 0.02 &&
                        up.back().lambda >= curve.pullin.lo - 1e-12);
    } else {
        ok = false;
    }
    return ok;
}

double u0_at(const std::vector<TrajectorySample>& tr, double t, double dt) {
    double v = tr.front().u0;
    for (const auto& s : tr)
        if (s.t <= t + 0.5 * dt) v = s.u0;
    return v;
}

bool criterion8() {
    bool ok = true;
    for (double lambda : {0.1, 0.2, 0.3}) {
        const double oracle = small_aspect_static(lambda, 1e-4).u0();
        const double coupled = solve_stationary(lambda, 1e-4, fine(), Branch::upper(), {}).u0;
        ok &= within("u0 at lambda " + num(lambda) + ": coupled vs oracle", coupled, oracle, 1e-4);
    }
    Tolerances tol;
    tol.t_max = 10.0;
    const auto limit = small_aspect_evolve(0.3, 0.0, 5e-3, kHeatDtFine, tol, 1000);
    EvolveOptions opts;
    opts.sample_every = 1000;
    const auto coupled = evolve({1e-4, 0.3, 0.0}, fine(kHeatDtFine), Equation::Heat, tol, opts);
    for (double t : {1.0, 5.0, 10.0}) {
        ok &= within("u0(" + num(t) + ") heat, coupled vs limit model", u0_at(coupled.trajectory, t, kHeatDtFine),
                     u0_at(limit.trajectory, t, kHeatDtFine), 1e-3);
    }
    return ok;
}

} // namespace

int main() {
    const std::vector<std::function<bool()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                      criterion5, criterion6, criterion7, criterion8};
    int passed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = Clock::now();
        bool ok = false;
        std::cout << "criterion " << k + 1 << ":" << std::endl;
        try {
            ok = criteria[k]();
        } catch (const std::exception& e) {
            note(std::string("error: ") + e.what());
        }
        passed += ok;
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << num(seconds_since(t0), 3) << " s)"
                  << std::endl;
    }
    std::cout << passed << " of " << criteria.size() << " criteria pass" << std::endl;
    return 0;
}
