#include "mems/limits.hpp"

#include <cmath>
#include <sstream>

namespace mems {

namespace {

Grid line_grid(double dx, double dt = 0.0) {
    // The eta direction is unused by the eps = 0 model; 8 intervals is the
    // smallest grid the type admits.
    return Grid::from_spacing(dx, 1.0 / 8.0, dt);
}

} // namespace

double small_aspect_potential(double u_val, double z) {
    if (!(u_val > -1.0)) throw QuenchedStateError("small_aspect_potential: u <= -1");
    return (1.0 + z) / (1.0 + u_val);
}

Deflection small_aspect_static(double lambda, double dx, const Tolerances& tol) {
    const Grid grid = line_grid(dx);
    const std::vector<double> unit(grid.x_nodes(), 1.0);
    return shoot_deflection(unit, lambda, 0.0, grid, Branch::upper(), tol).defl;
}

Threshold small_aspect_pullin(double dx, const Tolerances& tol) {
    const Grid grid = line_grid(dx);
    const std::vector<double> unit(grid.x_nodes(), 1.0);
    auto exists = [&](double lambda) {
        try {
            shoot_deflection(unit, lambda, 0.0, grid, Branch::upper(), tol);
            return true;
        } catch (const NoSolutionError&) {
            return false;
        }
    };
    Threshold th{kThresholdBracketLo, kThresholdBracketHi, 2};
    if (!exists(th.lo) || exists(th.hi)) throw BracketError("small-aspect pull-in: [0.05, 1] does not bracket the fold");
    while (th.hi - th.lo > tol.bisect_tol) {
        const double mid = 0.5 * (th.lo + th.hi);
        (exists(mid) ? th.lo : th.hi) = mid;
        ++th.probes;
    }
    return th;
}

Outcome small_aspect_evolve(double lambda, double gamma, double dx, double dt, const Tolerances& tol,
                            int sample_every) {
    EvolveOptions opts;
    opts.coupling = Coupling::UnitFlux;
    opts.sample_every = sample_every;
    const Params p{0.0, lambda, gamma};
    return evolve(p, line_grid(dx, dt), gamma > 0.0 ? Equation::Wave : Equation::Heat, tol, opts);
}

Threshold small_aspect_dynamic_pullin(double gamma, double dx, double dt, const Tolerances& tol) {
    return find_dynamic_pullin(0.0, gamma, gamma > 0.0 ? Equation::Wave : Equation::Heat, line_grid(dx, dt),
                               tol, Coupling::UnitFlux);
}

void SpringParams::validate() const {
    if (!(m >= 0.0) || !(b > 0.0) || !(k > 0.0) || !(d0 > 0.0) || !(lambda >= 0.0)) {
        std::ostringstream os;
        os << "spring parameters need m >= 0, b > 0, k > 0, d0 > 0, lambda >= 0 (got m = " << m << ", b = " << b
           << ", k = " << k << ", d0 = " << d0 << ", lambda = " << lambda << ")";
        throw ConfigError(os.str());
    }
}

SpringRun spring_simulate(const SpringParams& p, double dt, double t_max, const Tolerances& tol,
                          int sample_every) {
    p.validate();
    if (!(dt > 0.0) || !(t_max > 0.0)) throw ConfigError("spring_simulate needs dt > 0 and t_max > 0");
    if (sample_every <= 0) throw ConfigError("sample_every must be positive");

    // State (x, v); for m = 0 the velocity is slaved to x.
    auto velocity_overdamped = [&](double x) {
        const double g = p.d0 - x;
        return (p.lambda / (g * g) - p.k * x) / p.b;
    };
    auto accel = [&](double x, double v) {
        const double g = p.d0 - x;
        return (p.lambda / (g * g) - p.k * x - p.b * v) / p.m;
    };
    auto rates = [&](double x, double v, double& dxdt, double& dvdt) {
        if (p.m == 0.0) {
            dxdt = velocity_overdamped(x);
            dvdt = 0.0;
        } else {
            dxdt = v;
            dvdt = accel(x, v);
        }
    };
    auto current_accel = [&](double x, double v) {
        if (p.m > 0.0) return accel(x, v);
        const double g = p.d0 - x;
        return (2.0 * p.lambda / (g * g * g) - p.k) * velocity_overdamped(x) / p.b;
    };

    SpringRun run;
    double x = 0.0;
    double v = p.m == 0.0 ? velocity_overdamped(0.0) : 0.0;
    run.trajectory.push_back({0.0, x, v});
    const long n_steps = static_cast<long>(std::ceil(t_max / dt - 1e-9));
    for (long n = 1; n <= n_steps; ++n) {
        double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v;
        rates(x, v, k1x, k1v);
        rates(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v, k2x, k2v);
        rates(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v, k3x, k3v);
        rates(x + dt * k3x, v + dt * k3v, k4x, k4v);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v = p.m == 0.0 ? 0.0 : v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        const double t = static_cast<double>(n) * dt;
        if (!std::isfinite(x) || !std::isfinite(v) || p.d0 - x <= tol.quench_delta * p.d0) {
            run.kind = OutcomeKind::Quenched;
            run.t_event = t;
            run.trajectory.push_back({t, x, v});
            return run;
        }
        if (p.m == 0.0) v = velocity_overdamped(x);
        if (n % sample_every == 0) run.trajectory.push_back({t, x, v});
        if (std::abs(v) + std::abs(current_accel(x, v)) < tol.steady_rate_tol) {
            run.kind = OutcomeKind::Steady;
            run.t_event = t;
            if (run.trajectory.back().t != t) run.trajectory.push_back({t, x, v});
            return run;
        }
    }
    run.kind = OutcomeKind::Undecided;
    run.t_event = static_cast<double>(n_steps) * dt;
    return run;
}

double spring_static_pullin(double k, double d0) {
    // Equilibrium k x (d0 - x)^2 = lambda has a root iff lambda <= max of the
    // left side, attained at x = d0 / 3.
    return 4.0 * k * d0 * d0 * d0 / 27.0;
}

Threshold spring_dynamic_pullin(SpringParams p, double dt, double t_max, const Tolerances& tol) {
    const double lam_static = spring_static_pullin(p.k, p.d0);
    auto settles = [&](double lambda) {
        p.lambda = lambda;
        const auto run = spring_simulate(p, dt, t_max, tol, 1 << 30);
        if (run.kind == OutcomeKind::Undecided) {
            throw InconclusiveError("spring pull-in: run neither settled nor collapsed", lambda, t_max);
        }
        return run.kind == OutcomeKind::Steady;
    };
    Threshold th{0.05 * lam_static, 2.0 * lam_static, 2};
    if (!settles(th.lo) || settles(th.hi)) throw BracketError("spring pull-in: bracket does not contain the threshold");
    while (th.hi - th.lo > tol.bisect_tol * lam_static) {
        const double mid = 0.5 * (th.lo + th.hi);
        (settles(mid) ? th.lo : th.hi) = mid;
        ++th.probes;
    }
    return th;
}

} // namespace mems
