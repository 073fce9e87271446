#include "mems/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mems {

std::string_view to_string(Equation eq) { return eq == Equation::Heat ? "heat" : "wave"; }

std::string_view to_string(OutcomeKind kind) {
    switch (kind) {
    case OutcomeKind::Steady: return "steady";
    case OutcomeKind::Quenched: return "quenched";
    case OutcomeKind::Undecided: return "undecided";
    }
    return "unknown";
}

double heat_step_limit(double dx) { return 0.5 * dx * dx; }

// Von Neumann analysis of the centred scheme gives |g| <= 1 iff dt < dx sqrt(gamma),
// independently of the damping term.
double wave_step_limit(double dx, double gamma) { return dx * std::sqrt(gamma); }

DynState DynState::at_rest(const Grid& grid, double eps, Coupling coupling) {
    DynState s;
    s.u_curr = Deflection::zero(grid);
    s.u_prev = s.u_curr;
    s.flux.assign(grid.x_nodes(), 1.0);
    if (coupling == Coupling::Potential) s.potential.emplace(grid, eps);
    return s;
}

namespace {

std::string text(const char* name, double v) {
    std::ostringstream os;
    os << name << " = " << v;
    return os.str();
}

double effective_eps(const DynState& s, const Params& p) { return s.potential ? p.epsilon : 0.0; }

// uxx - lambda (1 + eps^2 ux^2)/(1+u)^2 q^2 at interior nodes.
void net_force(const DynState& s, const Params& p, double dx, std::vector<double>& out) {
    const auto& u = s.u_curr.u();
    const std::size_t n = u.size();
    const double eps2 = effective_eps(s, p) * effective_eps(s, p);
    const double inv2h = 0.5 / dx;
    const double invh2 = 1.0 / (dx * dx);
    out.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double ux = (u[i + 1] - u[i - 1]) * inv2h;
        const double uxx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * invh2;
        const double g = 1.0 + u[i];
        out[i] = uxx - p.lambda * (1.0 + eps2 * ux * ux) / (g * g) * s.flux[i] * s.flux[i];
    }
}

StepStatus accept(DynState& s, std::vector<double>&& next, const Grid& grid, const Tolerances& tol) {
    double lowest = HUGE_VAL;
    bool finite = true;
    for (double v : next) {
        finite = finite && std::isfinite(v);
        lowest = std::min(lowest, 1.0 + v);
    }
    if (!finite || lowest <= tol.quench_delta) {
        s.quench_min = finite ? lowest : -HUGE_VAL;
        s.quench_u0 = next[next.size() / 2];
        return StepStatus::Quenched;
    }
    if (max_abs(next) > 10.0) {
        throw StabilityError("explicit scheme diverged (max|u| > 10 without touchdown); reduce dt");
    }
    const double dt = grid.dt();
    s.prev_rate = s.rate;
    s.rate = max_abs_diff(next, s.u_curr.u()) / dt;
    s.u_prev = std::move(s.u_curr);
    s.u_curr = Deflection::from_values(std::move(next), grid.dx());
    ++s.step;
    s.t = static_cast<double>(s.step) * dt;
    if (s.potential) {
        s.potential->update(s.u_curr, tol, s.t);
        s.flux = s.potential->flux();
    }
    return StepStatus::Advanced;
}

} // namespace

StepStatus step_heat(DynState& state, const Params& params, const Grid& grid, const Tolerances& tol) {
    const double dt = grid.dt();
    if (!(dt > 0.0) || dt > heat_step_limit(grid.dx()) * (1.0 + 1e-12)) {
        throw ConfigError(text("dt", dt) + " violates the explicit heat stability limit dx^2/2 = " +
                          std::to_string(heat_step_limit(grid.dx())));
    }
    std::vector<double> force;
    net_force(state, params, grid.dx(), force);
    const auto& u = state.u_curr.u();
    std::vector<double> next(u.size(), 0.0);
    for (std::size_t i = 1; i + 1 < u.size(); ++i) next[i] = u[i] + dt * force[i];
    return accept(state, std::move(next), grid, tol);
}

StepStatus step_wave(DynState& state, const Params& params, const Grid& grid, const Tolerances& tol) {
    const double dt = grid.dt();
    const double gamma = params.gamma;
    if (!(gamma > 0.0)) throw ConfigError("wave equation needs gamma > 0; use the heat equation for gamma = 0");
    if (!(dt > 0.0) || dt >= wave_step_limit(grid.dx(), gamma)) {
        throw ConfigError(text("dt", dt) + " violates the explicit wave stability limit dx*sqrt(gamma) = " +
                          std::to_string(wave_step_limit(grid.dx(), gamma)));
    }
    std::vector<double> force;
    net_force(state, params, grid.dx(), force);
    const auto& u = state.u_curr.u();
    std::vector<double> next(u.size(), 0.0);
    if (state.step == 0) {
        // From rest: u^1 = u^0 + dt^2/(2 gamma) (u_xx - F).
        const double c = dt * dt / (2.0 * gamma);
        for (std::size_t i = 1; i + 1 < u.size(); ++i) next[i] = u[i] + c * force[i];
    } else {
        const auto& up = state.u_prev.u();
        const double a = gamma / (dt * dt) + 0.5 / dt;
        const double b = 2.0 * gamma / (dt * dt);
        const double c = gamma / (dt * dt) - 0.5 / dt;
        for (std::size_t i = 1; i + 1 < u.size(); ++i) next[i] = (force[i] + b * u[i] - c * up[i]) / a;
    }
    return accept(state, std::move(next), grid, tol);
}

Outcome evolve(const Params& params, const Grid& grid, Equation equation, const Tolerances& tol,
               const EvolveOptions& options) {
    params.validate();
    tol.validate();
    if (grid.nx() % 2 != 0) throw InvalidGridError("dynamics needs an even nx (node at x = 0)");
    if (options.sample_every <= 0) throw ConfigError("sample_every must be positive");
    const double eps = options.coupling == Coupling::Potential ? params.epsilon : 0.0;
    auto state = DynState::at_rest(grid, eps, options.coupling);
    if (state.potential) {
        state.potential->update(state.u_curr, tol, state.t);
        state.flux = state.potential->flux();
    }

    Outcome out;
    auto sample = [&](const DynState& s) {
        out.trajectory.push_back({s.t, s.u_curr.u0(), s.u_curr.min()});
    };
    std::vector<double> snaps = options.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    auto take_snapshots = [&](const DynState& s) {
        while (next_snap < snaps.size() && s.t >= snaps[next_snap] - 0.5 * grid.dt()) {
            out.snapshots.push_back({s.t, s.u_curr.u()});
            ++next_snap;
        }
    };
    auto finish = [&](const DynState& s) {
        out.steps = s.step;
        if (s.potential) {
            out.potential_solves = s.potential->solves();
            out.potential_skips = s.potential->skips();
            out.jacobi_sweeps = s.potential->sweeps();
        }
        return out;
    };

    sample(state);
    take_snapshots(state);
    const double dt = grid.dt();
    for (;;) {
        const auto status = equation == Equation::Heat ? step_heat(state, params, grid, tol)
                                                        : step_wave(state, params, grid, tol);
        if (status == StepStatus::Quenched) {
            out.kind = OutcomeKind::Quenched;
            out.t_event = static_cast<double>(state.step + 1) * dt;
            out.final_u0 = state.quench_u0;
            out.trajectory.push_back({out.t_event, state.quench_u0, state.quench_min - 1.0});
            return finish(state);
        }
        if (options.observer) options.observer(state);
        if (state.step % options.sample_every == 0) sample(state);
        take_snapshots(state);

        const bool settled = state.rate <= tol.steady_rate_tol &&
                             (equation == Equation::Heat || state.prev_rate <= tol.steady_rate_tol);
        if (settled) {
            out.kind = OutcomeKind::Steady;
        } else if (state.t >= tol.t_max - 0.5 * dt) {
            out.kind = OutcomeKind::Undecided;
        } else {
            continue;
        }
        out.t_event = state.t;
        out.final_u0 = state.u_curr.u0();
        if (out.trajectory.back().t != state.t) sample(state);
        return finish(state);
    }
}

Threshold find_dynamic_pullin(double eps, double gamma, Equation equation, const Grid& grid,
                              const Tolerances& tol, Coupling coupling) {
    EvolveOptions opts;
    opts.sample_every = 1 << 30;
    opts.coupling = coupling;
    auto classify = [&](double lambda) {
        const Params p{eps, lambda, gamma};
        const auto o = evolve(p, grid, equation, tol, opts);
        if (o.kind == OutcomeKind::Undecided) {
            std::ostringstream os;
            os.precision(10);
            os << "dynamic pull-in: run at lambda = " << lambda << " neither settled nor quenched by t_max = "
               << tol.t_max;
            throw InconclusiveError(os.str(), lambda, tol.t_max);
        }
        return o.kind == OutcomeKind::Steady;
    };
    Threshold th{kThresholdBracketLo, kThresholdBracketHi, 2};
    if (!classify(th.lo)) throw BracketError("dynamic pull-in: run quenches at the lower bracket end lambda = 0.05");
    if (classify(th.hi)) throw BracketError("dynamic pull-in: run settles at the upper bracket end lambda = 1");
    while (th.hi - th.lo > tol.bisect_tol) {
        const double mid = 0.5 * (th.lo + th.hi);
        (classify(mid) ? th.lo : th.hi) = mid;
        ++th.probes;
    }
    return th;
}

} // namespace mems
