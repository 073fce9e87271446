#include "mems/statics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mems {

namespace {

constexpr int kScanSamples = 48; // intervals over (-3, 0): 16 per unit of slope

struct Trajectory {
    std::vector<double> u;
    bool quenched = false;
};

// Classical RK4 for u'' = lambda (1 + eps^2 u'^2)/(1+u)^2 q(x)^2 with step dx.
// q^2 at half steps is the mean of the two neighbouring nodal values.
Trajectory integrate(std::span<const double> flux, double lambda, double eps, const Grid& grid,
                     double slope, double quench_delta, bool keep_profile) {
    const int n = grid.nx();
    const double h = grid.dx();
    const double eps2 = eps * eps;
    const double floor_u = -1.0 + quench_delta;
    Trajectory out;
    if (keep_profile) out.u.assign(static_cast<std::size_t>(n) + 1, 0.0);

    auto accel = [&](double u, double v, double q2) {
        const double g = 1.0 + u;
        return lambda * (1.0 + eps2 * v * v) / (g * g) * q2;
    };

    double u = 0.0;
    double v = slope;
    double q2_left = flux[0] * flux[0];
    for (int i = 0; i < n; ++i) {
        const double q2_right = flux[static_cast<std::size_t>(i) + 1] * flux[static_cast<std::size_t>(i) + 1];
        const double q2_mid = 0.5 * (q2_left + q2_right);

        const double k1u = v;
        const double k1v = accel(u, v, q2_left);
        const double u2 = u + 0.5 * h * k1u;
        const double v2 = v + 0.5 * h * k1v;
        const double k2u = v2;
        const double k2v = accel(u2, v2, q2_mid);
        const double u3 = u + 0.5 * h * k2u;
        const double v3 = v + 0.5 * h * k2v;
        const double k3u = v3;
        const double k3v = accel(u3, v3, q2_mid);
        const double u4 = u + h * k3u;
        const double v4 = v + h * k3v;
        const double k4u = v4;
        const double k4v = accel(u4, v4, q2_right);

        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (!std::isfinite(u) || !std::isfinite(v) || u <= floor_u || u2 <= floor_u ||
            u3 <= floor_u || u4 <= floor_u) {
            out.quenched = true;
            return out;
        }
        if (keep_profile) out.u[static_cast<std::size_t>(i) + 1] = u;
        q2_left = q2_right;
    }
    if (!keep_profile) out.u.assign(1, u);
    return out;
}

double endpoint_of(const Trajectory& t) { return t.u.back(); }

std::string lambda_text(double lambda) {
    std::ostringstream os;
    os.precision(10);
    os << "lambda = " << lambda;
    return os.str();
}

} // namespace

std::optional<double> shoot_endpoint(std::span<const double> flux, double lambda, double eps,
                                     const Grid& grid, double slope, double quench_delta) {
    if (flux.size() != grid.x_nodes()) throw InvalidGridError("shoot: flux size does not match the grid");
    auto t = integrate(flux, lambda, eps, grid, slope, quench_delta, false);
    if (t.quenched) return std::nullopt;
    return endpoint_of(t);
}

ShootResult shoot_deflection(std::span<const double> flux, double lambda, double eps,
                             const Grid& grid, Branch branch, const Tolerances& tol) {
    if (flux.size() != grid.x_nodes()) throw InvalidGridError("shoot: flux size does not match the grid");
    if (!(lambda >= 0.0)) throw ConfigError(lambda_text(lambda) + " must be >= 0");
    if (lambda == 0.0) return {Deflection::zero(grid), 0.0, false};

    auto f = [&](double s) { return shoot_endpoint(flux, lambda, eps, grid, s, tol.quench_delta); };

    std::vector<double> s(kScanSamples + 1);
    std::vector<std::optional<double>> val(kScanSamples + 1);
    int kmin = -1;
    for (int k = 0; k <= kScanSamples; ++k) {
        s[k] = kSlopeScanLo + (kSlopeScanHi - kSlopeScanLo) * k / kScanSamples;
        val[k] = f(s[k]);
        if (val[k] && (kmin < 0 || *val[k] < *val[kmin])) kmin = k;
    }
    if (kmin < 0) {
        throw NoSolutionError("shooting: every trajectory quenches at " + lambda_text(lambda));
    }

    // u(1; s) is positive at s = 0, dips below zero between the two branch
    // roots and rises again. Locate its minimum precisely so that a narrow
    // dip near the fold is not missed by the coarse scan.
    double s_min = s[kmin];
    double f_min = *val[kmin];
    {
        double a = (kmin > 0 && val[kmin - 1]) ? s[kmin - 1] : s[kmin];
        double b = (kmin < kScanSamples && val[kmin + 1]) ? s[kmin + 1] : s[kmin];
        const double r = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - r * (b - a);
        double d = a + r * (b - a);
        auto fc = f(c);
        auto fd = f(d);
        while (b - a > 1e-12) {
            const double vc = fc ? *fc : HUGE_VAL;
            const double vd = fd ? *fd : HUGE_VAL;
            if (vc < vd) {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = f(d);
            }
        }
        for (auto [sc, fv] : {std::pair{c, fc}, std::pair{d, fd}}) {
            if (fv && *fv < f_min) {
                f_min = *fv;
                s_min = sc;
            }
        }
    }
    if (f_min > tol.shoot_tol) {
        throw NoSolutionError("shooting: u(1; s) has no sign change in the slope bracket at " +
                              lambda_text(lambda));
    }

    auto bisect = [&](double neg, double pos) {
        // f(neg) <= 0 < f(pos)
        double best_s = neg;
        double best_f = std::abs(f_min);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (neg + pos);
            const auto fm = f(mid);
            if (!fm) throw NoSolutionError("shooting: trajectory quenched inside the root bracket at " + lambda_text(lambda));
            if (std::abs(*fm) < best_f) {
                best_f = std::abs(*fm);
                best_s = mid;
            }
            if (best_f <= tol.shoot_tol) break;
            if (*fm <= 0.0) neg = mid; else pos = mid;
            if (std::abs(pos - neg) <= 1e-15 * std::max(1.0, std::abs(neg))) break;
        }
        if (best_f > tol.shoot_tol) {
            throw NoSolutionError("shooting: |u(1)| stalled above shoot_tol at " + lambda_text(lambda));
        }
        return best_s;
    };

    const bool merged = std::abs(f_min) <= tol.shoot_tol;
    double root = s_min;
    if (!merged) {
        if (branch.tag == BranchTag::Upper) {
            int k = kmin + 1;
            while (k <= kScanSamples && !(val[k] && *val[k] > 0.0)) ++k;
            if (k > kScanSamples) throw NoSolutionError("shooting: no upper-branch sign change at " + lambda_text(lambda));
            root = bisect(s_min, s[k]);
        } else {
            int k = kmin - 1;
            while (k >= 0 && val[k] && *val[k] <= 0.0) --k;
            if (k < 0 || !val[k]) throw NoSolutionError("shooting: no lower-branch sign change at " + lambda_text(lambda));
            root = bisect(s_min, s[k]);
        }
    }

    auto t = integrate(flux, lambda, eps, grid, root, tol.quench_delta, true);
    if (t.quenched) throw NoSolutionError("shooting: selected trajectory quenches at " + lambda_text(lambda));
    t.u.back() = 0.0;
    return {Deflection::from_values(std::move(t.u), grid.dx()), root, merged};
}

StationaryState solve_stationary(double lambda, double eps, const Grid& grid, Branch branch,
                                 const Tolerances& tol) {
    if (grid.nx() % 2 != 0) throw InvalidGridError("stationary solver needs an even nx (node at x = 0)");
    if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("epsilon outside [0, 1)");

    // The iterate is the boundary flux. The relaxed pass is tried when the
    // plain one diverges or a later sweep overshoots past the shooting fold.
    std::string shoot_failure;
    for (double relax : {1.0, 0.5}) {
        shoot_failure.clear();
        StationaryState st;
        st.lambda = lambda;
        std::vector<double> flux(grid.x_nodes(), 1.0);
        std::vector<double> u_prev(grid.x_nodes(), 0.0);
        std::optional<Potential> phi;
        double last_change = HUGE_VAL;
        int growing = 0;
        bool retry = false;

        for (int it = 1; it <= tol.picard_max_iter; ++it) {
            ShootResult shot;
            try {
                shot = shoot_deflection(flux, lambda, eps, grid, branch, tol);
            } catch (const NoSolutionError& e) {
                shoot_failure = e.what();
                retry = it > 1;
                break;
            }
            const double change = max_abs_diff(shot.defl.u(), u_prev);
            u_prev = shot.defl.u();
            auto pot = solve_potential(shot.defl, eps, grid, tol, phi);
            st.jacobi_sweeps += pot.sweeps;
            phi = std::move(pot.phi);
            auto q = boundary_flux(*phi, grid);
            if (change <= tol.picard_tol) {
                st.defl = std::move(shot.defl);
                st.phi = std::move(*phi);
                st.flux = std::move(q);
                st.residual = change;
                st.u0 = st.defl.u0();
                st.slope = shot.slope;
                st.picard_iterations = it;
                st.relaxed = relax != 1.0;
                st.merged = shot.merged;
                return st;
            }
            for (std::size_t i = 0; i < flux.size(); ++i) flux[i] += relax * (q[i] - flux[i]);
            growing = change > last_change ? growing + 1 : 0;
            last_change = change;
            if (growing >= 5) {
                retry = true;
                break;
            }
        }
        if (!retry) break;
    }
    if (!shoot_failure.empty()) throw NoSolutionError("no stationary solution: " + shoot_failure);
    std::ostringstream os;
    os << "no stationary solution: Picard iteration did not reach picard_tol = " << tol.picard_tol
       << " at " << lambda_text(lambda);
    throw NoSolutionError(os.str());
}

Threshold find_static_pullin(double eps, const Grid& grid, const Tolerances& tol) {
    auto exists = [&](double lambda) {
        try {
            solve_stationary(lambda, eps, grid, Branch::upper(), tol);
            return true;
        } catch (const NoSolutionError&) {
            return false;
        }
    };
    Threshold th{kThresholdBracketLo, kThresholdBracketHi, 0};
    if (!exists(th.lo)) {
        throw BracketError("static pull-in: no stationary solution at the lower bracket end " + lambda_text(th.lo));
    }
    if (exists(th.hi)) {
        throw BracketError("static pull-in: stationary solution exists at the upper bracket end " + lambda_text(th.hi));
    }
    th.probes = 2;
    while (th.hi - th.lo > tol.bisect_tol) {
        const double mid = 0.5 * (th.lo + th.hi);
        (exists(mid) ? th.lo : th.hi) = mid;
        ++th.probes;
    }
    return th;
}

std::vector<double> bifurcation_lambdas(double lambda_star, int n_points, double bisect_tol) {
    if (n_points < 8) throw ConfigError("bifurcation curve needs at least 8 points");
    // Half the points uniformly up to 0.9 lambda*, the rest halving the gap to
    // the fold each time, ending at lambda* itself.
    const int uniform = n_points / 2;
    const int refine = n_points - uniform;
    std::vector<double> out;
    const double first = lambda_star / n_points;
    const double knee = 0.9 * lambda_star;
    for (int k = 0; k < uniform; ++k) out.push_back(first + (knee - first) * k / uniform);
    double gap = lambda_star - knee;
    for (int k = 0; k < refine - 1; ++k) {
        out.push_back(lambda_star - gap);
        gap = std::max(0.5 * gap, bisect_tol);
    }
    out.push_back(lambda_star);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

BifurcationCurve bifurcation_curve(double eps, const Grid& grid, int n_points, const Tolerances& tol) {
    if (n_points < 8) throw ConfigError("bifurcation curve needs at least 8 points");
    BifurcationCurve curve;
    curve.pullin = find_static_pullin(eps, grid, tol);
    // The lower bracket end is a lambda where a solution was actually found.
    const auto lambdas = bifurcation_lambdas(curve.pullin.lo, n_points, tol.bisect_tol);
    for (Branch b : {Branch::upper(), Branch::lower()}) {
        for (double lambda : lambdas) {
            BifurcationPoint p{lambda, std::nan(""), b.tag, false};
            try {
                auto st = solve_stationary(lambda, eps, grid, b, tol);
                p.u0 = st.u0;
                p.converged = true;
            } catch (const Error&) {
                // recorded as a gap
            }
            curve.points.push_back(p);
        }
    }
    return curve;
}

} // namespace mems
