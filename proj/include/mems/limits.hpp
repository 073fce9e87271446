#pragma once

// Reference models used as oracles:
//  * the small-aspect-ratio limit eps = 0, where the potential is explicit
//    and the membrane sees the forcing lambda / (1+u)^2;
//  * the lumped spring-mass actuator m x'' + b x' + k x = lambda / (d0 - x)^2.

#include "mems/core.hpp"
#include "mems/dynamics.hpp"
#include "mems/statics.hpp"

#include <vector>

namespace mems {

/// Explicit eps = 0 potential (1 + z) / (1 + u) between ground and membrane.
double small_aspect_potential(double u_val, double z);

/// Upper-branch stationary solution of u'' = lambda / (1+u)^2, u(+-1) = 0.
/// Throws NoSolutionError above the fold.
Deflection small_aspect_static(double lambda, double dx, const Tolerances& tol = {});

/// Largest lambda for which small_aspect_static has a solution.
Threshold small_aspect_pullin(double dx, const Tolerances& tol = {});

/// Heat (gamma = 0) or damped wave evolution of the eps = 0 model from rest.
Outcome small_aspect_evolve(double lambda, double gamma, double dx, double dt, const Tolerances& tol = {},
                            int sample_every = 100);

/// Dynamic threshold of the eps = 0 model.
Threshold small_aspect_dynamic_pullin(double gamma, double dx, double dt, const Tolerances& tol = {});

struct SpringParams {
    double m = 0.0;      ///< mass (0: first-order, overdamped limit)
    double b = 1.0;      ///< damping
    double k = 1.0;      ///< stiffness
    double d0 = 1.0;     ///< initial gap
    double lambda = 0.0; ///< force coefficient eps0 A V^2 / 2

    void validate() const;
};

struct SpringSample {
    double t;
    double x;
    double v;
};

struct SpringRun {
    std::vector<SpringSample> trajectory;
    OutcomeKind kind = OutcomeKind::Undecided;
    double t_event = 0.0;
};

/// RK4 integration of the spring-mass model from x = x' = 0. Quenched when the
/// gap d0 - x falls to quench_delta * d0; steady when |x'| + |x''| drops below
/// steady_rate_tol.
SpringRun spring_simulate(const SpringParams& p, double dt, double t_max, const Tolerances& tol = {},
                          int sample_every = 1);

/// Static pull-in of the spring model: max over 0 < x < d0 of k x (d0 - x)^2.
double spring_static_pullin(double k, double d0);

/// Bisection on lambda between settling and collapsing spring runs.
Threshold spring_dynamic_pullin(SpringParams p, double dt, double t_max, const Tolerances& tol = {});

} // namespace mems
