#pragma once

// Time-dependent membrane driven by the electrostatic force:
//
//   heat:  u_t - u_xx = -lambda (1 + eps^2 u_x^2)/(1+u)^2 |phi_eta(x,1,t)|^2
//   wave:  gamma u_tt + u_t - u_xx = (same right-hand side)
//
// both from rest, with the potential re-solved after every step.

#include "mems/core.hpp"
#include "mems/potential.hpp"
#include "mems/statics.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace mems {

enum class Equation { Heat, Wave };

std::string_view to_string(Equation eq);

/// How the boundary flux is obtained at each step.
enum class Coupling {
    Potential, ///< solve L_u(phi) = 0 and use phi_eta(x, 1)
    UnitFlux,  ///< flux = 1, eps = 0: the small-aspect-ratio model
};

/// The explicit wave scheme is run only below this time step.
double wave_step_limit(double dx, double gamma);
/// Largest stable explicit heat step.
double heat_step_limit(double dx);

class StabilityError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

struct DynState {
    long step = 0;
    double t = 0.0;
    Deflection u_curr;
    Deflection u_prev;                    ///< wave only
    std::optional<WarmPotential> potential; ///< empty for Coupling::UnitFlux
    std::vector<double> flux;
    double rate = 0.0;                    ///< max |u^{n} - u^{n-1}| / dt
    double prev_rate = 0.0;
    double quench_min = 0.0;              ///< min(1 + u) of the rejected profile
    double quench_u0 = 0.0;

    /// State at rest: u = 0, phi = eta, flux = 1.
    static DynState at_rest(const Grid& grid, double eps, Coupling coupling);
};

enum class StepStatus { Advanced, Quenched };

/// Forward Euler step of the heat equation. On StepStatus::Quenched the state
/// is left unchanged apart from quench_min / quench_u0.
StepStatus step_heat(DynState& state, const Params& params, const Grid& grid, const Tolerances& tol);

/// Centred (leapfrog-type) step of the damped wave equation; the first step
/// uses u_t(x, 0) = 0.
StepStatus step_wave(DynState& state, const Params& params, const Grid& grid, const Tolerances& tol);

enum class OutcomeKind { Steady, Quenched, Undecided };

std::string_view to_string(OutcomeKind kind);

struct TrajectorySample {
    double t;
    double u0;
    double min_u;
};

struct Snapshot {
    double t;
    std::vector<double> u;
};

struct Outcome {
    OutcomeKind kind = OutcomeKind::Undecided;
    double t_event = 0.0;
    double final_u0 = 0.0;
    std::vector<TrajectorySample> trajectory;
    std::vector<Snapshot> snapshots;
    long steps = 0;
    long potential_solves = 0;
    long potential_skips = 0;
    long jacobi_sweeps = 0;
};

struct EvolveOptions {
    int sample_every = 100;
    std::vector<double> snapshot_times;
    /// Called after every accepted step.
    std::function<void(const DynState&)> observer;
    Coupling coupling = Coupling::Potential;
};

/// Steps from rest until the run quenches, settles or reaches t_max.
Outcome evolve(const Params& params, const Grid& grid, Equation equation, const Tolerances& tol,
               const EvolveOptions& options = {});

/// Bisection on lambda between runs that settle and runs that quench.
Threshold find_dynamic_pullin(double eps, double gamma, Equation equation, const Grid& grid,
                              const Tolerances& tol, Coupling coupling = Coupling::Potential);

} // namespace mems
