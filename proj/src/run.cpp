#include "mems/run.hpp"

#include "mems/limits.hpp"
#include "mems/output.hpp"
#include "mems/potential.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace mems {

std::string_view to_string(Command c) {
    switch (c) {
    case Command::Steady: return "steady";
    case Command::Bifurcation: return "bifurcation";
    case Command::PullinStatic: return "pullin-static";
    case Command::Evolve: return "evolve";
    case Command::PullinDynamic: return "pullin-dynamic";
    case Command::Limit: return "limit";
    }
    return "unknown";
}

double RunConfig::effective_dt() const {
    if (dt > 0.0) return dt;
    return equation == Equation::Heat ? 1e-5 : 2e-3;
}

Grid RunConfig::grid() const { return Grid::from_spacing(dx, deta, effective_dt()); }

void RunConfig::validate() const {
    params.validate();
    tolerances.validate();
    const Grid g = grid();
    if (g.nx() % 2 != 0) throw InvalidGridError("dx must give an even number of x-intervals (node at x = 0)");
    if (sample_every <= 0) throw ConfigError("sample-every must be positive");
    if (command == Command::Bifurcation && n_points < 8) throw ConfigError("points must be at least 8");
    for (double t : snapshot_times) {
        if (!(t >= 0.0)) throw ConfigError("snapshot times must be non-negative");
    }
    const bool dynamic = command == Command::Evolve || command == Command::PullinDynamic || command == Command::Limit;
    if (dynamic) {
        if (equation == Equation::Heat && g.dt() > heat_step_limit(g.dx())) {
            throw ConfigError("dt = " + format_number(g.dt()) + " exceeds the heat stability limit dx^2/2 = " +
                              format_number(heat_step_limit(g.dx())));
        }
        if (equation == Equation::Wave) {
            if (!(params.gamma > 0.0)) throw ConfigError("the wave equation needs gamma > 0");
            if (g.dt() >= wave_step_limit(g.dx(), params.gamma)) {
                throw ConfigError("dt = " + format_number(g.dt()) + " exceeds the wave stability limit dx*sqrt(gamma) = " +
                                  format_number(wave_step_limit(g.dx(), params.gamma)));
            }
        }
    }
}

RunConfig parse_command_line(int argc, const char* const* argv, std::ostream& log, bool& help) {
    help = false;
    RunConfig cfg;
    CLI::App app{"Coupled membrane / potential solver: stationary states, dynamics and pull-in thresholds"};
    app.set_config("--config", "", "File of `key = value` lines; command-line flags take precedence");

    const std::map<std::string, Command> commands{
        {"steady", Command::Steady},           {"bifurcation", Command::Bifurcation},
        {"pullin-static", Command::PullinStatic}, {"evolve", Command::Evolve},
        {"pullin-dynamic", Command::PullinDynamic}, {"limit", Command::Limit},
    };
    const std::map<std::string, Equation> equations{{"heat", Equation::Heat}, {"wave", Equation::Wave}};
    const std::map<std::string, BranchTag> branches{{"upper", BranchTag::Upper}, {"lower", BranchTag::Lower}};

    auto& t = cfg.tolerances;
    std::string command_name;
    std::string equation_name = "heat";
    std::string branch_name = "upper";
    app.add_option("command", command_name, "steady | bifurcation | pullin-static | evolve | pullin-dynamic | limit")
        ->required()
        ->check(CLI::IsMember(commands, CLI::ignore_case));
    app.add_option("--epsilon", cfg.params.epsilon, "Aspect ratio");
    app.add_option("--lambda", cfg.params.lambda, "Voltage parameter");
    app.add_option("--gamma", cfg.params.gamma, "Inertia / damping ratio");
    app.add_option("--dx", cfg.dx, "x spacing")->capture_default_str();
    app.add_option("--deta", cfg.deta, "eta spacing")->capture_default_str();
    app.add_option("--dt", cfg.dt, "Time step (default 1e-5 heat, 2e-3 wave)");
    app.add_option("--tmax", t.t_max, "Time horizon")->capture_default_str();
    app.add_option("--branch", branch_name, "upper | lower")
        ->check(CLI::IsMember(branches, CLI::ignore_case));
    app.add_option("--equation", equation_name, "heat | wave")
        ->check(CLI::IsMember(equations, CLI::ignore_case));
    app.add_option("--bisect-tol", t.bisect_tol, "Final lambda bracket width")->capture_default_str();
    app.add_option("--quench-delta", t.quench_delta, "Quench threshold on min(1 + u)")->capture_default_str();
    app.add_option("--jacobi-tol", t.jacobi_tol, "Scaled residual tolerance of the potential solve")->capture_default_str();
    app.add_option("--jacobi-max-iter", t.jacobi_max_iter)->capture_default_str();
    app.add_option("--picard-tol", t.picard_tol, "Max change in u between Picard sweeps")->capture_default_str();
    app.add_option("--picard-max-iter", t.picard_max_iter)->capture_default_str();
    app.add_option("--shoot-tol", t.shoot_tol, "|u(1)| tolerance of the shooting method")->capture_default_str();
    app.add_option("--steady-rate-tol", t.steady_rate_tol, "max|u_t| below which a run is steady")->capture_default_str();
    app.add_option("--out", cfg.output_dir, "Output directory")->capture_default_str();
    app.add_option("--sample-every", cfg.sample_every, "Trajectory sampling interval in steps")->capture_default_str();
    app.add_option("--points", cfg.n_points, "Bifurcation curve points per branch")->capture_default_str();
    app.add_option("--snapshot-times", cfg.snapshot_times, "Comma-separated profile snapshot times")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        log << app.help();
        help = true;
        return cfg;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    auto lower = [](std::string v) {
        for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return v;
    };
    cfg.command = commands.at(lower(command_name));
    cfg.equation = equations.at(lower(equation_name));
    cfg.branch = branches.at(lower(branch_name)) == BranchTag::Upper ? Branch::upper() : Branch::lower();
    return cfg;
}

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
    std::ofstream os(dir / name, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + (dir / name).string());
    return os;
}

Manifest base_manifest(const RunConfig& cfg) {
    const Grid g = cfg.grid();
    const auto& t = cfg.tolerances;
    Manifest m;
    m.set("command", std::string(to_string(cfg.command)));
    m.set("epsilon", cfg.params.epsilon);
    m.set("lambda", cfg.params.lambda);
    m.set("gamma", cfg.params.gamma);
    m.set("equation", std::string(to_string(cfg.equation)));
    m.set("branch", std::string(cfg.branch.name()));
    m.set("dx", g.dx());
    m.set("deta", g.deta());
    m.set("nx", g.nx());
    m.set("neta", g.neta());
    m.set("dt", g.dt());
    m.set("jacobi_tol", t.jacobi_tol);
    m.set("jacobi_max_iter", t.jacobi_max_iter);
    m.set("picard_tol", t.picard_tol);
    m.set("picard_max_iter", t.picard_max_iter);
    m.set("shoot_tol", t.shoot_tol);
    m.set("bisect_tol", t.bisect_tol);
    m.set("quench_delta", t.quench_delta);
    m.set("steady_rate_tol", t.steady_rate_tol);
    m.set("t_max", t.t_max);
    m.set("sample_every", cfg.sample_every);
    if (cfg.command == Command::Bifurcation) m.set("points", cfg.n_points);
    if (!cfg.snapshot_times.empty()) {
        std::string s;
        for (double v : cfg.snapshot_times) s += (s.empty() ? "" : ",") + format_number(v);
        m.set("snapshot_times", s);
    }
    return m;
}

void write_threshold_row(std::ostream& os, const std::string& quantity, double eps, double gamma, const Threshold& th) {
    os << quantity << ',' << format_number(eps) << ',' << format_number(gamma) << ',' << format_number(th.lo) << ','
       << format_number(th.hi) << ',' << format_number(th.value()) << '\n';
}

constexpr const char* kThresholdHeader = "quantity,epsilon,gamma,lambda_lo,lambda_hi,lambda\n";

void record_threshold(Manifest& m, const std::string& prefix, const Threshold& th) {
    m.set(prefix + "_lo", th.lo);
    m.set(prefix + "_hi", th.hi);
    m.set(prefix, th.value());
    m.set(prefix + "_probes", th.probes);
}

void record_outcome(Manifest& m, const std::string& prefix, const Outcome& o) {
    m.set(prefix + "kind", std::string(to_string(o.kind)));
    m.set(prefix + "t_event", o.t_event);
    m.set(prefix + "final_u0", o.final_u0);
    m.set(prefix + "steps", o.steps);
    m.set(prefix + "potential_solves", o.potential_solves);
    m.set(prefix + "potential_skips", o.potential_skips);
    m.set(prefix + "jacobi_sweeps", o.jacobi_sweeps);
}

int run_steady(const RunConfig& cfg, Manifest& m, std::ostream& log) {
    const Grid g = cfg.grid();
    const auto st = solve_stationary(cfg.params.lambda, cfg.params.epsilon, g, cfg.branch, cfg.tolerances);
    m.set("u0", st.u0);
    m.set("slope", st.slope);
    m.set("picard_iterations", st.picard_iterations);
    m.set("picard_residual", st.residual);
    m.set("jacobi_sweeps", st.jacobi_sweeps);
    m.set("relaxed", std::string(st.relaxed ? "true" : "false"));
    m.set("merged", std::string(st.merged ? "true" : "false"));
    auto prof = open_output(cfg.output_dir, "profile.csv");
    write_profile_csv(prof, st.defl, g);
    auto pot = open_output(cfg.output_dir, "potential.csv");
    write_potential_csv(pot, st.phi, g);
    auto phys = open_output(cfg.output_dir, "potential_physical.csv");
    write_physical_potential_csv(phys, untransform_potential(st.phi, st.defl, g));
    log << "stationary " << cfg.branch.name() << " branch: u0 = " << format_number(st.u0) << " after "
        << st.picard_iterations << " Picard sweeps\n";
    return kExitOk;
}

int run_bifurcation(const RunConfig& cfg, Manifest& m, std::ostream& log) {
    const Grid g = cfg.grid();
    const auto curve = bifurcation_curve(cfg.params.epsilon, g, cfg.n_points, cfg.tolerances);
    record_threshold(m, "lambda_s", curve.pullin);
    long converged = 0;
    for (const auto& p : curve.points) converged += p.converged ? 1 : 0;
    m.set("points_converged", converged);
    m.set("points_total", static_cast<long>(curve.points.size()));
    auto os = open_output(cfg.output_dir, "bifurcation.csv");
    write_bifurcation_csv(os, curve.points);
    log << "bifurcation curve: " << converged << " of " << curve.points.size() << " points converged; lambda_s in ["
        << format_number(curve.pullin.lo) << ", " << format_number(curve.pullin.hi) << "]\n";
    return kExitOk;
}

int run_pullin_static(const RunConfig& cfg, Manifest& m, std::ostream& log) {
    const auto th = find_static_pullin(cfg.params.epsilon, cfg.grid(), cfg.tolerances);
    record_threshold(m, "lambda_s", th);
    auto os = open_output(cfg.output_dir, "pullin.csv");
    os << kThresholdHeader;
    write_threshold_row(os, "lambda_s", cfg.params.epsilon, 0.0, th);
    log << "lambda_s bracket [" << format_number(th.lo) << ", " << format_number(th.hi)
        << "], midpoint " << format_number(th.value()) << '\n';
    return kExitOk;
}

int run_evolve(const RunConfig& cfg, Manifest& m, std::ostream& log) {
    const Grid g = cfg.grid();
    EvolveOptions opts;
    opts.sample_every = cfg.sample_every;
    opts.snapshot_times = cfg.snapshot_times;
    const auto o = evolve(cfg.params, g, cfg.equation, cfg.tolerances, opts);
    record_outcome(m, "outcome_", o);
    auto traj = open_output(cfg.output_dir, "trajectory.csv");
    write_trajectory_csv(traj, o.trajectory);
    if (!cfg.snapshot_times.empty()) {
        auto snaps = open_output(cfg.output_dir, "snapshots.csv");
        write_snapshots_csv(snaps, o.snapshots, g);
    }
    log << to_string(cfg.equation) << " run: " << to_string(o.kind) << " at t = " << format_number(o.t_event)
        << ", u0 = " << format_number(o.final_u0) << '\n';
    return kExitOk;
}

int run_pullin_dynamic(const RunConfig& cfg, Manifest& m, std::ostream& log) {
    const double gamma = cfg.equation == Equation::Heat ? 0.0 : cfg.params.gamma;
    const auto th = find_dynamic_pullin(cfg.params.epsilon, gamma, cfg.equation, cfg.grid(), cfg.tolerances);
    const std::string name = cfg.equation == Equation::Heat ? "lambda_h" : "lambda_w";
    record_threshold(m, name, th);
    auto os = open_output(cfg.output_dir, "pullin.csv");
    os << kThresholdHeader;
    write_threshold_row(os, name, cfg.params.epsilon, gamma, th);
    log << name << " bracket [" << format_number(th.lo) << ", " << format_number(th.hi) << "], midpoint "
        << format_number(th.value()) << '\n';
    return kExitOk;
}

// Small-aspect-ratio model: static and dynamic thresholds, plus the static
// profile and a trajectory when --lambda is given.
int run_limit(const RunConfig& cfg, Manifest& m, std::ostream& log) {
    const Grid g = cfg.grid();
    const auto& tol = cfg.tolerances;
    const double gamma = cfg.equation == Equation::Heat ? 0.0 : cfg.params.gamma;
    const auto th_s = small_aspect_pullin(g.dx(), tol);
    const auto th_d = small_aspect_dynamic_pullin(gamma, g.dx(), g.dt(), tol);
    record_threshold(m, "limit_lambda_s", th_s);
    record_threshold(m, "limit_lambda_dyn", th_d);
    {
        auto os = open_output(cfg.output_dir, "pullin.csv");
        os << kThresholdHeader;
        write_threshold_row(os, "limit_lambda_s", 0.0, 0.0, th_s);
        write_threshold_row(os, "limit_lambda_dyn", 0.0, gamma, th_d);
    }
    log << "small-aspect model: static threshold " << format_number(th_s.value()) << ", dynamic threshold "
        << format_number(th_d.value()) << '\n';
    if (cfg.params.lambda > 0.0) {
        const auto o = small_aspect_evolve(cfg.params.lambda, gamma, g.dx(), g.dt(), tol, cfg.sample_every);
        record_outcome(m, "outcome_", o);
        auto traj = open_output(cfg.output_dir, "trajectory.csv");
        write_trajectory_csv(traj, o.trajectory);
        try {
            const auto defl = small_aspect_static(cfg.params.lambda, g.dx(), tol);
            m.set("static_u0", defl.u0());
            auto prof = open_output(cfg.output_dir, "profile.csv");
            write_profile_csv(prof, defl, g);
        } catch (const NoSolutionError&) {
            m.set("static_u0", std::string("none"));
        }
    }
    return kExitOk;
}

} // namespace

int run(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());

    Manifest m = base_manifest(cfg);
    int code = kExitOk;
    auto write_manifest = [&](const std::string& status) {
        m.set("status", status);
        auto os = open_output(cfg.output_dir, "manifest.txt");
        m.write(os);
    };
    try {
        switch (cfg.command) {
        case Command::Steady: code = run_steady(cfg, m, log); break;
        case Command::Bifurcation: code = run_bifurcation(cfg, m, log); break;
        case Command::PullinStatic: code = run_pullin_static(cfg, m, log); break;
        case Command::Evolve: code = run_evolve(cfg, m, log); break;
        case Command::PullinDynamic: code = run_pullin_dynamic(cfg, m, log); break;
        case Command::Limit: code = run_limit(cfg, m, log); break;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        m.set("error", e.what());
        write_manifest("failed");
        throw;
    }
    write_manifest("ok");
    return code;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    try {
        bool help = false;
        const auto cfg = parse_command_line(argc, argv, out, help);
        if (help) return kExitOk;
        return run(cfg, out);
    } catch (const ConfigError& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return kExitInvalidConfig;
    } catch (const NoSolutionError& e) {
        err << e.what() << '\n';
        return kExitNoConvergence;
    } catch (const Error& e) {
        err << "solver failure: " << e.what() << '\n';
        return kExitNoConvergence;
    }
}

} // namespace mems
