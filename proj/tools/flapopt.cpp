// flapopt: flapping-wing UVLM simulation and shape-optimization front end.
//
// Subcommands: simulate, refine, optimize, sweep, geom. Every flag overrides
// the matching key of the (optional) --config file. Exit codes: 0 success,
// 2 configuration/validation error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "flapopt/config.hpp"
#include "flapopt/metrics.hpp"
#include "flapopt/optimizer.hpp"

namespace fs = std::filesystem;
using namespace flapopt;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    const fs::path path = fs::path(cfg.out_dir) / name;
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open output file " + path.string());
    return os;
}

struct PendingOverride {
    std::string key, value;
};

/// Builds a RunConfig from --config plus flag overrides, collected in order.
struct ConfigCli {
    std::string config_path;
    std::vector<PendingOverride> overrides;

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file (INI sections)");
        auto opt = [&](const std::string& flag, const std::string& key,
                       const std::string& help) {
            cmd->add_option_function<std::string>(
                   flag,
                   [this, key](const std::string& v) { overrides.push_back({key, v}); }, help)
                ->expected(1);
        };
        opt("--kappa", "kinematics.kappa", "reduced frequency (c=1, U=1)");
        opt("--omega", "kinematics.omega", "flapping angular frequency (overrides kappa)");
        opt("--amplitude-deg", "kinematics.amplitude_deg", "flap amplitude A_phi [deg]");
        opt("--pitch-deg", "kinematics.pitch_deg", "fixed root pitch [deg]");
        opt("--u-inf", "kinematics.u_inf", "freestream speed");
        opt("--rho", "kinematics.rho", "fluid density");
        opt("--scheme", "geometry.scheme",
            "baseline|single-knot-span|fixed12|camber|le-only|te-only");
        opt("--degree", "geometry.degree", "spanwise B-spline degree");
        opt("--semispan", "geometry.semispan", "baseline semispan [c]");
        opt("--cambered", "geometry.cambered", "cambered section (true/false)");
        opt("--n-chord", "discretization.n_chord", "chordwise panels");
        opt("--n-span", "discretization.n_span", "spanwise panels per half wing");
        opt("--n-ts", "discretization.n_ts", "time steps per flapping cycle");
        opt("--cycles", "discretization.cycles", "flapping cycles simulated");
        opt("--truncation-radius", "discretization.truncation_radius",
            "wake truncation radius [c]");
        opt("--core-radius", "discretization.core_radius", "vortex core cutoff [c]");
        opt("--constraints", "optimizer.constraints",
            "comma list: lift,thrust,area,power,angle");
        opt("--max-outer", "optimizer.max_outer", "GCMMA outer iteration cap");
        opt("--max-inner", "optimizer.max_inner", "GCMMA inner iteration cap");
        opt("--kkt-tol", "optimizer.kkt_tol", "KKT residual stop tolerance");
        opt("--step-tol", "optimizer.step_tol", "design step stop tolerance");
        opt("--fd-step", "optimizer.fd_step", "finite-difference step");
        opt("--theta-cr-deg", "optimizer.theta_cr_deg", "mesh-angle limit [deg]");
        opt("--out-dir", "output.out_dir", "artifact directory");
        opt("--snapshot-stride", "output.snapshot_stride", "wake/pressure snapshot stride");
        opt("--workers", "output.workers", "parallel workers (1 = bit-reproducible default)");
    }

    RunConfig build() const {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config_file(config_path);
        for (const auto& o : overrides) cfg.set(o.key, o.value);
        cfg.validate();
        return cfg;
    }
};

std::string case_name(const RunConfig& cfg) {
    std::ostringstream os;
    os << cfg.scheme << "-kappa" << fmt(reduced_frequency(cfg.motion(), kBaselineChord));
    return os.str();
}

void write_summary(std::ostream& os, const std::string& name, const CycleMetrics& m) {
    os << "case,eta,Lstar,Tstar,Pstar,area_ratio,CP\n";
    os << name << ',' << fmt(m.eta) << ',' << fmt(m.lstar_bar) << ',' << fmt(m.tstar_bar)
       << ',' << fmt(m.pstar_bar) << ',' << fmt(m.area_ratio) << ',' << fmt(m.cp) << '\n';
}

void write_timeseries(std::ostream& os, const std::vector<StepResult>& steps,
                      const FlappingMotion& motion) {
    os << "step,t,phi,L,T,P,Lstar,Tstar,Pstar\n";
    for (size_t k = 0; k < steps.size(); ++k) {
        const StepResult& s = steps[k];
        const Eigen::Vector3d n =
            normalize_loads(s.lift, s.thrust, s.power, motion.rho, motion.u_inf);
        os << (k + 1) << ',' << fmt(s.t) << ',' << fmt(s.phi) << ',' << fmt(s.lift) << ','
           << fmt(s.thrust) << ',' << fmt(s.power) << ',' << fmt(n[0]) << ',' << fmt(n[1])
           << ',' << fmt(n[2]) << '\n';
    }
}

void write_wake_snapshot(const RunConfig& cfg, const SimFrame& frame) {
    char name[64];
    std::snprintf(name, sizeof name, "wake_%05d.csv", frame.step);
    std::ofstream os = open_out(cfg, name);
    os << "ring_id,x1,y1,z1,x2,y2,z2,x3,y3,z3,x4,y4,z4,gamma\n";
    const RingSet rings = frame.wake.active_rings(frame.config.wake_reference,
                                                  frame.config.truncation_radius);
    for (Eigen::Index r = 0; r < rings.size(); ++r) {
        os << r;
        for (const auto* c : {&rings.c0, &rings.c1, &rings.c2, &rings.c3})
            for (int d = 0; d < 3; ++d) os << ',' << fmt((*c)(d, r));
        os << ',' << fmt(rings.gamma[r]) << '\n';
    }
}

void write_pressure_snapshot(const RunConfig& cfg, const SimFrame& frame) {
    char name[64];
    std::snprintf(name, sizeof name, "pressure_%05d.csv", frame.step);
    std::ofstream os = open_out(cfg, name);
    os << "panel_id,dp\n";
    for (Eigen::Index k = 0; k < frame.result.dp.size(); ++k)
        os << k << ',' << fmt(frame.result.dp[k]) << '\n';
}

struct SimArtifacts {
    CycleMetrics metrics;
};

SimArtifacts run_simulation(const RunConfig& cfg, const ControlNet& net, double baseline_area,
                            const std::string& name) {
    const PanelMesh mesh = generate_mesh(net, cfg.n_chord, cfg.n_span);
    SimConfig sim;
    sim.motion = cfg.motion();
    sim.n_ts = cfg.n_ts;
    sim.cycles = cfg.cycles;
    sim.truncation_radius = cfg.truncation_radius;
    sim.core_radius = cfg.core_radius;
    sim.workers = cfg.workers;

    std::function<void(const SimFrame&)> observer;
    if (cfg.snapshot_stride > 0)
        observer = [&](const SimFrame& frame) {
            if (frame.step % cfg.snapshot_stride == 0) {
                write_wake_snapshot(cfg, frame);
                write_pressure_snapshot(cfg, frame);
            }
        };
    const SimResult result = simulate(mesh, sim, observer);

    const double area = wing_area(mesh);
    const double span = 2.0 * net.y.maxCoeff();
    SimArtifacts out;
    out.metrics = summarize_last_cycle(result.steps, cfg.n_ts, sim.motion, area,
                                       baseline_area > 0 ? baseline_area : area, span);
    auto ts = open_out(cfg, "timeseries.csv");
    write_timeseries(ts, result.steps, sim.motion);
    auto sm = open_out(cfg, "summary.csv");
    write_summary(sm, name, out.metrics);
    return out;
}

int cmd_simulate(const ConfigCli& cli) {
    const RunConfig cfg = cli.build();
    const WingParametrization wing = cfg.wing();
    const SimArtifacts art = run_simulation(cfg, wing.baseline_net, 0.0, case_name(cfg));
    std::cout << "eta=" << fmt(art.metrics.eta) << " Lstar=" << fmt(art.metrics.lstar_bar)
              << " Tstar=" << fmt(art.metrics.tstar_bar)
              << " Pstar=" << fmt(art.metrics.pstar_bar) << '\n';
    return 0;
}

int cmd_refine(const ConfigCli& cli, const std::string& axis, std::vector<int> levels) {
    if (levels.size() < 2) throw ValidationError("refine needs at least 2 levels");
    RunConfig cfg = cli.build();
    std::ofstream os = open_out(cfg, "refine.csv");
    os << "axis,level,eta,Lstar,Tstar,Pstar,dLstar,dTstar,dPstar\n";
    std::optional<CycleMetrics> prev;
    for (int level : levels) {
        RunConfig run = cfg;
        if (axis == "chord") run.n_chord = level;
        else if (axis == "span") run.n_span = level;
        else if (axis == "time") run.n_ts = level;
        else throw ValidationError("refine axis must be chord, span or time");
        run.validate();
        const WingParametrization wing = run.wing();
        const DesignMetrics dm = evaluate_design(wing, Eigen::VectorXd::Zero(wing.dof_count()),
                                                 run.eval_settings());
        if (dm.failed) throw SolverError("refine level failed: " + dm.failure);
        const CycleMetrics& m = dm.cycle;
        os << axis << ',' << level << ',' << fmt(m.eta) << ',' << fmt(m.lstar_bar) << ','
           << fmt(m.tstar_bar) << ',' << fmt(m.pstar_bar);
        if (prev)
            os << ',' << fmt(m.lstar_bar - prev->lstar_bar) << ','
               << fmt(m.tstar_bar - prev->tstar_bar) << ','
               << fmt(m.pstar_bar - prev->pstar_bar);
        else
            os << ",,,";
        os << '\n';
        prev = m;
    }
    return 0;
}

/// Design-vector seed recovered from a control-net table (for --warm-start).
Eigen::VectorXd seed_from_net(const WingParametrization& wing, const ControlNet& warm) {
    const ControlNet& bl = wing.baseline_net;
    const double semispan = bl.y.maxCoeff();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(wing.dof_count());
    const bool aligned = warm.span_count() == bl.span_count() &&
                         warm.chord_count() == bl.chord_count() &&
                         (warm.y.row(0) - bl.y.row(0)).cwiseAbs().maxCoeff() < 1e-6;
    for (int k = 0; k < wing.dof_count(); ++k) {
        const DofEntry& d = wing.dofs[k];
        if (d.mode == DofMode::TranslateZ) {
            if (warm.chord_count() == bl.chord_count())
                x[k] = warm.z(d.chord_col, 0) - bl.z(d.chord_col, 0);
            x[k] = std::clamp(x[k], -wing.bound(), wing.bound());
            continue;
        }
        double le, te, y_row;
        const double y_bl = bl.y(0, d.span_row);
        if (aligned) {
            le = warm.x.col(d.span_row).minCoeff();
            te = warm.x.col(d.span_row).maxCoeff();
            y_row = warm.y(0, d.span_row);
        } else {  // sample the warm surface's edges at the row's span fraction
            const double eta = std::clamp(y_bl / semispan, 0.0, 1.0);
            le = evaluate_surface(warm, 0.0, eta).x();
            te = evaluate_surface(warm, 1.0, eta).x();
            y_row = evaluate_surface(warm, 0.5, eta).y();
        }
        switch (d.mode) {
            case DofMode::ScaleX: {
                const Eigen::ArrayXd rel = bl.x.col(d.span_row).array() - d.anchor;
                const double dmax = rel.abs().maxCoeff();
                const double chord_bl =
                    bl.x.col(d.span_row).maxCoeff() - bl.x.col(d.span_row).minCoeff();
                x[k] = ((te - le) / chord_bl - 1.0) * dmax;
                break;
            }
            case DofMode::TranslateX:
                x[k] = 0.5 * (le + te) - 0.5 * (bl.x.col(d.span_row).minCoeff() +
                                                bl.x.col(d.span_row).maxCoeff());
                break;
            case DofMode::TranslateY:
            case DofMode::ScaleY:
                x[k] = y_row - y_bl;
                break;
            default:
                break;
        }
        x[k] = std::clamp(x[k], -wing.bound(), wing.bound());
    }
    return x;
}

int cmd_optimize(const ConfigCli& cli, const std::string& warm_start) {
    const RunConfig cfg = cli.build();
    const WingParametrization wing = cfg.wing();
    if (wing.dof_count() == 0)
        throw ValidationError("the baseline scheme has no design variables to optimize");

    OptimizationProblem problem = make_problem(wing, cfg.eval_settings(),
                                               cfg.power_constrained(),
                                               cfg.theta_cr_deg * M_PI / 180.0);
    problem.fd_step = cfg.fd_step;
    problem.gcmma.max_outer = cfg.max_outer;
    problem.gcmma.max_inner = cfg.max_inner;
    problem.gcmma.kkt_tol = cfg.kkt_tol;
    problem.gcmma.step_tol = cfg.step_tol;

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(wing.dof_count());
    if (!warm_start.empty()) x0 = seed_from_net(wing, read_control_net_file(warm_start));

    const OptimizationResult result = optimize(problem, x0);

    std::ofstream log = open_out(cfg, "iterations.csv");
    log << "outer,inner,eta,Lstar,Tstar,Pstar,area_ratio,theta_max,max_violation\n";
    for (const OptimizationLogRow& r : result.log)
        log << r.outer << ',' << r.inner << ',' << fmt(r.eta) << ',' << fmt(r.lstar) << ','
            << fmt(r.tstar) << ',' << fmt(r.pstar) << ',' << fmt(r.area_ratio) << ','
            << fmt(r.theta_max) << ',' << fmt(r.max_violation) << '\n';

    write_control_net_file((fs::path(cfg.out_dir) / "design.net").string(), result.net);
    std::ofstream sm = open_out(cfg, "summary.csv");
    write_summary(sm, case_name(cfg) + (result.feasible ? "" : "-infeasible"),
                  result.metrics.cycle);

    std::cout << (result.feasible ? "feasible" : "NOT feasible")
              << " eta=" << fmt(result.metrics.cycle.eta)
              << " Lstar=" << fmt(result.metrics.cycle.lstar_bar)
              << " Tstar=" << fmt(result.metrics.cycle.tstar_bar)
              << " Pstar=" << fmt(result.metrics.cycle.pstar_bar)
              << " area_ratio=" << fmt(result.metrics.cycle.area_ratio)
              << " evaluations=" << result.evaluations << '\n';
    return result.feasible ? 0 : 3;
}

int cmd_sweep(const ConfigCli& cli, std::vector<double> ars) {
    const RunConfig cfg = cli.build();
    if (ars.empty()) ars = {4, 6, 8, 12, 16, 20, 24, 28};
    if (ars.size() < 2) throw ValidationError("sweep needs at least 2 aspect ratios");
    const std::vector<SweepRow> rows = aspect_ratio_sweep(ars, cfg.eval_settings(),
                                                          cfg.cambered);
    std::ofstream os = open_out(cfg, "sweep.csv");
    os << "AR,eta,CP\n";
    for (const SweepRow& r : rows)
        os << fmt(r.aspect_ratio) << ',' << fmt(r.eta) << ',' << fmt(r.cp) << '\n';
    return 0;
}

int cmd_geom(const ConfigCli& cli, const std::string& import_path,
             const std::string& export_path, const std::string& mesh_path) {
    const RunConfig cfg = cli.build();
    ControlNet net;
    if (!import_path.empty()) {
        net = read_control_net_file(import_path);
        std::cout << "imported " << net.chord_count() << "x" << net.span_count()
                  << " net, degrees " << net.degree_u << "x" << net.degree_v << '\n';
    } else {
        net = cfg.wing().baseline_net;
    }
    if (!export_path.empty()) write_control_net_file(export_path, net);
    const PanelMesh mesh = generate_mesh(net, cfg.n_chord, cfg.n_span);
    if (!mesh_path.empty()) {
        std::ofstream os(mesh_path);
        if (!os) throw ValidationError("cannot open " + mesh_path);
        write_mesh_csv(os, mesh);
    }
    std::cout << "area=" << fmt(wing_area(mesh))
              << " theta_max_deg=" << fmt(panel_corner_angles(mesh) * 180.0 / M_PI) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"flapping-wing UVLM simulation and shape optimization"};
    app.require_subcommand(1);

    ConfigCli sim_cli, ref_cli, opt_cli, sweep_cli, geom_cli;

    CLI::App* sim = app.add_subcommand("simulate", "march one configuration and write metrics");
    sim_cli.add_flags(sim);

    CLI::App* ref = app.add_subcommand("refine", "convergence study along one axis");
    std::string axis = "time";
    std::vector<int> levels;
    ref->add_option("--axis", axis, "chord|span|time")->required();
    ref->add_option("--levels", levels, "refinement levels")->required()->delimiter(',');
    ref_cli.add_flags(ref);

    CLI::App* opt = app.add_subcommand("optimize", "GCMMA shape optimization");
    std::string warm;
    opt->add_option("--warm-start", warm, "control-net table seeding x0");
    opt_cli.add_flags(opt);

    CLI::App* swp = app.add_subcommand("sweep", "aspect-ratio sweep of the baseline shape");
    std::vector<double> ars;
    swp->add_option("--ar", ars, "aspect ratios")->delimiter(',');
    sweep_cli.add_flags(swp);

    CLI::App* geo = app.add_subcommand("geom", "export/import control-net tables and meshes");
    std::string import_path, export_path, mesh_path;
    geo->add_option("--import", import_path, "control-net table to read");
    geo->add_option("--export", export_path, "control-net table to write");
    geo->add_option("--mesh-csv", mesh_path, "panel mesh CSV to write");
    geom_cli.add_flags(geo);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_cli);
        if (ref->parsed()) return cmd_refine(ref_cli, axis, levels);
        if (opt->parsed()) return cmd_optimize(opt_cli, warm);
        if (swp->parsed()) return cmd_sweep(sweep_cli, ars);
        if (geo->parsed()) return cmd_geom(geom_cli, import_path, export_path, mesh_path);
    } catch (const ValidationError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
