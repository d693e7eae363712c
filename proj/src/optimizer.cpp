#include "flapopt/optimizer.hpp"

#include <cmath>

namespace flapopt {

DesignMetrics evaluate_design(const WingParametrization& param, const Eigen::VectorXd& x,
                              const EvalSettings& settings, double baseline_area) {
    DesignMetrics out;
    try {
        const ControlNet net = apply_design(param, x);
        const PanelMesh mesh = generate_mesh(net, settings.n_chord, settings.n_span);
        out.theta_max = panel_corner_angles(mesh);
        const double area = wing_area(mesh);

        SimConfig sim;
        sim.motion = settings.motion;
        sim.n_ts = settings.n_ts;
        sim.cycles = settings.cycles;
        sim.truncation_radius = settings.truncation_radius;
        sim.core_radius = settings.core_radius;
        sim.workers = settings.workers;
        const SimResult result = simulate(mesh, sim);

        const double span = 2.0 * param.baseline_net.y.maxCoeff();
        out.cycle = summarize_last_cycle(result.steps, settings.n_ts, settings.motion, area,
                                         baseline_area > 0 ? baseline_area : area, span,
                                         param.chord);
    } catch (const BoundViolationError&) {
        throw;
    } catch (const std::exception& e) {
        out.failed = true;
        out.failure = e.what();
    }
    return out;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h, double f_at_x,
                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            std::vector<bool>* forward_used) {
    if (!(h > 0)) throw ValidationError("finite-difference step must be positive");
    const Eigen::Index n = x.size();
    Eigen::VectorXd g(n);
    if (forward_used) forward_used->assign(n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        bool forward = x[i] - h < lower[i];  // shift direction at the bound
        Eigen::VectorXd xp = x;
        if (!forward) {
            xp[i] = x[i] - h;
            try {
                g[i] = (f_at_x - f(xp)) / h;
                continue;
            } catch (const std::exception&) {
                forward = true;  // perturbed evaluation failed, fall forward
            }
        }
        xp[i] = std::min(x[i] + h, upper[i]);
        if (!(xp[i] > x[i]))
            throw ValidationError("cannot place a finite-difference step inside the bounds");
        g[i] = (f(xp) - f_at_x) / (xp[i] - x[i]);
        if (forward_used) (*forward_used)[i] = true;
    }
    return g;
}

namespace {

const char* constraint_name(ConstraintKind k) {
    switch (k) {
        case ConstraintKind::LiftMin: return "lift";
        case ConstraintKind::ThrustMin: return "thrust";
        case ConstraintKind::AreaMax: return "area";
        case ConstraintKind::PowerMax: return "power";
        case ConstraintKind::AngleMax: return "angle";
    }
    return "?";
}

/// Normalized constraint values g_i <= 0 (each scaled by its bound).
Eigen::VectorXd constraint_values(const std::vector<ConstraintSpec>& cs,
                                  const DesignMetrics& m) {
    Eigen::VectorXd g(cs.size());
    for (size_t i = 0; i < cs.size(); ++i) {
        const double b = cs[i].bound;
        switch (cs[i].kind) {
            case ConstraintKind::LiftMin: g[i] = 1.0 - m.cycle.lstar_bar / b; break;
            case ConstraintKind::ThrustMin: g[i] = 1.0 - m.cycle.tstar_bar / b; break;
            case ConstraintKind::AreaMax: g[i] = m.cycle.area / b - 1.0; break;
            case ConstraintKind::PowerMax: g[i] = m.cycle.pstar_bar / b - 1.0; break;
            case ConstraintKind::AngleMax: g[i] = m.theta_max / b - 1.0; break;
        }
    }
    return g;
}

} // namespace

OptimizationProblem make_problem(const WingParametrization& param, const EvalSettings& eval,
                                 bool with_power_constraint, double theta_cr) {
    OptimizationProblem p;
    p.param = param;
    p.eval = eval;
    p.baseline = evaluate_design(param, Eigen::VectorXd::Zero(param.dof_count()), eval);
    if (p.baseline.failed)
        throw ValidationError("baseline evaluation failed: " + p.baseline.failure);
    p.constraints.push_back({ConstraintKind::LiftMin, p.baseline.cycle.lstar_bar});
    p.constraints.push_back({ConstraintKind::ThrustMin, p.baseline.cycle.tstar_bar});
    p.constraints.push_back({ConstraintKind::AreaMax, p.baseline.cycle.area});
    if (with_power_constraint)
        p.constraints.push_back({ConstraintKind::PowerMax, p.baseline.cycle.pstar_bar});
    p.constraints.push_back({ConstraintKind::AngleMax, theta_cr});
    return p;
}

OptimizationResult optimize(const OptimizationProblem& problem, const Eigen::VectorXd& x0) {
    const int n = problem.param.dof_count();
    const int m = int(problem.constraints.size());
    if (x0.size() != n) throw ValidationError("x0 does not match the design dimension");
    const double bound = problem.param.bound();
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -bound);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, bound);
    const double area_bl = problem.baseline.cycle.area;

    struct Shared {
        DesignMetrics last;         // metrics at the most recent gradient point
        int evaluations = 0;
        bool has_best = false;
        double best_violation = std::numeric_limits<double>::infinity();
        Eigen::VectorXd most_feasible;
        DesignMetrics most_feasible_metrics;
    } shared;

    auto eval_metrics = [&](const Eigen::VectorXd& x) {
        ++shared.evaluations;
        return evaluate_design(problem.param, x, problem.eval, area_bl);
    };
    auto pack = [&](const DesignMetrics& dm, double& f0, Eigen::VectorXd& f) {
        if (dm.failed) {
            // infeasible placeholder so the optimizer backs away
            f0 = 1.0e3;
            f = Eigen::VectorXd::Constant(m, 1.0e3);
            return;
        }
        f0 = -dm.cycle.eta;
        f = constraint_values(problem.constraints, dm);
    };
    auto track = [&](const Eigen::VectorXd& x, const DesignMetrics& dm) {
        if (dm.failed) return;
        const double viol = constraint_values(problem.constraints, dm).maxCoeff();
        if (viol < shared.best_violation) {
            shared.best_violation = viol;
            shared.most_feasible = x;
            shared.most_feasible_metrics = dm;
            shared.has_best = true;
        }
    };

    GcmmaValueFn value = [&](const Eigen::VectorXd& x, double& f0, Eigen::VectorXd& f) {
        const DesignMetrics dm = eval_metrics(x);
        track(x, dm);
        pack(dm, f0, f);
    };
    GcmmaGradientFn gradient = [&](const Eigen::VectorXd& x, double& f0, Eigen::VectorXd& f,
                                   Eigen::VectorXd& df0, Eigen::MatrixXd& df) {
        const DesignMetrics base = eval_metrics(x);
        track(x, base);
        shared.last = base;
        pack(base, f0, f);
        df0.resize(n);
        df.resize(m, n);
        const double h = problem.fd_step;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd xp = x;
            double sign = 1.0;  // backward Euler; forward when pinned at the lower bound
            if (x[i] - h >= lo[i]) {
                xp[i] = x[i] - h;
            } else {
                xp[i] = std::min(x[i] + h, hi[i]);
                sign = -1.0;
            }
            DesignMetrics pm = eval_metrics(xp);
            if (pm.failed && sign > 0 && x[i] + h <= hi[i]) {
                xp[i] = x[i] + h;  // forward fallback after a failed backward point
                sign = -1.0;
                pm = eval_metrics(xp);
            }
            double f0p;
            Eigen::VectorXd fp(m);
            pack(pm, f0p, fp);
            track(xp, pm);
            const double step = std::abs(xp[i] - x[i]);
            df0[i] = sign * (f0 - f0p) / step;
            df.col(i) = sign * (f - fp) / step;
        }
    };

    OptimizationResult out;
    auto log_row = [&](const GcmmaIterationInfo& info) {
        OptimizationLogRow row;
        row.outer = info.outer;
        row.inner = info.inner;
        const DesignMetrics& dm = shared.last;
        row.eta = dm.cycle.eta;
        row.lstar = dm.cycle.lstar_bar;
        row.tstar = dm.cycle.tstar_bar;
        row.pstar = dm.cycle.pstar_bar;
        row.area_ratio = dm.cycle.area_ratio;
        row.theta_max = dm.theta_max;
        row.max_violation = info.f.size() ? info.f.maxCoeff() : 0.0;
        out.log.push_back(row);
    };

    const GcmmaResult res = gcmma_minimize(value, gradient, x0, lo, hi, m, problem.gcmma,
                                           log_row);

    out.feasible = res.found_feasible;
    out.x = res.found_feasible ? res.x_best
                               : (shared.has_best ? shared.most_feasible : res.x);
    out.metrics = evaluate_design(problem.param, out.x, problem.eval, area_bl);
    out.net = apply_design(problem.param, out.x);
    out.evaluations = shared.evaluations;
    return out;
}

std::vector<SweepRow> aspect_ratio_sweep(const std::vector<double>& aspect_ratios,
                                         const EvalSettings& settings, bool cambered) {
    if (aspect_ratios.empty()) throw ValidationError("aspect-ratio sweep needs values");
    std::vector<SweepRow> rows;
    rows.reserve(aspect_ratios.size());
    for (double ar : aspect_ratios) {
        if (!(ar > 0)) throw ValidationError("aspect ratio must be positive");
        WingParametrization wing =
            baseline_wing(DofScheme::Baseline, 1, 0.5 * ar * kBaselineChord, cambered);
        DesignMetrics dm = evaluate_design(wing, Eigen::VectorXd(), settings);
        if (dm.failed) throw SolverError("sweep AR " + std::to_string(ar) + ": " + dm.failure);
        SweepRow row;
        row.aspect_ratio = ar;
        row.eta = dm.cycle.eta;
        row.cp = dm.cycle.cp;
        row.cycle = dm.cycle;
        rows.push_back(row);
    }
    return rows;
}

} // namespace flapopt
