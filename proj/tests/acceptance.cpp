// Acceptance suite: one pass/fail line per criterion.
//
//   flapopt_acceptance                 run everything
//   flapopt_acceptance --criterion N   run criterion N only
//
// Exit code = number of failed criteria.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flapopt/bspline.hpp"
#include "flapopt/config.hpp"
#include "flapopt/gcmma.hpp"
#include "flapopt/metrics.hpp"
#include "flapopt/optimizer.hpp"
#include "oracles.hpp"

using namespace flapopt;

namespace {

struct Check {
    bool pass = true;
    std::string detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

bool within(double value, double target, double rel) {
    return std::abs(value - target) <= rel * std::abs(target);
}

EvalSettings settings_for(double kappa, int nc, int ns, int nts, int cycles = 3) {
    EvalSettings s;
    s.motion.omega = omega_for_reduced_frequency(kappa, 1.0, 1.0);
    s.n_chord = nc;
    s.n_span = ns;
    s.n_ts = nts;
    s.cycles = cycles;
    s.workers = 2;
    return s;
}

DesignMetrics baseline_run(double kappa, int nc, int ns, int nts) {
    const WingParametrization wing = baseline_wing(DofScheme::Baseline, 1);
    const DesignMetrics dm =
        evaluate_design(wing, Eigen::VectorXd(), settings_for(kappa, nc, ns, nts));
    if (dm.failed) throw SolverError("baseline run failed: " + dm.failure);
    return dm;
}

// Published converged-baseline rows; runs are cached across criteria.
std::map<double, DesignMetrics> g_baseline_cache;
const DesignMetrics& full_baseline(double kappa) {
    auto it = g_baseline_cache.find(kappa);
    if (it == g_baseline_cache.end())
        it = g_baseline_cache.emplace(kappa, baseline_run(kappa, 24, 20, 120)).first;
    return it->second;
}

Check criterion1() {
    Check c;
    const DesignMetrics dm = full_baseline(0.1);
    const CycleMetrics& m = dm.cycle;
    c.detail = "eta=" + num(m.eta) + " L*=" + num(m.lstar_bar) + " T*=" + num(m.tstar_bar) +
               " P*=" + num(m.pstar_bar) + " vs (0.219, 4.484, 0.185, 0.844)";
    c.expect(within(m.eta, 0.219, 0.10), "eta outside 10%");
    c.expect(within(m.lstar_bar, 4.484, 0.10), "L* outside 10%");
    c.expect(within(m.tstar_bar, 0.185, 0.10), "T* outside 10%");
    c.expect(within(m.pstar_bar, 0.844, 0.10), "P* outside 10%");
    return c;
}

Check criterion2() {
    Check c;
    const DesignMetrics dm = full_baseline(0.4);
    const CycleMetrics& m = dm.cycle;
    c.detail = "eta=" + num(m.eta) + " L*=" + num(m.lstar_bar) + " T*=" + num(m.tstar_bar) +
               " P*=" + num(m.pstar_bar) + " vs (0.457, 6.227, 4.108, 8.98)";
    c.expect(within(m.eta, 0.457, 0.10), "eta outside 10%");
    c.expect(within(m.lstar_bar, 6.227, 0.10), "L* outside 10%");
    c.expect(within(m.tstar_bar, 4.108, 0.10), "T* outside 10%");
    c.expect(within(m.pstar_bar, 8.98, 0.10), "P* outside 10%");
    return c;
}

Check criterion3() {
    Check c;
    // identity on a completed run (desk scale)
    const DesignMetrics dm = baseline_run(0.1, 6, 10, 40);
    c.expect(std::abs(dm.cycle.eta - dm.cycle.tstar_bar / dm.cycle.pstar_bar) <= 1e-12,
             "eta != T*/P* to 1e-12");
    // the published summary triples reproduce their eta columns within the
    // printed precision of all three columns (half an ulp each side)
    const double rows[5][3] = {{0.185, 0.844, 0.219},
                               {4.108, 8.98, 0.457},
                               {0.506, 1.146, 0.441},
                               {0.369, 0.844, 0.438},
                               {0.526, 0.986, 0.533}};
    for (const auto& r : rows) {
        const double ulp_t = 0.0005, ulp_p = r[1] > 2 ? 0.005 : 0.0005;
        const double lo = (r[0] - ulp_t) / (r[1] + ulp_p) - 0.0005;
        const double hi = (r[0] + ulp_t) / (r[1] - ulp_p) + 0.0005;
        c.expect(lo <= r[2] && r[2] <= hi,
                 "published triple (" + num(r[0]) + ", " + num(r[1]) + ") -> " +
                     num(efficiency(r[0], r[1])) + " does not explain " + num(r[2]));
    }
    if (c.pass) c.detail = "identity holds; all five published eta values reproduced";
    return c;
}

Check criterion4() {
    Check c;
    const double l6 = baseline_run(0.1, 6, 10, 120).cycle.lstar_bar;
    const double l12 = baseline_run(0.1, 12, 10, 120).cycle.lstar_bar;
    const double l24 = baseline_run(0.1, 24, 10, 120).cycle.lstar_bar;
    const double lspan = baseline_run(0.1, 6, 20, 120).cycle.lstar_bar;
    const double lt120 = l6;
    const double lt160 = baseline_run(0.1, 6, 10, 160).cycle.lstar_bar;

    const double d1 = std::abs(l12 - l6), d2 = std::abs(l24 - l12);
    const double dspan = std::abs(lspan - l6);
    const double dtime = std::abs(lt160 - lt120) / std::abs(lt120);
    c.detail = "chord deltas " + num(d1) + " -> " + num(d2) + " (final " +
               num(100 * d2 / l24) + "%), span delta " + num(dspan) + ", time delta " +
               num(100 * dtime) + "%";
    c.expect(d2 < d1, "chordwise deltas are not shrinking");
    c.expect(d2 / l24 < 0.02, "final chordwise delta above 2%");
    c.expect(dspan < d1, "spanwise delta not smaller than chordwise");
    c.expect(dtime < 0.01, "N_ts 120->160 delta above 1%");
    return c;
}

Check criterion5() {
    Check c;
    // non-flapping rectangular wing at 5 degrees incidence, long march
    // march ~100 chords so the starting vortex (which the truncation edge
    // effectively keeps alive) stops biting into the lift
    SimConfig cfg;
    cfg.motion.omega = 2.0 * M_PI / (65 * 0.4);
    cfg.motion.amplitude = 1e-10;
    cfg.motion.pitch = 5.0 * M_PI / 180.0;
    cfg.n_ts = 65;
    cfg.cycles = 4;
    cfg.truncation_radius = 110.0;
    cfg.workers = 2;
    cfg.frozen_wake = true;  // the classical oracle has a rigid wake
    const ControlNet net = baseline_net(7, 2, 6, 1, 3.5, false);  // aspect ratio 7
    const PanelMesh body = generate_mesh(net, 8, 14);
    const SimResult res = simulate(body, cfg);
    const double cl = 2.0 * res.steps.back().lift / 7.0;
    const double cl_ref = oracles::steady_vlm_cl(8, 28, 7.0, 1.0, 5.0 * M_PI / 180.0);
    c.detail = "CL=" + num(cl) + " oracle=" + num(cl_ref) + " diff=" +
               num(100 * std::abs(cl - cl_ref) / cl_ref) + "%";
    c.expect(within(cl, cl_ref, 0.01), "steady CL differs from the VLM oracle by over 1%");
    return c;
}

bool bspline_properties(std::string& why) {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int degree = 0; degree <= 5; ++degree) {
        KnotVector kv = KnotVector::clamped_uniform(degree + 3, degree);
        for (int trial = 0; trial < 40; ++trial) {
            const double xi = uni(rng);
            const Eigen::VectorXd b = basis_functions(kv, degree, xi);
            if (std::abs(b.sum() - 1.0) > 1e-12) { why = "partition of unity"; return false; }
            for (Eigen::Index i = 0; i < b.size(); ++i) {
                if (b[i] < 0) { why = "negative basis value"; return false; }
                if (b[i] != 0.0 &&
                    (xi < kv[i] - 1e-12 || xi > kv[i + degree + 1] + 1e-12)) {
                    why = "local support";
                    return false;
                }
            }
        }
    }
    // hull property of a random cubic curve
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    KnotVector kv = KnotVector::clamped_uniform(6, 3);
    Eigen::Matrix3Xd pts(3, 6);
    std::vector<Eigen::Vector3d> hull;
    for (int i = 0; i < 6; ++i) {
        pts.col(i) = Eigen::Vector3d(coord(rng), coord(rng), coord(rng));
        hull.push_back(pts.col(i));
    }
    for (int k = 0; k < 40; ++k)
        if (!oracles::in_convex_hull(hull, evaluate_curve(pts, kv, 3, uni(rng)))) {
            why = "convex hull";
            return false;
        }
    return true;
}

bool biot_savart_properties(std::string& why) {
    const double L = 0.8, h = 0.6;
    const Eigen::Vector3d v =
        segment_induced_velocity({0, -L, 0}, {0, L, 0}, 1.7, {h, 0, 0});
    const double expected = 1.7 * L / (2 * M_PI * h * std::sqrt(h * h + L * L));
    if (std::abs(v.norm() - expected) > 1e-12 * expected) { why = "analytic segment"; return false; }
    const double d = 0.05;
    const Eigen::Vector3d vl =
        segment_induced_velocity({0, -100 * d, 0}, {0, 100 * d, 0}, 1.0, {d, 0, 0});
    if (std::abs(vl.norm() - 1.0 / (2 * M_PI * d)) > 1e-3 / (2 * M_PI * d)) {
        why = "infinite-line asymptote";
        return false;
    }
    return true;
}

bool rigid_motion_property(std::string& why) {
    FlappingMotion m;
    m.omega = omega_for_reduced_frequency(0.1, 1.0, 1.0);
    const PanelMesh mesh = generate_mesh(baseline_net(7, 2, 6, 1), 4, 6);
    const double T = m.period(), h = 1e-6 * T;
    for (double t : {0.13 * T, 0.41 * T, 0.77 * T}) {
        const PanelMesh now = transform_mesh(mesh, m, t);
        const Eigen::Matrix3Xd v = grid_velocity(now, m, t);
        const Eigen::Matrix3Xd v_fd = (transform_mesh(mesh, m, t + h).collocation -
                                       transform_mesh(mesh, m, t - h).collocation) /
                                      (2 * h);
        const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
        if ((v - v_fd).cwiseAbs().maxCoeff() / scale > 1e-6) {
            why = "velocity vs finite-difference positions";
            return false;
        }
    }
    return true;
}

bool uvlm_symmetry_property(std::string& why) {
    SimConfig cfg;
    cfg.motion.omega = omega_for_reduced_frequency(0.1, 1.0, 1.0);
    cfg.n_ts = 16;
    cfg.cycles = 1;
    cfg.workers = 2;
    const PanelMesh body = generate_mesh(baseline_net(7, 2, 6, 1), 4, 6);
    const SimResult res = simulate(body, cfg);
    for (const StepResult& s : res.steps)
        if (std::abs(s.side_force) > 1e-9 * std::max(1.0, std::abs(s.lift))) {
            why = "side force " + num(s.side_force);
            return false;
        }
    // no-penetration residual of a fresh solve
    const PanelMesh mesh = transform_mesh(body, cfg.motion, 0.3 * cfg.motion.period());
    const BoundLattice lat = build_lattice(mesh);
    const Eigen::MatrixXd A = influence_matrix(lat.rings, mesh.collocation, mesh.normal);
    const Eigen::Matrix3Xd vb = grid_velocity(mesh, cfg.motion, 0.3 * cfg.motion.period());
    Eigen::VectorXd rhs(A.rows());
    for (Eigen::Index k = 0; k < A.rows(); ++k)
        rhs[k] = -(Eigen::Vector3d(1, 0, 0) - vb.col(k)).dot(mesh.normal.col(k));
    const Eigen::VectorXd gamma = solve_circulations(A, rhs);
    if ((A * gamma - rhs).cwiseAbs().maxCoeff() > 1e-9) {
        why = "no-penetration residual";
        return false;
    }
    return true;
}

bool gcmma_property(std::string& why) {
    auto value = [](const Eigen::VectorXd& x, double& f0, Eigen::VectorXd& f) {
        f0 = x.squaredNorm();
        f.resize(1);
        f[0] = (x[0] - 1) * (x[0] - 1) + (x[1] - 1) * (x[1] - 1) - 1.0;
    };
    auto grad = [&](const Eigen::VectorXd& x, double& f0, Eigen::VectorXd& f,
                    Eigen::VectorXd& df0, Eigen::MatrixXd& df) {
        value(x, f0, f);
        df0 = 2.0 * x;
        df.resize(1, 2);
        df(0, 0) = 2 * (x[0] - 1);
        df(0, 1) = 2 * (x[1] - 1);
    };
    GcmmaOptions opts;
    opts.max_outer = 60;
    opts.kkt_tol = 1e-8;
    const GcmmaResult res =
        gcmma_minimize(value, grad, Eigen::VectorXd::Constant(2, 0.5),
                       Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 2.0), 1, opts);
    const double xs = 1.0 - 1.0 / std::sqrt(2.0);
    if (!res.found_feasible || std::abs(res.x_best[0] - xs) > 1e-4 ||
        std::abs(res.x_best[1] - xs) > 1e-4) {
        why = "toy optimum missed";
        return false;
    }
    return true;
}

Check criterion6() {
    Check c;
    std::string why;
    c.expect(bspline_properties(why), "bspline: " + why);
    c.expect(biot_savart_properties(why), "biot-savart: " + why);
    c.expect(rigid_motion_property(why), "kinematics: " + why);
    c.expect(uvlm_symmetry_property(why), "uvlm: " + why);
    c.expect(gcmma_property(why), "gcmma: " + why);
    if (c.pass) c.detail = "all property suites passed";
    return c;
}

struct OptRun {
    OptimizationResult result;
    OptimizationProblem problem;
};

OptRun fast_optimize(double kappa, DofScheme scheme, int degree, bool with_power,
                     int max_outer) {
    const WingParametrization wing = baseline_wing(scheme, degree);
    OptimizationProblem problem =
        make_problem(wing, settings_for(kappa, 12, 10, 60), with_power);
    problem.gcmma.max_outer = max_outer;
    problem.gcmma.max_inner = 6;
    problem.gcmma.kkt_tol = 1e-4;
    problem.gcmma.step_tol = 1e-3;
    OptRun run{optimize(problem, Eigen::VectorXd::Zero(wing.dof_count())), problem};
    return run;
}

Check criterion7() {
    Check c;
    {  // fixed-12 cubic at kappa 0.1: feasible with a real efficiency gain
        const OptRun run = fast_optimize(0.1, DofScheme::Fixed12, 3, false, 18);
        const CycleMetrics& m = run.result.metrics.cycle;
        const CycleMetrics& bl = run.problem.baseline.cycle;
        c.detail = "fixed12: eta " + num(bl.eta) + " -> " + num(m.eta);
        c.expect(run.result.feasible, "fixed12 run returned infeasible");
        c.expect(m.eta >= 0.40, "fixed12 eta below 0.40");
        c.expect(m.lstar_bar >= bl.lstar_bar * (1 - 1e-6), "fixed12 lift below baseline");
        c.expect(m.tstar_bar >= bl.tstar_bar * (1 - 1e-6), "fixed12 thrust below baseline");
        c.expect(m.area <= bl.area * (1 + 1e-6), "fixed12 area above baseline");
    }
    {  // power-constrained variant
        const OptRun run = fast_optimize(0.1, DofScheme::Fixed12, 3, true, 18);
        const CycleMetrics& m = run.result.metrics.cycle;
        const CycleMetrics& bl = run.problem.baseline.cycle;
        c.detail += "; power: eta " + num(m.eta) + " P* " + num(m.pstar_bar) + " <= " +
                    num(bl.pstar_bar);
        c.expect(run.result.feasible, "power run returned infeasible");
        c.expect(m.pstar_bar <= bl.pstar_bar * (1 + 1e-6), "power constraint violated");
        c.expect(m.eta >= 0.40, "power-constrained eta below 0.40");
    }
    {  // kappa 0.4: thrust constraint active, area constraint inactive
        const OptRun run = fast_optimize(0.4, DofScheme::Fixed12, 3, false, 18);
        const CycleMetrics& m = run.result.metrics.cycle;
        const CycleMetrics& bl = run.problem.baseline.cycle;
        c.detail += "; k=0.4: T* " + num(m.tstar_bar) + " vs bl " + num(bl.tstar_bar) +
                    ", area ratio " + num(m.area / bl.area);
        c.expect(run.result.feasible, "kappa 0.4 run returned infeasible");
        c.expect(m.tstar_bar - bl.tstar_bar <= 1e-3 * bl.tstar_bar,
                 "thrust constraint not active");
        c.expect(m.area < bl.area * 0.999, "area constraint not inactive");
    }
    return c;
}

Check criterion8() {
    Check c;
    const std::vector<double> ars = {4, 6, 8, 12, 16, 20, 24, 28};
    const std::vector<SweepRow> rows = aspect_ratio_sweep(ars, settings_for(0.1, 12, 10, 60));
    double best_eta = -1e30;
    size_t best = 0;
    bool monotone = true;
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].eta > best_eta) {
            best_eta = rows[i].eta;
            best = i;
        }
        if (i > 0 && rows[i].cp <= rows[i - 1].cp) monotone = false;
    }
    c.detail = "eta max at AR " + num(rows[best].aspect_ratio) + "; CP " +
               (monotone ? "monotone" : "NOT monotone");
    c.expect(best > 0 && best + 1 < rows.size(), "eta maximum sits on the sweep boundary");
    c.expect(std::abs(rows[best].aspect_ratio - 20.0) <= 4.0, "eta maximum not near AR 20");
    c.expect(monotone, "CP not strictly increasing");
    return c;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

    const std::vector<std::pair<int, std::function<Check()>>> criteria = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
        {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
    };

    int failures = 0;
    for (const auto& [id, fn] : criteria) {
        if (only != 0 && id != only) continue;
        Check c;
        try {
            c = fn();
        } catch (const std::exception& e) {
            c.pass = false;
            c.detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %d: %s%s%s\n", id, c.pass ? "PASS" : "FAIL",
                    c.detail.empty() ? "" : " - ", c.detail.c_str());
        std::fflush(stdout);
        if (!c.pass) ++failures;
    }
    return failures;
}
