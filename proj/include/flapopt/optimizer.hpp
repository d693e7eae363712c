#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "flapopt/gcmma.hpp"
#include "flapopt/metrics.hpp"
#include "flapopt/wing.hpp"

namespace flapopt {

/// Everything a single design evaluation needs besides the design itself.
struct EvalSettings {
    FlappingMotion motion;
    int n_chord = 24;
    int n_span = 20;  // per half wing
    int n_ts = 120;
    int cycles = 3;
    double truncation_radius = kDefaultTruncationRadius;
    double core_radius = kDefaultCoreRadius;
    int workers = 1;
};

struct DesignMetrics {
    CycleMetrics cycle;
    double theta_max = 0.0;
    bool failed = false;
    std::string failure;
};

/// apply_design -> generate_mesh -> simulate -> cycle metrics. Mesh/solver
/// failures are reported in the result instead of thrown (the optimizer treats
/// them as infeasible); design-vector bound violations still throw.
DesignMetrics evaluate_design(const WingParametrization& param, const Eigen::VectorXd& x,
                              const EvalSettings& settings, double baseline_area = 0.0);

/// One-sided backward difference (f(x) - f(x - h e_i)) / h with the f(x)
/// evaluation shared across components; components pinned at the lower bound
/// difference forward instead. `forward_used`, when given, records per
/// component whether the forward fallback was taken.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h, double f_at_x,
                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            std::vector<bool>* forward_used = nullptr);

enum class ConstraintKind { LiftMin, ThrustMin, AreaMax, PowerMax, AngleMax };

struct ConstraintSpec {
    ConstraintKind kind;
    double bound;
};

struct OptimizationProblem {
    WingParametrization param;
    EvalSettings eval;
    std::vector<ConstraintSpec> constraints;
    double fd_step = 1e-3;
    GcmmaOptions gcmma;
    DesignMetrics baseline;  // metrics at x = 0 (constraint bounds come from here)
};

/// Baseline run at x=0 plus the paper's constraint set; bounds are the
/// baseline values (and theta_cr for the mesh-angle constraint).
OptimizationProblem make_problem(const WingParametrization& param, const EvalSettings& eval,
                                 bool with_power_constraint,
                                 double theta_cr = 15.0 * M_PI / 180.0);

struct OptimizationLogRow {
    int outer = 0, inner = 0;
    double eta = 0, lstar = 0, tstar = 0, pstar = 0, area_ratio = 0, theta_max = 0;
    double max_violation = 0;
};

struct OptimizationResult {
    Eigen::VectorXd x;
    DesignMetrics metrics;
    bool feasible = false;
    std::vector<OptimizationLogRow> log;
    ControlNet net;              // deformed net at the returned design
    int evaluations = 0;
};

/// GCMMA over -eta with finite-difference gradients. Returns the best feasible
/// iterate, or the most feasible point seen with `feasible == false`.
OptimizationResult optimize(const OptimizationProblem& problem, const Eigen::VectorXd& x0);

struct SweepRow {
    double aspect_ratio = 0.0;
    double eta = 0.0;
    double cp = 0.0;
    CycleMetrics cycle;
};

/// One baseline-shape simulation per aspect ratio (semispan = AR/2, chord 1).
std::vector<SweepRow> aspect_ratio_sweep(const std::vector<double>& aspect_ratios,
                                         const EvalSettings& settings, bool cambered = true);

} // namespace flapopt
