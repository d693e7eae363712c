#pragma once

#include <Eigen/Dense>

#include <functional>

namespace flapopt {

/// Globally convergent method of moving asymptotes (Svanberg 2002 formulation,
/// published default parameters) for
///    minimize f0(x)  s.t.  fi(x) <= 0,  xmin <= x <= xmax.
struct GcmmaOptions {
    int max_outer = 60;
    int max_inner = 20;
    double kkt_tol = 1e-6;
    double step_tol = 0.0;        // stop when |x_k - x_{k-1}|_inf falls below
    double move = 0.5;
    double albefa = 0.1;
    double asyinit = 0.5;
    double asyincr = 1.2;
    double asydecr = 0.7;
    double raa0eps = 1e-6;
    double raaeps = 1e-6;
    double epsimin = 1e-9;
    double c_penalty = 1000.0;    // elastic-variable weight for constraint relaxation
    double feasibility_tol = 1e-6;
};

struct GcmmaIterationInfo {
    int outer = 0;
    int inner = 0;
    Eigen::VectorXd x;
    double f0 = 0.0;
    Eigen::VectorXd f;
    double f0_approx = 0.0;        // subproblem approximation values at x
    Eigen::VectorXd f_approx;
    double kkt_residual = 0.0;
    Eigen::VectorXd asymptote_low, asymptote_upp;
};

struct GcmmaResult {
    Eigen::VectorXd x;             // last iterate
    double f0 = 0.0;
    Eigen::VectorXd f;
    Eigen::VectorXd x_best;        // best feasible iterate seen
    double f0_best = 0.0;
    bool found_feasible = false;
    int outer_iterations = 0;
    double kkt_residual = 0.0;
};

/// Objective/constraint values at x.
using GcmmaValueFn =
    std::function<void(const Eigen::VectorXd& x, double& f0, Eigen::VectorXd& f)>;
/// Values plus gradients at x (df is m x n).
using GcmmaGradientFn =
    std::function<void(const Eigen::VectorXd& x, double& f0, Eigen::VectorXd& f,
                       Eigen::VectorXd& df0, Eigen::MatrixXd& df)>;

GcmmaResult gcmma_minimize(const GcmmaValueFn& value, const GcmmaGradientFn& gradient,
                           const Eigen::VectorXd& x0, const Eigen::VectorXd& xmin,
                           const Eigen::VectorXd& xmax, int n_constraints,
                           const GcmmaOptions& options = {},
                           const std::function<void(const GcmmaIterationInfo&)>& log = {});

} // namespace flapopt
