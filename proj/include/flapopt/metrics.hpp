#pragma once

#include <Eigen/Dense>

#include <vector>

#include "flapopt/uvlm.hpp"

namespace flapopt {

/// Cycle-averaged normalized loads and the efficiency derived from them.
struct CycleMetrics {
    double lstar_bar = 0.0;
    double tstar_bar = 0.0;
    double pstar_bar = 0.0;
    double eta = 0.0;
    double area = 0.0;
    double area_ratio = 1.0;
    double cp = 0.0;
};

/// L* = 2L/(rho U^2), T* = 2T/(rho U^2), P* = 2P/(rho U^3).
Eigen::Vector3d normalize_loads(double lift, double thrust, double power, double rho,
                                double u_inf);

/// Arithmetic mean of exactly one cycle of uniform-step samples.
/// Throws ValidationError when the series length differs from n_ts.
double cycle_average(const Eigen::VectorXd& series, int n_ts);

/// eta = (Tbar * U_inf) / Pbar = Tstar_bar / Pstar_bar.
/// Throws ValidationError for non-positive cycle-averaged power.
double efficiency(double tstar_bar, double pstar_bar);

/// C_P = 2 P / (rho b c U^3); in normalized units C_P = Pstar_bar / (b c).
double power_coefficient(double p_bar, double rho, double span, double chord, double u_inf);

/// Metrics of the final cycle of a simulation.
CycleMetrics summarize_last_cycle(const std::vector<StepResult>& steps, int n_ts,
                                  const FlappingMotion& motion, double area,
                                  double baseline_area, double span, double chord = 1.0);

} // namespace flapopt
