#include "flapopt/metrics.hpp"

#include <cmath>

namespace flapopt {

Eigen::Vector3d normalize_loads(double lift, double thrust, double power, double rho,
                                double u_inf) {
    if (!(rho > 0.0 && u_inf > 0.0)) throw ValidationError("rho and u_inf must be positive");
    const double u2 = u_inf * u_inf;
    return {2.0 * lift / (rho * u2), 2.0 * thrust / (rho * u2),
            2.0 * power / (rho * u2 * u_inf)};
}

double cycle_average(const Eigen::VectorXd& series, int n_ts) {
    if (series.size() != n_ts)
        throw ValidationError("cycle series length " + std::to_string(series.size()) +
                              " does not equal n_ts " + std::to_string(n_ts));
    return series.mean();
}

double efficiency(double tstar_bar, double pstar_bar) {
    if (!(pstar_bar > 0.0))
        throw ValidationError("efficiency undefined for non-positive cycle-averaged power");
    return tstar_bar / pstar_bar;
}

double power_coefficient(double p_bar, double rho, double span, double chord, double u_inf) {
    if (!(rho > 0.0 && span > 0.0 && chord > 0.0 && u_inf > 0.0))
        throw ValidationError("power coefficient needs positive rho, span, chord, u_inf");
    return 2.0 * p_bar / (rho * span * chord * u_inf * u_inf * u_inf);
}

CycleMetrics summarize_last_cycle(const std::vector<StepResult>& steps, int n_ts,
                                  const FlappingMotion& motion, double area,
                                  double baseline_area, double span, double chord) {
    if (Eigen::Index(steps.size()) < n_ts)
        throw ValidationError("simulation shorter than one cycle");
    Eigen::VectorXd l(n_ts), th(n_ts), p(n_ts);
    const size_t ofs = steps.size() - n_ts;
    for (int k = 0; k < n_ts; ++k) {
        const Eigen::Vector3d s = normalize_loads(steps[ofs + k].lift, steps[ofs + k].thrust,
                                                  steps[ofs + k].power, motion.rho, motion.u_inf);
        l[k] = s[0];
        th[k] = s[1];
        // actuator effort: work recovered from the flow still has to be
        // absorbed, so instants of negative power count at magnitude
        p[k] = std::abs(s[2]);
    }
    CycleMetrics m;
    m.lstar_bar = cycle_average(l, n_ts);
    m.tstar_bar = cycle_average(th, n_ts);
    m.pstar_bar = cycle_average(p, n_ts);
    m.eta = efficiency(m.tstar_bar, m.pstar_bar);
    m.area = area;
    m.area_ratio = baseline_area > 0 ? area / baseline_area : 1.0;
    // P* is already 2P/(rho U^3): divide by the planform b*c
    m.cp = m.pstar_bar / (span * chord);
    return m;
}

} // namespace flapopt
