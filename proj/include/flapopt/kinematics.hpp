#pragma once

#include <Eigen/Dense>

#include "flapopt/wing.hpp"

namespace flapopt {

/// Rigid flapping/pitching motion parameters in nondimensional working units
/// (c = 1, U_inf = 1, rho = 1 unless configured otherwise).
struct FlappingMotion {
    double amplitude = M_PI / 4;  // flap amplitude A_phi (rad)
    double omega = 0.2;           // flapping angular frequency (rad/time)
    double pitch = 5.0 * M_PI / 180.0;  // fixed root pitch alpha_0 (rad)
    double u_inf = 1.0;
    double rho = 1.0;

    double period() const { return 2.0 * M_PI / omega; }
    void validate() const;
};

struct RigidMotionState {
    double t = 0.0;
    double phi = 0.0;
    double phi_dot = 0.0;
};

/// phi(t) = A_phi cos(omega t), phi_dot = -A_phi omega sin(omega t).
RigidMotionState flap_angle(const FlappingMotion& motion, double t);

/// kappa = (omega / U_inf) * (c / 2).
double reduced_frequency(const FlappingMotion& motion, double chord);

/// omega that realizes a requested reduced frequency.
double omega_for_reduced_frequency(double kappa, double u_inf, double chord);

/// Position the body-frame mesh at time t: each half flaps rigidly by +-phi
/// about the body x-axis through the root leading edge, then the whole wing
/// pitches by alpha_0 about the spanwise root axis.
PanelMesh transform_mesh(const PanelMesh& mesh, const FlappingMotion& motion, double t);

/// Velocity of given inertial-frame material points (with their body-side
/// signs) due to the flapping rotation, omega(t) x r.
Eigen::Matrix3Xd velocity_at_points(const Eigen::Matrix3Xd& points, const Eigen::VectorXd& side,
                                    const FlappingMotion& motion, double t);

/// Body velocity at the collocation points of an already-positioned mesh.
Eigen::Matrix3Xd grid_velocity(const PanelMesh& positioned, const FlappingMotion& motion,
                               double t);

} // namespace flapopt
