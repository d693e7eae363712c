#include "flapopt/kinematics.hpp"

#include <cmath>

namespace flapopt {

void FlappingMotion::validate() const {
    if (!(omega > 0.0)) throw ValidationError("omega must be positive");
    if (!(u_inf > 0.0)) throw ValidationError("u_inf must be positive");
    if (!(rho > 0.0)) throw ValidationError("rho must be positive");
    if (!(amplitude > 0.0 && amplitude < M_PI / 2))
        throw ValidationError("flap amplitude must lie in (0, pi/2)");
}

RigidMotionState flap_angle(const FlappingMotion& motion, double t) {
    RigidMotionState s;
    s.t = t;
    s.phi = motion.amplitude * std::cos(motion.omega * t);
    s.phi_dot = -motion.amplitude * motion.omega * std::sin(motion.omega * t);
    return s;
}

double reduced_frequency(const FlappingMotion& motion, double chord) {
    if (!(chord > 0.0)) throw ValidationError("chord must be positive");
    return motion.omega / motion.u_inf * 0.5 * chord;
}

double omega_for_reduced_frequency(double kappa, double u_inf, double chord) {
    if (!(kappa > 0.0 && u_inf > 0.0 && chord > 0.0))
        throw ValidationError("kappa, u_inf, chord must be positive");
    return 2.0 * kappa * u_inf / chord;
}

PanelMesh transform_mesh(const PanelMesh& mesh, const FlappingMotion& motion, double t) {
    const RigidMotionState s = flap_angle(motion, t);
    const double ca = std::cos(motion.pitch), sa = std::sin(motion.pitch);
    const double cp = std::cos(s.phi), sp = std::sin(s.phi);

    PanelMesh out = mesh;
    for (Eigen::Index k = 0; k < mesh.corners.cols(); ++k) {
        const Eigen::Vector3d p = mesh.corners.col(k);
        // flap about the body chordwise root axis, opposite sign per half,
        // so the hinge stays attached to the pitched root chord
        const double sgn = mesh.corner_side[k];
        const double x = p.x();
        const double y = cp * p.y() - sgn * sp * p.z();
        const double z = sgn * sp * p.y() + cp * p.z();
        // then the fixed root pitch about the spanwise axis
        out.corners.col(k) = Eigen::Vector3d(ca * x + sa * z, y, -sa * x + ca * z);
    }
    refresh_panel_geometry(out);
    return out;
}

Eigen::Matrix3Xd velocity_at_points(const Eigen::Matrix3Xd& points, const Eigen::VectorXd& side,
                                    const FlappingMotion& motion, double t) {
    const RigidMotionState s = flap_angle(motion, t);
    // the flap axis is the pitched root chord line through the origin
    const Eigen::Vector3d axis(std::cos(motion.pitch), 0.0, -std::sin(motion.pitch));
    Eigen::Matrix3Xd v(3, points.cols());
    for (Eigen::Index k = 0; k < points.cols(); ++k) {
        const Eigen::Vector3d w = s.phi_dot * side[k] * axis;
        v.col(k) = w.cross(Eigen::Vector3d(points.col(k)));
    }
    return v;
}

Eigen::Matrix3Xd grid_velocity(const PanelMesh& positioned, const FlappingMotion& motion,
                               double t) {
    return velocity_at_points(positioned.collocation, positioned.panel_side, motion, t);
}

} // namespace flapopt
