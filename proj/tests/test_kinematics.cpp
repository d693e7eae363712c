#include "flapopt/kinematics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace flapopt;

namespace {

FlappingMotion motion_k(double kappa, double amplitude_deg = 45.0, double pitch_deg = 5.0) {
    FlappingMotion m;
    m.omega = omega_for_reduced_frequency(kappa, 1.0, 1.0);
    m.amplitude = amplitude_deg * M_PI / 180.0;
    m.pitch = pitch_deg * M_PI / 180.0;
    return m;
}

} // namespace

TEST_SUITE_BEGIN("kinematics");

TEST_CASE("flap angle closed form") {
    const FlappingMotion m = motion_k(0.1);
    const double T = m.period();
    CHECK(flap_angle(m, 0.0).phi == doctest::Approx(M_PI / 4));
    CHECK(flap_angle(m, T / 4).phi == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(flap_angle(m, T / 4).phi_dot == doctest::Approx(-m.amplitude * m.omega));
    CHECK(flap_angle(m, T / 2).phi == doctest::Approx(-M_PI / 4));
}

TEST_CASE("reduced frequency") {
    FlappingMotion m;
    m.omega = 0.2;
    CHECK(reduced_frequency(m, 1.0) == doctest::Approx(0.1));
    m.omega = 0.8;
    CHECK(reduced_frequency(m, 1.0) == doctest::Approx(0.4));
    CHECK(reduced_frequency(m, 2.0) == doctest::Approx(0.8));  // doubling c doubles kappa
    CHECK(omega_for_reduced_frequency(0.4, 1.0, 1.0) == doctest::Approx(0.8));
}

TEST_CASE("identity transform at phi=0 with zero pitch") {
    FlappingMotion m = motion_k(0.1, 45.0, 0.0);
    const ControlNet net = baseline_net(7, 2, 6, 1);
    const PanelMesh mesh = generate_mesh(net, 4, 6);
    const PanelMesh moved = transform_mesh(mesh, m, m.period() / 4);  // phi = 0
    CHECK((moved.corners - mesh.corners).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transform is rigid per half (areas and in-half distances preserved)") {
    const FlappingMotion m = motion_k(0.1);
    const ControlNet net = baseline_net(7, 2, 6, 1);
    const PanelMesh mesh = generate_mesh(net, 5, 8);
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> uni(0.0, m.period());
    for (int trial = 0; trial < 5; ++trial) {
        const PanelMesh moved = transform_mesh(mesh, m, uni(rng));
        CHECK((moved.area - mesh.area).cwiseAbs().maxCoeff() < 1e-12);
        // pairwise distances within the same half
        for (int c1 : {0, 3, 8}) {
            for (int c2 : {1, 4, 8}) {
                if ((c1 <= 8) != (c2 <= 8)) continue;
                const double d0 = (mesh.corner(2, c1) - mesh.corner(4, c2)).norm();
                const double d1 = (moved.corner(2, c1) - moved.corner(4, c2)).norm();
                CHECK(d1 == doctest::Approx(d0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("tip height at the stroke top") {
    // flat wing, no pitch: z_tip = semispan * sin(45 deg)
    FlappingMotion m = motion_k(0.1, 45.0, 0.0);
    const ControlNet net = baseline_net(7, 2, 6, 1, 3.5, false);
    const PanelMesh mesh = generate_mesh(net, 2, 4);
    const PanelMesh moved = transform_mesh(mesh, m, 0.0);  // phi = 45 deg
    const double tip_z = moved.corner(0, moved.corner_cols - 1).z();
    CHECK(tip_z == doctest::Approx(3.5 * std::sin(M_PI / 4)).epsilon(1e-12));
}

TEST_CASE("grid velocity: axis points rest, peak tip speed, FD cross-check") {
    const FlappingMotion m = motion_k(0.1);
    const ControlNet net = baseline_net(7, 2, 6, 1);
    const PanelMesh mesh = generate_mesh(net, 4, 6);
    const double T = m.period();

    // a point on the flap axis: root leading edge (origin)
    Eigen::Matrix3Xd axis_pt(3, 1);
    axis_pt.col(0) = Eigen::Vector3d::Zero();
    Eigen::VectorXd side(1);
    side << 1.0;
    CHECK(velocity_at_points(axis_pt, side, m, 0.3 * T).col(0).norm() < 1e-15);

    // max flap rate at t = T/4: |v| = A_phi omega d for a point at distance d
    Eigen::Matrix3Xd pt(3, 1);
    pt.col(0) = Eigen::Vector3d(0.0, 2.0, 0.0);
    const double speed = velocity_at_points(pt, side, m, T / 4).col(0).norm();
    CHECK(speed == doctest::Approx(m.amplitude * m.omega * 2.0).epsilon(1e-12));

    // finite differences of transformed positions
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> uni(0.0, T);
    const double h = 1e-6 * T;
    for (int trial = 0; trial < 3; ++trial) {
        const double t = uni(rng);
        const PanelMesh now = transform_mesh(mesh, m, t);
        const PanelMesh fwd = transform_mesh(mesh, m, t + h);
        const PanelMesh bwd = transform_mesh(mesh, m, t - h);
        const Eigen::Matrix3Xd v = grid_velocity(now, m, t);
        const Eigen::Matrix3Xd v_fd = (fwd.collocation - bwd.collocation) / (2 * h);
        const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
        CHECK((v - v_fd).cwiseAbs().maxCoeff() / scale < 1e-6);
    }
}

TEST_CASE("grid velocity is orthogonal to the radius from the flap axis") {
    const FlappingMotion m = motion_k(0.4);
    const ControlNet net = baseline_net(7, 2, 6, 1);
    const PanelMesh mesh = generate_mesh(net, 3, 5);
    const PanelMesh now = transform_mesh(mesh, m, 0.13 * m.period());
    const Eigen::Matrix3Xd v = grid_velocity(now, m, 0.13 * m.period());
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        const Eigen::Vector3d r = now.collocation.col(k);  // axis through the origin
        CHECK(std::abs(v.col(k).dot(r)) < 1e-12);
    }
}

TEST_CASE("periodicity and half-period mirror") {
    FlappingMotion m = motion_k(0.2, 30.0, 0.0);
    const ControlNet net = baseline_net(7, 2, 6, 1, 3.0, false);  // flat wing
    const PanelMesh mesh = generate_mesh(net, 3, 4);
    const double T = m.period();
    const double t = 0.23 * T;

    const PanelMesh a = transform_mesh(mesh, m, t);
    const PanelMesh b = transform_mesh(mesh, m, t + T);
    CHECK((a.corners - b.corners).cwiseAbs().maxCoeff() < 1e-9);

    // cos is even: t and T - t coincide
    const PanelMesh c = transform_mesh(mesh, m, T - t);
    CHECK((a.corners - c.corners).cwiseAbs().maxCoeff() < 1e-9);

    // half a period later the flat configuration mirrors through z = 0
    const PanelMesh d = transform_mesh(mesh, m, t + T / 2);
    for (Eigen::Index k = 0; k < a.corners.cols(); ++k) {
        CHECK(d.corners(0, k) == doctest::Approx(a.corners(0, k)).epsilon(1e-12));
        CHECK(d.corners(1, k) == doctest::Approx(a.corners(1, k)).epsilon(1e-12));
        CHECK(d.corners(2, k) == doctest::Approx(-a.corners(2, k)).epsilon(1e-12));
    }
}

TEST_CASE("motion validation") {
    FlappingMotion m;
    m.omega = -1.0;
    CHECK_THROWS_AS(m.validate(), ValidationError);
    m.omega = 0.2;
    m.amplitude = M_PI;
    CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_SUITE_END();
