#include "flapopt/bspline.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"

using namespace flapopt;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

} // namespace

TEST_SUITE_BEGIN("bspline");

TEST_CASE("degree-0 single span is piecewise constant") {
    KnotVector kv{(Eigen::VectorXd(2) << 0.0, 1.0).finished()};
    const Eigen::VectorXd n = basis_functions(kv, 0, 0.3);
    REQUIRE(n.size() == 1);
    CHECK(n[0] == doctest::Approx(1.0));
}

TEST_CASE("quadratic Bernstein values at the midpoint") {
    KnotVector kv{(Eigen::VectorXd(6) << 0, 0, 0, 1, 1, 1).finished()};
    const Eigen::VectorXd n = basis_functions(kv, 2, 0.5);
    REQUIRE(n.size() == 3);
    CHECK(n[0] == doctest::Approx(0.25));
    CHECK(n[1] == doctest::Approx(0.5));
    CHECK(n[2] == doctest::Approx(0.25));
}

TEST_CASE("matches the independent recursion at random parameters") {
    KnotVector kv = KnotVector::clamped_uniform(9, 3);
    const std::vector<double> t = to_std(kv.values());
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double xi = uni(rng);
        const Eigen::VectorXd n = basis_functions(kv, 3, xi);
        for (int i = 0; i < 9; ++i)
            CHECK(n[i] == doctest::Approx(oracles::basis_recursive(t, i, 3, xi, 1.0))
                              .epsilon(1e-12));
    }
}

TEST_CASE("partition of unity, non-negativity, local support") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int degree = 0; degree <= 5; ++degree) {
        const int n = degree + 3;
        KnotVector kv = KnotVector::clamped_uniform(n, degree);
        for (int trial = 0; trial < 50; ++trial) {
            const double xi = uni(rng);
            const Eigen::VectorXd b = basis_functions(kv, degree, xi);
            CHECK(std::abs(b.sum() - 1.0) < 1e-12);
            int nonzero = 0;
            for (int i = 0; i < n; ++i) {
                CHECK(b[i] >= 0.0);
                if (b[i] != 0.0) {
                    ++nonzero;
                    // local support: N_i vanishes outside [xi_i, xi_{i+p+1}]
                    CHECK(xi >= kv[i] - 1e-12);
                    CHECK(xi <= kv[i + degree + 1] + 1e-12);
                }
            }
            CHECK(nonzero <= degree + 1);
        }
    }
}

TEST_CASE("interior knot of full multiplicity interpolates its control point") {
    // degree 3 with a triple interior knot at 0.5
    Eigen::VectorXd knots(12);
    knots << 0, 0, 0, 0, 0.5, 0.5, 0.5, 0.5, 1, 1, 1, 1;
    KnotVector kv{knots};
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::Matrix3Xd pts(3, 8);
    for (int i = 0; i < 8; ++i) pts.col(i) = Eigen::Vector3d(uni(rng), uni(rng), uni(rng));
    // multiplicity p=3... the basis is interpolatory there at control point 4
    // (knot multiplicity p on a degree-p curve pins the curve to a control point)
    const Eigen::Vector3d at_knot = evaluate_curve(pts, kv, 3, 0.5);
    CHECK((at_knot - pts.col(4)).norm() < 1e-12);
}

TEST_CASE("open curve interpolates its end control points") {
    KnotVector kv = KnotVector::clamped_uniform(5, 2);
    Eigen::Matrix3Xd pts(3, 5);
    pts << 0, 1, 2, 3, 4, 0, 1, 0, -1, 0, 2, 2, 2, 2, 2;
    CHECK((evaluate_curve(pts, kv, 2, 0.0) - pts.col(0)).norm() < 1e-14);
    CHECK((evaluate_curve(pts, kv, 2, 1.0) - pts.col(4)).norm() < 1e-14);
}

TEST_CASE("degree-1 curve midpoint is the control-point average") {
    KnotVector kv = KnotVector::clamped_uniform(2, 1);
    Eigen::Matrix3Xd pts(3, 2);
    pts.col(0) = Eigen::Vector3d(1, 2, 3);
    pts.col(1) = Eigen::Vector3d(5, -2, 7);
    const Eigen::Vector3d mid = evaluate_curve(pts, kv, 1, 0.5);
    CHECK((mid - Eigen::Vector3d(3, 0, 5)).norm() < 1e-14);
}

TEST_CASE("random cubic curve stays inside the control-point hull") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    KnotVector kv = KnotVector::clamped_uniform(6, 3);
    Eigen::Matrix3Xd pts(3, 6);
    std::vector<Eigen::Vector3d> hull;
    for (int i = 0; i < 6; ++i) {
        pts.col(i) = Eigen::Vector3d(uni(rng), uni(rng), uni(rng));
        hull.push_back(pts.col(i));
    }
    std::uniform_real_distribution<double> par(0.0, 1.0);
    for (int k = 0; k < 50; ++k)
        CHECK(oracles::in_convex_hull(hull, evaluate_curve(pts, kv, 3, par(rng))));
}

TEST_CASE("surface corners and bilinear center") {
    ControlNet net;
    net.degree_u = net.degree_v = 1;
    net.knots_u = KnotVector::clamped_uniform(2, 1);
    net.knots_v = KnotVector::clamped_uniform(2, 1);
    net.x.resize(2, 2);
    net.y.resize(2, 2);
    net.z.resize(2, 2);
    net.x << 0, 0, 1, 1;
    net.y << 0, 2, 0, 2;
    net.z << 0, 1, 4, -3;
    CHECK((evaluate_surface(net, 0, 0) - Eigen::Vector3d(0, 0, 0)).norm() < 1e-14);
    const Eigen::Vector3d center = evaluate_surface(net, 0.5, 0.5);
    CHECK((center - Eigen::Vector3d(0.5, 1.0, 0.5)).norm() < 1e-14);
}

TEST_CASE("surface matches the independent double-sum oracle on a published net") {
    const ControlNet net = read_control_net_file(std::string(FLAPOPT_TEST_DATA) +
                                                 "/sks_cubic_k01.net");
    const std::vector<double> ku = to_std(net.knots_u.values());
    const std::vector<double> kv = to_std(net.knots_v.values());
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const double xi = uni(rng), eta = uni(rng);
        const Eigen::Vector3d s = evaluate_surface(net, xi, eta);
        const Eigen::Vector3d ref = oracles::surface_double_sum(
            net.x, net.y, net.z, ku, net.degree_u, kv, net.degree_v, xi, eta);
        CHECK((s - ref).norm() < 1e-12);
    }
}

TEST_CASE("surface evaluation equals curve-of-curves evaluation") {
    const ControlNet net = read_control_net_file(std::string(FLAPOPT_TEST_DATA) +
                                                 "/sks_cubic_k01.net");
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 25; ++k) {
        const double xi = uni(rng), eta = uni(rng);
        // evaluate in u first, then the resulting row in v
        const Eigen::VectorXd nu = basis_functions(net.knots_u, net.degree_u, xi);
        Eigen::Matrix3Xd row(3, net.span_count());
        for (Eigen::Index j = 0; j < net.span_count(); ++j)
            row.col(j) = Eigen::Vector3d(nu.dot(net.x.col(j)), nu.dot(net.y.col(j)),
                                         nu.dot(net.z.col(j)));
        const Eigen::Vector3d via_curves = evaluate_curve(row, net.knots_v, net.degree_v, eta);
        CHECK((via_curves - evaluate_surface(net, xi, eta)).norm() < 1e-12);
    }
}

TEST_CASE("domain and validation errors") {
    KnotVector kv = KnotVector::clamped_uniform(4, 2);
    CHECK_THROWS_AS(basis_functions(kv, 2, -0.1), std::domain_error);
    CHECK_THROWS_AS(basis_functions(kv, 2, 1.1), std::domain_error);
    CHECK_NOTHROW(basis_functions(kv, 2, 1.0 + 1e-13));  // boundary slack
    Eigen::VectorXd bad(4);
    bad << 0, 1, 0.5, 2;
    CHECK_THROWS_AS(KnotVector{bad}, ValidationError);
}

TEST_CASE("control-net table round trip and golden import") {
    const std::string path = std::string(FLAPOPT_TEST_DATA) + "/sks_linear_k01.net";
    const ControlNet net = read_control_net_file(path);
    CHECK(net.chord_count() == 7);
    CHECK(net.span_count() == 2);
    CHECK(net.degree_u == 6);
    CHECK(net.degree_v == 1);
    // published tip station of the linear optimal shape
    CHECK(net.y(0, 1) == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(net.x(0, 0) == doctest::Approx(-0.015268));
    CHECK(net.z(2, 0) == doctest::Approx(0.126467));

    std::stringstream ss;
    write_control_net(ss, net);
    const ControlNet back = read_control_net(ss);
    CHECK((back.x - net.x).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((back.y - net.y).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((back.z - net.z).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(back.degree_u == net.degree_u);
}

TEST_SUITE_END();
