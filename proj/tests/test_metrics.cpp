#include "flapopt/metrics.hpp"

#include <doctest.h>

#include <cmath>

using namespace flapopt;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("normalization formulas") {
    CHECK(normalize_loads(0, 1, 1, 1, 1)[0] == doctest::Approx(0.0));
    const Eigen::Vector3d s = normalize_loads(3.0, 2.0, 5.0, 1.0, 1.0);
    CHECK(s[0] == doctest::Approx(6.0));  // L* = 2L at rho = U = 1
    CHECK(s[1] == doctest::Approx(4.0));
    CHECK(s[2] == doctest::Approx(10.0));
    // doubling U divides L* by 4 and P* by 8
    const Eigen::Vector3d d = normalize_loads(3.0, 2.0, 5.0, 1.0, 2.0);
    CHECK(d[0] == doctest::Approx(s[0] / 4));
    CHECK(d[2] == doctest::Approx(s[2] / 8));
}

TEST_CASE("cycle average") {
    CHECK(cycle_average(Eigen::VectorXd::Constant(16, 3.25), 16) == doctest::Approx(3.25));
    Eigen::VectorXd sine(24);
    for (int k = 0; k < 24; ++k) sine[k] = std::sin(2 * M_PI * k / 24.0);
    CHECK(std::abs(cycle_average(sine, 24)) < 1e-12);
    CHECK_THROWS_AS(cycle_average(sine, 20), ValidationError);
}

TEST_CASE("efficiency reproduces the published summary rows") {
    CHECK(efficiency(0.185, 0.844) == doctest::Approx(0.219).epsilon(0.002));
    CHECK(efficiency(4.108, 8.98) == doctest::Approx(0.457).epsilon(0.002));
    CHECK(efficiency(0.506, 1.146) == doctest::Approx(0.441).epsilon(0.002));
    CHECK(efficiency(0.369, 0.844) == doctest::Approx(0.438).epsilon(0.002));
    CHECK(efficiency(0.526, 0.986) == doctest::Approx(0.533).epsilon(0.002));
    CHECK_THROWS_AS(efficiency(0.1, 0.0), ValidationError);
    CHECK_THROWS_AS(efficiency(0.1, -0.5), ValidationError);
}

TEST_CASE("power coefficient") {
    // C_P = P*/(b c) in normalized units
    const double pstar = 1.7, b = 6.0, c = 1.0;
    CHECK(power_coefficient(0.5 * pstar, 1.0, b, c, 1.0) == doctest::Approx(pstar / (b * c)));
    CHECK(power_coefficient(1.0, 1.0, 2 * b, c, 1.0) ==
          doctest::Approx(0.5 * power_coefficient(1.0, 1.0, b, c, 1.0)));
}

TEST_CASE("summary ties eta to the averaged columns exactly") {
    std::vector<StepResult> steps(8);
    FlappingMotion motion;
    for (int k = 0; k < 8; ++k) {
        steps[k].lift = 1.0 + 0.3 * std::sin(2 * M_PI * k / 8.0);
        steps[k].thrust = 0.2 + 0.05 * std::cos(2 * M_PI * k / 8.0);
        steps[k].power = 0.8 + 0.1 * std::sin(4 * M_PI * k / 8.0);
    }
    const CycleMetrics m = summarize_last_cycle(steps, 8, motion, 6.0, 6.0, 6.0);
    CHECK(m.eta == doctest::Approx(m.tstar_bar / m.pstar_bar).epsilon(1e-14));
    CHECK(m.area_ratio == doctest::Approx(1.0));
    CHECK(m.cp == doctest::Approx(m.pstar_bar / 6.0));
}

TEST_SUITE_END();
