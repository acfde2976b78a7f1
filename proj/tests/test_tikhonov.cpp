#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "winfree/model.hpp"
#include "winfree/rng.hpp"
#include "winfree/tikhonov.hpp"

using namespace winfree;

namespace {

constexpr double kPi = std::numbers::pi;

ModelParameters make_params(std::vector<double> nu, double kappa, double m) {
    ModelParameters p;
    p.natural_frequencies = std::move(nu);
    p.coupling = kappa;
    p.inertia = m;
    return p;
}

EnsembleState make_state(std::vector<double> phases, std::vector<double> velocities) {
    EnsembleState s;
    s.phases = std::move(phases);
    s.velocities = std::move(velocities);
    return s;
}

IntegratorOptions tight(double dt) {
    IntegratorOptions o;
    o.rel_tolerance = 1e-10;
    o.abs_tolerance = 1e-12;
    o.sample_interval = dt;
    return o;
}

}  // namespace

TEST_CASE("bound formulas match their closed forms") {
    const ModelParameters p = make_params({0.0, 0.0}, 1.0, 1e-3);
    const std::vector<double> omega0{0.0, 0.0};

    // phase: (1/2) m (sup|O-V| + 2k) e^{4kt}
    CHECK(phase_gap_bound(0.0, 1e-3, p, omega0) == doctest::Approx(1e-3).epsilon(1e-14));
    CHECK(phase_gap_bound(1.0, 1e-3, p, omega0) ==
          doctest::Approx(1e-3 * std::exp(4.0)).epsilon(1e-14));
    CHECK(phase_gap_bound(1.0, 1e-3, p, omega0) == doctest::Approx(0.0546).epsilon(1e-3));

    // velocity: (1/2) S e^{-t/m} + 2mk(sup|V| + 2k) + 2mk S e^{4kt}
    const double vel1 = velocity_gap_bound(1.0, 1e-3, p, omega0);
    const double expect = 0.5 * 2.0 * std::exp(-1000.0) + 2e-3 * 2.0 + 2e-3 * 2.0 * std::exp(4.0);
    CHECK(vel1 == doctest::Approx(expect).epsilon(1e-14));
    CHECK(vel1 == doctest::Approx(0.222).epsilon(1e-2));

    // t = 0 keeps every term
    const double vel0 = velocity_gap_bound(0.0, 1e-3, p, omega0);
    CHECK(vel0 == doctest::Approx(0.5 * 2.0 + 2e-3 * 2.0 + 2e-3 * 2.0).epsilon(1e-14));

    // the bounds scale linearly in m at fixed (t, kappa, data)
    CHECK(phase_gap_bound(0.7, 2e-3, p, omega0) ==
          doctest::Approx(2.0 * phase_gap_bound(0.7, 1e-3, p, omega0)).epsilon(1e-12));
}

TEST_CASE("non-flat data enters through the sup norms") {
    const ModelParameters p = make_params({0.5, -0.5}, 1.0, 1e-2);
    const std::vector<double> omega0{1.5, 0.0};
    // sup|omega0 - nu| = max(1.0, 0.5) = 1.0
    CHECK(phase_gap_bound(0.0, 1e-2, p, omega0) ==
          doctest::Approx(0.5 * 1e-2 * 3.0).epsilon(1e-14));
}

TEST_CASE("frozen ensembles produce zero gap") {
    // theta in {0, pi}, no drive: both flows sit still, gaps are integration noise
    const ModelParameters p = make_params({0.0, 0.0}, 1.0, 0.1);
    const EnsembleState initial = make_state({0.0, kPi}, {0.0, 0.0});
    const GapReport report = compare_trajectories(initial, p, 2.0, tight(0.1));
    CHECK(report.sup_phase_gap() < 1e-10);
    CHECK(report.phase_satisfied);
    CHECK(report.velocity_satisfied);
    for (double g : report.velocity_gap) CHECK(g < 1e-9);
}

TEST_CASE("report structure is a consistent grid") {
    const ModelParameters p = make_params({0.2, -0.3, 0.1}, 1.0, 1e-2);
    const EnsembleState initial = make_state({1.0, -0.5, 2.2}, {0.3, -0.2, 0.4});
    const GapReport report = compare_trajectories(initial, p, 1.0, tight(0.05));

    REQUIRE(report.times.size() == 21);
    REQUIRE(report.phase_gap.size() == report.times.size());
    REQUIRE(report.phase_bound.size() == report.times.size());
    REQUIRE(report.velocity_gap.size() == report.times.size());
    REQUIRE(report.velocity_bound.size() == report.times.size());
    CHECK(report.inertia == 1e-2);
    CHECK(report.times.front() == 0.0);
    CHECK(report.times.back() == 1.0);

    // both trajectories start from the same phases
    CHECK(report.phase_gap.front() == 0.0);

    // recorded bounds agree with the formula evaluated on the same grid
    const std::vector<double> omega0 = initial.velocities;
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        CHECK(report.phase_bound[k] ==
              doctest::Approx(phase_gap_bound(report.times[k], 1e-2, p, omega0)).epsilon(1e-14));
        CHECK(report.velocity_bound[k] ==
              doctest::Approx(velocity_gap_bound(report.times[k], 1e-2, p, omega0))
                  .epsilon(1e-14));
    }
}

TEST_CASE("satisfied flags faithfully summarize the recorded samples") {
    SplitMix64 gen(41);
    for (int rep = 0; rep < 6; ++rep) {
        ModelParameters p = make_params({0.0, 0.0, 0.0, 0.0}, 1.0, rep % 2 == 0 ? 1e-2 : 1e-3);
        for (double& nu : p.natural_frequencies) nu = gen.uniform(-1.0, 1.0);
        EnsembleState initial;
        initial.phases.resize(4);
        initial.velocities.resize(4);
        for (double& th : initial.phases) th = gen.uniform(-kPi, kPi);
        for (double& w : initial.velocities) w = gen.uniform(-1.0, 1.0);

        const GapReport report = compare_trajectories(initial, p, 1.0, tight(0.01));
        bool phase_ok = true, velocity_ok = true;
        for (std::size_t k = 0; k < report.times.size(); ++k) {
            phase_ok = phase_ok && report.phase_gap[k] <= report.phase_bound[k] + 1e-9;
            if (report.times[k] >= p.inertia) {
                velocity_ok =
                    velocity_ok && report.velocity_gap[k] <= report.velocity_bound[k] + 1e-9;
            }
        }
        CHECK(report.phase_satisfied == phase_ok);
        CHECK(report.velocity_satisfied == velocity_ok);
    }
}

TEST_CASE("the measured gap scales linearly in the inertia") {
    const ModelParameters base = make_params({0.3, -0.2, 0.45, -0.05}, 1.0, 0.0);
    const EnsembleState initial =
        make_state({1.2, -0.7, 2.5, 0.1}, {0.5, -0.4, 0.3, -0.1});

    auto gap_at_half = [&](double m) {
        ModelParameters p = base;
        p.inertia = m;
        const GapReport report = compare_trajectories(initial, p, 0.5, tight(0.05));
        return report.phase_gap.back();
    };
    const double ratio = gap_at_half(1e-3) / gap_at_half(1e-4);
    CHECK(ratio >= 5.0);
    CHECK(ratio <= 20.0);
}

TEST_CASE("gap CSV round-trips the grid") {
    const ModelParameters p = make_params({0.1, -0.1}, 1.0, 1e-2);
    const EnsembleState initial = make_state({0.4, -0.9}, {0.2, 0.0});
    const GapReport report = compare_trajectories(initial, p, 0.5, tight(0.25));
    std::ostringstream os;
    write_gap_csv(report, os);
    std::istringstream in(os.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,phase_gap,phase_bound,velocity_gap,velocity_bound");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == report.times.size());
}

TEST_CASE("input validation") {
    const ModelParameters massless = make_params({0.1}, 1.0, 0.0);
    const EnsembleState initial = make_state({0.4}, {0.2});
    CHECK_THROWS_AS((void)compare_trajectories(initial, massless, 1.0, tight(0.1)),
                    const std::domain_error&);
    const ModelParameters p = make_params({0.1}, 1.0, 0.1);
    EnsembleState no_velocity;
    no_velocity.phases = {0.4};
    CHECK_THROWS_AS((void)compare_trajectories(no_velocity, p, 1.0, tight(0.1)),
                    const std::invalid_argument&);
}
