#include "qrdyn/powermap.hpp"

#include "qrdyn/errors.hpp"
#include "qrdyn/linmap.hpp"
#include "qrdyn/rng.hpp"
#include "qrdyn/zorich.hpp"

#include <doctest.h>

#include <cmath>

using namespace qrdyn;
using namespace qrdyn::powermap;
using zorich::BeamAddress;

TEST_CASE("power map parameters") {
    CHECK_THROWS_AS(power_eval({1, 0, 0}, PowerMapParams{1}), domain_error);
    CHECK(PowerMapParams{3}.similarity_factor() == 9);
}

TEST_CASE("fixed point and axis evaluation") {
    const Point3 fixed = power_eval({0.0, 0.0, 1.0});
    CHECK(fixed[0] == 0.0);
    CHECK(fixed[1] == 0.0);
    CHECK(fixed[2] == 1.0);

    const Point3 axis = power_eval({0.0, 0.0, std::exp(1.0)});
    CHECK(axis[2] == doctest::Approx(std::exp(9.0)).epsilon(1e-12));
    CHECK(std::abs(axis[0]) < 1e-12);
    CHECK(std::abs(axis[1]) < 1e-12);
}

TEST_CASE("plane fixed point via the wall preimage") {
    // preimage (pi/2, 0, 0), image Z(4.5 pi, 0, 0) folds back to h(pi/2, 0)
    const Point3 y = power_eval({1.0, 0.0, 0.0}, PowerMapParams{3});
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(y[1]) < 1e-12);
    CHECK(std::abs(y[2]) < 1e-12);
}

TEST_CASE("modulus law |P(y)| = |y|^(m^2)") {
    SplitMix64 rng(51);
    for (int m : {2, 3}) {
        const PowerMapParams params{m};
        for (int i = 0; i < 200; ++i) {
            Point3 y(3.0 * rng.next_symmetric(), 3.0 * rng.next_symmetric(),
                     3.0 * rng.next_symmetric());
            if (y.norm() < 0.05) continue;
            const double expected = std::pow(y.norm(), params.similarity_factor());
            const double got = power_eval(y, params).norm();
            CHECK(std::abs(got - expected) <= 1e-9 * expected);
        }
    }
}

TEST_CASE("domain and overflow errors") {
    CHECK_THROWS_AS(power_eval({0.0, 0.0, 0.0}), domain_error);
    CHECK_THROWS_AS(power_eval({0.0, 0.0, std::exp(80.0)}, PowerMapParams{3}),
                    overflow_error);
}

TEST_CASE("schroder residual vanishes") {
    CHECK(schroder_residual({0.0, 0.0, 0.0}) == 0.0);

    SplitMix64 rng(53);
    double worst = 0.0;
    for (int i = 0; i < 400; ++i) {
        const Point3 x(rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric());
        worst = std::max(worst, schroder_residual(x, PowerMapParams{3}));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("schroder residual on beam walls") {
    SplitMix64 rng(59);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double v = 2.0 * rng.next_symmetric();
        const double w = rng.next_symmetric();
        const long wall = static_cast<long>(rng.next_u64() % 3) - 1;
        worst = std::max(worst,
                         schroder_residual({(wall + 0.5) * kPi, v, w}, PowerMapParams{3}));
        worst = std::max(worst,
                         schroder_residual({v, (wall + 0.5) * kPi, w}, PowerMapParams{3}));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("branch consistency for odd m") {
    const PowerMapParams m3{3};
    const Point3 upper(0.3, 0.4, 0.9);
    CHECK(branch_consistency(upper, m3, {BeamAddress{0, 0}}) == 0.0);
    CHECK(branch_consistency(upper, m3, {BeamAddress{0, 0}, BeamAddress{2, 0}}) < 1e-9);
    // the point-rotation-related preimage over (1,1)
    CHECK(branch_consistency(upper, m3,
                             {BeamAddress{0, 0}, BeamAddress{1, 1}, BeamAddress{-1, 1}}) <
          1e-9);
}

TEST_CASE("branch consistency flags even m on rotation-related branches") {
    const PowerMapParams m2{2};
    const Point3 upper(0.3, 0.4, 0.9);
    // translation-related branches still agree
    CHECK(branch_consistency(upper, m2, {BeamAddress{0, 0}, BeamAddress{2, 0}}) < 1e-9);
    // point-rotation-related branches give values differing by a half-turn
    const double defect =
        branch_consistency(upper, m2, {BeamAddress{0, 0}, BeamAddress{1, 1}});
    CHECK(defect > 0.01);
}

TEST_CASE("branch consistency rejects inconsistent parity") {
    CHECK_THROWS_AS(
        branch_consistency({0.0, 0.0, 2.0}, PowerMapParams{3}, {BeamAddress{1, 0}}),
        branch_error);
}

TEST_CASE("orbit moduli follow the double exponential") {
    const auto result = orbit({0.0, 0.0, std::exp(1.0)}, PowerMapParams{3}, 2);
    REQUIRE(result.points.size() == 3);
    CHECK(!result.truncated_at.has_value());
    CHECK(result.points[0].norm() == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(result.points[1].norm() == doctest::Approx(std::exp(9.0)).epsilon(1e-10));
    CHECK(result.points[2].norm() == doctest::Approx(std::exp(81.0)).epsilon(1e-10));
}

TEST_CASE("orbit of the fixed point is constant") {
    const auto result = orbit({0.0, 0.0, 1.0}, PowerMapParams{3}, 5);
    REQUIRE(result.points.size() == 6);
    for (const Point3& p : result.points) {
        CHECK(p[2] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(p[0]) < 1e-12);
    }
}

TEST_CASE("orbit truncates before overflowing") {
    const auto result = orbit({0.0, 0.0, std::exp(1.0)}, PowerMapParams{3}, 6);
    REQUIRE(result.truncated_at.has_value());
    CHECK(*result.truncated_at == 3);  // next modulus would be e^729
    CHECK(result.points.size() == 3);
    CHECK_THROWS_AS(orbit({0.0, 0.0, 0.0}, PowerMapParams{3}, 2), domain_error);
}

TEST_CASE("points near the fixed point escape a 0.1 ball") {
    const Point3 fixed(0.0, 0.0, 1.0);
    SplitMix64 rng(61);
    for (int i = 0; i < 50; ++i) {
        Point3 dir(rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric());
        if (dir.norm() < 1e-3) continue;
        dir /= dir.norm();
        Point3 y = fixed + 1e-3 * dir;
        bool escaped = false;
        for (int t = 0; t < 6 && !escaped; ++t) {
            y = power_eval(y, PowerMapParams{3});
            escaped = (y - fixed).norm() > 0.1;
        }
        CHECK(escaped);
    }
}

TEST_CASE("iterates keep bounded dilatation (uqr probe)") {
    const PowerMapParams params{3};
    SplitMix64 rng(67);
    std::vector<Point3> samples;
    while (samples.size() < 100) {
        Point3 y(2.5 * rng.next_symmetric(), 2.5 * rng.next_symmetric(),
                 2.5 * rng.next_symmetric());
        if (y.norm() < 0.3 || std::abs(y[2]) < 0.1 * y.norm()) continue;
        samples.push_back(y);
    }

    auto iterate_k = [&](int t) {
        return [&, t](const PointN& p) -> PointN {
            Point3 y(p);
            for (int s = 0; s < t; ++s) y = power_eval(y, params);
            return y;
        };
    };

    std::vector<double> max_k(5, 1.0);
    for (int t = 1; t <= 4; ++t) {
        auto f = iterate_k(t);
        for (const Point3& y : samples) {
            try {
                const Mat jac = fd_jacobian(f, y, 1e-7);
                max_k[static_cast<std::size_t>(t)] =
                    std::max(max_k[static_cast<std::size_t>(t)],
                             linmap::singular_dilatation(jac).max_dilatation);
            } catch (const error&) {
                continue;  // FD stencil stepping over a wall or overflowing
            }
        }
    }
    for (int t = 2; t <= 4; ++t)
        CHECK(max_k[static_cast<std::size_t>(t)] <= 1.5 * max_k[1]);
}

TEST_CASE("power map deviation form matches the plain map") {
    const auto handle = make_power_map(PowerMapParams{3});
    const Point3 base(0.0, 0.0, 1.0);
    SplitMix64 rng(71);
    for (int i = 0; i < 200; ++i) {
        const double scale = std::pow(10.0, -6.0 * rng.next_unit());
        const Point3 d(scale * rng.next_symmetric(), scale * rng.next_symmetric(),
                       scale * rng.next_symmetric());
        const PointN dev = handle.eval_deviation(d);
        const PointN plain = handle.eval(base + d) - base;
        CHECK((dev - plain).norm() <= 1e-11 * std::max(1.0, plain.norm()) + 5e-15);
    }
}
