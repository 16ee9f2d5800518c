#include "qrdyn/zorich.hpp"

#include "qrdyn/errors.hpp"
#include "qrdyn/linmap.hpp"
#include "qrdyn/numerics.hpp"
#include "qrdyn/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace qrdyn;
using namespace qrdyn::zorich;

namespace {

std::vector<Point3> sample_box(int count, double span, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<Point3> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        pts.emplace_back(span * rng.next_symmetric(), span * rng.next_symmetric(),
                         span * rng.next_symmetric());
    return pts;
}

}  // namespace

TEST_CASE("hemisphere map on reference points") {
    const Point3 pole = hemisphere_map(0.0, 0.0);
    CHECK(pole[0] == 0.0);
    CHECK(pole[1] == 0.0);
    CHECK(pole[2] == 1.0);

    const Point3 wall = hemisphere_map(kPi / 2, 0.0);
    CHECK(wall[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(wall[1]) < 1e-15);
    CHECK(std::abs(wall[2]) < 1e-15);

    const Point3 diag = hemisphere_map(kPi / 4, kPi / 4);
    CHECK(diag[0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(diag[1] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(diag[2] == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-13));
}

TEST_CASE("hemisphere map rejects points outside the square") {
    CHECK_THROWS_AS(hemisphere_map(kPi / 2 + 0.1, 0.0), domain_error);
    CHECK_THROWS_AS(hemisphere_map(0.0, -2.0), domain_error);
}

TEST_CASE("hemisphere map lands on the unit hemisphere") {
    SplitMix64 rng(11);
    for (int i = 0; i < 300; ++i) {
        const double u = (kPi / 2) * rng.next_symmetric();
        const double v = (kPi / 2) * rng.next_symmetric();
        const Point3 p = hemisphere_map(u, v);
        CHECK(std::abs(p.norm() - 1.0) < 1e-12);
        CHECK(p[2] >= -1e-12);
    }
}

TEST_CASE("hemisphere inverse on reference points") {
    const Eigen::Vector2d origin = hemisphere_inverse({0.0, 0.0, 1.0});
    CHECK(origin[0] == 0.0);
    CHECK(origin[1] == 0.0);

    const Eigen::Vector2d wall = hemisphere_inverse({1.0, 0.0, 0.0});
    CHECK(wall[0] == doctest::Approx(kPi / 2).epsilon(1e-14));
    CHECK(wall[1] == 0.0);

    const Eigen::Vector2d diag =
        hemisphere_inverse({0.5, 0.5, std::sqrt(2.0) / 2});
    CHECK(diag[0] == doctest::Approx(kPi / 4).epsilon(1e-13));
    CHECK(diag[1] == doctest::Approx(kPi / 4).epsilon(1e-13));
}

TEST_CASE("hemisphere inverse rejects bad inputs") {
    CHECK_THROWS_AS(hemisphere_inverse({0.0, 0.0, 2.0}), domain_error);
    CHECK_THROWS_AS(hemisphere_inverse({0.6, 0.0, -0.8}), domain_error);
}

TEST_CASE("hemisphere round trip") {
    SplitMix64 rng(13);
    for (int i = 0; i < 500; ++i) {
        const double u = (kPi / 2) * rng.next_symmetric();
        const double v = (kPi / 2) * rng.next_symmetric();
        const Eigen::Vector2d back = hemisphere_inverse(hemisphere_map(u, v));
        CHECK(std::abs(back[0] - u) < 1e-10);
        CHECK(std::abs(back[1] - v) < 1e-10);
    }
    // near the pole and near the diagonal
    for (double t : {1e-7, 1e-5, 1e-3}) {
        const Eigen::Vector2d back = hemisphere_inverse(hemisphere_map(t, t * (1 + 1e-9)));
        CHECK(std::abs(back[0] - t) < 1e-12);
    }
}

TEST_CASE("fold to central beam") {
    const FoldResult origin = fold_to_central({0.0, 0.0, 0.0});
    CHECK(origin.address == BeamAddress{0, 0});
    CHECK(!origin.odd_parity);
    CHECK(origin.local.norm() == 0.0);

    const FoldResult one_wall = fold_to_central({kPi, 0.0, 5.0});
    CHECK(one_wall.address == BeamAddress{1, 0});
    CHECK(one_wall.odd_parity);
    CHECK(std::abs(one_wall.local[0]) < 1e-15);
    CHECK(one_wall.local[2] == 5.0);

    const FoldResult far = fold_to_central({2.0 * kPi, 3.0 * kPi, -1.0});
    CHECK(far.address == BeamAddress{2, 3});
    CHECK(far.odd_parity);
    CHECK(std::abs(far.local[0]) < 1e-14);
    CHECK(std::abs(far.local[1]) < 1e-14);
    CHECK(far.local[2] == -1.0);
}

TEST_CASE("fold and unfold are inverse") {
    for (const Point3& x : sample_box(400, 10.0, 17)) {
        const FoldResult fold = fold_to_central(x);
        CHECK(std::abs(fold.local[0]) <= kPi / 2 + 1e-12);
        CHECK(std::abs(fold.local[1]) <= kPi / 2 + 1e-12);
        CHECK((unfold(fold.local, fold.address) - x).norm() < 1e-12 * (1.0 + x.norm()));
    }
}

TEST_CASE("zorich evaluation on reference points") {
    const Point3 base = zorich_eval({0.0, 0.0, 0.0});
    CHECK(base[0] == 0.0);
    CHECK(base[1] == 0.0);
    CHECK(base[2] == 1.0);

    for (double w : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
        const Point3 axis = zorich_eval({0.0, 0.0, w});
        CHECK(axis[0] == 0.0);
        CHECK(axis[1] == 0.0);
        CHECK(axis[2] == doctest::Approx(std::exp(w)).epsilon(1e-14));
    }

    const Point3 odd = zorich_eval({kPi, 0.0, 0.0});
    CHECK(std::abs(odd[0]) < 1e-15);
    CHECK(std::abs(odd[1]) < 1e-15);
    CHECK(odd[2] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("zorich modulus law |Z(u,v,w)| = e^w") {
    for (const Point3& x : sample_box(500, 8.0, 19)) {
        const Point3 y = zorich_eval(x);
        CHECK(std::abs(y.norm() - std::exp(x[2])) <= 1e-10 * std::exp(x[2]));
        CHECK(y.norm() > 0.0);
    }
}

TEST_CASE("zorich overflow guard") {
    CHECK_THROWS_AS(zorich_eval({0.0, 0.0, 701.0}), overflow_error);
    CHECK_THROWS_AS(zorich_eval({0.0, 0.0, -701.0}), overflow_error);
}

TEST_CASE("wall continuity between adjacent beams") {
    SplitMix64 rng(23);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double v = 6.0 * rng.next_symmetric();
        const double w = 2.0 * rng.next_symmetric();
        const long wall = static_cast<long>(rng.next_u64() % 5) - 2;
        // u-wall between beams (wall, j) and (wall+1, j)
        const double u = (wall + 0.5) * kPi;
        const Point3 x(u, v, w);
        const long j = fold_to_central(x).address.j;
        const Point3 from_left = eval_in_beam(x, {wall, j});
        const Point3 from_right = eval_in_beam(x, {wall + 1, j});
        worst = std::max(worst, (from_left - from_right).norm());
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("zorich invert on reference points") {
    const Point3 base = zorich_invert({0.0, 0.0, 1.0}, {0, 0});
    CHECK(base.norm() == 0.0);

    const Point3 wall = zorich_invert({1.0, 0.0, 0.0}, {0, 0});
    CHECK(wall[0] == doctest::Approx(kPi / 2).epsilon(1e-14));
    CHECK(wall[1] == 0.0);
    CHECK(wall[2] == 0.0);

    const Point3 lower = zorich_invert({0.0, 0.0, -std::exp(1.0)}, {1, 0});
    CHECK(lower[0] == doctest::Approx(kPi).epsilon(1e-14));
    CHECK(std::abs(lower[1]) < 1e-15);
    CHECK(lower[2] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("zorich invert rejects bad inputs") {
    CHECK_THROWS_AS(zorich_invert({0.0, 0.0, 0.0}, {0, 0}), domain_error);
    // upper half-space point over an odd beam
    CHECK_THROWS_AS(zorich_invert({0.0, 0.0, std::exp(1.0)}, {1, 0}), branch_error);
    // lower half-space point over an even beam
    CHECK_THROWS_AS(zorich_invert({0.0, 0.0, -1.0}, {1, 1}), branch_error);
}

TEST_CASE("round trip invert then eval") {
    SplitMix64 rng(29);
    for (int i = 0; i < 300; ++i) {
        Point3 y(2.0 * rng.next_symmetric(), 2.0 * rng.next_symmetric(),
                 2.0 * rng.next_symmetric());
        if (y.norm() < 1e-3) continue;
        const long di = static_cast<long>(rng.next_u64() % 5) - 2;
        long dj = static_cast<long>(rng.next_u64() % 5) - 2;
        if (y[2] > 0.0 && ((di + dj) % 2 + 2) % 2 == 1) ++dj;
        if (y[2] < 0.0 && (di + dj) % 2 == 0) ++dj;
        const BeamAddress branch{di, dj};
        const Point3 x = zorich_invert(y, branch);
        CHECK((zorich_eval(x) - y).norm() < 1e-9 * (1.0 + y.norm()));
        // the preimage lies over the requested beam
        const FoldResult fold = fold_to_central(x);
        const bool on_wall = std::abs(std::abs(fold.local[0]) - kPi / 2) < 1e-9 ||
                             std::abs(std::abs(fold.local[1]) - kPi / 2) < 1e-9;
        if (!on_wall) CHECK(fold.address == branch);
    }
}

TEST_CASE("round trip eval then invert recovers the folded representative") {
    for (const Point3& x : sample_box(200, 6.0, 31)) {
        const FoldResult fold = fold_to_central(x);
        const Point3 back = zorich_invert(zorich_eval(x), fold.address);
        CHECK((back - x).norm() < 1e-9 * (1.0 + x.norm()));
    }
}

TEST_CASE("deck transformation invariance") {
    const std::vector<Point3> samples = sample_box(200, 7.0, 37);
    CHECK(invariance_residual(IsometryElement::identity(), samples) == 0.0);
    CHECK(invariance_residual(IsometryElement::translation(2.0 * kPi, 0.0), samples) < 1e-12);
    CHECK(invariance_residual(IsometryElement::translation(0.0, 2.0 * kPi), samples) < 1e-12);
    // x -> (pi - u, pi - v, w)
    CHECK(invariance_residual(IsometryElement::point_rotation(kPi / 2, kPi / 2), samples) <
          1e-12);

    // the lattice translation by (pi, 0, 0) mirrors the image through
    // {w=0}; it is not an invariance of Z
    CHECK(invariance_residual(IsometryElement::translation(kPi, 0.0), samples) > 0.1);

    CHECK_THROWS_AS(invariance_residual(IsometryElement::identity(), {}), domain_error);
    CHECK_THROWS_AS(IsometryElement::translation(1.0, 0.0), domain_error);
}

TEST_CASE("dilatation of Z matches between beams") {
    const MapHandle z = make_zorich_map();
    SplitMix64 rng(41);
    double worst_rel = 0.0;
    for (int i = 0; i < 60; ++i) {
        // interior points, away from the walls
        const Point3 x(1.2 * rng.next_symmetric(), 1.2 * rng.next_symmetric(),
                       1.5 * rng.next_symmetric());
        const Mat j0 = fd_jacobian(z.eval, x);
        const double k0 = linmap::singular_dilatation(j0).max_dilatation;
        for (const Point3& shift :
             {Point3(kPi, 0.0, 0.0), Point3(kPi, kPi, 0.0), Point3(2 * kPi, kPi, 0.0)}) {
            const Point3 moved = x + shift;
            const Mat j1 = fd_jacobian(z.eval, moved);
            const double k1 = linmap::singular_dilatation(j1).max_dilatation;
            worst_rel = std::max(worst_rel, std::abs(k1 - k0) / k0);
        }
    }
    CHECK(worst_rel < 1e-6);
}

TEST_CASE("fiber transitivity under the deck group") {
    const Point3 y(0.4, -0.7, 1.3);  // generic upper half-space point
    std::vector<Point3> preimages;
    for (long i = -2; i <= 2; ++i)
        for (long j = -2; j <= 2; ++j) {
            if (((i + j) % 2 + 2) % 2 != 0) continue;
            preimages.push_back(zorich_invert(y, {i, j}));
        }
    REQUIRE(preimages.size() >= 6);
    for (const Point3& a : preimages) CHECK((zorich_eval(a) - y).norm() < 1e-9);

    for (std::size_t s = 0; s < preimages.size(); ++s) {
        for (std::size_t t = s + 1; t < preimages.size(); ++t) {
            const Point3& a = preimages[s];
            const Point3& b = preimages[t];
            // either a translation by even multiples of pi relates them,
            // or a point rotation about a wall intersection does
            bool related = false;
            {
                const double tu = b[0] - a[0], tv = b[1] - a[1];
                const double qu = tu / (2.0 * kPi), qv = tv / (2.0 * kPi);
                if (std::abs(qu - std::round(qu)) < 1e-9 &&
                    std::abs(qv - std::round(qv)) < 1e-9) {
                    const auto gamma = IsometryElement::translation(tu, tv);
                    related = (gamma.apply(a) - b).norm() < 1e-9;
                }
            }
            if (!related) {
                const double su = b[0] + a[0], sv = b[1] + a[1];
                const double qu = (su / kPi - 1.0) / 2.0, qv = (sv / kPi - 1.0) / 2.0;
                if (std::abs(qu - std::round(qu)) < 1e-9 &&
                    std::abs(qv - std::round(qv)) < 1e-9) {
                    const auto gamma = IsometryElement::point_rotation(su / 2.0, sv / 2.0);
                    related = (gamma.apply(a) - b).norm() < 1e-9;
                }
            }
            CHECK(related);
        }
    }
}

TEST_CASE("deviation forms agree with the plain evaluation") {
    SplitMix64 rng(43);
    const Point3 base(0.0, 0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double scale = std::pow(10.0, -1.0 - 6.0 * rng.next_unit());
        const Point3 u(scale * rng.next_symmetric(), scale * rng.next_symmetric(),
                       scale * rng.next_symmetric());
        // eval deviation vs plain
        const Point3 dev = deviation_eval(u);
        const Point3 plain = zorich_eval(u) - base;
        // the plain path carries ~eps absolute absorption error near the
        // base point; agreement can only be asserted above that floor
        CHECK((dev - plain).norm() <= 1e-12 * std::max(1e-300, plain.norm()) + 5e-16);
        // invert deviation vs plain
        const Point3 inv_dev = deviation_invert(u);
        const Point3 inv_plain = zorich_invert(base + u, {0, 0});
        CHECK((inv_dev - inv_plain).norm() <= 1e-9 * scale + 1e-15);
    }
}

TEST_CASE("deviation forms are accurate for exponentially small offsets") {
    // at 1e-14 the plain path has already lost half its digits; the
    // deviation forms must remain smooth and consistent with each other
    const Point3 u(3e-15, -2e-15, 4e-15);
    const Point3 round_trip = deviation_invert(deviation_eval(u));
    CHECK((round_trip - u).norm() < 1e-12 * u.norm());
}
