#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ballcalc/functional.hpp"
#include "ballcalc/maximal.hpp"
#include "oracles.hpp"

using namespace ballcalc;

namespace {

BallId dyadic_id(int level, std::size_t j) {
    return static_cast<BallId>(((std::size_t{1} << level) - 1) + j);
}

}  // namespace

TEST_CASE("averages and the sharp function") {
    auto [space, basis] = dyadic_basis(2);
    ScalarField f(space, {1, 2, 3, 4});
    BallId root = dyadic_id(0, 0);
    CHECK(avg(f, basis, root) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(sharp(f, basis, root) == doctest::Approx(1.0).epsilon(1e-15));

    ScalarField c(space, {7, 7, 7, 7});
    CHECK(sharp(c, basis, root) == 0.0);

    ScalarField half(space, {1, 1, 0, 0});
    CHECK(sharp(half, basis, root) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("starred averages climb the superballs") {
    auto [space, basis] = dyadic_basis(2);
    ScalarField half(space, {1, 1, 0, 0});
    BallId root = dyadic_id(0, 0);
    BallId q0 = dyadic_id(2, 0);

    CHECK(starred_sharp(half, basis, root) == sharp(half, basis, root));
    CHECK(starred_avg(half, basis, root) == abs_avg(half, basis, root));
    CHECK(starred_sharp(half, basis, q0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(starred_sharp(half, basis, q0) >= sharp(half, basis, q0));
}

TEST_CASE("osc_set") {
    auto space = std::make_shared<MeasureSpace>(MeasureSpace::uniform(3));
    ScalarField f(space, {0, 5, 5});
    OscResult r = osc_set(f, PointSet::all(3));
    CHECK(r.sup == 5.0);
    CHECK(r.inf == 0.0);
    CHECK(r.osc == 5.0);
    OscResult single = osc_set(f, PointSet{1});
    CHECK(single.osc == 0.0);
    ScalarField c(space, {2, 2, 2});
    CHECK(osc_set(c, PointSet::all(3)).osc == 0.0);
    CHECK_THROWS_AS(osc_set(f, PointSet{}), std::invalid_argument);
}

TEST_CASE("alpha oscillation examples") {
    auto [space, basis] = dyadic_basis(2);
    BallId root = dyadic_id(0, 0);

    ScalarField f(space, {0, 1, 2, 5});
    CHECK(osc_alpha(f, basis, root, 0.5) == doctest::Approx(2.0));
    CHECK(losc_alpha(f, basis, root, 0.5) == doctest::Approx(2.0));

    ScalarField g(space, {0, 10, 11, 12});
    CHECK(osc_alpha(g, basis, root, 0.5) == doctest::Approx(2.0));   // window {10,11,12}
    CHECK(losc_alpha(g, basis, root, 0.5) == doctest::Approx(11.0)); // window {0,10,11}

    // alpha below one atom: a single point is a window
    CHECK(osc_alpha(g, basis, root, 0.01) == 0.0);

    ScalarField c(space, {4, 4, 4, 4});
    CHECK(losc_alpha(c, basis, root, 0.5) == 0.0);

    CHECK_THROWS_AS(osc_alpha(f, basis, root, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(osc_alpha(f, basis, root, 0.0), std::invalid_argument);
}

TEST_CASE("oscillation functionals equal the exhaustive subset oracle exactly") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + rng() % 11;  // up to 12 points
        std::vector<double> w = oracles::dyadic_rational_weights(n, rng);
        std::vector<double> v(n);
        for (auto& x : v) x = nd(rng) * 4;
        double total = 0;
        for (double x : w) total += x;
        double alpha = 0.15 + 0.8 * static_cast<double>(rng() % 1000) / 1000.0;
        double alpha_mass = alpha * total;
        CHECK(osc_alpha_span(v, w, alpha_mass) == oracles::brute_osc_alpha(v, w, alpha_mass));
        CHECK(losc_alpha_span(v, w, alpha_mass) == oracles::brute_losc_alpha(v, w, alpha_mass));
    }
}

TEST_CASE("oscillation windows survive heavy value ties") {
    // few distinct values force tie handling through the strict-mass rule
    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng() % 11;
        std::vector<double> w = oracles::dyadic_rational_weights(n, rng);
        std::vector<double> v(n);
        for (auto& x : v) x = static_cast<double>(rng() % 3);
        double total = 0;
        for (double x : w) total += x;
        double alpha_mass = (0.2 + 0.75 * static_cast<double>(rng() % 100) / 100.0) * total;
        CHECK(osc_alpha_span(v, w, alpha_mass) == oracles::brute_osc_alpha(v, w, alpha_mass));
        CHECK(losc_alpha_span(v, w, alpha_mass) == oracles::brute_losc_alpha(v, w, alpha_mass));
    }
}

TEST_CASE("osc is dominated by losc") {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng() % 14;
        std::vector<double> w = oracles::dyadic_rational_weights(n, rng);
        std::vector<double> v(n);
        for (auto& x : v) x = nd(rng);
        double total = 0;
        for (double x : w) total += x;
        double alpha_mass = (0.2 + 0.7 * static_cast<double>(rng() % 100) / 100.0) * total;
        CHECK(osc_alpha_span(v, w, alpha_mass) <= losc_alpha_span(v, w, alpha_mass) + 1e-15);
    }
}

TEST_CASE("shift invariance, scaling, and monotonicity in alpha") {
    auto [space, basis] = dyadic_basis(3);
    std::mt19937_64 rng(47);
    std::normal_distribution<double> nd;
    std::vector<double> v(space->size());
    for (auto& x : v) x = nd(rng);
    ScalarField f(space, v);
    std::vector<double> shifted(v), scaled(v);
    for (auto& x : shifted) x += 3.25;
    for (auto& x : scaled) x *= 1.75;
    ScalarField fs(space, shifted), fc(space, scaled);

    for (BallId b : {dyadic_id(0, 0), dyadic_id(1, 1), dyadic_id(2, 2)}) {
        for (double alpha : {0.3, 0.6, 0.9}) {
            CHECK(osc_alpha(fs, basis, b, alpha) ==
                  doctest::Approx(osc_alpha(f, basis, b, alpha)).epsilon(1e-12));
            CHECK(losc_alpha(fs, basis, b, alpha) ==
                  doctest::Approx(losc_alpha(f, basis, b, alpha)).epsilon(1e-12));
            CHECK(osc_alpha(fc, basis, b, alpha) ==
                  doctest::Approx(1.75 * osc_alpha(f, basis, b, alpha)).epsilon(1e-12));
        }
        CHECK(osc_alpha(f, basis, b, 0.3) <= osc_alpha(f, basis, b, 0.7) + 1e-15);
        CHECK(losc_alpha(f, basis, b, 0.3) <= losc_alpha(f, basis, b, 0.7) + 1e-15);
    }
    CHECK(norm(fs, basis, NormKind::bmo).value ==
          doctest::Approx(norm(f, basis, NormKind::bmo).value).epsilon(1e-12));
}

TEST_CASE("norms with witnesses") {
    auto [space, basis] = dyadic_basis(2);
    ScalarField c(space, {5, 5, 5, 5});
    for (NormKind kind : {NormKind::bmo, NormKind::blo})
        CHECK(norm(c, basis, kind).value == 0.0);
    CHECK(norm(c, basis, NormKind::bmo_alpha, 0.75).value == 0.0);
    CHECK(norm(c, basis, NormKind::blo_alpha, 0.75).value == 0.0);

    ScalarField half(space, {1, 1, 0, 0});
    NormReport bmo = norm(half, basis, NormKind::bmo);
    CHECK(bmo.value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(bmo.witness == dyadic_id(0, 0));
    NormReport blo = norm(half, basis, NormKind::blo);
    CHECK(blo.value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(blo.witness == dyadic_id(0, 0));

    NormReport table = norm(half, basis, NormKind::bmo, 0, true);
    REQUIRE(table.per_ball.size() == basis.ball_count());
    double mx = 0;
    for (double v : table.per_ball) mx = std::max(mx, v);
    CHECK(mx == table.value);

    CHECK_THROWS_AS(norm(half, basis, NormKind::bmo_alpha), std::invalid_argument);
}

TEST_CASE("superball sup matches brute-force containment scans") {
    std::mt19937_64 rng(53);
    auto check = [&](const BallBasis& basis) {
        std::vector<double> vals(basis.ball_count());
        std::normal_distribution<double> nd;
        for (auto& v : vals) v = nd(rng);
        std::vector<double> fast = sup_over_superballs(basis, vals);
        for (std::size_t bi = 0; bi < basis.ball_count(); ++bi) {
            double brute = oracles::brute_superball_max(basis, vals, static_cast<BallId>(bi));
            CHECK(fast[bi] == brute);
        }
    };
    {
        auto [s, b] = dyadic_basis(4);
        check(b);
    }
    {
        auto [s, b] = grid_torus_basis(1, 16, GridShape::cube);
        check(b);
    }
    {
        auto [s, b] = grid_torus_basis(2, 8, GridShape::cube);
        check(b);
    }
    {
        auto [s, b] = grid_torus_basis(2, 8, GridShape::ball);
        check(b);
    }
    {
        auto [s, b] = random_martingale_basis(25, 13);
        check(b);
    }
    {
        auto [s, b] = grid_torus_basis(1, 11, GridShape::cube);
        check(b);
    }
    {
        auto [s, b] = grid_torus_basis(2, 7, GridShape::cube);
        check(b);
    }
}

TEST_CASE("starred sharp via table equals the single-ball scan") {
    auto [space, basis] = grid_torus_basis(1, 16, GridShape::cube);
    std::mt19937_64 rng(59);
    std::normal_distribution<double> nd;
    std::vector<double> v(space->size());
    for (auto& x : v) x = nd(rng);
    ScalarField f(space, v);
    std::vector<double> ss = sup_over_superballs(basis, sharp_all(basis, f));
    for (std::size_t bi = 0; bi < basis.ball_count(); bi += 7) {
        CHECK(ss[bi] ==
              doctest::Approx(starred_sharp(f, basis, static_cast<BallId>(bi))).epsilon(1e-12));
    }
}

TEST_CASE("elementary norm inequalities hold with nonnegative slack") {
    std::mt19937_64 rng(61);
    std::normal_distribution<double> nd;
    auto [space, basis] = dyadic_basis(4);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> v(space->size());
        for (auto& x : v) x = nd(rng) * 3;
        ScalarField f(space, v);
        for (double alpha : {0.6, 0.75, 0.9}) {
            auto rows = elementary_norm_inequalities(f, basis, alpha);
            REQUIRE(rows.size() == 5);
            for (const auto& r : rows) {
                CHECK(r.holds);
                CHECK(r.slack >= -1e-12);
            }
        }
    }
    // constants: every side vanishes
    ScalarField c(space, std::vector<double>(space->size(), 3.0));
    for (const auto& r : elementary_norm_inequalities(c, basis, 0.75)) {
        CHECK(r.lhs == 0.0);
        CHECK(r.holds);
    }
}
