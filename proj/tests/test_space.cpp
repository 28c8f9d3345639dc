#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "ballcalc/csv.hpp"
#include "ballcalc/space.hpp"
#include "oracles.hpp"

using namespace ballcalc;

namespace {

std::shared_ptr<const MeasureSpace> uniform4() {
    return std::make_shared<MeasureSpace>(MeasureSpace::uniform(4));
}

}  // namespace

TEST_CASE("measure: sums of weights") {
    auto s = uniform4();
    CHECK(measure(*s, PointSet{0, 1}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(measure(*s, PointSet{}) == 0.0);
    MeasureSpace w({0.1, 0.2, 0.7});
    CHECK(measure(w, PointSet{1, 2}) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK_THROWS_AS(measure(w, PointSet{3}), std::out_of_range);
}

TEST_CASE("measure space rejects bad input") {
    CHECK_THROWS_AS(MeasureSpace({}), std::invalid_argument);
    CHECK_THROWS_AS(MeasureSpace({1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(MeasureSpace({1.0, -2.0}), std::invalid_argument);
}

TEST_CASE("integrate") {
    auto s = uniform4();
    ScalarField one(s, {1, 1, 1, 1});
    CHECK(integrate(one, PointSet::all(4)) == doctest::Approx(1.0).epsilon(1e-15));
    ScalarField f(s, {1, 2, 3, 4});
    CHECK(integrate(f, PointSet::all(4)) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(integrate(f, PointSet{}) == 0.0);
}

TEST_CASE("scalar fields reject NaN and infinity") {
    auto s = uniform4();
    CHECK_THROWS_AS(ScalarField(s, {1, 2, 3, std::nan("")}), std::invalid_argument);
    CHECK_THROWS_AS(ScalarField(s, {1, 2, 3, INFINITY}), std::invalid_argument);
    CHECK_THROWS_AS(ScalarField(s, {1, 2}), std::invalid_argument);
}

TEST_CASE("distribution function") {
    auto s = uniform4();
    ScalarField f(s, {0, 1, 2, 3});
    CHECK(distribution(f, 1.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(distribution(f, 3.0) == 0.0);
    CHECK(distribution(f, 100.0) == 0.0);
    ScalarField g(s, {1, 2, 3, 4});
    CHECK(distribution(g, 0.0) == doctest::Approx(1.0).epsilon(1e-15));

    // non-increasing and right-continuous, at and between jump values
    DistributionSteps steps = distribution_steps(f);
    double prev = steps.total_mass;
    for (std::size_t i = 0; i < steps.values.size(); ++i) {
        double v = steps.values[i];
        double at = distribution(f, v);
        CHECK(at <= prev);
        CHECK(distribution(f, v + 1e-9) == doctest::Approx(at).epsilon(1e-15));
        CHECK(steps.lambda(v) == at);
        prev = at;
    }
    CHECK(steps.lambda(0.5) == distribution(f, 0.5));
}

TEST_CASE("lp norms: examples and the dual-route identity") {
    auto s = uniform4();
    ScalarField f(s, {3, 0, 0, 0});
    CHECK(lp_norm(f, 1) == doctest::Approx(0.75).epsilon(1e-12));
    ScalarField c(s, {2.5, 2.5, 2.5, 2.5});
    CHECK(lp_norm(c, 3) == doctest::Approx(2.5).epsilon(1e-12));  // c mu^{1/p}, mu = 1

    // constant on a non-unit-measure set: c * mu(e)^{1/p}
    auto w2 = std::make_shared<MeasureSpace>(std::vector<double>{0.4, 1.1, 2.0});
    ScalarField c2(w2, {3.0, 3.0, 3.0});
    CHECK(lp_norm(c2, 2.0, PointSet{0, 1}) ==
          doctest::Approx(3.0 * std::sqrt(1.5)).epsilon(1e-12));

    auto half = std::make_shared<MeasureSpace>(std::vector<double>{0.5, 0.5});
    ScalarField g(half, {1, 2});
    CHECK(lp_norm(g, 2) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));

    CHECK_THROWS_AS(lp_norm(f, 0.5), std::invalid_argument);

    // the self-check runs inside on random fields
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 2 + rng() % 30;
        std::vector<double> w(n), v(n);
        for (auto& x : w) x = 0.05 + (rng() % 1000) / 500.0;
        std::normal_distribution<double> nd;
        for (auto& x : v) x = nd(rng) * 3;
        auto sp = std::make_shared<MeasureSpace>(w);
        ScalarField h(sp, v);
        for (double p : {1.0, 1.5, 2.0, 3.0}) CHECK_NOTHROW(lp_norm(h, p));
    }
}

TEST_CASE("weak lp norm") {
    auto s = uniform4();
    ScalarField f(s, {3, 0, 0, 0});
    CHECK(weak_lp_norm(f, 1) == doctest::Approx(0.75).epsilon(1e-12));
    ScalarField z(s, {0, 0, 0, 0});
    CHECK(weak_lp_norm(z, 1) == 0.0);
    ScalarField ones(s, {1, 1, 1, 1});
    CHECK(weak_lp_norm(ones, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(weak_lp_norm(f, 0.9), std::invalid_argument);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n = 1 + rng() % 20;
        std::vector<double> w(n), v(n);
        for (auto& x : w) x = 0.1 + (rng() % 100) / 50.0;
        std::normal_distribution<double> nd;
        for (auto& x : v) x = nd(rng);
        ScalarField h(std::make_shared<MeasureSpace>(w), v);
        for (double p : {1.0, 2.0}) CHECK(weak_lp_norm(h, p) <= lp_norm(h, p) + 1e-12);
    }
}

TEST_CASE("field csv round trip") {
    auto s = std::make_shared<MeasureSpace>(std::vector<double>{0.25, 0.5, 0.25},
                                            std::vector<double>{0.0, 0.4, 0.8}, 1);
    ScalarField f(s, {1.5, -2.25, 1e-7});
    std::ostringstream out;
    write_field_csv(out, f);
    std::istringstream in(out.str());
    ScalarField g = read_field_csv(in);
    REQUIRE(g.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(g.values()[i] == doctest::Approx(f.values()[i]).epsilon(1e-10));
        CHECK(g.space().weight(static_cast<PointIndex>(i)) ==
              doctest::Approx(s->weight(static_cast<PointIndex>(i))).epsilon(1e-10));
    }
    CHECK(g.space().coord_dim() == 1);

    // mismatched expected space rejected
    auto other = std::make_shared<MeasureSpace>(std::vector<double>{0.3, 0.4, 0.3});
    std::istringstream in2(out.str());
    CHECK_THROWS_AS(read_field_csv(in2, other), std::invalid_argument);
}

TEST_CASE("csv quoting round trips") {
    std::ostringstream out;
    std::vector<std::string> row{"plain", "with,comma", "with\"quote", "multi\nline"};
    csv::write_row(out, row);
    std::istringstream in(out.str());
    auto rows = csv::read_all(in);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == row);
    CHECK(csv::fmt(0.1) == "0.1");
    CHECK(csv::fmt(1.0 / 0.0) == "inf");
}
