#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ballcalc/kernel.hpp"
#include "ballcalc/maximal.hpp"
#include "oracles.hpp"

using namespace ballcalc;

namespace {

// dense numeric integration of omega(t)*log2(1+t) piece by piece between
// breakpoints, used only as a test oracle against the exact step-sum route
double slow_i_omega_steps(const std::vector<double>& bp, const std::vector<double>& vals) {
    double acc = 0;
    const int steps = 200000;
    for (std::size_t piece = 0; piece < vals.size(); ++piece) {
        double lo = bp[piece], hi = bp[piece + 1];
        double h = (hi - lo) / steps;
        for (int i = 0; i < steps; ++i) {
            double t = lo + (i + 0.5) * h;
            acc += vals[piece] * std::log2(1.0 + t) * h;
        }
    }
    return 1.0 + acc;
}

}  // namespace

TEST_CASE("i_omega: trivial envelope integrates to 1") {
    CHECK(i_omega(Modulus::dirac_at_one()).value == 1.0);
    CHECK_FALSE(i_omega(Modulus::dirac_at_one()).divergent);
}

TEST_CASE("i_omega: inverse square has the closed-form value 3") {
    // 1 + (1/ln2) * \int_1^inf ln(1+t)/t^2 dt = 1 + 2 ln2/ln2 = 3
    IOmega r = i_omega(Modulus::power_law(2));
    CHECK_FALSE(r.divergent);
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("i_omega: slow tails are flagged divergent") {
    CHECK(i_omega(Modulus::power_law(1)).divergent);
    Modulus slow = Modulus::analytic("1/log2(1+t)", [](double t) { return 1.0 / std::log2(1 + t); });
    CHECK(i_omega(slow).divergent);
}

TEST_CASE("i_omega: exact step sums match dense quadrature") {
    Modulus steps = Modulus::steps({1, 2, 4, 8}, {1, 0.5, 0.125});
    IOmega r = i_omega(steps);
    CHECK_FALSE(r.divergent);
    CHECK(r.value == doctest::Approx(slow_i_omega_steps({1, 2, 4, 8}, {1, 0.5, 0.125}))
                         .epsilon(1e-8));
}

TEST_CASE("modulus constructors enforce the axioms") {
    CHECK_THROWS_AS(Modulus::steps({1, 2}, {0.5}), std::invalid_argument);         // omega(1) != 1
    CHECK_THROWS_AS(Modulus::steps({1, 2, 4}, {1.0, 1.5}), std::invalid_argument); // above 1
    CHECK_THROWS_AS(Modulus::steps({2, 4}, {1.0}), std::invalid_argument);         // domain
    CHECK_THROWS_AS(Modulus::analytic("grows", [](double t) { return t / 2; }),
                    std::invalid_argument);
    Modulus ok = Modulus::steps({1, 2, 4}, {1.0, 0.25});
    CHECK(ok(1.0) == 1.0);
    CHECK(ok(3.0) == 0.25);
    CHECK(ok(4.0) == 0.0);
    CHECK_THROWS_AS(ok(0.5), std::domain_error);
}

TEST_CASE("radial profiles") {
    RadialProfile ind = RadialProfile::parse("indicator");
    CHECK(ind(1.0) == 1.0);
    CHECK(ind(1.5) == 0.0);
    RadialProfile p3 = RadialProfile::parse("power:3");
    CHECK(p3(1.0) == doctest::Approx(0.125));
    CHECK_THROWS_AS(RadialProfile::parse("wiggly"), std::invalid_argument);
    CHECK_THROWS_AS(RadialProfile::from_function("up", [](double s) { return s; }),
                    std::invalid_argument);

    CHECK_FALSE(j_xi(p3, 1).divergent);
    CHECK(j_xi(RadialProfile::power(1), 1).divergent);  // (1+s)^{-1} in d=1
}

TEST_CASE("sampled profile tables") {
    RadialProfile t = RadialProfile::from_samples({{0.0, 1.0}, {1.0, 1.0}, {2.0, 0.25}});
    CHECK(t(0.0) == 1.0);
    CHECK(t(0.7) == 1.0);
    CHECK(t(1.0) == 1.0);
    CHECK(t(1.5) == 1.0);
    CHECK(t(2.0) == 0.25);
    CHECK(t(5.0) == 0.0);
    CHECK_THROWS_AS(RadialProfile::from_samples({{1.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(RadialProfile::from_samples({{0.0, 0.5}, {1.0, 0.7}}),
                    std::invalid_argument);

    // usable as a convolution profile
    auto [space, basis] = grid_torus_basis(1, 16, GridShape::cube);
    KernelStructure ks = convolution_kernels(basis, t);
    KernelValidation rep = validate_kernels(ks, basis);
    CHECK(rep.max_k1_residual < 1e-10);
}

TEST_CASE("J(alpha) of the geometric sequence sums to 4") {
    std::vector<double> alpha = parse_alpha_preset("geometric:0.5", 59);
    CHECK(j_alpha(alpha) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(parse_alpha_preset("indicator", 3) == std::vector<double>{1, 0, 0, 0});
    CHECK_THROWS_AS(parse_alpha_preset("alpha:1,2,3", 1), std::invalid_argument);
}

TEST_CASE("indicator kernels: averages collapse and the validator is exact") {
    auto [space, basis] = dyadic_basis(4);
    KernelStructure ks = indicator_kernels(basis);
    CHECK(ks.i_omega_value().value == 1.0);

    std::mt19937_64 rng(4);
    std::vector<double> vals(space->size());
    std::normal_distribution<double> nd;
    for (auto& v : vals) v = nd(rng);
    ScalarField f(space, vals);
    std::vector<double> absf(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) absf[i] = std::abs(vals[i]);
    for (std::size_t bi = 0; bi < basis.ball_count(); ++bi) {
        BallId b = static_cast<BallId>(bi);
        double via_kernel = ks.integral_against(b, absf, basis);
        double direct = 0;
        for (PointIndex x : basis.ball(b).members().members())
            direct += std::abs(f[x]) * space->weight(x);
        direct /= basis.ball(b).measure();
        CHECK(via_kernel == doctest::Approx(direct).epsilon(1e-13));
    }

    KernelValidation rep = validate_kernels(ks, basis);
    CHECK(rep.pass());
    CHECK(rep.max_k1_residual == 0.0);
    CHECK(rep.c1_tight == 1.0);
    CHECK(rep.c2_tight == 1.0);
    CHECK(std::isinf(rep.c0_reverse));  // zero-width envelope
}

TEST_CASE("dyadic weighted kernels") {
    auto [space, basis] = dyadic_basis(6);

    SUBCASE("single-term alpha is exactly the indicator family") {
        KernelStructure ks = dyadic_weighted_kernels(basis, std::vector<double>{1.0});
        for (std::size_t bi = 0; bi < basis.ball_count(); ++bi) {
            const Ball& B = basis.ball(static_cast<BallId>(bi));
            auto phi = ks.dense_phi(static_cast<BallId>(bi));
            for (std::size_t x = 0; x < phi.size(); ++x) {
                double expect = B.contains(static_cast<PointIndex>(x)) ? 1.0 / B.measure() : 0.0;
                CHECK(phi[x] == doctest::Approx(expect).epsilon(1e-13));
            }
        }
    }

    SUBCASE("geometric alpha passes validation with the declared lower constant") {
        std::vector<double> alpha = parse_alpha_preset("geometric:0.5", 6);
        KernelStructure ks = dyadic_weighted_kernels(basis, alpha);
        KernelValidation rep = validate_kernels(ks, basis);
        CHECK(rep.pass());
        CHECK(rep.max_k1_residual < 1e-10);
        double total = 0;
        for (double a : alpha) total += a;
        CHECK(ks.declared_c1() == doctest::Approx(1.0 / total));
        CHECK(rep.c1_tight >= ks.declared_c1() - 1e-12);
        CHECK_FALSE(rep.iomega.divergent);
    }

    SUBCASE("alpha_0 = 0 or negatives are rejected") {
        CHECK_THROWS_AS(dyadic_weighted_kernels(basis, std::vector<double>{0.0, 1.0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(dyadic_weighted_kernels(basis, std::vector<double>{1.0, -0.5}),
                        std::invalid_argument);
    }
}

TEST_CASE("dyadic weighted kernels obey the raw chain envelope pointwise") {
    // raw kernel sums against the unnormalized step envelope, both assembled
    // here without touching the library's kernel construction
    const int L = 6;
    auto [space, basis] = dyadic_basis(L);
    std::vector<double> alpha = parse_alpha_preset("geometric:0.5", L);
    const std::size_t n = space->size();

    // envelope on [2^k, 2^{k+1}) is sum_{j>=k} alpha_j 2^{-j}
    std::vector<double> tail(alpha.size() + 1, 0.0);
    for (std::size_t k = alpha.size(); k-- > 0;) tail[k] = tail[k + 1] + alpha[k] / std::pow(2.0, k);

    for (std::size_t bi = 0; bi < basis.ball_count(); ++bi) {
        const Ball& I = basis.ball(static_cast<BallId>(bi));
        const int level = I.geometry().level;
        const std::size_t j = static_cast<std::size_t>(I.geometry().lo) / (n >> level);
        for (std::size_t x = 0; x < n; ++x) {
            // raw phi: one term per ancestor of I containing x
            double raw = 0;
            for (int k = 0; k <= level; ++k) {
                std::size_t width = n >> k;
                std::size_t ancestor_lo = (j >> (level - k)) * width;
                if (x >= ancestor_lo && x < ancestor_lo + width)
                    raw += alpha[static_cast<std::size_t>(level - k)] /
                           (static_cast<double>(width) / n);
            }
            DOf d = d_of(static_cast<PointIndex>(x), static_cast<BallId>(bi), basis);
            REQUIRE(d.found);
            double t = d.value / I.measure();
            std::size_t k = static_cast<std::size_t>(std::floor(std::log2(t) + 1e-9));
            double envelope = (k < tail.size() ? tail[k] : 0.0) / I.measure();
            CHECK(raw <= envelope + 1e-9);
        }
    }
}

TEST_CASE("convolution kernels") {
    SUBCASE("indicator profile reduces to indicator kernels") {
        auto [space, basis] = grid_torus_basis(1, 16, GridShape::cube);
        KernelStructure ks = convolution_kernels(basis, RadialProfile::indicator());
        for (std::size_t bi = 0; bi < basis.ball_count(); ++bi) {
            const Ball& B = basis.ball(static_cast<BallId>(bi));
            auto phi = ks.dense_phi(static_cast<BallId>(bi));
            for (std::size_t x = 0; x < phi.size(); ++x) {
                double expect = B.contains(static_cast<PointIndex>(x)) ? 1.0 / B.measure() : 0.0;
                CHECK(phi[x] == doctest::Approx(expect).epsilon(1e-12));
            }
        }
        CHECK(ks.i_omega_value().value == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("cubic decay validates on the 64-point circle") {
        auto [space, basis] = grid_torus_basis(1, 64, GridShape::cube);
        KernelStructure ks = convolution_kernels(basis, RadialProfile::power(3));
        KernelValidation rep = validate_kernels(ks, basis);
        CHECK(rep.pass());
        CHECK(rep.max_k1_residual < 1e-10);
        CHECK(rep.c1_tight > 0);
        CHECK(std::isfinite(rep.c2_tight));
        // I(omega) for omega = ((1+t)/2)^{-3}: 2 + 1/(2 ln 2)
        CHECK_FALSE(rep.iomega.divergent);
        CHECK(rep.iomega.value == doctest::Approx(2.0 + 1.0 / (2 * std::log(2.0))).epsilon(1e-5));
    }

    SUBCASE("harmonic decay is rejected") {
        auto [space, basis] = grid_torus_basis(1, 16, GridShape::cube);
        CHECK_THROWS_AS(convolution_kernels(basis, RadialProfile::power(1)),
                        std::invalid_argument);
    }

    SUBCASE("needs a grid basis") {
        auto [space, basis] = dyadic_basis(3);
        CHECK_THROWS_AS(convolution_kernels(basis, RadialProfile::power(3)),
                        std::invalid_argument);
    }
}

TEST_CASE("fejer kernels") {
    auto [space, basis] = grid_torus_basis(1, 64, GridShape::cube);

    SUBCASE("degree zero is the uniform kernel on the whole circle") {
        KernelStructure ks = fejer_kernels(basis, std::vector<int>{0});
        BallId b = ks.kernel_balls()[0];
        CHECK(basis.ball(b).members().size() == 64);
        auto phi = ks.dense_phi(b);
        for (double v : phi) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("nonnegative unit mass for the shipped degrees") {
        KernelStructure ks = fejer_kernels(basis, std::vector<int>{1, 2, 4, 8});
        std::vector<double> ones(64, 1.0);
        for (BallId b : ks.kernel_balls()) {
            auto phi = ks.dense_phi(b);
            for (double v : phi) CHECK(v >= 0.0);
            CHECK(ks.integral_against(b, ones, basis) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    SUBCASE("degree beyond the grid is rejected") {
        CHECK_THROWS_AS(fejer_kernels(basis, std::vector<int>{40}), std::invalid_argument);
    }

    SUBCASE("envelope constants finite at n=256") {
        auto [space2, big] = grid_torus_basis(1, 256, GridShape::cube);
        KernelStructure ks = fejer_kernels(big, std::vector<int>{1, 2, 4, 8, 16});
        KernelValidation rep = validate_kernels(ks, big);
        CHECK(rep.pass());
        CHECK(std::isfinite(rep.c2_tight));
        CHECK(rep.c1_tight > 0);
    }
}

TEST_CASE("a hand-built kernel with mass 0.9 fails K1 with residual 0.1") {
    auto [space, basis] = dyadic_basis(2);
    std::vector<double> phi(space->size(), 0.9);  // integral = 0.9
    KernelStructure ks = KernelStructure::from_dense(basis, {{0, phi}},
                                                     Modulus::power_law(2), "broken");
    KernelValidation rep = validate_kernels(ks, basis);
    CHECK_FALSE(rep.pass());
    CHECK(rep.max_k1_residual == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("couple completeness") {
    auto [space, basis] = grid_torus_basis(1, 16, GridShape::cube);
    KernelStructure fej = fejer_kernels(basis, std::vector<int>{1});
    KBCouple couple{&basis, &fej};
    // centered family references every radius, but only one carries a kernel
    CHECK_FALSE(couple.complete());
    KernelStructure ind = indicator_kernels(basis);
    KBCouple full{&basis, &ind};
    CHECK(full.complete());
}
