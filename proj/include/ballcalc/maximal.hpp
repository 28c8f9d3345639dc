#pragma once

#include <span>
#include <vector>

#include "ballcalc/basis.hpp"
#include "ballcalc/kernel.hpp"
#include "ballcalc/space.hpp"

namespace ballcalc {

/// A maximal function together with, per point, the first ball (in
/// enumeration order) attaining the sup; -1 where no ball applies.
struct MaximalResult {
    ScalarField values;
    std::vector<BallId> argmax;
};

/// Σ_{x∈B} g(x)·w(x) for every ball. Interval and arc balls use prefix
/// sums, 2-d cubes a summed-area table, discs row prefix sums; only
/// shapeless balls fall back to member walks.
std::vector<double> per_ball_weighted_sums(const BallBasis& basis, std::span<const double> g);

/// ⟨|f|⟩_B for every ball.
std::vector<double> per_ball_abs_averages(const BallBasis& basis, const ScalarField& f);
/// f_B (signed averages) for every ball.
std::vector<double> per_ball_averages(const BallBasis& basis, const ScalarField& f);
/// min_{x∈B} f(x) for every ball.
std::vector<double> per_ball_min(const BallBasis& basis, const ScalarField& f);

/// Mf(x) = max over enumerated balls containing x of ⟨|f|⟩_B.
MaximalResult standard_maximal(const ScalarField& f, const BallBasis& basis);

/// M_G f(x) = max over B ∈ 𝓑(x) of ∫|f|φ_B dμ. With indicator kernels and
/// the uncentered family this coincides with standard_maximal bit for bit.
MaximalResult kb_maximal(const ScalarField& f, const KBCouple& couple);

/// Centered mode sups over the kernels centered at x; uncentered mode over
/// every (center, radius) whose ball contains x.
MaximalResult convolution_maximal(const ScalarField& f, const BallBasis& grid,
                                  const KernelStructure& kernels, BallBasis::Mode mode);

/// Sup over the dyadic chain {I_n(x)} of the weighted kernel averages.
MaximalResult dyadic_weighted_maximal(const ScalarField& f, const BallBasis& dyadic,
                                      const KernelStructure& kernels);

/// Sup over the shipped degrees of the Fejér averages of |f|.
MaximalResult fejer_maximal(const ScalarField& f, const BallBasis& circle,
                            const KernelStructure& kernels);

}  // namespace ballcalc
