#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ballcalc/basis.hpp"
#include "ballcalc/space.hpp"

namespace ballcalc {

/// Modulus of continuity: non-increasing ω : [1,∞) → [0,1] with ω(1) = 1.
/// Three representations:
///   - dirac_at_one: ω(1)=1, ω(t)=0 for t>1 (the trivial envelope of
///     kernels supported on their own ball; its integral is empty).
///   - steps: exact step function, zero beyond the last breakpoint.
///   - analytic: closed-form evaluator (power laws, profile-derived).
class Modulus {
public:
    enum class Kind { dirac_at_one, steps, power, analytic };

    static Modulus dirac_at_one();
    /// values[i] on [breakpoints[i], breakpoints[i+1]), 0 from the back
    /// breakpoint on; breakpoints.front() must be 1 and values.front() 1.
    static Modulus steps(std::vector<double> breakpoints, std::vector<double> values);
    static Modulus power_law(double p);  // t^{-p}
    static Modulus analytic(std::string name, std::function<double(double)> eval);

    double operator()(double t) const;
    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double power_exponent() const { return power_; }
    const std::vector<double>& step_breakpoints() const { return breakpoints_; }
    const std::vector<double>& step_values() const { return values_; }

private:
    Modulus() = default;
    Kind kind_ = Kind::dirac_at_one;
    std::string name_;
    std::vector<double> breakpoints_, values_;
    double power_ = 0;
    std::function<double(double)> eval_;
};

struct IOmega {
    double value = 0;
    bool divergent = false;
};

/// I(ω) = 1 + ∫_1^∞ ω(t) log2(1+t) dt. Exact for step moduli; adaptive
/// integration over dyadic windows otherwise, with a divergence sentinel
/// when the windows stop shrinking within the representable range.
IOmega i_omega(const Modulus& m);

/// Radial kernel profile ξ : [0,∞) → [0,∞), non-increasing.
class RadialProfile {
public:
    static RadialProfile indicator();      // 1 on [0,1], 0 beyond
    static RadialProfile power(double p);  // (1+s)^{-p}
    static RadialProfile from_function(std::string name, std::function<double(double)> eval);
    /// Sampled table: right-continuous step interpolation, 0 beyond the last
    /// sample. Samples must start at 0 and be non-increasing.
    static RadialProfile from_samples(std::vector<std::pair<double, double>> samples);
    /// Accepts "indicator" or "power:<p>".
    static RadialProfile parse(const std::string& preset);

    double operator()(double s) const { return eval_(s); }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::function<double(double)> eval_;
};

/// J(ξ) = ∫_{R^d} ξ(|x|) log2(2+|x|) dx, by window summation in spherical
/// coordinates, with the same divergence sentinel as i_omega.
IOmega j_xi(const RadialProfile& xi, int d);

/// J(α) = Σ (k+1) α_k over the provided entries.
double j_alpha(std::span<const double> alpha);

/// α presets: "indicator" -> (1,0,...), "geometric:<q>" -> q^k,
/// "alpha:a0,a1,..." -> explicit list; always length levels+1.
std::vector<double> parse_alpha_preset(const std::string& preset, int levels);

/// Normalized nonnegative kernels φ_B attached to (a subfamily of) the
/// balls, with the kernel axioms: unit mass, and two-sided comparability
/// with 1_B/μ(B) through the modulus envelope.
class KernelStructure {
public:
    enum class Kind { indicator, dense };

    Kind kind() const { return kind_; }
    const std::string& family() const { return family_; }
    const Modulus& omega() const { return omega_; }
    const IOmega& i_omega_value() const { return iomega_; }
    double j_value() const { return j_value_; }  // J(α)/J(ξ) when applicable
    double declared_c1() const { return c1_; }
    double declared_c2() const { return c2_; }

    bool has_kernel(BallId b) const;
    /// φ_B(x) as a density against μ.
    double phi_value(BallId b, PointIndex x, const BallBasis& basis) const;
    /// ∫ g φ_B dμ for a pointwise vector g.
    double integral_against(BallId b, std::span<const double> g, const BallBasis& basis) const;
    /// Balls that carry a kernel, ascending.
    std::span<const BallId> kernel_balls() const { return kernel_balls_; }

    /// Dense tables only: the stored density vector.
    std::span<const double> dense_phi(BallId b) const;

    void write_csv(std::ostream& out, const BallBasis& basis) const;

    /// Assembly hook (tests build deliberately broken kernels with it).
    static KernelStructure from_dense(const BallBasis& basis,
                                      std::vector<std::pair<BallId, std::vector<double>>> kernels,
                                      Modulus omega, std::string family);

private:
    friend KernelStructure indicator_kernels(const BallBasis&);
    friend KernelStructure convolution_kernels(const BallBasis&, const RadialProfile&);
    friend KernelStructure dyadic_weighted_kernels(const BallBasis&, std::span<const double>);
    friend KernelStructure fejer_kernels(const BallBasis&, std::span<const int>);

    KernelStructure() = default;

    Kind kind_ = Kind::indicator;
    std::string family_;
    Modulus omega_ = Modulus::dirac_at_one();
    IOmega iomega_;
    double j_value_ = std::numeric_limits<double>::quiet_NaN();
    double c1_ = std::numeric_limits<double>::quiet_NaN();
    double c2_ = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::int32_t> slot_of_ball_;       // -1 = no kernel
    std::vector<std::vector<double>> dense_;       // per slot, N densities
    std::vector<BallId> kernel_balls_;
};

/// φ_B = 1_B/μ(B) for every ball; c1 = c2 = 1, trivial envelope.
KernelStructure indicator_kernels(const BallBasis& basis);

/// φ_{B(x,r)}(y) = ξ(dist(x,y)/r), renormalized to unit mass on the torus;
/// ω(t) = ξ(t^{1/d})/ξ(1). Throws when ξ increases somewhere or J(ξ)
/// diverges at grid scale.
KernelStructure convolution_kernels(const BallBasis& grid, const RadialProfile& xi);

/// φ_I(y) = Σ_{k=0}^n α_{n-k} 1_{I_k(x)}(y)/|I_k(x)| on the dyadic chain,
/// each kernel normalized by its own total mass; ω is the exact dyadic step
/// envelope, renormalized to ω(1)=1. Requires α_0 > 0.
KernelStructure dyadic_weighted_kernels(const BallBasis& dyadic, std::span<const double> alpha);

/// Discrete Fejér kernels F_m on the circle grid, attached to the arc of
/// radius ~ n/(2(m+1)) at each center; envelope profile (1+t)^{-2}.
KernelStructure fejer_kernels(const BallBasis& circle, std::span<const int> degrees);

struct KernelValidation {
    std::vector<CheckResult> checks;
    double max_k1_residual = 0;
    double c1_tight = 0, c2_tight = 0;
    double c0 = 0, c0_reverse = 0;  // ω(2t) ≤ c0 ω(t); ω(t) ≤ c0' ω(2t)
    IOmega iomega;
    bool pass() const;
    std::string to_text() const;
    void write_csv(std::ostream& out) const;
};

/// Exhaustive K1/K2 scan over every kernel ball and point, plus the modulus
/// doubling constants on a geometric grid. Failures are report entries.
KernelValidation validate_kernels(const KernelStructure& ks, const BallBasis& basis);

/// Kernel-basis couple: the kernels together with the per-point families.
struct KBCouple {
    const BallBasis* basis = nullptr;
    const KernelStructure* kernels = nullptr;

    /// Every ball referenced by some 𝓑(x) must carry a kernel.
    bool complete() const;
};

}  // namespace ballcalc
