#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ballcalc {

using PointIndex = std::int32_t;

/// Finite discrete measure space: N points with strictly positive weights.
/// Optionally carries a geometric coordinate per point (1-d position in
/// [0,1) or a 2-d torus coordinate) for the geometric ball families.
class MeasureSpace {
public:
    explicit MeasureSpace(std::vector<double> weights,
                          std::vector<double> coords = {}, int coord_dim = 0);

    static MeasureSpace uniform(std::size_t n);

    std::size_t size() const { return weights_.size(); }
    double weight(PointIndex i) const { return weights_[static_cast<std::size_t>(i)]; }
    std::span<const double> weights() const { return weights_; }
    double total_measure() const { return total_; }

    int coord_dim() const { return coord_dim_; }
    bool has_coords() const { return coord_dim_ > 0; }
    std::span<const double> coord(PointIndex i) const;

    /// Cumulative-measure midpoint of point i, in [0,1). Gives any space a
    /// canonical 1-d position (equals (i+1/2)/N on uniform spaces).
    double cumulative_position(PointIndex i) const { return cumpos_[static_cast<std::size_t>(i)]; }

private:
    std::vector<double> weights_;
    std::vector<double> coords_;  // flattened, coord_dim_ per point
    std::vector<double> cumpos_;
    int coord_dim_ = 0;
    double total_ = 0;
};

/// A subset of point indices, kept sorted and unique.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::vector<PointIndex> members);
    PointSet(std::initializer_list<PointIndex> members);

    static PointSet all(std::size_t n);

    std::span<const PointIndex> members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    bool contains(PointIndex i) const;

private:
    std::vector<PointIndex> members_;
};

/// A real-valued function on a MeasureSpace. Values must be finite; NaN or
/// infinity is rejected at construction.
class ScalarField {
public:
    ScalarField(std::shared_ptr<const MeasureSpace> space, std::vector<double> values);

    const MeasureSpace& space() const { return *space_; }
    const std::shared_ptr<const MeasureSpace>& space_ptr() const { return space_; }
    std::span<const double> values() const { return values_; }
    double operator[](PointIndex i) const { return values_[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return values_.size(); }

    bool same_space(const ScalarField& other) const { return space_ == other.space_; }

private:
    std::shared_ptr<const MeasureSpace> space_;
    std::vector<double> values_;
};

/// μ(e) = Σ_{x∈e} weight(x). Indices are range-checked.
double measure(const MeasureSpace& s, const PointSet& e);

/// ∫_e f dμ = Σ_{x∈e} f(x)·weight(x).
double integrate(const ScalarField& f, const PointSet& e);
double integrate(const ScalarField& f);  // over the whole space

/// Distribution function λ_f(t) = μ{x∈e : |f(x)| > t}.
double distribution(const ScalarField& f, double t, const PointSet& e);
double distribution(const ScalarField& f, double t);

/// Step representation of λ_f on e: distinct |values| ascending paired with
/// the strict-tail mass μ{|f| > value}. Exact, no quadrature anywhere.
struct DistributionSteps {
    std::vector<double> values;     // distinct |f| values, ascending
    std::vector<double> tail_mass;  // tail_mass[i] = μ{x∈e : |f(x)| > values[i]}
    double total_mass = 0;          // μ(e)

    double lambda(double t) const;  // λ_f(t) for t ≥ 0
};
DistributionSteps distribution_steps(const ScalarField& f, const PointSet& e);
DistributionSteps distribution_steps(const ScalarField& f);

/// ‖f‖_{L^p(e)}, p ≥ 1, computed both as a direct weighted power sum and as
/// the exact piecewise integral p∫ t^{p-1}λ_f(t)dt of the step distribution
/// function. The two routes must agree to 1e-10 relative; disagreement
/// throws. Returns the direct-sum value.
double lp_norm(const ScalarField& f, double p, const PointSet& e);
double lp_norm(const ScalarField& f, double p);

/// ‖f‖_{L^{p,∞}} = sup_{t>0} t·λ_f(t)^{1/p}, exact on the jump points.
double weak_lp_norm(const ScalarField& f, double p);

/// CSV round trip: one row per point, columns index,weight,value[,coord...].
void write_field_csv(std::ostream& out, const ScalarField& f);
/// Reads a field; when `expected` is given the weights must match it
/// (1e-12 relative) and the returned field shares that space object.
ScalarField read_field_csv(std::istream& in, std::shared_ptr<const MeasureSpace> expected = nullptr);

}  // namespace ballcalc
