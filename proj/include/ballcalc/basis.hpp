#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ballcalc/space.hpp"

namespace ballcalc {

using BallId = std::int32_t;

/// Geometry tag used for O(1) sums, containment and d(x,B) on the shipped
/// families. `generic` balls fall back to member/bitset scans.
struct BallGeometry {
    enum class Kind { generic, interval, arc1d, cube2d, disc2d };
    Kind kind = Kind::generic;
    PointIndex lo = 0, hi = 0;  // interval: points [lo, hi)
    int cx = 0, cy = 0;         // grid center
    int radius = 0;             // grid radius (grid steps)
    int level = -1;             // tree level (dyadic/martingale)
};

class Ball {
public:
    Ball(BallId id, PointSet members, double measure, BallGeometry geom, std::string label);

    BallId id() const { return id_; }
    const PointSet& members() const { return members_; }
    double measure() const { return measure_; }
    const BallGeometry& geometry() const { return geom_; }
    const std::string& label() const { return label_; }
    std::span<const std::uint64_t> bits() const { return bits_; }
    bool contains(PointIndex x) const;

    void build_bits(std::size_t n_points);

private:
    BallId id_;
    PointSet members_;
    double measure_;
    BallGeometry geom_;
    std::string label_;
    std::vector<std::uint64_t> bits_;
};

/// Constants a concrete family declares for itself (validated, not trusted).
/// The doubling constant and the basis-structure constant are unrelated
/// quantities that share a letter in the usual notation, so they carry
/// distinct names here.
struct BasisConstants {
    double hull_K = std::numeric_limits<double>::quiet_NaN();
    double eta_doubling = std::numeric_limits<double>::quiet_NaN();
    double theta = std::numeric_limits<double>::quiet_NaN();
    double eta_bs = std::numeric_limits<double>::quiet_NaN();
    double beta = std::numeric_limits<double>::quiet_NaN();
};

/// An enumerable family of balls with a hull map and per-point subfamilies
/// (the basis-structure). Immutable after construction.
class BallBasis {
public:
    enum class Family { dyadic, grid, martingale, custom };
    enum class Mode { centered, uncentered };

    const MeasureSpace& space() const { return *space_; }
    const std::shared_ptr<const MeasureSpace>& space_ptr() const { return space_; }

    std::size_t ball_count() const { return balls_.size(); }
    const Ball& ball(BallId b) const { return balls_[static_cast<std::size_t>(b)]; }
    std::span<const Ball> balls() const { return balls_; }

    BallId hull_id(BallId b) const { return hull_[static_cast<std::size_t>(b)]; }
    const Ball& hull(BallId b) const { return ball(hull_id(b)); }

    /// All balls containing x, ascending by id.
    std::span<const BallId> balls_containing(PointIndex x) const;
    /// The basis-structure family 𝓑(x), ascending by id.
    std::span<const BallId> family_of(PointIndex x) const;

    Family family() const { return family_; }
    Mode mode() const { return mode_; }
    int grid_n() const { return grid_n_; }
    int grid_d() const { return grid_d_; }
    bool grid_shape_ball() const { return grid_shape_ball_; }
    int tree_levels() const { return tree_levels_; }

    const BasisConstants& declared() const { return declared_; }

    std::optional<BallId> whole_space_ball() const { return whole_space_; }

    /// b ⊆ a (geometric fast path, bitset fallback).
    bool ball_contains(BallId a, BallId b) const;
    bool balls_intersect(BallId a, BallId b) const;
    double intersection_measure(BallId a, BallId b) const;

    std::string describe(BallId b) const;
    void write_csv(std::ostream& out) const;  // id, description, measure, hull id

    /// Construction hook for the factories and for tests that need a
    /// deliberately broken basis (e.g. an identity hull map).
    struct Raw {
        std::shared_ptr<const MeasureSpace> space;
        std::vector<Ball> balls;
        std::vector<BallId> hull;
        std::vector<std::vector<BallId>> per_point;  // 𝓑(x); empty => balls_containing
        Family family = Family::custom;
        Mode mode = Mode::uncentered;
        int grid_n = 0, grid_d = 0;
        bool grid_shape_ball = false;
        int tree_levels = 0;
        BasisConstants declared;
    };
    static BallBasis from_raw(Raw raw);

    /// Copy with a different hull map (test hook).
    BallBasis with_hull(std::vector<BallId> hull) const;

private:
    BallBasis() = default;

    std::shared_ptr<const MeasureSpace> space_;
    std::vector<Ball> balls_;
    std::vector<BallId> hull_;
    std::vector<std::vector<BallId>> containing_;  // inverse index
    std::vector<std::vector<BallId>> per_point_;   // 𝓑(x) when not == containing
    bool per_point_is_containing_ = true;
    Family family_ = Family::custom;
    Mode mode_ = Mode::uncentered;
    int grid_n_ = 0, grid_d_ = 0;
    bool grid_shape_ball_ = false;
    int tree_levels_ = 0;
    BasisConstants declared_;
    std::optional<BallId> whole_space_;
};

/// Dyadic intervals of levels 0..L on 2^L uniform points of [0,1).
/// Hull of a level-k interval is its parent (itself for the root); K = 2.
/// 𝓑(x) is the chain I_0(x) ⊃ … ⊃ I_L(x).
std::pair<std::shared_ptr<const MeasureSpace>, BallBasis> dyadic_basis(int levels);

enum class GridShape { cube, ball };

/// All metric balls (or cubes) on the periodic grid (Z/n)^d, every center,
/// integer radii. Hull of B(x,r) is B(x, min(5r, r_full)). For the cube
/// shape radii run 1..n/2 (radius n/2 wraps to the whole space); for the
/// Euclidean shape radii extend to the covering radius so the family
/// contains the whole space and B4 survives near the top.
std::pair<std::shared_ptr<const MeasureSpace>, BallBasis> grid_torus_basis(
    int d, int n, GridShape shape, BallBasis::Mode mode = BallBasis::Mode::centered);

/// Nested partitions: levels[0] must be {all points}, each level refines the
/// previous, the last level has singleton cells.
struct PartitionLevels {
    std::vector<std::vector<std::vector<PointIndex>>> levels;
};

/// Martingale basis over an arbitrary weighted space. Hull of a cell A is
/// its maximal ancestor of measure ≤ 2μ(A) (possibly A itself). 𝓑(x) is the
/// ancestor chain of x.
BallBasis martingale_basis(std::shared_ptr<const MeasureSpace> space,
                           const PartitionLevels& partitions);

/// Random martingale tree with dyadic-rational weights; deterministic in the
/// seed. Splits blocks of contiguous leaves until singletons.
std::pair<std::shared_ptr<const MeasureSpace>, BallBasis> random_martingale_basis(
    std::size_t leaves, std::uint64_t seed);

/// The dyadic family expressed as nested partitions (for cross-checks).
PartitionLevels dyadic_partition_levels(int levels);

struct CheckResult {
    std::string name;
    bool pass = true;
    double measured = std::numeric_limits<double>::quiet_NaN();
    std::string witness;
};

struct BasisValidation {
    std::vector<CheckResult> checks;
    bool core_pass() const;  // B1, B2, B4, G1, G2
    const CheckResult* find(std::string_view name) const;
    std::string to_text() const;
    void write_csv(std::ostream& out) const;
};

struct ValidateOptions {
    bool b2 = true;
    bool b4 = true;
    bool doubling = true;
    bool regularity = true;
    bool basis_structure = true;
};

/// Exhaustive axiom scan. Reports, per axiom, pass/fail with witnesses, and
/// measures the minimal valid K, the doubling η, the regularity θ and the
/// basis-structure η_bs. Failures are report entries, never exceptions.
BasisValidation validate_axioms(const BallBasis& basis, const ValidateOptions& opts = {});

struct ExhaustionSequence {
    std::vector<BallId> balls;
    double min_ratio = std::numeric_limits<double>::quiet_NaN();
    double max_ratio = std::numeric_limits<double>::quiet_NaN();
};

/// Increasing ball chain from `seed` with hull(G_k) ⊆ G_{k+1}, ending at the
/// whole space. Growth ratios are recorded; every step keeps the ratio ≥ 2
/// whenever the family allows it.
ExhaustionSequence exhaustion(const BallBasis& basis, BallId seed);

/// Greedy disjoint subfamily whose hulls cover e. Selection: repeatedly take
/// the largest-measure ball disjoint from all selected (ties by smallest
/// id). Throws if `cover` does not cover e.
std::vector<BallId> greedy_cover(const BallBasis& basis, const PointSet& e,
                                 std::span<const BallId> cover);

struct DOf {
    double value = std::numeric_limits<double>::infinity();
    bool found = false;
};

/// d(x,B) = min measure over enumerated balls A ⊇ B ∪ {x}. Exact; geometric
/// fast paths for dyadic/martingale chains, 1-d arcs and 2-d cubes.
DOf d_of(PointIndex x, BallId b, const BallBasis& basis);

/// Max observed exhaustion growth over a deterministic set of seeds.
double measured_beta(const BallBasis& basis);

}  // namespace ballcalc
