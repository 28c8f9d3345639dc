#pragma once

#include <span>
#include <string>
#include <vector>

#include "ballcalc/basis.hpp"
#include "ballcalc/space.hpp"

namespace ballcalc {

/// f_B = integral of f over B divided by μ(B).
double avg(const ScalarField& f, const BallBasis& basis, BallId b);
/// ⟨f⟩_B, the average of |f|.
double abs_avg(const ScalarField& f, const BallBasis& basis, BallId b);
/// ⟨f⟩_{#,B} = ⟨f - f_B⟩_B, the mean absolute deviation about f_B.
double sharp(const ScalarField& f, const BallBasis& basis, BallId b);

/// Sup over enumerated superballs A ⊇ B (B included) of ⟨f⟩_A resp.
/// ⟨f⟩_{#,A}.
double starred_avg(const ScalarField& f, const BallBasis& basis, BallId b);
double starred_sharp(const ScalarField& f, const BallBasis& basis, BallId b);

/// ⟨f⟩_{#,B} for every ball at once.
std::vector<double> sharp_all(const BallBasis& basis, const ScalarField& f);

/// For each ball, max of `per_ball` over its superballs (itself included).
/// Exact: tree bases walk ancestor chains, grid arcs/cubes use a radius-
/// descending dilation, anything else scans containments directly.
std::vector<double> sup_over_superballs(const BallBasis& basis, std::span<const double> per_ball);

struct OscResult {
    double sup = 0, inf = 0, osc = 0;
};

/// (max, min, max-min) of f over e; essential = plain on discrete spaces.
OscResult osc_set(const ScalarField& f, const PointSet& e);

/// OSC_{B,α}(f): the smallest oscillation of f over subsets E ⊆ B with
/// μ(E) > αμ(B), computed through the interval characterization: minimal
/// window b-a over value-sorted windows of mass strictly above αμ(B).
double osc_alpha(const ScalarField& f, const BallBasis& basis, BallId b, double alpha);

/// LOSC_{B,α}(f): same, but the window must start at min_B(f); equals the
/// strict-α weighted quantile of f on B minus the minimum.
double losc_alpha(const ScalarField& f, const BallBasis& basis, BallId b, double alpha);

/// Span versions used by the norm scans (and the test oracles).
double osc_alpha_span(std::span<const double> values, std::span<const double> weights,
                      double alpha_mass);
double losc_alpha_span(std::span<const double> values, std::span<const double> weights,
                       double alpha_mass);

enum class NormKind { bmo, blo, bmo_alpha, blo_alpha };

struct NormReport {
    double value = 0;
    BallId witness = -1;
    std::vector<double> per_ball;  // filled when requested
};

/// sup over the enumerated family of the per-ball functional; witness is the
/// smallest attaining ball id.
NormReport norm(const ScalarField& f, const BallBasis& basis, NormKind kind,
                double alpha = std::numeric_limits<double>::quiet_NaN(), bool keep_table = false);

struct InequalityRow {
    std::string name;
    double lhs = 0, rhs = 0, slack = 0;
    bool holds = false;
};

/// The five elementary norm inequalities; slack = rhs - lhs.
std::vector<InequalityRow> elementary_norm_inequalities(const ScalarField& f,
                                                        const BallBasis& basis, double alpha);

}  // namespace ballcalc
