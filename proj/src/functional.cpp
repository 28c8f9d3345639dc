#include "ballcalc/functional.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ballcalc/maximal.hpp"
#include "ballcalc/parallel.hpp"

namespace ballcalc {

namespace {

void check_ball(const BallBasis& basis, BallId b) {
    if (b < 0 || static_cast<std::size_t>(b) >= basis.ball_count())
        throw std::out_of_range("ball id out of range");
}

void check_alpha(double alpha) {
    if (!(alpha > 0) || !(alpha < 1))
        throw std::invalid_argument("alpha must lie in (0,1)");
}

double member_avg(const ScalarField& f, const BallBasis& basis, BallId b, bool absolute) {
    const Ball& B = basis.ball(b);
    double acc = 0;
    for (PointIndex x : B.members().members())
        acc += (absolute ? std::abs(f[x]) : f[x]) * f.space().weight(x);
    return acc / B.measure();
}

}  // namespace

double avg(const ScalarField& f, const BallBasis& basis, BallId b) {
    check_ball(basis, b);
    return member_avg(f, basis, b, false);
}

double abs_avg(const ScalarField& f, const BallBasis& basis, BallId b) {
    check_ball(basis, b);
    return member_avg(f, basis, b, true);
}

double sharp(const ScalarField& f, const BallBasis& basis, BallId b) {
    check_ball(basis, b);
    const Ball& B = basis.ball(b);
    double mean = member_avg(f, basis, b, false);
    double acc = 0;
    for (PointIndex x : B.members().members())
        acc += std::abs(f[x] - mean) * f.space().weight(x);
    return acc / B.measure();
}

namespace {

template <class PerBall>
double scan_superballs(const BallBasis& basis, BallId b, const PerBall& value_of) {
    const Ball& B = basis.ball(b);
    double best = value_of(b);
    // supersets must contain any fixed member of B
    PointIndex probe = B.members().members().front();
    for (BallId a : basis.balls_containing(probe)) {
        if (a == b) continue;
        if (basis.ball(a).measure() < B.measure()) continue;
        if (basis.ball_contains(a, b)) best = std::max(best, value_of(a));
    }
    return best;
}

}  // namespace

double starred_avg(const ScalarField& f, const BallBasis& basis, BallId b) {
    check_ball(basis, b);
    return scan_superballs(basis, b, [&](BallId a) { return member_avg(f, basis, a, true); });
}

double starred_sharp(const ScalarField& f, const BallBasis& basis, BallId b) {
    check_ball(basis, b);
    return scan_superballs(basis, b, [&](BallId a) { return sharp(f, basis, a); });
}

std::vector<double> sharp_all(const BallBasis& basis, const ScalarField& f) {
    std::vector<double> means = per_ball_averages(basis, f);
    std::vector<double> out(basis.ball_count());
    parallel_for(basis.ball_count(), [&](std::size_t bi) {
        const Ball& B = basis.ball(static_cast<BallId>(bi));
        double acc = 0;
        for (PointIndex x : B.members().members())
            acc += std::abs(f[x] - means[bi]) * f.space().weight(x);
        out[bi] = acc / B.measure();
    });
    return out;
}

namespace {

// Descend radii: the superballs of B(c,r) among proper same-shape balls are
// exactly those with |center - c| <= r' - r (per axis for cubes), so each
// radius step is a window-1 dilation.
std::vector<double> grid_superball_max(const BallBasis& basis, std::span<const double> per_ball) {
    const int n = basis.grid_n();
    const std::size_t N = basis.space().size();
    const std::size_t layers = basis.ball_count() / N;
    const bool two_d = basis.grid_d() == 2;

    // a layer whose ball is the whole space dominates everything below
    double wsmax = -std::numeric_limits<double>::infinity();
    std::size_t top_proper = layers;
    for (std::size_t layer = 0; layer < layers; ++layer) {
        if (basis.ball(static_cast<BallId>(layer * N)).members().size() == N) {
            top_proper = std::min(top_proper, layer);
            for (std::size_t c = 0; c < N; ++c)
                wsmax = std::max(wsmax, per_ball[layer * N + c]);
        }
    }

    std::vector<double> out(basis.ball_count());
    std::vector<double> cur(N, wsmax), next(N);
    for (std::size_t layer = top_proper; layer-- > 0;) {
        if (two_d) {
            // dilate cur by one step per axis (rows then columns)
            std::vector<double>& rowpass = next;
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    int xm = (x + n - 1) % n, xp = (x + 1) % n;
                    std::size_t row = static_cast<std::size_t>(y) * n;
                    rowpass[row + static_cast<std::size_t>(x)] =
                        std::max({cur[row + static_cast<std::size_t>(xm)],
                                  cur[row + static_cast<std::size_t>(x)],
                                  cur[row + static_cast<std::size_t>(xp)]});
                }
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    int ym = (y + n - 1) % n, yp = (y + 1) % n;
                    cur[static_cast<std::size_t>(y) * n + static_cast<std::size_t>(x)] = std::max(
                        {rowpass[static_cast<std::size_t>(ym) * n + static_cast<std::size_t>(x)],
                         rowpass[static_cast<std::size_t>(y) * n + static_cast<std::size_t>(x)],
                         rowpass[static_cast<std::size_t>(yp) * n + static_cast<std::size_t>(x)]});
                }
        } else {
            for (std::size_t c = 0; c < N; ++c) {
                std::size_t cm = (c + N - 1) % N, cp = (c + 1) % N;
                next[c] = std::max({cur[cm], cur[c], cur[cp]});
            }
            std::swap(cur, next);
        }
        for (std::size_t c = 0; c < N; ++c) {
            double v = std::max(per_ball[layer * N + c], cur[c]);
            out[layer * N + c] = v;
            cur[c] = v;
        }
    }
    // whole-space layers see only themselves and other whole-space balls
    for (std::size_t layer = top_proper; layer < layers; ++layer)
        for (std::size_t c = 0; c < N; ++c) out[layer * N + c] = wsmax;
    return out;
}

std::vector<double> tree_superball_max(const BallBasis& basis, std::span<const double> per_ball) {
    std::vector<double> out(basis.ball_count());
    parallel_for(basis.ball_count(), [&](std::size_t bi) {
        BallId b = static_cast<BallId>(bi);
        const Ball& B = basis.ball(b);
        PointIndex probe = B.members().members().front();
        double best = per_ball[bi];
        for (BallId a : basis.balls_containing(probe))
            if (a != b && basis.ball(a).measure() >= B.measure() && basis.ball_contains(a, b))
                best = std::max(best, per_ball[static_cast<std::size_t>(a)]);
        out[bi] = best;
    });
    return out;
}

}  // namespace

std::vector<double> sup_over_superballs(const BallBasis& basis, std::span<const double> per_ball) {
    if (per_ball.size() != basis.ball_count())
        throw std::invalid_argument("sup_over_superballs: length mismatch");
    switch (basis.family()) {
        case BallBasis::Family::dyadic:
        case BallBasis::Family::martingale:
            return tree_superball_max(basis, per_ball);
        case BallBasis::Family::grid:
            if (!basis.grid_shape_ball()) return grid_superball_max(basis, per_ball);
            [[fallthrough]];  // discrete discs lack the exact dilation law
        default:
            break;
    }
    // generic containment scan
    std::vector<double> out(basis.ball_count());
    parallel_for(basis.ball_count(), [&](std::size_t bi) {
        BallId b = static_cast<BallId>(bi);
        double mb = basis.ball(b).measure();
        double best = per_ball[bi];
        for (std::size_t aj = 0; aj < basis.ball_count(); ++aj) {
            BallId a = static_cast<BallId>(aj);
            if (a == b || basis.ball(a).measure() < mb) continue;
            if (basis.ball_contains(a, b)) best = std::max(best, per_ball[aj]);
        }
        out[bi] = best;
    });
    return out;
}

OscResult osc_set(const ScalarField& f, const PointSet& e) {
    if (e.empty()) throw std::invalid_argument("osc_set: empty set");
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    for (PointIndex x : e.members()) {
        mx = std::max(mx, f[x]);
        mn = std::min(mn, f[x]);
    }
    return {mx, mn, mx - mn};
}

double osc_alpha_span(std::span<const double> values, std::span<const double> weights,
                      double alpha_mass) {
    // sort by value; minimal window with strict mass > alpha_mass
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    double best = std::numeric_limits<double>::infinity();
    double mass = 0;
    std::size_t i = 0;
    for (std::size_t j = 0; j < n; ++j) {
        mass += weights[order[j]];
        while (mass > alpha_mass) {
            best = std::min(best, values[order[j]] - values[order[i]]);
            mass -= weights[order[i]];
            ++i;
        }
    }
    if (best == std::numeric_limits<double>::infinity())
        throw std::logic_error("osc_alpha: no admissible window (alpha >= 1?)");
    return best;
}

double losc_alpha_span(std::span<const double> values, std::span<const double> weights,
                       double alpha_mass) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    double mass = 0;
    for (std::size_t j = 0; j < n; ++j) {
        mass += weights[order[j]];
        if (mass > alpha_mass) return values[order[j]] - values[order[0]];
    }
    throw std::logic_error("losc_alpha: no admissible level (alpha >= 1?)");
}

namespace {

double ball_osc(const ScalarField& f, const BallBasis& basis, BallId b, double alpha, bool lower) {
    check_ball(basis, b);
    check_alpha(alpha);
    const Ball& B = basis.ball(b);
    std::vector<double> values, weights;
    values.reserve(B.members().size());
    weights.reserve(B.members().size());
    for (PointIndex x : B.members().members()) {
        values.push_back(f[x]);
        weights.push_back(f.space().weight(x));
    }
    double alpha_mass = alpha * B.measure();
    return lower ? losc_alpha_span(values, weights, alpha_mass)
                 : osc_alpha_span(values, weights, alpha_mass);
}

}  // namespace

double osc_alpha(const ScalarField& f, const BallBasis& basis, BallId b, double alpha) {
    return ball_osc(f, basis, b, alpha, false);
}

double losc_alpha(const ScalarField& f, const BallBasis& basis, BallId b, double alpha) {
    return ball_osc(f, basis, b, alpha, true);
}

NormReport norm(const ScalarField& f, const BallBasis& basis, NormKind kind, double alpha,
                bool keep_table) {
    if (f.space_ptr() != basis.space_ptr())
        throw std::invalid_argument("norm: field lives on a different space");
    const bool needs_alpha = kind == NormKind::bmo_alpha || kind == NormKind::blo_alpha;
    if (needs_alpha) check_alpha(alpha);

    std::vector<double> table(basis.ball_count());
    switch (kind) {
        case NormKind::bmo:
            table = sharp_all(basis, f);
            break;
        case NormKind::blo: {
            std::vector<double> means = per_ball_averages(basis, f);
            std::vector<double> mins = per_ball_min(basis, f);
            for (std::size_t bi = 0; bi < table.size(); ++bi) table[bi] = means[bi] - mins[bi];
            break;
        }
        case NormKind::bmo_alpha:
        case NormKind::blo_alpha: {
            const bool lower = kind == NormKind::blo_alpha;
            parallel_for(basis.ball_count(), [&](std::size_t bi) {
                table[bi] = ball_osc(f, basis, static_cast<BallId>(bi), alpha, lower);
            });
            break;
        }
    }

    NormReport rep;
    rep.witness = 0;
    rep.value = table[0];
    for (std::size_t bi = 1; bi < table.size(); ++bi)
        if (table[bi] > rep.value) {
            rep.value = table[bi];
            rep.witness = static_cast<BallId>(bi);
        }
    if (keep_table) rep.per_ball = std::move(table);
    return rep;
}

std::vector<InequalityRow> elementary_norm_inequalities(const ScalarField& f,
                                                        const BallBasis& basis, double alpha) {
    check_alpha(alpha);
    double bmo = norm(f, basis, NormKind::bmo).value;
    double blo = norm(f, basis, NormKind::blo).value;
    double bmo_a = norm(f, basis, NormKind::bmo_alpha, alpha).value;
    double blo_a = norm(f, basis, NormKind::blo_alpha, alpha).value;
    double sup = 0;
    for (double v : f.values()) sup = std::max(sup, std::abs(v));
    double inv = 2.0 / (1.0 - alpha);

    std::vector<InequalityRow> rows;
    auto add = [&rows](std::string name, double lhs, double rhs) {
        rows.push_back({std::move(name), lhs, rhs, rhs - lhs, lhs <= rhs});
    };
    add("bmo_alpha<=blo_alpha", bmo_a, blo_a);
    add("bmo<=2*blo", bmo, 2 * blo);
    add("bmo_alpha<=2/(1-alpha)*bmo", bmo_a, inv * bmo);
    add("blo_alpha<=2/(1-alpha)*blo", blo_a, inv * blo);
    add("blo<=2*sup", blo, 2 * sup);
    return rows;
}

}  // namespace ballcalc
