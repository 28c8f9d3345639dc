#include "ballcalc/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "ballcalc/parallel.hpp"

namespace ballcalc {

namespace {

/// Prefix machinery over the point order; wrap handled by index splitting.
struct SumEngine {
    const BallBasis& basis;
    int n = 0;  // grid axis
    std::vector<double> prefix;      // 1-d prefix of g·w (size N+1)
    std::vector<double> sat;         // (n+1)^2 summed-area table, row-major
    std::vector<std::vector<int>> disc_rows;  // per radius: dx_max per |dy|

    SumEngine(const BallBasis& b, std::span<const double> g) : basis(b) {
        const MeasureSpace& s = b.space();
        const std::size_t N = s.size();
        n = b.grid_n();
        prefix.assign(N + 1, 0.0);
        for (std::size_t i = 0; i < N; ++i)
            prefix[i + 1] = prefix[i] + g[i] * s.weight(static_cast<PointIndex>(i));
        if (b.grid_d() == 2) {
            sat.assign(static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1), 0.0);
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    std::size_t i = static_cast<std::size_t>(y) * n + static_cast<std::size_t>(x);
                    sat[idx(y + 1, x + 1)] = g[i] * s.weight(static_cast<PointIndex>(i)) +
                                             sat[idx(y, x + 1)] + sat[idx(y + 1, x)] -
                                             sat[idx(y, x)];
                }
            if (b.grid_shape_ball()) {
                int rmax = 0;
                for (const Ball& ball : b.balls()) rmax = std::max(rmax, ball.geometry().radius);
                disc_rows.resize(static_cast<std::size_t>(rmax) + 1);
                for (int r = 1; r <= rmax; ++r) {
                    disc_rows[static_cast<std::size_t>(r)].resize(static_cast<std::size_t>(r) + 1);
                    for (int dy = 0; dy <= r; ++dy)
                        disc_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(dy)] =
                            static_cast<int>(std::floor(
                                std::sqrt(static_cast<double>(r) * r - static_cast<double>(dy) * dy)));
                }
            }
        }
    }

    std::size_t idx(int y, int x) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(n + 1) +
               static_cast<std::size_t>(x);
    }

    double line(std::size_t lo, std::size_t hi) const {  // [lo, hi)
        return prefix[hi] - prefix[lo];
    }

    /// Sum over count points starting at `start`, wrapping mod len.
    double wrap_line(long start, long count, long len) const {
        if (count >= len) return prefix[static_cast<std::size_t>(len)];
        long s = ((start % len) + len) % len;
        if (s + count <= len) return line(static_cast<std::size_t>(s), static_cast<std::size_t>(s + count));
        return line(static_cast<std::size_t>(s), static_cast<std::size_t>(len)) +
               line(0, static_cast<std::size_t>(s + count - len));
    }

    double rect(int y0, int h, int x0, int w) const {  // plain, no wrap
        return sat[idx(y0 + h, x0 + w)] - sat[idx(y0, x0 + w)] - sat[idx(y0 + h, x0)] +
               sat[idx(y0, x0)];
    }

    double wrap_rect(int y0, int h, int x0, int w) const {
        h = std::min(h, n);
        w = std::min(w, n);
        y0 = ((y0 % n) + n) % n;
        x0 = ((x0 % n) + n) % n;
        int h1 = std::min(h, n - y0), h2 = h - h1;
        int w1 = std::min(w, n - x0), w2 = w - w1;
        double acc = rect(y0, h1, x0, w1);
        if (w2 > 0) acc += rect(y0, h1, 0, w2);
        if (h2 > 0) acc += rect(0, h2, x0, w1);
        if (h2 > 0 && w2 > 0) acc += rect(0, h2, 0, w2);
        return acc;
    }

    /// One grid row of points [x0, x0+w) in row y, wrapped.
    double wrap_row(int y, int x0, int w) const {
        y = ((y % n) + n) % n;
        long base = static_cast<long>(y) * n;
        if (w >= n) return line(static_cast<std::size_t>(base), static_cast<std::size_t>(base + n));
        int x = ((x0 % n) + n) % n;
        int w1 = std::min(w, n - x);
        double acc = line(static_cast<std::size_t>(base + x), static_cast<std::size_t>(base + x + w1));
        if (w - w1 > 0) acc += line(static_cast<std::size_t>(base), static_cast<std::size_t>(base + (w - w1)));
        return acc;
    }

    double ball_sum(const Ball& ball, std::span<const double> g) const {
        const BallGeometry& geo = ball.geometry();
        switch (geo.kind) {
            case BallGeometry::Kind::interval:
                return line(static_cast<std::size_t>(geo.lo), static_cast<std::size_t>(geo.hi));
            case BallGeometry::Kind::arc1d:
                return wrap_line(geo.cx - geo.radius, 2L * geo.radius + 1, n);
            case BallGeometry::Kind::cube2d:
                return wrap_rect(geo.cy - geo.radius, 2 * geo.radius + 1, geo.cx - geo.radius,
                                 2 * geo.radius + 1);
            case BallGeometry::Kind::disc2d: {
                if (ball.members().size() == basis.space().size())
                    return prefix[basis.space().size()];
                const auto& rows = disc_rows[static_cast<std::size_t>(geo.radius)];
                // one pass over grid rows; the torus row distance decides the
                // segment width, so wrapped radii never double count
                double acc = 0;
                for (int y = 0; y < n; ++y) {
                    int dy = std::abs(y - geo.cy);
                    dy = std::min(dy, n - dy);
                    if (dy > geo.radius) continue;
                    int dxm = rows[static_cast<std::size_t>(dy)];
                    acc += wrap_row(y, geo.cx - dxm, 2 * dxm + 1);
                }
                return acc;
            }
            case BallGeometry::Kind::generic:
            default: {
                double acc = 0;
                for (PointIndex x : ball.members().members())
                    acc += g[static_cast<std::size_t>(x)] * basis.space().weight(x);
                return acc;
            }
        }
    }
};

MaximalResult sup_over_families(const ScalarField& f, std::span<const double> per_ball,
                                const std::function<std::span<const BallId>(PointIndex)>& family) {
    const std::size_t N = f.size();
    std::vector<double> vals(N, 0.0);
    std::vector<BallId> argmax(N, -1);
    parallel_for(N, [&](std::size_t xi) {
        PointIndex x = static_cast<PointIndex>(xi);
        double best = 0;
        BallId arg = -1;
        for (BallId b : family(x)) {
            double v = per_ball[static_cast<std::size_t>(b)];
            if (arg < 0 || v > best) {
                best = v;
                arg = b;
            }
        }
        vals[xi] = arg >= 0 ? best : 0.0;
        argmax[xi] = arg;
    });
    return {ScalarField(f.space_ptr(), std::move(vals)), std::move(argmax)};
}

std::vector<double> kernel_ball_averages(const ScalarField& f, const BallBasis& basis,
                                         const KernelStructure& ks) {
    // ∫|f| φ_B for every kernel ball; indicator kernels ride the engine so
    // they agree bit for bit with standard_maximal
    std::vector<double> out(basis.ball_count(), 0.0);
    if (ks.kind() == KernelStructure::Kind::indicator) return per_ball_abs_averages(basis, f);
    std::vector<double> absf(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) absf[i] = std::abs(f.values()[i]);
    auto kballs = ks.kernel_balls();
    parallel_for(kballs.size(), [&](std::size_t i) {
        BallId b = kballs[i];
        out[static_cast<std::size_t>(b)] = ks.integral_against(b, absf, basis);
    });
    return out;
}

}  // namespace

std::vector<double> per_ball_weighted_sums(const BallBasis& basis, std::span<const double> g) {
    if (g.size() != basis.space().size())
        throw std::invalid_argument("per_ball_weighted_sums: length mismatch");
    SumEngine engine(basis, g);
    std::vector<double> out(basis.ball_count());
    parallel_for(basis.ball_count(), [&](std::size_t bi) {
        out[bi] = engine.ball_sum(basis.ball(static_cast<BallId>(bi)), g);
    });
    return out;
}

std::vector<double> per_ball_abs_averages(const BallBasis& basis, const ScalarField& f) {
    std::vector<double> absf(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) absf[i] = std::abs(f.values()[i]);
    std::vector<double> sums = per_ball_weighted_sums(basis, absf);
    for (std::size_t bi = 0; bi < sums.size(); ++bi)
        sums[bi] /= basis.ball(static_cast<BallId>(bi)).measure();
    return sums;
}

std::vector<double> per_ball_averages(const BallBasis& basis, const ScalarField& f) {
    std::vector<double> sums = per_ball_weighted_sums(basis, f.values());
    for (std::size_t bi = 0; bi < sums.size(); ++bi)
        sums[bi] /= basis.ball(static_cast<BallId>(bi)).measure();
    return sums;
}

std::vector<double> per_ball_min(const BallBasis& basis, const ScalarField& f) {
    std::vector<double> out(basis.ball_count());
    parallel_for(basis.ball_count(), [&](std::size_t bi) {
        double mn = std::numeric_limits<double>::infinity();
        for (PointIndex x : basis.ball(static_cast<BallId>(bi)).members().members())
            mn = std::min(mn, f[x]);
        out[bi] = mn;
    });
    return out;
}

MaximalResult standard_maximal(const ScalarField& f, const BallBasis& basis) {
    if (f.space_ptr() != basis.space_ptr())
        throw std::invalid_argument("standard_maximal: field lives on a different space");
    std::vector<double> avg = per_ball_abs_averages(basis, f);
    return sup_over_families(f, avg,
                             [&](PointIndex x) { return basis.balls_containing(x); });
}

MaximalResult kb_maximal(const ScalarField& f, const KBCouple& couple) {
    if (!couple.basis || !couple.kernels) throw std::invalid_argument("kb_maximal: empty couple");
    const BallBasis& basis = *couple.basis;
    if (f.space_ptr() != basis.space_ptr())
        throw std::invalid_argument("kb_maximal: field lives on a different space");
    for (std::size_t x = 0; x < basis.space().size(); ++x)
        for (BallId b : basis.family_of(static_cast<PointIndex>(x)))
            if (!couple.kernels->has_kernel(b))
                throw std::invalid_argument("kb_maximal: family references a ball without kernel");
    std::vector<double> avg = kernel_ball_averages(f, basis, *couple.kernels);
    return sup_over_families(f, avg, [&](PointIndex x) { return basis.family_of(x); });
}

MaximalResult convolution_maximal(const ScalarField& f, const BallBasis& grid,
                                  const KernelStructure& kernels, BallBasis::Mode mode) {
    if (grid.family() != BallBasis::Family::grid)
        throw std::invalid_argument("convolution_maximal: needs a grid basis");
    if (f.space_ptr() != grid.space_ptr())
        throw std::invalid_argument("convolution_maximal: field lives on a different space");
    std::vector<double> avg = kernel_ball_averages(f, grid, kernels);
    const std::size_t N = grid.space().size();
    if (mode == BallBasis::Mode::uncentered)
        return sup_over_families(f, avg,
                                 [&](PointIndex x) { return grid.balls_containing(x); });
    // centered: the grid layout is radius-major, so the family of x is
    // {(r-1)·N + x : r}
    const std::size_t radii = grid.ball_count() / N;
    std::vector<double> vals(N, 0.0);
    std::vector<BallId> argmax(N, -1);
    parallel_for(N, [&](std::size_t x) {
        double best = 0;
        BallId arg = -1;
        for (std::size_t r = 0; r < radii; ++r) {
            BallId b = static_cast<BallId>(r * N + x);
            if (!kernels.has_kernel(b)) continue;
            double v = avg[static_cast<std::size_t>(b)];
            if (arg < 0 || v > best) {
                best = v;
                arg = b;
            }
        }
        vals[x] = arg >= 0 ? best : 0.0;
        argmax[x] = arg;
    });
    return {ScalarField(f.space_ptr(), std::move(vals)), std::move(argmax)};
}

MaximalResult dyadic_weighted_maximal(const ScalarField& f, const BallBasis& dyadic,
                                      const KernelStructure& kernels) {
    if (dyadic.family() != BallBasis::Family::dyadic)
        throw std::invalid_argument("dyadic_weighted_maximal: needs the dyadic basis");
    KBCouple couple{&dyadic, &kernels};
    return kb_maximal(f, couple);  // the chain is exactly the family of x
}

MaximalResult fejer_maximal(const ScalarField& f, const BallBasis& circle,
                            const KernelStructure& kernels) {
    if (circle.family() != BallBasis::Family::grid || circle.grid_d() != 1)
        throw std::invalid_argument("fejer_maximal: needs the circle grid");
    if (f.space_ptr() != circle.space_ptr())
        throw std::invalid_argument("fejer_maximal: field lives on a different space");
    std::vector<double> avg = kernel_ball_averages(f, circle, kernels);
    const std::size_t N = circle.space().size();
    // kernels sit on centered arcs: one per (degree, center)
    std::vector<std::vector<BallId>> fam(N);
    for (BallId b : kernels.kernel_balls())
        fam[static_cast<std::size_t>(circle.ball(b).geometry().cx)].push_back(b);
    return sup_over_families(f, avg,
                             [&](PointIndex x) -> std::span<const BallId> {
                                 return fam[static_cast<std::size_t>(x)];
                             });
}

}  // namespace ballcalc
