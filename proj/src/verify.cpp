#include "ballcalc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ballcalc/csv.hpp"
#include "ballcalc/maximal.hpp"
#include "ballcalc/parallel.hpp"

namespace ballcalc {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double log2_of(double x) { return std::log(x) / kLn2; }

std::string basis_descriptor(const BallBasis& basis) {
    std::ostringstream out;
    switch (basis.family()) {
        case BallBasis::Family::dyadic:
            out << "dyadic:L=" << basis.tree_levels();
            break;
        case BallBasis::Family::grid:
            out << "grid:d=" << basis.grid_d() << ",n=" << basis.grid_n()
                << (basis.grid_shape_ball() ? ",ball" : ",cube")
                << (basis.mode() == BallBasis::Mode::centered ? ",centered" : ",uncentered");
            break;
        case BallBasis::Family::martingale:
            out << "martingale:levels=" << basis.tree_levels()
                << ",balls=" << basis.ball_count();
            break;
        default:
            out << "custom:balls=" << basis.ball_count();
    }
    return out.str();
}

}  // namespace

std::vector<CorpusField> corpus_standard(const BallBasis& basis, std::uint64_t seed) {
    const auto& space = basis.space_ptr();
    const std::size_t n = space->size();
    std::vector<CorpusField> out;

    auto push = [&](std::string name, std::string desc, std::vector<double> vals) {
        out.push_back({std::move(name), std::move(desc), ScalarField(space, std::move(vals))});
    };

    push("const_one", "constant 1", std::vector<double>(n, 1.0));

    {
        std::vector<double> v(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (space->cumulative_position(static_cast<PointIndex>(i)) < 0.5) v[i] = 1.0;
        push("half_indicator", "indicator of the lower half", std::move(v));
    }

    {
        // log(1/dist) from the anchor point, clamped at half a cell
        std::vector<double> v(n);
        double min_cell = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            min_cell = std::min(min_cell, space->weight(static_cast<PointIndex>(i)));
        min_cell /= space->total_measure();
        const bool planar = space->coord_dim() == 2;
        double ax = 0, ay = 0;
        if (planar) {
            ax = space->coord(0)[0];
            ay = space->coord(0)[1];
        }
        double u0 = space->cumulative_position(0);
        for (std::size_t i = 0; i < n; ++i) {
            double dist;
            if (planar) {
                double dx = std::abs(space->coord(static_cast<PointIndex>(i))[0] - ax);
                double dy = std::abs(space->coord(static_cast<PointIndex>(i))[1] - ay);
                dx = std::min(dx, 1 - dx);
                dy = std::min(dy, 1 - dy);
                dist = std::sqrt(dx * dx + dy * dy);
            } else {
                double du = std::abs(space->cumulative_position(static_cast<PointIndex>(i)) - u0);
                dist = std::min(du, 1 - du);
            }
            v[i] = std::log(1.0 / std::max(dist, min_cell / 2));
        }
        push("log_singularity", "discretized log(1/|x|)", std::move(v));
    }

    {
        std::mt19937_64 rng(seed);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = (rng() & 1) ? 1.0 : -1.0;
        push("rademacher", "random leaf signs, seed " + std::to_string(seed), std::move(v));
    }

    {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            double u = space->cumulative_position(static_cast<PointIndex>(i)) * 4.0;
            v[i] = (u - std::floor(u)) - 0.5;
        }
        push("sawtooth4", "sawtooth, 4 periods", std::move(v));
    }

    {
        std::vector<double> v(n, 0.0);
        v[0] = 1.0 / space->weight(0);  // unit L1 mass
        push("spike", "unit point mass at 0", std::move(v));
    }

    return out;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

void Report::write_csv(std::ostream& out) const {
    csv::write_row(out, columns);
    for (const Row& r : rows) {
        std::vector<std::string> fields(r.keys);
        for (double v : r.values) fields.push_back(csv::fmt(v));
        csv::write_row(out, fields);
    }
}

void Report::write_summary_rows(std::ostream& out) const {
    auto row = [&](const std::string& key, const std::string& value, const std::string& wit) {
        csv::write_row(out, std::vector<std::string>{name, key, value, wit});
    };
    row(aggregate_name, csv::fmt(aggregate), witness);
    for (const auto& [k, v] : extras) row(k, csv::fmt(v), "");
    for (const auto& [k, v] : config) row("config." + k, v, "");
    row("rows", std::to_string(rows.size()), "");
    row("invariants_ok", invariants_ok ? "1" : "0", failure);
}

namespace {

void fold_row_max(Report& rep, double value, const std::string& wit) {
    if (!(value <= rep.aggregate)) {  // NaN aggregate starts everything
        if (std::isnan(rep.aggregate) || value > rep.aggregate) {
            rep.aggregate = value;
            rep.witness = wit;
        }
    }
}

/// Any non-finite row value disqualifies the run.
void require_finite_rows(Report& rep) {
    for (const auto& r : rep.rows)
        for (double v : r.values)
            if (!std::isfinite(v)) {
                rep.invariants_ok = false;
                rep.failure = "non-finite row value";
                return;
            }
}

}  // namespace

// ---------------------------------------------------------------------------
// Oscillation-ratio experiments
// ---------------------------------------------------------------------------

Report exp_t2_ratio(const KBCouple& couple, const std::vector<CorpusField>& corpus, double alpha) {
    if (!couple.complete())
        throw std::invalid_argument("exp_t2_ratio: couple is incomplete (validate first)");
    if (couple.kernels->i_omega_value().divergent)
        throw std::invalid_argument("exp_t2_ratio: I(omega) diverges");
    if (!(alpha > 0) || !(alpha < 1)) throw std::invalid_argument("exp_t2_ratio: alpha in (0,1)");
    const BallBasis& basis = *couple.basis;
    const double iw = couple.kernels->i_omega_value().value;

    Report rep;
    rep.name = "t2-ratio";
    rep.columns = {"field", "ball", "losc", "starred_sharp", "ratio"};
    rep.aggregate_name = "max_ratio";
    rep.config.emplace_back("basis", basis_descriptor(basis));
    rep.config.emplace_back("kernel", couple.kernels->family());
    rep.config.emplace_back("alpha", csv::fmt(alpha));
    rep.extras.emplace_back("i_omega", iw);

    rep.aggregate = 0;
    for (const CorpusField& cf : corpus) {
        MaximalResult mf = kb_maximal(cf.field, couple);
        std::vector<double> losc = norm(mf.values, basis, NormKind::blo_alpha, alpha, true).per_ball;
        std::vector<double> ss = sup_over_superballs(basis, sharp_all(basis, cf.field));
        for (std::size_t bi = 0; bi < basis.ball_count(); ++bi) {
            if (!(ss[bi] > 0)) continue;
            double ratio = losc[bi] * (1 - alpha) / (iw * ss[bi]);
            rep.rows.push_back({{cf.name, std::to_string(bi)}, {losc[bi], ss[bi], ratio}});
            fold_row_max(rep, ratio, cf.name + "/ball " + std::to_string(bi));
        }
    }
    require_finite_rows(rep);
    if (!std::isfinite(rep.aggregate)) {
        rep.invariants_ok = false;
        rep.failure = "aggregate not finite";
    }
    return rep;
}

Report exp_bmo_blo(const KBCouple& couple, const std::vector<CorpusField>& corpus) {
    if (!couple.complete())
        throw std::invalid_argument("exp_bmo_blo: couple is incomplete (validate first)");
    if (couple.kernels->i_omega_value().divergent)
        throw std::invalid_argument("exp_bmo_blo: I(omega) diverges");
    const BallBasis& basis = *couple.basis;
    const double iw = couple.kernels->i_omega_value().value;

    Report rep;
    rep.name = "bmo-blo";
    rep.columns = {"field", "bmo_f", "blo_mf", "ratio"};
    rep.config.emplace_back("basis", basis_descriptor(basis));
    rep.config.emplace_back("kernel", couple.kernels->family());
    rep.extras.emplace_back("i_omega", iw);

    rep.aggregate = 0;
    std::string excluded;
    for (const CorpusField& cf : corpus) {
        double bmo = norm(cf.field, basis, NormKind::bmo).value;
        if (!(bmo > 0)) {
            excluded += excluded.empty() ? cf.name : "," + cf.name;
            continue;
        }
        MaximalResult mf = kb_maximal(cf.field, couple);
        double blo = norm(mf.values, basis, NormKind::blo).value;
        double ratio = blo / (iw * bmo);
        rep.rows.push_back({{cf.name}, {bmo, blo, ratio}});
        fold_row_max(rep, ratio, cf.name);
    }
    rep.config.emplace_back("excluded_zero_bmo", excluded.empty() ? "-" : excluded);
    require_finite_rows(rep);
    if (!std::isfinite(rep.aggregate)) {
        rep.invariants_ok = false;
        rep.failure = "aggregate not finite";
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Proposition-P decay
// ---------------------------------------------------------------------------

namespace {

/// Per-ball sorted |f - f_B| with suffix masses, flattened.
struct DeviationTable {
    std::vector<std::size_t> offset;  // ball -> start; size count+1
    std::vector<double> value;        // ascending within a ball
    std::vector<double> sufmass;      // mass of entries at index >= i within the ball

    double mass_above(std::size_t bi, double lambda) const {
        std::size_t lo = offset[bi], hi = offset[bi + 1];
        auto it = std::upper_bound(value.begin() + static_cast<long>(lo),
                                   value.begin() + static_cast<long>(hi), lambda);
        std::size_t idx = static_cast<std::size_t>(it - value.begin());
        return idx == hi ? 0.0 : sufmass[idx];
    }

    /// Smallest jump value v with mass_above(v) <= tau (0 when already below).
    double threshold_level(std::size_t bi, double tau) const {
        std::size_t lo = offset[bi], hi = offset[bi + 1];
        // find the last index whose suffix mass exceeds tau
        double level = 0;
        for (std::size_t i = hi; i-- > lo;) {
            if (sufmass[i] > tau) {
                level = value[i];
                break;
            }
            if (i == lo) return 0;
        }
        return level;
    }
};

DeviationTable build_deviation_table(const BallBasis& basis, const ScalarField& f) {
    DeviationTable t;
    const std::size_t count = basis.ball_count();
    t.offset.assign(count + 1, 0);
    for (std::size_t bi = 0; bi < count; ++bi)
        t.offset[bi + 1] = t.offset[bi] + basis.ball(static_cast<BallId>(bi)).members().size();
    t.value.assign(t.offset.back(), 0.0);
    t.sufmass.assign(t.offset.back(), 0.0);
    std::vector<double> means = per_ball_averages(basis, f);
    parallel_for(count, [&](std::size_t bi) {
        const Ball& B = basis.ball(static_cast<BallId>(bi));
        std::size_t lo = t.offset[bi];
        std::vector<std::pair<double, double>> vw;  // (|f-f_B|, w)
        vw.reserve(B.members().size());
        for (PointIndex x : B.members().members())
            vw.emplace_back(std::abs(f[x] - means[bi]), f.space().weight(x));
        std::sort(vw.begin(), vw.end());
        double suf = 0;
        for (std::size_t i = vw.size(); i-- > 0;) {
            t.value[lo + i] = vw[i].first;
            suf += vw[i].second;
            t.sufmass[lo + i] = suf;
        }
    });
    return t;
}

/// Worst successive level-set mass ratio past the threshold; short-circuits
/// above `bail` when bail is finite.
double worst_decay_ratio(const DeviationTable& t, const BallBasis& basis, std::size_t bi,
                         double step, double tau, double bail) {
    double lambda_star = t.threshold_level(bi, tau);
    std::size_t n0 = lambda_star == 0 ? 1
                                      : static_cast<std::size_t>(std::ceil(lambda_star / step));
    while (n0 > 1 && t.mass_above(bi, static_cast<double>(n0 - 1) * step) <= tau) --n0;
    while (t.mass_above(bi, static_cast<double>(n0) * step) > tau) ++n0;
    double worst = 0;
    double prev = t.mass_above(bi, static_cast<double>(n0) * step);
    for (std::size_t n = n0; prev > 0; ++n) {
        double next = t.mass_above(bi, static_cast<double>(n + 1) * step);
        worst = std::max(worst, next / prev);
        if (worst > bail) return worst;
        prev = next;
    }
    (void)basis;
    return worst;
}

double fit_slope(std::span<const double> xs, std::span<const double> ys) {
    double n = static_cast<double>(xs.size());
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

Report exp_prop_p_decay(const BallBasis& basis, const std::vector<CorpusField>& corpus,
                        double alpha, double epsilon) {
    if (!(alpha > 0) || !(alpha < 1))
        throw std::invalid_argument("exp_prop_p_decay: alpha in (0,1)");
    if (!(epsilon > 0) || !(epsilon < 1))
        throw std::invalid_argument("exp_prop_p_decay: epsilon in (0,1)");

    // measured basis constants
    ValidateOptions vo;
    vo.b2 = vo.b4 = vo.doubling = vo.basis_structure = false;
    BasisValidation reg = validate_axioms(basis, vo);
    double theta = reg.find("regularity")->measured;
    if (!(theta > 0)) throw std::invalid_argument("exp_prop_p_decay: regularity fails (theta = 0)");
    double hull_k = 0;
    for (const Ball& b : basis.balls())
        hull_k = std::max(hull_k, basis.hull(b.id()).measure() / b.measure());
    double beta = measured_beta(basis);
    double tau_frac = theta / (5 * hull_k * beta * beta);
    double alpha_x74 = 1 - epsilon * theta / (4 * beta * beta * hull_k);

    Report rep;
    rep.name = "prop-p";
    rep.columns = {"field", "ball", "worst_ratio"};
    rep.aggregate_name = "max_decay_ratio";
    rep.config.emplace_back("basis", basis_descriptor(basis));
    rep.config.emplace_back("alpha", csv::fmt(alpha));
    rep.config.emplace_back("epsilon", csv::fmt(epsilon));
    rep.extras.emplace_back("theta", theta);
    rep.extras.emplace_back("hull_K", hull_k);
    rep.extras.emplace_back("beta", beta);
    rep.extras.emplace_back("tau_fraction", tau_frac);
    rep.extras.emplace_back("alpha_x74", alpha_x74);

    const std::size_t count = basis.ball_count();
    struct FieldData {
        const CorpusField* cf;
        double bmo_alpha;
        DeviationTable table;
    };
    std::vector<FieldData> data;
    for (const CorpusField& cf : corpus) {
        double s = norm(cf.field, basis, NormKind::bmo_alpha, alpha).value;
        if (!(s > 0)) continue;
        data.push_back({&cf, s, build_deviation_table(basis, cf.field)});
    }

    // calibrate: smallest step factor on a geometric grid whose worst
    // successive ratio stays within epsilon, swept from above
    double calibrated = std::numeric_limits<double>::quiet_NaN();
    for (int k = 20; k >= -12; --k) {
        double c = std::pow(2.0, k / 4.0);
        bool ok = true;
        for (const FieldData& fd : data) {
            std::vector<double> taus(count);
            std::vector<char> bad(count, 0);
            parallel_for(count, [&](std::size_t bi) {
                double tau = tau_frac * basis.ball(static_cast<BallId>(bi)).measure();
                double worst =
                    worst_decay_ratio(fd.table, basis, bi, c * fd.bmo_alpha, tau, epsilon);
                bad[bi] = worst > epsilon;
            });
            for (std::size_t bi = 0; bi < count && ok; ++bi)
                if (bad[bi]) ok = false;
            if (!ok) break;
        }
        if (ok) calibrated = c;
        else break;
    }
    if (std::isnan(calibrated)) {
        rep.invariants_ok = false;
        rep.failure = "no step factor up to 2^5 achieves the decay ratio";
        calibrated = std::pow(2.0, 5.0);
    }
    rep.extras.emplace_back("c_calibrated", calibrated);

    rep.aggregate = 0;
    const double inf = std::numeric_limits<double>::infinity();
    for (const FieldData& fd : data) {
        std::vector<double> worst(count);
        parallel_for(count, [&](std::size_t bi) {
            double tau = tau_frac * basis.ball(static_cast<BallId>(bi)).measure();
            worst[bi] = worst_decay_ratio(fd.table, basis, bi, calibrated * fd.bmo_alpha, tau, inf);
        });
        for (std::size_t bi = 0; bi < count; ++bi) {
            if (worst[bi] == 0) continue;  // nothing left past the threshold
            rep.rows.push_back({{fd.cf->name, std::to_string(bi)}, {worst[bi]}});
            fold_row_max(rep, worst[bi], fd.cf->name + "/ball " + std::to_string(bi));
        }
        // exponential tail: least squares of -ln(mass) against lambda on the
        // whole-space ball
        if (auto ws = basis.whole_space_ball()) {
            std::size_t bi = static_cast<std::size_t>(*ws);
            std::vector<double> xs, ys;
            double step = calibrated * fd.bmo_alpha;
            for (std::size_t n = 1;; ++n) {
                double m = fd.table.mass_above(bi, static_cast<double>(n) * step);
                if (m <= 0) break;
                xs.push_back(static_cast<double>(n) * step);
                ys.push_back(-std::log(m));
            }
            rep.extras.emplace_back("slope." + fd.cf->name, fit_slope(xs, ys));
        }
    }
    require_finite_rows(rep);
    if (rep.aggregate > epsilon) {
        rep.invariants_ok = false;
        rep.failure = "decay ratio exceeds epsilon at the calibrated step";
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Norm equivalence, lemma constants, weak-L1
// ---------------------------------------------------------------------------

Report exp_norm_equivalence(const BallBasis& basis, const std::vector<CorpusField>& corpus,
                            double alpha) {
    if (!(alpha > 0.5) || !(alpha < 1))
        throw std::invalid_argument("exp_norm_equivalence: alpha must lie in (1/2, 1)");

    Report rep;
    rep.name = "norm-equiv";
    rep.columns = {"field", "kind", "plain", "alpha_version", "ratio"};
    rep.config.emplace_back("basis", basis_descriptor(basis));
    rep.config.emplace_back("alpha", csv::fmt(alpha));

    rep.aggregate = 0;
    double mn = std::numeric_limits<double>::infinity();
    std::string mn_wit;
    std::string degenerate;
    long degenerate_count = 0;
    for (const CorpusField& cf : corpus) {
        double bmo = norm(cf.field, basis, NormKind::bmo).value;
        if (!(bmo > 0)) continue;  // constants are 0/0
        double blo = norm(cf.field, basis, NormKind::blo).value;
        double bmo_a = norm(cf.field, basis, NormKind::bmo_alpha, alpha).value;
        double blo_a = norm(cf.field, basis, NormKind::blo_alpha, alpha).value;
        auto emit = [&](const char* kind, double plain, double alpha_version) {
            // a vanishing alpha-norm against a positive plain norm marks a
            // non-admissible alpha for this family (atoms escape every
            // window); no ratio exists there
            if (!(alpha_version > 0)) {
                ++degenerate_count;
                degenerate += (degenerate.empty() ? "" : ",") + cf.name + "/" + kind;
                return;
            }
            double r = plain / alpha_version;
            rep.rows.push_back({{cf.name, kind}, {plain, alpha_version, r}});
            fold_row_max(rep, r, cf.name + "/" + kind);
            if (r < mn) {
                mn = r;
                mn_wit = cf.name + "/" + kind;
            }
        };
        emit("bmo", bmo, bmo_a);
        emit("blo", blo, blo_a);
    }
    rep.extras.emplace_back("degenerate_rows", static_cast<double>(degenerate_count));
    rep.config.emplace_back("degenerate_alpha_norms", degenerate.empty() ? "-" : degenerate);
    rep.extras.emplace_back("min_ratio", mn);
    double band = std::max(rep.aggregate, 1.0 / mn);
    rep.extras.emplace_back("band_constant", band);
    require_finite_rows(rep);
    if (rep.rows.empty() || !std::isfinite(rep.aggregate) || !(mn > 0) || !std::isfinite(band)) {
        rep.invariants_ok = false;
        rep.failure = "ratios not bounded away from 0 and infinity";
    }
    return rep;
}

namespace {

struct PairSample {
    std::vector<std::pair<BallId, BallId>> pairs;  // (A, B)
    bool exhaustive = true;
};

/// Pairs satisfying `ok(A,B)` with mu(A) <= mu(B): exhaustive when the
/// family is small, otherwise seeded uniform rejection sampling.
template <class Ok>
PairSample sample_pairs(const BallBasis& basis, std::span<const BallId> pool, std::uint64_t seed,
                        std::size_t want, const Ok& ok) {
    PairSample out;
    const std::size_t m = pool.size();
    if (m * m <= 100000) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                BallId a = pool[i], b = pool[j];
                if (basis.ball(a).measure() > basis.ball(b).measure()) continue;
                if (ok(a, b)) out.pairs.emplace_back(a, b);
            }
        return out;
    }
    out.exhaustive = false;
    std::mt19937_64 rng(seed);
    std::size_t attempts = 0;
    while (out.pairs.size() < want && attempts < 2000000) {
        ++attempts;
        BallId a = pool[rng() % m];
        BallId b = pool[rng() % m];
        if (basis.ball(a).measure() > basis.ball(b).measure()) std::swap(a, b);
        if (ok(a, b)) out.pairs.emplace_back(a, b);
    }
    return out;
}

}  // namespace

Report exp_lemma_inequalities(const KBCouple& couple, const std::vector<CorpusField>& corpus,
                              std::uint64_t seed) {
    if (!couple.complete())
        throw std::invalid_argument("exp_lemma_inequalities: couple is incomplete");
    const BallBasis& basis = *couple.basis;
    const KernelStructure& ks = *couple.kernels;
    const double iw = ks.i_omega_value().value;

    Report rep;
    rep.name = "lemmas";
    rep.columns = {"lemma", "field", "max_ratio"};
    rep.config.emplace_back("basis", basis_descriptor(basis));
    rep.config.emplace_back("kernel", ks.family());
    rep.config.emplace_back("seed", std::to_string(seed));

    std::vector<BallId> all(basis.ball_count());
    std::iota(all.begin(), all.end(), 0);

    PairSample touching = sample_pairs(basis, all, seed, 20000, [&](BallId a, BallId b) {
        return basis.balls_intersect(a, b);
    });
    PairSample nested = sample_pairs(basis, all, seed + 1, 20000, [&](BallId a, BallId b) {
        return basis.ball_contains(b, a);
    });
    auto kballs = ks.kernel_balls();
    PairSample knested = sample_pairs(basis, kballs, seed + 2, 2000, [&](BallId a, BallId b) {
        return basis.ball_contains(b, a);
    });
    rep.extras.emplace_back("pairs_touching", static_cast<double>(touching.pairs.size()));
    rep.extras.emplace_back("pairs_nested", static_cast<double>(nested.pairs.size()));
    rep.extras.emplace_back("pairs_kernel_nested", static_cast<double>(knested.pairs.size()));
    rep.config.emplace_back("sampling", touching.exhaustive ? "exhaustive" : "sampled");

    rep.aggregate = 0;
    for (const CorpusField& cf : corpus) {
        const ScalarField& f = cf.field;
        std::vector<double> means = per_ball_averages(basis, f);
        std::vector<double> ss = sup_over_superballs(basis, sharp_all(basis, f));

        // |f_A - f_B| <= C (mu(B)/mu(A)) <f>*_{#,A}
        double worst = 0;
        for (auto [a, b] : touching.pairs) {
            std::size_t ai = static_cast<std::size_t>(a), bi = static_cast<std::size_t>(b);
            if (!(ss[ai] > 0)) continue;
            double bound = basis.ball(b).measure() / basis.ball(a).measure() * ss[ai];
            worst = std::max(worst, std::abs(means[ai] - means[bi]) / bound);
        }
        rep.rows.push_back({{"two-ball-average", cf.name}, {worst}});
        fold_row_max(rep, worst, "two-ball-average/" + cf.name);

        // <f - f_A>_B <= C (1 + log2(mu(B)/mu(A))) <f>*_{#,A}
        worst = 0;
        for (auto [a, b] : nested.pairs) {
            std::size_t ai = static_cast<std::size_t>(a);
            if (!(ss[ai] > 0)) continue;
            const Ball& B = basis.ball(b);
            double acc = 0;
            for (PointIndex x : B.members().members())
                acc += std::abs(f[x] - means[ai]) * f.space().weight(x);
            acc /= B.measure();
            double logterm = 1 + log2_of(B.measure() / basis.ball(a).measure());
            worst = std::max(worst, acc / (logterm * ss[ai]));
        }
        rep.rows.push_back({{"nested-log", cf.name}, {worst}});
        fold_row_max(rep, worst, "nested-log/" + cf.name);

        // <f - f_{phi_A}>_{phi_B} <= C I(w) (1 + log2(mu(B)/mu(A))) <f>*_{#,A}
        worst = 0;
        std::vector<double> scratch(f.size());
        for (auto [a, b] : knested.pairs) {
            std::size_t ai = static_cast<std::size_t>(a);
            if (!(ss[ai] > 0)) continue;
            double fa = ks.integral_against(a, f.values(), basis);  // signed kernel average
            for (std::size_t x = 0; x < f.size(); ++x)
                scratch[x] = std::abs(f.values()[x] - fa);
            double lhs = ks.integral_against(b, scratch, basis);
            double logterm =
                1 + log2_of(basis.ball(b).measure() / basis.ball(a).measure());
            worst = std::max(worst, lhs / (iw * logterm * ss[ai]));
        }
        rep.rows.push_back({{"kernel-nested-log", cf.name}, {worst}});
        fold_row_max(rep, worst, "kernel-nested-log/" + cf.name);
    }
    require_finite_rows(rep);
    if (!std::isfinite(rep.aggregate)) {
        rep.invariants_ok = false;
        rep.failure = "aggregate not finite";
    }
    return rep;
}

Report exp_weak_l1(const BallBasis& basis, const std::vector<CorpusField>& corpus) {
    Report rep;
    rep.name = "weak-l1";
    rep.columns = {"field", "l1", "weak_constant"};
    rep.config.emplace_back("basis", basis_descriptor(basis));

    rep.aggregate = 0;
    for (const CorpusField& cf : corpus) {
        double l1 = lp_norm(cf.field, 1.0);
        if (!(l1 > 0)) continue;
        MaximalResult mf = standard_maximal(cf.field, basis);
        double constant = weak_lp_norm(mf.values, 1.0) / l1;
        rep.rows.push_back({{cf.name}, {l1, constant}});
        fold_row_max(rep, constant, cf.name);
    }
    require_finite_rows(rep);
    if (!std::isfinite(rep.aggregate)) {
        rep.invariants_ok = false;
        rep.failure = "aggregate not finite";
    }
    return rep;
}

}  // namespace ballcalc
