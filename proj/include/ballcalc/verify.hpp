#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ballcalc/basis.hpp"
#include "ballcalc/functional.hpp"
#include "ballcalc/kernel.hpp"
#include "ballcalc/space.hpp"

namespace ballcalc {

struct CorpusField {
    std::string name;
    std::string descriptor;
    ScalarField field;
};

/// Named test fields with known oscillation behavior: a constant, a half-
/// space indicator, the discretized log singularity, seeded random signs,
/// a sawtooth, and a unit point mass. Reproducible from the seed.
std::vector<CorpusField> corpus_standard(const BallBasis& basis, std::uint64_t seed);

/// Experiment output: keyed rows of measured scalars, one aggregate with a
/// witness, named extra scalars, and a config echo. Rows are assembled in
/// canonical (field, ball) order so reruns are byte-identical.
struct Report {
    std::string name;
    std::vector<std::string> columns;  // key columns then value columns
    struct Row {
        std::vector<std::string> keys;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    std::string aggregate_name = "max_ratio";
    double aggregate = std::numeric_limits<double>::quiet_NaN();
    std::string witness;
    std::vector<std::pair<std::string, double>> extras;
    std::vector<std::pair<std::string, std::string>> config;
    bool invariants_ok = true;
    std::string failure;

    void write_csv(std::ostream& out) const;
    /// Rows for summary.csv: experiment,key,value,witness.
    void write_summary_rows(std::ostream& out) const;
};

/// Per ball B and field f: LOSC_{B,α}(M_G f)·(1-α) / (I(ω)·⟨f⟩*_{#,B}).
/// Rows only where the starred sharp is positive (constants produce none).
Report exp_t2_ratio(const KBCouple& couple, const std::vector<CorpusField>& corpus, double alpha);

/// Per field with BMO(f) > 0: BLO(M_G f) / (I(ω)·BMO(f)).
Report exp_bmo_blo(const KBCouple& couple, const std::vector<CorpusField>& corpus);

/// Level-set decay of f - f_B at steps of c·BMO_α(f) beyond the threshold
/// θ/(5Kβ²)·μ(B), with θ, K, β measured on the basis. The step factor c is
/// calibrated (smallest grid value whose worst successive ratio is ≤ ε) and
/// reported along with the constants and exponential-fit slopes.
Report exp_prop_p_decay(const BallBasis& basis, const std::vector<CorpusField>& corpus,
                        double alpha, double epsilon);

/// BMO/BMO_α and BLO/BLO_α per non-constant field; aggregate max and min.
Report exp_norm_equivalence(const BallBasis& basis, const std::vector<CorpusField>& corpus,
                            double alpha);

/// Empirical constants of the two-ball average comparison, the nested
/// log-comparison, and its kernel version; exhaustive on small families,
/// seeded uniform sampling on large ones.
Report exp_lemma_inequalities(const KBCouple& couple, const std::vector<CorpusField>& corpus,
                              std::uint64_t seed);

/// sup_λ λ·μ{Mf > λ}/‖f‖₁ per field on the standard maximal function.
Report exp_weak_l1(const BallBasis& basis, const std::vector<CorpusField>& corpus);

}  // namespace ballcalc
