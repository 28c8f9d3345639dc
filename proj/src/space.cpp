#include "ballcalc/space.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ballcalc/csv.hpp"

namespace ballcalc {

MeasureSpace::MeasureSpace(std::vector<double> weights, std::vector<double> coords,
                           int coord_dim)
    : weights_(std::move(weights)), coords_(std::move(coords)), coord_dim_(coord_dim) {
    if (weights_.empty()) throw std::invalid_argument("MeasureSpace: needs at least one point");
    for (double w : weights_) {
        if (!(w > 0) || !std::isfinite(w))
            throw std::invalid_argument("MeasureSpace: weights must be positive and finite");
    }
    if (coord_dim_ < 0 || (coord_dim_ == 0 && !coords_.empty()) ||
        (coord_dim_ > 0 && coords_.size() != weights_.size() * static_cast<std::size_t>(coord_dim_)))
        throw std::invalid_argument("MeasureSpace: coords size mismatch");
    cumpos_.resize(weights_.size());
    double acc = 0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        cumpos_[i] = acc + weights_[i] / 2;
        acc += weights_[i];
    }
    total_ = acc;
    if (!(total_ > 0) || !std::isfinite(total_))
        throw std::invalid_argument("MeasureSpace: total measure must be finite and positive");
    for (double& p : cumpos_) p /= total_;
}

MeasureSpace MeasureSpace::uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("MeasureSpace::uniform: n must be >= 1");
    return MeasureSpace(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

std::span<const double> MeasureSpace::coord(PointIndex i) const {
    if (coord_dim_ == 0) return {};
    return std::span<const double>(coords_).subspan(
        static_cast<std::size_t>(i) * static_cast<std::size_t>(coord_dim_),
        static_cast<std::size_t>(coord_dim_));
}

PointSet::PointSet(std::vector<PointIndex> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    if (!members_.empty() && members_.front() < 0)
        throw std::out_of_range("PointSet: negative point index");
}

PointSet::PointSet(std::initializer_list<PointIndex> members)
    : PointSet(std::vector<PointIndex>(members)) {}

PointSet PointSet::all(std::size_t n) {
    std::vector<PointIndex> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = static_cast<PointIndex>(i);
    return PointSet(std::move(m));
}

bool PointSet::contains(PointIndex i) const {
    return std::binary_search(members_.begin(), members_.end(), i);
}

ScalarField::ScalarField(std::shared_ptr<const MeasureSpace> space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw std::invalid_argument("ScalarField: null space");
    if (values_.size() != space_->size())
        throw std::invalid_argument("ScalarField: value count != point count");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("ScalarField: values must be finite");
}

double measure(const MeasureSpace& s, const PointSet& e) {
    double acc = 0;
    for (PointIndex i : e.members()) {
        if (static_cast<std::size_t>(i) >= s.size())
            throw std::out_of_range("measure: point index out of range");
        acc += s.weight(i);
    }
    return acc;
}

double integrate(const ScalarField& f, const PointSet& e) {
    const MeasureSpace& s = f.space();
    double acc = 0;
    for (PointIndex i : e.members()) {
        if (static_cast<std::size_t>(i) >= s.size())
            throw std::out_of_range("integrate: point index out of range");
        acc += f[i] * s.weight(i);
    }
    return acc;
}

double integrate(const ScalarField& f) {
    double acc = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        acc += f.values()[i] * f.space().weight(static_cast<PointIndex>(i));
    return acc;
}

double distribution(const ScalarField& f, double t, const PointSet& e) {
    double acc = 0;
    for (PointIndex i : e.members())
        if (std::abs(f[i]) > t) acc += f.space().weight(i);
    return acc;
}

double distribution(const ScalarField& f, double t) {
    return distribution(f, t, PointSet::all(f.size()));
}

double DistributionSteps::lambda(double t) const {
    // λ(t) = μ{|f| > t}: total mass below the first step, then the stored
    // strict-tail masses.
    if (values.empty() || t < values.front()) return total_mass;
    auto it = std::upper_bound(values.begin(), values.end(), t);
    // t >= values.front(): the last value <= t determines the strict tail.
    std::size_t idx = static_cast<std::size_t>(it - values.begin()) - 1;
    return tail_mass[idx];
}

DistributionSteps distribution_steps(const ScalarField& f, const PointSet& e) {
    std::vector<std::pair<double, double>> vw;  // (|value|, weight)
    vw.reserve(e.size());
    for (PointIndex i : e.members()) vw.emplace_back(std::abs(f[i]), f.space().weight(i));
    std::sort(vw.begin(), vw.end());
    DistributionSteps out;
    double total = 0;
    for (auto& [v, w] : vw) total += w;
    out.total_mass = total;
    // Walk ascending, collapsing equal values; tail mass after value v is
    // total minus the cumulative mass up to and including v.
    double cum = 0;
    for (std::size_t i = 0; i < vw.size();) {
        double v = vw[i].first;
        double mass_at = 0;
        while (i < vw.size() && vw[i].first == v) {
            mass_at += vw[i].second;
            ++i;
        }
        cum += mass_at;
        out.values.push_back(v);
        out.tail_mass.push_back(total - cum);
    }
    return out;
}

DistributionSteps distribution_steps(const ScalarField& f) {
    return distribution_steps(f, PointSet::all(f.size()));
}

namespace {

double lp_norm_direct(const ScalarField& f, double p, const PointSet& e) {
    double acc = 0;
    for (PointIndex i : e.members())
        acc += std::pow(std::abs(f[i]), p) * f.space().weight(i);
    return std::pow(acc, 1.0 / p);
}

// ‖f‖_p^p = p ∫_0^∞ t^{p-1} λ(t) dt. λ is a right-continuous step function
// constant on [v_i, v_{i+1}), so each piece integrates to
// λ_i (v_{i+1}^p − v_i^p) exactly.
double lp_norm_distribution(const DistributionSteps& steps, double p) {
    double acc = 0;
    double prev = 0;
    double lambda_before = steps.total_mass;  // λ on [0, v_0)
    for (std::size_t i = 0; i < steps.values.size(); ++i) {
        double v = steps.values[i];
        acc += lambda_before * (std::pow(v, p) - std::pow(prev, p));
        prev = v;
        lambda_before = steps.tail_mass[i];
    }
    return std::pow(acc, 1.0 / p);
}

}  // namespace

double lp_norm(const ScalarField& f, double p, const PointSet& e) {
    if (p < 1) throw std::invalid_argument("lp_norm: p must be >= 1");
    double direct = lp_norm_direct(f, p, e);
    double via_lambda = lp_norm_distribution(distribution_steps(f, e), p);
    double scale = std::max({std::abs(direct), std::abs(via_lambda), 1e-300});
    if (std::abs(direct - via_lambda) / scale > 1e-10)
        throw std::logic_error("lp_norm: distribution-function route disagrees with direct sum");
    return direct;
}

double lp_norm(const ScalarField& f, double p) {
    return lp_norm(f, p, PointSet::all(f.size()));
}

double weak_lp_norm(const ScalarField& f, double p) {
    if (p < 1) throw std::invalid_argument("weak_lp_norm: p must be >= 1");
    DistributionSteps steps = distribution_steps(f);
    // t·λ(t)^{1/p} increases in t between jumps, so the sup is approached
    // from the left at each jump v with λ(v^-) = μ{|f| ≥ v}.
    double best = 0;
    double mass_ge = steps.total_mass;
    for (std::size_t i = 0; i < steps.values.size(); ++i) {
        double v = steps.values[i];
        if (v > 0) best = std::max(best, v * std::pow(mass_ge, 1.0 / p));
        mass_ge = steps.tail_mass[i];
    }
    return best;
}

void write_field_csv(std::ostream& out, const ScalarField& f) {
    const MeasureSpace& s = f.space();
    std::vector<std::string> header = {"index", "weight", "value"};
    for (int d = 0; d < s.coord_dim(); ++d) header.push_back("coord" + std::to_string(d));
    csv::write_row(out, header);
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::vector<std::string> row;
        row.push_back(std::to_string(i));
        row.push_back(csv::fmt(s.weight(static_cast<PointIndex>(i))));
        row.push_back(csv::fmt(f.values()[i]));
        for (double c : s.coord(static_cast<PointIndex>(i))) row.push_back(csv::fmt(c));
        csv::write_row(out, row);
    }
}

ScalarField read_field_csv(std::istream& in, std::shared_ptr<const MeasureSpace> expected) {
    std::vector<std::vector<std::string>> rows = csv::read_all(in);
    if (rows.size() < 2) throw std::invalid_argument("field csv: no data rows");
    const auto& header = rows.front();
    if (header.size() < 3 || header[0] != "index" || header[1] != "weight" || header[2] != "value")
        throw std::invalid_argument("field csv: expected header index,weight,value[,coord...]");
    int coord_dim = static_cast<int>(header.size()) - 3;

    std::size_t n = rows.size() - 1;
    std::vector<double> weights(n), values(n), coords;
    if (coord_dim > 0) coords.resize(n * static_cast<std::size_t>(coord_dim));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw std::invalid_argument("field csv: ragged row");
        std::size_t idx = std::stoul(row[0]);
        if (idx >= n) throw std::invalid_argument("field csv: index out of range");
        weights[idx] = std::stod(row[1]);
        values[idx] = std::stod(row[2]);
        for (int d = 0; d < coord_dim; ++d)
            coords[idx * static_cast<std::size_t>(coord_dim) + static_cast<std::size_t>(d)] =
                std::stod(row[3 + static_cast<std::size_t>(d)]);
    }
    if (expected) {
        if (expected->size() != n)
            throw std::invalid_argument("field csv: point count does not match the space");
        for (std::size_t i = 0; i < n; ++i) {
            double w = expected->weight(static_cast<PointIndex>(i));
            if (std::abs(w - weights[i]) > 1e-12 * std::max(1.0, std::abs(w)))
                throw std::invalid_argument("field csv: weights do not match the space");
        }
        return ScalarField(std::move(expected), std::move(values));
    }
    auto space = std::make_shared<MeasureSpace>(std::move(weights), std::move(coords), coord_dim);
    return ScalarField(std::move(space), std::move(values));
}

}  // namespace ballcalc
