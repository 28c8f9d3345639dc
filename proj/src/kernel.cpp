#include "ballcalc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ballcalc/csv.hpp"
#include "ballcalc/parallel.hpp"

namespace ballcalc {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double log2_1p(double t) { return std::log1p(t) / kLn2; }

// antiderivative of log2(1+t)
double log2_1p_antiderivative(double t) { return (1 + t) * (std::log1p(t) - 1) / kLn2; }

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6 * (fa + 4 * fm + fb);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    double m = (a + b) / 2;
    double lm = (a + m) / 2, rm = (m + b) / 2;
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, m, fa, flm, fm);
    double right = simpson(m, b, fm, frm, fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

template <class F>
double integrate_interval(const F& f, double a, double b) {
    double fa = f(a), fb = f(b), fm = f((a + b) / 2);
    double whole = simpson(a, b, fa, fm, fb);
    double tol = 1e-13 + 1e-11 * std::abs(whole);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

/// Integrates f over [start, ∞) by dyadic windows. Converges when windows
/// fall below 1e-13 of the accumulated value twice in a row; flags
/// divergence when they refuse to decay within the window budget.
template <class F>
IOmega integrate_windows(const F& f, double start) {
    IOmega out;
    double acc = 0;
    double lo = start;
    int tiny_streak = 0;
    int grow_streak = 0;
    double prev = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 512; ++j) {
        double hi = lo * 2;
        double piece = integrate_interval(f, lo, hi);
        acc += piece;
        if (std::abs(piece) < 1e-13 * std::max(1.0, std::abs(acc))) {
            if (++tiny_streak >= 2) {
                out.value = acc;
                return out;
            }
        } else {
            tiny_streak = 0;
        }
        grow_streak = (piece >= prev && piece > 0) ? grow_streak + 1 : 0;
        if (grow_streak >= 24) break;  // windows keep growing: no hope
        prev = piece;
        lo = hi;
    }
    out.value = acc;
    out.divergent = true;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Modulus
// ---------------------------------------------------------------------------

Modulus Modulus::dirac_at_one() {
    Modulus m;
    m.kind_ = Kind::dirac_at_one;
    m.name_ = "dirac";
    return m;
}

Modulus Modulus::steps(std::vector<double> breakpoints, std::vector<double> values) {
    if (breakpoints.size() != values.size() + 1 || values.empty())
        throw std::invalid_argument("Modulus::steps: need k values and k+1 breakpoints");
    if (breakpoints.front() != 1.0)
        throw std::invalid_argument("Modulus::steps: domain starts at 1");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw std::invalid_argument("Modulus::steps: breakpoints must increase");
    if (values.front() != 1.0) throw std::invalid_argument("Modulus::steps: omega(1) must be 1");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0) || values[i] > 1)
            throw std::invalid_argument("Modulus::steps: values must lie in [0,1]");
        if (i && values[i] > values[i - 1])
            throw std::invalid_argument("Modulus::steps: omega must be non-increasing");
    }
    Modulus m;
    m.kind_ = Kind::steps;
    m.name_ = "steps";
    m.breakpoints_ = std::move(breakpoints);
    m.values_ = std::move(values);
    return m;
}

Modulus Modulus::power_law(double p) {
    if (!(p > 0)) throw std::invalid_argument("Modulus::power_law: p must be positive");
    Modulus m;
    m.kind_ = Kind::power;
    m.power_ = p;
    std::ostringstream name;
    name << "t^-" << p;
    m.name_ = name.str();
    return m;
}

Modulus Modulus::analytic(std::string name, std::function<double(double)> eval) {
    if (!eval) throw std::invalid_argument("Modulus::analytic: null evaluator");
    if (std::abs(eval(1.0) - 1.0) > 1e-12)
        throw std::invalid_argument("Modulus::analytic: omega(1) must be 1");
    // monotone and bounded, spot-checked on a geometric grid
    double prev = eval(1.0);
    for (int j = 1; j <= 160; ++j) {
        double t = std::pow(2.0, j / 4.0);
        double v = eval(t);
        if (!(v >= 0) || v > prev + 1e-12)
            throw std::invalid_argument("Modulus::analytic: omega must be non-increasing in [0,1]");
        prev = v;
    }
    Modulus m;
    m.kind_ = Kind::analytic;
    m.name_ = std::move(name);
    m.eval_ = std::move(eval);
    return m;
}

double Modulus::operator()(double t) const {
    if (!(t >= 1)) throw std::domain_error("Modulus: argument below 1");
    switch (kind_) {
        case Kind::dirac_at_one:
            return t == 1.0 ? 1.0 : 0.0;
        case Kind::steps: {
            if (t >= breakpoints_.back()) return 0.0;
            auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
            return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
        }
        case Kind::power:
            return std::pow(t, -power_);
        case Kind::analytic:
            return eval_(t);
    }
    return 0;
}

IOmega i_omega(const Modulus& m) {
    switch (m.kind()) {
        case Modulus::Kind::dirac_at_one:
            return {1.0, false};  // single point of width zero
        case Modulus::Kind::steps: {
            const auto& bp = m.step_breakpoints();
            const auto& v = m.step_values();
            double acc = 0;
            for (std::size_t i = 0; i < v.size(); ++i)
                acc += v[i] * (log2_1p_antiderivative(bp[i + 1]) - log2_1p_antiderivative(bp[i]));
            return {1.0 + acc, false};
        }
        case Modulus::Kind::power:
            if (m.power_exponent() <= 1.0) return {std::numeric_limits<double>::infinity(), true};
            [[fallthrough]];
        case Modulus::Kind::analytic: {
            IOmega tail = integrate_windows([&](double t) { return m(t) * log2_1p(t); }, 1.0);
            if (tail.divergent) return {std::numeric_limits<double>::infinity(), true};
            return {1.0 + tail.value, false};
        }
    }
    return {0, false};
}

// ---------------------------------------------------------------------------
// Radial profiles
// ---------------------------------------------------------------------------

RadialProfile RadialProfile::indicator() {
    RadialProfile p;
    p.name_ = "indicator";
    p.eval_ = [](double s) { return s <= 1.0 ? 1.0 : 0.0; };
    return p;
}

RadialProfile RadialProfile::power(double exponent) {
    if (!(exponent > 0)) throw std::invalid_argument("RadialProfile::power: exponent must be > 0");
    RadialProfile p;
    std::ostringstream name;
    name << "power:" << exponent;
    p.name_ = name.str();
    p.eval_ = [exponent](double s) { return std::pow(1.0 + s, -exponent); };
    return p;
}

RadialProfile RadialProfile::from_function(std::string name, std::function<double(double)> eval) {
    if (!eval) throw std::invalid_argument("RadialProfile: null evaluator");
    double prev = eval(0.0);
    if (!(prev >= 0) || !std::isfinite(prev))
        throw std::invalid_argument("RadialProfile: xi(0) must be finite and nonnegative");
    for (int j = 1; j <= 256; ++j) {
        double s = j <= 64 ? j / 16.0 : std::pow(2.0, (j - 64) / 8.0) * 4.0;
        double v = eval(s);
        if (!(v >= 0) || v > prev + 1e-12)
            throw std::invalid_argument("RadialProfile: xi must be non-increasing and >= 0");
        prev = v;
    }
    RadialProfile p;
    p.name_ = std::move(name);
    p.eval_ = std::move(eval);
    return p;
}

RadialProfile RadialProfile::from_samples(std::vector<std::pair<double, double>> samples) {
    if (samples.empty()) throw std::invalid_argument("RadialProfile: empty sample table");
    std::sort(samples.begin(), samples.end());
    if (samples.front().first != 0.0)
        throw std::invalid_argument("RadialProfile: samples must start at s = 0");
    double prev = std::numeric_limits<double>::infinity();
    for (auto& [s, v] : samples) {
        if (!(v >= 0) || !std::isfinite(v))
            throw std::invalid_argument("RadialProfile: sample values must be >= 0 and finite");
        if (v > prev) throw std::invalid_argument("RadialProfile: sampled xi must be non-increasing");
        prev = v;
    }
    RadialProfile p;
    p.name_ = "table:" + std::to_string(samples.size());
    p.eval_ = [samples = std::move(samples)](double s) {
        if (s < 0) return samples.front().second;
        auto it = std::upper_bound(samples.begin(), samples.end(), s,
                                   [](double x, const std::pair<double, double>& e) {
                                       return x < e.first;
                                   });
        if (it == samples.begin()) return samples.front().second;
        if (it == samples.end() && s > samples.back().first) return 0.0;
        return std::prev(it)->second;
    };
    return p;
}

RadialProfile RadialProfile::parse(const std::string& preset) {
    if (preset == "indicator") return indicator();
    if (preset.rfind("power:", 0) == 0) return power(std::stod(preset.substr(6)));
    throw std::invalid_argument("RadialProfile::parse: unknown preset '" + preset + "'");
}

IOmega j_xi(const RadialProfile& xi, int d) {
    if (d != 1 && d != 2) throw std::invalid_argument("j_xi: d must be 1 or 2");
    const double surface = (d == 1) ? 2.0 : 2.0 * 3.14159265358979323846;
    auto integrand = [&](double s) {
        double v = xi(s) * log2_1p(1.0 + s);  // log2(2+s)
        return d == 2 ? v * s : v;
    };
    double head = integrate_interval(integrand, 0.0, 1.0);
    IOmega tail = integrate_windows(integrand, 1.0);
    if (tail.divergent) return {std::numeric_limits<double>::infinity(), true};
    return {surface * (head + tail.value), false};
}

double j_alpha(std::span<const double> alpha) {
    double acc = 0;
    for (std::size_t k = 0; k < alpha.size(); ++k)
        acc += static_cast<double>(k + 1) * alpha[k];
    return acc;
}

std::vector<double> parse_alpha_preset(const std::string& preset, int levels) {
    std::size_t len = static_cast<std::size_t>(levels) + 1;
    if (preset == "indicator") {
        std::vector<double> a(len, 0.0);
        a[0] = 1.0;
        return a;
    }
    if (preset.rfind("geometric:", 0) == 0) {
        double q = std::stod(preset.substr(10));
        if (!(q > 0)) throw std::invalid_argument("alpha preset: geometric ratio must be > 0");
        std::vector<double> a(len);
        double v = 1.0;
        for (auto& x : a) {
            x = v;
            v *= q;
        }
        return a;
    }
    if (preset.rfind("alpha:", 0) == 0) {
        std::vector<double> a;
        std::stringstream ss(preset.substr(6));
        std::string item;
        while (std::getline(ss, item, ',')) a.push_back(std::stod(item));
        if (a.size() > len)
            throw std::invalid_argument("alpha preset: more entries than levels+1");
        a.resize(len, 0.0);
        return a;
    }
    throw std::invalid_argument("alpha preset: unknown '" + preset + "'");
}

// ---------------------------------------------------------------------------
// KernelStructure
// ---------------------------------------------------------------------------

bool KernelStructure::has_kernel(BallId b) const {
    if (kind_ == Kind::indicator) return true;
    return slot_of_ball_[static_cast<std::size_t>(b)] >= 0;
}

double KernelStructure::phi_value(BallId b, PointIndex x, const BallBasis& basis) const {
    if (kind_ == Kind::indicator) {
        const Ball& B = basis.ball(b);
        return B.contains(x) ? 1.0 / B.measure() : 0.0;
    }
    std::int32_t slot = slot_of_ball_[static_cast<std::size_t>(b)];
    if (slot < 0) throw std::invalid_argument("KernelStructure: ball has no kernel");
    return dense_[static_cast<std::size_t>(slot)][static_cast<std::size_t>(x)];
}

double KernelStructure::integral_against(BallId b, std::span<const double> g,
                                         const BallBasis& basis) const {
    const MeasureSpace& s = basis.space();
    if (kind_ == Kind::indicator) {
        const Ball& B = basis.ball(b);
        double acc = 0;
        for (PointIndex x : B.members().members()) acc += g[static_cast<std::size_t>(x)] * s.weight(x);
        return acc / B.measure();
    }
    std::int32_t slot = slot_of_ball_[static_cast<std::size_t>(b)];
    if (slot < 0) throw std::invalid_argument("KernelStructure: ball has no kernel");
    const std::vector<double>& phi = dense_[static_cast<std::size_t>(slot)];
    double acc = 0;
    for (std::size_t x = 0; x < phi.size(); ++x)
        acc += g[x] * phi[x] * s.weight(static_cast<PointIndex>(x));
    return acc;
}

std::span<const double> KernelStructure::dense_phi(BallId b) const {
    if (kind_ != Kind::dense) throw std::logic_error("dense_phi: indicator kernels store no table");
    std::int32_t slot = slot_of_ball_[static_cast<std::size_t>(b)];
    if (slot < 0) throw std::invalid_argument("KernelStructure: ball has no kernel");
    return dense_[static_cast<std::size_t>(slot)];
}

void KernelStructure::write_csv(std::ostream& out, const BallBasis& basis) const {
    csv::write_row(out, std::vector<std::string>{"ball", "point", "weight"});
    for (BallId b : kernel_balls_) {
        for (std::size_t x = 0; x < basis.space().size(); ++x) {
            double v = phi_value(b, static_cast<PointIndex>(x), basis);
            if (v != 0)
                csv::write_row(out, std::vector<std::string>{std::to_string(b), std::to_string(x),
                                                             csv::fmt(v)});
        }
    }
}

KernelStructure KernelStructure::from_dense(
    const BallBasis& basis, std::vector<std::pair<BallId, std::vector<double>>> kernels,
    Modulus omega, std::string family) {
    KernelStructure ks;
    ks.kind_ = Kind::dense;
    ks.family_ = std::move(family);
    ks.omega_ = std::move(omega);
    ks.iomega_ = i_omega(ks.omega_);
    ks.slot_of_ball_.assign(basis.ball_count(), -1);
    for (auto& [b, phi] : kernels) {
        if (b < 0 || static_cast<std::size_t>(b) >= basis.ball_count())
            throw std::out_of_range("from_dense: ball id out of range");
        if (phi.size() != basis.space().size())
            throw std::invalid_argument("from_dense: kernel length != point count");
        if (ks.slot_of_ball_[static_cast<std::size_t>(b)] >= 0)
            throw std::invalid_argument("from_dense: duplicate kernel for ball");
        for (double v : phi)
            if (!(v >= 0) || !std::isfinite(v))
                throw std::invalid_argument("from_dense: kernels must be nonnegative and finite");
        ks.slot_of_ball_[static_cast<std::size_t>(b)] = static_cast<std::int32_t>(ks.dense_.size());
        ks.dense_.push_back(std::move(phi));
        ks.kernel_balls_.push_back(b);
    }
    std::sort(ks.kernel_balls_.begin(), ks.kernel_balls_.end());
    return ks;
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

KernelStructure indicator_kernels(const BallBasis& basis) {
    KernelStructure ks;
    ks.kind_ = KernelStructure::Kind::indicator;
    ks.family_ = "indicator";
    ks.omega_ = Modulus::dirac_at_one();
    ks.iomega_ = i_omega(ks.omega_);
    ks.c1_ = 1.0;
    ks.c2_ = 1.0;
    ks.slot_of_ball_.assign(basis.ball_count(), -1);
    ks.kernel_balls_.resize(basis.ball_count());
    std::iota(ks.kernel_balls_.begin(), ks.kernel_balls_.end(), 0);
    return ks;
}

KernelStructure convolution_kernels(const BallBasis& grid, const RadialProfile& xi) {
    if (grid.family() != BallBasis::Family::grid)
        throw std::invalid_argument("convolution_kernels: needs a grid torus basis");
    const int d = grid.grid_d();
    const int n = grid.grid_n();
    IOmega j = j_xi(xi, d);
    if (j.divergent)
        throw std::invalid_argument("convolution_kernels: J(xi) diverges at grid scale");
    double xi1 = xi(1.0);
    if (!(xi1 > 0))
        throw std::invalid_argument("convolution_kernels: xi(1) must be positive for the envelope");
    double xi0 = xi(0.0);
    if (!(xi0 > 0)) throw std::invalid_argument("convolution_kernels: xi(0) must be positive");

    const MeasureSpace& s = grid.space();
    const std::size_t npoints = s.size();
    const double w = s.weight(0);

    KernelStructure ks;
    ks.kind_ = KernelStructure::Kind::dense;
    ks.family_ = "convolution:" + xi.name();
    ks.omega_ = Modulus::analytic(
        "xi-envelope:" + xi.name(),
        [xi, xi1, d](double t) { return xi(std::pow(t, 1.0 / d)) / xi1; });
    ks.iomega_ = i_omega(ks.omega_);
    ks.j_value_ = j.value;
    ks.slot_of_ball_.assign(grid.ball_count(), -1);
    ks.dense_.assign(grid.ball_count(), {});
    ks.kernel_balls_.resize(grid.ball_count());
    std::iota(ks.kernel_balls_.begin(), ks.kernel_balls_.end(), 0);
    for (std::size_t bi = 0; bi < grid.ball_count(); ++bi)
        ks.slot_of_ball_[bi] = static_cast<std::int32_t>(bi);

    parallel_for(grid.ball_count(), [&](std::size_t bi) {
        const BallGeometry& g = grid.ball(static_cast<BallId>(bi)).geometry();
        const double r = g.radius;
        std::vector<double> phi(npoints);
        double mass = 0;
        for (std::size_t y = 0; y < npoints; ++y) {
            double dist;
            if (d == 1) {
                int dy = std::abs(static_cast<int>(y) - g.cx);
                dist = std::min(dy, n - dy);
            } else {
                int dx = std::abs(static_cast<int>(y) % n - g.cx);
                dx = std::min(dx, n - dx);
                int dy = std::abs(static_cast<int>(y) / n - g.cy);
                dy = std::min(dy, n - dy);
                dist = std::sqrt(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy);
            }
            phi[y] = xi(dist / r);
            mass += phi[y] * w;
        }
        if (!(mass > 0))
            throw std::invalid_argument("convolution_kernels: kernel has zero mass on the grid");
        // drop negligible raw weights, then normalize to exact unit mass
        double cutoff = 1e-15 * xi0;
        double kept = 0;
        for (double& v : phi) {
            if (v < cutoff) v = 0;
            kept += v * w;
        }
        for (double& v : phi) v /= kept;
        ks.dense_[bi] = std::move(phi);
    });
    return ks;
}

KernelStructure dyadic_weighted_kernels(const BallBasis& dyadic, std::span<const double> alpha) {
    if (dyadic.family() != BallBasis::Family::dyadic)
        throw std::invalid_argument("dyadic_weighted_kernels: needs the dyadic basis");
    if (alpha.empty() || !(alpha[0] > 0))
        throw std::invalid_argument("dyadic_weighted_kernels: alpha_0 must be positive");
    for (double a : alpha)
        if (!(a >= 0) || !std::isfinite(a))
            throw std::invalid_argument("dyadic_weighted_kernels: alpha must be nonnegative");

    const int L = dyadic.tree_levels();
    const MeasureSpace& s = dyadic.space();
    const std::size_t npoints = s.size();
    const double w = s.weight(0);

    // omega(t) = sum_{j>=k} alpha_j 2^{-j} on [2^k, 2^{k+1}), renormalized
    std::vector<double> tailw(alpha.size() + 1, 0.0);
    for (std::size_t k = alpha.size(); k-- > 0;)
        tailw[k] = tailw[k + 1] + alpha[k] * std::pow(0.5, static_cast<double>(k));
    std::size_t nsteps = alpha.size();
    while (nsteps > 0 && tailw[nsteps - 1] == 0) --nsteps;
    std::vector<double> bp, vals;
    for (std::size_t k = 0; k < nsteps; ++k) {
        bp.push_back(std::pow(2.0, static_cast<double>(k)));
        vals.push_back(tailw[k] / tailw[0]);
    }
    bp.push_back(std::pow(2.0, static_cast<double>(nsteps)));

    KernelStructure ks;
    ks.kind_ = KernelStructure::Kind::dense;
    ks.family_ = "dyadic-weighted";
    ks.omega_ = Modulus::steps(std::move(bp), std::move(vals));
    ks.iomega_ = i_omega(ks.omega_);
    ks.j_value_ = j_alpha(alpha);
    double alpha_total = 0;
    for (std::size_t k = 0; k < alpha.size() && k <= static_cast<std::size_t>(L); ++k)
        alpha_total += alpha[k];
    ks.c1_ = alpha[0] / alpha_total;
    ks.slot_of_ball_.assign(dyadic.ball_count(), -1);
    ks.dense_.assign(dyadic.ball_count(), {});
    ks.kernel_balls_.resize(dyadic.ball_count());
    std::iota(ks.kernel_balls_.begin(), ks.kernel_balls_.end(), 0);
    for (std::size_t bi = 0; bi < dyadic.ball_count(); ++bi)
        ks.slot_of_ball_[bi] = static_cast<std::int32_t>(bi);

    parallel_for(dyadic.ball_count(), [&](std::size_t bi) {
        const Ball& B = dyadic.ball(static_cast<BallId>(bi));
        const int level = B.geometry().level;
        std::vector<double> phi(npoints, 0.0);
        // ancestor at level k of the j-th interval at `level`
        std::size_t j = static_cast<std::size_t>(bi) - ((std::size_t{1} << level) - 1);
        for (int k = 0; k <= level; ++k) {
            double a = static_cast<std::size_t>(level - k) < alpha.size()
                           ? alpha[static_cast<std::size_t>(level - k)]
                           : 0.0;
            if (a == 0) continue;
            std::size_t width = npoints >> k;
            std::size_t lo = (j >> (level - k)) * width;
            double density = a / (static_cast<double>(width) * w);
            for (std::size_t x = lo; x < lo + width; ++x) phi[x] += density;
        }
        double mass = 0;
        for (std::size_t x = 0; x < npoints; ++x) mass += phi[x] * w;
        for (double& v : phi) v /= mass;
        ks.dense_[bi] = std::move(phi);
    });
    return ks;
}

KernelStructure fejer_kernels(const BallBasis& circle, std::span<const int> degrees) {
    if (circle.family() != BallBasis::Family::grid || circle.grid_d() != 1)
        throw std::invalid_argument("fejer_kernels: needs the 1-d circle grid");
    if (degrees.empty()) throw std::invalid_argument("fejer_kernels: no degrees");
    const int n = circle.grid_n();
    const double w = circle.space().weight(0);
    const double pi = 3.14159265358979323846;

    std::vector<std::pair<BallId, std::vector<double>>> kernels;
    std::vector<int> radii;
    for (int m : degrees) {
        if (m < 0 || m > n / 2)
            throw std::invalid_argument("fejer_kernels: degree incompatible with the grid");
        int r = std::max(1, n / (2 * (m + 1)));
        if (std::find(radii.begin(), radii.end(), r) != radii.end())
            throw std::invalid_argument("fejer_kernels: two degrees land on the same arc radius");
        radii.push_back(r);
        for (int c = 0; c < n; ++c) {
            BallId b = static_cast<BallId>((r - 1) * n + c);
            std::vector<double> phi(static_cast<std::size_t>(n));
            double mass = 0;
            for (int y = 0; y < n; ++y) {
                int k = std::abs(y - c);
                k = std::min(k, n - k);
                double theta = 2 * pi * k / n;
                double v;
                if (k == 0) {
                    v = m + 1;
                } else {
                    double num = std::sin((m + 1) * theta / 2);
                    double den = std::sin(theta / 2);
                    v = num * num / (den * den * (m + 1));
                }
                phi[static_cast<std::size_t>(y)] = v;
                mass += v * w;
            }
            for (double& v : phi) v /= mass;
            kernels.emplace_back(b, std::move(phi));
        }
    }
    Modulus omega = Modulus::analytic("fejer-envelope", [](double t) {
        double u = (1 + t) / 2;
        return 1.0 / (u * u);
    });
    KernelStructure ks = KernelStructure::from_dense(circle, std::move(kernels), std::move(omega),
                                                     "fejer");
    return ks;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool KernelValidation::pass() const {
    for (const auto& c : checks)
        if (!c.pass && (c.name == "K1.residual" || c.name == "K2.lower" || c.name == "K2.upper"))
            return false;
    return true;
}

std::string KernelValidation::to_text() const {
    std::ostringstream out;
    for (const auto& c : checks) {
        out << (c.pass ? "[pass] " : "[FAIL] ") << c.name << " = " << csv::fmt(c.measured);
        if (!c.witness.empty()) out << "  (" << c.witness << ")";
        out << '\n';
    }
    return out.str();
}

void KernelValidation::write_csv(std::ostream& out) const {
    csv::write_row(out, std::vector<std::string>{"check", "pass", "measured", "witness"});
    for (const auto& c : checks)
        csv::write_row(out, std::vector<std::string>{c.name, c.pass ? "1" : "0",
                                                     csv::fmt(c.measured), c.witness});
}

KernelValidation validate_kernels(const KernelStructure& ks, const BallBasis& basis) {
    KernelValidation rep;
    const std::size_t npoints = basis.space().size();
    auto kballs = ks.kernel_balls();
    const std::size_t nk = kballs.size();
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> ones(npoints, 1.0);
    struct PerBall {
        double k1 = 0;                                          // |mass - 1|
        double c1 = std::numeric_limits<double>::infinity();    // min phi*mu over members
        double c2 = 0;                                          // max phi*mu/omega
        long env_fail = 0;                                      // phi > 0 where envelope is 0
        PointIndex env_wit = -1;
    };
    std::vector<PerBall> per(nk);

    parallel_for(nk, [&](std::size_t i) {
        BallId b = kballs[i];
        const Ball& B = basis.ball(b);
        PerBall r;
        r.k1 = std::abs(ks.integral_against(b, ones, basis) - 1.0);
        for (PointIndex x : B.members().members())
            r.c1 = std::min(r.c1, ks.phi_value(b, x, basis) * B.measure());
        for (std::size_t xi = 0; xi < npoints; ++xi) {
            PointIndex x = static_cast<PointIndex>(xi);
            double phi = ks.phi_value(b, x, basis);
            if (phi == 0) continue;  // upper bound holds vacuously
            DOf d = d_of(x, b, basis);
            double env = d.found ? ks.omega()(d.value / B.measure()) : 0.0;
            if (env == 0) {
                ++r.env_fail;
                if (r.env_wit < 0) r.env_wit = x;
            } else {
                r.c2 = std::max(r.c2, phi * B.measure() / env);
            }
        }
        per[i] = r;
    });

    double k1max = 0, c1 = inf, c2 = 0;
    long fails = 0;
    std::string wit;
    BallId k1wit = -1, c1wit = -1, c2wit = -1;
    for (std::size_t i = 0; i < nk; ++i) {
        if (per[i].k1 > k1max) {
            k1max = per[i].k1;
            k1wit = kballs[i];
        }
        if (per[i].c1 < c1) {
            c1 = per[i].c1;
            c1wit = kballs[i];
        }
        if (per[i].c2 > c2) {
            c2 = per[i].c2;
            c2wit = kballs[i];
        }
        if (per[i].env_fail && fails == 0)
            wit = "ball " + std::to_string(kballs[i]) + " point " + std::to_string(per[i].env_wit);
        fails += per[i].env_fail;
    }
    rep.max_k1_residual = k1max;
    rep.c1_tight = c1;
    rep.c2_tight = c2;
    rep.checks.push_back({"K1.residual", k1max < 1e-10, k1max, "ball " + std::to_string(k1wit)});
    rep.checks.push_back({"K2.lower", c1 > 0, c1, "ball " + std::to_string(c1wit)});
    rep.checks.push_back({"K2.upper", fails == 0 && std::isfinite(c2), c2,
                          fails ? ("uncovered support at " + wit) : ("ball " + std::to_string(c2wit))});

    // doubling constants of omega on a geometric argument grid; the reverse
    // constant can be infinite (e.g. the zero-width envelope)
    const Modulus& omega = ks.omega();
    double c0 = 0, c0r = 0;
    bool c0r_inf = false;
    for (int j = 0; j <= 320; ++j) {
        double t = std::pow(2.0, j / 8.0);
        double a = omega(t), b2 = omega(2 * t);
        if (a > 0) {
            c0 = std::max(c0, b2 / a);
            if (b2 == 0) c0r_inf = true;
        }
        if (b2 > 0) c0r = std::max(c0r, a / b2);
    }
    rep.c0 = c0;
    rep.c0_reverse = c0r_inf ? inf : c0r;
    rep.checks.push_back({"omega.c0", true, rep.c0, ""});
    rep.checks.push_back({"omega.c0_reverse", true, rep.c0_reverse,
                          c0r_inf ? "unbounded: omega vanishes beyond its support" : ""});

    rep.iomega = ks.i_omega_value();
    rep.checks.push_back({"I(omega)", !rep.iomega.divergent, rep.iomega.value,
                          rep.iomega.divergent ? "divergent" : ""});
    if (std::isfinite(ks.j_value()))
        rep.checks.push_back({"J", true, ks.j_value(), ""});
    return rep;
}

bool KBCouple::complete() const {
    if (!basis || !kernels) return false;
    for (std::size_t x = 0; x < basis->space().size(); ++x)
        for (BallId b : basis->family_of(static_cast<PointIndex>(x)))
            if (!kernels->has_kernel(b)) return false;
    return true;
}

}  // namespace ballcalc
