#include "ballcalc/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ballcalc/csv.hpp"
#include "ballcalc/parallel.hpp"

namespace ballcalc {

namespace {

int torus_delta(int a, int b, int n) {
    // circular distance in grid steps
    int d = std::abs(a - b) % n;
    return std::min(d, n - d);
}

// Number of common points of two arcs [c1-r1, c1+r1], [c2-r2, c2+r2] on Z_n.
// Two proper arcs can meet in two segments, so both wrapped copies count.
long arc_overlap(int c1, int r1, int c2, int r2, int n) {
    long l1 = std::min<long>(2L * r1 + 1, n);
    long l2 = std::min<long>(2L * r2 + 1, n);
    if (l1 == n || l2 == n) return std::min(l1, l2);
    long d = ((c2 - c1) % n + n) % n;  // in [0, n)
    long total = 0;
    for (long shift : {d - n, d, d + n}) {
        long lo = std::max<long>(-r1, shift - r2);
        long hi = std::min<long>(r1, shift + r2);
        if (hi >= lo) total += hi - lo + 1;
    }
    return std::min({total, l1, l2});
}

bool arc_contains(int c_out, int r_out, int c_in, int r_in, int n) {
    if (2 * r_out + 1 >= n) return true;
    if (2 * r_in + 1 >= n) return false;
    return r_in <= r_out && torus_delta(c_out, c_in, n) <= r_out - r_in;
}

bool arc_intersects(int c1, int r1, int c2, int r2, int n) {
    if (2 * r1 + 1 >= n || 2 * r2 + 1 >= n) return true;
    return torus_delta(c1, c2, n) <= r1 + r2;
}

bool bits_subset(std::span<const std::uint64_t> sub, std::span<const std::uint64_t> super) {
    for (std::size_t w = 0; w < sub.size(); ++w)
        if (sub[w] & ~super[w]) return false;
    return true;
}

bool bits_intersect(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    for (std::size_t w = 0; w < a.size(); ++w)
        if (a[w] & b[w]) return true;
    return false;
}

}  // namespace

Ball::Ball(BallId id, PointSet members, double measure, BallGeometry geom, std::string label)
    : id_(id), members_(std::move(members)), measure_(measure), geom_(geom),
      label_(std::move(label)) {
    if (!(measure_ > 0) || !std::isfinite(measure_))
        throw std::invalid_argument("Ball: measure must satisfy 0 < mu(B) < inf");
    if (members_.empty()) throw std::invalid_argument("Ball: empty member set");
}

void Ball::build_bits(std::size_t n_points) {
    bits_.assign((n_points + 63) / 64, 0);
    for (PointIndex x : members_.members())
        bits_[static_cast<std::size_t>(x) >> 6] |= std::uint64_t{1} << (x & 63);
}

bool Ball::contains(PointIndex x) const {
    return (bits_[static_cast<std::size_t>(x) >> 6] >> (x & 63)) & 1;
}

BallBasis BallBasis::from_raw(Raw raw) {
    BallBasis b;
    b.space_ = std::move(raw.space);
    b.balls_ = std::move(raw.balls);
    b.hull_ = std::move(raw.hull);
    b.family_ = raw.family;
    b.mode_ = raw.mode;
    b.grid_n_ = raw.grid_n;
    b.grid_d_ = raw.grid_d;
    b.grid_shape_ball_ = raw.grid_shape_ball;
    b.tree_levels_ = raw.tree_levels;
    b.declared_ = raw.declared;
    if (!b.space_) throw std::invalid_argument("BallBasis: null space");
    if (b.balls_.empty()) throw std::invalid_argument("BallBasis: empty family");
    if (b.hull_.size() != b.balls_.size())
        throw std::invalid_argument("BallBasis: hull map size mismatch");
    const std::size_t n = b.space_->size();
    b.containing_.assign(n, {});
    for (std::size_t k = 0; k < b.balls_.size(); ++k) {
        if (b.balls_[k].id() != static_cast<BallId>(k))
            throw std::invalid_argument("BallBasis: ball ids must be 0..count-1 in order");
        b.balls_[k].build_bits(n);
        for (PointIndex x : b.balls_[k].members().members()) {
            if (static_cast<std::size_t>(x) >= n)
                throw std::out_of_range("BallBasis: member out of range");
            b.containing_[static_cast<std::size_t>(x)].push_back(static_cast<BallId>(k));
        }
        if (b.balls_[k].members().size() == n && !b.whole_space_)
            b.whole_space_ = static_cast<BallId>(k);
    }
    if (!raw.per_point.empty()) {
        if (raw.per_point.size() != n)
            throw std::invalid_argument("BallBasis: per_point size mismatch");
        b.per_point_ = std::move(raw.per_point);
        b.per_point_is_containing_ = false;
    }
    return b;
}

BallBasis BallBasis::with_hull(std::vector<BallId> hull) const {
    if (hull.size() != balls_.size())
        throw std::invalid_argument("with_hull: size mismatch");
    BallBasis copy = *this;
    copy.hull_ = std::move(hull);
    return copy;
}

std::span<const BallId> BallBasis::balls_containing(PointIndex x) const {
    return containing_[static_cast<std::size_t>(x)];
}

std::span<const BallId> BallBasis::family_of(PointIndex x) const {
    if (per_point_is_containing_) return balls_containing(x);
    return per_point_[static_cast<std::size_t>(x)];
}

bool BallBasis::ball_contains(BallId a, BallId b) const {
    const BallGeometry& ga = ball(a).geometry();
    const BallGeometry& gb = ball(b).geometry();
    using K = BallGeometry::Kind;
    if (ga.kind == K::interval && gb.kind == K::interval)
        return ga.lo <= gb.lo && gb.hi <= ga.hi;
    if (ga.kind == K::arc1d && gb.kind == K::arc1d)
        return arc_contains(ga.cx, ga.radius, gb.cx, gb.radius, grid_n_);
    if (ga.kind == K::cube2d && gb.kind == K::cube2d)
        return arc_contains(ga.cx, ga.radius, gb.cx, gb.radius, grid_n_) &&
               arc_contains(ga.cy, ga.radius, gb.cy, gb.radius, grid_n_);
    return bits_subset(ball(b).bits(), ball(a).bits());
}

bool BallBasis::balls_intersect(BallId a, BallId b) const {
    const BallGeometry& ga = ball(a).geometry();
    const BallGeometry& gb = ball(b).geometry();
    using K = BallGeometry::Kind;
    if (ga.kind == K::interval && gb.kind == K::interval)
        return std::max(ga.lo, gb.lo) < std::min(ga.hi, gb.hi);
    if (ga.kind == K::arc1d && gb.kind == K::arc1d)
        return arc_intersects(ga.cx, ga.radius, gb.cx, gb.radius, grid_n_);
    if (ga.kind == K::cube2d && gb.kind == K::cube2d)
        return arc_intersects(ga.cx, ga.radius, gb.cx, gb.radius, grid_n_) &&
               arc_intersects(ga.cy, ga.radius, gb.cy, gb.radius, grid_n_);
    return bits_intersect(ball(a).bits(), ball(b).bits());
}

double BallBasis::intersection_measure(BallId a, BallId b) const {
    const BallGeometry& ga = ball(a).geometry();
    const BallGeometry& gb = ball(b).geometry();
    using K = BallGeometry::Kind;
    const double w = space_->weight(0);
    if (ga.kind == K::arc1d && gb.kind == K::arc1d)
        return static_cast<double>(arc_overlap(ga.cx, ga.radius, gb.cx, gb.radius, grid_n_)) * w;
    if (ga.kind == K::cube2d && gb.kind == K::cube2d)
        return static_cast<double>(arc_overlap(ga.cx, ga.radius, gb.cx, gb.radius, grid_n_) *
                                   arc_overlap(ga.cy, ga.radius, gb.cy, gb.radius, grid_n_)) *
               w;
    // generic: two-pointer over sorted members
    auto ma = ball(a).members().members();
    auto mb = ball(b).members().members();
    double acc = 0;
    std::size_t i = 0, j = 0;
    while (i < ma.size() && j < mb.size()) {
        if (ma[i] < mb[j]) ++i;
        else if (mb[j] < ma[i]) ++j;
        else {
            acc += space_->weight(ma[i]);
            ++i;
            ++j;
        }
    }
    return acc;
}

std::string BallBasis::describe(BallId b) const { return ball(b).label(); }

void BallBasis::write_csv(std::ostream& out) const {
    csv::write_row(out, std::vector<std::string>{"ball", "description", "measure", "hull"});
    for (const Ball& b : balls_) {
        csv::write_row(out, std::vector<std::string>{std::to_string(b.id()), b.label(),
                                                     csv::fmt(b.measure()),
                                                     std::to_string(hull_id(b.id()))});
    }
}

// ---------------------------------------------------------------------------
// Factories
// ---------------------------------------------------------------------------

std::pair<std::shared_ptr<const MeasureSpace>, BallBasis> dyadic_basis(int levels) {
    if (levels < 0) throw std::invalid_argument("dyadic_basis: levels must be >= 0");
    if (levels > 24) throw std::invalid_argument("dyadic_basis: levels > 24 exceeds the resource guard");
    const std::size_t n = std::size_t{1} << levels;
    const double w = 1.0 / static_cast<double>(n);
    std::vector<double> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = (static_cast<double>(i) + 0.5) * w;
    auto space = std::make_shared<MeasureSpace>(std::vector<double>(n, w), std::move(coords), 1);

    BallBasis::Raw raw;
    raw.space = space;
    raw.family = BallBasis::Family::dyadic;
    raw.tree_levels = levels;
    raw.declared.hull_K = 2;
    raw.declared.eta_doubling = 2;
    raw.declared.eta_bs = 1;
    BallId id = 0;
    for (int k = 0; k <= levels; ++k) {
        const std::size_t cells = std::size_t{1} << k;
        const std::size_t width = n >> k;
        for (std::size_t j = 0; j < cells; ++j) {
            std::vector<PointIndex> members(width);
            std::iota(members.begin(), members.end(), static_cast<PointIndex>(j * width));
            BallGeometry g;
            g.kind = BallGeometry::Kind::interval;
            g.lo = static_cast<PointIndex>(j * width);
            g.hi = static_cast<PointIndex>((j + 1) * width);
            g.level = k;
            std::ostringstream label;
            label << "L" << k << ".J" << j;
            raw.balls.emplace_back(id, PointSet(std::move(members)),
                                   static_cast<double>(width) * w, g, label.str());
            // parent is the hull; the root is its own hull
            BallId parent = (k == 0) ? id
                                     : static_cast<BallId>(((std::size_t{1} << (k - 1)) - 1) + j / 2);
            raw.hull.push_back(parent);
            ++id;
        }
    }
    return {space, BallBasis::from_raw(std::move(raw))};
}

std::pair<std::shared_ptr<const MeasureSpace>, BallBasis> grid_torus_basis(int d, int n,
                                                                           GridShape shape,
                                                                           BallBasis::Mode mode) {
    if (d != 1 && d != 2) throw std::invalid_argument("grid_torus_basis: d must be 1 or 2");
    if (n < 4) throw std::invalid_argument("grid_torus_basis: n must be >= 4");
    const std::size_t npoints = (d == 1) ? static_cast<std::size_t>(n)
                                         : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    const double w = 1.0 / static_cast<double>(npoints);

    std::vector<double> coords;
    coords.reserve(npoints * static_cast<std::size_t>(d));
    if (d == 1) {
        for (int x = 0; x < n; ++x) coords.push_back(static_cast<double>(x) / n);
    } else {
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                coords.push_back(static_cast<double>(x) / n);
                coords.push_back(static_cast<double>(y) / n);
            }
    }
    auto space =
        std::make_shared<MeasureSpace>(std::vector<double>(npoints, w), std::move(coords), d);

    const bool disc = (d == 2 && shape == GridShape::ball);
    // Largest radius: n/2 wraps cubes/arcs to the whole space; Euclidean
    // discs need the covering radius to reach the corners.
    int rmax = n / 2;
    if (disc) {
        while (static_cast<long>(rmax) * rmax < 2L * (n / 2) * (n / 2)) ++rmax;
    }

    BallBasis::Raw raw;
    raw.space = space;
    raw.family = BallBasis::Family::grid;
    raw.mode = mode;
    raw.grid_n = n;
    raw.grid_d = d;
    raw.grid_shape_ball = disc;

    auto id_of = [&](int r, std::size_t center) {
        return static_cast<BallId>(static_cast<std::size_t>(r - 1) * npoints + center);
    };

    for (int r = 1; r <= rmax; ++r) {
        int hull_r = std::min(5 * r, rmax);
        for (std::size_t center = 0; center < npoints; ++center) {
            std::vector<PointIndex> members;
            std::ostringstream label;
            BallGeometry g;
            g.radius = r;
            if (d == 1) {
                int c = static_cast<int>(center);
                g.kind = BallGeometry::Kind::arc1d;
                g.cx = c;
                if (2 * r + 1 >= n) {
                    members.resize(npoints);
                    std::iota(members.begin(), members.end(), 0);
                } else {
                    for (int t = -r; t <= r; ++t) members.push_back(((c + t) % n + n) % n);
                }
                label << "c=" << c << ",r=" << r;
            } else {
                int cx = static_cast<int>(center) % n;
                int cy = static_cast<int>(center) / n;
                g.cx = cx;
                g.cy = cy;
                g.kind = disc ? BallGeometry::Kind::disc2d : BallGeometry::Kind::cube2d;
                for (int y = 0; y < n; ++y) {
                    int dy = torus_delta(cy, y, n);
                    for (int x = 0; x < n; ++x) {
                        int dx = torus_delta(cx, x, n);
                        bool in = disc ? (static_cast<long>(dx) * dx + static_cast<long>(dy) * dy <=
                                          static_cast<long>(r) * r)
                                       : (dx <= r && dy <= r);
                        if (in) members.push_back(static_cast<PointIndex>(y * n + x));
                    }
                }
                label << "c=(" << cx << "," << cy << "),r=" << r;
            }
            double meas = static_cast<double>(members.size()) * w;
            raw.balls.emplace_back(id_of(r, center), PointSet(std::move(members)), meas, g,
                                   label.str());
            raw.hull.push_back(id_of(hull_r, center));
        }
    }

    if (mode == BallBasis::Mode::centered) {
        raw.per_point.assign(npoints, {});
        for (std::size_t x = 0; x < npoints; ++x) {
            raw.per_point[x].reserve(static_cast<std::size_t>(rmax));
            for (int r = 1; r <= rmax; ++r) raw.per_point[x].push_back(id_of(r, x));
        }
    }
    return {space, BallBasis::from_raw(std::move(raw))};
}

PartitionLevels dyadic_partition_levels(int levels) {
    PartitionLevels out;
    const std::size_t n = std::size_t{1} << levels;
    for (int k = 0; k <= levels; ++k) {
        std::vector<std::vector<PointIndex>> cells;
        const std::size_t width = n >> k;
        for (std::size_t j = 0; j < (std::size_t{1} << k); ++j) {
            std::vector<PointIndex> cell(width);
            std::iota(cell.begin(), cell.end(), static_cast<PointIndex>(j * width));
            cells.push_back(std::move(cell));
        }
        out.levels.push_back(std::move(cells));
    }
    return out;
}

BallBasis martingale_basis(std::shared_ptr<const MeasureSpace> space,
                           const PartitionLevels& partitions) {
    if (!space) throw std::invalid_argument("martingale_basis: null space");
    const std::size_t n = space->size();
    const auto& levels = partitions.levels;
    if (levels.empty()) throw std::invalid_argument("martingale_basis: no levels");

    // Validate: each level partitions X; level k+1 refines level k; leaves
    // are singletons.
    std::vector<int> cell_of_prev;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        std::vector<int> cell_of(n, -1);
        for (std::size_t c = 0; c < levels[k].size(); ++c) {
            if (levels[k][c].empty())
                throw std::invalid_argument("martingale_basis: empty cell");
            for (PointIndex x : levels[k][c]) {
                if (static_cast<std::size_t>(x) >= n || cell_of[static_cast<std::size_t>(x)] != -1)
                    throw std::invalid_argument("martingale_basis: level is not a partition");
                cell_of[static_cast<std::size_t>(x)] = static_cast<int>(c);
            }
        }
        for (std::size_t x = 0; x < n; ++x)
            if (cell_of[x] == -1)
                throw std::invalid_argument("martingale_basis: level does not cover the space");
        if (k > 0) {
            // every cell must sit inside one parent cell
            for (const auto& cell : levels[k]) {
                int parent = cell_of_prev[static_cast<std::size_t>(cell.front())];
                for (PointIndex x : cell)
                    if (cell_of_prev[static_cast<std::size_t>(x)] != parent)
                        throw std::invalid_argument(
                            "martingale_basis: partitions are not nested");
            }
        }
        cell_of_prev = std::move(cell_of);
    }
    for (const auto& cell : levels.back())
        if (cell.size() != 1)
            throw std::invalid_argument("martingale_basis: finest level must be singletons");

    struct Node {
        std::vector<PointIndex> members;
        double measure = 0;
        int level = 0;
        int parent = -1;  // index into nodes
    };
    std::vector<Node> nodes;
    // map from sorted member signature at previous level to node index
    std::vector<int> node_of_point_prev(n, -1);
    for (std::size_t k = 0; k < levels.size(); ++k) {
        std::vector<int> node_of_point(n, -1);
        for (const auto& cell : levels[k]) {
            std::vector<PointIndex> sorted(cell);
            std::sort(sorted.begin(), sorted.end());
            int parent = (k == 0) ? -1 : node_of_point_prev[static_cast<std::size_t>(sorted.front())];
            // skip duplicates of the parent cell (unary chain)
            if (parent >= 0 && nodes[static_cast<std::size_t>(parent)].members == sorted) {
                for (PointIndex x : sorted) node_of_point[static_cast<std::size_t>(x)] = parent;
                continue;
            }
            Node nd;
            nd.members = std::move(sorted);
            nd.level = static_cast<int>(k);
            nd.parent = parent;
            double m = 0;
            for (PointIndex x : nd.members) m += space->weight(x);
            nd.measure = m;
            nodes.push_back(std::move(nd));
            for (PointIndex x : nodes.back().members)
                node_of_point[static_cast<std::size_t>(x)] = static_cast<int>(nodes.size()) - 1;
        }
        node_of_point_prev = std::move(node_of_point);
    }

    BallBasis::Raw raw;
    raw.space = space;
    raw.family = BallBasis::Family::martingale;
    raw.tree_levels = static_cast<int>(levels.size());
    raw.declared.hull_K = 2;
    raw.declared.eta_bs = 1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& nd = nodes[i];
        BallGeometry g;
        bool contiguous =
            nd.members.back() - nd.members.front() + 1 == static_cast<PointIndex>(nd.members.size());
        if (contiguous) {
            g.kind = BallGeometry::Kind::interval;
            g.lo = nd.members.front();
            g.hi = static_cast<PointIndex>(nd.members.back() + 1);
        }
        g.level = nd.level;
        std::ostringstream label;
        label << "lvl" << nd.level << ".[" << nd.members.front() << ".." << nd.members.back()
              << "]";
        raw.balls.emplace_back(static_cast<BallId>(i), PointSet(nd.members), nd.measure, g,
                               label.str());
        // hull: the coarsest ancestor of measure <= 2 mu(A); A itself always
        // qualifies, so walk up while the bound holds.
        int best = static_cast<int>(i);
        int anc = nd.parent;
        while (anc >= 0 && nodes[static_cast<std::size_t>(anc)].measure <= 2 * nd.measure) {
            best = anc;
            anc = nodes[static_cast<std::size_t>(anc)].parent;
        }
        raw.hull.push_back(static_cast<BallId>(best));
    }
    return BallBasis::from_raw(std::move(raw));
}

std::pair<std::shared_ptr<const MeasureSpace>, BallBasis> random_martingale_basis(
    std::size_t leaves, std::uint64_t seed) {
    if (leaves < 2) throw std::invalid_argument("random_martingale_basis: need >= 2 leaves");
    std::mt19937_64 rng(seed);
    // dyadic-rational weights keep subset sums exact in double arithmetic
    std::vector<double> weights(leaves);
    for (double& w : weights)
        w = static_cast<double>(1 + (rng() % (1u << 20))) / static_cast<double>(1u << 20);
    auto space = std::make_shared<MeasureSpace>(std::move(weights));

    // recursive contiguous splits into 2-3 children
    struct Block {
        std::size_t lo, hi;
        int depth;
    };
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> by_depth;  // [lo,hi)
    std::vector<Block> stack{{0, leaves, 0}};
    int max_depth = 0;
    while (!stack.empty()) {
        Block blk = stack.back();
        stack.pop_back();
        if (static_cast<std::size_t>(blk.depth) >= by_depth.size()) by_depth.resize(blk.depth + 1);
        by_depth[static_cast<std::size_t>(blk.depth)].push_back({blk.lo, blk.hi});
        max_depth = std::max(max_depth, blk.depth);
        std::size_t len = blk.hi - blk.lo;
        if (len == 1) continue;
        std::size_t parts = (len >= 3 && rng() % 2 == 0) ? 3 : 2;
        parts = std::min(parts, len);
        // choose distinct cut points
        std::vector<std::size_t> cuts;
        while (cuts.size() + 1 < parts) {
            std::size_t c = blk.lo + 1 + rng() % (len - 1);
            if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
        }
        cuts.push_back(blk.lo);
        cuts.push_back(blk.hi);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            stack.push_back({cuts[i], cuts[i + 1], blk.depth + 1});
    }

    PartitionLevels part;
    part.levels.resize(static_cast<std::size_t>(max_depth) + 1);
    // carry finished blocks (singletons) down through deeper levels
    for (int depth = 0; depth <= max_depth; ++depth) {
        std::vector<std::vector<PointIndex>> cells;
        for (int d2 = 0; d2 <= depth; ++d2) {
            for (auto [lo, hi] : by_depth[static_cast<std::size_t>(d2)]) {
                bool is_leaf_block = (hi - lo == 1);
                if (d2 == depth || (is_leaf_block && d2 < depth)) {
                    // deeper copies exist for split blocks; only carry blocks
                    // that stopped splitting
                    if (d2 < depth && !is_leaf_block) continue;
                    std::vector<PointIndex> cell;
                    for (std::size_t x = lo; x < hi; ++x) cell.push_back(static_cast<PointIndex>(x));
                    cells.push_back(std::move(cell));
                }
            }
        }
        std::sort(cells.begin(), cells.end());
        part.levels[static_cast<std::size_t>(depth)] = std::move(cells);
    }
    return {space, martingale_basis(space, part)};
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

struct Extreme {
    double value;
    BallId a = -1, b = -1;
};

// associative, commutative max with deterministic witness
void fold_max(Extreme& into, const Extreme& other) {
    if (other.value > into.value ||
        (other.value == into.value && std::make_pair(other.a, other.b) < std::make_pair(into.a, into.b)))
        into = other;
}
void fold_min(Extreme& into, const Extreme& other) {
    if (other.value < into.value ||
        (other.value == into.value && std::make_pair(other.a, other.b) < std::make_pair(into.a, into.b)))
        into = other;
}

std::vector<BallId> measure_order(const BallBasis& basis) {
    std::vector<BallId> order(basis.ball_count());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](BallId a, BallId b) {
        double ma = basis.ball(a).measure(), mb = basis.ball(b).measure();
        return ma < mb || (ma == mb && a < b);
    });
    return order;
}

}  // namespace

bool BasisValidation::core_pass() const {
    for (const auto& c : checks)
        if (!c.pass && (c.name == "B1" || c.name == "B2" || c.name == "B4.hull" ||
                        c.name == "B4.K" || c.name == "G1" || c.name == "G2"))
            return false;
    return true;
}

const CheckResult* BasisValidation::find(std::string_view name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string BasisValidation::to_text() const {
    std::ostringstream out;
    for (const auto& c : checks) {
        out << (c.pass ? "[pass] " : "[FAIL] ") << c.name;
        if (std::isfinite(c.measured) || std::isinf(c.measured)) out << " = " << csv::fmt(c.measured);
        if (!c.witness.empty()) out << "  (" << c.witness << ")";
        out << '\n';
    }
    return out.str();
}

void BasisValidation::write_csv(std::ostream& out) const {
    csv::write_row(out, std::vector<std::string>{"check", "pass", "measured", "witness"});
    for (const auto& c : checks)
        csv::write_row(out, std::vector<std::string>{c.name, c.pass ? "1" : "0",
                                                     csv::fmt(c.measured), c.witness});
}

BasisValidation validate_axioms(const BallBasis& basis, const ValidateOptions& opts) {
    BasisValidation report;
    const std::size_t count = basis.ball_count();
    const double total = basis.space().total_measure();
    const double inf = std::numeric_limits<double>::infinity();

    {  // B1: 0 < mu(B) < inf, enforced at construction; re-scan anyway
        CheckResult c{"B1", true, 0, ""};
        double mn = inf;
        for (const Ball& b : basis.balls()) mn = std::min(mn, b.measure());
        c.measured = mn;
        c.pass = mn > 0 && std::isfinite(mn);
        report.checks.push_back(c);
    }

    // B3 needs no scan on finite spaces: the shipped families contain or
    // generate singleton cells, so every set is a finite union of balls
    report.checks.push_back(
        {"B3", true, std::numeric_limits<double>::quiet_NaN(), "holds by construction"});

    if (opts.b2) {
        CheckResult c{"B2", true, std::numeric_limits<double>::quiet_NaN(), ""};
        if (basis.whole_space_ball()) {
            c.witness = "whole space is a ball";
        } else {
            // per-point bitsets over ball ids, then pairwise intersection
            const std::size_t n = basis.space().size();
            const std::size_t words = (count + 63) / 64;
            std::vector<std::uint64_t> sets(n * words, 0);
            for (std::size_t x = 0; x < n; ++x)
                for (BallId b : basis.balls_containing(static_cast<PointIndex>(x)))
                    sets[x * words + (static_cast<std::size_t>(b) >> 6)] |= std::uint64_t{1}
                                                                            << (b & 63);
            for (std::size_t x = 0; x < n && c.pass; ++x)
                for (std::size_t y = x; y < n; ++y) {
                    bool joint = false;
                    for (std::size_t w = 0; w < words; ++w)
                        if (sets[x * words + w] & sets[y * words + w]) {
                            joint = true;
                            break;
                        }
                    if (!joint) {
                        c.pass = false;
                        c.witness = "points " + std::to_string(x) + "," + std::to_string(y);
                        break;
                    }
                }
        }
        report.checks.push_back(c);
    }

    const std::vector<BallId> order = measure_order(basis);
    std::vector<double> meas(count);
    for (std::size_t i = 0; i < count; ++i) meas[i] = basis.ball(static_cast<BallId>(i)).measure();
    std::vector<double> order_meas(count);
    for (std::size_t i = 0; i < count; ++i) order_meas[i] = meas[static_cast<std::size_t>(order[i])];

    if (opts.b4) {
        // hull inclusion: every A with A cap B != empty, mu(A) <= 2 mu(B)
        // must sit inside hull(B)
        std::vector<long> fails_of(count, 0);
        std::vector<Extreme> wit_of(count, {-inf, -1, -1});
        parallel_for(count, [&](std::size_t bi) {
            BallId b = static_cast<BallId>(bi);
            BallId h = basis.hull_id(b);
            double cap = 2 * meas[bi];
            auto it = std::upper_bound(order_meas.begin(), order_meas.end(), cap);
            std::size_t upto = static_cast<std::size_t>(it - order_meas.begin());
            for (std::size_t k = 0; k < upto; ++k) {
                BallId a = order[k];
                if (!basis.balls_intersect(a, b)) continue;
                if (!basis.ball_contains(h, a)) {
                    ++fails_of[bi];
                    fold_max(wit_of[bi], {meas[static_cast<std::size_t>(a)], b, a});
                }
            }
        });
        long fails = 0;
        Extreme wit{-inf, -1, -1};
        for (std::size_t bi = 0; bi < count; ++bi) {
            fails += fails_of[bi];
            fold_max(wit, wit_of[bi]);
        }
        CheckResult c{"B4.hull", fails == 0, static_cast<double>(fails), ""};
        if (fails)
            c.witness = "hull(" + std::to_string(wit.a) + ") misses ball " + std::to_string(wit.b);
        report.checks.push_back(c);

        Extreme kmax{0, -1, -1};
        for (std::size_t bi = 0; bi < count; ++bi)
            fold_max(kmax, {basis.hull(static_cast<BallId>(bi)).measure() / meas[bi],
                            static_cast<BallId>(bi), -1});
        report.checks.push_back(
            {"B4.K", std::isfinite(kmax.value), kmax.value, "ball " + std::to_string(kmax.a)});
    }

    if (opts.doubling) {
        // smallest eta with: every B whose hull is not X embeds in some B'
        // with 2 mu(B) <= mu(B') <= eta mu(B)
        Extreme eta{0, -1, -1};
        bool ok = true;
        BallId missing = -1;
        for (std::size_t bi = 0; bi < count && ok; ++bi) {
            BallId b = static_cast<BallId>(bi);
            if (basis.hull(b).measure() >= total && basis.hull(b).members().size() == basis.space().size())
                continue;  // B* = X: doubling not required
            double need = 2 * meas[bi];
            auto it = std::lower_bound(order_meas.begin(), order_meas.end(), need);
            bool found = false;
            for (std::size_t k = static_cast<std::size_t>(it - order_meas.begin()); k < count; ++k) {
                BallId cand = order[k];
                if (basis.ball_contains(cand, b)) {
                    fold_max(eta, {meas[static_cast<std::size_t>(cand)] / meas[bi], b, cand});
                    found = true;
                    break;  // measure-sorted: first hit is minimal
                }
            }
            if (!found) {
                ok = false;
                missing = b;
            }
        }
        CheckResult c{"doubling", ok, eta.value, ""};
        if (!ok) c.witness = "no doubling ball above " + std::to_string(missing);
        report.checks.push_back(c);
    }

    if (opts.regularity) {
        // theta = min over pairs mu(B) <= mu(A), B cap A != empty of
        // mu(B* cap A)/mu(B*)
        std::vector<Extreme> min_of(count, {inf, -1, -1});
        parallel_for(count, [&](std::size_t bi) {
            BallId b = static_cast<BallId>(bi);
            BallId h = basis.hull_id(b);
            double hull_meas = basis.ball(h).measure();
            for (std::size_t aj = 0; aj < count; ++aj) {
                BallId a = static_cast<BallId>(aj);
                if (meas[aj] < meas[bi]) continue;  // need mu(B) <= mu(A)
                if (!basis.balls_intersect(a, b)) continue;
                double ratio = basis.intersection_measure(h, a) / hull_meas;
                fold_min(min_of[bi], {ratio, b, a});
            }
        });
        Extreme th{inf, -1, -1};
        for (auto& m : min_of) fold_min(th, m);
        CheckResult c{"regularity", th.value > 0, th.value,
                      "pair " + std::to_string(th.a) + "," + std::to_string(th.b)};
        report.checks.push_back(c);
    }

    if (opts.basis_structure) {
        // G1: x in B for every B in family(x)
        CheckResult g1{"G1", true, 0, ""};
        const std::size_t n = basis.space().size();
        for (std::size_t x = 0; x < n && g1.pass; ++x)
            for (BallId b : basis.family_of(static_cast<PointIndex>(x)))
                if (!basis.ball(b).contains(static_cast<PointIndex>(x))) {
                    g1.pass = false;
                    g1.witness = "ball " + std::to_string(b) + " at point " + std::to_string(x);
                    break;
                }
        report.checks.push_back(g1);

        // G2: every ball containing x embeds in some member of family(x)
        // with measure <= eta_bs mu(B)
        CheckResult g2{"G2", true, 1, ""};
        bool trivially = true;
        for (std::size_t x = 0; x < n && trivially; ++x) {
            auto fam = basis.family_of(static_cast<PointIndex>(x));
            auto cont = basis.balls_containing(static_cast<PointIndex>(x));
            trivially = fam.size() == cont.size() && std::equal(fam.begin(), fam.end(), cont.begin());
        }
        if (trivially) {
            g2.witness = "family(x) is every ball containing x";
        } else {
            // per-point families sorted by measure, scanned ascending
            Extreme eta{0, -1, -1};
            std::vector<std::vector<BallId>> fam_sorted(n);
            for (std::size_t x = 0; x < n; ++x) {
                auto fam = basis.family_of(static_cast<PointIndex>(x));
                fam_sorted[x].assign(fam.begin(), fam.end());
                std::sort(fam_sorted[x].begin(), fam_sorted[x].end(), [&](BallId p, BallId q) {
                    return meas[static_cast<std::size_t>(p)] < meas[static_cast<std::size_t>(q)] ||
                           (meas[static_cast<std::size_t>(p)] == meas[static_cast<std::size_t>(q)] &&
                            p < q);
                });
            }
            std::vector<Extreme> max_of(count, {0, -1, -1});
            std::vector<Extreme> miss_of(count, {-inf, -1, -1});
            parallel_for(count, [&](std::size_t bi) {
                BallId b = static_cast<BallId>(bi);
                for (PointIndex x : basis.ball(b).members().members()) {
                    bool found = false;
                    for (BallId cand : fam_sorted[static_cast<std::size_t>(x)]) {
                        if (meas[static_cast<std::size_t>(cand)] < meas[bi]) continue;
                        if (basis.ball_contains(cand, b)) {
                            fold_max(max_of[bi],
                                     {meas[static_cast<std::size_t>(cand)] / meas[bi], b, cand});
                            found = true;
                            break;
                        }
                    }
                    if (!found) fold_max(miss_of[bi], {meas[bi], b, x});
                }
            });
            Extreme worst{0, -1, -1}, miss{-inf, -1, -1};
            for (std::size_t bi = 0; bi < count; ++bi) {
                fold_max(worst, max_of[bi]);
                fold_max(miss, miss_of[bi]);
            }
            if (miss.a >= 0) {
                g2.pass = false;
                g2.witness = "ball " + std::to_string(miss.a) + " has no dominating member at point " +
                             std::to_string(miss.b);
            }
            eta = worst;
            g2.measured = eta.value;
        }
        report.checks.push_back(g2);
    }

    return report;
}

// ---------------------------------------------------------------------------
// Exhaustion, covering, d(x,B)
// ---------------------------------------------------------------------------

ExhaustionSequence exhaustion(const BallBasis& basis, BallId seed) {
    if (seed < 0 || static_cast<std::size_t>(seed) >= basis.ball_count())
        throw std::out_of_range("exhaustion: bad seed id");
    auto whole = basis.whole_space_ball();
    if (!whole) throw std::invalid_argument("exhaustion: family has no whole-space ball");

    const std::vector<BallId> order = measure_order(basis);
    std::vector<double> order_meas(order.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order_meas[i] = basis.ball(order[i]).measure();
    const double total = basis.space().total_measure();

    ExhaustionSequence seq;
    seq.balls.push_back(seed);
    auto is_whole = [&](BallId b) {
        return basis.ball(b).members().size() == basis.space().size();
    };
    double mn = std::numeric_limits<double>::infinity(), mx = 0;
    bool any_ratio = false;
    while (!is_whole(seq.balls.back())) {
        BallId cur = seq.balls.back();
        double m = basis.ball(cur).measure();
        BallId hull = basis.hull_id(cur);
        // smallest ball containing hull(G_k) with measure >= 2 mu(G_k)
        auto it = std::lower_bound(order_meas.begin(), order_meas.end(), 2 * m);
        BallId next = -1;
        for (std::size_t k = static_cast<std::size_t>(it - order_meas.begin()); k < order.size();
             ++k) {
            if (basis.ball_contains(order[k], hull)) {
                next = order[k];
                break;
            }
        }
        if (next < 0) {
            next = *whole;  // final step; growth below 2 is unavoidable here
        } else if (!is_whole(next) && 2 * basis.ball(next).measure() > total) {
            // the step after `next` could not keep the factor-2 growth, so
            // finish at X now while the ratio is still >= 2
            next = *whole;
        }
        double ratio = basis.ball(next).measure() / m;
        mn = std::min(mn, ratio);
        mx = std::max(mx, ratio);
        any_ratio = true;
        seq.balls.push_back(next);
    }
    if (any_ratio) {
        seq.min_ratio = mn;
        seq.max_ratio = mx;
    }
    return seq;
}

double measured_beta(const BallBasis& basis) {
    const std::vector<BallId> order = measure_order(basis);
    std::vector<BallId> seeds;
    seeds.push_back(order.front());  // smallest ball
    for (int i = 1; i <= 7; ++i)
        seeds.push_back(order[order.size() * static_cast<std::size_t>(i) / 8]);
    double beta = 2;
    for (BallId s : seeds) {
        ExhaustionSequence seq = exhaustion(basis, s);
        if (std::isfinite(seq.max_ratio)) beta = std::max(beta, seq.max_ratio);
    }
    return beta;
}

std::vector<BallId> greedy_cover(const BallBasis& basis, const PointSet& e,
                                 std::span<const BallId> cover) {
    const std::size_t words = (basis.space().size() + 63) / 64;
    std::vector<std::uint64_t> covered(words, 0);
    for (BallId b : cover) {
        if (b < 0 || static_cast<std::size_t>(b) >= basis.ball_count())
            throw std::out_of_range("greedy_cover: ball id out of range");
        auto bits = basis.ball(b).bits();
        for (std::size_t w = 0; w < words; ++w) covered[w] |= bits[w];
    }
    for (PointIndex x : e.members()) {
        if (static_cast<std::size_t>(x) >= basis.space().size())
            throw std::out_of_range("greedy_cover: point index out of range");
        if (!((covered[static_cast<std::size_t>(x) >> 6] >> (x & 63)) & 1))
            throw std::invalid_argument("greedy_cover: the given family does not cover e");
    }

    std::vector<BallId> selected;
    std::vector<std::uint64_t> used(words, 0);
    std::vector<BallId> candidates(cover.begin(), cover.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    std::vector<bool> dead(candidates.size(), false);
    for (;;) {
        // pick the largest-measure candidate disjoint from everything chosen;
        // the max trivially satisfies the > 1/2 sup selection rule
        int best = -1;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (dead[i]) continue;
            if (bits_intersect(basis.ball(candidates[i]).bits(), used)) {
                dead[i] = true;
                continue;
            }
            if (best < 0 || basis.ball(candidates[i]).measure() >
                                basis.ball(candidates[static_cast<std::size_t>(best)]).measure())
                best = static_cast<int>(i);
        }
        if (best < 0) break;
        BallId chosen = candidates[static_cast<std::size_t>(best)];
        dead[static_cast<std::size_t>(best)] = true;
        selected.push_back(chosen);
        auto bits = basis.ball(chosen).bits();
        for (std::size_t w = 0; w < words; ++w) used[w] |= bits[w];
    }

    // E must be swallowed by the hulls of the selected balls
    std::vector<std::uint64_t> hulls(words, 0);
    for (BallId b : selected) {
        auto bits = basis.hull(b).bits();
        for (std::size_t w = 0; w < words; ++w) hulls[w] |= bits[w];
    }
    for (PointIndex x : e.members())
        if (!((hulls[static_cast<std::size_t>(x) >> 6] >> (x & 63)) & 1))
            throw std::logic_error("greedy_cover: hulls fail to cover e (basis violates B4?)");
    return selected;
}

DOf d_of(PointIndex x, BallId b, const BallBasis& basis) {
    const Ball& B = basis.ball(b);
    if (B.contains(x)) return {B.measure(), true};  // any A superset B has mu(A) >= mu(B)

    const BallGeometry& g = B.geometry();
    const int n = basis.grid_n();
    if (g.kind == BallGeometry::Kind::arc1d) {
        int k = torus_delta(g.cx, x, n);
        long len = static_cast<long>(k) + g.radius + 1;  // minimal covering arc, in points
        int rprime = static_cast<int>((len - 1 + 1) / 2);  // ceil((len-1)/2)
        rprime = std::max(rprime, 1);
        long pts = std::min<long>(2L * rprime + 1, n);
        if (2 * rprime + 1 > n) pts = n;
        return {static_cast<double>(pts) * basis.space().weight(0), true};
    }
    if (g.kind == BallGeometry::Kind::cube2d) {
        int cx = g.cx, cy = g.cy, r = g.radius;
        int kx = torus_delta(cx, x % n, n);
        int ky = torus_delta(cy, x / n, n);
        auto axis_r = [&](int k) { return k <= r ? r : (k + r + 1) / 2; };
        int rprime = std::max(axis_r(kx), axis_r(ky));
        rprime = std::min(rprime, n / 2);
        long side = std::min<long>(2L * rprime + 1, n);
        // the capped radius might not cover: bump to the wrap radius if not
        if (2 * rprime + 1 < n && (axis_r(kx) > rprime || axis_r(ky) > rprime)) side = n;
        return {static_cast<double>(side) * static_cast<double>(side) * basis.space().weight(0),
                true};
    }
    if (g.kind == BallGeometry::Kind::interval && basis.family() != BallBasis::Family::custom) {
        // tree bases: supersets of B are its ancestors; the chain at any
        // point of B lists them all
        PointIndex probe = B.members().members().front();
        double best = std::numeric_limits<double>::infinity();
        bool found = false;
        for (BallId a : basis.balls_containing(probe)) {
            const Ball& A = basis.ball(a);
            if (A.measure() >= best) continue;
            if (A.contains(x) && basis.ball_contains(a, b)) {
                best = A.measure();
                found = true;
            }
        }
        return {best, found};
    }

    // generic: scan balls containing x
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (BallId a : basis.balls_containing(x)) {
        const Ball& A = basis.ball(a);
        if (A.measure() >= best) continue;
        if (basis.ball_contains(a, b)) {
            best = A.measure();
            found = true;
        }
    }
    return {best, found};
}

}  // namespace ballcalc
