#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "irw/rng.hpp"

namespace irw {

enum class Domain { HalfLine, FullLine };

enum class DriftKind { Zero, Lamperti, LogLamperti, Constant, Table };

// Outward drift b(x) on the integers: from x != 0 the walk steps away from the
// origin with probability (1+b)/2. b(0) = 0 and b(-x) = b(x).
struct Drift {
    DriftKind kind = DriftKind::Zero;
    double param = 0.0;  // c, D, or the constant b
    int x_min = 1;
    std::vector<double> table;  // Table: b at |x| = 1, 2, ...; holds last value beyond

    static Drift zero() { return {}; }

    static Drift lamperti(double c, int x_min = 1) {
        if (x_min < 1) throw std::invalid_argument("lamperti drift needs x_min >= 1");
        if (std::abs(c) >= x_min)
            throw std::invalid_argument("lamperti drift out of range: |c| >= x_min");
        return {DriftKind::Lamperti, c, x_min, {}};
    }

    static Drift log_lamperti(double d, int x_min = 2) {
        if (x_min < 2) throw std::invalid_argument("log-lamperti drift needs x_min >= 2");
        if (std::abs(d) / (x_min * std::log(double(x_min))) >= 1.0)
            throw std::invalid_argument("log-lamperti drift out of range");
        return {DriftKind::LogLamperti, d, x_min, {}};
    }

    static Drift constant(double b) {
        if (std::abs(b) >= 1.0) throw std::invalid_argument("drift must lie in (-1,1)");
        return {DriftKind::Constant, b, 1, {}};
    }

    static Drift from_table(std::vector<double> b) {
        if (b.empty()) throw std::invalid_argument("drift table must be nonempty");
        for (double v : b)
            if (std::abs(v) >= 1.0) throw std::invalid_argument("drift must lie in (-1,1)");
        return {DriftKind::Table, 0.0, 1, std::move(b)};
    }

    double operator()(std::int64_t x) const {
        if (x == 0) return 0.0;
        std::int64_t m = std::abs(x);
        switch (kind) {
            case DriftKind::Zero: return 0.0;
            case DriftKind::Lamperti: return param / double(std::max<std::int64_t>(m, x_min));
            case DriftKind::LogLamperti: {
                double u = double(std::max<std::int64_t>(m, x_min));
                return param / (u * std::log(u));
            }
            case DriftKind::Constant: return param;
            default: {
                std::size_t i = std::min<std::size_t>(std::size_t(m - 1), table.size() - 1);
                return table[i];
            }
        }
    }

    // sup_x |b(x)|; the clamp below x_min makes this the value at x_min for the
    // parametric kinds.
    double abs_bound() const {
        switch (kind) {
            case DriftKind::Zero: return 0.0;
            case DriftKind::Lamperti: return std::abs(param) / x_min;
            case DriftKind::LogLamperti: return std::abs(param) / (x_min * std::log(double(x_min)));
            case DriftKind::Constant: return std::abs(param);
            default: {
                double m = 0.0;
                for (double v : table) m = std::max(m, std::abs(v));
                return m;
            }
        }
    }

    bool nonnegative() const {
        switch (kind) {
            case DriftKind::Zero: return true;
            case DriftKind::Lamperti:
            case DriftKind::LogLamperti:
            case DriftKind::Constant: return param >= 0.0;
            default:
                return std::all_of(table.begin(), table.end(), [](double v) { return v >= 0.0; });
        }
    }
};

// Nearest-neighbour walk on Z or Z+ with outward drift b(x). On the half line
// the origin pushes to 1 with probability one.
class NearestNeighborKernel {
public:
    using vertex = std::int64_t;

    NearestNeighborKernel(Domain domain, Drift drift) : domain_(domain), drift_(std::move(drift)) {
        if (drift_.abs_bound() >= 1.0) throw std::invalid_argument("drift must lie in (-1,1)");
    }

    Domain domain() const { return domain_; }
    const Drift& drift() const { return drift_; }
    vertex origin() const { return 0; }

    double prob_right(vertex x) const {
        if (x == 0) return domain_ == Domain::HalfLine ? 1.0 : 0.5;
        double b = drift_(x);
        return x > 0 ? 0.5 * (1.0 + b) : 0.5 * (1.0 - b);
    }

    // One uniform draw per call, including at the deterministic boundary.
    template <class Rng>
    vertex step(vertex x, Rng& rng) const {
        if (domain_ == Domain::HalfLine && x < 0) throw std::out_of_range("vertex outside Z+");
        double u = canonical_open(rng);
        return u < prob_right(x) ? x + 1 : x - 1;
    }

private:
    Domain domain_;
    Drift drift_;
};

inline NearestNeighborKernel make_drift_kernel(DriftKind kind, double param, Domain domain,
                                               int x_min = 1) {
    switch (kind) {
        case DriftKind::Zero: return {domain, Drift::zero()};
        case DriftKind::Lamperti: return {domain, Drift::lamperti(param, x_min)};
        case DriftKind::LogLamperti: return {domain, Drift::log_lamperti(param, x_min)};
        case DriftKind::Constant: return {domain, Drift::constant(param)};
        default: throw std::invalid_argument("make_drift_kernel: use Drift::from_table directly");
    }
}

// Plane vertex, packed into 64 bits for hashing.
struct V2 {
    std::int32_t x = 0;
    std::int32_t y = 0;
    bool operator==(const V2&) const = default;
};

inline std::uint64_t pack(V2 v) {
    return (std::uint64_t(std::uint32_t(v.x)) << 32) | std::uint64_t(std::uint32_t(v.y));
}
inline V2 unpack(std::uint64_t k) {
    return {std::int32_t(std::uint32_t(k >> 32)), std::int32_t(std::uint32_t(k))};
}

// Locally finite graph with explicit per-vertex transition rows. Vertices are
// plane points; distances are graph distances from the origin (BFS over the
// union of row supports).
class GraphKernel {
public:
    using vertex = V2;

    struct Row {
        std::vector<std::uint64_t> nbr;
        std::vector<double> prob;
        std::vector<double> cdf;
    };

    GraphKernel(V2 origin, std::unordered_map<std::uint64_t, Row> rows)
        : origin_(origin), rows_(std::move(rows)) {
        for (auto& [k, row] : rows_) {
            row.cdf.resize(row.prob.size());
            double acc = 0.0;
            for (std::size_t i = 0; i < row.prob.size(); ++i) {
                acc += row.prob[i];
                row.cdf[i] = acc;
            }
        }
        compute_distances();
    }

    V2 origin() const { return origin_; }
    std::size_t vertex_count() const { return rows_.size(); }

    const Row& row(V2 v) const {
        auto it = rows_.find(pack(v));
        if (it == rows_.end()) throw std::out_of_range("unknown vertex");
        return it->second;
    }

    template <class Rng>
    V2 step(V2 v, Rng& rng) const {
        const Row& r = row(v);
        double u = canonical_open(rng);
        std::size_t i = std::lower_bound(r.cdf.begin(), r.cdf.end(), u) - r.cdf.begin();
        if (i >= r.nbr.size()) i = r.nbr.size() - 1;
        return unpack(r.nbr[i]);
    }

    std::int32_t vertex_distance(V2 v) const {
        auto it = dist_.find(pack(v));
        if (it == dist_.end()) throw std::out_of_range("unknown vertex");
        return it->second;
    }
    std::int32_t edge_distance(V2 a, V2 b) const {
        return std::min(vertex_distance(a), vertex_distance(b));
    }

    // Row-stochasticity within tol, strictly positive listed probabilities, and
    // connectivity of the support graph.
    void validate(double tol = 1e-12) const {
        for (const auto& [k, row] : rows_) {
            double sum = 0.0;
            for (double p : row.prob) {
                if (!(p > 0.0)) throw std::invalid_argument("nonpositive transition probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("row does not sum to 1");
        }
        if (dist_.size() != rows_.size()) throw std::invalid_argument("graph not connected");
    }

    // Whether every out-edge has a positive reverse probability (the
    // non-degeneracy assumption). The orbit walk fails this by construction:
    // its counter-clockwise rates are zero.
    bool bidirectional() const {
        for (const auto& [k, row] : rows_) {
            for (std::uint64_t nk : row.nbr) {
                auto it = rows_.find(nk);
                if (it == rows_.end()) return false;
                if (std::find(it->second.nbr.begin(), it->second.nbr.end(), k) ==
                    it->second.nbr.end())
                    return false;
            }
        }
        return true;
    }

private:
    void compute_distances() {
        // Undirected BFS over the union of row supports.
        std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> adj;
        for (const auto& [k, row] : rows_)
            for (std::uint64_t nk : row.nbr) {
                adj[k].push_back(nk);
                adj[nk].push_back(k);
            }
        std::deque<std::uint64_t> q;
        std::uint64_t o = pack(origin_);
        dist_[o] = 0;
        q.push_back(o);
        while (!q.empty()) {
            std::uint64_t v = q.front();
            q.pop_front();
            std::int32_t d = dist_[v];
            for (std::uint64_t w : adj[v])
                if (rows_.count(w) && !dist_.count(w)) {
                    dist_[w] = d + 1;
                    q.push_back(w);
                }
        }
    }

    V2 origin_;
    std::unordered_map<std::uint64_t, Row> rows_;
    std::unordered_map<std::uint64_t, std::int32_t> dist_;
};

// The plane walk along square orbits O_k = {v : |v|_inf = k}: from O_k move
// inward with rate (2/3) 2^-k, outward with rate (1/3) 2^-k, and clockwise
// along the orbit otherwise. Corners route the radial mass through the
// diagonal neighbours so the stated orbit rates hold at every vertex; the
// outermost orbit reflects its outward mass inward.
inline GraphKernel make_orbit_kernel(int k_max) {
    if (k_max < 2) throw std::invalid_argument("orbit kernel needs k_max >= 2");
    if (k_max > 1024) throw std::invalid_argument("orbit kernel k_max too large");

    std::unordered_map<std::uint64_t, GraphKernel::Row> rows;
    auto sgn = [](std::int32_t v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };

    GraphKernel::Row origin_row;
    const V2 axes[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (V2 n : axes) {
        origin_row.nbr.push_back(pack(n));
        origin_row.prob.push_back(0.25);
    }
    rows[pack(V2{0, 0})] = std::move(origin_row);

    for (int k = 1; k <= k_max; ++k) {
        double p = std::ldexp(1.0, -k);  // 2^-k
        for (std::int32_t x = -k; x <= k; ++x) {
            for (std::int32_t y = -k; y <= k; ++y) {
                if (std::max(std::abs(x), std::abs(y)) != k) continue;
                V2 v{x, y};
                V2 cw;
                if (y == k && x < k) cw = {x + 1, y};        // top: rightwards
                else if (x == k && y > -k) cw = {x, y - 1};  // right: downwards
                else if (y == -k && x > -k) cw = {x - 1, y}; // bottom: leftwards
                else cw = {x, y + 1};                        // left: upwards

                bool corner = std::abs(x) == k && std::abs(y) == k;
                V2 in, out;
                if (corner) {
                    in = {x - sgn(x), y - sgn(y)};
                    out = {x + sgn(x), y + sgn(y)};
                } else if (std::abs(x) == k) {
                    in = {x - sgn(x), y};
                    out = {x + sgn(x), y};
                } else {
                    in = {x, y - sgn(y)};
                    out = {x, y + sgn(y)};
                }

                GraphKernel::Row row;
                row.nbr.push_back(pack(cw));
                row.prob.push_back(1.0 - p);
                if (k < k_max) {
                    row.nbr.push_back(pack(in));
                    row.prob.push_back(p * (2.0 / 3.0));
                    row.nbr.push_back(pack(out));
                    row.prob.push_back(p * (1.0 / 3.0));
                } else {
                    row.nbr.push_back(pack(in));  // truncation: reflect inward
                    row.prob.push_back(p);
                }
                rows[pack(v)] = std::move(row);
            }
        }
    }
    return GraphKernel(V2{0, 0}, std::move(rows));
}

// Simple random walk on the Z^2 lattice, generated lazily.
class SquareLatticeKernel {
public:
    using vertex = V2;

    V2 origin() const { return {0, 0}; }

    static std::int64_t vertex_distance(V2 v) {
        return std::int64_t(std::abs(v.x)) + std::abs(v.y);
    }
    static std::int64_t edge_distance(V2 a, V2 b) {
        return std::min(vertex_distance(a), vertex_distance(b));
    }

    template <class Rng>
    V2 step(V2 v, Rng& rng) const {
        double u = canonical_open(rng);
        int d = std::min(3, int(u * 4.0));
        return neighbor(v, d);
    }

    static V2 neighbor(V2 v, int d) {
        switch (d & 3) {
            case 0: return {v.x + 1, v.y};
            case 1: return {v.x - 1, v.y};
            case 2: return {v.x, v.y + 1};
            default: return {v.x, v.y - 1};
        }
    }
};

}  // namespace irw
