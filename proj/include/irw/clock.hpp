#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "irw/kernels.hpp"
#include "irw/schedule.hpp"
#include "irw/series.hpp"

namespace irw {

// Undirected edge with canonical endpoint order; crossings in either direction
// hit the same counter.
template <class Vertex>
struct UndirectedEdge {
    Vertex a, b;
};

inline UndirectedEdge<std::int64_t> make_edge(std::int64_t u, std::int64_t v) {
    return u < v ? UndirectedEdge<std::int64_t>{u, v} : UndirectedEdge<std::int64_t>{v, u};
}

inline UndirectedEdge<V2> make_edge(V2 u, V2 v) {
    bool swap = (u.x > v.x) || (u.x == v.x && u.y > v.y);
    return swap ? UndirectedEdge<V2>{v, u} : UndirectedEdge<V2>{u, v};
}

// Crossing counts Z(e, m) keyed by undirected edge.
template <class Vertex>
class CrossingLedger {
public:
    std::int64_t count(UndirectedEdge<Vertex> e) const {
        auto it = counts_.find(key(e));
        return it == counts_.end() ? 0 : it->second;
    }
    // Returns the count prior to this crossing.
    std::int64_t record(UndirectedEdge<Vertex> e) {
        ++steps_;
        return counts_[key(e)]++;
    }
    std::int64_t total_steps() const { return steps_; }
    std::int64_t distinct_edges() const { return std::int64_t(counts_.size()); }

private:
    static std::uint64_t key(UndirectedEdge<std::int64_t> e) {
        return std::uint64_t(e.a) * 0x9e3779b97f4a7c15ULL ^ std::uint64_t(e.b);
    }
    static std::uint64_t key(UndirectedEdge<V2> e) {
        return pack(e.a) * 0x9e3779b97f4a7c15ULL ^ pack(e.b);
    }
    std::unordered_map<std::uint64_t, std::int64_t> counts_;
    std::int64_t steps_ = 0;
};

// Cumulative actual time T(0) = 0, T(1), ..., Kahan-compensated so that
// trajectories of 1e8 steps keep relative error below 1e-9.
class ActualClock {
public:
    explicit ActualClock(const PassageSchedule& sched) : sched_(&sched) { t_.push_back(0.0); }
    explicit ActualClock(PassageSchedule&&) = delete;  // would dangle

    const PassageSchedule& schedule() const { return *sched_; }

    void append_cost(double cost) {
        acc_.add(cost);
        t_.push_back(acc_.value());
    }

    std::size_t steps() const { return t_.size() - 1; }
    double at(std::size_t m) const { return t_.at(m); }
    double total() const { return t_.back(); }
    const std::vector<double>& times() const { return t_; }

private:
    const PassageSchedule* sched_;
    std::vector<double> t_;
    KahanSum acc_;
};

// T(m) = T(m-1) + s_{Z(e, m-1)}, then the crossing count increments.
template <class Vertex>
inline void record_step(CrossingLedger<Vertex>& ledger, ActualClock& clock,
                        UndirectedEdge<Vertex> edge) {
    std::int64_t prior = ledger.record(edge);
    clock.append_cost(clock.schedule().s(prior));
}

// Right-continuous generalized inverse U(t) = sup{ s : T(s) <= t } of the
// piecewise-linear extension of T. Flat (zero-cost) runs resolve to their
// right endpoint, which is what the sup convention prescribes.
inline double inverse_clock(const ActualClock& clock, double t) {
    const auto& T = clock.times();
    if (t < 0.0) throw std::out_of_range("inverse_clock: t < 0");
    if (t > T.back()) throw std::out_of_range("inverse_clock: t beyond recorded horizon");
    // Last index with T[idx] <= t.
    auto it = std::upper_bound(T.begin(), T.end(), t);
    std::size_t idx = std::size_t(it - T.begin()) - 1;
    if (T[idx] == t || idx + 1 >= T.size()) return double(idx);
    return double(idx) + (t - T[idx]) / (T[idx + 1] - T[idx]);
}

// X^imp(t) = X_{floor(U(t))}.
template <class Vertex>
inline Vertex position_at(const std::vector<Vertex>& trajectory, const ActualClock& clock,
                          double t) {
    double u = inverse_clock(clock, t);
    auto idx = std::size_t(u);
    if (idx >= trajectory.size()) throw std::out_of_range("position_at: horizon exceeded");
    return trajectory[idx];
}

}  // namespace irw
