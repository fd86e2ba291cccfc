#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "irw/clock.hpp"
#include "irw/kernels.hpp"
#include "irw/rng.hpp"
#include "irw/schedule.hpp"
#include "irw/series.hpp"
#include "irw/stats.hpp"

namespace irw {

// Growable cache of passage times; the hot loops index it directly.
class ScheduleTable {
public:
    explicit ScheduleTable(const PassageSchedule& s) : sched_(&s) { vals_.push_back(s.s(0)); }
    explicit ScheduleTable(PassageSchedule&&) = delete;  // would dangle
    double operator()(std::int64_t k) {
        while (std::int64_t(vals_.size()) <= k) vals_.push_back(sched_->s(std::int64_t(vals_.size())));
        return vals_[std::size_t(k)];
    }
    const PassageSchedule& schedule() const { return *sched_; }

private:
    const PassageSchedule* sched_;
    std::vector<double> vals_;
};

struct ExcursionRecord {
    std::int64_t steps = 0;          // tau
    double actual = 0.0;             // tau~ (partial when censored)
    std::int64_t distinct_edges = 0; // M
    std::int64_t max_displacement = 0;
    bool censored = false;
};

namespace detail {

// Dense crossing counts for Z kernels: edge (y, y+1) -> right[y] for y >= 0,
// left[-y-1] for y < 0. A touched list keeps per-excursion resets O(M).
struct ZLedger {
    std::vector<std::int32_t> right, left;
    std::vector<std::int64_t> touched;  // signed edge index, offset by +1 for side

    std::int32_t& slot(std::int64_t y) {
        if (y >= 0) {
            if (std::size_t(y) >= right.size()) right.resize(std::size_t(y) + 64, 0);
            return right[std::size_t(y)];
        }
        std::size_t i = std::size_t(-y - 1);
        if (i >= left.size()) left.resize(i + 64, 0);
        return left[i];
    }
    void reset() {
        for (std::int64_t y : touched) slot(y) = 0;
        touched.clear();
    }
};

// Cached probabilities P(step right | at x) for x > 0; mirrored for x < 0.
struct ProbTable {
    const NearestNeighborKernel* kernel;
    std::vector<double> pr;  // pr[x] for x >= 1

    double prob_right(std::int64_t x) {
        if (x == 0) return kernel->domain() == Domain::HalfLine ? 1.0 : 0.5;
        std::int64_t m = std::abs(x);
        while (std::int64_t(pr.size()) <= m)
            pr.push_back(0.5 * (1.0 + kernel->drift()(std::int64_t(pr.size()))));
        return x > 0 ? pr[std::size_t(m)] : 1.0 - pr[std::size_t(m)];
    }
};

}  // namespace detail

// Single excursion of the time-changed walk on Z or Z+, censored at step_cap.
template <class Rng>
ExcursionRecord run_excursion(const NearestNeighborKernel& kernel, ScheduleTable& st, Rng& rng,
                              std::int64_t step_cap, detail::ZLedger& ledger,
                              detail::ProbTable& probs, std::int64_t start = 0) {
    ExcursionRecord rec;
    KahanSum actual;
    std::int64_t x = start;
    const bool fair = kernel.drift().kind == DriftKind::Zero &&
                      kernel.domain() == Domain::FullLine && start == 0;
    BitCoin<Rng> coin(rng);
    do {
        std::int64_t next;
        if (fair) {
            next = coin.flip() ? x + 1 : x - 1;
        } else {
            double u = canonical_open(rng);
            next = u < probs.prob_right(x) ? x + 1 : x - 1;
        }
        std::int64_t y = next > x ? x : next;  // edge (y, y+1)
        std::int32_t& cnt = ledger.slot(y);
        if (cnt == 0) {
            ++rec.distinct_edges;
            ledger.touched.push_back(y);
        }
        actual.add(st(cnt));
        ++cnt;
        x = next;
        ++rec.steps;
        rec.max_displacement = std::max(rec.max_displacement, std::abs(x - start));
    } while (x != start && rec.steps < step_cap);
    rec.censored = x != start;
    rec.actual = actual.value();
    ledger.reset();
    return rec;
}

// Convenience wrapper matching the one-shot operation contract.
template <class Rng>
ExcursionRecord run_excursion(const NearestNeighborKernel& kernel, const PassageSchedule& sched,
                              Rng& rng, std::int64_t step_cap) {
    if (step_cap < 1) throw std::invalid_argument("step_cap must be >= 1");
    ScheduleTable st(sched);
    detail::ZLedger ledger;
    detail::ProbTable probs{&kernel, {}};
    return run_excursion(kernel, st, rng, step_cap, ledger, probs);
}

// Excursion on an explicit graph kernel (orbit walk) or the Z^2 lattice.
template <class Kernel, class Rng>
ExcursionRecord run_graph_excursion(const Kernel& kernel, ScheduleTable& st, Rng& rng,
                                    std::int64_t step_cap) {
    ExcursionRecord rec;
    KahanSum actual;
    CrossingLedger<V2> ledger;
    V2 origin = kernel.origin();
    V2 v = origin;
    do {
        V2 w = kernel.step(v, rng);
        auto e = make_edge(v, w);
        std::int64_t prior = ledger.record(e);
        if (prior == 0) ++rec.distinct_edges;
        actual.add(st(prior));
        v = w;
        ++rec.steps;
        rec.max_displacement =
            std::max<std::int64_t>(rec.max_displacement,
                                   std::abs(std::int64_t(v.x)) + std::abs(std::int64_t(v.y)));
    } while (!(v == origin) && rec.steps < step_cap);
    rec.censored = !(v == origin);
    rec.actual = actual.value();
    return rec;
}

struct ExcursionStats {
    Welford actual;          // tau~ over completed excursions
    Welford actual_capped;   // tau~ over all excursions, censored keep their partial
    Welford distinct;        // M over completed excursions
    std::int64_t censored = 0;
    std::int64_t replicas = 0;
    CountHistogram m_hist{64};
    std::int64_t sandwich_violations = 0;  // completed with tau~ outside [M, S*M]

    double censor_rate() const { return replicas ? double(censored) / double(replicas) : 0.0; }
    void merge(const ExcursionStats& o) {
        actual.merge(o.actual);
        actual_capped.merge(o.actual_capped);
        distinct.merge(o.distinct);
        censored += o.censored;
        replicas += o.replicas;
        m_hist.merge(o.m_hist);
        sandwich_violations += o.sandwich_violations;
    }
};

// Streams excursion statistics; when the schedule is strongly impatient with
// sum bound s_hi, the area sandwich M <= tau~ <= S*M is checked on every
// completed excursion (exact up to summation roundoff).
template <class Rng>
ExcursionStats excursion_stats_stream(const NearestNeighborKernel& kernel,
                                      const PassageSchedule& sched, std::int64_t replicas,
                                      std::int64_t step_cap, Rng& rng, double s_hi = 0.0) {
    ExcursionStats out;
    ScheduleTable st(sched);
    detail::ZLedger ledger;
    detail::ProbTable probs{&kernel, {}};
    for (std::int64_t i = 0; i < replicas; ++i) {
        ExcursionRecord rec = run_excursion(kernel, st, rng, step_cap, ledger, probs);
        ++out.replicas;
        out.actual_capped.add(rec.actual);
        // Tail histogram counts censored records at their observed M: a capped
        // walk has a.s. explored far past any fixed band cutoff, so the
        // indicator {M >= m} is already settled for small m.
        out.m_hist.add(rec.distinct_edges);
        if (rec.censored) {
            ++out.censored;
            continue;
        }
        out.actual.add(rec.actual);
        out.distinct.add(double(rec.distinct_edges));
        if (s_hi > 0.0) {
            double slack = 1e-9 * std::max(1.0, rec.actual);
            if (rec.actual < double(rec.distinct_edges) - slack ||
                rec.actual > s_hi * double(rec.distinct_edges) + slack)
                ++out.sandwich_violations;
        }
    }
    return out;
}

// Replica-parallel wrapper: workers own disjoint streams, merged in index
// order so results do not depend on scheduling.
inline ExcursionStats excursion_stats(const NearestNeighborKernel& kernel,
                                      const PassageSchedule& sched, std::int64_t replicas,
                                      std::int64_t step_cap, std::uint64_t seed, int workers = 1,
                                      double s_hi = 0.0) {
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    workers = std::max(1, workers);
    if (workers == 1) {
        auto rng = make_stream(seed, 0);
        return excursion_stats_stream(kernel, sched, replicas, step_cap, rng, s_hi);
    }
    std::vector<std::future<ExcursionStats>> futs;
    std::int64_t base = replicas / workers, extra = replicas % workers;
    for (int w = 0; w < workers; ++w) {
        std::int64_t n = base + (w < extra ? 1 : 0);
        futs.push_back(std::async(std::launch::async, [&, w, n] {
            auto rng = make_stream(seed, std::uint64_t(w));
            return excursion_stats_stream(kernel, sched, n, step_cap, rng, s_hi);
        }));
    }
    ExcursionStats out;
    for (auto& f : futs) out.merge(f.get());
    return out;
}

// ---------------------------------------------------------------------------
// Range growth R_t: distinct edges crossed by actual time t.
// ---------------------------------------------------------------------------

struct RangeSample {
    double t;
    std::int64_t distinct_edges;
    std::int64_t span;  // max - min position on Z
};

// Samples R_t at the given checkpoints (ascending). The walk runs freely from
// the origin until actual time passes the last checkpoint; R at a checkpoint
// counts the distinct edges among the steps completed by that actual time.
template <class Rng>
std::vector<RangeSample> range_trace(const NearestNeighborKernel& kernel,
                                     const PassageSchedule& sched,
                                     const std::vector<double>& checkpoints, Rng& rng,
                                     std::int64_t step_budget = std::int64_t(4e9)) {
    if (checkpoints.empty()) throw std::invalid_argument("range_trace needs checkpoints");
    for (std::size_t i = 0; i + 1 < checkpoints.size(); ++i)
        if (checkpoints[i] > checkpoints[i + 1])
            throw std::invalid_argument("checkpoints must be ascending");
    ScheduleTable st(sched);
    detail::ZLedger ledger;
    detail::ProbTable probs{&kernel, {}};
    const double t_last = checkpoints.back();

    std::vector<RangeSample> out;
    std::size_t ci = 0;
    KahanSum tacc;
    std::int64_t x = 0, lo = 0, hi = 0, distinct = 0, steps = 0;
    const bool fair =
        kernel.drift().kind == DriftKind::Zero && kernel.domain() == Domain::FullLine;
    BitCoin<Rng> coin(rng);
    double t_prev = 0.0;
    while (tacc.value() <= t_last && steps < step_budget) {
        std::int64_t next;
        if (fair)
            next = coin.flip() ? x + 1 : x - 1;
        else {
            double u = canonical_open(rng);
            next = u < probs.prob_right(x) ? x + 1 : x - 1;
        }
        std::int64_t y = next > x ? x : next;
        std::int32_t& cnt = ledger.slot(y);
        double cost = st(cnt);
        // checkpoints passed strictly by this step belong to the previous state
        double t_next = tacc.value() + cost;
        while (ci < checkpoints.size() && checkpoints[ci] < t_next && checkpoints[ci] >= t_prev) {
            out.push_back({checkpoints[ci], distinct, hi - lo});
            ++ci;
        }
        if (cnt == 0) {
            ++distinct;
            ledger.touched.push_back(y);
        }
        ++cnt;
        tacc.add(cost);
        t_prev = t_next;
        x = next;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        ++steps;
    }
    while (ci < checkpoints.size() && checkpoints[ci] <= tacc.value()) {
        out.push_back({checkpoints[ci], distinct, hi - lo});
        ++ci;
    }
    if (ci < checkpoints.size())
        throw std::runtime_error("range_trace: step budget exhausted before last checkpoint");
    ledger.reset();
    return out;
}

// ---------------------------------------------------------------------------
// Infinitely impatient walk: occupation fractions via the embedded
// range-extension chain. With range rho edges and the walk at one end, the
// opposite end extends next with probability 1/(rho+2); at unit k >= 2 that is
// 1/(k+1). Run lengths between switches are sampled directly: the no-switch
// probability over units m+1..j telescopes to (m+1)/(j+1).
// ---------------------------------------------------------------------------

namespace detail {

template <class Rng>
std::int64_t next_turn_unit(std::int64_t m, Rng& rng) {
    double u = canonical_open(rng);
    auto t = std::int64_t(std::floor(double(m + 1) / u));
    return std::max(t, m + 1);
}

}  // namespace detail

template <class Rng>
double inf_imp_occupation_one(std::int64_t n, Rng& rng) {
    bool at_right = canonical_open(rng) < 0.5;
    std::int64_t right_time = at_right ? 1 : 0;
    std::int64_t left_edges = at_right ? 0 : 1, right_edges = at_right ? 1 : 0;
    std::int64_t m = 1;
    while (m < n) {
        std::int64_t turn = detail::next_turn_unit(m, rng);
        std::int64_t run_end = std::min(turn - 1, n);
        if (run_end > m) {  // same-end extensions
            std::int64_t units = run_end - m;
            if (at_right) {
                right_time += units;
                right_edges += units;
            } else
                left_edges += units;
            m = run_end;
        }
        if (m >= n) break;
        at_right = !at_right;  // the opposite end extends at `turn`
        if (at_right) {
            ++right_time;
            ++right_edges;
        } else
            ++left_edges;
        m = turn;
    }
    (void)left_edges;
    (void)right_edges;
    return double(right_time) / double(n);
}

template <class Rng>
double coin_turning_one(std::int64_t n, Rng& rng) {
    bool heads = canonical_open(rng) < 0.5;
    std::int64_t count = heads ? 1 : 0;
    std::int64_t m = 1;
    while (m < n) {
        std::int64_t turn = detail::next_turn_unit(m, rng);
        std::int64_t run_end = std::min(turn - 1, n);
        if (run_end > m) {
            if (heads) count += run_end - m;
            m = run_end;
        }
        if (m >= n) break;
        heads = !heads;
        if (heads) ++count;
        m = turn;
    }
    return double(count) / double(n);
}

inline std::vector<double> inf_imp_occupation(std::int64_t n, std::int64_t replicas,
                                              std::uint64_t seed, std::uint64_t stream = 0) {
    if (n < 2) throw std::invalid_argument("inf_imp_occupation needs n >= 2");
    auto rng = make_stream(seed, stream);
    std::vector<double> out(std::size_t(replicas), 0.0);
    for (auto& v : out) v = inf_imp_occupation_one(n, rng);
    return out;
}

inline std::vector<double> coin_turning(std::int64_t n, std::int64_t replicas, std::uint64_t seed,
                                        std::uint64_t stream = 1) {
    if (n < 1) throw std::invalid_argument("coin_turning needs n >= 1");
    auto rng = make_stream(seed, stream);
    std::vector<double> out(std::size_t(replicas), 0.0);
    for (auto& v : out) v = coin_turning_one(n, rng);
    return out;
}

// Exact law of the right-axis time R_n by dynamic programming over
// (range size, current end, right time). Full enumeration only works for
// small n; the gate in the acceptance suite uses n <= 14.
inline std::vector<double> exact_small_n(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("exact_small_n needs n >= 1");
    if (n > 14) throw std::invalid_argument("exact_small_n: n too large for the enumeration gate");
    // state[right?][right_time] after `range` units
    std::vector<std::vector<double>> cur(2, std::vector<double>(std::size_t(n) + 1, 0.0));
    cur[1][1] = 0.5;
    cur[0][0] = 0.5;
    for (std::int64_t range = 1; range < n; ++range) {
        double turn = 1.0 / double(range + 2);
        std::vector<std::vector<double>> nxt(2, std::vector<double>(std::size_t(n) + 1, 0.0));
        for (int side = 0; side < 2; ++side)
            for (std::int64_t rt = 0; rt <= range; ++rt) {
                double p = cur[std::size_t(side)][std::size_t(rt)];
                if (p == 0.0) continue;
                // stay on the same end
                nxt[std::size_t(side)][std::size_t(rt + side)] += p * (1.0 - turn);
                int other = 1 - side;
                nxt[std::size_t(other)][std::size_t(rt + other)] += p * turn;
            }
        cur = std::move(nxt);
    }
    std::vector<double> law(std::size_t(n) + 1, 0.0);
    for (std::int64_t rt = 0; rt <= n; ++rt)
        law[std::size_t(rt)] = cur[0][std::size_t(rt)] + cur[1][std::size_t(rt)];
    return law;
}

// Same law derived from the coin-turning description: fair first toss, then a
// turn with probability 1/(k+1) before unit k.
inline std::vector<double> exact_coin_turning(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("exact_coin_turning needs n >= 1");
    if (n > 14) throw std::invalid_argument("exact_coin_turning: n too large");
    std::vector<std::vector<double>> cur(2, std::vector<double>(std::size_t(n) + 1, 0.0));
    cur[1][1] = 0.5;
    cur[0][0] = 0.5;
    for (std::int64_t k = 2; k <= n; ++k) {
        double turn = 1.0 / double(k + 1);
        std::vector<std::vector<double>> nxt(2, std::vector<double>(std::size_t(n) + 1, 0.0));
        for (int side = 0; side < 2; ++side)
            for (std::int64_t h = 0; h < k; ++h) {
                double p = cur[std::size_t(side)][std::size_t(h)];
                if (p == 0.0) continue;
                nxt[std::size_t(side)][std::size_t(h + side)] += p * (1.0 - turn);
                int other = 1 - side;
                nxt[std::size_t(other)][std::size_t(h + other)] += p * turn;
            }
        cur = std::move(nxt);
    }
    std::vector<double> law(std::size_t(n) + 1, 0.0);
    for (std::int64_t h = 0; h <= n; ++h)
        law[std::size_t(h)] = cur[0][std::size_t(h)] + cur[1][std::size_t(h)];
    return law;
}

// ---------------------------------------------------------------------------
// Space-dependent impatience: every crossing of edge e costs s(e) = (1+|e|)^-a.
// ---------------------------------------------------------------------------

struct SpaceExcursionStats {
    Welford actual;
    Welford actual_capped;
    Welford steps;  // tau over completed excursions
    std::int64_t censored = 0;
    std::int64_t replicas = 0;
    std::vector<Welford> xi;  // visit counts xi(u), u = -window..window (Z only)
    int window = 0;

    double censor_rate() const { return replicas ? double(censored) / double(replicas) : 0.0; }
};

// SRW on Z with location-dependent passage times; xi(u) tracked on |u| <= window.
template <class Rng>
SpaceExcursionStats space_dependent_excursion_z(double alpha, std::int64_t replicas,
                                                std::int64_t step_cap, Rng& rng, int window = 20) {
    SpaceExcursionStats out;
    out.window = window;
    out.xi.assign(std::size_t(2 * window + 1), Welford{});
    std::vector<double> cost;  // cost[d] = (1+d)^-alpha for edge distance d
    auto edge_cost = [&](std::int64_t y) {  // edge (y, y+1)
        std::int64_t d = y >= 0 ? y : -y - 1;
        while (std::int64_t(cost.size()) <= d)
            cost.push_back(std::pow(1.0 + double(cost.size()), -alpha));
        return cost[std::size_t(d)];
    };
    std::vector<std::int32_t> visits(std::size_t(2 * window + 1), 0);
    BitCoin<Rng> coin(rng);
    for (std::int64_t rep = 0; rep < replicas; ++rep) {
        std::int64_t x = 0, steps = 0;
        KahanSum acc;
        std::fill(visits.begin(), visits.end(), 0);
        do {
            std::int64_t next = coin.flip() ? x + 1 : x - 1;
            acc.add(edge_cost(next > x ? x : next));
            x = next;
            ++steps;
            if (std::abs(x) <= window) ++visits[std::size_t(x + window)];
        } while (x != 0 && steps < step_cap);
        ++out.replicas;
        out.actual_capped.add(acc.value());
        if (x != 0) {
            ++out.censored;
            continue;
        }
        out.actual.add(acc.value());
        out.steps.add(double(steps));
        for (int u = -window; u <= window; ++u)
            out.xi[std::size_t(u + window)].add(double(visits[std::size_t(u + window)]));
    }
    return out;
}

// SRW on Z^2 with s(e) = (1 + |e|)^-alpha, |e| the graph distance of the edge.
template <class Rng>
SpaceExcursionStats space_dependent_excursion_z2(double alpha, std::int64_t replicas,
                                                 std::int64_t step_cap, Rng& rng) {
    SpaceExcursionStats out;
    std::vector<double> cost;
    auto dist_cost = [&](std::int64_t d) {
        while (std::int64_t(cost.size()) <= d)
            cost.push_back(std::pow(1.0 + double(cost.size()), -alpha));
        return cost[std::size_t(d)];
    };
    BitCoin<Rng> coin(rng);
    for (std::int64_t rep = 0; rep < replicas; ++rep) {
        V2 v{0, 0};
        std::int64_t steps = 0;
        KahanSum acc;
        do {
            V2 w = SquareLatticeKernel::neighbor(v, int(coin.pair()));
            acc.add(dist_cost(SquareLatticeKernel::edge_distance(v, w)));
            v = w;
            ++steps;
        } while (!(v == V2{0, 0}) && steps < step_cap);
        ++out.replicas;
        out.actual_capped.add(acc.value());
        if (!(v == V2{0, 0})) {
            ++out.censored;
            continue;
        }
        out.actual.add(acc.value());
        out.steps.add(double(steps));
    }
    return out;
}

// Consecutive excursions tau~_0, tau~_1, ... from a start vertex; the crossing
// ledger persists across excursions, so later ones feel the earlier passages.
template <class Rng>
std::vector<ExcursionRecord> consecutive_excursions(const NearestNeighborKernel& kernel,
                                                    const PassageSchedule& sched,
                                                    std::int64_t start, std::int64_t count,
                                                    Rng& rng, std::int64_t step_cap) {
    ScheduleTable st(sched);
    detail::ZLedger ledger;
    detail::ProbTable probs{&kernel, {}};
    std::vector<ExcursionRecord> out;
    for (std::int64_t i = 0; i < count; ++i) {
        ExcursionRecord rec;
        KahanSum actual;
        std::int64_t x = start;
        do {
            double u = canonical_open(rng);
            std::int64_t next = u < probs.prob_right(x) ? x + 1 : x - 1;
            std::int64_t y = next > x ? x : next;
            std::int32_t& cnt = ledger.slot(y);
            if (cnt == 0) {
                ++rec.distinct_edges;
                ledger.touched.push_back(y);
            }
            actual.add(st(cnt));
            ++cnt;
            x = next;
            ++rec.steps;
            rec.max_displacement = std::max(rec.max_displacement, std::abs(x - start));
        } while (x != start && rec.steps < step_cap);
        rec.censored = x != start;
        rec.actual = actual.value();
        out.push_back(rec);
        if (rec.censored) break;
    }
    return out;
}

}  // namespace irw
