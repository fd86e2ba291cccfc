#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "irw/kernels.hpp"
#include "irw/schedule.hpp"
#include "irw/series.hpp"

namespace irw {

enum class PhaseVerdict { PositiveRecurrent, NullRecurrent, TransientUnderlying, Inconclusive };

inline const char* to_string(PhaseVerdict v) {
    switch (v) {
        case PhaseVerdict::PositiveRecurrent: return "PositiveRecurrent";
        case PhaseVerdict::NullRecurrent: return "NullRecurrent";
        case PhaseVerdict::TransientUnderlying: return "TransientUnderlying";
        default: return "Inconclusive";
    }
}

enum class Side { Right, Left };

// ---------------------------------------------------------------------------
// Resistor ladders, kept in log space so strong drifts neither overflow nor
// underflow. R_0 = 1 sits on the edge (0,1); R_x/R_{x-1} = (1-b)/(1+b).
// ---------------------------------------------------------------------------

struct ResistorLadder {
    std::vector<double> log_r;       // log R_x, x = 0..m
    std::vector<double> log_prefix;  // L_x = log(R_0 + ... + R_x)

    double r(std::int64_t x) const { return std::exp(log_r[std::size_t(x)]); }
    double prefix(std::int64_t x) const { return std::exp(log_prefix[std::size_t(x)]); }
    // p_m = 1 / (R_0 + ... + R_{m-1}),  q_m = prefix_{m-1} / prefix_m.
    double p(std::int64_t m) const { return std::exp(-log_prefix[std::size_t(m - 1)]); }
    double q(std::int64_t m) const {
        return std::exp(log_prefix[std::size_t(m - 1)] - log_prefix[std::size_t(m)]);
    }
    double a(std::int64_t m) const {
        return std::exp(log_r[std::size_t(m)] - log_prefix[std::size_t(m)]);
    }
    std::int64_t top() const { return std::int64_t(log_r.size()) - 1; }
};

inline ResistorLadder build_ladder(const Drift& drift, Side side, std::int64_t m_max) {
    if (m_max < 1) throw std::invalid_argument("ladder horizon must be >= 1");
    ResistorLadder lad;
    lad.log_r.resize(std::size_t(m_max) + 1);
    lad.log_prefix.resize(std::size_t(m_max) + 1);
    lad.log_r[0] = 0.0;
    lad.log_prefix[0] = 0.0;
    for (std::int64_t x = 1; x <= m_max; ++x) {
        double b = side == Side::Right ? drift(x) : drift(-x);
        if (std::abs(b) >= 1.0) throw std::invalid_argument("drift out of (-1,1)");
        lad.log_r[std::size_t(x)] =
            lad.log_r[std::size_t(x - 1)] + std::log1p(-b) - std::log1p(b);
        lad.log_prefix[std::size_t(x)] =
            logaddexp(lad.log_prefix[std::size_t(x - 1)], lad.log_r[std::size_t(x)]);
    }
    return lad;
}

inline std::vector<double> resistors(const Drift& drift, std::int64_t m_max) {
    ResistorLadder lad = build_ladder(drift, Side::Right, m_max);
    std::vector<double> out(std::size_t(m_max), 0.0);
    for (std::int64_t x = 1; x <= m_max; ++x) out[std::size_t(x - 1)] = lad.r(x);
    return out;
}

// Hitting probabilities of Eqs. for the half line:
//   p_m = P^1(reach m before 0),  q_m = P^m(reach m+1 before 0),  m >= 1.
struct HittingProfile {
    std::vector<double> p;           // index m-1 holds p_m
    std::vector<double> q;           // index m-1 holds q_m
    std::vector<double> log_prefix;  // resistor prefix sums, log scale
};

inline HittingProfile hitting_profile(const Drift& drift, std::int64_t m_max) {
    if (m_max < 2) throw std::invalid_argument("hitting_profile needs m_max >= 2");
    ResistorLadder lad = build_ladder(drift, Side::Right, m_max);
    HittingProfile hp;
    hp.log_prefix = lad.log_prefix;
    hp.p.resize(std::size_t(m_max));
    hp.q.resize(std::size_t(m_max));
    for (std::int64_t m = 1; m <= m_max; ++m) {
        hp.p[std::size_t(m - 1)] = lad.p(m);
        hp.q[std::size_t(m - 1)] = lad.q(m);
    }
    return hp;
}

// ---------------------------------------------------------------------------
// Anchored tail bounds for Lamperti drifts with c < 0. Beyond the computed
// horizon H the resistor sums are bracketed by power laws whose constants come
// from the exactly computed anchors S_H and R_H, so the bracket slack is
// O(1/H) rather than a generic asymptotic constant.
// ---------------------------------------------------------------------------

struct LampertiTail {
    double H;
    double p;     // -2c > 0
    double S_H;   // prefix at the anchor
    double R_H;   // resistor at the anchor
    double c_lo, c_hi;
    double c2;    // a_m <= c2/m for m > H

    double prefix_lo(double m) const {
        return S_H + c_lo * (std::pow(m + 1.0, 1.0 + p) - std::pow(H + 1.0, 1.0 + p));
    }
    double prefix_hi(double m) const {
        return S_H + c_hi * (std::pow(m + 1.0, 1.0 + p) - std::pow(H + 1.0, 1.0 + p));
    }
};

inline LampertiTail anchor_lamperti_tail(const ResistorLadder& lad, const Drift& drift,
                                         std::int64_t H) {
    double c = drift.param;
    if (!(drift.kind == DriftKind::Lamperti && c < 0.0))
        throw std::logic_error("anchor_lamperti_tail needs lamperti drift with c < 0");
    if (H < 4 * drift.x_min || H > lad.top())
        throw std::invalid_argument("anchor horizon out of range");
    LampertiTail tb;
    tb.H = double(H);
    tb.p = -2.0 * c;
    tb.S_H = lad.prefix(H);
    tb.R_H = lad.r(H);
    double bbar = drift.abs_bound();
    // log((1-z)/(1+z)) for z in (-1,0) lies between 2|z| and 2|z| + eps3 cubic excess.
    double eps3 = (2.0 / 3.0) / (1.0 - bbar * bbar) * std::pow(std::abs(c), 3) * (0.5 / (tb.H * tb.H));
    tb.c_lo = tb.R_H * std::pow(tb.H + 1.0, -tb.p) / (1.0 + tb.p);
    tb.c_hi = tb.R_H * std::exp(eps3) * std::pow(tb.H, -tb.p) / (1.0 + tb.p);
    tb.c2 = std::pow(2.0, 1.0 + tb.p) * std::exp(eps3 * 4.0);
    return tb;
}

// Bracket of sum_{m > H} w(m) / prefix(m) by geometric blocks plus a power-law
// remainder; w nondecreasing with w(m) <= A * m^a, a < p. Block edges are kept
// on integers so a block of length r - l holds exactly r - l terms.
inline IntegralTail tail_sum_over_prefix(const LampertiTail& tb,
                                         const std::function<double(double)>& w_lo,
                                         const std::function<double(double)>& w_hi, double A,
                                         double a) {
    if (!(a < tb.p)) throw std::logic_error("tail exponent must satisfy a < p");
    const double lambda = 1.01;
    double lo = 0.0, hi = 0.0;
    double l = std::floor(tb.H) + 1.0;
    const double X = std::floor(tb.H * 4096.0);
    while (l < X) {
        double r = std::min(X, std::max(l + 1.0, std::floor(l * lambda)));
        hi += (r - l) * w_hi(r) / tb.prefix_lo(l - 1.0);
        lo += (r - l) * w_lo(l) / tb.prefix_hi(r);
        l = r;
    }
    double gammaX = 1.0 - std::pow((tb.H + 1.0) / (X + 1.0), 1.0 + tb.p);
    hi += A / (tb.c_lo * gammaX) * std::pow(X - 1.0, a - tb.p) / (tb.p - a);
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Drift functionals B^r, B^l and the reciprocal sums I^r, I^l.
// ---------------------------------------------------------------------------

struct DriftFunctionals {
    double b_r_partial = 0.0;
    double b_l_partial = 0.0;
    SeriesVerdict i_r;
    SeriesVerdict i_l;
};

namespace detail {

// True when b(x) >= 0 for every x, by construction of the drift kind.
inline bool provably_nonneg(const Drift& d) { return d.nonnegative(); }

// True when b(x) <= bmax < 0 for all x >= 1; returns bmax through out param.
inline bool provably_uniform_negative(const Drift& d, double& bmax) {
    if (d.kind == DriftKind::Constant && d.param < 0.0) {
        bmax = d.param;
        return true;
    }
    if (d.kind == DriftKind::Table) {
        double m = -1.0;
        for (double v : d.table) m = std::max(m, v);
        if (m < 0.0) {
            bmax = m;
            return true;
        }
    }
    return false;
}

// I-series sum_{x>=1} 1/prefix(x) for one side of the drift.
inline SeriesVerdict i_series(const Drift& drift, Side side, std::int64_t horizon, double tol) {
    ResistorLadder lad = build_ladder(drift, side, horizon);
    KahanSum part;
    for (std::int64_t x = 1; x <= horizon; ++x) part.add(std::exp(-lad.log_prefix[std::size_t(x)]));
    // drifts are symmetric in |x|, so the kind-based certificates work on
    // either side
    const Drift& d = drift;

    if (provably_nonneg(d)) {
        // R_x <= 1, so prefix(x) <= 1 + x and the terms dominate a harmonic tail.
        return SeriesVerdict::diverged_with(part.value(), horizon,
                                            "terms >= 1/(1+x): harmonic minorant");
    }
    double bmax;
    if (provably_uniform_negative(d, bmax)) {
        double rho = (1.0 - bmax) / (1.0 + bmax);
        // Once prefix_x <= R_{x+1}/(rho-1) the term ratio stays <= 1/rho (inductive).
        std::int64_t anchor = std::max<std::int64_t>(
            8, d.kind == DriftKind::Table ? std::int64_t(d.table.size()) + 1 : 8);
        if (anchor + 1 <= horizon &&
            lad.prefix(anchor) <= lad.r(anchor + 1) / (rho - 1.0) * (1.0 + 1e-12)) {
            double tH = std::exp(-lad.log_prefix[std::size_t(horizon)]);
            double tail_hi = tH * (1.0 / rho) / (1.0 - 1.0 / rho);
            return SeriesVerdict::converged(part.value(), horizon, 0.5 * tail_hi,
                                            "geometric tail, ratio <= 1/rho");
        }
        return SeriesVerdict::inconclusive(part.value(), horizon,
                                           "geometric regime not reached at horizon");
    }
    if (d.kind == DriftKind::Lamperti && d.param < 0.0) {
        LampertiTail tb = anchor_lamperti_tail(lad, d, horizon);
        auto one = [](double) { return 1.0; };
        IntegralTail t = tail_sum_over_prefix(tb, one, one, 1.0, 0.0);
        if (0.5 * (t.hi - t.lo) <= std::max(tol, 1e-16) || t.hi < tol)
            return SeriesVerdict::bracketed(part.value() + t.lo, part.value() + t.hi, horizon,
                                            "anchored power-law tail bracket");
        return SeriesVerdict::bracketed(part.value() + t.lo, part.value() + t.hi, horizon,
                                        "anchored power-law tail bracket (wide)");
    }
    return SeriesVerdict::inconclusive(part.value(), horizon,
                                       "no certificate for this drift kind");
}

}  // namespace detail

inline DriftFunctionals drift_functionals(const Drift& drift, std::int64_t horizon,
                                          double tol = 1e-10) {
    DriftFunctionals out;
    ResistorLadder right = build_ladder(drift, Side::Right, horizon);
    ResistorLadder left = build_ladder(drift, Side::Left, horizon);
    out.b_r_partial = std::expm1(right.log_prefix.back());  // B^r = prefix - R_0
    out.b_l_partial = std::expm1(left.log_prefix.back());
    out.i_r = detail::i_series(drift, Side::Right, horizon, tol);
    out.i_l = detail::i_series(drift, Side::Left, horizon, tol);
    return out;
}

// E M = 1 + I^r(b) for the excursion conditioned to start rightwards (X_1 = 1).
// A Diverged verdict signals null recurrence of the impatient walk.
inline SeriesVerdict expected_M(const Drift& drift, std::int64_t horizon, double tol = 1e-10) {
    SeriesVerdict v = detail::i_series(drift, Side::Right, horizon, tol);
    v.partial_sum += 1.0;
    if (v.verdict == Verdict::Converged) v.value += 1.0;
    v.witness = "1 + I^r: " + v.witness;
    return v;
}

// ---------------------------------------------------------------------------
// Expected actual excursion length on Z+:
//   E tau~ = 1 + s_1 + sum_{m>=1} p_m sum_{j>=0} q_m^{j+1} (s_{2j} + s_{2j+1}).
// The inner sum is phi evaluated at q_m.
// ---------------------------------------------------------------------------

namespace detail {

// Lazily extended table of s*_j.
class StarTable {
public:
    explicit StarTable(const PassageSchedule& s) : sched_(&s) {}
    explicit StarTable(PassageSchedule&&) = delete;  // would dangle
    double star(std::size_t j) const {
        while (star_.size() <= j) star_.push_back(sched_->star(std::int64_t(star_.size())));
        return star_[j];
    }
    const PassageSchedule& schedule() const { return *sched_; }

private:
    const PassageSchedule* sched_;
    mutable std::vector<double> star_ = {0.0};  // index 0 unused
};

// Inner sum W(q) = sum_{j>=1} q^j s*_j for schedules whose s* is nonincreasing
// beyond `noninc_from`; geometric tail cut at relative 1e-12.
inline double inner_phi(const StarTable& st, double q, std::int64_t noninc_from,
                        std::int64_t j_cap, bool& certified) {
    certified = true;
    if (q <= 0.0) return 0.0;
    double acc = 0.0, qj = q;
    for (std::int64_t j = 1; j <= j_cap; ++j) {
        double t = st.star(std::size_t(j)) * qj;
        acc += t;
        if (j >= noninc_from) {
            double tail = t * q / (1.0 - q);
            if (tail <= 1e-12 * std::max(acc, 1e-300)) return acc + 0.5 * tail;
        }
        qj *= q;
    }
    certified = false;
    return acc;
}

inline std::int64_t star_noninc_from(const PassageSchedule& s) {
    switch (s.kind()) {
        case ScheduleKind::Custom: return std::int64_t(s.custom_values().size() / 2) + 1;
        default: return 1;  // callers restrict to nonincreasing kinds
    }
}

inline bool star_nonincreasing_eventually(const PassageSchedule& s) {
    switch (s.kind()) {
        case ScheduleKind::Factorial: return false;
        case ScheduleKind::Geometric: return s.param() <= 1.0;
        default: return true;
    }
}

}  // namespace detail

inline SeriesVerdict excursion_time(const Drift& drift, const PassageSchedule& sched,
                                    std::int64_t m_horizon, std::int64_t j_horizon,
                                    double tol = 1e-6) {
    if (m_horizon < 16) throw std::invalid_argument("excursion_time m_horizon too small");
    ResistorLadder lad = build_ladder(drift, Side::Right, m_horizon);
    detail::StarTable st(sched);

    // Ageing schedules: the inner series at q_m already decides. The walk must
    // cross (m, m+1) a geometric number of times, so phi(q_m) = inf forces
    // E tau~ = inf.
    if (!detail::star_nonincreasing_eventually(sched)) {
        double q1 = lad.q(1);
        SeriesVerdict w1 = phi(sched, q1, tol, j_horizon);
        if (w1.diverged())
            return SeriesVerdict::diverged_with(0, 1, "inner series diverges at q_1: " + w1.witness);
        if (sched.kind() == ScheduleKind::Geometric) {
            double aa = sched.param() * sched.param();
            // q_m >= 1 - c2/m eventually for c < 0; once q a^2 >= 1 some inner
            // series diverges.
            if (drift.kind == DriftKind::Lamperti && drift.param < 0.0 && aa > 1.0)
                return SeriesVerdict::diverged_with(0, 1,
                                                    "q_m -> 1 eventually exceeds 1/a^2");
        }
        return SeriesVerdict::inconclusive(0, 1, "ageing schedule: no outer certificate");
    }

    const std::int64_t noninc_from = detail::star_noninc_from(sched);
    KahanSum part;
    part.add(1.0 + sched.s(1));
    bool inner_ok = true;
    for (std::int64_t m = 1; m <= m_horizon; ++m) {
        bool cert;
        double w = detail::inner_phi(st, lad.q(m), noninc_from, j_horizon, cert);
        inner_ok = inner_ok && cert;
        part.add(lad.p(m) * w);
    }
    if (!inner_ok)
        return SeriesVerdict::inconclusive(part.value(), m_horizon, "inner term cap exhausted");

    // Route A: nonnegative drift. p_m >= 1/m, q_m >= 1/2, so the outer terms
    // dominate (s0+s1)/(2m).
    if (detail::provably_nonneg(drift)) {
        return SeriesVerdict::diverged_with(part.value(), m_horizon,
                                            "terms >= s*_1/(2m): harmonic minorant");
    }

    // Route B: uniformly negative drift. q_m < 1/rho, p decays geometrically.
    double bmax;
    if (detail::provably_uniform_negative(drift, bmax)) {
        double rho = (1.0 - bmax) / (1.0 + bmax);
        std::int64_t anchor = std::max<std::int64_t>(
            8, drift.kind == DriftKind::Table ? std::int64_t(drift.table.size()) + 1 : 8);
        if (anchor + 1 > m_horizon ||
            lad.prefix(anchor) > lad.r(anchor + 1) / (rho - 1.0) * (1.0 + 1e-12))
            return SeriesVerdict::inconclusive(part.value(), m_horizon,
                                               "geometric regime not reached");
        bool cert;
        double wbar = detail::inner_phi(st, 1.0 / rho, noninc_from, j_horizon, cert);
        if (!cert)
            return SeriesVerdict::inconclusive(part.value(), m_horizon, "inner cap at q = 1/rho");
        double pH = std::exp(-lad.log_prefix[std::size_t(m_horizon)]);
        double tail_hi = wbar * pH * (1.0 / rho) / (1.0 - 1.0 / rho);
        return SeriesVerdict::converged(part.value(), m_horizon, 0.5 * tail_hi,
                                        "geometric outer tail");
    }

    // Route C: Lamperti c < 0.
    if (drift.kind == DriftKind::Lamperti && drift.param < 0.0) {
        double c = drift.param;
        LampertiTail tb = anchor_lamperti_tail(lad, drift, m_horizon);
        ImpatienceClass cls{Impatience::WeaklyImpatient, kInf, {}};
        try {
            cls = classify(sched, std::max<std::int64_t>(j_horizon, 1 << 20), tol);
        } catch (const CertificationError& e) {
            return SeriesVerdict::inconclusive(part.value(), m_horizon,
                                               std::string("schedule class: ") + e.what());
        }
        bool strong = cls.kind == Impatience::StronglyImpatient ||
                      cls.kind == Impatience::InfinitelyImpatient;
        // The outer tail sum_{m>H} p_m W_m has p_m = 1/prefix(m-1): the x = H
        // boundary term p_{H+1} W_{H+1} is added exactly, the rest is the
        // anchored bracket over x > H.
        double pH1 = std::exp(-lad.log_prefix[std::size_t(m_horizon)]);
        if (strong) {
            double S_hi = cls.sum + (cls.evidence.tail_estimate ? *cls.evidence.tail_estimate : 0.0);
            bool cert;
            double qstar = 1.0 - tb.c2 / (tb.H + 1.0);
            double w_floor = detail::inner_phi(st, qstar, noninc_from, j_horizon, cert);
            if (!cert) w_floor = 0.0;
            auto wlo = [w_floor](double) { return w_floor; };
            auto whi = [S_hi](double) { return S_hi; };
            IntegralTail t = tail_sum_over_prefix(tb, wlo, whi, S_hi, 0.0);
            double lo = part.value() + pH1 * w_floor + t.lo;
            double hi = part.value() + pH1 * S_hi + t.hi;
            return SeriesVerdict::bracketed(lo, hi, m_horizon,
                                            "strong impatience: tail in [phi(q*), S] band");
        }
        // Weakly impatient power/constant-like: compare alpha with 1 + 2c.
        double alpha;
        if (sched.kind() == ScheduleKind::Power) alpha = sched.param();
        else if (sched.kind() == ScheduleKind::Constant || sched.kind() == ScheduleKind::Geometric)
            alpha = 0.0;  // terms bounded below by a constant
        else if (sched.kind() == ScheduleKind::Custom && sched.custom_values().back() > 0.0)
            alpha = 0.0;
        else
            return SeriesVerdict::inconclusive(part.value(), m_horizon,
                                               "no outer certificate for this schedule");

        const double boundary = (alpha - 1.0) / 2.0;
        const double margin = 1e-9;
        if (c < boundary - margin && alpha <= 1.0) {
            // Convergent side: W_m <= 2 + 2^{1-alpha} G(m) for alpha > 0 (G from
            // e^{-k} block sums, q_m <= 1 - 1/(m+1)), and W_m <= s*_1 m for the
            // positive-limit case alpha = 0.
            double Z = 0.0;
            for (int k = 1; k < 80 && alpha > 0.0; ++k) {
                double blk = (alpha < 1.0)
                                 ? (std::pow(k + 1.0, 1.0 - alpha) - std::pow(double(k), 1.0 - alpha))
                                 : std::log1p(1.0 / k);
                Z += std::exp(-double(k)) * blk;
            }
            auto Whi = [&](double m) {
                if (alpha == 0.0) return sched.star(1) * (m + 1.0);
                double g = (alpha < 1.0)
                               ? ((1.0 + Z) * std::pow(m + 1.0, 1.0 - alpha) / (1.0 - alpha) + 1.0)
                               : (1.0 + std::log(m + 1.0) + Z);
                return 2.0 + std::pow(2.0, 1.0 - alpha) * g;
            };
            // weights enter at index m = x+1 relative to the prefix anchor
            auto whi = [&](double x) { return Whi(x + 1.0); };
            auto wlo = [](double) { return 0.0; };
            // power-law majorant W_hi(x+1) <= A x^a beyond the anchor
            double a, A;
            if (alpha == 0.0 || alpha < 1.0) {
                a = 1.0 - alpha;
                if (!(a < tb.p))  // needs c below the boundary, checked above
                    return SeriesVerdict::inconclusive(part.value(), m_horizon,
                                                       "tail exponents too close");
                // Whi(x+1)/x^a decreases in x, so the sup sits at x = H+1
                A = whi(tb.H + 1.0) / std::pow(tb.H + 1.0, a);
            } else {
                a = std::min(0.5, tb.p / 2.0);
                // log(x+2) <= log(H+3) + ((x+2)/(H+3))^a / a for x >= H+1
                double cst = 2.0 + 2.0 + Z + std::log(tb.H + 3.0);
                A = cst / std::pow(tb.H + 1.0, a) +
                    std::pow(2.0, a) / (a * std::pow(tb.H + 3.0, a));
            }
            IntegralTail t = tail_sum_over_prefix(tb, wlo, whi, A, a);
            double hi = part.value() + pH1 * Whi(tb.H + 1.0) + t.hi;
            return SeriesVerdict::bracketed(part.value(), hi, m_horizon,
                                            "weak impatience: block-sum tail bound");
        }
        if (c > boundary + margin) {
            // Divergent side: p_m >= 1/prefix_hi(m-1) and W_m >= e^{-2c2} h_alpha(m).
            return SeriesVerdict::diverged_with(
                part.value(), m_horizon,
                "terms >= kappa m^(2c-alpha) with 2c-alpha > -1 beyond the anchor");
        }
        return SeriesVerdict::inconclusive(part.value(), m_horizon,
                                           "phase boundary: series certification declined");
    }

    return SeriesVerdict::inconclusive(part.value(), m_horizon,
                                       "no certificate for this drift kind");
}

// ---------------------------------------------------------------------------
// Closed-form phase classifiers.
// ---------------------------------------------------------------------------

// Drift b(x) ~ c/x with passage times s_j ~ j^-alpha: positive recurrent iff
// c < min{0, (alpha-1)/2}; the underlying walk is transient for c > 1/2.
// Boundaries (c = 0, c = (alpha-1)/2 for alpha < 1, c = 1/2) are null
// recurrent.
inline PhaseVerdict lamperti_phase(double c, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("lamperti_phase needs alpha > 0");
    if (c > 0.5) return PhaseVerdict::TransientUnderlying;
    double threshold = std::min(0.0, (alpha - 1.0) / 2.0);
    return c < threshold ? PhaseVerdict::PositiveRecurrent : PhaseVerdict::NullRecurrent;
}

// Drift b(x) ~ D/(x log x): null recurrent for D >= -1/2 whatever the passage
// times; positive recurrent for D < -1/2 under strong impatience; otherwise
// the dichotomy is open.
inline PhaseVerdict log_lamperti_phase(double d, Impatience schedule_class) {
    if (d >= -0.5) return PhaseVerdict::NullRecurrent;
    if (schedule_class == Impatience::StronglyImpatient ||
        schedule_class == Impatience::InfinitelyImpatient)
        return PhaseVerdict::PositiveRecurrent;
    return PhaseVerdict::Inconclusive;
}

// ---------------------------------------------------------------------------
// Positive recurrence to the right: sum_{m<=0} r_m^(0) phi(r_{m-1}^(m)).
// r-quantities are one-sided ruin probabilities with target v = u + h; the
// criterion does not depend on u, v, so h defaults to 1 (overridable for the
// invariance test).
// ---------------------------------------------------------------------------

// One-sided ruin quantities for the PRR criterion, target v = u + h:
//   r0(k)     = r_{-k}^{(0)}   = P_0(reach -k before h)
//   r_step(k) = r_{-k-1}^{(-k)} = P_{-k}(reach -k-1 before h)
// computed as resistor prefix ratios in log space.
class PrrQuantities {
public:
    PrrQuantities(const Drift& drift, std::int64_t m_horizon, std::int64_t h = 1) {
        if (h < 1) throw std::invalid_argument("prr needs h >= 1");
        if (m_horizon < 2) throw std::invalid_argument("prr m_horizon too small");
        std::vector<double> logw_right(std::size_t(h), 0.0);  // W_0..W_{h-1}
        for (std::int64_t i = 1; i < h; ++i)
            logw_right[std::size_t(i)] =
                logw_right[std::size_t(i - 1)] + std::log1p(-drift(i)) - std::log1p(drift(i));
        logw_left_.assign(std::size_t(m_horizon) + 2, 0.0);  // k -> W_{-k}
        logw_left_[1] = 0.0;                                 // W_{-1} = W_0 since b(0) = 0
        for (std::int64_t k = 1; k <= m_horizon; ++k)
            logw_left_[std::size_t(k + 1)] =
                logw_left_[std::size_t(k)] + std::log1p(-drift(-k)) - std::log1p(drift(-k));
        log_num_ = -kInf;
        for (double lw : logw_right) log_num_ = logaddexp(log_num_, lw);
        logC_.assign(std::size_t(m_horizon) + 1, 0.0);
        logC_[0] = log_num_;
        for (std::int64_t k = 1; k <= m_horizon; ++k)
            logC_[std::size_t(k)] = logaddexp(logC_[std::size_t(k - 1)], logw_left_[std::size_t(k)]);
    }

    std::int64_t horizon() const { return std::int64_t(logC_.size()) - 1; }
    double r0(std::int64_t k) const { return std::exp(log_num_ - logC_[std::size_t(k)]); }
    double r_step(std::int64_t k) const {
        return std::exp(logC_[std::size_t(k)] - logC_[std::size_t(k + 1)]);
    }
    double log_c(std::int64_t k) const { return logC_[std::size_t(k)]; }
    double log_w_left(std::int64_t k) const { return logw_left_[std::size_t(k)]; }
    double log_num() const { return log_num_; }

private:
    std::vector<double> logw_left_, logC_;
    double log_num_;
};

inline SeriesVerdict prr_criterion(const Drift& drift, const PassageSchedule& sched,
                                   std::int64_t m_horizon, double tol = 1e-8,
                                   std::int64_t h = 1) {
    if (m_horizon < 16) throw std::invalid_argument("prr m_horizon too small");
    PrrQuantities pq(drift, m_horizon, h);
    auto r0 = [&](std::int64_t k) { return pq.r0(k); };
    auto r_step = [&](std::int64_t k) { return pq.r_step(k); };
    const double log_num = pq.log_num();

    std::int64_t M = m_horizon - 1;
    KahanSum part;
    std::int64_t terms = 0;

    // Divergence first: if sum r_m^(0) has a harmonic minorant and the step
    // ratios are bounded away from zero, phi(r) >= s*_1 r keeps terms large.
    double bbar = drift.abs_bound();
    double eps_step = (1.0 - bbar) / 2.0;
    bool r_sum_diverges = detail::provably_nonneg(drift);
    if (r_sum_diverges) {
        for (std::int64_t k = 0; k <= std::min<std::int64_t>(M, 4096); ++k) {
            SeriesVerdict ph = phi(sched, r_step(k), tol, 1 << 22);
            part.add(r0(k) * (ph.converged() ? ph.value : ph.partial_sum));
            ++terms;
            if (ph.diverged())
                return SeriesVerdict::diverged_with(part.value(), terms,
                                                    "inner phi diverges at r_{m-1}^{(m)}");
        }
        double floor = sched.star(1) * eps_step;
        return SeriesVerdict::diverged_with(
            part.value(), terms,
            "sum r_m^(0) harmonic and phi(r) >= " + std::to_string(floor) + " r");
    }

    // Convergent shortcuts need a certified tail for sum r_m^{(0)}; the left
    // ladder plays the role of the resistor prefix.
    ImpatienceClass cls{Impatience::WeaklyImpatient, kInf, {}};
    try {
        cls = classify(sched, 1 << 20, tol);
    } catch (const CertificationError& e) {
        return SeriesVerdict::inconclusive(part.value(), terms,
                                           std::string("schedule class: ") + e.what());
    }
    bool strong = cls.kind == Impatience::StronglyImpatient ||
                  cls.kind == Impatience::InfinitelyImpatient;

    double bmax;
    if (detail::provably_uniform_negative(drift, bmax)) {
        double rho = (1.0 - bmax) / (1.0 + bmax);
        // W_{-k} grows by rho per step leftwards. For k >= M,
        //   C_k <= Num + W_{-(k+1)}/(rho-1)  and  W_{-(k+1)} >= W_{-(M+1)},
        // so W/C is bounded below and sup_{k>=M} r_step(k) <= rbar < 1.
        double wM1 = std::exp(pq.log_w_left(M + 1));
        double lb = wM1 / (std::exp(log_num) + wM1 / (rho - 1.0));
        double rbar_tail = 1.0 / (1.0 + lb);  // sup over k >= M
        double rbar = rbar_tail;
        for (std::int64_t k = M - 1; k >= 0; --k)
            rbar = std::max(rbar, r_step(k));
        SeriesVerdict phibar = phi(sched, std::min(rbar, 1.0 - 1e-12), tol, 1 << 22);
        if (strong || phibar.converged()) {
            for (std::int64_t k = 0; k <= M; ++k) {
                SeriesVerdict ph = phi(sched, r_step(k), tol, 1 << 22);
                if (!ph.converged())
                    return SeriesVerdict::inconclusive(part.value(), terms, "inner phi: " + ph.witness);
                part.add(r0(k) * ph.value);
                ++terms;
            }
            // r0 shrinks by at most rbar_tail per step beyond the horizon
            double r_tail = r0(M) * rbar_tail / (1.0 - rbar_tail);
            double phi_cap = strong ? cls.sum + (cls.evidence.tail_estimate
                                                     ? *cls.evidence.tail_estimate
                                                     : 0.0)
                                    : phibar.value + (phibar.tail_estimate ? *phibar.tail_estimate
                                                                           : 0.0);
            return SeriesVerdict::converged(part.value(), terms, 0.5 * r_tail * phi_cap,
                                            strong ? "strong impatience shortcut"
                                                   : "sup r < 1 shortcut");
        }
        return SeriesVerdict::inconclusive(part.value(), terms, "phi(rbar) not certified");
    }

    if (drift.kind == DriftKind::Lamperti && drift.param < 0.0 && strong) {
        // Left resistors grow like k^{-2c}: anchored bracket on sum_{k>M} 1/C.
        LampertiTail tb;  // left resistors grow like k^{-2c}; anchor at the horizon
        tb.H = double(M);
        tb.p = -2.0 * drift.param;
        tb.S_H = std::exp(pq.log_c(M));
        tb.R_H = std::exp(pq.log_w_left(M));
        double bb = drift.abs_bound();
        double eps3 = (2.0 / 3.0) / (1.0 - bb * bb) * std::pow(std::abs(drift.param), 3) *
                      (0.5 / (tb.H * tb.H));
        tb.c_lo = tb.R_H * std::pow(tb.H + 1.0, -tb.p) / (1.0 + tb.p);
        tb.c_hi = tb.R_H * std::exp(eps3) * std::pow(tb.H, -tb.p) / (1.0 + tb.p);
        tb.c2 = std::pow(2.0, 1.0 + tb.p) * std::exp(eps3 * 4.0);
        for (std::int64_t k = 0; k <= M; ++k) {
            SeriesVerdict ph = phi(sched, r_step(k), tol, 1 << 22);
            if (!ph.converged())
                return SeriesVerdict::inconclusive(part.value(), terms, "inner phi: " + ph.witness);
            part.add(r0(k) * ph.value);
            ++terms;
        }
        double s_hi =
            (cls.sum + (cls.evidence.tail_estimate ? *cls.evidence.tail_estimate : 0.0)) *
            std::exp(log_num);
        auto zero = [](double) { return 0.0; };
        auto cap = [s_hi](double) { return s_hi; };
        IntegralTail t = tail_sum_over_prefix(tb, zero, cap, s_hi, 0.0);
        return SeriesVerdict::bracketed(part.value(), part.value() + t.hi, terms,
                                        "strong impatience shortcut, anchored r-tail");
    }

    return SeriesVerdict::inconclusive(part.value(), terms, "no certificate for this drift kind");
}

// ---------------------------------------------------------------------------
// Two-sided expected exit time from (-n, n):
//   E_0 T~_n finite  iff  max_m phi(gamma_m) < inf over m in [-(n-1), n-2],
// with gamma_m the product of the two one-step crossing-return probabilities.
// The value adds s_0 for the two boundary edges, each crossed at most once.
// ---------------------------------------------------------------------------

// Two-sided hitting quantities on the window (-n, n), all resistor prefix
// ratios:
//   rho0(m)     = P_0(reach m before +-n)
//   rho_up(m)   = P_m(reach m+1 before +-n)
//   rho_down(m) = P_{m+1}(reach m before +-n)
//   gamma(m)    = rho_up(m) * rho_down(m)
class ExitWindow {
public:
    ExitWindow(const Drift& drift, std::int64_t n) : n_(n) {
        if (n < 2) throw std::invalid_argument("exit window needs n >= 2");
        const std::int64_t E = 2 * n;  // edges (i, i+1), i = -n..n-1; idx = i + n
        std::vector<double> logw(std::size_t(E), 0.0);
        for (std::int64_t i = 1; i <= n - 1; ++i)
            logw[std::size_t(n + i)] =
                logw[std::size_t(n + i - 1)] + std::log1p(-drift(i)) - std::log1p(drift(i));
        for (std::int64_t i = 0; i >= -n + 1; --i)  // W_{i-1} from W_i via b(i)
            logw[std::size_t(n + i - 1)] =
                logw[std::size_t(n + i)] + std::log1p(-drift(i)) - std::log1p(drift(i));
        cumL_.assign(std::size_t(E), 0.0);
        cumR_.assign(std::size_t(E), 0.0);
        cumL_[0] = logw[0];
        for (std::int64_t j = 1; j < E; ++j)
            cumL_[std::size_t(j)] = logaddexp(cumL_[std::size_t(j - 1)], logw[std::size_t(j)]);
        cumR_[std::size_t(E - 1)] = logw[std::size_t(E - 1)];
        for (std::int64_t j = E - 2; j >= 0; --j)
            cumR_[std::size_t(j)] = logaddexp(cumR_[std::size_t(j + 1)], logw[std::size_t(j)]);
    }

    std::int64_t n() const { return n_; }
    double rho_up(std::int64_t m) const {
        return std::exp(cumL_[std::size_t(m + n_ - 1)] - cumL_[std::size_t(m + n_)]);
    }
    double rho_down(std::int64_t m) const {
        return std::exp(cumR_[std::size_t(m + n_ + 1)] - cumR_[std::size_t(m + n_)]);
    }
    double rho0(std::int64_t m) const {
        if (m == 0) return 1.0;
        if (m > 0) return std::exp(cumL_[std::size_t(n_ - 1)] - cumL_[std::size_t(m + n_ - 1)]);
        return std::exp(cumR_[std::size_t(n_)] - cumR_[std::size_t(m + n_)]);
    }
    double gamma(std::int64_t m) const { return rho_up(m) * rho_down(m); }

private:
    std::int64_t n_;
    std::vector<double> cumL_, cumR_;
};

struct TwoSidedExit {
    SeriesVerdict total;
    std::vector<double> gamma;  // gamma_m for m = -(n-1)..n-2
};

inline TwoSidedExit two_sided_exit(const Drift& drift, const PassageSchedule& sched,
                                   std::int64_t n, double tol = 1e-10) {
    ExitWindow win(drift, n);
    auto rho_up = [&](std::int64_t m) { return win.rho_up(m); };
    auto rho_down = [&](std::int64_t m) { return win.rho_down(m); };
    auto rho0 = [&](std::int64_t m) { return win.rho0(m); };

    TwoSidedExit out;
    KahanSum total;
    total.add(1.0);  // expected s_0 cost of the two boundary edges combined
    double half_width = 0.0;
    bool all_ok = true;
    std::int64_t terms = 0;
    for (std::int64_t m = -(n - 1); m <= n - 2; ++m) {
        double g = rho_up(m) * rho_down(m);
        out.gamma.push_back(g);
        SeriesVerdict fe = phi_parity(sched, g, true, tol, 1 << 22);
        SeriesVerdict fo = phi_parity(sched, g, false, tol, 1 << 22);
        if (fe.diverged() || fo.diverged()) {
            out.total = SeriesVerdict::diverged_with(
                total.value(), terms, "phi(gamma_m) diverges at m = " + std::to_string(m));
            return out;
        }
        if (!fe.converged() || !fo.converged()) {
            all_ok = false;
            continue;
        }
        double first, second;  // weights per the first-crossing direction
        if (m >= 0) {
            first = rho0(m + 1);  // even-index costs, entered rightwards
            second = rho0(m);
        } else {
            first = rho0(m);  // entered leftwards
            second = rho0(m + 1);
        }
        total.add(first * fe.value + second * fo.value);
        half_width += first * (fe.tail_estimate ? *fe.tail_estimate : 0.0) +
                      second * (fo.tail_estimate ? *fo.tail_estimate : 0.0);
        ++terms;
    }
    if (!all_ok) {
        out.total = SeriesVerdict::inconclusive(total.value(), terms, "phi(gamma_m) inconclusive");
        return out;
    }
    out.total = SeriesVerdict::converged(total.value() - half_width, terms, half_width,
                                         "finite window, all phi(gamma_m) certified");
    return out;
}

// ---------------------------------------------------------------------------
// Space-dependent impatience on the transitive lattices: s(e) = (1+|e|)^-alpha
// and E xi(u) = p(v0,u)/p(u,v0) = 1, so E tau~ = sum_e s(e).
// Shells: Z has 2 edges at each distance k; Z^2 has 4+8k.
// ---------------------------------------------------------------------------

enum class LatticeGraph { Z1, Z2 };

struct SpaceCriterion {
    PhaseVerdict verdict;
    SeriesVerdict edge_sum;
    double xi_mean = 1.0;  // rho = 1 by transitivity
};

inline SpaceCriterion space_criterion(LatticeGraph g, double alpha, std::int64_t horizon) {
    if (!(alpha > 0.0)) throw std::invalid_argument("space_criterion needs alpha > 0");
    if (horizon < 16) throw std::invalid_argument("space_criterion horizon too small");
    SpaceCriterion out;
    auto shell = [&](double k) {
        return g == LatticeGraph::Z1 ? 2.0 * std::pow(1.0 + k, -alpha)
                                     : (4.0 + 8.0 * k) * std::pow(1.0 + k, -alpha);
    };
    bool finite = g == LatticeGraph::Z1 ? alpha > 1.0 : alpha > 2.0;
    KahanSum part;
    for (std::int64_t k = 0; k <= horizon; ++k) part.add(shell(double(k)));
    if (finite) {
        double K = double(horizon);
        double lo, hi;
        if (g == LatticeGraph::Z1) {
            hi = 2.0 * std::pow(K + 1.0, 1.0 - alpha) / (alpha - 1.0);
            lo = 2.0 * std::pow(K + 2.0, 1.0 - alpha) / (alpha - 1.0);
        } else {
            hi = 8.0 * std::pow(K + 1.0, 2.0 - alpha) / (alpha - 2.0) +
                 4.0 * std::pow(K + 1.0, 1.0 - alpha) / (alpha - 1.0);
            lo = 8.0 * std::pow(K + 2.0, 2.0 - alpha) / (alpha - 2.0);
        }
        out.edge_sum = SeriesVerdict::bracketed(part.value() + lo, part.value() + hi, horizon + 1,
                                                "shell counts + integral tail bracket");
        out.verdict = PhaseVerdict::PositiveRecurrent;
    } else {
        out.edge_sum = SeriesVerdict::diverged_with(part.value(), horizon + 1,
                                                    g == LatticeGraph::Z1
                                                        ? "2(1+k)^-alpha >= 2/(1+k)"
                                                        : "shell terms >= 8/(1+k)");
        out.verdict = PhaseVerdict::NullRecurrent;
    }
    return out;
}

}  // namespace irw
