#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "irw/series.hpp"

namespace irw {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct CertificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ScheduleKind { Power, Geometric, Factorial, ZeroTail, Constant, Custom };
enum class Monotone { Decreasing, Increasing, Constant };

inline const char* to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::Power: return "power";
        case ScheduleKind::Geometric: return "geometric";
        case ScheduleKind::Factorial: return "factorial";
        case ScheduleKind::ZeroTail: return "zerotail";
        case ScheduleKind::Constant: return "constant";
        default: return "custom";
    }
}

// Passage-time sequence s_0, s_1, ... with s_0 = 1. The k-th recrossing of an
// edge costs s_k time units. Custom sequences hold their last value beyond the
// stored prefix.
class PassageSchedule {
public:
    static PassageSchedule power(double alpha) {
        if (!(alpha > 0.0)) throw std::invalid_argument("power schedule needs alpha > 0");
        return PassageSchedule(ScheduleKind::Power, alpha, {}, Monotone::Decreasing);
    }
    static PassageSchedule geometric(double a) {
        if (!(a > 0.0)) throw std::invalid_argument("geometric schedule needs a > 0");
        Monotone tag = a < 1.0 ? Monotone::Decreasing
                               : (a > 1.0 ? Monotone::Increasing : Monotone::Constant);
        return PassageSchedule(ScheduleKind::Geometric, a, {}, tag);
    }
    static PassageSchedule factorial() {
        return PassageSchedule(ScheduleKind::Factorial, 0.0, {}, Monotone::Increasing);
    }
    static PassageSchedule zero_tail() {
        return PassageSchedule(ScheduleKind::ZeroTail, 0.0, {}, Monotone::Decreasing);
    }
    static PassageSchedule constant() {
        return PassageSchedule(ScheduleKind::Constant, 0.0, {}, Monotone::Constant);
    }
    static PassageSchedule custom(std::vector<double> s) {
        if (s.empty() || s[0] != 1.0) throw std::invalid_argument("custom schedule must start at s0 = 1");
        bool noninc = true, nondec = true;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            if (s[i] < 0 || s[i + 1] < 0) throw std::invalid_argument("passage times must be nonnegative");
            if (s[i + 1] > s[i]) noninc = false;
            if (s[i + 1] < s[i]) nondec = false;
        }
        if (!noninc && !nondec) throw std::invalid_argument("custom schedule must be monotone");
        Monotone tag = (noninc && nondec) ? Monotone::Constant
                                          : (noninc ? Monotone::Decreasing : Monotone::Increasing);
        return PassageSchedule(ScheduleKind::Custom, 0.0, std::move(s), tag);
    }

    ScheduleKind kind() const { return kind_; }
    double param() const { return param_; }
    Monotone tag() const { return tag_; }
    const std::vector<double>& custom_values() const { return custom_; }

    double s(std::int64_t k) const {
        switch (kind_) {
            case ScheduleKind::Power:
                return k == 0 ? 1.0 : std::pow(static_cast<double>(k), -param_);
            case ScheduleKind::Geometric:
                return std::pow(param_, static_cast<double>(k));
            case ScheduleKind::Factorial:
                // overflows to +inf past k ~ 170, which is the honest limit value
                return k <= 1 ? 1.0 : std::exp(std::lgamma(static_cast<double>(k) + 1.0));
            case ScheduleKind::ZeroTail:
                return k == 0 ? 1.0 : 0.0;
            case ScheduleKind::Constant:
                return 1.0;
            default: {
                std::size_t i = static_cast<std::size_t>(k);
                return i < custom_.size() ? custom_[i] : custom_.back();
            }
        }
    }

    double log_s(std::int64_t k) const {
        switch (kind_) {
            case ScheduleKind::Power:
                return k == 0 ? 0.0 : -param_ * std::log(static_cast<double>(k));
            case ScheduleKind::Geometric:
                return static_cast<double>(k) * std::log(param_);
            case ScheduleKind::Factorial:
                return std::lgamma(static_cast<double>(k) + 1.0);
            default: {
                double v = s(k);
                return v > 0 ? std::log(v) : -kInf;
            }
        }
    }

    // s*_j = s_{2j-2} + s_{2j-1}, j >= 1; the per-round-trip cost.
    double star(std::int64_t j) const { return s(2 * j - 2) + s(2 * j - 1); }

    double log_star(std::int64_t j) const {
        double v = star(j);
        if (v > 0.0 && std::isfinite(v)) return std::log(v);
        return logaddexp(log_s(2 * j - 2), log_s(2 * j - 1));  // over/underflowed sum
    }

    // Exact sum S = sum_k s_k where a closed form exists. +inf means certified
    // divergent; nullopt means a truncated certification is required (Power).
    std::optional<double> closed_form_sum() const {
        switch (kind_) {
            case ScheduleKind::Geometric:
                return param_ < 1.0 ? std::optional<double>(1.0 / (1.0 - param_))
                                    : std::optional<double>(kInf);
            case ScheduleKind::ZeroTail:
                return 1.0;
            case ScheduleKind::Constant:
            case ScheduleKind::Factorial:
                return kInf;
            case ScheduleKind::Custom: {
                if (custom_.back() > 0.0) return kInf;
                double t = 0.0;
                for (double v : custom_) t += v;
                return t;
            }
            default:
                return std::nullopt;
        }
    }

    bool all_positive() const {
        switch (kind_) {
            case ScheduleKind::ZeroTail: return false;
            case ScheduleKind::Custom:
                for (double v : custom_)
                    if (v == 0.0) return false;
                return custom_.back() > 0.0;
            default: return true;
        }
    }

private:
    PassageSchedule(ScheduleKind k, double p, std::vector<double> c, Monotone t)
        : kind_(k), param_(p), custom_(std::move(c)), tag_(t) {}

    ScheduleKind kind_;
    double param_;
    std::vector<double> custom_;
    Monotone tag_;
};

enum class Impatience { StronglyImpatient, WeaklyImpatient, Ageing, InfinitelyImpatient };

inline const char* to_string(Impatience c) {
    switch (c) {
        case Impatience::StronglyImpatient: return "StronglyImpatient";
        case Impatience::WeaklyImpatient: return "WeaklyImpatient";
        case Impatience::Ageing: return "Ageing";
        default: return "InfinitelyImpatient";
    }
}

struct ImpatienceClass {
    Impatience kind;
    double sum;  // certified S for the strongly impatient case, +inf otherwise
    SeriesVerdict evidence;
};

// Classifies the schedule per the (A1)/(A2) dichotomy plus the two extreme
// cases. Certificates: closed forms, integral tail brackets (power), and
// divergent minorants (s_k bounded below by c/k or by a positive constant).
inline ImpatienceClass classify(const PassageSchedule& sched, std::int64_t horizon, double tol) {
    if (horizon < 1) throw std::invalid_argument("classify horizon must be >= 1");
    switch (sched.kind()) {
        case ScheduleKind::ZeroTail:
            return {Impatience::InfinitelyImpatient, 1.0,
                    SeriesVerdict::exact(1.0, 1, "only s0 contributes")};
        case ScheduleKind::Geometric: {
            double a = sched.param();
            if (a < 1.0) {
                double S = 1.0 / (1.0 - a);
                return {Impatience::StronglyImpatient, S,
                        SeriesVerdict::exact(S, 0, "geometric closed form")};
            }
            if (a == 1.0)
                return {Impatience::WeaklyImpatient, kInf,
                        SeriesVerdict::diverged_with(0, 0, "constant terms")};
            return {Impatience::Ageing, kInf,
                    SeriesVerdict::diverged_with(0, 0, "terms grow geometrically")};
        }
        case ScheduleKind::Constant:
            return {Impatience::WeaklyImpatient, kInf,
                    SeriesVerdict::diverged_with(0, 0, "constant terms")};
        case ScheduleKind::Factorial:
            return {Impatience::Ageing, kInf,
                    SeriesVerdict::diverged_with(0, 0, "factorial growth")};
        case ScheduleKind::Power: {
            double alpha = sched.param();
            if (alpha > 1.0) {
                // S = 1 + sum_{k>=1} k^-alpha, with an integral bracket for the tail.
                std::int64_t K = std::min<std::int64_t>(horizon, 2'000'000);
                KahanSum part;
                part.add(1.0);
                for (std::int64_t k = 1; k <= K; ++k) part.add(std::pow(double(k), -alpha));
                double hi_tail = std::pow(double(K), 1.0 - alpha) / (alpha - 1.0);
                double lo_tail = std::pow(double(K) + 1.0, 1.0 - alpha) / (alpha - 1.0);
                auto ev = SeriesVerdict::bracketed(part.value() + lo_tail, part.value() + hi_tail,
                                                  K + 1, "integral tail bracket");
                (void)tol;
                return {Impatience::StronglyImpatient, ev.value, ev};
            }
            return {Impatience::WeaklyImpatient, kInf,
                    SeriesVerdict::diverged_with(0, 0, "s_k >= 1/k for alpha <= 1")};
        }
        default: {  // Custom
            const auto& v = sched.custom_values();
            double tail = v.back();
            if (sched.tag() != Monotone::Increasing) {
                bool zero_past_s0 = tail == 0.0;
                for (std::size_t i = 1; i < v.size() && zero_past_s0; ++i)
                    if (v[i] != 0.0) zero_past_s0 = false;
                if (zero_past_s0)
                    return {Impatience::InfinitelyImpatient, 1.0,
                            SeriesVerdict::exact(1.0, 1, "zero tail")};
                if (tail == 0.0) {
                    double S = 0.0;
                    for (double x : v) S += x;
                    return {Impatience::StronglyImpatient, S,
                            SeriesVerdict::exact(S, std::int64_t(v.size()), "finite support")};
                }
                return {Impatience::WeaklyImpatient, kInf,
                        SeriesVerdict::diverged_with(0, 0, "positive limit minorant")};
            }
            // Increasing custom sequences stabilise at the held value, so they are
            // neither impatient nor genuinely ageing.
            throw CertificationError("bounded increasing schedule: neither impatient nor ageing");
        }
    }
}

namespace detail {

// Generic tail-certified sum of t_j = coeff(j) * z^j, j from j0, where the
// caller promises coeff is nonincreasing from `noninc_from` (so the term ratio
// is eventually <= z).
template <class Coeff>
SeriesVerdict sum_ratio_certified(Coeff coeff, double z, std::int64_t j0, std::int64_t noninc_from,
                                  double abs_tol, std::int64_t term_cap, const char* label) {
    KahanSum acc;
    double zj = std::pow(z, static_cast<double>(j0));
    std::int64_t j = j0;
    for (; j <= term_cap; ++j) {
        double t = coeff(j) * zj;
        acc.add(t);
        if (j >= noninc_from && z < 1.0) {
            double tail = t * z / (1.0 - z);
            if (tail < abs_tol)
                return SeriesVerdict::converged(acc.value(), j - j0 + 1, 0.5 * tail,
                                                std::string(label) + ": geometric tail");
        }
        zj *= z;
    }
    return SeriesVerdict::inconclusive(acc.value(), term_cap - j0 + 1,
                                       std::string(label) + ": term cap exhausted");
}

}  // namespace detail

// Passage generating function phi(z) = sum_{j>=1} s*_j z^j.
inline SeriesVerdict phi(const PassageSchedule& sched, double z, double abs_tol = 1e-10,
                         std::int64_t term_cap = 1'000'000) {
    if (z < 0.0) throw std::invalid_argument("phi needs z >= 0");
    if (z == 0.0) return SeriesVerdict::exact(0.0, 0, "empty series");
    switch (sched.kind()) {
        case ScheduleKind::ZeroTail:
            return SeriesVerdict::exact(z, 1, "phi(z) = z");
        case ScheduleKind::Constant:
            if (z < 1.0) return SeriesVerdict::exact(2.0 * z / (1.0 - z), 0, "2z/(1-z)");
            return SeriesVerdict::diverged_with(2.0 * z, 1, "terms 2 z^j do not vanish");
        case ScheduleKind::Geometric: {
            double a = sched.param();
            double r = a * a * z;
            if (r < 1.0)
                return SeriesVerdict::exact((1.0 + a) * z / (1.0 - r), 0, "(1+a)z/(1-a^2 z)");
            return SeriesVerdict::diverged_with((1.0 + a) * z, 1, "term ratio a^2 z >= 1");
        }
        case ScheduleKind::Factorial: {
            std::int64_t jstar = std::max<std::int64_t>(1, std::int64_t(std::ceil(0.5 / z)));
            return SeriesVerdict::diverged_with(
                0, jstar, "terms nondecreasing from j = " + std::to_string(jstar));
        }
        case ScheduleKind::Power: {
            double alpha = sched.param();
            if (z < 1.0)
                return detail::sum_ratio_certified([&](std::int64_t j) { return sched.star(j); },
                                                   z, 1, 1, abs_tol, term_cap, "phi");
            if (z == 1.0) {
                if (alpha > 1.0) {
                    auto cls = classify(sched, term_cap, abs_tol);
                    auto ev = cls.evidence;
                    ev.witness = "phi(1) = S, " + ev.witness;
                    return ev;
                }
                return SeriesVerdict::diverged_with(0, 0, "phi(1) = S with s_k >= 1/k");
            }
            // z > 1: ratio z * s*_{j+1}/s*_j >= z (1 - 3/(2j+1))^alpha >= 1 eventually.
            double x = 1.0 - std::pow(z, -1.0 / alpha);
            std::int64_t jstar =
                std::max<std::int64_t>(2, std::int64_t(std::ceil((3.0 / x - 1.0) / 2.0)));
            return SeriesVerdict::diverged_with(
                0, jstar, "terms nondecreasing from j = " + std::to_string(jstar));
        }
        default: {  // Custom: exact finite part + geometric closed-form tail
            const auto& v = sched.custom_values();
            double c = v.back();
            std::int64_t Jc = static_cast<std::int64_t>(v.size() / 2) + 1;  // 2Jc-2 >= |v| holds
            KahanSum head;
            double zj = z;
            for (std::int64_t j = 1; j < Jc; ++j) {
                head.add(sched.star(j) * zj);
                zj *= z;
            }
            if (z < 1.0) {
                double tail = 2.0 * c * zj / (1.0 - z);  // zj = z^Jc here
                return SeriesVerdict::exact(head.value() + tail, Jc, "finite part + geometric tail");
            }
            if (c == 0.0) return SeriesVerdict::exact(head.value(), Jc, "finite support");
            return SeriesVerdict::diverged_with(head.value(), Jc, "held tail 2c z^j does not vanish");
        }
    }
}

// Even/odd passage series used for two-sided exit times:
//   phi_even(z) = sum_{k>=0} z^k s_{2k},  phi_odd(z) = sum_{k>=1} z^k s_{2k-1}.
inline SeriesVerdict phi_parity(const PassageSchedule& sched, double z, bool even,
                                double abs_tol = 1e-10, std::int64_t term_cap = 1'000'000) {
    if (z < 0.0) throw std::invalid_argument("phi_parity needs z >= 0");
    auto coeff = [&](std::int64_t k) { return even ? sched.s(2 * k) : sched.s(2 * k - 1); };
    std::int64_t k0 = even ? 0 : 1;
    if (z == 0.0) return SeriesVerdict::exact(coeff(k0) * (even ? 1.0 : 0.0), 1, "z = 0");
    switch (sched.kind()) {
        case ScheduleKind::ZeroTail:
            return SeriesVerdict::exact(even ? 1.0 : 0.0, 1, "zero tail");
        case ScheduleKind::Constant:
            if (z < 1.0)
                return SeriesVerdict::exact((even ? 1.0 : z) / (1.0 - z), 0, "geometric closed form");
            return SeriesVerdict::diverged_with(0, 1, "constant terms at z >= 1");
        case ScheduleKind::Geometric: {
            double a = sched.param(), r = z * a * a;
            if (r < 1.0)
                return SeriesVerdict::exact((even ? 1.0 : z * a) / (1.0 - r), 0,
                                            "geometric closed form");
            return SeriesVerdict::diverged_with(0, 1, "term ratio z a^2 >= 1");
        }
        case ScheduleKind::Factorial: {
            std::int64_t kstar = std::max<std::int64_t>(1, std::int64_t(std::ceil(0.5 / z)));
            return SeriesVerdict::diverged_with(0, kstar, "factorial growth beats z^k");
        }
        case ScheduleKind::Power:
            if (z >= 1.0) {
                if (z == 1.0)
                    return SeriesVerdict::diverged_with(0, 0, "phi_parity(1) has s_k >= 1/k tail");
                double x = 1.0 - std::pow(z, -1.0 / sched.param());
                std::int64_t kstar =
                    std::max<std::int64_t>(2, std::int64_t(std::ceil(1.0 / x)));
                return SeriesVerdict::diverged_with(0, kstar, "terms nondecreasing eventually");
            }
            return detail::sum_ratio_certified(coeff, z, k0, std::max<std::int64_t>(k0, 1), abs_tol,
                                               term_cap, "phi_parity");
        default: {  // Custom
            std::int64_t held_from = static_cast<std::int64_t>(sched.custom_values().size() / 2) + 1;
            if (z >= 1.0) {
                if (sched.custom_values().back() == 0.0) {
                    KahanSum acc;
                    double zk = std::pow(z, double(k0));
                    for (std::int64_t k = k0; k < held_from + 1; ++k) {
                        acc.add(coeff(k) * zk);
                        zk *= z;
                    }
                    return SeriesVerdict::exact(acc.value(), held_from + 1 - k0, "finite support");
                }
                return SeriesVerdict::diverged_with(0, held_from, "held tail does not vanish");
            }
            return detail::sum_ratio_certified(coeff, z, k0, held_from, abs_tol, term_cap,
                                               "phi_parity");
        }
    }
}

struct PassageRadius {
    double value;
    bool window_stable;
    bool exact;
};

// Numerical estimate of R^pass = 1 / limsup_k (s*_k)^{1/k} over a dyadic tail
// window, with a stability flag comparing against the previous window.
inline PassageRadius passage_radius_estimate(const PassageSchedule& sched, std::int64_t horizon) {
    if (horizon < 8) throw std::invalid_argument("passage_radius horizon must be >= 8");
    auto window_max = [&](std::int64_t lo, std::int64_t hi) {
        double best = -kInf;  // log of max (s*_k)^{1/k}
        for (std::int64_t k = lo; k <= hi; ++k) {
            double ls = sched.log_star(k);
            if (ls == -kInf) continue;
            best = std::max(best, ls / static_cast<double>(k));
        }
        return best;
    };
    double cur = window_max(horizon / 2, horizon);
    double prev = window_max(std::max<std::int64_t>(1, horizon / 4), horizon / 2 - 1);
    double value;
    if (cur == -kInf)
        value = kInf;  // all-zero tail window
    else
        value = std::exp(-cur);
    bool stable;
    if (cur == -kInf || prev == -kInf)
        stable = cur == prev;
    else
        stable = std::abs(cur - prev) <= 0.05 * std::max(1.0, std::abs(cur));
    return {value, stable, false};
}

inline PassageRadius passage_radius(const PassageSchedule& sched, std::int64_t horizon = 4096) {
    switch (sched.kind()) {
        case ScheduleKind::Power:
        case ScheduleKind::Constant:
            return {1.0, true, true};
        case ScheduleKind::Geometric:
            return {1.0 / (sched.param() * sched.param()), true, true};
        case ScheduleKind::Factorial:
            return {0.0, true, true};
        case ScheduleKind::ZeroTail:
            return {kInf, true, true};
        default:
            if (sched.custom_values().back() == 0.0) return {kInf, true, true};
            return {1.0, true, true};  // held positive tail: (2c)^{1/k} -> 1
    }
    (void)horizon;
}

}  // namespace irw
