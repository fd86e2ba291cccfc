#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

namespace irw {

enum class Verdict { Converged, Diverged, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Converged: return "Converged";
        case Verdict::Diverged: return "Diverged";
        default: return "Inconclusive";
    }
}

// A truncated series evaluation with a three-valued outcome.
//
// Converged: `value` lies within `tail_estimate` of the true sum, with a
// certified bound (never a heuristic extrapolation).
// Diverged: a certified witness (partial sums past 1/abs_tol, a divergent
// minorant, or terms bounded away from zero) — recorded in `witness`.
// Inconclusive: neither certificate fired within the horizon.
struct SeriesVerdict {
    Verdict verdict = Verdict::Inconclusive;
    double partial_sum = 0.0;
    std::int64_t terms_used = 0;
    std::optional<double> tail_estimate;
    double value = std::numeric_limits<double>::quiet_NaN();
    std::string witness;

    bool converged() const { return verdict == Verdict::Converged; }
    bool diverged() const { return verdict == Verdict::Diverged; }

    static SeriesVerdict converged(double partial, std::int64_t terms, double tail_half_width,
                                   std::string why) {
        SeriesVerdict v;
        v.verdict = Verdict::Converged;
        v.partial_sum = partial;
        v.terms_used = terms;
        v.tail_estimate = tail_half_width;
        v.value = partial + tail_half_width;  // callers pass the bracket low edge + half width
        v.witness = std::move(why);
        return v;
    }

    // Bracket form: the true sum lies in [lo, hi].
    static SeriesVerdict bracketed(double lo, double hi, std::int64_t terms, std::string why) {
        SeriesVerdict v;
        v.verdict = Verdict::Converged;
        v.partial_sum = lo;
        v.terms_used = terms;
        v.tail_estimate = 0.5 * (hi - lo);
        v.value = 0.5 * (lo + hi);
        v.witness = std::move(why);
        return v;
    }

    static SeriesVerdict exact(double value, std::int64_t terms, std::string why) {
        SeriesVerdict v;
        v.verdict = Verdict::Converged;
        v.partial_sum = value;
        v.terms_used = terms;
        v.tail_estimate = 0.0;
        v.value = value;
        v.witness = std::move(why);
        return v;
    }

    static SeriesVerdict diverged_with(double partial, std::int64_t terms, std::string why) {
        SeriesVerdict v;
        v.verdict = Verdict::Diverged;
        v.partial_sum = partial;
        v.terms_used = terms;
        v.witness = std::move(why);
        return v;
    }

    static SeriesVerdict inconclusive(double partial, std::int64_t terms, std::string why) {
        SeriesVerdict v;
        v.verdict = Verdict::Inconclusive;
        v.partial_sum = partial;
        v.terms_used = terms;
        v.witness = std::move(why);
        return v;
    }
};

// log(exp(a) + exp(b)) without overflow.
inline double logaddexp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double m = a > b ? a : b;
    return m + std::log1p(std::exp(-(std::abs(a - b))));
}

// Compensated (Kahan) accumulator for long sums.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }
    void reset() { s_ = 0.0; c_ = 0.0; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

// Bracket for sums of a monotone decreasing positive f over integers k > K:
//   integral(K+1..inf) <= sum_{k>K} f(k) <= integral(K..inf).
// Callers supply the antiderivative tail F(x) = integral_x^inf f.
struct IntegralTail {
    double lo;
    double hi;
};

}  // namespace irw
