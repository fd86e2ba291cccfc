#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace irw {

// Streaming mean/variance (Welford), mergeable across workers in index order.
class Welford {
public:
    void add(double x) {
        ++n_;
        double d = x - mean_;
        mean_ += d / double(n_);
        m2_ += d * (x - mean_);
    }
    void merge(const Welford& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        double d = o.mean_ - mean_;
        std::int64_t n = n_ + o.n_;
        m2_ += o.m2_ + d * d * double(n_) * double(o.n_) / double(n);
        mean_ += d * double(o.n_) / double(n);
        n_ = n;
    }
    std::int64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / double(n_ - 1) : 0.0; }
    double stderr_mean() const { return n_ > 0 ? std::sqrt(variance() / double(n_)) : 0.0; }

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Kolmogorov-Smirnov distance between a sample and Uniform[0,1].
inline double ks_uniform(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double x = samples[i];
        d = std::max(d, std::abs(double(i + 1) / n - x));
        d = std::max(d, std::abs(x - double(i) / n));
    }
    return d;
}

// Total variation distance between two probability vectors of equal length.
inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
    return 0.5 * tv;
}

// Fixed-width integer histogram with an overflow bucket.
class CountHistogram {
public:
    explicit CountHistogram(std::int64_t max_bin) : bins_(std::size_t(max_bin) + 1, 0) {}
    void add(std::int64_t v) {
        if (v >= 0 && v < std::int64_t(bins_.size()))
            ++bins_[std::size_t(v)];
        else
            ++overflow_;
    }
    void merge(const CountHistogram& o) {
        for (std::size_t i = 0; i < bins_.size(); ++i) bins_[i] += o.bins_[i];
        overflow_ += o.overflow_;
    }
    std::int64_t total() const {
        std::int64_t t = overflow_;
        for (auto b : bins_) t += b;
        return t;
    }
    // P(value >= v) from the recorded counts.
    double tail_prob(std::int64_t v) const {
        std::int64_t t = overflow_;
        for (std::size_t i = std::size_t(std::max<std::int64_t>(v, 0)); i < bins_.size(); ++i)
            t += bins_[i];
        return double(t) / double(total());
    }
    const std::vector<std::int64_t>& bins() const { return bins_; }
    std::int64_t overflow() const { return overflow_; }

private:
    std::vector<std::int64_t> bins_;
    std::int64_t overflow_ = 0;
};

}  // namespace irw
