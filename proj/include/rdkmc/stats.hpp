#pragma once

// Small sample-statistics helpers shared by the experiment drivers and the
// test suites: mean/SE summaries, empirical CDFs with a sup-norm distance,
// and a fixed log-spaced histogram for rebinding-time outputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rdkmc/errors.hpp"

namespace rdkmc {

struct SampleStats {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;

    static SampleStats of(const std::vector<double>& xs) {
        SampleStats s;
        s.n = xs.size();
        if (s.n == 0) return s;
        double sum = 0.0;
        for (double x : xs) sum += x;
        s.mean = sum / static_cast<double>(s.n);
        if (s.n > 1) {
            double ss = 0.0;
            for (double x : xs) ss += (x - s.mean) * (x - s.mean);
            s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
            s.se = s.sd / std::sqrt(static_cast<double>(s.n));
        }
        return s;
    }
};

// Empirical CDF over the *uncensored* samples of an ensemble of size
// total_n; censored mass never accumulates, so F(inf) = 1 - censored/total.
class Ecdf {
public:
    Ecdf(std::vector<double> samples, std::size_t total_n)
        : sorted_(std::move(samples)), total_(total_n == 0 ? sorted_.size() : total_n) {
        if (sorted_.size() > total_) throw InvalidParams("Ecdf: more samples than total_n");
        std::sort(sorted_.begin(), sorted_.end());
    }

    explicit Ecdf(std::vector<double> samples) : Ecdf(std::move(samples), 0) {}

    double operator()(double t) const {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(total_);
    }

    const std::vector<double>& sorted() const { return sorted_; }
    std::size_t total() const { return total_; }

private:
    std::vector<double> sorted_;
    std::size_t total_;
};

// sup_{t >= t_min} |F(t) - G(t)|, evaluated over both sample sets (the sup of
// a difference of step functions is attained at a jump)
inline double ecdf_sup_distance(const Ecdf& f, const Ecdf& g, double t_min = 0.0) {
    double d = std::abs(f(t_min) - g(t_min));
    for (const auto* src : {&f, &g})
        for (double t : src->sorted())
            if (t >= t_min) {
                d = std::max(d, std::abs(f(t) - g(t)));
                // left limit at the jump
                d = std::max(d, std::abs(f(std::nextafter(t, -1.0)) - g(std::nextafter(t, -1.0))));
            }
    return d;
}

// Fixed decade-aligned log grid so histograms are byte-stable across runs:
// 10 bins per decade covering [1e-10, 1e4) seconds plus under/overflow.
class LogHistogram {
public:
    static constexpr double t_lo = 1e-10;
    static constexpr double t_hi = 1e4;
    static constexpr int bins_per_decade = 10;

    LogHistogram() : counts_(static_cast<std::size_t>(bin_count()) + 2, 0) {}

    static int bin_count() { return 14 * bins_per_decade; }

    static double edge(int i) { return t_lo * std::pow(10.0, static_cast<double>(i) / bins_per_decade); }

    void add(double t) {
        if (t < t_lo) {
            ++counts_.front();
            return;
        }
        if (t >= t_hi) {
            ++counts_.back();
            return;
        }
        const int b = static_cast<int>(std::floor(std::log10(t / t_lo) * bins_per_decade));
        const int clamped = std::clamp(b, 0, bin_count() - 1);
        ++counts_[static_cast<std::size_t>(clamped) + 1];
    }

    std::size_t underflow() const { return counts_.front(); }
    std::size_t overflow() const { return counts_.back(); }
    std::size_t count(int bin) const { return counts_[static_cast<std::size_t>(bin) + 1]; }

private:
    std::vector<std::size_t> counts_;
};

} // namespace rdkmc
