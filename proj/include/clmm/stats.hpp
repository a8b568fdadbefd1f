#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace clmm {

struct SampleSummary {
    double mean = 0.0;
    double std_dev = 0.0;
    double std_err = 0.0;
    std::size_t count = 0;
};

// Two-pass mean / unbiased standard deviation, summed in index order.
inline SampleSummary summarize(std::span<const double> xs) {
    SampleSummary s;
    s.count = xs.size();
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        s.std_err = s.std_dev / std::sqrt(static_cast<double>(xs.size()));
    }
    return s;
}

}  // namespace clmm
