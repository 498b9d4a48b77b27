#include "kets/kde.hpp"

#include <algorithm>
#include <cmath>

#include "kets/errors.hpp"

namespace kets {

double estimate_bandwidth(const std::vector<double>& scores, double quantile) {
    const std::size_t n = scores.size();
    if (n == 0) throw InsufficientSamplesError("estimate_bandwidth: empty score list");
    if (n == 1) return kBandwidthSentinel;

    std::size_t n_neighbors = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(quantile * static_cast<double>(n))));
    n_neighbors = std::min(n_neighbors, n - 1);

    double sum_of_maxima = 0.0;
    std::vector<double> dists;
    dists.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        dists.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) dists.push_back(std::abs(scores[i] - scores[j]));
        }
        std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(n_neighbors - 1), dists.end());
        sum_of_maxima += dists[n_neighbors - 1];
    }
    const double bw = sum_of_maxima / static_cast<double>(n);
    return bw <= kBandwidthSentinel ? kBandwidthSentinel : bw;
}

DensityCurve kde_density(const std::vector<double>& scores, double bandwidth) {
    if (scores.empty()) throw InsufficientSamplesError("kde_density: empty score list");
    if (!(bandwidth > 0.0)) throw ConfigError("kde_density: bandwidth must be positive");

    const double upper = *std::max_element(scores.begin(), scores.end()) + 1.0;
    const double n = static_cast<double>(scores.size());
    const double norm = 1.0 / (n * bandwidth * std::sqrt(2.0 * M_PI));

    DensityCurve curve;
    curve.bandwidth = bandwidth;
    curve.grid.resize(kGridPoints);
    curve.density.resize(kGridPoints);
    for (int i = 0; i < kGridPoints; ++i) {
        const double x = upper * static_cast<double>(i) / static_cast<double>(kGridPoints - 1);
        double acc = 0.0;
        for (double s : scores) {
            const double z = (x - s) / bandwidth;
            acc += std::exp(-0.5 * z * z);
        }
        curve.grid[i] = x;
        curve.density[i] = norm * acc;
    }
    return curve;
}

std::vector<double> find_local_minima(const DensityCurve& curve) {
    std::vector<double> minima;
    for (std::size_t i = 1; i + 1 < curve.density.size(); ++i) {
        if (curve.density[i] < curve.density[i - 1] && curve.density[i] < curve.density[i + 1]) {
            minima.push_back(curve.grid[i]);
        }
    }
    return minima;
}

std::vector<int> segment_honest(const std::map<int, double>& scores, const std::vector<int>& sampled,
                                double quantile) {
    if (sampled.empty()) throw EmptyAggregateError("segment_honest: no sampled clients");

    std::vector<int> everyone(sampled);
    std::sort(everyone.begin(), everyone.end());

    std::vector<double> values;
    values.reserve(sampled.size());
    for (int c : everyone) values.push_back(scores.at(c));

    const double bw = estimate_bandwidth(values, quantile);
    if (bw <= kBandwidthSentinel) return everyone;

    const DensityCurve curve = kde_density(values, bw);
    const std::vector<double> minima = find_local_minima(curve);
    if (minima.empty()) return everyone;

    const double boundary = minima.back();
    std::vector<int> honest;
    for (int c : everyone) {
        if (scores.at(c) >= boundary) honest.push_back(c);
    }
    return honest;
}

}  // namespace kets
