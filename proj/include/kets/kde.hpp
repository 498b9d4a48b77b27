#ifndef KETS_KDE_HPP
#define KETS_KDE_HPP

#include <map>
#include <vector>

namespace kets {

// Smoothing bandwidth below which the score set is treated as degenerate
// (all points effectively equal); segmentation then keeps everyone.
inline constexpr double kBandwidthSentinel = 1e-9;

// Number of evaluation points of the density grid.
inline constexpr int kGridPoints = 1000;

// Default neighbor quantile for bandwidth estimation.
inline constexpr double kBandwidthQuantile = 0.3;

// Gaussian KDE of a set of trust scores, evaluated on a uniform grid
// over [0, max(scores) + 1].
struct DensityCurve {
    std::vector<double> grid;     // strictly increasing, uniform spacing
    std::vector<double> density;  // nonnegative, same length as grid
    double bandwidth = 0.0;
};

// Mean over all points of the distance to their k-th nearest other point,
// with k = max(1, floor(quantile * n)). Falls back to the degenerate
// sentinel when the scores are (numerically) all equal.
// Throws InsufficientSamplesError on empty input.
double estimate_bandwidth(const std::vector<double>& scores, double quantile = kBandwidthQuantile);

// Gaussian kernel density estimate over the 1000-point grid.
DensityCurve kde_density(const std::vector<double>& scores, double bandwidth);

// Grid values of the strict interior local minima of the curve, ascending.
// Plateaus do not count.
std::vector<double> find_local_minima(const DensityCurve& curve);

// Algorithm: estimate a density over the sampled clients' trust scores, cut
// at the last local minimum, and keep every client at or above the cut.
// Degenerate inputs (all scores equal, or no interior minimum) keep everyone.
// Returns client ids sorted ascending. Throws EmptyAggregateError when
// sampled is empty.
std::vector<int> segment_honest(const std::map<int, double>& scores, const std::vector<int>& sampled,
                                double quantile = kBandwidthQuantile);

}  // namespace kets

#endif  // KETS_KDE_HPP
