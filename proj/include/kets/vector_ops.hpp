#ifndef KETS_VECTOR_OPS_HPP
#define KETS_VECTOR_OPS_HPP

#include <cstddef>
#include <vector>

namespace kets {

// Flat vector of model-parameter deltas. Every attack and defense in this
// library operates on these.
using UpdateVector = std::vector<double>;

double dot(const UpdateVector& a, const UpdateVector& b);
double l2_norm(const UpdateVector& v);

// Cosine of the angle between a and b, clamped to [-1, 1] against rounding.
// Throws ZeroNormError if either vector has zero norm, DimensionError on
// length mismatch.
double cosine_similarity(const UpdateVector& a, const UpdateVector& b);

// Euclidean distance between a and b. Throws DimensionError on mismatch.
double l2_distance(const UpdateVector& a, const UpdateVector& b);

// Coordinate-wise weighted mean with weights normalized to sum 1.
// Throws EmptyAggregateError when vs is empty or the weights sum to zero,
// DimensionError on ragged input.
UpdateVector weighted_mean(const std::vector<UpdateVector>& vs, const std::vector<double>& ws);

// Unweighted mean, a convenience over weighted_mean.
UpdateVector mean(const std::vector<UpdateVector>& vs);

// Per-coordinate population (1/n) standard deviation.
// Throws InsufficientSamplesError for fewer than two vectors.
UpdateVector coordinate_std(const std::vector<UpdateVector>& vs);

UpdateVector add(const UpdateVector& a, const UpdateVector& b);
UpdateVector subtract(const UpdateVector& a, const UpdateVector& b);
UpdateVector scale(const UpdateVector& v, double s);

}  // namespace kets

#endif  // KETS_VECTOR_OPS_HPP
