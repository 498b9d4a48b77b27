#include "kets/vector_ops.hpp"

#include <algorithm>
#include <cmath>

#include "kets/errors.hpp"

namespace kets {

namespace {

void require_same_length(const UpdateVector& a, const UpdateVector& b, const char* what) {
    if (a.size() != b.size()) {
        throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()) + ")");
    }
}

}  // namespace

double dot(const UpdateVector& a, const UpdateVector& b) {
    require_same_length(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(const UpdateVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double cosine_similarity(const UpdateVector& a, const UpdateVector& b) {
    require_same_length(a, b, "cosine_similarity");
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw ZeroNormError("cosine_similarity: zero-norm input");
    }
    const double c = dot(a, b) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

double l2_distance(const UpdateVector& a, const UpdateVector& b) {
    require_same_length(a, b, "l2_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

UpdateVector weighted_mean(const std::vector<UpdateVector>& vs, const std::vector<double>& ws) {
    if (vs.empty()) throw EmptyAggregateError("weighted_mean: no vectors");
    if (vs.size() != ws.size()) {
        throw DimensionError("weighted_mean: " + std::to_string(vs.size()) + " vectors but " +
                             std::to_string(ws.size()) + " weights");
    }
    double total = 0.0;
    for (double w : ws) total += w;
    if (total <= 0.0) throw EmptyAggregateError("weighted_mean: weights sum to zero");

    UpdateVector out(vs.front().size(), 0.0);
    for (std::size_t i = 0; i < vs.size(); ++i) {
        require_same_length(vs.front(), vs[i], "weighted_mean");
        const double w = ws[i] / total;
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += w * vs[i][j];
    }
    return out;
}

UpdateVector mean(const std::vector<UpdateVector>& vs) {
    return weighted_mean(vs, std::vector<double>(vs.size(), 1.0));
}

UpdateVector coordinate_std(const std::vector<UpdateVector>& vs) {
    if (vs.size() < 2) throw InsufficientSamplesError("coordinate_std: need at least 2 vectors");
    const std::size_t d = vs.front().size();
    const UpdateVector m = mean(vs);
    UpdateVector out(d, 0.0);
    for (const auto& v : vs) {
        require_same_length(vs.front(), v, "coordinate_std");
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = v[j] - m[j];
            out[j] += dev * dev;
        }
    }
    for (std::size_t j = 0; j < d; ++j) out[j] = std::sqrt(out[j] / static_cast<double>(vs.size()));
    return out;
}

UpdateVector add(const UpdateVector& a, const UpdateVector& b) {
    require_same_length(a, b, "add");
    UpdateVector out(a);
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

UpdateVector subtract(const UpdateVector& a, const UpdateVector& b) {
    require_same_length(a, b, "subtract");
    UpdateVector out(a);
    for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
    return out;
}

UpdateVector scale(const UpdateVector& v, double s) {
    UpdateVector out(v);
    for (double& x : out) x *= s;
    return out;
}

}  // namespace kets
