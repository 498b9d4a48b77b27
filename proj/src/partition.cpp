#include "kets/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kets/errors.hpp"
#include "kets/rng.hpp"

namespace kets {

std::vector<double> dirichlet_proportions(std::size_t n_clients, double alpha, Rng& rng) {
    std::vector<double> p(n_clients);
    double total = 0.0;
    for (auto& x : p) {
        x = rng.gamma(alpha);
        total += x;
    }
    if (total <= 0.0) {
        // All gamma draws underflowed (tiny alpha); degenerate to a point mass.
        p.assign(n_clients, 0.0);
        p[rng.below(n_clients)] = 1.0;
        return p;
    }
    for (auto& x : p) x /= total;
    return p;
}

PartitionPlan dirichlet_partition(const std::vector<int>& labels, std::size_t n_clients, double alpha,
                                  std::uint64_t seed) {
    if (n_clients < 2) throw ConfigError("dirichlet_partition: need at least 2 clients");
    if (!(alpha > 0.0)) throw ConfigError("dirichlet_partition: alpha must be positive");
    if (n_clients > labels.size()) {
        throw InfeasiblePartitionError("dirichlet_partition: " + std::to_string(n_clients) +
                                       " clients but only " + std::to_string(labels.size()) + " samples");
    }

    const int num_classes = 1 + *std::max_element(labels.begin(), labels.end());
    Rng rng(seed);

    PartitionPlan plan;
    plan.alpha = alpha;
    plan.seed = seed;
    for (std::size_t c = 0; c < n_clients; ++c) plan.assignments[static_cast<int>(c)] = {};

    for (int label = 0; label < num_classes; ++label) {
        std::vector<std::size_t> indices;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == label) indices.push_back(i);
        }
        if (indices.empty()) continue;
        rng.shuffle(indices);

        const std::vector<double> proportions = dirichlet_proportions(n_clients, alpha, rng);

        // Largest-remainder rounding of proportions * count.
        const double count = static_cast<double>(indices.size());
        std::vector<std::size_t> take(n_clients);
        std::vector<std::pair<double, std::size_t>> remainders;
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < n_clients; ++c) {
            const double target = proportions[c] * count;
            take[c] = static_cast<std::size_t>(std::floor(target));
            assigned += take[c];
            remainders.emplace_back(target - std::floor(target), c);
        }
        std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;  // tie: lower client id first
        });
        for (std::size_t r = 0; assigned < indices.size(); ++r, ++assigned) {
            take[remainders[r].second] += 1;
        }

        std::size_t cursor = 0;
        for (std::size_t c = 0; c < n_clients; ++c) {
            auto& dest = plan.assignments[static_cast<int>(c)];
            dest.insert(dest.end(), indices.begin() + static_cast<std::ptrdiff_t>(cursor),
                        indices.begin() + static_cast<std::ptrdiff_t>(cursor + take[c]));
            cursor += take[c];
        }
    }

    // Repair: donate one sample from the currently largest client to each
    // empty one.
    for (auto& [client, samples] : plan.assignments) {
        if (!samples.empty()) continue;
        int largest = -1;
        std::size_t largest_size = 0;
        for (const auto& [other, other_samples] : plan.assignments) {
            if (other_samples.size() > largest_size) {
                largest = other;
                largest_size = other_samples.size();
            }
        }
        auto& donor = plan.assignments[largest];
        samples.push_back(donor.back());
        donor.pop_back();
    }

    for (auto& [client, samples] : plan.assignments) std::sort(samples.begin(), samples.end());
    return plan;
}

}  // namespace kets
