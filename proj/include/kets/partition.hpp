#ifndef KETS_PARTITION_HPP
#define KETS_PARTITION_HPP

#include <cstdint>
#include <map>
#include <vector>

namespace kets {

class Rng;

// Result of the Dirichlet label-skew partitioner: every sample index is
// assigned to exactly one client and no client is left empty.
struct PartitionPlan {
    std::map<int, std::vector<std::size_t>> assignments;
    double alpha = 0.0;
    std::uint64_t seed = 0;
};

// One Dirichlet(alpha) proportion vector over n_clients (normalized
// Gamma(alpha, 1) draws).
std::vector<double> dirichlet_proportions(std::size_t n_clients, double alpha, Rng& rng);

// For each label, draws client proportions from Dirichlet(alpha) and assigns
// that label's samples by largest-remainder rounding; empty clients are then
// repaired by moving one sample from the currently largest client to each.
// Deterministic given seed. Throws InfeasiblePartitionError when there are
// more clients than samples.
PartitionPlan dirichlet_partition(const std::vector<int>& labels, std::size_t n_clients, double alpha,
                                  std::uint64_t seed);

}  // namespace kets

#endif  // KETS_PARTITION_HPP
