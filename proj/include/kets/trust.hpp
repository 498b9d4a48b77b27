#ifndef KETS_TRUST_HPP
#define KETS_TRUST_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "kets/vector_ops.hpp"

namespace kets {

using ClientId = int;

// Dissimilarity between a client's two consecutive updates. Non-negative
// cosine: (1 - cos) plus the Euclidean distance. Negative cosine (or a
// zero-norm update): trust_prev / beta, which zeroes the trust score in
// update_trust. First-ever uploads are handled by the caller (penalty 0).
double compute_penalty(const UpdateVector& current, const UpdateVector& previous, double trust_prev,
                       double beta);

// max(0, trust_prev - beta * penalty).
double update_trust(double trust_prev, double penalty, double beta);

// Per-client trust state. Trust starts at 1, only decreases, and a client
// whose trust reaches 0 is excluded permanently.
class TrustLedger {
public:
    TrustLedger() = default;
    explicit TrustLedger(const std::vector<std::size_t>& dataset_sizes);

    std::size_t size() const { return records_.size(); }

    double trust(ClientId c) const { return records_.at(static_cast<std::size_t>(c)).trust; }
    bool excluded(ClientId c) const { return records_.at(static_cast<std::size_t>(c)).excluded; }
    std::size_t dataset_size(ClientId c) const { return records_.at(static_cast<std::size_t>(c)).dataset_size; }
    const std::optional<UpdateVector>& last_update(ClientId c) const {
        return records_.at(static_cast<std::size_t>(c)).last_update;
    }

    // Applies the trust update rule and flips the exclusion flag when the
    // score hits zero. Excluded clients stay at zero.
    void apply_penalty(ClientId c, double penalty, double beta);

    // Records the client's newest received update (stored unconditionally).
    void store_update(ClientId c, UpdateVector update);

    // Trust scores of the given clients.
    std::map<ClientId, double> scores(const std::vector<ClientId>& clients) const;

    std::vector<ClientId> active_clients() const;

private:
    struct Record {
        double trust = 1.0;
        std::optional<UpdateVector> last_update;
        std::size_t dataset_size = 1;
        bool excluded = false;
    };
    std::vector<Record> records_;
};

// Trust-weighted sampling without replacement. Round 0 returns every
// non-excluded client; later rounds draw min(k, pool size) distinct clients
// with probability proportional to trust, by sequential draws with
// renormalization. Returns ids sorted ascending; deterministic given seed.
// Throws PoolExhaustedError when every client is excluded.
std::vector<ClientId> sample_clients(const TrustLedger& ledger, std::size_t k, int round,
                                     std::uint64_t rng_seed);

}  // namespace kets

#endif  // KETS_TRUST_HPP
