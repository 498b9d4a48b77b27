#include "kets/trust.hpp"

#include <algorithm>

#include "kets/errors.hpp"
#include "kets/rng.hpp"

namespace kets {

double compute_penalty(const UpdateVector& current, const UpdateVector& previous, double trust_prev,
                       double beta) {
    if (l2_norm(current) == 0.0 || l2_norm(previous) == 0.0) {
        // A null update carries no direction; treat it like a hostile turn.
        return trust_prev / beta;
    }
    const double cos = cosine_similarity(current, previous);
    if (cos >= 0.0) {
        return (1.0 - cos) + l2_distance(current, previous);
    }
    return trust_prev / beta;
}

double update_trust(double trust_prev, double penalty, double beta) {
    // The hostile branch hands back exactly trust_prev / beta; compare
    // against the same division so that case lands on exactly zero instead
    // of a rounding residue.
    if (penalty >= trust_prev / beta) return 0.0;
    return std::max(0.0, trust_prev - beta * penalty);
}

TrustLedger::TrustLedger(const std::vector<std::size_t>& dataset_sizes) {
    records_.resize(dataset_sizes.size());
    for (std::size_t i = 0; i < dataset_sizes.size(); ++i) {
        records_[i].dataset_size = dataset_sizes[i];
    }
}

void TrustLedger::apply_penalty(ClientId c, double penalty, double beta) {
    Record& r = records_.at(static_cast<std::size_t>(c));
    r.trust = update_trust(r.trust, penalty, beta);
    if (r.trust == 0.0) r.excluded = true;
}

void TrustLedger::store_update(ClientId c, UpdateVector update) {
    records_.at(static_cast<std::size_t>(c)).last_update = std::move(update);
}

std::map<ClientId, double> TrustLedger::scores(const std::vector<ClientId>& clients) const {
    std::map<ClientId, double> out;
    for (ClientId c : clients) out[c] = trust(c);
    return out;
}

std::vector<ClientId> TrustLedger::active_clients() const {
    std::vector<ClientId> out;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (!records_[i].excluded) out.push_back(static_cast<ClientId>(i));
    }
    return out;
}

std::vector<ClientId> sample_clients(const TrustLedger& ledger, std::size_t k, int round,
                                     std::uint64_t rng_seed) {
    std::vector<ClientId> pool = ledger.active_clients();
    if (pool.empty()) throw PoolExhaustedError("sample_clients: every client is excluded");
    if (round == 0) return pool;

    const std::size_t count = std::min(k, pool.size());
    std::vector<double> weights;
    weights.reserve(pool.size());
    for (ClientId c : pool) weights.push_back(ledger.trust(c));

    Rng rng(rng_seed);
    std::vector<ClientId> chosen;
    chosen.reserve(count);
    for (std::size_t draw = 0; draw < count; ++draw) {
        double total = 0.0;
        for (double w : weights) total += w;
        double target = rng.uniform() * total;
        std::size_t pick = pool.size();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            pick = i;  // falls back to the last positive weight on rounding
            target -= weights[i];
            if (target < 0.0) break;
        }
        chosen.push_back(pool[pick]);
        weights[pick] = 0.0;
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

}  // namespace kets
