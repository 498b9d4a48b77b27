#ifndef KETS_DEFENSES_HPP
#define KETS_DEFENSES_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kets/trust.hpp"
#include "kets/vector_ops.hpp"

namespace kets {

enum class DefenseKind { fedavg, krum, trim_mean, median, fltrust, kets, kets_median_prefilter, ketsv2 };

DefenseKind defense_kind_from_string(const std::string& s);
std::string to_string(DefenseKind k);

// One round's worth of submitted updates plus the side information the
// aggregation rules need. Parallel arrays, sorted by client id.
struct AggregationContext {
    std::vector<ClientId> client_ids;
    std::vector<UpdateVector> updates;
    std::vector<std::size_t> dataset_sizes;
    std::size_t assumed_attackers = 0;
    std::optional<UpdateVector> previous_global_update;
    std::optional<UpdateVector> server_update;  // FLTrust reference g0

    std::size_t size() const { return client_ids.size(); }
    AggregationContext restrict_to(const std::vector<ClientId>& keep) const;
};

// Dataset-size weighted mean of all updates.
UpdateVector fed_avg(const AggregationContext& ctx);

// The single update minimizing the sum of squared distances to its
// n - c - 2 nearest neighbors (c = assumed_attackers); ties to lowest id.
UpdateVector krum_select(const AggregationContext& ctx);
ClientId krum_select_id(const AggregationContext& ctx);

// Coordinate-wise mean after dropping the k smallest and k largest values
// (k = assumed_attackers).
UpdateVector trim_mean(const AggregationContext& ctx);

// Coordinate-wise median; even counts average the two middle values.
UpdateVector coordinate_median(const AggregationContext& ctx);

// Cosine-clipped, norm-matched weighted average against the server update
// g0. Requires ctx.server_update; returns the zero vector when every client
// is clipped away.
UpdateVector fltrust_aggregate(const AggregationContext& ctx);

// Trust bookkeeping plus density segmentation: applies the penalty rule to
// every sampled client against its stored previous update, stores the new
// updates, then keeps the clients above the last density valley. Clients at
// trust zero are never kept.
std::vector<ClientId> kets_filter(const AggregationContext& ctx, TrustLedger& ledger, double beta,
                                  double kde_quantile);

struct KetsResult {
    UpdateVector update;
    std::vector<ClientId> honest;
};

// kets_filter followed by FedAvg over the kept clients.
KetsResult kets_aggregate(const AggregationContext& ctx, TrustLedger& ledger, double beta,
                          double kde_quantile);

struct KetsV2Result {
    std::vector<ClientId> kept;
    UpdateVector update;
    UpdateVector new_reference;
};

// Second-stage filter for consistently misdirected updates: drops clients
// whose cosine against the momentum reference falls below the threshold,
// aggregates the rest with FedAvg, and advances the reference as
// (1 - mu) * reference + mu * update. Falls back to the single
// highest-cosine client when everyone is filtered out.
KetsV2Result ketsv2_filter(const AggregationContext& honest_ctx, const UpdateVector& reference,
                           double threshold, double mu);

}  // namespace kets

#endif  // KETS_DEFENSES_HPP
