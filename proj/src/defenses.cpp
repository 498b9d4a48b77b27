#include "kets/defenses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kets/errors.hpp"
#include "kets/kde.hpp"

namespace kets {

DefenseKind defense_kind_from_string(const std::string& s) {
    if (s == "fedavg") return DefenseKind::fedavg;
    if (s == "krum") return DefenseKind::krum;
    if (s == "trim_mean") return DefenseKind::trim_mean;
    if (s == "median") return DefenseKind::median;
    if (s == "fltrust") return DefenseKind::fltrust;
    if (s == "kets") return DefenseKind::kets;
    if (s == "kets_median_prefilter") return DefenseKind::kets_median_prefilter;
    if (s == "ketsv2") return DefenseKind::ketsv2;
    throw ConfigError("unknown defense '" + s + "'");
}

std::string to_string(DefenseKind k) {
    switch (k) {
        case DefenseKind::fedavg: return "fedavg";
        case DefenseKind::krum: return "krum";
        case DefenseKind::trim_mean: return "trim_mean";
        case DefenseKind::median: return "median";
        case DefenseKind::fltrust: return "fltrust";
        case DefenseKind::kets: return "kets";
        case DefenseKind::kets_median_prefilter: return "kets_median_prefilter";
        case DefenseKind::ketsv2: return "ketsv2";
    }
    return "fedavg";
}

AggregationContext AggregationContext::restrict_to(const std::vector<ClientId>& keep) const {
    AggregationContext out;
    out.assumed_attackers = assumed_attackers;
    out.previous_global_update = previous_global_update;
    out.server_update = server_update;
    for (std::size_t i = 0; i < client_ids.size(); ++i) {
        if (std::find(keep.begin(), keep.end(), client_ids[i]) == keep.end()) continue;
        out.client_ids.push_back(client_ids[i]);
        out.updates.push_back(updates[i]);
        out.dataset_sizes.push_back(dataset_sizes[i]);
    }
    return out;
}

UpdateVector fed_avg(const AggregationContext& ctx) {
    if (ctx.size() == 0) throw EmptyAggregateError("fed_avg: no updates");
    std::vector<double> weights;
    weights.reserve(ctx.size());
    for (std::size_t s : ctx.dataset_sizes) weights.push_back(static_cast<double>(s));
    return weighted_mean(ctx.updates, weights);
}

ClientId krum_select_id(const AggregationContext& ctx) {
    const std::size_t n = ctx.size();
    const std::size_t c = ctx.assumed_attackers;
    if (n < c + 3) {
        throw InsufficientClientsError("krum_select: need at least c+3 clients, have " + std::to_string(n));
    }
    const std::size_t neighbors = n - c - 2;

    const auto squared_distance = [](const UpdateVector& a, const UpdateVector& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double d = a[k] - b[k];
            s += d * d;
        }
        return s;
    };

    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<double> dists;
    dists.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        dists.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dists.push_back(squared_distance(ctx.updates[i], ctx.updates[j]));
        }
        std::sort(dists.begin(), dists.end());
        double score = 0.0;
        for (std::size_t k = 0; k < neighbors; ++k) score += dists[k];
        if (score < best_score) {  // ties keep the lowest client id
            best_score = score;
            best = i;
        }
    }
    return ctx.client_ids[best];
}

UpdateVector krum_select(const AggregationContext& ctx) {
    const ClientId id = krum_select_id(ctx);
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        if (ctx.client_ids[i] == id) return ctx.updates[i];
    }
    throw Error("krum_select: selected id not found");  // unreachable
}

UpdateVector trim_mean(const AggregationContext& ctx) {
    const std::size_t n = ctx.size();
    const std::size_t k = ctx.assumed_attackers;
    if (n <= 2 * k) {
        throw InsufficientClientsError("trim_mean: need more than 2k clients, have " + std::to_string(n));
    }
    const std::size_t dim = n ? ctx.updates.front().size() : 0;
    UpdateVector out(dim, 0.0);
    std::vector<double> column(n);
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = ctx.updates[i][j];
        std::sort(column.begin(), column.end());
        double acc = 0.0;
        for (std::size_t i = k; i < n - k; ++i) acc += column[i];
        out[j] = acc / static_cast<double>(n - 2 * k);
    }
    return out;
}

UpdateVector coordinate_median(const AggregationContext& ctx) {
    const std::size_t n = ctx.size();
    if (n == 0) throw EmptyAggregateError("coordinate_median: no updates");
    const std::size_t dim = ctx.updates.front().size();
    UpdateVector out(dim, 0.0);
    std::vector<double> column(n);
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < n; ++i) column[i] = ctx.updates[i][j];
        std::sort(column.begin(), column.end());
        out[j] = (n % 2 == 1) ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
    }
    return out;
}

UpdateVector fltrust_aggregate(const AggregationContext& ctx) {
    if (!ctx.server_update) throw ConfigError("fltrust_aggregate: server update (root dataset) missing");
    const UpdateVector& g0 = *ctx.server_update;
    const double g0_norm = l2_norm(g0);

    UpdateVector acc(g0.size(), 0.0);
    double total_trust = 0.0;
    if (g0_norm > 0.0) {
        for (std::size_t i = 0; i < ctx.size(); ++i) {
            const double norm = l2_norm(ctx.updates[i]);
            if (norm == 0.0) continue;
            const double ts = std::max(0.0, cosine_similarity(ctx.updates[i], g0));
            if (ts == 0.0) continue;
            const double rescale = g0_norm / norm;
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += ts * rescale * ctx.updates[i][j];
            total_trust += ts;
        }
    }
    if (total_trust == 0.0) return UpdateVector(g0.size(), 0.0);
    for (auto& x : acc) x /= total_trust;
    return acc;
}

std::vector<ClientId> kets_filter(const AggregationContext& ctx, TrustLedger& ledger, double beta,
                                  double kde_quantile) {
    if (ctx.size() == 0) throw EmptyAggregateError("kets_filter: no updates");

    for (std::size_t i = 0; i < ctx.size(); ++i) {
        const ClientId c = ctx.client_ids[i];
        const auto& previous = ledger.last_update(c);
        if (previous) {
            const double penalty = compute_penalty(ctx.updates[i], *previous, ledger.trust(c), beta);
            ledger.apply_penalty(c, penalty, beta);
        }
        // First-ever upload only seeds the history; no penalty.
        ledger.store_update(c, ctx.updates[i]);
    }

    const auto honest = segment_honest(ledger.scores(ctx.client_ids), ctx.client_ids, kde_quantile);
    std::vector<ClientId> kept;
    for (ClientId c : honest) {
        if (ledger.trust(c) > 0.0) kept.push_back(c);
    }
    return kept;
}

KetsResult kets_aggregate(const AggregationContext& ctx, TrustLedger& ledger, double beta,
                          double kde_quantile) {
    const auto honest = kets_filter(ctx, ledger, beta, kde_quantile);
    if (honest.empty()) throw EmptyAggregateError("kets_aggregate: every sampled client hit trust zero");
    return {fed_avg(ctx.restrict_to(honest)), honest};
}

KetsV2Result ketsv2_filter(const AggregationContext& honest_ctx, const UpdateVector& reference,
                           double threshold, double mu) {
    if (honest_ctx.size() == 0) throw EmptyAggregateError("ketsv2_filter: no updates");
    if (l2_norm(reference) == 0.0) throw ZeroNormError("ketsv2_filter: reference has zero norm");

    std::vector<ClientId> kept;
    double best_cos = -std::numeric_limits<double>::infinity();
    ClientId best_client = honest_ctx.client_ids.front();
    for (std::size_t i = 0; i < honest_ctx.size(); ++i) {
        const double norm = l2_norm(honest_ctx.updates[i]);
        const double cos = norm == 0.0 ? -2.0 : cosine_similarity(honest_ctx.updates[i], reference);
        if (cos >= threshold) kept.push_back(honest_ctx.client_ids[i]);
        if (cos > best_cos) {
            best_cos = cos;
            best_client = honest_ctx.client_ids[i];
        }
    }
    if (kept.empty()) kept.push_back(best_client);

    KetsV2Result result;
    result.kept = kept;
    result.update = fed_avg(honest_ctx.restrict_to(kept));
    result.new_reference = add(scale(reference, 1.0 - mu), scale(result.update, mu));
    return result;
}

}  // namespace kets
