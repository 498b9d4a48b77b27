#include "kets/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kets/errors.hpp"
#include "kets/kde.hpp"
#include "kets/partition.hpp"
#include "kets/rng.hpp"

namespace kets {

namespace {

// Seed-stream labels; client ids occupy [0, n_clients) so these stay clear.
enum Stream : std::uint64_t {
    kStreamSynthetic = 1u << 20,
    kStreamSplit,
    kStreamPartition,
    kStreamAttackerIds,
    kStreamModelInit,
    kStreamRootSample,
    kStreamSampling,
    kStreamFltrustTrain,
    kStreamTrimAttack,
};

std::vector<ClientId> uniform_sample(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<ClientId> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(seed);
    rng.shuffle(ids);
    ids.resize(std::min(k, n));
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (n_clients < 2) throw ConfigError("n_clients: need at least 2");
    if (clients_per_round < 1 || clients_per_round > n_clients) {
        throw ConfigError("clients_per_round: must lie in [1, n_clients]");
    }
    if (attacker_fraction < 0.0 || attacker_fraction >= 0.5) {
        throw ConfigError("attacker_fraction: must lie in [0, 0.5)");
    }
    if (attack.start_round > attack.stop_round) throw ConfigError("start_round: exceeds stop_round");
    if (!(attack.tau > 0.0)) throw ConfigError("tau: must be positive");
    if (!(attack.gamma_init > 0.0)) throw ConfigError("gamma_init: must be positive");
    if (!(attack.trim_b > 1.0)) throw ConfigError("trim_b: must exceed 1");
    if (!(alpha > 0.0)) throw ConfigError("alpha: must be positive");
    if (!(beta > 0.0)) throw ConfigError("beta: must be positive");
    if (local_epochs < 0) throw ConfigError("local_epochs: must be nonnegative");
    if (global_epochs < 0) throw ConfigError("global_epochs: must be nonnegative");
    if (batch_size < 1) throw ConfigError("batch_size: must be positive");
    if (lr < 0.0) throw ConfigError("lr: must be nonnegative");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum: must lie in [0, 1)");
    if (fltrust_root_size < 1) throw ConfigError("fltrust_root_size: must be positive");
    if (!(ketsv2_mu > 0.0 && ketsv2_mu <= 1.0)) throw ConfigError("ketsv2_mu: must lie in (0, 1]");
    if (!(kde_quantile > 0.0 && kde_quantile <= 1.0)) throw ConfigError("kde_quantile: must lie in (0, 1]");
    if (hidden_sizes.empty()) throw ConfigError("hidden: need at least one hidden layer size");
    for (std::size_t h : hidden_sizes) {
        if (h < 1) throw ConfigError("hidden: layer sizes must be positive");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction: must lie in (0, 1)");
    if (dataset.source == DatasetSpec::Source::synthetic) {
        if (dataset.synthetic_classes < 2) throw ConfigError("synthetic_classes: need at least 2");
        if (dataset.synthetic_n < static_cast<std::size_t>(dataset.synthetic_classes)) {
            throw ConfigError("synthetic_n: need at least one sample per class");
        }
        if (dataset.synthetic_dim < 1) throw ConfigError("synthetic_d: must be positive");
        if (!(dataset.synthetic_spread > 0.0)) throw ConfigError("synthetic_spread: must be positive");
    }
}

Experiment::Experiment(const ExperimentConfig& cfg) : cfg_(cfg) {
    cfg_.validate();

    LabeledDataset full;
    switch (cfg_.dataset.source) {
        case DatasetSpec::Source::synthetic:
            full = generate_synthetic(cfg_.dataset.synthetic_n, cfg_.dataset.synthetic_dim,
                                      cfg_.dataset.synthetic_classes, cfg_.dataset.synthetic_spread,
                                      derive_seed(cfg_.seed, kStreamSynthetic));
            break;
        case DatasetSpec::Source::idx:
            full = load_idx(cfg_.dataset.idx_images, cfg_.dataset.idx_labels);
            break;
        case DatasetSpec::Source::csv:
            full = load_csv(cfg_.dataset.csv_path);
            break;
    }
    num_classes_ = count_classes(full);

    auto [train, test] = stratified_split(full, cfg_.test_fraction, derive_seed(cfg_.seed, kStreamSplit));
    test_ = std::move(test);
    if (test_.size() == 0) {
        throw ConfigError("test_fraction: the held-out test set is empty for this dataset");
    }

    const PartitionPlan plan =
        dirichlet_partition(train.labels, static_cast<std::size_t>(cfg_.n_clients), cfg_.alpha,
                            derive_seed(cfg_.seed, kStreamPartition));

    partitions_.resize(static_cast<std::size_t>(cfg_.n_clients));
    std::vector<std::size_t> sizes(static_cast<std::size_t>(cfg_.n_clients));
    for (const auto& [client, indices] : plan.assignments) {
        partitions_[static_cast<std::size_t>(client)] = train.subset(indices);
        sizes[static_cast<std::size_t>(client)] = indices.size();
    }
    ledger_ = TrustLedger(sizes);

    // Attacker identities are fixed for the whole experiment (and across
    // defenses, since they depend only on the seed).
    const std::size_t n_attackers =
        static_cast<std::size_t>(std::ceil(cfg_.attacker_fraction * cfg_.n_clients));
    std::vector<ClientId> ids(static_cast<std::size_t>(cfg_.n_clients));
    std::iota(ids.begin(), ids.end(), 0);
    Rng shuffle_rng(derive_seed(cfg_.seed, kStreamAttackerIds));
    shuffle_rng.shuffle(ids);
    attacker_ids_.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_attackers));
    std::sort(attacker_ids_.begin(), attacker_ids_.end());

    if (cfg_.attack.kind == AttackKind::label_flip) {
        flipped_partitions_.resize(partitions_.size());
        for (ClientId a : attacker_ids_) {
            flipped_partitions_[static_cast<std::size_t>(a)] =
                flip_labels(partitions_[static_cast<std::size_t>(a)], num_classes_);
        }
    }

    if (cfg_.defense == DefenseKind::fltrust) {
        root_ = stratified_sample(train, cfg_.fltrust_root_size, derive_seed(cfg_.seed, kStreamRootSample));
    }

    std::vector<std::size_t> layers;
    layers.push_back(full.dim);
    layers.insert(layers.end(), cfg_.hidden_sizes.begin(), cfg_.hidden_sizes.end());
    layers.push_back(static_cast<std::size_t>(num_classes_));
    global_ = init_model(layers, derive_seed(cfg_.seed, kStreamModelInit));
}

std::vector<ClientId> Experiment::select_clients(int round) {
    const bool trust_based = cfg_.defense == DefenseKind::kets ||
                             cfg_.defense == DefenseKind::kets_median_prefilter ||
                             cfg_.defense == DefenseKind::ketsv2;
    const std::uint64_t seed = derive_seed(cfg_.seed, kStreamSampling, static_cast<std::uint64_t>(round));
    if (trust_based) {
        return sample_clients(ledger_, static_cast<std::size_t>(cfg_.clients_per_round), round, seed);
    }
    return uniform_sample(static_cast<std::size_t>(cfg_.n_clients),
                          static_cast<std::size_t>(cfg_.clients_per_round), seed);
}

UpdateVector Experiment::train_client(ClientId c, int round, bool use_flipped) const {
    const LabeledDataset& data = use_flipped ? flipped_partitions_[static_cast<std::size_t>(c)]
                                             : partitions_[static_cast<std::size_t>(c)];
    const Model local =
        local_train(global_, data, cfg_.local_epochs, cfg_.batch_size, cfg_.lr, cfg_.momentum,
                    derive_seed(cfg_.seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(round)));
    return compute_update(local, global_);
}

RoundReport Experiment::run_round(int round) {
    const std::vector<ClientId> selected = select_clients(round);
    const bool attack_active = cfg_.attack.kind != AttackKind::none && cfg_.attack.active(round);

    std::vector<ClientId> scheduled;  // attackers crafting this round
    std::vector<ClientId> benign_ids;
    for (ClientId c : selected) {
        const bool is_attacker =
            std::binary_search(attacker_ids_.begin(), attacker_ids_.end(), c);
        if (is_attacker && attack_active) {
            scheduled.push_back(c);
        } else {
            benign_ids.push_back(c);
        }
    }

    // Benign training happens first so white-box attackers can see it.
    std::map<ClientId, UpdateVector> updates;
    std::vector<UpdateVector> benign_updates;
    benign_updates.reserve(benign_ids.size());
    for (ClientId c : benign_ids) {
        updates[c] = train_client(c, round, false);
        benign_updates.push_back(updates[c]);
    }

    // The snapshot-based attacks need enough benign updates to solve their
    // optimization (the krum probe additionally needs n >= copies + 3); with
    // fewer visible, attackers train honestly.
    const bool snapshot_attack = cfg_.attack.kind == AttackKind::min_max ||
                                 cfg_.attack.kind == AttackKind::min_sum ||
                                 cfg_.attack.kind == AttackKind::trim ||
                                 cfg_.attack.kind == AttackKind::krum;
    const std::size_t min_benign = cfg_.attack.kind == AttackKind::krum ? 3 : 2;
    if (snapshot_attack && benign_updates.size() < min_benign) {
        for (ClientId c : scheduled) updates[c] = train_client(c, round, false);
        scheduled.clear();
    }

    if (!scheduled.empty()) {
        switch (cfg_.attack.kind) {
            case AttackKind::sign_flip:
                for (ClientId c : scheduled) updates[c] = sign_flip_attack(train_client(c, round, false));
                break;
            case AttackKind::label_flip:
                for (ClientId c : scheduled) updates[c] = train_client(c, round, true);
                break;
            case AttackKind::min_max: {
                const UpdateVector m = min_max_attack(benign_updates, cfg_.attack.perturbation, cfg_.attack);
                for (ClientId c : scheduled) updates[c] = m;
                break;
            }
            case AttackKind::min_sum: {
                const UpdateVector m = min_sum_attack(benign_updates, cfg_.attack.perturbation, cfg_.attack);
                for (ClientId c : scheduled) updates[c] = m;
                break;
            }
            case AttackKind::trim: {
                const auto crafted =
                    trim_attack(benign_updates, cfg_.attack.trim_b, scheduled.size(),
                                derive_seed(cfg_.seed, kStreamTrimAttack, static_cast<std::uint64_t>(round)));
                for (std::size_t i = 0; i < scheduled.size(); ++i) updates[scheduled[i]] = crafted[i];
                break;
            }
            case AttackKind::krum: {
                const KrumOracle oracle = [](const UpdateVector& candidate, std::size_t copies,
                                             const std::vector<UpdateVector>& benign) {
                    AggregationContext probe;
                    probe.assumed_attackers = copies;
                    ClientId next = 0;
                    for (std::size_t i = 0; i < copies; ++i) {
                        probe.client_ids.push_back(next++);
                        probe.updates.push_back(candidate);
                        probe.dataset_sizes.push_back(1);
                    }
                    for (const auto& u : benign) {
                        probe.client_ids.push_back(next++);
                        probe.updates.push_back(u);
                        probe.dataset_sizes.push_back(1);
                    }
                    return krum_select_id(probe) < static_cast<ClientId>(copies);
                };
                const UpdateVector m = krum_attack(benign_updates, scheduled.size(), oracle,
                                                   cfg_.attack.krum_lambda_init, cfg_.attack.krum_lambda_floor);
                for (ClientId c : scheduled) updates[c] = m;
                break;
            }
            case AttackKind::none:
                break;  // unreachable: scheduled is empty without an attack
        }
    }

    AggregationContext ctx;
    for (ClientId c : selected) {  // selected is sorted
        ctx.client_ids.push_back(c);
        ctx.updates.push_back(updates.at(c));
        ctx.dataset_sizes.push_back(ledger_.dataset_size(c));
    }
    if (cfg_.attack.kind != AttackKind::none) {
        std::size_t n_attackers_selected = 0;
        for (ClientId c : selected) {
            if (std::binary_search(attacker_ids_.begin(), attacker_ids_.end(), c)) ++n_attackers_selected;
        }
        ctx.assumed_attackers = n_attackers_selected;
    }
    ctx.previous_global_update = previous_global_update_;
    if (cfg_.defense == DefenseKind::fltrust) {
        const Model server_local = local_train(
            global_, root_, cfg_.local_epochs, cfg_.batch_size, cfg_.lr, cfg_.momentum,
            derive_seed(cfg_.seed, kStreamFltrustTrain, static_cast<std::uint64_t>(round)));
        ctx.server_update = compute_update(server_local, global_);
    }

    UpdateVector aggregated;
    std::vector<ClientId> honest;
    switch (cfg_.defense) {
        case DefenseKind::fedavg:
            aggregated = fed_avg(ctx);
            honest = selected;
            break;
        case DefenseKind::krum: {
            const ClientId chosen = krum_select_id(ctx);
            aggregated = updates.at(chosen);
            honest = {chosen};
            break;
        }
        case DefenseKind::trim_mean:
            aggregated = trim_mean(ctx);
            honest = selected;
            break;
        case DefenseKind::median:
            aggregated = coordinate_median(ctx);
            honest = selected;
            break;
        case DefenseKind::fltrust: {
            aggregated = fltrust_aggregate(ctx);
            if (l2_norm(*ctx.server_update) > 0.0) {
                for (std::size_t i = 0; i < ctx.size(); ++i) {
                    if (l2_norm(ctx.updates[i]) == 0.0) continue;
                    if (cosine_similarity(ctx.updates[i], *ctx.server_update) > 0.0) {
                        honest.push_back(ctx.client_ids[i]);
                    }
                }
            }
            break;
        }
        case DefenseKind::kets: {
            KetsResult r = kets_aggregate(ctx, ledger_, cfg_.beta, cfg_.kde_quantile);
            aggregated = std::move(r.update);
            honest = std::move(r.honest);
            break;
        }
        case DefenseKind::kets_median_prefilter: {
            honest = kets_filter(ctx, ledger_, cfg_.beta, cfg_.kde_quantile);
            if (honest.empty()) throw EmptyAggregateError("kets_median_prefilter: empty honest set");
            aggregated = coordinate_median(ctx.restrict_to(honest));
            break;
        }
        case DefenseKind::ketsv2: {
            const std::vector<ClientId> stage_one = kets_filter(ctx, ledger_, cfg_.beta, cfg_.kde_quantile);
            if (stage_one.empty()) throw EmptyAggregateError("ketsv2: empty honest set");
            const UpdateVector reference = v2_reference_ ? *v2_reference_ : mean(ctx.updates);
            KetsV2Result r = ketsv2_filter(ctx.restrict_to(stage_one), reference, cfg_.ketsv2_threshold,
                                           cfg_.ketsv2_mu);
            aggregated = std::move(r.update);
            honest = std::move(r.kept);
            v2_reference_ = std::move(r.new_reference);
            break;
        }
    }

    global_.add_delta(aggregated);
    previous_global_update_ = aggregated;

    RoundReport report;
    report.round = round;
    report.accuracy = evaluate(global_, test_);
    report.selected = selected;
    report.honest = std::move(honest);
    report.crafted = scheduled;
    report.trust.reserve(ledger_.size());
    report.excluded.reserve(ledger_.size());
    for (std::size_t c = 0; c < ledger_.size(); ++c) {
        report.trust.push_back(ledger_.trust(static_cast<ClientId>(c)));
        report.excluded.push_back(ledger_.excluded(static_cast<ClientId>(c)));
    }
    return report;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    Experiment experiment(cfg);
    ExperimentResult result;
    result.attacker_ids = experiment.attacker_ids();
    result.n_clients = cfg.n_clients;
    result.reports.reserve(static_cast<std::size_t>(cfg.global_epochs));
    for (int round = 0; round < cfg.global_epochs; ++round) {
        try {
            result.reports.push_back(experiment.run_round(round));
        } catch (const DivergenceError& e) {
            result.diverged = true;
            result.divergence_message = e.what();
            break;
        }
    }
    return result;
}

MetricsSummary compute_metrics(const ExperimentResult& result) {
    MetricsSummary summary;
    if (!result.reports.empty()) {
        summary.final_accuracy = result.reports.back().accuracy;
        double total = 0.0;
        for (const auto& r : result.reports) total += r.accuracy;
        summary.mean_accuracy = total / static_cast<double>(result.reports.size());
    }

    std::vector<bool> ever_excluded(static_cast<std::size_t>(result.n_clients), false);
    std::vector<int> first_excluded(static_cast<std::size_t>(result.n_clients), -1);
    for (const auto& r : result.reports) {
        for (std::size_t c = 0; c < r.excluded.size(); ++c) {
            if (r.excluded[c] && !ever_excluded[c]) {
                ever_excluded[c] = true;
                first_excluded[c] = r.round;
            }
        }
    }

    std::size_t attackers_excluded = 0;
    for (ClientId a : result.attacker_ids) {
        summary.rounds_to_exclusion[a] = first_excluded[static_cast<std::size_t>(a)];
        if (ever_excluded[static_cast<std::size_t>(a)]) ++attackers_excluded;
    }
    if (!result.attacker_ids.empty()) {
        summary.true_positive_rate =
            static_cast<double>(attackers_excluded) / static_cast<double>(result.attacker_ids.size());
    }

    std::size_t benign_total = 0;
    std::size_t benign_excluded = 0;
    for (int c = 0; c < result.n_clients; ++c) {
        if (std::binary_search(result.attacker_ids.begin(), result.attacker_ids.end(), c)) continue;
        ++benign_total;
        if (ever_excluded[static_cast<std::size_t>(c)]) ++benign_excluded;
    }
    summary.false_positive_rate =
        benign_total == 0 ? 0.0 : static_cast<double>(benign_excluded) / static_cast<double>(benign_total);
    return summary;
}

}  // namespace kets
