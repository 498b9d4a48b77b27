#ifndef KETS_EXPERIMENT_HPP
#define KETS_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kets/attacks.hpp"
#include "kets/dataset.hpp"
#include "kets/defenses.hpp"
#include "kets/model.hpp"
#include "kets/trust.hpp"

namespace kets {

struct DatasetSpec {
    enum class Source { synthetic, idx, csv };
    Source source = Source::synthetic;
    std::size_t synthetic_n = 2000;
    std::size_t synthetic_dim = 20;
    int synthetic_classes = 5;
    double synthetic_spread = 0.3;
    std::string idx_images;
    std::string idx_labels;
    std::string csv_path;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    int n_clients = 30;
    int clients_per_round = 30;
    double attacker_fraction = 0.2;
    AttackConfig attack;
    DefenseKind defense = DefenseKind::fedavg;
    double alpha = 0.5;  // Dirichlet concentration
    double beta = 0.1;   // trust step
    int local_epochs = 3;
    int global_epochs = 20;
    int batch_size = 32;
    double lr = 0.05;
    double momentum = 0.0;
    std::size_t fltrust_root_size = 100;
    double ketsv2_threshold = 0.0;
    double ketsv2_mu = 0.1;
    double kde_quantile = 0.3;
    std::vector<std::size_t> hidden_sizes = {32};
    double test_fraction = 0.2;
    std::uint64_t seed = 1;

    // Throws ConfigError naming the offending field.
    void validate() const;
};

struct RoundReport {
    int round = 0;
    double accuracy = 0.0;
    std::vector<ClientId> selected;
    std::vector<ClientId> honest;   // clients whose updates entered the aggregate
    std::vector<ClientId> crafted;  // attackers that submitted crafted updates
    std::vector<double> trust;      // post-round ledger snapshot, indexed by client id
    std::vector<bool> excluded;     // parallel to trust
};

struct ExperimentResult {
    std::vector<RoundReport> reports;
    std::vector<ClientId> attacker_ids;
    int n_clients = 0;
    bool diverged = false;
    std::string divergence_message;
};

struct MetricsSummary {
    std::optional<double> final_accuracy;
    std::optional<double> mean_accuracy;
    std::optional<double> true_positive_rate;   // attackers ever excluded / attackers
    double false_positive_rate = 0.0;           // benign ever excluded / benign
    std::map<ClientId, int> rounds_to_exclusion;  // attacker -> first excluded round, -1 if never
};

// Single-experiment driver. Owns the global model, the trust ledger, the
// client partitions and the server test set; run_round advances one global
// epoch.
class Experiment {
public:
    explicit Experiment(const ExperimentConfig& cfg);

    RoundReport run_round(int round);

    const ExperimentConfig& config() const { return cfg_; }
    const Model& global_model() const { return global_; }
    const TrustLedger& ledger() const { return ledger_; }
    const std::vector<ClientId>& attacker_ids() const { return attacker_ids_; }
    const LabeledDataset& test_set() const { return test_; }
    const LabeledDataset& client_data(ClientId c) const { return partitions_.at(static_cast<std::size_t>(c)); }

private:
    std::vector<ClientId> select_clients(int round);
    UpdateVector train_client(ClientId c, int round, bool use_flipped) const;

    ExperimentConfig cfg_;
    Model global_;
    TrustLedger ledger_;
    std::vector<LabeledDataset> partitions_;
    std::vector<LabeledDataset> flipped_partitions_;  // attackers only, label_flip
    std::vector<ClientId> attacker_ids_;
    LabeledDataset test_;
    LabeledDataset root_;  // FLTrust root dataset (may be empty)
    int num_classes_ = 0;
    std::optional<UpdateVector> previous_global_update_;
    std::optional<UpdateVector> v2_reference_;
};

// Runs cfg.global_epochs rounds. A DivergenceError aborts the loop and the
// partial reports are returned with the diverged flag set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

MetricsSummary compute_metrics(const ExperimentResult& result);

}  // namespace kets

#endif  // KETS_EXPERIMENT_HPP
