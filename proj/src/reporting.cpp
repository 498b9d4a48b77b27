#include "kets/reporting.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "kets/errors.hpp"

namespace kets {

namespace {

// Fixed 6-decimal serialization keeps the CSV schema locale-free and stable.
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

nlohmann::json dataset_json(const DatasetSpec& d) {
    nlohmann::json j;
    switch (d.source) {
        case DatasetSpec::Source::synthetic:
            j["dataset"] = "synthetic";
            j["synthetic_n"] = d.synthetic_n;
            j["synthetic_d"] = d.synthetic_dim;
            j["synthetic_classes"] = d.synthetic_classes;
            j["synthetic_spread"] = d.synthetic_spread;
            break;
        case DatasetSpec::Source::idx:
            j["dataset"] = "idx";
            j["idx_images"] = d.idx_images;
            j["idx_labels"] = d.idx_labels;
            break;
        case DatasetSpec::Source::csv:
            j["dataset"] = "csv";
            j["csv_path"] = d.csv_path;
            break;
    }
    return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j = dataset_json(cfg.dataset);
    j["n_clients"] = cfg.n_clients;
    j["clients_per_round"] = cfg.clients_per_round;
    j["attacker_fraction"] = cfg.attacker_fraction;
    j["attack"] = to_string(cfg.attack.kind);
    j["perturbation"] = to_string(cfg.attack.perturbation);
    j["start_round"] = cfg.attack.start_round;
    j["stop_round"] = cfg.attack.stop_round;
    j["gamma_init"] = cfg.attack.gamma_init;
    j["tau"] = cfg.attack.tau;
    j["trim_b"] = cfg.attack.trim_b;
    j["defense"] = to_string(cfg.defense);
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["local_epochs"] = cfg.local_epochs;
    j["global_epochs"] = cfg.global_epochs;
    j["batch_size"] = cfg.batch_size;
    j["lr"] = cfg.lr;
    j["momentum"] = cfg.momentum;
    j["fltrust_root_size"] = cfg.fltrust_root_size;
    j["ketsv2_threshold"] = cfg.ketsv2_threshold;
    j["ketsv2_mu"] = cfg.ketsv2_mu;
    j["kde_quantile"] = cfg.kde_quantile;
    j["hidden"] = cfg.hidden_sizes;
    j["test_fraction"] = cfg.test_fraction;
    j["seed"] = cfg.seed;
    return j.dump(2);
}

std::string metrics_csv_text(const ExperimentResult& result) {
    std::string out = "round,accuracy,n_selected,n_honest,n_excluded_total\n";
    for (const auto& r : result.reports) {
        const std::size_t n_excluded =
            static_cast<std::size_t>(std::count(r.excluded.begin(), r.excluded.end(), true));
        out += std::to_string(r.round) + "," + fmt(r.accuracy) + "," + std::to_string(r.selected.size()) +
               "," + std::to_string(r.honest.size()) + "," + std::to_string(n_excluded) + "\n";
    }
    return out;
}

std::string trust_csv_text(const ExperimentResult& result) {
    std::string out = "round,client_id,trust,is_attacker\n";
    for (const auto& r : result.reports) {
        for (std::size_t c = 0; c < r.trust.size(); ++c) {
            const bool attacker = std::binary_search(result.attacker_ids.begin(), result.attacker_ids.end(),
                                                     static_cast<ClientId>(c));
            out += std::to_string(r.round) + "," + std::to_string(c) + "," + fmt(r.trust[c]) + "," +
                   (attacker ? "1" : "0") + "\n";
        }
    }
    return out;
}

std::string summary_json_text(const ExperimentConfig& cfg, const ExperimentResult& result) {
    const MetricsSummary metrics = compute_metrics(result);
    nlohmann::json j;
    j["final_accuracy"] = metrics.final_accuracy ? nlohmann::json(*metrics.final_accuracy) : nlohmann::json();
    j["mean_accuracy"] = metrics.mean_accuracy ? nlohmann::json(*metrics.mean_accuracy) : nlohmann::json();
    j["true_positive_rate"] =
        metrics.true_positive_rate ? nlohmann::json(*metrics.true_positive_rate) : nlohmann::json();
    j["false_positive_rate"] = metrics.false_positive_rate;
    nlohmann::json rte = nlohmann::json::object();
    for (const auto& [client, round] : metrics.rounds_to_exclusion) {
        rte[std::to_string(client)] = round;
    }
    j["rounds_to_exclusion"] = rte;
    j["attacker_ids"] = result.attacker_ids;
    j["rounds_run"] = result.reports.size();
    j["diverged"] = result.diverged;
    if (result.diverged) j["divergence_message"] = result.divergence_message;
    j["config"] = nlohmann::json::parse(config_to_json(cfg));
    return j.dump(2) + "\n";
}

ReportBundle run_and_report(const ExperimentConfig& cfg, const std::string& out_dir) {
    const ExperimentResult result = run_experiment(cfg);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    ReportBundle bundle;
    bundle.metrics_csv = (dir / "metrics.csv").string();
    bundle.trust_csv = (dir / "trust.csv").string();
    bundle.summary_json = (dir / "summary.json").string();

    write_atomic(bundle.metrics_csv, metrics_csv_text(result));
    write_atomic(bundle.trust_csv, trust_csv_text(result));
    write_atomic(bundle.summary_json, summary_json_text(cfg, result));
    return bundle;
}

}  // namespace kets
