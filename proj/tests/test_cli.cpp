#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "kets/config_file.hpp"
#include "kets/errors.hpp"
#include "kets/reporting.hpp"

namespace {

std::filesystem::path temp_dir(const std::string& leaf) {
    const auto dir = std::filesystem::temp_directory_path() / "kets_cli_tests" / leaf;
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

kets::ExperimentConfig tiny_config() {
    return kets::parse_config_text(
        "dataset = synthetic\n"
        "synthetic_n = 200\n"
        "synthetic_d = 6\n"
        "synthetic_classes = 3\n"
        "n_clients = 6\n"
        "clients_per_round = 6\n"
        "global_epochs = 3\n"
        "local_epochs = 1\n"
        "batch_size = 16\n"
        "seed = 5\n");
}

}  // namespace

TEST_SUITE("experiment_cli") {

TEST_CASE("a minimal config gets every default") {
    const auto cfg = kets::parse_config_text("seed = 1\n");
    CHECK(cfg.seed == 1);
    CHECK(cfg.n_clients == 30);
    CHECK(cfg.defense == kets::DefenseKind::fedavg);
    CHECK(cfg.attack.kind == kets::AttackKind::none);
    CHECK(cfg.beta == 0.1);
    CHECK(cfg.alpha == 0.5);

    // Defaults are echoed into the summary JSON.
    const auto j = nlohmann::json::parse(kets::config_to_json(cfg));
    CHECK(j["n_clients"] == 30);
    CHECK(j["beta"] == 0.1);
    CHECK(j["defense"] == "fedavg");
    CHECK(j["seed"] == 1);
}

TEST_CASE("comments and blank lines are ignored") {
    const auto cfg = kets::parse_config_text(
        "# a comment\n"
        "\n"
        "seed = 9   # trailing comment\n"
        "defense = kets\n");
    CHECK(cfg.seed == 9);
    CHECK(cfg.defense == kets::DefenseKind::kets);
}

TEST_CASE("unknown keys and bad types name the key and line") {
    CHECK_THROWS_WITH_AS(kets::parse_config_text("seed = 1\nwat = 2\n"),
                         doctest::Contains("wat"), kets::ConfigError);
    CHECK_THROWS_WITH_AS(kets::parse_config_text("seed = 1\nwat = 2\n"),
                         doctest::Contains("line 2"), kets::ConfigError);
    CHECK_THROWS_WITH_AS(kets::parse_config_text("lr = fast\n"), doctest::Contains("lr"),
                         kets::ConfigError);
    CHECK_THROWS_WITH_AS(kets::parse_config_text("global_epochs = 2.5\n"),
                         doctest::Contains("global_epochs"), kets::ConfigError);
}

TEST_CASE("invariant violations carry the field name") {
    CHECK_THROWS_WITH_AS(kets::parse_config_text("attacker_fraction = 0.6\n"),
                         doctest::Contains("attacker_fraction"), kets::ConfigError);
}

TEST_CASE("a zero-round run writes header-only CSVs and a null accuracy") {
    auto cfg = tiny_config();
    cfg.global_epochs = 0;
    const auto dir = temp_dir("zero_rounds");
    const auto bundle = kets::run_and_report(cfg, dir.string());

    CHECK(read_file(bundle.metrics_csv) == "round,accuracy,n_selected,n_honest,n_excluded_total\n");
    CHECK(read_file(bundle.trust_csv) == "round,client_id,trust,is_attacker\n");
    const auto summary = nlohmann::json::parse(read_file(bundle.summary_json));
    CHECK(summary["final_accuracy"].is_null());
    CHECK(summary["rounds_run"] == 0);
}

TEST_CASE("report bundles are deterministic byte for byte") {
    const auto cfg = tiny_config();
    const auto dir_a = temp_dir("det_a");
    const auto dir_b = temp_dir("det_b");
    const auto a = kets::run_and_report(cfg, dir_a.string());
    const auto b = kets::run_and_report(cfg, dir_b.string());
    CHECK(read_file(a.metrics_csv) == read_file(b.metrics_csv));
    CHECK(read_file(a.trust_csv) == read_file(b.trust_csv));
    CHECK(read_file(a.summary_json) == read_file(b.summary_json));
    CHECK(!read_file(a.metrics_csv).empty());
}

TEST_CASE("csv schemas match the contract") {
    const auto cfg = tiny_config();
    const auto dir = temp_dir("schema");
    const auto bundle = kets::run_and_report(cfg, dir.string());

    std::stringstream metrics(read_file(bundle.metrics_csv));
    std::string line;
    REQUIRE(std::getline(metrics, line));
    CHECK(line == "round,accuracy,n_selected,n_honest,n_excluded_total");
    int rows = 0;
    while (std::getline(metrics, line)) {
        ++rows;
        // round,accuracy with six decimals,counts
        CHECK(line.find(',') != std::string::npos);
        const auto second_field = line.substr(line.find(',') + 1);
        const auto accuracy = second_field.substr(0, second_field.find(','));
        CHECK(accuracy.size() >= 8);  // d.dddddd
        CHECK(accuracy[accuracy.size() - 7] == '.');
    }
    CHECK(rows == cfg.global_epochs);

    std::stringstream trust(read_file(bundle.trust_csv));
    REQUIRE(std::getline(trust, line));
    CHECK(line == "round,client_id,trust,is_attacker");
    rows = 0;
    while (std::getline(trust, line)) ++rows;
    CHECK(rows == cfg.global_epochs * cfg.n_clients);
}

TEST_CASE("summary embeds the resolved config for reproducibility") {
    auto cfg = tiny_config();
    cfg.defense = kets::DefenseKind::kets;
    cfg.attack.kind = kets::AttackKind::min_max;
    const auto dir = temp_dir("summary");
    const auto bundle = kets::run_and_report(cfg, dir.string());
    const auto summary = nlohmann::json::parse(read_file(bundle.summary_json));

    CHECK(summary["config"]["defense"] == "kets");
    CHECK(summary["config"]["attack"] == "min_max");
    CHECK(summary["config"]["synthetic_n"] == 200);
    CHECK(summary["config"]["seed"] == 5);
    CHECK(summary.contains("true_positive_rate"));
    CHECK(summary.contains("false_positive_rate"));
    CHECK(summary.contains("rounds_to_exclusion"));

    // The embedded config reproduces the run.
    kets::ExperimentConfig rebuilt = tiny_config();
    rebuilt.defense = kets::DefenseKind::kets;
    rebuilt.attack.kind = kets::AttackKind::min_max;
    const auto again = kets::run_and_report(rebuilt, temp_dir("summary_again").string());
    CHECK(read_file(again.summary_json) == read_file(bundle.summary_json));
}

TEST_CASE("summary detection rates match a hand audit of the trust csv") {
    auto cfg = tiny_config();
    cfg.defense = kets::DefenseKind::kets;
    cfg.attack.kind = kets::AttackKind::sign_flip;
    cfg.attack.start_round = 1;
    const auto dir = temp_dir("audit");
    const auto bundle = kets::run_and_report(cfg, dir.string());
    const auto summary = nlohmann::json::parse(read_file(bundle.summary_json));

    // Recompute TPR/FPR from the exported ledger rows alone.
    std::map<int, bool> is_attacker;
    std::map<int, bool> ever_zero;
    std::stringstream in(read_file(bundle.trust_csv));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::stringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');  // round
        std::getline(row, cell, ',');
        const int client = std::stoi(cell);
        std::getline(row, cell, ',');
        const double trust = std::stod(cell);
        std::getline(row, cell, ',');
        is_attacker[client] = cell == "1";
        if (trust == 0.0) ever_zero[client] = true;
    }
    int attackers = 0, attackers_zero = 0, benign = 0, benign_zero = 0;
    for (const auto& [client, attacker] : is_attacker) {
        if (attacker) {
            ++attackers;
            if (ever_zero[client]) ++attackers_zero;
        } else {
            ++benign;
            if (ever_zero[client]) ++benign_zero;
        }
    }
    REQUIRE(attackers > 0);
    CHECK(summary["true_positive_rate"].get<double>() ==
          doctest::Approx(static_cast<double>(attackers_zero) / attackers));
    CHECK(summary["false_positive_rate"].get<double>() ==
          doctest::Approx(static_cast<double>(benign_zero) / benign));
}

TEST_CASE("sweep-style overrides reuse the config machinery") {
    auto cfg = tiny_config();
    kets::apply_config_key(cfg, "alpha", "5.0");
    CHECK(cfg.alpha == 5.0);
    kets::apply_config_key(cfg, "defense", "median");
    CHECK(cfg.defense == kets::DefenseKind::median);
    CHECK_THROWS_AS(kets::apply_config_key(cfg, "bogus", "1"), kets::ConfigError);
}

}  // TEST_SUITE
