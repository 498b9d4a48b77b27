#include "kets/config_file.hpp"

#include <fstream>
#include <sstream>

#include "kets/errors.hpp"

namespace kets {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& key, const std::string& why, int line) {
    std::string msg = "config key '" + key + "': " + why;
    if (line > 0) msg += " (line " + std::to_string(line) + ")";
    throw ConfigError(msg);
}

long long parse_int(const std::string& key, const std::string& value, int line) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) fail(key, "expected an integer, got '" + value + "'", line);
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(key, "expected an integer, got '" + value + "'", line);
    }
}

double parse_double(const std::string& key, const std::string& value, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) fail(key, "expected a number, got '" + value + "'", line);
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(key, "expected a number, got '" + value + "'", line);
    }
}

}  // namespace

void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value, int line) {
    if (key == "dataset") {
        if (value == "synthetic") cfg.dataset.source = DatasetSpec::Source::synthetic;
        else if (value == "idx") cfg.dataset.source = DatasetSpec::Source::idx;
        else if (value == "csv") cfg.dataset.source = DatasetSpec::Source::csv;
        else fail(key, "expected synthetic, idx or csv", line);
    } else if (key == "synthetic_n") {
        cfg.dataset.synthetic_n = static_cast<std::size_t>(parse_int(key, value, line));
    } else if (key == "synthetic_d") {
        cfg.dataset.synthetic_dim = static_cast<std::size_t>(parse_int(key, value, line));
    } else if (key == "synthetic_classes") {
        cfg.dataset.synthetic_classes = static_cast<int>(parse_int(key, value, line));
    } else if (key == "synthetic_spread") {
        cfg.dataset.synthetic_spread = parse_double(key, value, line);
    } else if (key == "idx_images") {
        cfg.dataset.idx_images = value;
    } else if (key == "idx_labels") {
        cfg.dataset.idx_labels = value;
    } else if (key == "csv_path") {
        cfg.dataset.csv_path = value;
    } else if (key == "n_clients") {
        cfg.n_clients = static_cast<int>(parse_int(key, value, line));
    } else if (key == "clients_per_round") {
        cfg.clients_per_round = static_cast<int>(parse_int(key, value, line));
    } else if (key == "attacker_fraction") {
        cfg.attacker_fraction = parse_double(key, value, line);
    } else if (key == "attack") {
        try {
            cfg.attack.kind = attack_kind_from_string(value);
        } catch (const ConfigError& e) {
            fail(key, e.what(), line);
        }
    } else if (key == "perturbation") {
        try {
            cfg.attack.perturbation = perturbation_from_string(value);
        } catch (const ConfigError& e) {
            fail(key, e.what(), line);
        }
    } else if (key == "start_round") {
        cfg.attack.start_round = static_cast<int>(parse_int(key, value, line));
    } else if (key == "stop_round") {
        cfg.attack.stop_round = static_cast<int>(parse_int(key, value, line));
    } else if (key == "gamma_init") {
        cfg.attack.gamma_init = parse_double(key, value, line);
    } else if (key == "tau") {
        cfg.attack.tau = parse_double(key, value, line);
    } else if (key == "trim_b") {
        cfg.attack.trim_b = parse_double(key, value, line);
    } else if (key == "defense") {
        try {
            cfg.defense = defense_kind_from_string(value);
        } catch (const ConfigError& e) {
            fail(key, e.what(), line);
        }
    } else if (key == "alpha") {
        cfg.alpha = parse_double(key, value, line);
    } else if (key == "beta") {
        cfg.beta = parse_double(key, value, line);
    } else if (key == "local_epochs") {
        cfg.local_epochs = static_cast<int>(parse_int(key, value, line));
    } else if (key == "global_epochs") {
        cfg.global_epochs = static_cast<int>(parse_int(key, value, line));
    } else if (key == "batch_size") {
        cfg.batch_size = static_cast<int>(parse_int(key, value, line));
    } else if (key == "lr") {
        cfg.lr = parse_double(key, value, line);
    } else if (key == "momentum") {
        cfg.momentum = parse_double(key, value, line);
    } else if (key == "fltrust_root_size") {
        cfg.fltrust_root_size = static_cast<std::size_t>(parse_int(key, value, line));
    } else if (key == "ketsv2_threshold") {
        cfg.ketsv2_threshold = parse_double(key, value, line);
    } else if (key == "ketsv2_mu") {
        cfg.ketsv2_mu = parse_double(key, value, line);
    } else if (key == "kde_quantile") {
        cfg.kde_quantile = parse_double(key, value, line);
    } else if (key == "hidden") {
        std::vector<std::size_t> sizes;
        std::stringstream ss(value);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            sizes.push_back(static_cast<std::size_t>(parse_int(key, trim(cell), line)));
        }
        if (sizes.empty()) fail(key, "expected a comma-separated list of layer sizes", line);
        cfg.hidden_sizes = std::move(sizes);
    } else if (key == "test_fraction") {
        cfg.test_fraction = parse_double(key, value, line);
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_int(key, value, line));
    } else {
        fail(key, "unknown key", line);
    }
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::stringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ": expected 'key = value' (line " + std::to_string(line_no) + ")");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ": empty key (line " + std::to_string(line_no) + ")");
        }
        apply_config_key(cfg, key, value, line_no);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

}  // namespace kets
