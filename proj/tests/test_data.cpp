#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "kets/dataset.hpp"
#include "kets/errors.hpp"
#include "kets/experiment.hpp"
#include "kets/model.hpp"
#include "kets/partition.hpp"
#include "kets/rng.hpp"

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "kets_data_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

double label_entropy(const std::vector<int>& labels, int classes) {
    std::vector<double> counts(static_cast<std::size_t>(classes), 0.0);
    for (int y : labels) counts[static_cast<std::size_t>(y)] += 1.0;
    double h = 0.0;
    for (double c : counts) {
        if (c == 0.0) continue;
        const double p = c / static_cast<double>(labels.size());
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

TEST_SUITE("data_pipeline") {

TEST_CASE("dirichlet proportions sum to one") {
    kets::Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = kets::dirichlet_proportions(10, trial % 2 == 0 ? 0.1 : 5.0, rng);
        double total = 0.0;
        for (double x : p) {
            CHECK(x >= 0.0);
            total += x;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("huge alpha splits a single class evenly") {
    const std::vector<int> labels(100, 0);
    const auto plan = kets::dirichlet_partition(labels, 2, 1e6, 42);
    CHECK(plan.assignments.at(0).size() == 50);
    CHECK(plan.assignments.at(1).size() == 50);
}

TEST_CASE("partition covers every index exactly once and leaves nobody empty") {
    kets::Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> labels;
        const int classes = 2 + static_cast<int>(rng.below(5));
        const std::size_t n = 50 + rng.below(200);
        for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))));
        const std::size_t clients = 2 + rng.below(10);

        const auto plan = kets::dirichlet_partition(labels, clients, 0.5, 1000 + static_cast<std::uint64_t>(trial));
        std::set<std::size_t> seen;
        for (const auto& [client, samples] : plan.assignments) {
            CHECK(!samples.empty());
            for (std::size_t s : samples) {
                CHECK(seen.insert(s).second);  // no duplicates across clients
                CHECK(s < labels.size());
            }
        }
        CHECK(seen.size() == labels.size());
        CHECK(plan.assignments.size() == clients);
    }
}

TEST_CASE("partition is deterministic") {
    std::vector<int> labels;
    for (int i = 0; i < 300; ++i) labels.push_back(i % 7);
    const auto a = kets::dirichlet_partition(labels, 8, 0.3, 99);
    const auto b = kets::dirichlet_partition(labels, 8, 0.3, 99);
    CHECK(a.assignments == b.assignments);
}

TEST_CASE("low alpha concentrates labels per client") {
    std::vector<int> labels;
    for (int i = 0; i < 1000; ++i) labels.push_back(i % 10);
    const auto skewed = kets::dirichlet_partition(labels, 10, 0.1, 7);
    const auto uniform = kets::dirichlet_partition(labels, 10, 100.0, 7);

    const auto mean_entropy = [&](const kets::PartitionPlan& plan) {
        double total = 0.0;
        for (const auto& [client, samples] : plan.assignments) {
            std::vector<int> client_labels;
            for (std::size_t s : samples) client_labels.push_back(labels[s]);
            total += label_entropy(client_labels, 10);
        }
        return total / static_cast<double>(plan.assignments.size());
    };
    CHECK(mean_entropy(skewed) < mean_entropy(uniform));
}

TEST_CASE("more clients than samples is infeasible") {
    CHECK_THROWS_AS(kets::dirichlet_partition({0, 1, 0}, 4, 0.5, 1), kets::InfeasiblePartitionError);
}

TEST_CASE("synthetic data is deterministic and balanced") {
    const auto a = kets::generate_synthetic(103, 6, 5, 0.3, 11);
    const auto b = kets::generate_synthetic(103, 6, 5, 0.3, 11);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK(a.size() == 103);
    CHECK(a.dim == 6);

    std::vector<int> counts(5, 0);
    for (int y : a.labels) counts[static_cast<std::size_t>(y)]++;
    for (int c : counts) {
        CHECK(c >= 20);
        CHECK(c <= 21);
    }
}

TEST_CASE("a tiny spread makes the problem linearly separable") {
    const auto data = kets::generate_synthetic(200, 8, 4, 1e-3, 3);
    auto model = kets::init_model({8, 4}, 1);
    for (int step = 0; step < 40; ++step) {
        model = kets::local_train(model, data, 1, 32, 0.5, 0.0, static_cast<std::uint64_t>(step));
    }
    CHECK(kets::evaluate(model, data) == doctest::Approx(1.0));
}

TEST_CASE("fedavg learns the default synthetic task") {
    kets::ExperimentConfig cfg;
    cfg.dataset.synthetic_n = 1000;
    cfg.dataset.synthetic_dim = 20;
    cfg.dataset.synthetic_classes = 5;
    cfg.dataset.synthetic_spread = 0.3;
    cfg.n_clients = 10;
    cfg.clients_per_round = 10;
    cfg.attacker_fraction = 0.0;
    cfg.global_epochs = 20;
    cfg.local_epochs = 3;
    cfg.batch_size = 32;
    cfg.lr = 0.1;
    cfg.seed = 1;
    const auto result = kets::run_experiment(cfg);
    CHECK(result.reports.back().accuracy >= 0.85);
}

TEST_CASE("idx pixel scaling") {
    const auto dir = temp_dir();
    const auto img_path = (dir / "tiny-images-idx3-ubyte").string();
    const auto lab_path = (dir / "tiny-labels-idx1-ubyte").string();

    kets::LabeledDataset data;
    data.dim = 4;
    data.features = {0.0, 1.0, 0.0, 1.0};
    data.labels = {3};
    kets::save_idx(data, 2, 2, img_path, lab_path);

    const auto loaded = kets::load_idx(img_path, lab_path);
    CHECK(loaded.dim == 4);
    CHECK(loaded.features == std::vector<double>{0.0, 1.0, 0.0, 1.0});
    CHECK(loaded.labels == std::vector<int>{3});
}

TEST_CASE("idx round-trip reproduces byte-quantized features exactly") {
    kets::Rng rng(17);
    kets::LabeledDataset data;
    data.dim = 9;
    for (int i = 0; i < 25; ++i) {
        for (int j = 0; j < 9; ++j) {
            data.features.push_back(static_cast<double>(rng.below(256)) / 255.0);
        }
        data.labels.push_back(static_cast<int>(rng.below(10)));
    }
    const auto dir = temp_dir();
    const auto img_path = (dir / "rt-images-idx3-ubyte").string();
    const auto lab_path = (dir / "rt-labels-idx1-ubyte").string();
    kets::save_idx(data, 3, 3, img_path, lab_path);
    const auto loaded = kets::load_idx(img_path, lab_path);
    CHECK(loaded.features == data.features);
    CHECK(loaded.labels == data.labels);
}

TEST_CASE("idx rejects bad magic, truncation and count mismatches") {
    const auto dir = temp_dir();
    const auto img_path = (dir / "bad-images").string();
    const auto lab_path = (dir / "bad-labels").string();

    kets::LabeledDataset data;
    data.dim = 4;
    data.features = {0, 0, 0, 0, 1, 1, 1, 1};
    data.labels = {0, 1};
    kets::save_idx(data, 2, 2, img_path, lab_path);

    SUBCASE("bad magic") {
        std::fstream f(img_path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.put('\x42');
        f.close();
        CHECK_THROWS_AS(kets::load_idx(img_path, lab_path), kets::FormatError);
    }
    SUBCASE("truncated pixels") {
        std::filesystem::resize_file(img_path, 16 + 5);
        CHECK_THROWS_AS(kets::load_idx(img_path, lab_path), kets::FormatError);
    }
    SUBCASE("count mismatch") {
        kets::LabeledDataset fewer;
        fewer.dim = 4;
        fewer.features = {0, 0, 0, 0};
        fewer.labels = {0};
        const auto other_lab = (dir / "bad-labels-short").string();
        const auto other_img = (dir / "bad-images-short").string();
        kets::save_idx(fewer, 2, 2, other_img, other_lab);
        CHECK_THROWS_AS(kets::load_idx(img_path, other_lab), kets::FormatError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(kets::load_idx((dir / "nope").string(), lab_path), kets::FormatError);
    }
}

TEST_CASE("label flip is the mirror involution") {
    kets::LabeledDataset data;
    data.dim = 1;
    data.features = {0.5, 0.25, 0.75};
    data.labels = {0, 9, 5};

    const auto flipped = kets::flip_labels(data, 10);
    CHECK(flipped.labels == std::vector<int>{9, 0, 4});
    CHECK(flipped.features == data.features);
    CHECK(kets::flip_labels(flipped, 10).labels == data.labels);

    kets::LabeledDataset odd;
    odd.dim = 1;
    odd.features = {0.0};
    odd.labels = {11};
    CHECK(kets::flip_labels(odd, 23).labels == std::vector<int>{11});  // fixed point
}

TEST_CASE("csv loader parses header plus feature columns and label") {
    const auto dir = temp_dir();
    const auto path = (dir / "table.csv").string();
    {
        std::ofstream out(path);
        out << "f0,f1,label\n";
        out << "0.5,1.5,0\n";
        out << "-1.0,2.0,2\n";
    }
    const auto data = kets::load_csv(path);
    CHECK(data.dim == 2);
    CHECK(data.size() == 2);
    CHECK(data.features == std::vector<double>{0.5, 1.5, -1.0, 2.0});
    CHECK(data.labels == std::vector<int>{0, 2});

    {
        std::ofstream out(path);
        out << "f0,label\n";
        out << "0.5,zebra\n";
    }
    CHECK_THROWS_AS(kets::load_csv(path), kets::FormatError);
}

TEST_CASE("stratified split holds out the requested fraction per class") {
    const auto data = kets::generate_synthetic(500, 4, 5, 0.3, 23);
    const auto [train, test] = kets::stratified_split(data, 0.2, 31);
    CHECK(train.size() + test.size() == data.size());
    std::vector<int> test_counts(5, 0);
    for (int y : test.labels) test_counts[static_cast<std::size_t>(y)]++;
    for (int c : test_counts) CHECK(c == 20);  // 100 per class, 20% held out
}

TEST_CASE("stratified sample balances classes") {
    const auto data = kets::generate_synthetic(500, 4, 5, 0.3, 29);
    const auto root = kets::stratified_sample(data, 50, 37);
    CHECK(root.size() == 50);
    std::vector<int> counts(5, 0);
    for (int y : root.labels) counts[static_cast<std::size_t>(y)]++;
    for (int c : counts) CHECK(c == 10);
}

}  // TEST_SUITE
