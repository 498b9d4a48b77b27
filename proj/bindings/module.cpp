// Python bindings for the main operations: vector metrics, KDE trust
// segmentation, penalties, attacks, aggregation rules, and the experiment
// driver.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kets/attacks.hpp"
#include "kets/config_file.hpp"
#include "kets/errors.hpp"
#include "kets/dataset.hpp"
#include "kets/defenses.hpp"
#include "kets/experiment.hpp"
#include "kets/kde.hpp"
#include "kets/model.hpp"
#include "kets/partition.hpp"
#include "kets/reporting.hpp"
#include "kets/trust.hpp"
#include "kets/vector_ops.hpp"

namespace py = pybind11;

namespace {

kets::AggregationContext make_context(const std::vector<kets::UpdateVector>& updates,
                                      const std::vector<std::size_t>& dataset_sizes,
                                      std::size_t assumed_attackers) {
    kets::AggregationContext ctx;
    for (std::size_t i = 0; i < updates.size(); ++i) {
        ctx.client_ids.push_back(static_cast<int>(i));
        ctx.updates.push_back(updates[i]);
        ctx.dataset_sizes.push_back(i < dataset_sizes.size() ? dataset_sizes[i] : 1);
    }
    ctx.assumed_attackers = assumed_attackers;
    return ctx;
}

}  // namespace

PYBIND11_MODULE(ketspy, m) {
    m.doc() = "Federated-learning lab: trust-scored KDE segmentation defense, robust "
              "aggregators, and white-box poisoning attacks.";

    py::register_exception<kets::Error>(m, "KetsError");

    // vector metrics
    m.def("cosine_similarity", &kets::cosine_similarity, py::arg("a"), py::arg("b"));
    m.def("l2_distance", &kets::l2_distance, py::arg("a"), py::arg("b"));
    m.def("weighted_mean", &kets::weighted_mean, py::arg("vectors"), py::arg("weights"));
    m.def("coordinate_std", &kets::coordinate_std, py::arg("vectors"));

    // KDE segmentation
    py::class_<kets::DensityCurve>(m, "DensityCurve")
        .def_readonly("grid", &kets::DensityCurve::grid)
        .def_readonly("density", &kets::DensityCurve::density)
        .def_readonly("bandwidth", &kets::DensityCurve::bandwidth);
    m.def("estimate_bandwidth", &kets::estimate_bandwidth, py::arg("scores"),
          py::arg("quantile") = kets::kBandwidthQuantile);
    m.def("kde_density", &kets::kde_density, py::arg("scores"), py::arg("bandwidth"));
    m.def("find_local_minima", &kets::find_local_minima, py::arg("curve"));
    m.def("segment_honest", &kets::segment_honest, py::arg("scores"), py::arg("sampled"),
          py::arg("quantile") = kets::kBandwidthQuantile);

    // trust
    m.def("compute_penalty", &kets::compute_penalty, py::arg("current"), py::arg("previous"),
          py::arg("trust_prev"), py::arg("beta"));
    m.def("update_trust", &kets::update_trust, py::arg("trust_prev"), py::arg("penalty"), py::arg("beta"));

    // attacks
    m.def(
        "perturbation_vector",
        [](const std::vector<kets::UpdateVector>& benign, const std::string& kind) {
            return kets::perturbation_vector(benign, kets::perturbation_from_string(kind));
        },
        py::arg("benign"), py::arg("kind"));
    m.def(
        "min_max_attack",
        [](const std::vector<kets::UpdateVector>& benign, const std::string& kind, double gamma_init,
           double tau) {
            kets::AttackConfig cfg;
            cfg.gamma_init = gamma_init;
            cfg.tau = tau;
            return kets::min_max_attack(benign, kets::perturbation_from_string(kind), cfg);
        },
        py::arg("benign"), py::arg("kind") = "unit", py::arg("gamma_init") = 10.0, py::arg("tau") = 0.01);
    m.def(
        "min_sum_attack",
        [](const std::vector<kets::UpdateVector>& benign, const std::string& kind, double gamma_init,
           double tau) {
            kets::AttackConfig cfg;
            cfg.gamma_init = gamma_init;
            cfg.tau = tau;
            return kets::min_sum_attack(benign, kets::perturbation_from_string(kind), cfg);
        },
        py::arg("benign"), py::arg("kind") = "unit", py::arg("gamma_init") = 10.0, py::arg("tau") = 0.01);
    m.def("trim_attack", &kets::trim_attack, py::arg("benign"), py::arg("b"), py::arg("n_malicious"),
          py::arg("seed"));
    m.def("sign_flip_attack", &kets::sign_flip_attack, py::arg("update"));

    // aggregation rules (functional form: vectors indexed 0..n-1)
    m.def(
        "fed_avg",
        [](const std::vector<kets::UpdateVector>& updates, const std::vector<std::size_t>& sizes) {
            return kets::fed_avg(make_context(updates, sizes, 0));
        },
        py::arg("updates"), py::arg("dataset_sizes") = std::vector<std::size_t>{});
    m.def(
        "krum_select",
        [](const std::vector<kets::UpdateVector>& updates, std::size_t assumed_attackers) {
            return kets::krum_select(make_context(updates, {}, assumed_attackers));
        },
        py::arg("updates"), py::arg("assumed_attackers"));
    m.def(
        "trim_mean",
        [](const std::vector<kets::UpdateVector>& updates, std::size_t k) {
            return kets::trim_mean(make_context(updates, {}, k));
        },
        py::arg("updates"), py::arg("k"));
    m.def(
        "coordinate_median",
        [](const std::vector<kets::UpdateVector>& updates) {
            return kets::coordinate_median(make_context(updates, {}, 0));
        },
        py::arg("updates"));

    // data pipeline
    py::class_<kets::LabeledDataset>(m, "LabeledDataset")
        .def_readonly("features", &kets::LabeledDataset::features)
        .def_readonly("labels", &kets::LabeledDataset::labels)
        .def_readonly("dim", &kets::LabeledDataset::dim)
        .def("__len__", &kets::LabeledDataset::size);
    m.def("generate_synthetic", &kets::generate_synthetic, py::arg("n"), py::arg("dim"),
          py::arg("num_classes"), py::arg("spread"), py::arg("seed"));
    m.def("load_idx", &kets::load_idx, py::arg("images_path"), py::arg("labels_path"));
    m.def("flip_labels", &kets::flip_labels, py::arg("data"), py::arg("num_classes"));
    m.def(
        "dirichlet_partition",
        [](const std::vector<int>& labels, std::size_t n_clients, double alpha, std::uint64_t seed) {
            return kets::dirichlet_partition(labels, n_clients, alpha, seed).assignments;
        },
        py::arg("labels"), py::arg("n_clients"), py::arg("alpha"), py::arg("seed"));

    // experiment driver
    py::class_<kets::RoundReport>(m, "RoundReport")
        .def_readonly("round", &kets::RoundReport::round)
        .def_readonly("accuracy", &kets::RoundReport::accuracy)
        .def_readonly("selected", &kets::RoundReport::selected)
        .def_readonly("honest", &kets::RoundReport::honest)
        .def_readonly("crafted", &kets::RoundReport::crafted)
        .def_readonly("trust", &kets::RoundReport::trust)
        .def_readonly("excluded", &kets::RoundReport::excluded);
    py::class_<kets::ExperimentResult>(m, "ExperimentResult")
        .def_readonly("reports", &kets::ExperimentResult::reports)
        .def_readonly("attacker_ids", &kets::ExperimentResult::attacker_ids)
        .def_readonly("diverged", &kets::ExperimentResult::diverged);
    py::class_<kets::ExperimentConfig>(m, "ExperimentConfig");
    m.def("parse_config", &kets::parse_config, py::arg("path"));
    m.def("parse_config_text", &kets::parse_config_text, py::arg("text"),
          py::arg("origin") = "<string>");
    m.def("run_experiment", &kets::run_experiment, py::arg("config"));
    m.def(
        "run_and_report",
        [](const kets::ExperimentConfig& cfg, const std::string& out_dir) {
            const kets::ReportBundle bundle = kets::run_and_report(cfg, out_dir);
            return py::make_tuple(bundle.metrics_csv, bundle.trust_csv, bundle.summary_json);
        },
        py::arg("config"), py::arg("out_dir"));
}
