#include "kets/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kets/errors.hpp"
#include "kets/rng.hpp"

namespace kets {

namespace {

// Forward pass keeping post-activation values per layer; activations[0] is
// the input row, the last entry holds softmax probabilities.
std::vector<std::vector<double>> forward_all(const Model& m, const double* x) {
    std::vector<std::vector<double>> activations;
    activations.reserve(m.layer_sizes.size());
    activations.emplace_back(x, x + m.layer_sizes.front());

    for (std::size_t layer = 0; layer + 1 < m.layer_sizes.size(); ++layer) {
        const std::size_t in = m.layer_sizes[layer];
        const std::size_t out = m.layer_sizes[layer + 1];
        const auto& w = m.weights[layer];
        const auto& b = m.biases[layer];
        const auto& prev = activations.back();
        std::vector<double> z(out);
        for (std::size_t o = 0; o < out; ++o) {
            double acc = b[o];
            const double* wrow = w.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) acc += wrow[i] * prev[i];
            z[o] = acc;
        }
        const bool last = layer + 2 == m.layer_sizes.size();
        if (last) {
            const double zmax = *std::max_element(z.begin(), z.end());
            double total = 0.0;
            for (auto& v : z) {
                v = std::exp(v - zmax);
                total += v;
            }
            for (auto& v : z) v /= total;
        } else {
            for (auto& v : z) v = std::max(0.0, v);
        }
        activations.push_back(std::move(z));
    }
    return activations;
}

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    explicit Gradients(const Model& m) {
        for (const auto& w : m.weights) weights.emplace_back(w.size(), 0.0);
        for (const auto& b : m.biases) biases.emplace_back(b.size(), 0.0);
    }

    void scale(double s) {
        for (auto& w : weights)
            for (auto& v : w) v *= s;
        for (auto& b : biases)
            for (auto& v : b) v *= s;
    }
};

// Accumulates d(cross-entropy)/d(theta) for a single sample into grads and
// returns the sample's loss.
double backprop_sample(const Model& m, const double* x, int label, Gradients& grads) {
    const auto activations = forward_all(m, x);
    const auto& probs = activations.back();
    const double p = probs[static_cast<std::size_t>(label)];
    const double loss = -std::log(std::max(p, 1e-300));

    const std::size_t n_layers = m.weights.size();
    std::vector<double> delta(probs);
    delta[static_cast<std::size_t>(label)] -= 1.0;  // softmax + CE

    for (std::size_t layer = n_layers; layer-- > 0;) {
        const std::size_t in = m.layer_sizes[layer];
        const std::size_t out = m.layer_sizes[layer + 1];
        const auto& prev = activations[layer];
        auto& gw = grads.weights[layer];
        auto& gb = grads.biases[layer];
        for (std::size_t o = 0; o < out; ++o) {
            const double d = delta[o];
            gb[o] += d;
            double* grow = gw.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) grow[i] += d * prev[i];
        }
        if (layer == 0) break;
        const auto& w = m.weights[layer];
        std::vector<double> next(in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double d = delta[o];
            const double* wrow = w.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) next[i] += d * wrow[i];
        }
        // Rectifier derivative: gradient flows only through active units.
        for (std::size_t i = 0; i < in; ++i) {
            if (prev[i] <= 0.0) next[i] = 0.0;
        }
        delta = std::move(next);
    }
    return loss;
}

}  // namespace

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t layer = 0; layer + 1 < layer_sizes.size(); ++layer) {
        n += layer_sizes[layer] * layer_sizes[layer + 1] + layer_sizes[layer + 1];
    }
    return n;
}

UpdateVector Model::flatten() const {
    UpdateVector flat;
    flat.reserve(parameter_count());
    for (std::size_t layer = 0; layer < weights.size(); ++layer) {
        flat.insert(flat.end(), weights[layer].begin(), weights[layer].end());
        flat.insert(flat.end(), biases[layer].begin(), biases[layer].end());
    }
    return flat;
}

void Model::unflatten(const UpdateVector& flat) {
    if (flat.size() != parameter_count()) {
        throw DimensionError("unflatten: expected " + std::to_string(parameter_count()) +
                             " parameters, got " + std::to_string(flat.size()));
    }
    std::size_t pos = 0;
    for (std::size_t layer = 0; layer < weights.size(); ++layer) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), weights[layer].size(),
                    weights[layer].begin());
        pos += weights[layer].size();
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), biases[layer].size(),
                    biases[layer].begin());
        pos += biases[layer].size();
    }
}

void Model::add_delta(const UpdateVector& delta) {
    if (delta.size() != parameter_count()) {
        throw DimensionError("add_delta: expected " + std::to_string(parameter_count()) +
                             " parameters, got " + std::to_string(delta.size()));
    }
    std::size_t pos = 0;
    for (std::size_t layer = 0; layer < weights.size(); ++layer) {
        for (auto& v : weights[layer]) v += delta[pos++];
        for (auto& v : biases[layer]) v += delta[pos++];
    }
}

std::vector<double> Model::predict_proba(const double* x) const {
    return forward_all(*this, x).back();
}

int Model::predict(const double* x) const {
    const auto probs = predict_proba(x);
    int best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c) {
        if (probs[c] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    return best;
}

Model init_model(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw ConfigError("init_model: need at least input and output layers");
    Model m;
    m.layer_sizes = layer_sizes;
    Rng rng(seed);
    for (std::size_t layer = 0; layer + 1 < layer_sizes.size(); ++layer) {
        const std::size_t in = layer_sizes[layer];
        const std::size_t out = layer_sizes[layer + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::vector<double> w(in * out);
        for (auto& v : w) v = rng.uniform(-bound, bound);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(out, 0.0);
    }
    return m;
}

double cross_entropy_loss(const Model& model, const LabeledDataset& data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto probs = model.predict_proba(data.row(i));
        total += -std::log(std::max(probs[static_cast<std::size_t>(data.labels[i])], 1e-300));
    }
    return total / static_cast<double>(data.size());
}

UpdateVector loss_gradient(const Model& model, const LabeledDataset& data) {
    Gradients grads(model);
    for (std::size_t i = 0; i < data.size(); ++i) {
        backprop_sample(model, data.row(i), data.labels[i], grads);
    }
    grads.scale(1.0 / static_cast<double>(data.size()));

    UpdateVector flat;
    flat.reserve(model.parameter_count());
    for (std::size_t layer = 0; layer < grads.weights.size(); ++layer) {
        flat.insert(flat.end(), grads.weights[layer].begin(), grads.weights[layer].end());
        flat.insert(flat.end(), grads.biases[layer].begin(), grads.biases[layer].end());
    }
    return flat;
}

Model local_train(const Model& global, const LabeledDataset& data, int epochs, int batch_size,
                  double lr, double momentum, std::uint64_t seed) {
    if (data.size() == 0) throw EmptyAggregateError("local_train: empty dataset");
    if (batch_size < 1) throw ConfigError("local_train: batch_size must be positive");
    if (data.dim != global.layer_sizes.front()) {
        throw DimensionError("local_train: feature dimension " + std::to_string(data.dim) +
                             " does not match model input " + std::to_string(global.layer_sizes.front()));
    }

    Model model(global);
    Gradients velocity(model);
    Rng rng(seed);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        int batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size), ++batch_index) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
            const double batch_n = static_cast<double>(end - start);

            Gradients grads(model);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                batch_loss += backprop_sample(model, data.row(order[k]), data.labels[order[k]], grads);
            }
            batch_loss /= batch_n;
            if (!std::isfinite(batch_loss)) {
                throw DivergenceError("local_train: non-finite loss", epoch, batch_index);
            }
            grads.scale(1.0 / batch_n);

            for (std::size_t layer = 0; layer < model.weights.size(); ++layer) {
                auto& vw = velocity.weights[layer];
                auto& vb = velocity.biases[layer];
                const auto& gw = grads.weights[layer];
                const auto& gb = grads.biases[layer];
                auto& w = model.weights[layer];
                auto& b = model.biases[layer];
                for (std::size_t j = 0; j < w.size(); ++j) {
                    vw[j] = momentum * vw[j] + gw[j];
                    w[j] -= lr * vw[j];
                }
                for (std::size_t j = 0; j < b.size(); ++j) {
                    vb[j] = momentum * vb[j] + gb[j];
                    b[j] -= lr * vb[j];
                }
            }
        }
    }
    return model;
}

UpdateVector compute_update(const Model& local, const Model& global) {
    if (local.layer_sizes != global.layer_sizes) {
        throw DimensionError("compute_update: model shapes differ");
    }
    return subtract(local.flatten(), global.flatten());
}

double evaluate(const Model& model, const LabeledDataset& test) {
    if (test.size() == 0) throw EmptyAggregateError("evaluate: empty test set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (model.predict(test.row(i)) == test.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace kets
