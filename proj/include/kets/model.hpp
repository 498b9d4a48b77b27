#ifndef KETS_MODEL_HPP
#define KETS_MODEL_HPP

#include <cstdint>
#include <vector>

#include "kets/dataset.hpp"
#include "kets/vector_ops.hpp"

namespace kets {

// Fully connected classifier: rectifier on hidden layers, softmax output.
// Parameters flatten layer by layer, weights (row-major, out x in) before
// biases, so a model and its flat UpdateVector round-trip exactly.
struct Model {
    std::vector<std::size_t> layer_sizes;         // input, hidden..., classes
    std::vector<std::vector<double>> weights;      // [layer][out * in]
    std::vector<std::vector<double>> biases;       // [layer][out]

    std::size_t parameter_count() const;
    UpdateVector flatten() const;
    void unflatten(const UpdateVector& flat);
    void add_delta(const UpdateVector& delta);

    // Class probabilities for one feature row.
    std::vector<double> predict_proba(const double* x) const;
    int predict(const double* x) const;
};

// Deterministic initialization: weights uniform in
// [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
Model init_model(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

// Mean cross-entropy loss over the dataset.
double cross_entropy_loss(const Model& model, const LabeledDataset& data);

// Analytic gradient of the mean cross-entropy over the dataset, flattened in
// parameter order.
UpdateVector loss_gradient(const Model& model, const LabeledDataset& data);

// Seeded-shuffle mini-batch gradient descent on cross-entropy for `epochs`
// passes; the final short batch is kept. The input model is not mutated.
// Throws DivergenceError (with epoch/batch) when the loss goes non-finite.
Model local_train(const Model& global, const LabeledDataset& data, int epochs, int batch_size,
                  double lr, double momentum, std::uint64_t seed);

// flatten(local) - flatten(global). Throws DimensionError on shape mismatch.
UpdateVector compute_update(const Model& local, const Model& global);

// Fraction of argmax-correct predictions; ties break to the lowest class.
double evaluate(const Model& model, const LabeledDataset& test);

}  // namespace kets

#endif  // KETS_MODEL_HPP
