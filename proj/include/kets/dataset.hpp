#ifndef KETS_DATASET_HPP
#define KETS_DATASET_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace kets {

// Row-major feature matrix plus integer labels in [0, num_classes).
struct LabeledDataset {
    std::vector<double> features;  // n * dim, row-major
    std::vector<int> labels;       // n
    std::size_t dim = 0;

    std::size_t size() const { return labels.size(); }
    const double* row(std::size_t i) const { return features.data() + i * dim; }

    // Dataset restricted to the given sample indices, in the given order.
    LabeledDataset subset(const std::vector<std::size_t>& indices) const;
};

// C Gaussian blobs with unit-norm class means pairwise at least 2*spread
// apart, isotropic per-class noise of std `spread`, balanced class counts.
LabeledDataset generate_synthetic(std::size_t n, std::size_t dim, int num_classes, double spread,
                                  std::uint64_t seed);

// Big-endian IDX pair (images magic 0x803, labels magic 0x801). Pixels are
// scaled from [0,255] to [0,1]; images are flattened row-major.
// Throws FormatError (with byte offset) on bad magic, truncation, or an
// image/label count mismatch.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Inverse of load_idx for square-ish layouts: writes features quantized back
// to bytes. `rows * cols` must equal the feature dimension.
void save_idx(const LabeledDataset& data, std::size_t rows, std::size_t cols,
              const std::string& images_path, const std::string& labels_path);

// Comma-separated tabular file: header row, then real feature columns with
// an integer label as the last column.
LabeledDataset load_csv(const std::string& path);

// Label involution y -> (C-1-y); features untouched.
LabeledDataset flip_labels(const LabeledDataset& data, int num_classes);

// Per-class split: roughly `test_fraction` of each class goes to the test
// set, the rest to train. Deterministic given seed.
std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& data,
                                                           double test_fraction, std::uint64_t seed);

// Class-balanced sample of `size` points (equal per-class counts, remainder
// to the lowest class labels). Used to build the FLTrust root dataset.
LabeledDataset stratified_sample(const LabeledDataset& data, std::size_t size, std::uint64_t seed);

int count_classes(const LabeledDataset& data);

}  // namespace kets

#endif  // KETS_DATASET_HPP
