#include "kets/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kets/errors.hpp"
#include "kets/rng.hpp"

namespace kets {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::ifstream& in, const std::string& path, std::size_t offset) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw FormatError(path + ": truncated file, expected 4 more bytes", offset);
    }
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

void write_u32_be(std::ofstream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::vector<std::vector<std::size_t>> indices_by_class(const LabeledDataset& data, int num_classes) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < data.size(); ++i) {
        by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
    }
    return by_class;
}

}  // namespace

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
    LabeledDataset out;
    out.dim = dim;
    out.features.reserve(indices.size() * dim);
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
        out.features.insert(out.features.end(), row(i), row(i) + dim);
        out.labels.push_back(labels[i]);
    }
    return out;
}

LabeledDataset generate_synthetic(std::size_t n, std::size_t dim, int num_classes, double spread,
                                  std::uint64_t seed) {
    if (num_classes < 2) throw ConfigError("generate_synthetic: need at least 2 classes");
    if (n < static_cast<std::size_t>(num_classes)) {
        throw ConfigError("generate_synthetic: need at least one sample per class");
    }
    Rng rng(seed);

    // Unit-norm class means, redrawn until pairwise separation >= 2*spread.
    std::vector<std::vector<double>> means;
    for (int c = 0; c < num_classes; ++c) {
        std::vector<double> m(dim);
        bool ok = false;
        for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
            double norm = 0.0;
            for (auto& x : m) {
                x = rng.normal();
                norm += x * x;
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            for (auto& x : m) x /= norm;
            ok = true;
            for (const auto& other : means) {
                double d2 = 0.0;
                for (std::size_t j = 0; j < dim; ++j) d2 += (m[j] - other[j]) * (m[j] - other[j]);
                if (std::sqrt(d2) < 2.0 * spread) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) {
            throw ConfigError("generate_synthetic: cannot place " + std::to_string(num_classes) +
                              " unit-norm means " + std::to_string(2.0 * spread) + " apart");
        }
        means.push_back(std::move(m));
    }

    LabeledDataset data;
    data.dim = dim;
    data.features.reserve(n * dim);
    data.labels.reserve(n);
    const std::size_t base = n / static_cast<std::size_t>(num_classes);
    const std::size_t extra = n % static_cast<std::size_t>(num_classes);
    for (int c = 0; c < num_classes; ++c) {
        const std::size_t count = base + (static_cast<std::size_t>(c) < extra ? 1 : 0);
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                data.features.push_back(means[static_cast<std::size_t>(c)][j] + spread * rng.normal());
            }
            data.labels.push_back(c);
        }
    }
    return data;
}

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError(images_path + ": cannot open", 0);
    std::size_t offset = 0;
    const std::uint32_t img_magic = read_u32_be(img, images_path, offset);
    if (img_magic != kImagesMagic) {
        throw FormatError(images_path + ": bad image magic " + std::to_string(img_magic), 0);
    }
    offset += 4;
    const std::uint32_t n = read_u32_be(img, images_path, offset);
    offset += 4;
    const std::uint32_t rows = read_u32_be(img, images_path, offset);
    offset += 4;
    const std::uint32_t cols = read_u32_be(img, images_path, offset);
    offset += 4;

    const std::size_t pixels = static_cast<std::size_t>(n) * rows * cols;
    std::vector<unsigned char> raw(pixels);
    if (!img.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(pixels))) {
        throw FormatError(images_path + ": truncated pixel data", offset + static_cast<std::size_t>(img.gcount()));
    }

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError(labels_path + ": cannot open", 0);
    const std::uint32_t lab_magic = read_u32_be(lab, labels_path, 0);
    if (lab_magic != kLabelsMagic) {
        throw FormatError(labels_path + ": bad label magic " + std::to_string(lab_magic), 0);
    }
    const std::uint32_t n_labels = read_u32_be(lab, labels_path, 4);
    if (n_labels != n) {
        throw FormatError(labels_path + ": label count " + std::to_string(n_labels) +
                              " does not match image count " + std::to_string(n),
                          4);
    }
    std::vector<unsigned char> raw_labels(n_labels);
    if (!lab.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(n_labels))) {
        throw FormatError(labels_path + ": truncated label data", 8 + static_cast<std::size_t>(lab.gcount()));
    }

    LabeledDataset data;
    data.dim = static_cast<std::size_t>(rows) * cols;
    data.features.resize(pixels);
    for (std::size_t i = 0; i < pixels; ++i) data.features[i] = raw[i] / 255.0;
    data.labels.assign(raw_labels.begin(), raw_labels.end());
    return data;
}

void save_idx(const LabeledDataset& data, std::size_t rows, std::size_t cols,
              const std::string& images_path, const std::string& labels_path) {
    if (rows * cols != data.dim) {
        throw DimensionError("save_idx: rows*cols != feature dimension");
    }
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw FormatError(images_path + ": cannot open for writing", 0);
    write_u32_be(img, kImagesMagic);
    write_u32_be(img, static_cast<std::uint32_t>(data.size()));
    write_u32_be(img, static_cast<std::uint32_t>(rows));
    write_u32_be(img, static_cast<std::uint32_t>(cols));
    for (double f : data.features) {
        const double q = std::clamp(std::round(f * 255.0), 0.0, 255.0);
        const unsigned char b = static_cast<unsigned char>(q);
        img.write(reinterpret_cast<const char*>(&b), 1);
    }

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError(labels_path + ": cannot open for writing", 0);
    write_u32_be(lab, kLabelsMagic);
    write_u32_be(lab, static_cast<std::uint32_t>(data.size()));
    for (int y : data.labels) {
        const unsigned char b = static_cast<unsigned char>(y);
        lab.write(reinterpret_cast<const char*>(&b), 1);
    }
}

LabeledDataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path + ": cannot open", 0);
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": missing header row", 1);

    LabeledDataset data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                cells.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError(path + ": non-numeric cell '" + cell + "'", line_no);
            }
        }
        if (cells.size() < 2) throw FormatError(path + ": need at least one feature and a label", line_no);
        if (data.dim == 0) {
            data.dim = cells.size() - 1;
        } else if (cells.size() - 1 != data.dim) {
            throw FormatError(path + ": inconsistent column count", line_no);
        }
        const double label = cells.back();
        if (label != std::floor(label) || label < 0) {
            throw FormatError(path + ": label column must hold nonnegative integers", line_no);
        }
        data.features.insert(data.features.end(), cells.begin(), cells.end() - 1);
        data.labels.push_back(static_cast<int>(label));
    }
    if (data.size() == 0) throw FormatError(path + ": no data rows", line_no);
    return data;
}

LabeledDataset flip_labels(const LabeledDataset& data, int num_classes) {
    LabeledDataset out(data);
    for (int& y : out.labels) y = num_classes - 1 - y;
    return out;
}

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& data,
                                                           double test_fraction, std::uint64_t seed) {
    const int num_classes = count_classes(data);
    auto by_class = indices_by_class(data, num_classes);
    Rng rng(seed);

    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (auto& indices : by_class) {
        rng.shuffle(indices);
        const std::size_t n_test = static_cast<std::size_t>(
            std::floor(test_fraction * static_cast<double>(indices.size())));
        for (std::size_t i = 0; i < indices.size(); ++i) {
            (i < n_test ? test_idx : train_idx).push_back(indices[i]);
        }
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {data.subset(train_idx), data.subset(test_idx)};
}

LabeledDataset stratified_sample(const LabeledDataset& data, std::size_t size, std::uint64_t seed) {
    const int num_classes = count_classes(data);
    auto by_class = indices_by_class(data, num_classes);
    Rng rng(seed);

    const std::size_t base = size / static_cast<std::size_t>(num_classes);
    const std::size_t extra = size % static_cast<std::size_t>(num_classes);
    std::vector<std::size_t> chosen;
    for (int c = 0; c < num_classes; ++c) {
        auto& indices = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(indices);
        std::size_t want = base + (static_cast<std::size_t>(c) < extra ? 1 : 0);
        want = std::min(want, indices.size());
        chosen.insert(chosen.end(), indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(want));
    }
    std::sort(chosen.begin(), chosen.end());
    return data.subset(chosen);
}

int count_classes(const LabeledDataset& data) {
    int max_label = -1;
    for (int y : data.labels) max_label = std::max(max_label, y);
    return max_label + 1;
}

}  // namespace kets
