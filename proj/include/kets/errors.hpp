#ifndef KETS_ERRORS_HPP
#define KETS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kets {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A vector with zero Euclidean norm was passed where a direction is required.
class ZeroNormError : public Error {
public:
    explicit ZeroNormError(const std::string& msg) : Error(msg) {}
};

// Vector lengths or model shapes do not match.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// An aggregate was requested over an empty set (or all-zero weights).
class EmptyAggregateError : public Error {
public:
    explicit EmptyAggregateError(const std::string& msg) : Error(msg) {}
};

// Fewer samples than the statistic needs.
class InsufficientSamplesError : public Error {
public:
    explicit InsufficientSamplesError(const std::string& msg) : Error(msg) {}
};

// Fewer clients than the aggregation rule needs.
class InsufficientClientsError : public Error {
public:
    explicit InsufficientClientsError(const std::string& msg) : Error(msg) {}
};

// Every client in the pool has been excluded; nothing left to sample.
class PoolExhaustedError : public Error {
public:
    explicit PoolExhaustedError(const std::string& msg) : Error(msg) {}
};

// The requested partition cannot be built (e.g. more clients than samples).
class InfeasiblePartitionError : public Error {
public:
    explicit InfeasiblePartitionError(const std::string& msg) : Error(msg) {}
};

// A file does not conform to its declared format. Carries the byte offset
// (or line number, for text formats) where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& msg, std::size_t offset)
        : Error(msg + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Invalid or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Training produced a non-finite loss. Carries where it happened.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, int epoch, int batch)
        : Error(msg + " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ")"),
          epoch_(epoch),
          batch_(batch) {}
    int epoch() const noexcept { return epoch_; }
    int batch() const noexcept { return batch_; }

private:
    int epoch_;
    int batch_;
};

}  // namespace kets

#endif  // KETS_ERRORS_HPP
