#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tlnp {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed argument: non-finite value, dimension mismatch, wrong role.
class InputError : public Error {
public:
    using Error::Error;
};

// Invalid configuration (architecture, hyperparameters, weights).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A risk was requested over an empty sample.
class UndefinedError : public Error {
public:
    using Error::Error;
};

class TrainingDiverged : public Error {
public:
    TrainingDiverged(std::size_t iteration, double cost)
        : Error("training diverged at iteration " + std::to_string(iteration) +
                " (cost " + std::to_string(cost) + ")"),
          iteration_(iteration),
          cost_(cost) {}

    std::size_t iteration() const noexcept { return iteration_; }
    double cost() const noexcept { return cost_; }

private:
    std::size_t iteration_;
    double cost_;
};

// TLNP step failed; diagnostics carry one human-readable line per grid point.
class AlgorithmFailure : public Error {
public:
    AlgorithmFailure(const std::string& what, std::vector<std::string> diagnostics)
        : Error(what), diagnostics_(std::move(diagnostics)) {}

    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

class FeasibilityError : public Error {
public:
    FeasibilityError(const std::string& what, double min_type1)
        : Error(what), min_type1_(min_type1) {}

    // Smallest empirical surrogate Type-I achieved over the class.
    double min_type1() const noexcept { return min_type1_; }

private:
    double min_type1_;
};

class IngestError : public Error {
public:
    using Error::Error;
};

class SplitError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace tlnp
