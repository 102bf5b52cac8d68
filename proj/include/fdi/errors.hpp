#pragma once

#include <stdexcept>
#include <string>

namespace fdi {

// Conformability violations between matrices or vectors.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A rank-deficient factorization where full rank is required.
class SingularityError : public std::runtime_error {
public:
    SingularityError(const std::string& what, long deficient_columns)
        : std::runtime_error(what), deficient_columns_(deficient_columns) {}

    [[nodiscard]] long deficient_columns() const noexcept { return deficient_columns_; }

private:
    long deficient_columns_;
};

// Non-finite values, divergence, or iteration limits.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid domain parameters (participation factors, topology, labels, poles...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class EmptyAttackSetError : public std::runtime_error {
public:
    EmptyAttackSetError() : std::runtime_error("empty attack set: {alpha : A alpha >= b} has no points") {}
};

} // namespace fdi
