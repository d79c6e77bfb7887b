#ifndef LIVERPANEL_ERRORS_HPP
#define LIVERPANEL_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace liverpanel {

// Base class for everything this library throws on its own behalf.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- ingestion / dataset ---

class MissingColumn : public Error {
public:
    explicit MissingColumn(const std::string& column)
        : Error("missing column: " + column), column_(column) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& column, const std::string& detail)
        : Error("row " + std::to_string(row) + ", column " + column + ": " + detail),
          row_(row),
          column_(column) {}
    std::size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

class EmptyDataset : public Error {
public:
    EmptyDataset() : Error("dataset contains no records") {}
};

class NotPositiveSemidefinite : public Error {
public:
    NotPositiveSemidefinite() : Error("correlation matrix is not positive semidefinite") {}
};

class InvalidBounds : public Error {
public:
    explicit InvalidBounds(const std::string& detail) : Error("invalid bounds: " + detail) {}
};

class KTooLarge : public Error {
public:
    explicit KTooLarge(const std::string& detail) : Error("k out of range: " + detail) {}
};

// --- metrics ---

class DegenerateTarget : public Error {
public:
    DegenerateTarget() : Error("all target values are equal; relative error is undefined") {}
};

class ZeroVariance : public Error {
public:
    explicit ZeroVariance(const std::string& which)
        : Error("zero variance in input: " + which), which_(which) {}
    const std::string& which() const { return which_; }

private:
    std::string which_;
};

// --- learners ---

class AllFeaturesConstant : public Error {
public:
    AllFeaturesConstant() : Error("every candidate feature is constant") {}
};

class InsufficientPoints : public Error {
public:
    InsufficientPoints(const std::string& set_name, std::size_t needed, std::size_t have)
        : Error("set '" + set_name + "' has " + std::to_string(have) +
                " points, need at least " + std::to_string(needed)),
          set_name_(set_name) {}
    const std::string& set_name() const { return set_name_; }

private:
    std::string set_name_;
};

class DatasetTooSmall : public Error {
public:
    explicit DatasetTooSmall(const std::string& detail) : Error("dataset too small: " + detail) {}
};

class DivergedLoss : public Error {
public:
    explicit DivergedLoss(std::size_t epoch)
        : Error("training loss became non-finite at epoch " + std::to_string(epoch)),
          epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

// --- ensembles ---

class EmptyMemberSet : public Error {
public:
    EmptyMemberSet() : Error("ensemble has no members") {}
};

class PredictionOutOfBins : public Error {
public:
    explicit PredictionOutOfBins(double value)
        : Error("prediction " + std::to_string(value) + " falls outside the bin scheme") {}
};

// --- configuration ---

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& detail) : Error("config: " + detail) {}
};

}  // namespace liverpanel

#endif
