#ifndef LIVERPANEL_METRICS_HPP
#define LIVERPANEL_METRICS_HPP

#include <optional>
#include <span>
#include <vector>

namespace liverpanel {

// Paired prediction/actual vectors. Validated on construction: equal lengths,
// at least two cases, every value finite.
class PredictionVector {
public:
    PredictionVector(std::vector<double> predicted, std::vector<double> actual);

    const std::vector<double>& predicted() const { return predicted_; }
    const std::vector<double>& actual() const { return actual_; }
    std::size_t size() const { return actual_.size(); }

private:
    std::vector<double> predicted_;
    std::vector<double> actual_;
};

struct MetricTriple {
    std::optional<double> ppmcc;  // absent when either side has zero variance
    double rae = 0.0;
    double rrse = 0.0;
};

// Relative absolute error: sum |P_j - T_j| / sum |T_j - mean(T)|.
// Throws DegenerateTarget when the actuals are all equal.
double rae(const PredictionVector& v);

// Root relative squared error: sqrt(sum (P_j - T_j)^2 / sum (T_j - mean(T))^2).
// Throws DegenerateTarget when the actuals are all equal.
double rrse(const PredictionVector& v);

// Pearson product-moment correlation, two-pass. Throws ZeroVariance naming
// the offending input ("x" or "y").
double ppmcc(std::span<const double> x, std::span<const double> y);

// All three metrics; a ZeroVariance from ppmcc becomes an absent value rather
// than a fabricated number. DegenerateTarget still propagates.
MetricTriple evaluate(const PredictionVector& v);

}  // namespace liverpanel

#endif
