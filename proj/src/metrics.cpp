#include "liverpanel/metrics.hpp"

#include <cmath>
#include <string>

#include "liverpanel/errors.hpp"

namespace liverpanel {

namespace {

void require_finite(std::span<const double> v, const char* label) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw Error(std::string(label) + " contains a non-finite value");
        }
    }
}

double mean_of(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

// Exact all-equal test: a constant vector must register as zero variance even
// when its computed mean differs from the common value by a rounding error.
bool constant(std::span<const double> v) {
    for (double x : v) {
        if (x != v.front()) return false;
    }
    return true;
}

}  // namespace

PredictionVector::PredictionVector(std::vector<double> predicted, std::vector<double> actual)
    : predicted_(std::move(predicted)), actual_(std::move(actual)) {
    if (predicted_.size() != actual_.size()) {
        throw Error("prediction vector lengths differ: " + std::to_string(predicted_.size()) +
                    " vs " + std::to_string(actual_.size()));
    }
    if (actual_.size() < 2) {
        throw Error("prediction vector needs at least 2 cases");
    }
    require_finite(predicted_, "predicted");
    require_finite(actual_, "actual");
}

double rae(const PredictionVector& v) {
    const auto& p = v.predicted();
    const auto& t = v.actual();
    if (constant(t)) throw DegenerateTarget();
    const double t_bar = mean_of(t);

    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
        num += std::abs(p[j] - t[j]);
        den += std::abs(t[j] - t_bar);
    }
    if (den <= 0.0) throw DegenerateTarget();
    return num / den;
}

double rrse(const PredictionVector& v) {
    const auto& p = v.predicted();
    const auto& t = v.actual();
    if (constant(t)) throw DegenerateTarget();
    const double t_bar = mean_of(t);

    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
        const double e = p[j] - t[j];
        const double d = t[j] - t_bar;
        num += e * e;
        den += d * d;
    }
    if (den <= 0.0) throw DegenerateTarget();
    return std::sqrt(num / den);
}

double ppmcc(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw Error("ppmcc input lengths differ");
    }
    if (x.size() < 2) {
        throw Error("ppmcc needs at least 2 samples");
    }
    require_finite(x, "x");
    require_finite(y, "y");
    if (constant(x)) throw ZeroVariance("x");
    if (constant(y)) throw ZeroVariance("y");

    const double mx = mean_of(x);
    const double my = mean_of(y);

    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double dx = x[j] - mx;
        const double dy = y[j] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw ZeroVariance("x");
    if (syy <= 0.0) throw ZeroVariance("y");

    // Single square root keeps exactly collinear integer data at exactly +/-1.
    return sxy / std::sqrt(sxx * syy);
}

MetricTriple evaluate(const PredictionVector& v) {
    MetricTriple out;
    out.rae = rae(v);
    out.rrse = rrse(v);
    try {
        out.ppmcc = ppmcc(v.predicted(), v.actual());
    } catch (const ZeroVariance&) {
        out.ppmcc = std::nullopt;
    }
    return out;
}

}  // namespace liverpanel
