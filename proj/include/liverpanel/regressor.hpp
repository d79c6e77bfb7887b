#ifndef LIVERPANEL_REGRESSOR_HPP
#define LIVERPANEL_REGRESSOR_HPP

#include <string>

#include "liverpanel/dataset.hpp"

namespace liverpanel {

// Shared contract for every learner and ensemble. fit is deterministic given
// (dataset, seed); predict is pure after fit and returns a finite value for
// any finite feature vector.
class Regressor {
public:
    virtual ~Regressor() = default;

    virtual void fit(const Dataset& d) = 0;
    virtual double predict(const FeatureVector& x) const = 0;
    virtual const std::string& name() const = 0;

    // Short description of what fit produced ("feature=BD"); empty when a
    // learner has nothing stable to report.
    virtual std::string fitted_notes() const { return {}; }
};

}  // namespace liverpanel

#endif
