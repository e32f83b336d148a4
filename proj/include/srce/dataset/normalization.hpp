#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "srce/error.hpp"

namespace srce::data {

/// Pooled z-score statistics of the training inputs (real and imaginary
/// planes together).
struct NormalizationStats {
    double mean = 0.0;
    double std = 1.0;

    double apply(double x) const { return (x - mean) / std; }
    double invert(double z) const { return z * std + mean; }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const { return (x.array() - mean) / std; }
    Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const { return z.array() * std + mean; }

    void validate() const {
        if (!(std > 0.0) || !std::isfinite(std) || !std::isfinite(mean))
            throw ConfigError("normalization: std must be positive and finite");
    }

    bool operator==(const NormalizationStats&) const = default;
};

}  // namespace srce::data
