#pragma once

// Latent-prior recovery from the binary partitions {{w}, {w}^c} under a
// common parameter.

#include "erbr/model.hpp"

#include <variant>
#include <vector>

namespace erbr {

/// mu[w] is the reported probability of {w} on the partition {{w}, {w}^c}.
struct BinaryReportSet {
    BinaryReportSet(SpacePtr space, std::vector<double> mu);

    SpacePtr space;
    std::vector<double> mu;
};

/// Binary reports an ERBR agent with this prior and parameter would give.
BinaryReportSet simulate_binary_reports(const Prior& prior, Lambda lambda);

/// F(lambda) = sum_w logistic(logit(mu_w) / lambda) - 1. The implied prior is
/// consistent exactly at the roots of F.
double recovery_equation(const BinaryReportSet& reports, double lambda);

/// Implied prior probability of each state at a given lambda (not normalized).
std::vector<double> implied_prior(const BinaryReportSet& reports, double lambda);

struct RecoveryConfig {
    double lambda_min = 1e-3;
    double lambda_max = 1e3;
    int grid_points = 2001;
};

struct RecoveryResult {
    double lambda = 1.0;
    Prior prior;
    double sum_residual = 0.0;        // |sum of implied prior - 1| before renormalizing
    std::vector<double> roots_found;  // every root located in the scan, ascending
    bool multiple_roots() const { return roots_found.size() > 1; }
};

struct NoSolution {
    double f_at_min = 0.0;
    double f_at_max = 0.0;
};

/// Every reported value is 1/2, which carries no information about lambda.
struct DegenerateReports {};

using BinaryRecovery = std::variant<RecoveryResult, NoSolution, DegenerateReports>;

/// Scans a log-spaced grid over [lambda_min, lambda_max] for sign changes of
/// F (ignoring values within rounding of zero), bisects each one, and takes
/// the root closest to 1 in |ln lambda| as the estimate.
/// Requires at least 3 states (StructuralError otherwise).
BinaryRecovery recover_from_binary(const BinaryReportSet& reports, const RecoveryConfig& config = {});

}  // namespace erbr
