#pragma once

#include "erbr/model.hpp"

#include <span>
#include <vector>

namespace erbr {

/// Bin masses of the prior: entry i is the prior probability of bin i.
/// Throws StructuralError if the prior and partition live on different spaces.
std::vector<double> induced_prior(const Prior& prior, const Partition& partition);

/// Closed-form ERBR report for an induced distribution:
///   mu_i = base_i^lambda / sum_j base_j^lambda.
/// lambda = 1 returns base unchanged and lambda = 0 returns the exact uniform
/// vector. base must be strictly positive.
std::vector<double> reported_beliefs(std::span<const double> base, Lambda lambda);

/// The belief an ERBR agent with this prior and parameter reports on a
/// partition.
BeliefReport erbr_report(const Prior& prior, const Partition& partition, Lambda lambda);

struct VariationalResult {
    std::vector<double> probs;
    double objective = 0.0;
    double newton_decrement = 0.0;
    int iterations = 0;
};

/// Numerically minimizes erbr_objective over the probability simplex with a
/// damped Newton method, without using the closed form. Intended as an
/// oracle. Throws ConvergenceError when the iteration budget runs out.
VariationalResult variational_solve(std::span<const double> base, Lambda lambda, double tol = 1e-10,
                                    int max_iterations = 2000);

}  // namespace erbr
