#pragma once

#include "erbr/model.hpp"

#include <span>

namespace erbr {

// All quantities in nats, with 0 ln 0 = 0.

/// Shannon entropy. Throws DomainError on a negative entry.
double entropy(std::span<const double> p);

/// KL(p || q). q must be strictly positive and the same length as p.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// lambda * KL(candidate || base) - (1 - lambda) * H(candidate).
double erbr_objective(std::span<const double> candidate, std::span<const double> base, Lambda lambda);

/// lambda * KL(candidate || base) + (1 - lambda) * KL(candidate || uniform).
/// Equals erbr_objective + (1 - lambda) ln k for k bins, so the argmin is the
/// same.
double objective_uniform_form(std::span<const double> candidate, std::span<const double> base, Lambda lambda);

}  // namespace erbr
