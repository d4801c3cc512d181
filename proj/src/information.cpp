#include "erbr/information.hpp"

#include "erbr/error.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace erbr {
namespace {

void check_probability_entries(std::span<const double> p, const char* what) {
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0) {
            throw DomainError(std::string(what) + ": entries must be non-negative, got " + std::to_string(v));
        }
    }
}

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

double entropy(std::span<const double> p) {
    check_probability_entries(p, "entropy");
    double h = 0.0;
    for (double v : p) h -= plogp(v);
    return h;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw StructuralError("kl_divergence: length mismatch");
    check_probability_entries(p, "kl_divergence");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(q[i] > 0.0)) throw DomainError("kl_divergence: reference distribution must be strictly positive");
        if (p[i] > 0.0) d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

double erbr_objective(std::span<const double> candidate, std::span<const double> base, Lambda lambda) {
    const double l = lambda.value();
    return l * kl_divergence(candidate, base) - (1.0 - l) * entropy(candidate);
}

double objective_uniform_form(std::span<const double> candidate, std::span<const double> base, Lambda lambda) {
    const double l = lambda.value();
    const std::vector<double> uniform(candidate.size(), 1.0 / static_cast<double>(candidate.size()));
    return l * kl_divergence(candidate, base) + (1.0 - l) * kl_divergence(candidate, uniform);
}

}  // namespace erbr
