#include "erbr/recovery.hpp"

#include "erbr/error.hpp"
#include "erbr/reporting.hpp"
#include "erbr/scalar_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace erbr {
namespace {

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace

BinaryReportSet::BinaryReportSet(SpacePtr s, std::vector<double> values) : space(std::move(s)), mu(std::move(values)) {
    if (!space) throw StructuralError("binary reports without a state space");
    if (mu.size() != space->size()) throw StructuralError("binary reports: need one value per state");
    for (double v : mu) {
        if (!(v > 0.0 && v < 1.0)) throw DomainError("binary reports must lie strictly inside (0, 1)");
    }
}

BinaryReportSet simulate_binary_reports(const Prior& prior, Lambda lambda) {
    std::vector<double> mu;
    mu.reserve(prior.size());
    for (std::size_t w = 0; w < prior.size(); ++w) {
        const double p = prior[w];
        const std::vector<double> base{p, 1.0 - p};
        mu.push_back(reported_beliefs(base, lambda)[0]);
    }
    return BinaryReportSet(prior.space(), std::move(mu));
}

std::vector<double> implied_prior(const BinaryReportSet& reports, double lambda) {
    if (lambda == 0.0 || !std::isfinite(lambda)) throw DomainError("implied_prior: lambda must be finite and non-zero");
    std::vector<double> out;
    out.reserve(reports.mu.size());
    for (double m : reports.mu) out.push_back(logistic(logit(m) / lambda));
    return out;
}

double recovery_equation(const BinaryReportSet& reports, double lambda) {
    if (lambda == 0.0) throw DomainError("recovery_equation: lambda must be non-zero");
    double sum = -1.0;
    for (double p : implied_prior(reports, lambda)) sum += p;
    return sum;
}

BinaryRecovery recover_from_binary(const BinaryReportSet& reports, const RecoveryConfig& config) {
    if (reports.mu.size() < 3) throw StructuralError("recover_from_binary: need at least 3 states");
    if (std::all_of(reports.mu.begin(), reports.mu.end(), [](double m) { return m == 0.5; })) {
        return DegenerateReports{};
    }

    const std::vector<double> grid = search::log_spaced(config.lambda_min, config.lambda_max, config.grid_points);
    auto f = [&reports](double l) { return recovery_equation(reports, l); };

    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = f(grid[i]);

    // Values within rounding of zero carry no sign. This matters near
    // lambda -> 0+ when exactly one report exceeds 1/2, where F itself -> 0.
    const double noise = 64.0 * static_cast<double>(reports.mu.size()) * std::numeric_limits<double>::epsilon();
    std::vector<double> roots;
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(values[i]) <= noise) continue;
        if (prev && (values[*prev] < 0.0) != (values[i] < 0.0)) {
            const double r = search::bisect(f, grid[*prev], grid[i]);
            const auto implied = implied_prior(reports, r);
            if (std::all_of(implied.begin(), implied.end(), [](double p) { return p > 0.0; })) roots.push_back(r);
        }
        prev = i;
    }
    if (roots.empty()) return NoSolution{values.front(), values.back()};

    // closest to 1 on the log scale, so 0.5 and 2 are equally far
    const double lambda = *std::min_element(roots.begin(), roots.end(), [](double a, double b) {
        return std::abs(std::log(a)) < std::abs(std::log(b));
    });
    std::vector<double> probs = implied_prior(reports, lambda);
    double sum = 0.0;
    for (double p : probs) sum += p;
    for (double& p : probs) p /= sum;
    return RecoveryResult{lambda, Prior(reports.space, std::move(probs)), std::abs(sum - 1.0), std::move(roots)};
}

}  // namespace erbr
