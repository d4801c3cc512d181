#include "erbr/reporting.hpp"

#include "erbr/error.hpp"
#include "erbr/information.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace erbr {
namespace {

void require_positive(std::span<const double> base, const char* what) {
    if (base.empty()) throw StructuralError(std::string(what) + ": empty distribution");
    for (double b : base) {
        if (!std::isfinite(b) || b <= 0.0) {
            throw DomainError(std::string(what) + ": base distribution must be strictly positive");
        }
    }
}

// Beyond this |lambda| the powers are formed in log space relative to the max.
constexpr double kLogSpaceLambda = 8.0;

}  // namespace

std::vector<double> induced_prior(const Prior& prior, const Partition& partition) {
    if (!same_space(prior.space(), partition.space())) {
        throw StructuralError("induced_prior: prior and partition are over different state spaces");
    }
    std::vector<double> out;
    out.reserve(partition.size());
    for (const Event& bin : partition.bins()) out.push_back(prior.probability(bin));
    return out;
}

std::vector<double> reported_beliefs(std::span<const double> base, Lambda lambda) {
    require_positive(base, "reported_beliefs");
    const double l = lambda.value();
    const std::size_t k = base.size();
    if (l == 0.0) return std::vector<double>(k, 1.0 / static_cast<double>(k));

    std::vector<double> w(base.begin(), base.end());
    if (l == 1.0) {
        const double sum = std::accumulate(w.begin(), w.end(), 0.0);
        if (std::abs(sum - 1.0) > 1e-12) {
            for (double& v : w) v /= sum;
        }
        return w;
    }

    if (std::abs(l) > kLogSpaceLambda) {
        for (double& v : w) v = l * std::log(v);
        const double top = *std::max_element(w.begin(), w.end());
        for (double& v : w) v = std::exp(v - top);
    } else {
        for (double& v : w) v = std::exp(l * std::log(v));
    }
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= sum;
    return w;
}

BeliefReport erbr_report(const Prior& prior, const Partition& partition, Lambda lambda) {
    const std::vector<double> base = induced_prior(prior, partition);
    return BeliefReport(partition, reported_beliefs(base, lambda));
}

VariationalResult variational_solve(std::span<const double> base, Lambda lambda, double tol, int max_iterations) {
    require_positive(base, "variational_solve");
    if (!(tol > 0.0)) throw DomainError("variational_solve: tol must be positive");

    const std::size_t k = base.size();
    const double l = lambda.value();
    std::vector<double> p(k, 1.0 / static_cast<double>(k));
    std::vector<double> grad(k), step(k), trial(k);
    std::vector<double> log_base(k);
    for (std::size_t i = 0; i < k; ++i) log_base[i] = std::log(base[i]);

    // The objective is sum p ln p - lambda sum p ln q plus a constant, so the
    // Hessian on the simplex is diag(1/p). Newton directions are projected
    // onto sum(step) = 0.
    double decrement = std::numeric_limits<double>::infinity();
    bool close = false;
    for (int it = 0; it < max_iterations; ++it) {
        for (std::size_t i = 0; i < k; ++i) grad[i] = std::log(p[i]) + 1.0 - l * log_base[i];
        double nu = 0.0;
        for (std::size_t i = 0; i < k; ++i) nu += p[i] * grad[i];
        double dec2 = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            step[i] = -p[i] * (grad[i] - nu);
            dec2 += p[i] * (grad[i] - nu) * (grad[i] - nu);
        }
        decrement = std::sqrt(dec2);
        if (close || decrement == 0.0) {
            return {p, erbr_objective(p, base, lambda), decrement, it};
        }
        // One extra full step once inside tolerance: convergence is quadratic.
        close = decrement <= 1e-2 * tol;

        double t_max = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            if (step[i] < 0.0) t_max = std::min(t_max, -0.95 * p[i] / step[i]);
        }

        double t = t_max;
        if (decrement > 1e-3 || t_max < 1.0) {
            const double f0 = erbr_objective(p, base, lambda);
            for (;;) {
                for (std::size_t i = 0; i < k; ++i) trial[i] = p[i] + t * step[i];
                if (erbr_objective(trial, base, lambda) <= f0 - 0.25 * t * dec2) break;
                t *= 0.5;
                if (t < 1e-18) {
                    throw ConvergenceError("variational_solve: line search stalled", decrement);
                }
            }
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            p[i] = std::max(p[i] + t * step[i], std::numeric_limits<double>::min());
            sum += p[i];
        }
        for (double& v : p) v /= sum;
    }
    throw ConvergenceError("variational_solve: no convergence within " + std::to_string(max_iterations) +
                               " iterations",
                           decrement);
}

}  // namespace erbr
