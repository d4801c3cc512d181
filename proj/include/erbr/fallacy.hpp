#pragma once

// Conjunction and disjunction fallacies under partition-dependent parameters,
// and itemwise reporting where each bin is judged against its complement.

#include "erbr/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace erbr {

/// Entry i is the report for bin i on its own binary partition {E_i, E_i^c}.
/// The entries need not sum to one.
std::vector<double> itemwise_report(const Prior& prior, const Partition& partition, Lambda lambda);

/// One parameter per bin's binary partition.
std::vector<double> itemwise_report(const Prior& prior, const Partition& partition, std::span<const double> lambdas);

/// Nested events B (subset) and C (superset), each reported on its own
/// binary partition with its own parameter. Requires 0 < pi_B < pi_C < 1.
struct EventPair {
    EventPair(double pi_B, double pi_C, double lambda_B, double lambda_C);

    /// From events: B must be a proper subset of C and C a proper event.
    static EventPair from_events(const Prior& prior, const Event& B, const Event& C, double lambda_B, double lambda_C);

    double pi_B;
    double pi_C;
    double lambda_B;
    double lambda_C;
};

enum class Verdict { kHolds, kFails, kBoundary };

std::string to_string(Verdict v);

/// Relative gap below which two log-odds values count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// Whether the subset is reported as more likely than the superset, decided
/// on lambda_B logit(pi_B) versus lambda_C logit(pi_C). The same inequality
/// describes the disjunction fallacy read from C's side.
Verdict conjunction_condition(const EventPair& pair);

/// The reported beliefs compared directly, with the same tie rule.
Verdict direct_comparison(const EventPair& pair);

struct LambdaRegion {
    enum class Direction { kBelow, kAbove, kAll, kNone };
    Direction direction = Direction::kNone;
    double threshold = 0.0;         // fallacy iff lambda_B is below / above this
    bool boundary = false;          // pi_B = 1/2: the left side is identically 0
    bool requires_negative = false; // every fallacious lambda_B is negative
    bool straddles_half = false;    // pi_B < 1/2 < pi_C
    std::string describe() const;
};

/// Solves the inequality for lambda_B at fixed lambda_C.
LambdaRegion conjunction_lambda_region(double pi_B, double pi_C, double lambda_C);

}  // namespace erbr
