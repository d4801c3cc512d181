#include "erbr/fallacy.hpp"

#include "erbr/error.hpp"
#include "erbr/notation.hpp"
#include "erbr/reporting.hpp"

#include <algorithm>
#include <cmath>

namespace erbr {
namespace {

double logit(double p) { return std::log(p) - std::log1p(-p); }

Verdict compare(double lhs, double rhs) {
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    if (std::abs(lhs - rhs) <= kTieTolerance * scale) return Verdict::kBoundary;
    return lhs > rhs ? Verdict::kHolds : Verdict::kFails;
}

double binary_report(double pi, double lambda) {
    const double base[] = {pi, 1.0 - pi};
    return reported_beliefs(base, Lambda(lambda))[0];
}

}  // namespace

std::vector<double> itemwise_report(const Prior& prior, const Partition& partition, std::span<const double> lambdas) {
    if (lambdas.size() != partition.size()) {
        throw StructuralError("itemwise_report: need one parameter per bin");
    }
    const std::vector<double> mass = induced_prior(prior, partition);
    std::vector<double> out(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (partition.size() == 1) {
            out[i] = 1.0;  // the bin is the whole space; its complement is empty
            continue;
        }
        out[i] = binary_report(mass[i], lambdas[i]);
    }
    return out;
}

std::vector<double> itemwise_report(const Prior& prior, const Partition& partition, Lambda lambda) {
    const std::vector<double> lambdas(partition.size(), lambda.value());
    return itemwise_report(prior, partition, lambdas);
}

EventPair::EventPair(double b, double c, double lb, double lc) : pi_B(b), pi_C(c), lambda_B(lb), lambda_C(lc) {
    if (!(0.0 < pi_B && pi_B < pi_C && pi_C < 1.0)) {
        throw DomainError("EventPair: need 0 < pi_B < pi_C < 1, got " + format_real(pi_B) + " and " + format_real(pi_C));
    }
    if (!std::isfinite(lambda_B) || !std::isfinite(lambda_C)) throw DomainError("EventPair: parameters must be finite");
}

EventPair EventPair::from_events(const Prior& prior, const Event& B, const Event& C, double lambda_B, double lambda_C) {
    const std::size_t n = prior.size();
    if (B.empty() || !is_subset(B, C) || B == C) throw StructuralError("EventPair: B must be a non-empty proper subset of C");
    if (!C.is_proper(n)) throw StructuralError("EventPair: C must be a proper event");
    return EventPair(prior.probability(B), prior.probability(C), lambda_B, lambda_C);
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::kHolds: return "true";
        case Verdict::kFails: return "false";
        case Verdict::kBoundary: return "boundary";
    }
    return "boundary";
}

Verdict conjunction_condition(const EventPair& pair) {
    return compare(pair.lambda_B * logit(pair.pi_B), pair.lambda_C * logit(pair.pi_C));
}

Verdict direct_comparison(const EventPair& pair) {
    return compare(binary_report(pair.pi_B, pair.lambda_B), binary_report(pair.pi_C, pair.lambda_C));
}

LambdaRegion conjunction_lambda_region(double pi_B, double pi_C, double lambda_C) {
    if (!(0.0 < pi_B && pi_B < pi_C && pi_C < 1.0)) throw DomainError("conjunction_lambda_region: need 0 < pi_B < pi_C < 1");
    if (!std::isfinite(lambda_C)) throw DomainError("conjunction_lambda_region: lambda_C must be finite");
    LambdaRegion r;
    r.straddles_half = pi_B < 0.5 && 0.5 < pi_C;
    const double lb = logit(pi_B);
    const double rhs = lambda_C * logit(pi_C);
    if (pi_B == 0.5) {
        // 0 > rhs decides it for every lambda_B
        r.boundary = true;
        r.direction = rhs < 0.0 ? LambdaRegion::Direction::kAll : LambdaRegion::Direction::kNone;
        return r;
    }
    r.threshold = rhs / lb;
    if (lb < 0.0) {
        r.direction = LambdaRegion::Direction::kBelow;
        r.requires_negative = r.threshold <= 0.0;
    } else {
        r.direction = LambdaRegion::Direction::kAbove;
    }
    return r;
}

std::string LambdaRegion::describe() const {
    switch (direction) {
        case Direction::kBelow:
            return "lambda_B < " + format_real(threshold) + (requires_negative ? " (negative lambda_B required)" : "");
        case Direction::kAbove:
            return "lambda_B > " + format_real(threshold);
        case Direction::kAll:
            return "every lambda_B (boundary: pi_B = 1/2)";
        case Direction::kNone:
            return boundary ? "no lambda_B (boundary: pi_B = 1/2)" : "no lambda_B";
    }
    return "";
}

}  // namespace erbr
