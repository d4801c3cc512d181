#pragma once

// Consistency tests for observed partition-dependent beliefs and constructive
// recovery of the support function, the power parameter and the latent prior.

#include "erbr/model.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace erbr {

/// Reports on distinct partitions of one state space.
class BeliefCollection {
public:
    explicit BeliefCollection(SpacePtr space);
    BeliefCollection(SpacePtr space, std::vector<BeliefReport> records);

    /// Throws StructuralError on a foreign space or a repeated partition.
    void add(BeliefReport report);

    const SpacePtr& space() const noexcept { return space_; }
    const std::vector<BeliefReport>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

private:
    SpacePtr space_;
    std::vector<BeliefReport> records_;
    std::map<std::vector<Event>, std::size_t> seen_;
};

/// Reports generated by the support-theory rule mu(E) = s(E) / sum s(E_j).
BeliefReport gst_report(const Partition& partition, const std::function<double(const Event&)>& support);

/// ERBR reports for every partition in `partitions`.
BeliefCollection simulate_collection(const Prior& prior, const std::vector<Partition>& partitions, Lambda lambda);

/// The partitions the support construction reads for an anchor state:
/// {A, A^c \ {anchor}, {anchor}} for every proper A without the anchor, and
/// {A, A^c \ {w}, {w}} with w the first state outside A for every proper A
/// containing it. Empty bins are dropped, so some members are binary.
std::vector<Partition> construction_partitions(const SpacePtr& space, std::size_t anchor);

// ---------------------------------------------------------------------------
// Regularity

struct RegularityViolation {
    enum class Kind { kNonPositive, kSumMismatch };
    std::size_t record = 0;
    std::optional<std::size_t> bin;  // set for kNonPositive
    Kind kind = Kind::kNonPositive;
    double value = 0.0;              // offending probability, or the sum
};

struct RegularityResult {
    bool passed = true;
    std::vector<RegularityViolation> violations;
};

RegularityResult check_regularity(const BeliefCollection& collection, double tol);

// ---------------------------------------------------------------------------
// Cyclical independence

/// records[i] is the partition P_(i+1); events[i] is E_(i+1). Consecutive
/// partitions share events[i+1] and the last one shares events[0] with the
/// first.
struct BeliefCycle {
    std::vector<std::size_t> records;
    std::vector<Event> events;
    double log_product = 0.0;
};

struct CycleCheckOptions {
    int max_cycle_len = 4;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    std::size_t exhaustive_partition_limit = 12;
    std::size_t random_cycles = 10000;
    std::size_t exhaustive_cycle_budget = 2'000'000;
};

struct CycleCheckResult {
    bool passed = true;
    bool exhaustive = true;
    std::size_t cycles_checked = 0;
    std::optional<BeliefCycle> worst;  // largest |log product| seen
};

/// Cycles through at most max_cycle_len partitions are enumerated
/// exhaustively when the collection has few partitions and sampled at random
/// (seeded) otherwise. Every log product must vanish within tol.
CycleCheckResult check_cyclical_independence(const BeliefCollection& collection, const CycleCheckOptions& options);
CycleCheckResult check_cyclical_independence(const BeliefCollection& collection, int max_cycle_len, double tol,
                                             std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Support recovery

struct SupportFunction {
    SpacePtr space;
    std::size_t anchor = 0;
    std::map<Event, double> values;  // proper events only; values[{anchor}] == 1
    double max_chain_spread = 0.0;   // worst log disagreement between chains

    bool has(const Event& e) const { return values.count(e) != 0; }
    double at(const Event& e) const;
};

/// Recovers s(.) normalized by s({anchor}) = 1. The targets default to every
/// singleton plus every proper event that appears as a bin in the collection.
/// Each target is reached through any partition holding it next to a
/// singleton {w}: s(A) = mu(A) / mu({w}) * s({w}); all such chains must agree
/// within tol in log space (ConsistencyError otherwise). A target with no
/// chain raises MissingDataError naming the partition that would supply it.
SupportFunction recover_support(const BeliefCollection& collection, std::size_t anchor, double tol,
                                const std::vector<Event>* targets = nullptr);

// ---------------------------------------------------------------------------
// Power additivity and ERBR identification

/// Solves c^alpha = a^alpha + b^alpha. Returns nullopt when
/// min(a,b) <= c <= max(a,b), where no solution exists. Otherwise the unique
/// root is positive (c > max) or negative (c < min). Throws DomainError on a
/// non-positive input and ConvergenceError if the residual of the equation
/// in the form (a/c)^alpha + (b/c)^alpha = 1 exceeds tol.
std::optional<double> find_alpha(double a, double b, double c, double tol = 1e-10);

struct ErbrIdentification {
    double alpha = 1.0;
    double lambda = 1.0;
    Prior prior;
    double residual = 0.0;  // max |p(A u B) - p(A) - p(B)|, p = s^alpha / sum_w s({w})^alpha
    std::size_t pairs_checked = 0;
};

struct UniformDegenerate {
    double lambda = 0.0;
};

struct NotErbr {
    std::string reason;
    double residual = 0.0;
    std::optional<std::pair<Event, Event>> worst_pair;
};

using IdentificationResult = std::variant<ErbrIdentification, UniformDegenerate, NotErbr>;

struct IdentifyOptions {
    double tol = 1e-8;
    std::uint64_t seed = 0;
    std::size_t random_pairs = 100;
    std::size_t exhaustive_state_limit = 8;
    /// Caller-chosen (A, B) pairs; replaces the default verification set.
    std::optional<std::vector<std::pair<Event, Event>>> verification;
};

IdentificationResult identify_erbr(const SupportFunction& support, const IdentifyOptions& options);
IdentificationResult identify_erbr(const SupportFunction& support, double tol);

// ---------------------------------------------------------------------------
// Pipeline

struct RegularityFailure {
    RegularityResult detail;
};
struct CyclicalFailure {
    CycleCheckResult detail;
};
struct SupportInconsistency {
    std::string message;
    double discrepancy = 0.0;
};

using PipelineOutcome =
    std::variant<ErbrIdentification, UniformDegenerate, NotErbr, RegularityFailure, CyclicalFailure, SupportInconsistency>;

struct PipelineOptions {
    std::size_t anchor = 0;
    int max_cycle_len = 4;
    std::uint64_t seed = 0;
};

/// Regularity, then cyclical independence, then support recovery, then
/// identification; the first failing stage decides the outcome.
/// MissingDataError propagates.
PipelineOutcome full_pipeline(const BeliefCollection& collection, double tol, const PipelineOptions& options = {});

}  // namespace erbr
