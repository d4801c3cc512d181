#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace erbr {

/// Finite, ordered set of distinct state labels. States are addressed by
/// index everywhere else in the library; labels are only for I/O.
class StateSpace {
public:
    explicit StateSpace(std::vector<std::string> labels);

    /// States labelled first, first+1, ..., last.
    static StateSpace integers(long first, long last);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::optional<std::size_t> index_of(const std::string& label) const;

    bool operator==(const StateSpace& other) const { return labels_ == other.labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const StateSpace>;

SpacePtr make_space(std::vector<std::string> labels);
SpacePtr make_integer_space(long first, long last);

/// True when both pointers denote the same labelled space.
bool same_space(const SpacePtr& a, const SpacePtr& b);

/// A set of states, stored as sorted distinct indices. The sorted form is the
/// canonical identity used for map keys and equality.
class Event {
public:
    Event() = default;
    explicit Event(std::vector<std::size_t> states);
    Event(std::initializer_list<std::size_t> states);

    static Event singleton(std::size_t state) { return Event({state}); }
    static Event all(std::size_t n);

    std::size_t size() const noexcept { return states_.size(); }
    bool empty() const noexcept { return states_.empty(); }
    bool contains(std::size_t state) const;
    const std::vector<std::size_t>& states() const noexcept { return states_; }
    auto begin() const noexcept { return states_.begin(); }
    auto end() const noexcept { return states_.end(); }

    /// Non-empty and strictly smaller than a space of n states.
    bool is_proper(std::size_t n) const { return !empty() && size() < n; }

    auto operator<=>(const Event&) const = default;
    bool operator==(const Event&) const = default;

private:
    std::vector<std::size_t> states_;
};

Event complement(const Event& e, std::size_t n);
Event set_union(const Event& a, const Event& b);
Event set_difference(const Event& a, const Event& b);
bool disjoint(const Event& a, const Event& b);
bool is_subset(const Event& a, const Event& b);

/// Comma separated labels, e.g. "0,1,2".
std::string describe(const Event& e, const StateSpace& space);

/// Disjoint, exhaustive grouping of a state space into non-empty bins.
class Partition {
public:
    Partition(SpacePtr space, std::vector<Event> bins);

    const SpacePtr& space() const noexcept { return space_; }
    std::size_t size() const noexcept { return bins_.size(); }
    const Event& bin(std::size_t i) const { return bins_.at(i); }
    const std::vector<Event>& bins() const noexcept { return bins_; }
    std::optional<std::size_t> find_bin(const Event& e) const;

    /// Bins sorted; two partitions are equal iff their canonical forms match.
    std::vector<Event> canonical() const;
    bool operator==(const Partition& other) const;

    /// Bins joined by '|', states by ','.
    std::string describe() const;

private:
    SpacePtr space_;
    std::vector<Event> bins_;
};

/// The binary partition {E, E^c}.
Partition binary_partition(const SpacePtr& space, const Event& e);

/// Full-support probability distribution over a state space.
class Prior {
public:
    /// Accepts probabilities summing to 1 within 1e-9 and renormalizes;
    /// anything looser, or any entry <= 0, is a DomainError.
    Prior(SpacePtr space, std::vector<double> probs);

    static Prior uniform(SpacePtr space);

    const SpacePtr& space() const noexcept { return space_; }
    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_.at(i); }
    const std::vector<double>& probs() const noexcept { return probs_; }
    double probability(const Event& e) const;

    /// Set when the input was rescaled to sum to one.
    bool renormalized() const noexcept { return renormalized_; }

private:
    SpacePtr space_;
    std::vector<double> probs_;
    bool renormalized_ = false;
};

/// A reported distribution over the bins of one partition. Only the length is
/// enforced on construction: observed data may violate Regularity and is
/// checked separately.
struct BeliefReport {
    BeliefReport(Partition p, std::vector<double> values);

    Partition partition;
    std::vector<double> probs;
};

/// Entropy regularization parameter. Any finite real is admissible.
class Lambda {
public:
    explicit Lambda(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

inline constexpr double kPriorSumTolerance = 1e-9;
inline constexpr double kReportSumTolerance = 1e-9;

}  // namespace erbr
