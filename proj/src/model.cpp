#include "erbr/model.hpp"

#include "erbr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace erbr {

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) {
        throw StructuralError("state space needs at least 2 states, got " + std::to_string(labels_.size()));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (!index_.emplace(labels_[i], i).second) {
            throw StructuralError("duplicate state label '" + labels_[i] + "'");
        }
    }
}

StateSpace StateSpace::integers(long first, long last) {
    std::vector<std::string> labels;
    for (long k = first; k <= last; ++k) labels.push_back(std::to_string(k));
    return StateSpace(std::move(labels));
}

std::optional<std::size_t> StateSpace::index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

SpacePtr make_space(std::vector<std::string> labels) {
    return std::make_shared<const StateSpace>(std::move(labels));
}

SpacePtr make_integer_space(long first, long last) {
    return std::make_shared<const StateSpace>(StateSpace::integers(first, last));
}

bool same_space(const SpacePtr& a, const SpacePtr& b) {
    if (!a || !b) return false;
    return a == b || *a == *b;
}

Event::Event(std::vector<std::size_t> states) : states_(std::move(states)) {
    std::sort(states_.begin(), states_.end());
    states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
}

Event::Event(std::initializer_list<std::size_t> states) : Event(std::vector<std::size_t>(states)) {}

Event Event::all(std::size_t n) {
    std::vector<std::size_t> s(n);
    std::iota(s.begin(), s.end(), std::size_t{0});
    return Event(std::move(s));
}

bool Event::contains(std::size_t state) const {
    return std::binary_search(states_.begin(), states_.end(), state);
}

Event complement(const Event& e, std::size_t n) {
    std::vector<std::size_t> out;
    out.reserve(n - std::min(n, e.size()));
    for (std::size_t i = 0; i < n; ++i) {
        if (!e.contains(i)) out.push_back(i);
    }
    return Event(std::move(out));
}

Event set_union(const Event& a, const Event& b) {
    std::vector<std::size_t> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return Event(std::move(out));
}

Event set_difference(const Event& a, const Event& b) {
    std::vector<std::size_t> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return Event(std::move(out));
}

bool disjoint(const Event& a, const Event& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i == *j) return false;
        if (*i < *j) ++i; else ++j;
    }
    return true;
}

bool is_subset(const Event& a, const Event& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::string describe(const Event& e, const StateSpace& space) {
    std::string out;
    for (std::size_t s : e) {
        if (!out.empty()) out += ',';
        out += space.label(s);
    }
    return out;
}

Partition::Partition(SpacePtr space, std::vector<Event> bins) : space_(std::move(space)), bins_(std::move(bins)) {
    if (!space_) throw StructuralError("partition without a state space");
    const std::size_t n = space_->size();
    std::vector<int> seen(n, 0);
    for (const Event& b : bins_) {
        if (b.empty()) throw StructuralError("partition has an empty bin");
        for (std::size_t s : b) {
            if (s >= n) throw StructuralError("partition bin references state index " + std::to_string(s) + " outside the space");
            if (seen[s]++) throw StructuralError("bins overlap at state '" + space_->label(s) + "'");
        }
    }
    for (std::size_t s = 0; s < n; ++s) {
        if (!seen[s]) throw StructuralError("bins do not cover state '" + space_->label(s) + "'");
    }
}

std::optional<std::size_t> Partition::find_bin(const Event& e) const {
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        if (bins_[i] == e) return i;
    }
    return std::nullopt;
}

std::vector<Event> Partition::canonical() const {
    std::vector<Event> c = bins_;
    std::sort(c.begin(), c.end());
    return c;
}

bool Partition::operator==(const Partition& other) const {
    return same_space(space_, other.space_) && canonical() == other.canonical();
}

std::string Partition::describe() const {
    std::string out;
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        if (i) out += '|';
        out += erbr::describe(bins_[i], *space_);
    }
    return out;
}

Partition binary_partition(const SpacePtr& space, const Event& e) {
    return Partition(space, {e, complement(e, space->size())});
}

Prior::Prior(SpacePtr space, std::vector<double> probs) : space_(std::move(space)), probs_(std::move(probs)) {
    if (!space_) throw StructuralError("prior without a state space");
    if (probs_.size() != space_->size()) {
        throw StructuralError("prior has " + std::to_string(probs_.size()) + " entries for " +
                              std::to_string(space_->size()) + " states");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        const double p = probs_[i];
        if (!std::isfinite(p) || p <= 0.0) {
            throw DomainError("prior must have full support; state '" + space_->label(i) + "' has probability " +
                              std::to_string(p));
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kPriorSumTolerance) {
        throw DomainError("prior sums to " + std::to_string(sum) + ", not 1");
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        for (double& p : probs_) p /= sum;
        renormalized_ = true;
    }
}

Prior Prior::uniform(SpacePtr space) {
    const std::size_t n = space->size();
    return Prior(std::move(space), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double Prior::probability(const Event& e) const {
    double p = 0.0;
    for (std::size_t s : e) p += probs_.at(s);
    return p;
}

BeliefReport::BeliefReport(Partition p, std::vector<double> values) : partition(std::move(p)), probs(std::move(values)) {
    if (probs.size() != partition.size()) {
        throw StructuralError("report has " + std::to_string(probs.size()) + " entries for a partition of " +
                              std::to_string(partition.size()) + " bins");
    }
}

Lambda::Lambda(double value) : value_(value) {
    if (!std::isfinite(value)) throw DomainError("lambda must be finite");
}

}  // namespace erbr
