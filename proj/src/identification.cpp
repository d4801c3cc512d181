#include "erbr/identification.hpp"

#include "erbr/error.hpp"
#include "erbr/reporting.hpp"
#include "erbr/scalar_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace erbr {

BeliefCollection::BeliefCollection(SpacePtr space) : space_(std::move(space)) {
    if (!space_) throw StructuralError("collection without a state space");
}

BeliefCollection::BeliefCollection(SpacePtr space, std::vector<BeliefReport> records) : BeliefCollection(std::move(space)) {
    for (auto& r : records) add(std::move(r));
}

void BeliefCollection::add(BeliefReport report) {
    if (!same_space(space_, report.partition.space())) {
        throw StructuralError("collection: report is over a different state space");
    }
    auto key = report.partition.canonical();
    if (!seen_.emplace(std::move(key), records_.size()).second) {
        throw StructuralError("collection: partition " + report.partition.describe() + " appears twice");
    }
    records_.push_back(std::move(report));
}

BeliefReport gst_report(const Partition& partition, const std::function<double(const Event&)>& support) {
    std::vector<double> s;
    s.reserve(partition.size());
    double total = 0.0;
    for (const Event& bin : partition.bins()) {
        const double v = support(bin);
        if (!(v > 0.0)) throw DomainError("gst_report: support values must be positive");
        s.push_back(v);
        total += v;
    }
    for (double& v : s) v /= total;
    return BeliefReport(partition, std::move(s));
}

BeliefCollection simulate_collection(const Prior& prior, const std::vector<Partition>& partitions, Lambda lambda) {
    BeliefCollection out(prior.space());
    for (const Partition& p : partitions) out.add(erbr_report(prior, p, lambda));
    return out;
}

std::vector<Partition> construction_partitions(const SpacePtr& space, std::size_t anchor) {
    const std::size_t n = space->size();
    if (anchor >= n) throw StructuralError("construction_partitions: anchor outside the space");
    if (n > 20) throw StructuralError("construction_partitions: too many states to enumerate all events");

    std::vector<Partition> out;
    std::set<std::vector<Event>> seen;
    auto push = [&](const Event& a, std::size_t pivot) {
        std::vector<Event> bins{a};
        Event rest = set_difference(complement(a, n), Event::singleton(pivot));
        if (!rest.empty()) bins.push_back(std::move(rest));
        bins.push_back(Event::singleton(pivot));
        Partition p(space, std::move(bins));
        if (seen.insert(p.canonical()).second) out.push_back(std::move(p));
    };

    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
        std::vector<std::size_t> states;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1U) states.push_back(i);
        }
        Event a(std::move(states));
        if (!a.contains(anchor)) {
            push(a, anchor);
        } else {
            std::size_t w = 0;
            while (a.contains(w)) ++w;
            push(a, w);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

RegularityResult check_regularity(const BeliefCollection& collection, double tol) {
    if (!(tol > 0.0)) throw DomainError("check_regularity: tol must be positive");
    if (collection.empty()) throw StructuralError("check_regularity: empty collection");
    RegularityResult out;
    const auto& recs = collection.records();
    for (std::size_t r = 0; r < recs.size(); ++r) {
        double sum = 0.0;
        for (std::size_t b = 0; b < recs[r].probs.size(); ++b) {
            const double v = recs[r].probs[b];
            if (!(v > 0.0)) {
                out.violations.push_back({r, b, RegularityViolation::Kind::kNonPositive, v});
            }
            sum += v;
        }
        if (!(std::abs(sum - 1.0) <= tol)) {
            out.violations.push_back({r, std::nullopt, RegularityViolation::Kind::kSumMismatch, sum});
        }
    }
    out.passed = out.violations.empty();
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct SharedBin {
    std::size_t from_bin;  // bin index in the first record
    std::size_t to_bin;    // bin index in the second record
};

std::vector<SharedBin> shared_bins(const BeliefReport& a, const BeliefReport& b) {
    std::vector<SharedBin> out;
    for (std::size_t i = 0; i < a.partition.size(); ++i) {
        if (auto j = b.partition.find_bin(a.partition.bin(i))) out.push_back({i, *j});
    }
    return out;
}

double safe_log(double v) {
    return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
}

class CycleScanner {
public:
    CycleScanner(const BeliefCollection& c, double tol) : c_(c), tol_(tol) {
        log_mu_.reserve(c.size());
        for (const auto& r : c.records()) {
            std::vector<double> l;
            for (double v : r.probs) l.push_back(safe_log(v));
            log_mu_.push_back(std::move(l));
        }
    }

    // in_bins[i]: bin of E_i in record i; out_bins[i]: bin of E_(i+1) in record i.
    void score(const std::vector<std::size_t>& recs, const std::vector<std::size_t>& in_bins,
               const std::vector<std::size_t>& out_bins) {
        double total = 0.0;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            total += log_mu_[recs[i]][in_bins[i]] - log_mu_[recs[i]][out_bins[i]];
        }
        const double mag = std::isnan(total) ? std::numeric_limits<double>::infinity() : std::abs(total);
        ++result.cycles_checked;
        if (!(mag <= tol_)) result.passed = false;
        if (!result.worst || mag > std::abs(result.worst->log_product) || std::isnan(result.worst->log_product)) {
            BeliefCycle cyc;
            cyc.records = recs;
            for (std::size_t i = 0; i < recs.size(); ++i) {
                cyc.events.push_back(c_.records()[recs[i]].partition.bin(in_bins[i]));
            }
            cyc.log_product = std::isnan(total) ? std::numeric_limits<double>::infinity() : total;
            result.worst = std::move(cyc);
        }
    }

    CycleCheckResult result;

private:
    const BeliefCollection& c_;
    double tol_;
    std::vector<std::vector<double>> log_mu_;
};

void enumerate_exhaustive(const BeliefCollection& c, const CycleCheckOptions& opt, CycleScanner& scan) {
    const std::size_t m = c.size();
    std::vector<std::vector<std::vector<SharedBin>>> shared(m, std::vector<std::vector<SharedBin>>(m));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i != j) shared[i][j] = shared_bins(c.records()[i], c.records()[j]);
        }
    }

    std::vector<std::size_t> recs, in_bins, out_bins;
    bool exhausted_budget = false;

    // Assign events along a fixed record sequence, then close the loop.
    std::function<void(std::size_t)> assign = [&](std::size_t i) {
        if (exhausted_budget) return;
        const std::size_t len = recs.size();
        if (i == len) {
            for (const SharedBin& sb : shared[recs[len - 1]][recs[0]]) {
                out_bins[len - 1] = sb.from_bin;
                in_bins[0] = sb.to_bin;
                scan.score(recs, in_bins, out_bins);
                if (scan.result.cycles_checked >= opt.exhaustive_cycle_budget) {
                    exhausted_budget = true;
                    return;
                }
            }
            return;
        }
        // i >= 1: choose E_(i+1)... here E_i between records i-1 and i.
        for (const SharedBin& sb : shared[recs[i - 1]][recs[i]]) {
            out_bins[i - 1] = sb.from_bin;
            in_bins[i] = sb.to_bin;
            assign(i + 1);
            if (exhausted_budget) return;
        }
    };

    // Record sequences are rooted at their smallest index so rotations are
    // not revisited; consecutive records must differ.
    std::function<void(std::size_t)> extend = [&](std::size_t target_len) {
        if (exhausted_budget) return;
        if (recs.size() == target_len) {
            if (recs.back() == recs.front()) return;
            in_bins.assign(target_len, 0);
            out_bins.assign(target_len, 0);
            assign(1);
            return;
        }
        for (std::size_t next = recs.front(); next < m; ++next) {
            if (next == recs.back() || shared[recs.back()][next].empty()) continue;
            recs.push_back(next);
            extend(target_len);
            recs.pop_back();
            if (exhausted_budget) return;
        }
    };

    for (int len = 2; len <= opt.max_cycle_len && !exhausted_budget; ++len) {
        for (std::size_t first = 0; first < m && !exhausted_budget; ++first) {
            recs.assign(1, first);
            extend(static_cast<std::size_t>(len));
        }
    }
    scan.result.exhaustive = !exhausted_budget;
}

void sample_random(const BeliefCollection& c, const CycleCheckOptions& opt, CycleScanner& scan) {
    const auto& recs_all = c.records();
    std::map<Event, std::vector<std::pair<std::size_t, std::size_t>>> holders;
    for (std::size_t r = 0; r < recs_all.size(); ++r) {
        for (std::size_t b = 0; b < recs_all[r].partition.size(); ++b) {
            holders[recs_all[r].partition.bin(b)].push_back({r, b});
        }
    }
    // Bins of each record that also occur in some other record.
    std::vector<std::vector<std::size_t>> shared_of(recs_all.size());
    for (std::size_t r = 0; r < recs_all.size(); ++r) {
        for (std::size_t b = 0; b < recs_all[r].partition.size(); ++b) {
            if (holders[recs_all[r].partition.bin(b)].size() > 1) shared_of[r].push_back(b);
        }
    }
    std::vector<std::size_t> starts;
    for (std::size_t r = 0; r < recs_all.size(); ++r) {
        if (!shared_of[r].empty()) starts.push_back(r);
    }
    scan.result.exhaustive = false;
    if (starts.empty()) return;

    std::mt19937_64 rng(opt.seed);
    auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

    const std::size_t max_attempts = opt.random_cycles * 50;
    std::size_t accepted = 0;
    std::vector<std::size_t> recs, in_bins, out_bins;
    for (std::size_t attempt = 0; attempt < max_attempts && accepted < opt.random_cycles; ++attempt) {
        const auto len = static_cast<std::size_t>(
            std::uniform_int_distribution<int>(2, std::max(2, opt.max_cycle_len))(rng));
        recs.assign(1, starts[pick(starts.size())]);
        in_bins.assign(len, 0);
        out_bins.assign(len, 0);
        bool ok = true;
        for (std::size_t i = 1; i < len && ok; ++i) {
            const std::size_t cur = recs.back();
            const std::size_t b = shared_of[cur][pick(shared_of[cur].size())];
            const auto& hs = holders[recs_all[cur].partition.bin(b)];
            std::vector<std::pair<std::size_t, std::size_t>> others;
            for (const auto& h : hs) {
                if (h.first != cur) others.push_back(h);
            }
            if (others.empty()) { ok = false; break; }
            const auto& nxt = others[pick(others.size())];
            out_bins[i - 1] = b;
            in_bins[i] = nxt.second;
            recs.push_back(nxt.first);
        }
        if (!ok || recs.back() == recs.front()) continue;
        const auto closing = shared_bins(recs_all[recs.back()], recs_all[recs.front()]);
        if (closing.empty()) continue;
        const SharedBin& sb = closing[pick(closing.size())];
        out_bins[len - 1] = sb.from_bin;
        in_bins[0] = sb.to_bin;
        scan.score(recs, in_bins, out_bins);
        ++accepted;
    }
}

}  // namespace

CycleCheckResult check_cyclical_independence(const BeliefCollection& collection, const CycleCheckOptions& options) {
    if (options.max_cycle_len < 2) throw DomainError("check_cyclical_independence: max_cycle_len must be >= 2");
    if (!(options.tol > 0.0)) throw DomainError("check_cyclical_independence: tol must be positive");
    CycleScanner scan(collection, options.tol);
    if (collection.size() <= options.exhaustive_partition_limit) {
        enumerate_exhaustive(collection, options, scan);
    } else {
        sample_random(collection, options, scan);
    }
    return scan.result;
}

CycleCheckResult check_cyclical_independence(const BeliefCollection& collection, int max_cycle_len, double tol,
                                             std::uint64_t seed) {
    CycleCheckOptions opt;
    opt.max_cycle_len = max_cycle_len;
    opt.tol = tol;
    opt.seed = seed;
    return check_cyclical_independence(collection, opt);
}

// ---------------------------------------------------------------------------

double SupportFunction::at(const Event& e) const {
    auto it = values.find(e);
    if (it == values.end()) {
        throw StructuralError("support function has no value for {" + describe(e, *space) + "}");
    }
    return it->second;
}

namespace {

std::string needed_partition(const StateSpace& space, const Event& a, std::size_t pivot) {
    const std::size_t n = space.size();
    std::string out = "{" + describe(a, space) + "}";
    Event rest = set_difference(complement(a, n), Event::singleton(pivot));
    if (!rest.empty()) out += " | {" + describe(rest, space) + "}";
    out += " | {" + space.label(pivot) + "}";
    return out;
}

std::size_t first_state_outside(const Event& a) {
    std::size_t w = 0;
    while (a.contains(w)) ++w;
    return w;
}

}  // namespace

SupportFunction recover_support(const BeliefCollection& collection, std::size_t anchor, double tol,
                                const std::vector<Event>* targets) {
    const SpacePtr& space = collection.space();
    const std::size_t n = space->size();
    if (anchor >= n) throw StructuralError("recover_support: anchor outside the space");
    if (!(tol > 0.0)) throw DomainError("recover_support: tol must be positive");

    std::map<Event, std::vector<std::pair<std::size_t, std::size_t>>> holders;
    const auto& recs = collection.records();
    for (std::size_t r = 0; r < recs.size(); ++r) {
        for (std::size_t b = 0; b < recs[r].partition.size(); ++b) {
            holders[recs[r].partition.bin(b)].push_back({r, b});
        }
    }
    auto log_mu = [&](std::size_t r, std::size_t b) {
        const double v = recs[r].probs[b];
        if (!(v > 0.0)) throw DomainError("recover_support: non-positive reported probability");
        return std::log(v);
    };

    SupportFunction out;
    out.space = space;
    out.anchor = anchor;

    auto settle = [&](const Event& e, const std::vector<double>& chains) {
        const auto [lo, hi] = std::minmax_element(chains.begin(), chains.end());
        const double spread = *hi - *lo;
        out.max_chain_spread = std::max(out.max_chain_spread, spread);
        if (spread > tol) {
            throw ConsistencyError("recover_support: chains to {" + describe(e, *space) + "} disagree by " +
                                       std::to_string(spread) + " in log support",
                                   spread);
        }
        double mean = 0.0;
        for (double v : chains) mean += v;
        mean /= static_cast<double>(chains.size());
        return mean;
    };

    // Singletons first, each directly against the anchor.
    const Event anchor_event = Event::singleton(anchor);
    std::vector<double> log_single(n, 0.0);
    for (std::size_t w = 0; w < n; ++w) {
        if (w == anchor) continue;
        const Event e = Event::singleton(w);
        std::vector<double> chains;
        auto it = holders.find(e);
        if (it != holders.end()) {
            for (const auto& [r, b] : it->second) {
                if (auto ab = recs[r].partition.find_bin(anchor_event)) chains.push_back(log_mu(r, b) - log_mu(r, *ab));
            }
        }
        if (chains.empty()) {
            const std::string need = needed_partition(*space, e, anchor);
            throw MissingDataError("recover_support: no partition relates {" + space->label(w) + "} to the anchor; need " + need,
                                   need);
        }
        log_single[w] = settle(e, chains);
    }
    for (std::size_t w = 0; w < n; ++w) out.values[Event::singleton(w)] = std::exp(log_single[w]);

    std::vector<Event> wanted;
    if (targets) {
        wanted = *targets;
    } else {
        for (const auto& [e, _] : holders) wanted.push_back(e);
    }

    for (const Event& a : wanted) {
        if (!a.is_proper(n)) {
            if (targets) throw StructuralError("recover_support: targets must be proper non-empty events");
            continue;
        }
        if (a.size() == 1) continue;
        std::vector<double> chains;
        auto it = holders.find(a);
        if (it != holders.end()) {
            for (const auto& [r, b] : it->second) {
                const Partition& p = recs[r].partition;
                for (std::size_t k = 0; k < p.size(); ++k) {
                    if (k == b || p.bin(k).size() != 1) continue;
                    const std::size_t w = *p.bin(k).begin();
                    chains.push_back(log_mu(r, b) - log_mu(r, k) + log_single[w]);
                }
            }
        }
        if (chains.empty()) {
            const std::size_t pivot = a.contains(anchor) ? first_state_outside(a) : anchor;
            const std::string need = needed_partition(*space, a, pivot);
            throw MissingDataError("recover_support: no partition pairs {" + describe(a, *space) +
                                       "} with a singleton; need " + need,
                                   need);
        }
        out.values[a] = std::exp(settle(a, chains));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::optional<double> find_alpha(double a, double b, double c, double tol) {
    if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
        throw DomainError("find_alpha: support values must be positive and finite");
    }
    const double lo_ab = std::min(a, b), hi_ab = std::max(a, b);
    if (lo_ab <= c && c <= hi_ab) return std::nullopt;

    // With x = ln(a/c), y = ln(b/c) of equal sign, h(t) = e^{t x} + e^{t y} - 1
    // is strictly decreasing in t > 0 when both are negative. For c < min we
    // solve for -alpha, flipping the signs of x and y.
    const double sign = c > hi_ab ? 1.0 : -1.0;
    const double x = sign * std::log(a / c);
    const double y = sign * std::log(b / c);
    auto h = [x, y](double t) { return std::exp(t * x) + std::exp(t * y) - 1.0; };

    double lo = 1.0, hi = 1.0;
    int k = 0;
    while (!(h(lo) > 0.0) && k < 60) {
        lo *= 0.5;
        ++k;
    }
    k = 0;
    while (!(h(hi) < 0.0) && k < 60) {
        hi *= 2.0;
        ++k;
    }
    if (!(h(lo) >= 0.0) || !(h(hi) <= 0.0)) {
        throw ConvergenceError("find_alpha: no bracket within [2^-60, 2^60]", std::min(std::abs(h(lo)), std::abs(h(hi))));
    }
    const double t = search::bisect(h, lo, hi);
    const double residual = std::abs(h(t));
    if (residual > tol) throw ConvergenceError("find_alpha: residual above tolerance", residual);
    return sign * t;
}

namespace {

double additivity_violation(const SupportFunction& s, double alpha, double log_norm, const Event& a, const Event& b) {
    auto mass = [&](const Event& e) { return std::exp(alpha * std::log(s.at(e)) - log_norm); };
    return std::abs(mass(set_union(a, b)) - mass(a) - mass(b));
}

std::vector<std::pair<Event, Event>> default_verification(const SupportFunction& s, const IdentifyOptions& opt) {
    const std::size_t n = s.space->size();
    std::vector<std::pair<Event, Event>> pairs;
    auto usable = [&](const Event& a, const Event& b) {
        if (!disjoint(a, b)) return false;
        const Event u = set_union(a, b);
        return u.is_proper(n) && s.has(u);
    };
    std::vector<Event> keys;
    for (const auto& [e, _] : s.values) keys.push_back(e);

    if (n <= opt.exhaustive_state_limit) {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            for (std::size_t j = i + 1; j < keys.size(); ++j) {
                if (usable(keys[i], keys[j])) pairs.emplace_back(keys[i], keys[j]);
            }
        }
        return pairs;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Event a = Event::singleton(i), b = Event::singleton(j);
            if (usable(a, b)) pairs.emplace_back(a, b);
        }
    }
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<std::size_t> pick(0, keys.size() - 1);
    std::size_t added = 0;
    for (std::size_t attempt = 0; attempt < opt.random_pairs * 200 && added < opt.random_pairs; ++attempt) {
        const Event& a = keys[pick(rng)];
        const Event& b = keys[pick(rng)];
        if (usable(a, b)) {
            pairs.emplace_back(a, b);
            ++added;
        }
    }
    return pairs;
}

}  // namespace

IdentificationResult identify_erbr(const SupportFunction& support, const IdentifyOptions& options) {
    const std::size_t n = support.space->size();
    for (std::size_t w = 0; w < n; ++w) {
        if (!support.has(Event::singleton(w))) {
            throw StructuralError("identify_erbr: support has no value for singleton {" + support.space->label(w) + "}");
        }
    }

    double max_log = 0.0;
    for (const auto& [e, v] : support.values) max_log = std::max(max_log, std::abs(std::log(v)));
    if (max_log <= options.tol) return UniformDegenerate{};

    // Candidate alpha from the first pair of singletons whose union is known.
    std::optional<std::pair<Event, Event>> seed_pair;
    for (std::size_t i = 0; i < n && !seed_pair; ++i) {
        for (std::size_t j = i + 1; j < n && !seed_pair; ++j) {
            const Event u{i, j};
            if (u.is_proper(n) && support.has(u)) seed_pair.emplace(Event::singleton(i), Event::singleton(j));
        }
    }
    if (!seed_pair) {
        throw StructuralError("identify_erbr: need at least 3 states and a known union of two singletons");
    }
    const Event& sa = seed_pair->first;
    const Event& sb = seed_pair->second;
    const std::optional<double> alpha =
        find_alpha(support.at(sa), support.at(sb), support.at(set_union(sa, sb)), 1e-12);
    if (!alpha) {
        return NotErbr{"no power solves s(A u B)^alpha = s(A)^alpha + s(B)^alpha for the seed pair", 0.0, *seed_pair};
    }

    std::vector<double> log_mass(n);
    for (std::size_t w = 0; w < n; ++w) log_mass[w] = *alpha * std::log(support.at(Event::singleton(w)));
    const double top = *std::max_element(log_mass.begin(), log_mass.end());
    double z = 0.0;
    for (double v : log_mass) z += std::exp(v - top);
    const double log_norm = top + std::log(z);

    const auto pairs = options.verification ? *options.verification : default_verification(support, options);
    double worst = 0.0;
    std::optional<std::pair<Event, Event>> worst_pair;
    for (const auto& [a, b] : pairs) {
        const double v = additivity_violation(support, *alpha, log_norm, a, b);
        if (!(v <= worst)) {
            worst = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
            worst_pair.emplace(a, b);
        }
    }
    if (worst > options.tol) {
        return NotErbr{"power additivity fails beyond tolerance", worst, worst_pair};
    }

    std::vector<double> probs(n);
    for (std::size_t w = 0; w < n; ++w) probs[w] = std::exp(log_mass[w] - log_norm);
    double sum = 0.0;
    for (double p : probs) sum += p;
    for (double& p : probs) p /= sum;
    return ErbrIdentification{*alpha, 1.0 / *alpha, Prior(support.space, std::move(probs)), worst, pairs.size()};
}

IdentificationResult identify_erbr(const SupportFunction& support, double tol) {
    IdentifyOptions opt;
    opt.tol = tol;
    return identify_erbr(support, opt);
}

// ---------------------------------------------------------------------------

PipelineOutcome full_pipeline(const BeliefCollection& collection, double tol, const PipelineOptions& options) {
    RegularityResult reg = check_regularity(collection, tol);
    if (!reg.passed) return RegularityFailure{std::move(reg)};

    CycleCheckResult cyc = check_cyclical_independence(collection, options.max_cycle_len, tol, options.seed);
    if (!cyc.passed) return CyclicalFailure{std::move(cyc)};

    SupportFunction support;
    try {
        support = recover_support(collection, options.anchor, tol);
    } catch (const ConsistencyError& e) {
        return SupportInconsistency{e.what(), e.discrepancy()};
    }

    IdentifyOptions id;
    id.tol = tol;
    id.seed = options.seed;
    IdentificationResult res = identify_erbr(support, id);
    return std::visit([](auto&& v) -> PipelineOutcome { return std::move(v); }, std::move(res));
}

}  // namespace erbr
