#include <doctest.h>

#include "erbr/error.hpp"
#include "erbr/identification.hpp"
#include "erbr/reporting.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <set>

using namespace erbr;
using doctest::Approx;

namespace {

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> p(n);
    for (double& v : p) v = u(rng);
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= s;
    return p;
}

// Partitions for several anchors, without repeats.
std::vector<Partition> merged_construction(const SpacePtr& sp, std::initializer_list<std::size_t> anchors) {
    std::vector<Partition> out;
    std::set<std::vector<Event>> seen;
    for (std::size_t a : anchors) {
        for (auto& p : construction_partitions(sp, a)) {
            if (seen.insert(p.canonical()).second) out.push_back(p);
        }
    }
    return out;
}

SupportFunction make_support(const SpacePtr& sp, std::map<Event, double> values) {
    SupportFunction s;
    s.space = sp;
    s.anchor = 0;
    s.values = std::move(values);
    return s;
}

}  // namespace

TEST_CASE("collection rejects repeats and foreign spaces") {
    const auto sp = make_integer_space(0, 2);
    BeliefCollection c(sp);
    c.add(BeliefReport(Partition(sp, {Event{0}, Event{1, 2}}), {0.4, 0.6}));
    CHECK_THROWS_AS(c.add(BeliefReport(Partition(sp, {Event{1, 2}, Event{0}}), {0.6, 0.4})), StructuralError);
    const auto other = make_integer_space(0, 2);  // equal labels count as the same space
    CHECK_NOTHROW(c.add(BeliefReport(Partition(other, {Event{1}, Event{0, 2}}), {0.5, 0.5})));
    const auto foreign = make_space({"x", "y", "z"});
    CHECK_THROWS_AS(c.add(BeliefReport(Partition(foreign, {Event{1}, Event{0, 2}}), {0.5, 0.5})), StructuralError);
}

TEST_CASE("regularity") {
    const auto sp = make_integer_space(0, 3);
    const Prior prior(sp, {0.1, 0.2, 0.3, 0.4});
    const auto coll = simulate_collection(prior, construction_partitions(sp, 0), Lambda(0.7));
    CHECK(check_regularity(coll, 1e-9).passed);

    BeliefCollection bad(sp);
    bad.add(BeliefReport(Partition(sp, {Event{0}, Event{1}, Event{2, 3}}), {0.0, 0.5, 0.5}));
    const auto r = check_regularity(bad, 1e-9);
    REQUIRE_FALSE(r.passed);
    CHECK(r.violations.front().record == 0);
    CHECK(r.violations.front().bin == 0u);
    CHECK(r.violations.front().kind == RegularityViolation::Kind::kNonPositive);

    BeliefCollection over(sp);
    over.add(BeliefReport(Partition(sp, {Event{0, 1}, Event{2, 3}}), {0.52, 0.5}));
    const auto o = check_regularity(over, 1e-6);
    REQUIRE_FALSE(o.passed);
    CHECK(o.violations.front().kind == RegularityViolation::Kind::kSumMismatch);
    CHECK(o.violations.front().value == Approx(1.02));

    CHECK_THROWS_AS(check_regularity(BeliefCollection(sp), 1e-9), StructuralError);
}

TEST_CASE("cyclical independence") {
    const auto sp = make_integer_space(0, 3);
    const Prior prior(sp, {0.1, 0.2, 0.3, 0.4});
    const Partition p1(sp, {Event{0}, Event{1}, Event{2, 3}});
    const Partition p2(sp, {Event{0}, Event{1}, Event{2}, Event{3}});

    auto coll = simulate_collection(prior, {p1, p2}, Lambda(0.5));
    const auto& r = coll.records();
    // the two-partition identity
    const double product = r[0].probs[0] / r[0].probs[1] * (r[1].probs[1] / r[1].probs[0]);
    CHECK(product == Approx(1.0).epsilon(1e-14));
    CHECK(check_cyclical_independence(coll, 2, 1e-10).passed);

    BeliefCollection perturbed(sp);
    perturbed.add(BeliefReport(p1, {r[0].probs[0] + 0.01, r[0].probs[1], r[0].probs[2]}));
    perturbed.add(r[1]);
    const auto res = check_cyclical_independence(perturbed, 2, 1e-10);
    REQUIRE_FALSE(res.passed);
    REQUIRE(res.worst);
    const double expected = std::log((r[0].probs[0] + 0.01) / r[0].probs[0]);
    CHECK(std::abs(res.worst->log_product) == Approx(expected).epsilon(1e-9));

    const auto big = simulate_collection(prior, construction_partitions(sp, 0), Lambda(1.7));
    CHECK(check_cyclical_independence(big, 5, 1e-10).passed);
}

TEST_CASE("cycle check samples large collections deterministically") {
    const auto sp = make_integer_space(0, 5);
    std::mt19937_64 rng(2);
    const Prior prior(sp, random_simplex(rng, 6));
    const auto coll = simulate_collection(prior, construction_partitions(sp, 0), Lambda(0.69));
    CycleCheckOptions opts;
    opts.seed = 9;
    opts.random_cycles = 500;
    const auto a = check_cyclical_independence(coll, opts);
    const auto b = check_cyclical_independence(coll, opts);
    CHECK(a.passed);
    CHECK_FALSE(a.exhaustive);
    CHECK(a.cycles_checked == b.cycles_checked);
}

TEST_CASE("support recovery from GST data") {
    const auto sp = make_integer_space(0, 4);
    const Prior prior(sp, {0.05, 0.15, 0.2, 0.25, 0.35});
    const std::size_t anchor = 2;
    auto s = [&](const Event& e) { return std::sqrt(prior.probability(e)); };
    BeliefCollection coll(sp);
    for (const auto& p : construction_partitions(sp, anchor)) coll.add(gst_report(p, s));

    const SupportFunction sup = recover_support(coll, anchor, 1e-9);
    CHECK(sup.at(Event::singleton(anchor)) == 1.0);
    const double s_anchor = s(Event::singleton(anchor));
    for (const auto& [e, v] : sup.values) CHECK(v == Approx(s(e) / s_anchor).epsilon(1e-9));
    CHECK(sup.values.size() == 30u);  // every proper event of 5 states
    CHECK(sup.max_chain_spread <= 1e-10);

    // uniform reports give a constant support
    BeliefCollection flat(sp);
    for (const auto& p : construction_partitions(sp, 0)) flat.add(BeliefReport(p, std::vector<double>(p.size(), 1.0 / p.size())));
    for (const auto& [e, v] : recover_support(flat, 0, 1e-12).values) CHECK(v == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("support recovery reports the missing partition") {
    const auto sp = make_integer_space(0, 3);
    const Prior prior(sp, {0.1, 0.2, 0.3, 0.4});
    const auto coll = simulate_collection(prior, {Partition(sp, {Event{0}, Event{1}, Event{2, 3}})}, Lambda(0.5));
    try {
        recover_support(coll, 0, 1e-9);
        FAIL("expected MissingDataError");
    } catch (const MissingDataError& e) {
        CHECK_FALSE(e.needed_partition().empty());
    }
}

TEST_CASE("find_alpha") {
    CHECK(*find_alpha(std::sqrt(0.3), std::sqrt(0.2), std::sqrt(0.5)) == Approx(2.0).epsilon(1e-9));
    CHECK_FALSE(find_alpha(0.5, 0.3, 0.4));
    CHECK_FALSE(find_alpha(0.5, 0.3, 0.5));  // c on the boundary
    CHECK(*find_alpha(0.5, 0.5, 1.0) == Approx(1.0).epsilon(1e-12));
    CHECK(*find_alpha(2.0, 3.0, 1.0) < 0.0);
    CHECK_THROWS_AS(find_alpha(0.0, 1.0, 2.0), DomainError);
    CHECK_THROWS_AS(find_alpha(1.0, -1.0, 2.0), DomainError);
}

TEST_CASE("property: find_alpha trichotomy and residual") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> logu(-6.0, 6.0);
    for (int i = 0; i < 2000; ++i) {
        const double a = std::exp(logu(rng)), b = std::exp(logu(rng)), c = std::exp(logu(rng));
        const auto alpha = find_alpha(a, b, c);
        if (c > std::max(a, b)) {
            REQUIRE(alpha);
            CHECK(*alpha > 0.0);
        } else if (c < std::min(a, b)) {
            REQUIRE(alpha);
            CHECK(*alpha < 0.0);
        } else {
            CHECK_FALSE(alpha);
        }
        if (alpha) CHECK(std::abs(std::pow(a / c, *alpha) + std::pow(b / c, *alpha) - 1.0) <= 1e-10);
    }
}

TEST_CASE("identify_erbr") {
    const auto sp = make_space({"a", "b", "c"});
    const Prior prior(sp, {0.5, 0.3, 0.2});
    std::map<Event, double> values;
    for (const Event& e : {Event{0}, Event{1}, Event{2}, Event{0, 1}, Event{0, 2}, Event{1, 2}}) {
        values[e] = std::pow(prior.probability(e), 0.5) / std::pow(0.5, 0.5);
    }
    const auto res = identify_erbr(make_support(sp, values), 1e-9);
    const auto* id = std::get_if<ErbrIdentification>(&res);
    REQUIRE(id);
    CHECK(id->lambda == Approx(0.5).epsilon(1e-9));
    for (std::size_t i = 0; i < 3; ++i) CHECK((*id).prior[i] == Approx(prior[i]).epsilon(1e-9));

    std::map<Event, double> flat;
    for (const auto& [e, v] : values) flat[e] = 1.0;
    CHECK(std::holds_alternative<UniformDegenerate>(identify_erbr(make_support(sp, flat), 1e-9)));

    const std::map<Event, double> broken{{Event{0}, 1.0},    {Event{1}, 1.0},    {Event{2}, 2.0},
                                         {Event{0, 1}, 1.5}, {Event{0, 2}, 3.0}, {Event{1, 2}, 3.0}};
    const auto nb = identify_erbr(make_support(sp, broken), 1e-9);
    REQUIRE(std::holds_alternative<NotErbr>(nb));
    CHECK(std::get<NotErbr>(nb).residual > 1e-3);

    std::map<Event, double> missing = values;
    missing.erase(Event{2});
    CHECK_THROWS_AS(identify_erbr(make_support(sp, missing), 1e-9), StructuralError);
}

TEST_CASE("full pipeline round trip and diagnoses") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + trial % 6;
        const auto sp = make_integer_space(0, static_cast<long>(n) - 1);
        const Prior prior(sp, random_simplex(rng, n));
        for (double l : {-1.0, 0.3, 0.69, 1.0, 2.0}) {
            const auto coll = simulate_collection(prior, construction_partitions(sp, 0), Lambda(l));
            const auto out = full_pipeline(coll, 1e-8);
            const auto* id = std::get_if<ErbrIdentification>(&out);
            REQUIRE(id);
            CHECK(std::abs(id->lambda - l) <= 1e-6);
            for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(id->prior[i] - prior[i]) <= 1e-8);
        }
        const auto zero = simulate_collection(prior, construction_partitions(sp, 0), Lambda(0.0));
        CHECK(std::holds_alternative<UniformDegenerate>(full_pipeline(zero, 1e-8)));
    }

    // anchor invariance
    const auto sp = make_integer_space(0, 4);
    const Prior prior(sp, {0.1, 0.15, 0.2, 0.25, 0.3});
    const auto coll = simulate_collection(prior, merged_construction(sp, {0, 3}), Lambda(0.69));
    const auto a = std::get<ErbrIdentification>(full_pipeline(coll, 1e-8, {0, 4, 0}));
    const auto b = std::get<ErbrIdentification>(full_pipeline(coll, 1e-8, {3, 4, 0}));
    CHECK(a.lambda == Approx(b.lambda).epsilon(1e-9));
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(a.prior[i] - b.prior[i]) <= 1e-9);

    // regularity failure comes first
    BeliefCollection bad(sp);
    for (const auto& r : coll.records()) {
        auto probs = r.probs;
        if (bad.empty()) probs[0] = 0.0;
        bad.add(BeliefReport(r.partition, probs));
    }
    CHECK(std::holds_alternative<RegularityFailure>(full_pipeline(bad, 1e-8)));

    // GST data whose support is not power additive
    auto s = [&](const Event& e) {
        const double p = prior.probability(e);
        return p * (1.0 + 0.5 * std::sin(7.0 * p));
    };
    BeliefCollection gst(sp);
    for (const auto& p : construction_partitions(sp, 0)) gst.add(gst_report(p, s));
    CHECK(std::holds_alternative<NotErbr>(full_pipeline(gst, 1e-8)));
}
