#include <doctest.h>

#include "erbr/error.hpp"
#include "erbr/fallacy.hpp"
#include "erbr/notation.hpp"
#include "erbr/reporting.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace erbr;
using doctest::Approx;

namespace {

// mu on {E, E^c} from pi(E), written out directly.
double binary_mu(double pi, double l) {
    const double a = std::pow(pi, l), b = std::pow(1.0 - pi, l);
    return a / (a + b);
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Prior with every singleton below 1/2.
Prior spread_prior(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.6, 1.0);  // max share 1/2.2 at n = 3
    std::vector<double> p(n);
    for (double& v : p) v = u(rng);
    const double s = sum(p);
    for (double& v : p) v /= s;
    return Prior(make_integer_space(0, static_cast<long>(n) - 1), p);
}

Partition singletons(const SpacePtr& space) {
    std::vector<Event> bins;
    for (std::size_t i = 0; i < space->size(); ++i) bins.push_back(Event::singleton(i));
    return Partition(space, bins);
}

}  // namespace

TEST_CASE("event pair validation") {
    CHECK_THROWS_AS(EventPair(0.4, 0.2, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(EventPair(0.0, 0.2, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(EventPair(0.2, 1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(EventPair(0.2, 0.4, NAN, 1.0), DomainError);

    const Prior prior = parse_prior("explicit:0.1,0.2,0.3,0.4");
    const EventPair p = EventPair::from_events(prior, Event({1}), Event({1, 2}), 0.5, 1.0);
    CHECK(p.pi_B == Approx(0.2));
    CHECK(p.pi_C == Approx(0.5));
    CHECK_THROWS_AS(EventPair::from_events(prior, Event({1}), Event({2, 3}), 1.0, 1.0), StructuralError);
    CHECK_THROWS_AS(EventPair::from_events(prior, Event({1}), Event({1}), 1.0, 1.0), StructuralError);
    CHECK_THROWS_AS(EventPair::from_events(prior, Event({1}), Event::all(4), 1.0, 1.0), StructuralError);
}

TEST_CASE("conjunction condition examples") {
    const EventPair p(0.2, 0.4, 0.2, 1.0);
    CHECK(conjunction_condition(p) == Verdict::kHolds);
    CHECK(direct_comparison(p) == Verdict::kHolds);
    CHECK(0.2 * std::log(0.25) == Approx(-0.27726).epsilon(1e-5));
    CHECK(std::log(0.4 / 0.6) == Approx(-0.40546).epsilon(1e-5));
    CHECK(binary_mu(0.2, 0.2) == Approx(0.4311).epsilon(1e-4));

    CHECK(conjunction_condition(EventPair(0.2, 0.4, 1.0, 1.0)) == Verdict::kFails);
    CHECK(conjunction_condition(EventPair(0.4 - 1e-9, 0.4, 0.7, 0.7)) == Verdict::kFails);

    // lambda = 0 on both sides: both reports are 1/2
    CHECK(conjunction_condition(EventPair(0.2, 0.4, 0.0, 0.0)) == Verdict::kBoundary);
    CHECK(direct_comparison(EventPair(0.2, 0.4, 0.0, 0.0)) == Verdict::kBoundary);
    CHECK(to_string(Verdict::kHolds) == "true");
    CHECK(to_string(Verdict::kFails) == "false");
    CHECK(to_string(Verdict::kBoundary) == "boundary");
}

TEST_CASE("lambda regions") {
    const LambdaRegion a = conjunction_lambda_region(0.2, 0.4, 1.0);
    CHECK(a.direction == LambdaRegion::Direction::kBelow);
    CHECK(a.threshold == Approx(std::log(2.0 / 3.0) / std::log(0.25)).epsilon(1e-14));
    CHECK(a.threshold == Approx(0.29248).epsilon(1e-5));
    CHECK_FALSE(a.requires_negative);
    CHECK_FALSE(a.straddles_half);

    const LambdaRegion b = conjunction_lambda_region(0.3, 0.6, 0.8);
    CHECK(b.direction == LambdaRegion::Direction::kBelow);
    CHECK(b.threshold == Approx(-0.3829).epsilon(1e-4));
    CHECK(b.requires_negative);
    CHECK(b.straddles_half);
    CHECK(b.describe().find("negative") != std::string::npos);

    for (double l : {0.3, 1.0, 2.5}) {
        const LambdaRegion c = conjunction_lambda_region(0.6, 0.8, l);
        CHECK(c.direction == LambdaRegion::Direction::kAbove);
        CHECK(c.threshold / l == Approx(3.419).epsilon(1e-3));
    }

    const LambdaRegion half = conjunction_lambda_region(0.5, 0.8, 1.0);
    CHECK(half.boundary);
    CHECK(half.direction == LambdaRegion::Direction::kNone);
    CHECK(conjunction_lambda_region(0.5, 0.8, -1.0).direction == LambdaRegion::Direction::kAll);
    CHECK_THROWS_AS(conjunction_lambda_region(0.5, 0.4, 1.0), DomainError);

    // the region agrees with the condition on either side of the threshold
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.02, 0.98), lam(-2.0, 3.0);
    for (int t = 0; t < 2000; ++t) {
        double x = u(rng), y = u(rng);
        if (x == y) continue;
        if (x > y) std::swap(x, y);
        const double lc = lam(rng);
        const LambdaRegion r = conjunction_lambda_region(x, y, lc);
        for (double d : {-1e-3, 1e-3}) {
            const double lb = r.threshold + d;
            const bool inside = r.direction == LambdaRegion::Direction::kBelow ? lb < r.threshold : lb > r.threshold;
            CHECK((conjunction_condition(EventPair(x, y, lb, lc)) == Verdict::kHolds) == inside);
        }
    }
}

TEST_CASE("property: condition equals direct comparison on a grid") {
    std::size_t cells = 0, fallacies = 0, mismatches = 0, negativity = 0;
    for (int i = 1; i <= 19; ++i) {
        for (int j = i + 1; j <= 19; ++j) {
            const double pb = 0.05 * i, pc = 0.05 * j;
            for (int a = 0; a <= 12; ++a) {
                for (int b = 0; b <= 12; ++b) {
                    const double lb = -1.0 + 0.25 * a, lc = -1.0 + 0.25 * b;
                    const EventPair pair(pb, pc, lb, lc);
                    const Verdict v = conjunction_condition(pair);
                    ++cells;
                    if (v != direct_comparison(pair)) ++mismatches;
                    const double diff = binary_mu(pb, lb) - binary_mu(pc, lc);
                    if (std::abs(diff) > 1e-12) {
                        CHECK(v == (diff > 0.0 ? Verdict::kHolds : Verdict::kFails));
                    }
                    if (v == Verdict::kHolds) {
                        ++fallacies;
                        if (pb < 0.5 && 0.5 < pc && !(lb < 0.0 || lc < 0.0)) ++negativity;
                    }
                }
            }
        }
    }
    CHECK(cells > 10000u);
    CHECK(fallacies > 0u);
    CHECK(mismatches == 0u);
    CHECK(negativity == 0u);
}

TEST_CASE("property: ordering of parameters when the fallacy holds") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lo(0.01, 0.49), hi(0.51, 0.99), lam(0.01, 3.0);
    for (int t = 0; t < 5000; ++t) {
        double x = lo(rng), y = lo(rng);
        if (x > y) std::swap(x, y);
        if (x == y) continue;
        const double lb = lam(rng), lc = lam(rng);
        if (conjunction_condition(EventPair(x, y, lb, lc)) == Verdict::kHolds) CHECK(lb < lc);

        double s = hi(rng), w = hi(rng);
        if (s > w) std::swap(s, w);
        if (s == w) continue;
        if (conjunction_condition(EventPair(s, w, lb, lc)) == Verdict::kHolds) CHECK(lb > lc);
    }
}

TEST_CASE("itemwise reports") {
    const auto space = make_integer_space(0, 3);
    const Prior uniform = Prior::uniform(space);
    const auto items = itemwise_report(uniform, singletons(space), Lambda(0.5));
    const double each = std::sqrt(0.25) / (std::sqrt(0.25) + std::sqrt(0.75));
    for (double v : items) CHECK(v == Approx(each).epsilon(1e-14));
    CHECK(items[0] == Approx(0.36603).epsilon(1e-5));
    CHECK(sum(items) == Approx(1.464).epsilon(1e-3));

    const Prior p = parse_prior("explicit:0.1,0.2,0.3,0.4");
    const Partition part = parse_partition("0-1|2|3", space);
    const auto truthful = itemwise_report(p, part, Lambda(1.0));
    CHECK(truthful[0] == Approx(0.3).epsilon(1e-14));
    CHECK(truthful[1] == Approx(0.3).epsilon(1e-14));
    CHECK(truthful[2] == Approx(0.4).epsilon(1e-14));
    CHECK(sum(truthful) == Approx(1.0).epsilon(1e-14));

    // per-bin parameters match the binary closed form bin by bin
    const std::vector<double> ls{0.2, 1.5, -0.4};
    const auto mixed = itemwise_report(p, part, ls);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(mixed[i] == Approx(binary_mu(p.probability(part.bin(i)), ls[i])).epsilon(1e-13));
        const auto binary = erbr_report(p, binary_partition(space, part.bin(i)), Lambda(ls[i]));
        CHECK(mixed[i] == Approx(binary.probs[0]).epsilon(1e-14));
    }
    CHECK_THROWS(itemwise_report(p, part, std::vector<double>{1.0, 1.0}));
}

TEST_CASE("property: itemwise sums for bins below one half") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> below(0.05, 0.95), above(1.05, 3.0);
    for (int t = 0; t < 300; ++t) {
        const Prior prior = spread_prior(rng, 3 + static_cast<std::size_t>(t % 8));
        const Partition part = singletons(prior.space());
        bool all_below = true;
        for (double v : prior.probs()) all_below = all_below && v < 0.5;
        REQUIRE(all_below);
        CHECK(sum(itemwise_report(prior, part, Lambda(below(rng)))) > 1.0);
        CHECK(sum(itemwise_report(prior, part, Lambda(1.0))) == Approx(1.0).epsilon(1e-13));
        CHECK(sum(itemwise_report(prior, part, Lambda(above(rng)))) < 1.0);
    }
}
