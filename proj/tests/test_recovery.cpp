#include <doctest.h>

#include "erbr/error.hpp"
#include "erbr/recovery.hpp"
#include "erbr/reporting.hpp"

#include <cmath>
#include <numeric>
#include <random>

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

// mu_w = pi^l / (pi^l + (1 - pi)^l), written out directly.
double binary_mu(double pi, double l) {
    const double a = std::pow(pi, l), b = std::pow(1.0 - pi, l);
    return a / (a + b);
}

}  // namespace

TEST_CASE("binary report set validation") {
    const auto sp = make_integer_space(0, 2);
    CHECK_THROWS_AS(BinaryReportSet(sp, {0.5, 0.0, 0.3}), DomainError);
    CHECK_THROWS_AS(BinaryReportSet(sp, {0.5, 1.0, 0.3}), DomainError);
    CHECK_THROWS_AS(BinaryReportSet(sp, {0.5, 0.3}), StructuralError);
}

TEST_CASE("simulated binary reports") {
    const auto sp = make_integer_space(0, 2);
    const Prior prior(sp, {0.5, 0.3, 0.2});
    const auto r = simulate_binary_reports(prior, Lambda(0.5));
    CHECK(r.mu[0] == Approx(0.5).epsilon(1e-15));
    CHECK(r.mu[1] == Approx(binary_mu(0.3, 0.5)).epsilon(1e-14));
    CHECK(r.mu[1] == Approx(0.3956439237).epsilon(1e-9));
    CHECK(r.mu[2] == Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("recovery equation") {
    const auto two = make_integer_space(0, 1);
    const BinaryReportSet comp(two, {0.3, 0.7});
    for (double l : {0.01, 0.5, 1.0, 7.0}) CHECK(recovery_equation(comp, l) == Approx(0.0).scale(1.0).epsilon(1e-14));

    const auto sp = make_integer_space(0, 2);
    const BinaryReportSet exact = simulate_binary_reports(Prior(sp, {0.5, 0.3, 0.2}), Lambda(0.5));
    CHECK(std::abs(recovery_equation(exact, 0.5)) <= 1e-12);
    // 0.395618 is a mis-rounded mu_1; it leaves F(0.5) off by about 2.6e-5
    const BinaryReportSet r(sp, {0.5, 0.395618, 1.0 / 3.0});
    CHECK(std::abs(recovery_equation(r, 0.5)) <= 1e-4);
    CHECK(recovery_equation(r, 1.0) == Approx(0.5 + 0.395618 + 1.0 / 3.0 - 1.0).epsilon(1e-12));
    CHECK_THROWS_AS(recovery_equation(r, 0.0), DomainError);

    // limits at the ends of the default scan
    const BinaryReportSet lim(sp, {0.6, 0.5, 0.2});
    CHECK(recovery_equation(lim, 1e-3) == Approx(1.0 + 0.5 - 1.0).epsilon(1e-3));
    CHECK(recovery_equation(lim, 1e3) == Approx(3.0 / 2.0 - 1.0).epsilon(1e-3));
}

TEST_CASE("recover_from_binary") {
    const auto sp = make_integer_space(0, 2);
    const Prior prior(sp, {0.5, 0.3, 0.2});
    const auto res = recover_from_binary(simulate_binary_reports(prior, Lambda(0.5)));
    const auto* ok = std::get_if<RecoveryResult>(&res);
    REQUIRE(ok);
    CHECK(ok->lambda == Approx(0.5).epsilon(1e-9));
    for (std::size_t i = 0; i < 3; ++i) CHECK(ok->prior[i] == Approx(prior[i]).epsilon(1e-9));
    CHECK(ok->sum_residual <= 1e-9);

    const BinaryReportSet flat(make_integer_space(0, 3), std::vector<double>(4, 0.5));
    CHECK(std::holds_alternative<DegenerateReports>(recover_from_binary(flat)));

    // mu = 1/n with n = 4: F runs from -1 to 1, but every implied prior equals 1/n only at one lambda
    const BinaryReportSet third(make_integer_space(0, 2), std::vector<double>(3, 1.0 / 3.0));
    const auto t = recover_from_binary(third);
    CHECK((std::holds_alternative<NoSolution>(t) || std::holds_alternative<RecoveryResult>(t)));

    // all reports above 1/2 with n = 3 never reach F = 0
    const BinaryReportSet high(sp, {0.6, 0.7, 0.8});
    const auto h = recover_from_binary(high);
    REQUIRE(std::holds_alternative<NoSolution>(h));
    CHECK(std::get<NoSolution>(h).f_at_min > 0.0);

    CHECK_THROWS_AS(recover_from_binary(BinaryReportSet(make_integer_space(0, 1), {0.3, 0.7})), StructuralError);
}

TEST_CASE("property: binary recovery round trip") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 3 + trial % 10;
        const auto sp = make_integer_space(0, static_cast<long>(n) - 1);
        const Prior prior(sp, random_simplex(rng, n));
        for (double l : {0.3, 0.7, 1.0, 2.0}) {
            const auto res = recover_from_binary(simulate_binary_reports(prior, Lambda(l)));
            const auto* ok = std::get_if<RecoveryResult>(&res);
            REQUIRE(ok);
            CHECK(std::abs(ok->lambda - l) <= 1e-6);
            for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ok->prior[i] - prior[i]) <= 1e-6);
            CHECK(ok->sum_residual <= 1e-9);
        }
    }
}

TEST_CASE("implied prior at the root sums to one") {
    const auto sp = make_integer_space(0, 4);
    const Prior prior(sp, {0.1, 0.15, 0.2, 0.25, 0.3});
    const auto reports = simulate_binary_reports(prior, Lambda(0.7));
    const auto implied = implied_prior(reports, 0.7);
    CHECK(std::accumulate(implied.begin(), implied.end(), 0.0) == Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 5; ++i) CHECK(implied[i] == Approx(prior[i]).epsilon(1e-12));
}
