#include <doctest.h>

#include "erbr/dataset.hpp"
#include "erbr/error.hpp"
#include "erbr/replication.hpp"
#include "erbr/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

using namespace erbr;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(ERBR_SOURCE_DIR) / "data";

// Noiseless dataset over the standard formats at one lambda.
BeliefDataset synthetic_dataset(const Prior& prior, double lambda, bool with_prior = true) {
    BeliefDataset d;
    d.space = prior.space();
    for (const auto& f : standard_partitions(prior.space())) {
        DatasetFormat df{f.name, f.family, {}};
        for (const auto& p : f.partitions) df.members.push_back({p, erbr_report(prior, p, Lambda(lambda)).probs});
        d.formats.push_back(std::move(df));
    }
    if (with_prior) d.true_prior = prior;
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("erbr_test_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const char* kSmallJson = R"({
  "states": [0, 1, 2],
  "true_prior": {"kind": "explicit", "probs": [0.25, 0.5, 0.25]},
  "formats": [
    {"name": "A", "family": false, "members": [{"bins": [[0], [1, 2]], "empirical": [ROW]}]}
  ]
})";

std::string small_json(const std::string& row) {
    std::string s = kSmallJson;
    s.replace(s.find("ROW"), 3, row);
    return s;
}

}  // namespace

TEST_CASE("binomial prior against enumeration") {
    // count heads over all 2^10 sequences
    std::vector<int> counts(11, 0);
    for (unsigned m = 0; m < 1024u; ++m) ++counts[static_cast<std::size_t>(__builtin_popcount(m))];
    const Prior b = binomial_prior(10, 0.5);
    REQUIRE(b.size() == 11u);
    for (std::size_t k = 0; k <= 10; ++k) CHECK(b[k] == static_cast<double>(counts[k]) / 1024.0);
    CHECK(b[5] == 252.0 / 1024.0);

    const Prior one = binomial_prior(1, 0.5);
    CHECK(one[0] == 0.5);
    CHECK(one[1] == 0.5);
    const Prior two = binomial_prior(2, 0.5);
    CHECK(two[0] == 0.25);
    CHECK(two[1] == 0.5);
    CHECK(two[2] == 0.25);

    // large n goes through lgamma
    const Prior big = binomial_prior(100, 0.3);
    CHECK(std::accumulate(big.probs().begin(), big.probs().end(), 0.0) == Approx(1.0).epsilon(1e-12));
    CHECK(big[30] == Approx(0.0867838647).epsilon(1e-8));

    CHECK_THROWS_AS(binomial_prior(10, 0.0), DomainError);
    CHECK_THROWS_AS(binomial_prior(10, 1.0), DomainError);
    CHECK_THROWS_AS(binomial_prior(make_integer_space(0, 3), 10, 0.5), StructuralError);
}

TEST_CASE("standard partitions") {
    const auto formats = standard_partitions();
    REQUIRE(formats.size() == 4u);
    CHECK(formats[0].name == "P1");
    CHECK(formats[0].partitions.at(0).size() == 11u);
    CHECK(formats[1].partitions.at(0).size() == 5u);
    CHECK(formats[1].partitions.at(0).bin(0) == Event({0, 1, 2, 3}));
    CHECK(formats[2].partitions.at(0).size() == 3u);
    CHECK(formats[2].partitions.at(0).bin(2) == Event({6, 7, 8, 9, 10}));
    CHECK(formats[3].family);
    REQUIRE(formats[3].partitions.size() == 11u);
    const auto& p45 = formats[3].partitions[5];
    CHECK(p45.bin(0) == Event({5}));
    CHECK(p45.bin(1).size() == 10u);
    for (const auto& f : formats) {
        for (const auto& p : f.partitions) CHECK(same_space(p.space(), formats[0].partitions[0].space()));
    }
}

TEST_CASE("loading the bundled fixtures") {
    const BeliefDataset j = load_dataset(kData / "synthetic_coin.json");
    CHECK(j.formats.size() == 4u);
    CHECK(j.record_count() == 14u);
    REQUIRE(j.true_prior);
    CHECK((*j.true_prior)[5] == 252.0 / 1024.0);
    CHECK(j.find_format("P4") != nullptr);
    CHECK(j.find_format("P4")->family);

    // the CSV carries the same formats and numbers, without a prior
    const BeliefDataset c = load_dataset(kData / "synthetic_coin.csv");
    CHECK(c.formats.size() == 4u);
    CHECK(c.record_count() == 14u);
    CHECK_FALSE(c.true_prior);
    for (std::size_t f = 0; f < 4; ++f) {
        REQUIRE(c.formats[f].members.size() == j.formats[f].members.size());
        CHECK(c.formats[f].name == j.formats[f].name);
        for (std::size_t m = 0; m < c.formats[f].members.size(); ++m) {
            CHECK(c.formats[f].members[m].partition == j.formats[f].members[m].partition);
            CHECK(c.formats[f].members[m].empirical == j.formats[f].members[m].empirical);
        }
    }

    // JSON round trip
    const BeliefDataset again = parse_dataset_json(dataset_to_json(j));
    CHECK(again.record_count() == j.record_count());
    CHECK(again.formats[3].members[7].empirical == j.formats[3].members[7].empirical);
    CHECK(again.true_prior->probs() == j.true_prior->probs());
}

TEST_CASE("loader validation") {
    CHECK_NOTHROW(parse_dataset_json(small_json("0.3, 0.7")));
    CHECK_THROWS_AS(parse_dataset_json(small_json("-0.1, 1.1")), ParseError);
    CHECK_THROWS_AS(parse_dataset_json(small_json("0.3")), ParseError);
    CHECK_THROWS_AS(parse_dataset_json(small_json("0.3, 0.8")), ParseError);
    CHECK_THROWS_AS(parse_dataset_json("{\"states\": [0, 1]"), ParseError);

    const BeliefDataset near = parse_dataset_json(small_json("0.300001, 0.7"));
    CHECK(near.diagnostics.size() == 1u);
    const auto& row = near.formats[0].members[0].empirical;
    CHECK(row[0] + row[1] == Approx(1.0).epsilon(1e-15));

    // bins that overlap are not a partition
    std::string bad = small_json("0.3, 0.7");
    bad.replace(bad.find("[[0], [1, 2]]"), 13, "[[0, 1], [1, 2]]");
    CHECK_THROWS_AS(parse_dataset_json(bad), StructuralError);

    try {
        parse_dataset_json(small_json("-0.1, 1.1"));
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("formats[0].members[0].empirical") != std::string::npos);
    }

    const char* csv =
        "format,member,bin,states,empirical\n"
        "# comment\n"
        "A,0,0,0,0.2\n"
        "A,0,1,\"1-2\",0.8\n"
        "B,0,0,0,0.25\n"
        "B,0,1,~0,0.75\n"
        "B,1,0,1,0.5\n"
        "B,1,1,~1,0.5\n";
    const BeliefDataset d = parse_dataset_csv(csv);
    CHECK(d.space->size() == 3u);
    CHECK(d.formats.size() == 2u);
    CHECK_FALSE(d.formats[0].family);
    CHECK(d.formats[1].family);
    CHECK(d.formats[1].members[1].partition.bin(1) == Event({0, 2}));
    CHECK_THROWS_AS(parse_dataset_csv("format,member,bin\nA,0,0\n"), ParseError);
    CHECK_THROWS_AS(parse_dataset_csv("format,member,bin,states,empirical\nA,0,0,0,0.5\nA,0,2,1,0.5\n"), ParseError);
}

TEST_CASE("replicate on noiseless data") {
    const Prior prior = binomial_prior(10, 0.5);
    const BeliefDataset d = synthetic_dataset(prior, 0.69);
    const ReplicationReport r = replicate(d);
    CHECK(r.base_prior == "true");
    CHECK(std::abs(r.lambda_single - 0.69) <= 1e-4);
    CHECK(r.rmse_single <= 1e-10);
    REQUIRE(r.table2.size() == 4u);
    for (const auto& row : r.table2) {
        CHECK(row.rmse_fitted <= 1e-10);
        CHECK(row.rmse_lambda0 > 0.0);
        CHECK(row.rmse_lambda1 > 0.0);
    }
    REQUIRE(r.table3.size() == 4u);
    for (const auto& row : r.table3) {
        CHECK(std::abs(row.lambda_partition - 0.69) <= 1e-4);
        CHECK(row.rmse_partition <= 1e-10);
    }
    REQUIRE(r.recovered);
    CHECK(r.recovered->status == "ok");
    CHECK(r.recovered->lambda == Approx(0.69).epsilon(1e-9));
    for (std::size_t k = 0; k <= 10; ++k) CHECK(std::abs((*r.recovered->prior)[k] - prior[k]) <= 1e-9);
    REQUIRE(r.table4.size() == 4u);
    for (const auto& row : r.table4) {
        REQUIRE(row.recovered_prior);
        CHECK(std::abs(row.recovered_prior->lambda - 0.69) <= 1e-4);
    }

    // figure model columns are closed-form reports
    REQUIRE(r.figures.size() == 4u);
    for (const auto& fig : r.figures) {
        std::map<std::string, std::pair<double, double>> sums;
        for (const auto& row : fig.rows) {
            sums[row.partition].first += row.model;
            sums[row.partition].second += row.model_partition;
            CHECK(row.model == Approx(row.empirical).epsilon(1e-9));
        }
        for (const auto& [p, s] : sums) {
            CHECK(std::abs(s.first - 1.0) <= 1e-12);
            CHECK(std::abs(s.second - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("replicate falls back to the recovered prior") {
    const Prior prior = binomial_prior(10, 0.4);
    const ReplicationReport r = replicate(synthetic_dataset(prior, 1.3, false));
    CHECK(r.base_prior == "recovered");
    CHECK(std::abs(r.lambda_single - 1.3) <= 1e-4);
    for (std::size_t k = 0; k <= 10; ++k) CHECK(r.base_probs[k] == Approx(prior[k]).epsilon(1e-9));

    ReplicationConfig no_recovery;
    no_recovery.recover = false;
    CHECK_THROWS_AS(replicate(synthetic_dataset(prior, 1.3, false), no_recovery), ConfigurationError);
}

TEST_CASE("replicate without a binary family") {
    const Prior prior = binomial_prior(10, 0.5);
    BeliefDataset d = synthetic_dataset(prior, 0.69);
    d.formats.pop_back();
    CHECK_FALSE(find_binary_family(d));
    CHECK_THROWS_AS(replicate(d), ConfigurationError);
    ReplicationConfig c;
    c.recover = false;
    const ReplicationReport r = replicate(d, c);
    CHECK_FALSE(r.recovered);
    CHECK(r.table2.size() == 3u);
}

TEST_CASE("emit_report files and determinism") {
    const ReplicationReport r = replicate(load_dataset(kData / "synthetic_coin.json"));
    TempDir a("emit_a"), b("emit_b");
    const auto files = emit_report(r, a.path);
    CHECK(files.size() == 8u);
    std::size_t figs = 0;
    for (const auto& f : fs::directory_iterator(a.path)) figs += f.path().filename().string().rfind("fig_", 0) == 0;
    CHECK(figs == 4u);
    for (const char* name : {"report.json", "table2.csv", "table3.csv", "table4.csv"}) CHECK(fs::exists(a.path / name));

    const ReplicationReport again = replicate(load_dataset(kData / "synthetic_coin.json"));
    emit_report(again, b.path);
    for (const auto& f : fs::directory_iterator(a.path)) {
        CHECK(slurp(f.path()) == slurp(b.path / f.path().filename()));
    }
    CHECK(report_to_json(r) == report_to_json(again));

    // table2 header and a parsable row
    std::istringstream t2(slurp(a.path / "table2.csv"));
    std::string line;
    std::getline(t2, line);
    CHECK(line == "format,lambda,rmse_fitted,rmse_lambda0,rmse_lambda1");

    ReplicationReport empty = r;
    empty.figures.clear();
    TempDir c("emit_c");
    CHECK(emit_report(empty, c.path).size() == 4u);
    CHECK(fs::exists(c.path / "report.json"));
}

TEST_CASE("property: replicate fits match a fresh single fit on noisy fixture") {
    const BeliefDataset d = load_dataset(kData / "synthetic_coin.json");
    const ReplicationReport r = replicate(d);
    const FitResult direct = fit_lambda_single(fit_rows(d, *d.true_prior));
    CHECK(r.lambda_single == direct.lambda);
    CHECK(r.rmse_single == direct.rmse);
    // the fixture was generated at 0.69 with small noise
    CHECK(std::abs(r.lambda_single - 0.69) <= 0.02);
    for (const auto& row : r.table3) CHECK(row.rmse_partition <= row.rmse_single + 1e-12);
}
