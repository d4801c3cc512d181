#include "erbr/cli.hpp"

#include "erbr/dataset.hpp"
#include "erbr/error.hpp"
#include "erbr/fallacy.hpp"
#include "erbr/identification.hpp"
#include "erbr/notation.hpp"
#include "erbr/replication.hpp"
#include "erbr/reporting.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

namespace erbr::cli {

using nlohmann::ordered_json;

void RunConfig::validate() const {
    if (!(tol > 0.0)) throw ConfigurationError("tol must be > 0");
    if (!(fit.grid.step > 0.0)) throw ConfigurationError("grid.step must be > 0");
    if (!(fit.grid.width_tol > 0.0)) throw ConfigurationError("grid.width_tol must be > 0");
    if (!(fit.grid.lo < fit.grid.hi)) throw ConfigurationError("grid.lo must be below grid.hi");
    if (!(recovery.lambda_min > 0.0 && recovery.lambda_min < recovery.lambda_max)) {
        throw ConfigurationError("recovery range must satisfy 0 < lambda_min < lambda_max");
    }
    if (recovery.grid_points < 2) throw ConfigurationError("recovery.grid_points must be >= 2");
    if (max_cycle_len < 2) throw ConfigurationError("max_cycle_len must be >= 2");
}

namespace {

FamilyAggregation parse_aggregation(const std::string& s) {
    if (s == "pooled") return FamilyAggregation::kPooled;
    if (s == "averaged") return FamilyAggregation::kAveraged;
    throw ConfigurationError("aggregation must be 'pooled' or 'averaged', got '" + s + "'");
}

std::string aggregation_name(FamilyAggregation a) { return a == FamilyAggregation::kPooled ? "pooled" : "averaged"; }

template <class T>
T get_as(const nlohmann::json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigurationError("config field '" + key + "' has the wrong type");
    }
}

void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& item : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; })) {
            throw ConfigurationError("unknown config key '" + where + item.key() + "'");
        }
    }
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text.begin(), json_text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigurationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigurationError("config must be a JSON object");
    check_keys(j, {"seed", "tol", "anchor", "max_cycle_len", "aggregation", "grid", "recovery", "recover", "out_dir"}, "");

    RunConfig c;
    if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j["seed"], "seed");
    if (j.contains("tol")) c.tol = get_as<double>(j["tol"], "tol");
    if (j.contains("anchor")) c.anchor = get_as<std::size_t>(j["anchor"], "anchor");
    if (j.contains("max_cycle_len")) c.max_cycle_len = get_as<int>(j["max_cycle_len"], "max_cycle_len");
    if (j.contains("aggregation")) c.fit.aggregation = parse_aggregation(get_as<std::string>(j["aggregation"], "aggregation"));
    if (j.contains("recover")) c.recover = get_as<bool>(j["recover"], "recover");
    if (j.contains("out_dir")) c.out_dir = get_as<std::string>(j["out_dir"], "out_dir");
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (!g.is_object()) throw ConfigurationError("config field 'grid' must be an object");
        check_keys(g, {"lo", "hi", "step", "width_tol"}, "grid.");
        if (g.contains("lo")) c.fit.grid.lo = get_as<double>(g["lo"], "grid.lo");
        if (g.contains("hi")) c.fit.grid.hi = get_as<double>(g["hi"], "grid.hi");
        if (g.contains("step")) c.fit.grid.step = get_as<double>(g["step"], "grid.step");
        if (g.contains("width_tol")) c.fit.grid.width_tol = get_as<double>(g["width_tol"], "grid.width_tol");
    }
    if (j.contains("recovery")) {
        const auto& r = j["recovery"];
        if (!r.is_object()) throw ConfigurationError("config field 'recovery' must be an object");
        check_keys(r, {"lambda_min", "lambda_max", "grid_points"}, "recovery.");
        if (r.contains("lambda_min")) c.recovery.lambda_min = get_as<double>(r["lambda_min"], "recovery.lambda_min");
        if (r.contains("lambda_max")) c.recovery.lambda_max = get_as<double>(r["lambda_max"], "recovery.lambda_max");
        if (r.contains("grid_points")) c.recovery.grid_points = get_as<int>(r["grid_points"], "recovery.grid_points");
    }
    c.validate();
    return c;
}

namespace {

// ---------------------------------------------------------------------------
// shared plumbing

struct Common {
    bool json = false;
    std::string output;  // "", "json" or "text"
    std::uint64_t seed = 0;
    std::string config_path;
    double tol = 1e-8;
    std::string aggregation;
    double grid_lo = 0.0, grid_hi = 0.0, grid_step = 0.0;
    double lambda_min = 0.0, lambda_max = 0.0;
    bool no_recover = false;
};

std::string read_source(const std::string& path, std::istream& in) {
    if (path == "-") {
        std::stringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

BeliefDataset read_dataset(const std::string& path, std::istream& in) {
    const std::string text = read_source(path, in);
    const bool csv = path.size() > 4 && path.substr(path.size() - 4) == ".csv";
    BeliefDataset ds = csv ? parse_dataset_csv(text) : parse_dataset_json(text);
    if (ds.metadata.empty() && path != "-") ds.metadata = path;
    return ds;
}

std::string real(double v) { return format_real(v); }

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

/// Rebuild a prior on the dataset's own space when the labels agree.
Prior prior_on(const Prior& p, const SpacePtr& space) {
    if (!(*p.space() == *space)) throw StructuralError("prior states do not match the dataset states");
    return Prior(space, p.probs());
}

class Command {
public:
    Command(Io io, const Common& common) : io_(io), common_(common) {}

    bool as_json() const {
        if (common_.output == "json" || common_.json) return true;
        if (common_.output == "text") return false;
        return !io_.interactive;
    }

    RunConfig config(const CLI::App& sub) const {
        RunConfig c;
        if (!common_.config_path.empty()) c = parse_run_config(read_source(common_.config_path, io_.in));
        auto given = [&](const char* name) {
            try {
                return sub.get_option(name)->count() > 0;
            } catch (const CLI::OptionNotFound&) {
                return false;
            }
        };
        if (given("--seed")) c.seed = common_.seed;
        if (given("--tol")) c.tol = common_.tol;
        if (given("--aggregation")) c.fit.aggregation = parse_aggregation(common_.aggregation);
        if (given("--lambda-lo")) c.fit.grid.lo = common_.grid_lo;
        if (given("--lambda-hi")) c.fit.grid.hi = common_.grid_hi;
        if (given("--lambda-step")) c.fit.grid.step = common_.grid_step;
        if (given("--recovery-min")) c.recovery.lambda_min = common_.lambda_min;
        if (given("--recovery-max")) c.recovery.lambda_max = common_.lambda_max;
        if (given("--no-recover")) c.recover = false;
        c.validate();
        return c;
    }

    void emit(const ordered_json& j) const { io_.out << j.dump(2) << "\n"; }
    std::ostream& out() const { return io_.out; }
    std::istream& in() const { return io_.in; }

private:
    Io io_;
    const Common& common_;
};

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
    std::string prior;
    std::string from;
    std::string partition;
    std::optional<double> lambda;
    bool oracle = false;
    std::string mode = "closed";
};

int cmd_report(const Command& cmd, const RunConfig& rc, const ReportArgs& a) {
    std::optional<Prior> prior;
    double lambda = 0.0;
    if (!a.from.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_source(a.from, cmd.in()));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("--from: ") + e.what());
        }
        if (!j.contains("states") || !j.contains("prior")) throw ParseError("--from input has no identified prior", 0, "prior");
        std::vector<std::string> labels;
        for (const auto& s : j["states"]) labels.push_back(s.is_string() ? s.get<std::string>() : s.dump());
        prior = Prior(make_space(labels), j["prior"].get<std::vector<double>>());
        if (j.contains("lambda")) lambda = j["lambda"].get<double>();
    } else if (!a.prior.empty()) {
        prior = parse_prior(a.prior);
    } else {
        throw ConfigurationError("report needs --prior or --from");
    }
    if (a.lambda) {
        lambda = *a.lambda;
    } else if (a.from.empty()) {
        throw ConfigurationError("report needs --lambda");
    }
    const Partition partition = parse_partition(a.partition, prior->space());

    std::vector<double> probs;
    if (a.mode == "itemwise") {
        probs = itemwise_report(*prior, partition, Lambda(lambda));
    } else if (a.mode == "closed") {
        probs = erbr_report(*prior, partition, Lambda(lambda)).probs;
    } else {
        throw ConfigurationError("--mode must be 'closed' or 'itemwise'");
    }
    double sum = 0.0;
    for (double p : probs) sum += p;

    std::optional<VariationalResult> oracle;
    double deviation = 0.0;
    if (a.oracle) {
        const auto base = induced_prior(*prior, partition);
        if (a.mode == "itemwise") {
            for (std::size_t i = 0; i < base.size(); ++i) {
                const double pair[] = {base[i], 1.0 - base[i]};
                const auto v = variational_solve(pair, Lambda(lambda), rc.tol * 1e-2);
                deviation = std::max(deviation, std::abs(v.probs[0] - probs[i]));
            }
        } else {
            oracle = variational_solve(base, Lambda(lambda), rc.tol * 1e-2);
            for (std::size_t i = 0; i < probs.size(); ++i) deviation = std::max(deviation, std::abs(oracle->probs[i] - probs[i]));
        }
    }

    if (cmd.as_json()) {
        ordered_json j{{"command", "report"},
                       {"seed", rc.seed},
                       {"mode", a.mode},
                       {"lambda", lambda},
                       {"partition", format_partition(partition)}};
        ordered_json bins = ordered_json::array();
        for (const Event& b : partition.bins()) bins.push_back(format_bin(b, *partition.space()));
        j["bins"] = std::move(bins);
        j["probs"] = probs;
        j["sum"] = sum;
        if (a.oracle) j["oracle_max_deviation"] = deviation;
        cmd.emit(j);
    } else {
        cmd.out() << "seed: " << rc.seed << "\nlambda: " << real(lambda) << "\nmode: " << a.mode << "\n";
        for (std::size_t i = 0; i < partition.size(); ++i) {
            cmd.out() << "  " << pad(format_bin(partition.bin(i), *partition.space()), 12) << real(probs[i]) << "\n";
        }
        cmd.out() << "sum: " << real(sum) << "\n";
        if (a.oracle) cmd.out() << "oracle max deviation: " << real(deviation) << "\n";
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------
// fit and replicate

void print_tables(const Command& cmd, const ReplicationReport& r) {
    std::ostream& o = cmd.out();
    o << "seed: " << r.seed << "\nbase prior: " << r.base_prior << "\n";
    o << "single lambda: " << fixed(r.lambda_single, 4) << "  (mean RMSE " << fixed(r.rmse_single, 4) << ", "
      << r.weighting << ")\n\n";
    o << pad("format", 10) << pad("RMSE@fit", 12) << pad("RMSE@0", 12) << "RMSE@1\n";
    for (const auto& t : r.table2) {
        o << pad(t.format, 10) << pad(fixed(t.rmse_fitted, 4), 12) << pad(fixed(t.rmse_lambda0, 4), 12)
          << fixed(t.rmse_lambda1, 4) << "\n";
    }
    o << "\n" << pad("format", 10) << pad("lambda_P", 12) << pad("RMSE_P", 12) << "RMSE(single)\n";
    for (const auto& t : r.table3) {
        o << pad(t.format, 10) << pad(fixed(t.lambda_partition, 4), 12) << pad(fixed(t.rmse_partition, 4), 12)
          << fixed(t.rmse_single, 4) << (t.note.empty() ? "" : "  (" + t.note + ")") << "\n";
    }
    if (r.recovered) {
        o << "\nrecovery: " << r.recovered->status;
        if (r.recovered->prior) o << ", lambda* = " << fixed(r.recovered->lambda, 4);
        o << "\n";
        if (!r.table4.empty()) {
            o << pad("format", 10) << pad("lambda(true)", 14) << pad("RMSE(true)", 12) << pad("lambda(rec)", 14)
              << "RMSE(rec)\n";
            auto cell = [](const std::optional<FormatFit>& f, bool lambda, std::size_t w) {
                return pad(f ? fixed(lambda ? f->lambda : f->rmse, 4) : "-", w);
            };
            for (const auto& t : r.table4) {
                o << pad(t.format, 10) << cell(t.true_prior, true, 14) << cell(t.true_prior, false, 12)
                  << cell(t.recovered_prior, true, 14) << cell(t.recovered_prior, false, 0) << "\n";
            }
        }
    }
    for (const auto& d : r.diagnostics) o << "note: " << d << "\n";
}

int cmd_fit(const Command& cmd, RunConfig rc, const std::string& data, const std::string& prior_spec) {
    BeliefDataset ds = read_dataset(data, cmd.in());
    if (!prior_spec.empty()) {
        ds.true_prior = prior_on(parse_prior(prior_spec), ds.space);
        ds.prior_source.reset();
    }
    if (!ds.true_prior) throw ConfigurationError("fit needs a prior: the dataset has none, pass --prior");
    ReplicationConfig config{rc.fit, rc.recovery, false, rc.seed};
    const ReplicationReport r = replicate(ds, config);
    if (cmd.as_json()) {
        ordered_json j{{"command", "fit"},
                       {"seed", rc.seed},
                       {"aggregation", aggregation_name(rc.fit.aggregation)},
                       {"lambda", r.lambda_single},
                       {"rmse", r.rmse_single}};
        ordered_json formats = ordered_json::array();
        for (std::size_t k = 0; k < r.table2.size(); ++k) {
            formats.push_back({{"format", r.table2[k].format},
                               {"rmse_single", r.table2[k].rmse_fitted},
                               {"lambda_partition", r.table3[k].lambda_partition},
                               {"rmse_partition", r.table3[k].rmse_partition}});
        }
        j["formats"] = std::move(formats);
        j["diagnostics"] = r.diagnostics;
        cmd.emit(j);
    } else {
        print_tables(cmd, r);
    }
    return kSuccess;
}

int cmd_replicate(const Command& cmd, RunConfig rc, const std::string& data, std::string out_dir) {
    const BeliefDataset ds = read_dataset(data, cmd.in());
    if (out_dir.empty()) out_dir = rc.out_dir;
    if (out_dir.empty()) {
        if (const char* env = std::getenv("ERBR_OUT_DIR")) out_dir = env;
    }
    if (out_dir.empty()) out_dir = "replication";
    ReplicationConfig config{rc.fit, rc.recovery, rc.recover, rc.seed};
    const ReplicationReport r = replicate(ds, config);
    const auto files = emit_report(r, out_dir);
    if (cmd.as_json()) {
        ordered_json j = ordered_json::parse(report_to_json(r));
        ordered_json written = ordered_json::array();
        for (const auto& f : files) written.push_back(f.string());
        ordered_json wrapper{{"command", "replicate"}, {"seed", rc.seed}, {"files", written}, {"report", std::move(j)}};
        cmd.emit(wrapper);
    } else {
        print_tables(cmd, r);
        cmd.out() << "\nwrote " << files.size() << " files to " << out_dir << "\n";
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------
// recover

int cmd_recover(const Command& cmd, const RunConfig& rc, const std::string& data, const std::string& mu_list) {
    std::optional<BinaryReportSet> reports;
    if (!data.empty()) {
        const BeliefDataset ds = read_dataset(data, cmd.in());
        const auto family = find_binary_family(ds);
        if (!family) throw ConfigurationError("dataset has no binary family {w}|~w covering every state");
        reports = binary_reports(ds, *family);
    } else if (!mu_list.empty()) {
        std::vector<double> mu;
        std::stringstream ss(mu_list);
        std::string item;
        while (std::getline(ss, item, ',')) {
            char* end = nullptr;
            const double v = std::strtod(item.c_str(), &end);
            if (item.empty() || *end != '\0') throw ParseError("invalid number '" + item + "' in --mu");
            mu.push_back(v);
        }
        if (mu.size() < 2) throw ParseError("--mu needs at least two values");
        auto space = make_integer_space(0, static_cast<long>(mu.size()) - 1);
        reports = BinaryReportSet(std::move(space), std::move(mu));
    } else {
        throw ConfigurationError("recover needs --data or --mu");
    }

    const BinaryRecovery result = recover_from_binary(*reports, rc.recovery);
    ordered_json j{{"command", "recover"}, {"seed", rc.seed}};
    int code = kSuccess;
    if (const auto* ok = std::get_if<RecoveryResult>(&result)) {
        j["result"] = "ok";
        j["lambda"] = ok->lambda;
        j["states"] = ok->prior.space()->labels();
        j["prior"] = ok->prior.probs();
        j["roots"] = ok->roots_found;
        j["sum_residual"] = ok->sum_residual;
    } else if (const auto* none = std::get_if<NoSolution>(&result)) {
        j["result"] = "no_solution";
        j["f_at_min"] = none->f_at_min;
        j["f_at_max"] = none->f_at_max;
        code = kModelInconsistent;
    } else {
        j["result"] = "degenerate";
        j["reason"] = "every report is 1/2";
        code = kModelInconsistent;
    }
    if (cmd.as_json()) {
        cmd.emit(j);
    } else {
        cmd.out() << "seed: " << rc.seed << "\nresult: " << j["result"].get<std::string>() << "\n";
        if (const auto* ok = std::get_if<RecoveryResult>(&result)) {
            cmd.out() << "lambda: " << real(ok->lambda) << "\n";
            if (ok->multiple_roots()) cmd.out() << "roots: " << ok->roots_found.size() << " (kept the one closest to 1)\n";
            for (std::size_t i = 0; i < ok->prior.size(); ++i) {
                cmd.out() << "  " << pad(ok->prior.space()->label(i), 8) << real(ok->prior[i]) << "\n";
            }
        }
    }
    return code;
}

// ---------------------------------------------------------------------------
// identify

int cmd_identify(const Command& cmd, const RunConfig& rc, const std::string& data) {
    const BeliefDataset ds = read_dataset(data, cmd.in());
    BeliefCollection coll(ds.space);
    for (const auto& f : ds.formats) {
        for (const auto& m : f.members) coll.add(BeliefReport(m.partition, m.empirical));
    }
    if (rc.anchor >= ds.space->size()) throw ConfigurationError("anchor is not a state index");
    const PipelineOutcome outcome = full_pipeline(coll, rc.tol, PipelineOptions{rc.anchor, rc.max_cycle_len, rc.seed});

    ordered_json j{{"command", "identify"}, {"seed", rc.seed}, {"tol", rc.tol}, {"records", coll.size()}};
    int code = kModelInconsistent;
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, ErbrIdentification>) {
                j["result"] = "erbr";
                j["lambda"] = r.lambda;
                j["alpha"] = r.alpha;
                j["states"] = r.prior.space()->labels();
                j["prior"] = r.prior.probs();
                j["residual"] = r.residual;
                j["pairs_checked"] = r.pairs_checked;
                code = kSuccess;
            } else if constexpr (std::is_same_v<T, UniformDegenerate>) {
                j["result"] = "uniform_degenerate";
                j["lambda"] = 0.0;
                j["states"] = ds.space->labels();
                j["prior"] = Prior::uniform(ds.space).probs();
                j["note"] = "lambda = 0 reveals nothing about the prior; a uniform placeholder is given";
                code = kSuccess;
            } else if constexpr (std::is_same_v<T, NotErbr>) {
                j["result"] = "not_erbr";
                j["reason"] = r.reason;
                j["residual"] = r.residual;
                if (r.worst_pair) {
                    j["worst_pair"] = {describe(r.worst_pair->first, *ds.space), describe(r.worst_pair->second, *ds.space)};
                }
            } else if constexpr (std::is_same_v<T, RegularityFailure>) {
                j["result"] = "regularity_failure";
                j["violations"] = r.detail.violations.size();
            } else if constexpr (std::is_same_v<T, CyclicalFailure>) {
                j["result"] = "cyclical_failure";
                j["cycles_checked"] = r.detail.cycles_checked;
                if (r.detail.worst) j["worst_log_product"] = r.detail.worst->log_product;
            } else {
                j["result"] = "support_inconsistency";
                j["reason"] = r.message;
                j["discrepancy"] = r.discrepancy;
            }
        },
        outcome);

    if (cmd.as_json()) {
        cmd.emit(j);
    } else {
        cmd.out() << "seed: " << rc.seed << "\nresult: " << j["result"].get<std::string>() << "\n";
        if (j.contains("lambda")) cmd.out() << "lambda: " << real(j["lambda"].get<double>()) << "\n";
        if (j.contains("reason")) cmd.out() << "reason: " << j["reason"].get<std::string>() << "\n";
        if (const auto* id = std::get_if<ErbrIdentification>(&outcome)) {
            cmd.out() << "residual: " << real(id->residual) << "\n";
            for (std::size_t i = 0; i < id->prior.size(); ++i) {
                cmd.out() << "  " << pad(id->prior.space()->label(i), 8) << real(id->prior[i]) << "\n";
            }
        }
    }
    return code;
}

// ---------------------------------------------------------------------------
// check-fallacy

struct FallacyArgs {
    std::optional<double> pi_B, pi_C;
    std::string prior, event_B, event_C;
    double lambda_B = 1.0, lambda_C = 1.0;
};

int cmd_check_fallacy(const Command& cmd, const RunConfig& rc, const FallacyArgs& a) {
    std::optional<EventPair> pair;
    if (!a.prior.empty()) {
        const Prior prior = parse_prior(a.prior);
        if (a.event_B.empty() || a.event_C.empty()) throw ConfigurationError("--prior needs --B and --C");
        pair = EventPair::from_events(prior, parse_bin(a.event_B, *prior.space()), parse_bin(a.event_C, *prior.space()),
                                      a.lambda_B, a.lambda_C);
    } else if (a.pi_B && a.pi_C) {
        pair = EventPair(*a.pi_B, *a.pi_C, a.lambda_B, a.lambda_C);
    } else {
        throw ConfigurationError("check-fallacy needs --piB and --piC, or --prior with --B and --C");
    }
    const Verdict v = conjunction_condition(*pair);
    const LambdaRegion region = conjunction_lambda_region(pair->pi_B, pair->pi_C, pair->lambda_C);
    auto report = [](double pi, double l) {
        const double base[] = {pi, 1.0 - pi};
        return reported_beliefs(base, Lambda(l))[0];
    };
    const double mu_B = report(pair->pi_B, pair->lambda_B);
    const double mu_C = report(pair->pi_C, pair->lambda_C);
    const double lhs = pair->lambda_B * (std::log(pair->pi_B) - std::log1p(-pair->pi_B));
    const double rhs = pair->lambda_C * (std::log(pair->pi_C) - std::log1p(-pair->pi_C));

    if (cmd.as_json()) {
        ordered_json j{{"command", "check-fallacy"}, {"seed", rc.seed}, {"pi_B", pair->pi_B}, {"pi_C", pair->pi_C},
                       {"lambda_B", pair->lambda_B}, {"lambda_C", pair->lambda_C}};
        if (v == Verdict::kBoundary) {
            j["fallacy"] = "boundary";
        } else {
            j["fallacy"] = v == Verdict::kHolds;
        }
        j["lhs"] = lhs;
        j["rhs"] = rhs;
        j["mu_B"] = mu_B;
        j["mu_C"] = mu_C;
        j["lambda_B_region"] = region.describe();
        j["requires_negative"] = region.requires_negative;
        j["straddles_half"] = region.straddles_half;
        cmd.emit(j);
    } else {
        cmd.out() << "fallacy: " << to_string(v) << "\n"
                  << "seed: " << rc.seed << "\n"
                  << "lambda_B*logit(pi_B) = " << real(lhs) << "\n"
                  << "lambda_C*logit(pi_C) = " << real(rhs) << "\n"
                  << "mu_B = " << real(mu_B) << ", mu_C = " << real(mu_C) << "\n"
                  << "fallacy region at this lambda_C: " << region.describe() << "\n";
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string design = "standard";
    std::string prior = "binomial:10:0.5";
    double lambda = 1.0;
    std::string lambda_map;
    double noise = 0.0;
    std::size_t anchor = 0;
};

std::map<std::string, double> parse_lambda_map(const std::string& text) {
    std::map<std::string, double> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("--lambda-map entries must be FORMAT=VALUE");
        char* end = nullptr;
        const std::string value = item.substr(eq + 1);
        const double v = std::strtod(value.c_str(), &end);
        if (value.empty() || *end != '\0') throw ParseError("invalid number '" + value + "' in --lambda-map");
        out[item.substr(0, eq)] = v;
    }
    return out;
}

int cmd_simulate(const Command& cmd, const RunConfig& rc, const SimulateArgs& a) {
    if (a.noise < 0.0) throw ConfigurationError("--noise must be >= 0");
    const Prior prior = parse_prior(a.prior);
    const SpacePtr& space = prior.space();
    const auto lambdas = parse_lambda_map(a.lambda_map);

    std::vector<PartitionFormat> formats;
    if (a.design == "standard") {
        formats = standard_partitions(space);
    } else if (a.design == "binary") {
        PartitionFormat fam{"binary", true, {}};
        for (std::size_t w = 0; w < space->size(); ++w) fam.partitions.push_back(binary_partition(space, Event::singleton(w)));
        formats.push_back(std::move(fam));
    } else if (a.design == "identification") {
        if (a.anchor >= space->size()) throw ConfigurationError("--anchor is not a state index");
        const auto parts = construction_partitions(space, a.anchor);
        for (std::size_t i = 0; i < parts.size(); ++i) formats.push_back({"C" + std::to_string(i), false, {parts[i]}});
    } else {
        throw ConfigurationError("--design must be identification, standard or binary");
    }
    for (const auto& [name, value] : lambdas) {
        if (std::none_of(formats.begin(), formats.end(), [&](const PartitionFormat& f) { return f.name == name; })) {
            throw ConfigurationError("--lambda-map names unknown format '" + name + "'");
        }
    }

    std::mt19937_64 rng(rc.seed);
    std::normal_distribution<double> gauss(0.0, a.noise > 0.0 ? a.noise : 1.0);

    BeliefDataset ds;
    ds.space = space;
    ds.true_prior = prior;
    for (const auto& f : formats) {
        const auto it = lambdas.find(f.name);
        const double lambda = it == lambdas.end() ? a.lambda : it->second;
        DatasetFormat df{f.name, f.family, {}};
        for (const Partition& p : f.partitions) {
            std::vector<double> mu = erbr_report(prior, p, Lambda(lambda)).probs;
            if (a.noise > 0.0) {
                double sum = 0.0;
                for (double& v : mu) {
                    v = std::clamp(v + gauss(rng), 1e-6, 1.0);
                    sum += v;
                }
                for (double& v : mu) v /= sum;
            }
            df.members.push_back({p, std::move(mu)});
        }
        ds.formats.push_back(std::move(df));
    }

    std::string meta = "simulated design=" + a.design + " prior=" + a.prior + " lambda=" + real(a.lambda);
    if (!a.lambda_map.empty()) meta += " lambda_map=" + a.lambda_map;
    meta += " noise=" + real(a.noise) + " seed=" + std::to_string(rc.seed);
    ds.metadata = meta;
    const PriorSource src = [&] {
        PriorSource s;
        const std::string spec = a.prior;
        if (spec.rfind("binomial:", 0) == 0) {
            s.kind = PriorSource::Kind::kBinomial;
            const auto c2 = spec.find(':', 9);
            s.n = std::stoi(spec.substr(9, c2 - 9));
            s.p = std::strtod(spec.substr(c2 + 1).c_str(), nullptr);
        }
        return s;
    }();
    ds.prior_source = src;

    cmd.out() << dataset_to_json(ds);
    return kSuccess;
}

void add_common(CLI::App* sub, Common& c, bool fitting, bool recovery) {
    sub->add_flag("--json", c.json, "Write JSON (the default when stdout is not a terminal)");
    sub->add_option("--output", c.output, "Output style")->check(CLI::IsMember({"json", "text"}));
    sub->add_option("--seed", c.seed, "Seed, echoed in the output");
    sub->add_option("--config", c.config_path, "JSON config file; flags override it");
    sub->add_option("--tol", c.tol, "Tolerance");
    if (fitting) {
        sub->add_option("--aggregation", c.aggregation, "pooled or averaged RMSE within multi-partition formats");
        sub->add_option("--lambda-lo", c.grid_lo, "Lower end of the lambda search grid");
        sub->add_option("--lambda-hi", c.grid_hi, "Upper end of the lambda search grid");
        sub->add_option("--lambda-step", c.grid_step, "Grid step");
    }
    if (recovery) {
        sub->add_option("--recovery-min", c.lambda_min, "Smallest lambda scanned by binary recovery");
        sub->add_option("--recovery-max", c.lambda_max, "Largest lambda scanned by binary recovery");
    }
}

}  // namespace

int run(const std::vector<std::string>& args, Io io) {
    CLI::App app{"Entropy regularized belief reporting: simulate, fit, recover and diagnose reported beliefs", "erbr"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every command");

    Common common;

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Reported beliefs for a prior, partition and lambda");
    add_common(report, common, false, false);
    report->add_option("--prior", report_args.prior, "binomial:N:P, uniform:N or explicit:p0,p1,...");
    report->add_option("--from", report_args.from, "Identify output to take the prior and lambda from ('-' for stdin)");
    report->add_option("--partition", report_args.partition, "Bins such as \"0-4|5|6-10\"")->required();
    report->add_option("--lambda", report_args.lambda, "Regularization parameter");
    report->add_flag("--oracle", report_args.oracle, "Cross-check against the numerical optimizer");
    report->add_option("--mode", report_args.mode, "closed or itemwise")->check(CLI::IsMember({"closed", "itemwise"}));

    std::string data, prior_spec, out_dir, mu_list;
    auto* fit = app.add_subcommand("fit", "Fit lambda to a dataset");
    add_common(fit, common, true, false);
    fit->add_option("--data", data, "Dataset file (.json or .csv, '-' for stdin)")->required();
    fit->add_option("--prior", prior_spec, "Prior to fit against instead of the dataset's own");

    auto* recover = app.add_subcommand("recover", "Recover the prior and lambda from binary reports");
    add_common(recover, common, false, true);
    recover->add_option("--data", data, "Dataset with a binary family");
    recover->add_option("--mu", mu_list, "Reports mu_w for {w}|~w, comma separated");

    std::size_t anchor = 0;
    int max_cycle_len = 4;
    auto* identify = app.add_subcommand("identify", "Test a collection of reports and identify (prior, lambda)");
    add_common(identify, common, false, false);
    std::string identify_data = "-";
    identify->add_option("--data", identify_data, "Dataset file ('-' for stdin)");
    auto* anchor_opt = identify->add_option("--anchor", anchor, "Index of the reference state");
    auto* cycle_opt = identify->add_option("--max-cycle-len", max_cycle_len, "Longest cycle checked");

    FallacyArgs fallacy_args;
    auto* fallacy = app.add_subcommand("check-fallacy", "Conjunction fallacy condition for nested events");
    add_common(fallacy, common, false, false);
    fallacy->add_option("--piB", fallacy_args.pi_B, "Prior probability of the subset event");
    fallacy->add_option("--piC", fallacy_args.pi_C, "Prior probability of the superset event");
    fallacy->add_option("--lambdaB", fallacy_args.lambda_B, "Parameter on {B, B^c}");
    fallacy->add_option("--lambdaC", fallacy_args.lambda_C, "Parameter on {C, C^c}");
    fallacy->add_option("--prior", fallacy_args.prior, "Prior, with --B and --C as events");
    fallacy->add_option("--B", fallacy_args.event_B, "Subset event, e.g. \"5\"");
    fallacy->add_option("--C", fallacy_args.event_C, "Superset event, e.g. \"4-6\"");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Generate a dataset from a prior and lambda");
    add_common(simulate, common, false, false);
    simulate->add_option("--design", sim_args.design, "identification, standard or binary")
        ->check(CLI::IsMember({"identification", "standard", "binary"}));
    simulate->add_option("--prior", sim_args.prior, "Prior specification");
    simulate->add_option("--lambda", sim_args.lambda, "Parameter for every format");
    simulate->add_option("--lambda-map", sim_args.lambda_map, "Per-format parameters, e.g. P1=0.8,P2=2");
    simulate->add_option("--noise", sim_args.noise, "Standard deviation of additive Gaussian noise");
    simulate->add_option("--anchor", sim_args.anchor, "Reference state for the identification design");

    auto* replicate_cmd = app.add_subcommand("replicate", "Full fitting pipeline with report files");
    add_common(replicate_cmd, common, true, true);
    replicate_cmd->add_option("--data", data, "Dataset file")->required();
    replicate_cmd->add_option("--out", out_dir, "Output directory (default: $ERBR_OUT_DIR, then ./replication)");
    replicate_cmd->add_flag("--no-recover", common.no_recover, "Skip binary recovery");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, io.out, io.err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, io.out, io.err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, io.out, io.err);
        return kInputError;
    }

    const Command cmd(io, common);
    try {
        CLI::App* sub = app.get_subcommands().front();
        RunConfig rc = cmd.config(*sub);
        if (sub == report) return cmd_report(cmd, rc, report_args);
        if (sub == fit) return cmd_fit(cmd, rc, data, prior_spec);
        if (sub == recover) return cmd_recover(cmd, rc, data, mu_list);
        if (sub == identify) {
            if (anchor_opt->count()) rc.anchor = anchor;
            if (cycle_opt->count()) rc.max_cycle_len = max_cycle_len;
            rc.validate();
            return cmd_identify(cmd, rc, identify_data);
        }
        if (sub == fallacy) return cmd_check_fallacy(cmd, rc, fallacy_args);
        if (sub == simulate) return cmd_simulate(cmd, rc, sim_args);
        if (sub == replicate_cmd) return cmd_replicate(cmd, rc, data, out_dir);
    } catch (const ParseError& e) {
        io.err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const MissingDataError& e) {
        io.err << "error: " << e.what() << " (needs partition " << e.needed_partition() << ")\n";
        return kInputError;
    } catch (const ConsistencyError& e) {
        io.err << "inconsistent: " << e.what() << "\n";
        return kModelInconsistent;
    } catch (const NoExactFit& e) {
        io.err << "inconsistent: " << e.what() << "\n";
        return kModelInconsistent;
    } catch (const ConvergenceError& e) {
        io.err << "error: " << e.what() << " (residual " << real(e.residual()) << ")\n";
        return kModelInconsistent;
    } catch (const Error& e) {
        io.err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

}  // namespace erbr::cli
