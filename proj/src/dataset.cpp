#include "erbr/dataset.hpp"

#include "erbr/error.hpp"
#include "erbr/notation.hpp"
#include "erbr/reporting.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace erbr {

using nlohmann::json;

Prior binomial_prior(const SpacePtr& space, int n, double p) {
    if (n < 1) throw DomainError("binomial_prior: n must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("binomial_prior: p must lie strictly inside (0, 1)");
    if (space->size() != static_cast<std::size_t>(n) + 1) {
        throw StructuralError("binomial_prior: space must have n + 1 states");
    }
    std::vector<double> probs(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        if (n <= 60) {
            // C(n, k) is exact in double for n <= 60 when built this way.
            double c = 1.0;
            for (int j = 1; j <= std::min(k, n - k); ++j) c = c * (n - std::min(k, n - k) + j) / j;
            probs[static_cast<std::size_t>(k)] = c * std::pow(p, k) * std::pow(1.0 - p, n - k);
        } else {
            const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
            probs[static_cast<std::size_t>(k)] = std::exp(lc + k * std::log(p) + (n - k) * std::log1p(-p));
        }
    }
    return Prior(space, std::move(probs));
}

Prior binomial_prior(int n, double p) {
    if (n < 1) throw DomainError("binomial_prior: n must be >= 1");
    return binomial_prior(make_integer_space(0, n), n, p);
}

std::vector<PartitionFormat> standard_partitions(const SpacePtr& space) {
    if (space->size() != 11) throw StructuralError("standard_partitions: need the 11-state space 0..10");
    std::vector<PartitionFormat> out;
    out.push_back({"P1", false, {parse_partition("0|1|2|3|4|5|6|7|8|9|10", space)}});
    out.push_back({"P2", false, {parse_partition("0-3|4|5|6|7-10", space)}});
    out.push_back({"P3", false, {parse_partition("0-4|5|6-10", space)}});
    PartitionFormat family{"P4", true, {}};
    for (int k = 0; k <= 10; ++k) {
        family.partitions.push_back(parse_partition(std::to_string(k) + "|~" + std::to_string(k), space));
    }
    out.push_back(std::move(family));
    return out;
}

std::vector<PartitionFormat> standard_partitions() { return standard_partitions(make_integer_space(0, 10)); }

std::size_t BeliefDataset::record_count() const {
    std::size_t n = 0;
    for (const auto& f : formats) n += f.members.size();
    return n;
}

const DatasetFormat* BeliefDataset::find_format(const std::string& name) const {
    for (const auto& f : formats) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

std::string member_label(const DatasetFormat& format, std::size_t index) {
    if (format.members.size() == 1) return format.name;
    return format.name + "[" + std::to_string(index) + "]";
}

std::vector<FitRow> fit_rows(const DatasetFormat& format, const Prior& prior) {
    std::vector<FitRow> rows;
    for (std::size_t i = 0; i < format.members.size(); ++i) {
        const auto& m = format.members[i];
        rows.push_back({induced_prior(prior, m.partition), m.empirical, format.name, member_label(format, i)});
    }
    return rows;
}

std::vector<FitRow> fit_rows(const BeliefDataset& dataset, const Prior& prior) {
    std::vector<FitRow> rows;
    for (const auto& f : dataset.formats) {
        auto part = fit_rows(f, prior);
        rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return rows;
}

// ---------------------------------------------------------------------------

namespace {

void check_empirical(std::vector<double>& values, const std::string& where, std::size_t line,
                     const LoadOptions& options, std::vector<std::string>& diagnostics) {
    double sum = 0.0;
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ParseError("empirical value " + format_real(v) + " outside [0, 1]", line, where);
        }
        sum += v;
    }
    const double dev = std::abs(sum - 1.0);
    // A small slack absorbs the binary rounding of values such as 1.000001.
    if (dev > options.sum_tolerance + 1e-12) {
        throw ParseError("empirical values sum to " + format_real(sum) + ", beyond tolerance", line, where);
    }
    if (dev > 1e-12) {
        for (double& v : values) v /= sum;
        diagnostics.push_back("renormalized " + where + " (sum was " + format_real(sum) + ")");
    }
}

std::string label_of(const json& j, const std::string& where) {
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    if (j.is_string()) return j.get<std::string>();
    throw ParseError("state labels must be integers or strings", 0, where);
}

Event bin_of(const json& j, const StateSpace& space, const std::string& where) {
    try {
        if (j.is_string()) return parse_bin(j.get<std::string>(), space);
        if (j.is_array()) {
            std::vector<std::size_t> states;
            for (const auto& item : j) {
                const std::string label = label_of(item, where);
                auto idx = space.index_of(label);
                if (!idx) throw ParseError("unknown state '" + label + "'", 0, where);
                states.push_back(*idx);
            }
            return Event(std::move(states));
        }
    } catch (const ParseError& e) {
        if (!e.field().empty()) throw;
        throw ParseError(e.message(), 0, where);
    }
    throw ParseError("bin must be an array of labels or a range string", 0, where);
}

template <class T>
T field_as(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'", 0, where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string("field '") + key + "' has the wrong type", 0, where + "." + key);
    }
}

}  // namespace

BeliefDataset parse_dataset_json(std::string_view text, const LoadOptions& options) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // Report the line of the offending byte.
        const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
        const std::size_t line = 1 + static_cast<std::size_t>(std::count(upto.begin(), upto.end(), '\n'));
        throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    if (!root.is_object()) throw ParseError("dataset must be a JSON object");

    BeliefDataset ds;
    if (!root.contains("states") || !root["states"].is_array()) throw ParseError("missing 'states' array", 0, "states");
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < root["states"].size(); ++i) {
        labels.push_back(label_of(root["states"][i], "states[" + std::to_string(i) + "]"));
    }
    ds.space = make_space(std::move(labels));

    if (root.contains("metadata")) {
        ds.metadata = root["metadata"].is_string() ? root["metadata"].get<std::string>() : root["metadata"].dump();
    }

    if (root.contains("true_prior") && !root["true_prior"].is_null()) {
        const json& tp = root["true_prior"];
        const std::string kind = field_as<std::string>(tp, "kind", "true_prior");
        if (kind == "binomial") {
            PriorSource src{PriorSource::Kind::kBinomial, field_as<int>(tp, "n", "true_prior"),
                            field_as<double>(tp, "p", "true_prior")};
            ds.true_prior = binomial_prior(ds.space, src.n, src.p);
            ds.prior_source = src;
        } else if (kind == "explicit") {
            ds.true_prior = Prior(ds.space, field_as<std::vector<double>>(tp, "probs", "true_prior"));
            ds.prior_source = PriorSource{};
        } else {
            throw ParseError("unknown prior kind '" + kind + "'", 0, "true_prior.kind");
        }
    }

    if (!root.contains("formats") || !root["formats"].is_array()) throw ParseError("missing 'formats' array", 0, "formats");
    std::set<std::string> names;
    for (std::size_t fi = 0; fi < root["formats"].size(); ++fi) {
        const json& jf = root["formats"][fi];
        const std::string where = "formats[" + std::to_string(fi) + "]";
        DatasetFormat f;
        f.name = field_as<std::string>(jf, "name", where);
        if (!names.insert(f.name).second) throw ParseError("duplicate format name '" + f.name + "'", 0, where + ".name");
        f.family = jf.contains("family") ? field_as<bool>(jf, "family", where) : false;
        if (!jf.contains("members") || !jf["members"].is_array()) throw ParseError("missing 'members' array", 0, where);
        for (std::size_t mi = 0; mi < jf["members"].size(); ++mi) {
            const json& jm = jf["members"][mi];
            const std::string mwhere = where + ".members[" + std::to_string(mi) + "]";
            if (!jm.contains("bins") || !jm["bins"].is_array()) throw ParseError("missing 'bins' array", 0, mwhere);
            std::vector<Event> bins;
            for (std::size_t bi = 0; bi < jm["bins"].size(); ++bi) {
                bins.push_back(bin_of(jm["bins"][bi], *ds.space, mwhere + ".bins[" + std::to_string(bi) + "]"));
            }
            Partition part(ds.space, std::move(bins));
            auto emp = field_as<std::vector<double>>(jm, "empirical", mwhere);
            if (emp.size() != part.size()) {
                throw ParseError("expected " + std::to_string(part.size()) + " empirical values, got " +
                                     std::to_string(emp.size()),
                                 0, mwhere + ".empirical");
            }
            check_empirical(emp, mwhere + ".empirical", 0, options, ds.diagnostics);
            f.members.push_back({std::move(part), std::move(emp)});
        }
        if (f.members.empty()) throw ParseError("format has no members", 0, where);
        ds.formats.push_back(std::move(f));
    }
    return ds;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw ParseError("unterminated quote", line_no);
    out.push_back(cur);
    return out;
}

std::optional<long> parse_long(const std::string& s) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// Labels mentioned by a bin spec outside complements; ranges are expanded.
void collect_labels(const std::string& spec, std::vector<std::string>& labels) {
    std::string body = spec;
    if (!body.empty() && body.front() == '~') return;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        while (!item.empty() && item.front() == ' ') item.erase(item.begin());
        while (!item.empty() && item.back() == ' ') item.pop_back();
        const auto dash = item.find('-', 1);
        if (dash != std::string::npos) {
            auto lo = parse_long(item.substr(0, dash));
            auto hi = parse_long(item.substr(dash + 1));
            if (lo && hi && *lo <= *hi) {
                for (long k = *lo; k <= *hi; ++k) labels.push_back(std::to_string(k));
                continue;
            }
        }
        if (!item.empty()) labels.push_back(item);
    }
}

}  // namespace

BeliefDataset parse_dataset_csv(std::string_view text, const LoadOptions& options) {
    struct Cell {
        std::string states;
        double empirical;
        std::size_t line;
    };
    // format -> member -> bin -> cell, keeping first-appearance order of formats
    std::vector<std::string> order;
    std::map<std::string, std::map<long, std::map<long, Cell>>> cells;

    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::vector<std::string> labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        auto fields = split_csv_line(line, line_no);
        if (!header) {
            const std::vector<std::string> expected{"format", "member", "bin", "states", "empirical"};
            if (fields != expected) throw ParseError("header must be format,member,bin,states,empirical", line_no);
            header = true;
            continue;
        }
        if (fields.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(fields.size()), line_no);
        const auto member = parse_long(fields[1]);
        if (!member || *member < 0) throw ParseError("member must be a non-negative integer", line_no, "member");
        const auto bin = parse_long(fields[2]);
        if (!bin || *bin < 0) throw ParseError("bin must be a non-negative integer", line_no, "bin");
        char* end = nullptr;
        const double emp = std::strtod(fields[4].c_str(), &end);
        if (fields[4].empty() || end != fields[4].c_str() + fields[4].size()) {
            throw ParseError("invalid number '" + fields[4] + "'", line_no, "empirical");
        }
        if (!std::isfinite(emp) || emp < 0.0 || emp > 1.0) {
            throw ParseError("empirical value outside [0, 1]", line_no, "empirical");
        }
        if (fields[3].empty()) throw ParseError("empty states", line_no, "states");
        if (!cells.count(fields[0])) order.push_back(fields[0]);
        auto& slot = cells[fields[0]][*member];
        if (slot.count(*bin)) throw ParseError("duplicate bin", line_no, "bin");
        slot[*bin] = Cell{fields[3], emp, line_no};
        collect_labels(fields[3], labels);
    }
    if (!header) throw ParseError("missing header");
    if (order.empty()) throw ParseError("no data rows");

    // State space: numeric order when every label is an integer.
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (std::all_of(labels.begin(), labels.end(), [](const std::string& s) { return parse_long(s).has_value(); })) {
        std::sort(labels.begin(), labels.end(),
                  [](const std::string& a, const std::string& b) { return *parse_long(a) < *parse_long(b); });
    }

    BeliefDataset ds;
    ds.space = make_space(labels);
    for (const std::string& name : order) {
        DatasetFormat f;
        f.name = name;
        long expect_member = 0;
        for (auto& [m, bins_map] : cells[name]) {
            const std::size_t first_line = bins_map.begin()->second.line;
            if (m != expect_member++) throw ParseError("member indices must be 0, 1, 2, ...", first_line, "member");
            std::vector<Event> bins;
            std::vector<double> emp;
            long expect_bin = 0;
            for (auto& [b, cell] : bins_map) {
                if (b != expect_bin++) throw ParseError("bin indices must be 0, 1, 2, ...", cell.line, "bin");
                try {
                    bins.push_back(parse_bin(cell.states, *ds.space));
                } catch (const ParseError& e) {
                    throw ParseError(e.message(), cell.line, "states");
                }
                emp.push_back(cell.empirical);
            }
            Partition part(ds.space, std::move(bins));
            check_empirical(emp, name + " member " + std::to_string(m), first_line, options, ds.diagnostics);
            f.members.push_back({std::move(part), std::move(emp)});
        }
        f.family = f.members.size() > 1;
        ds.formats.push_back(std::move(f));
    }
    return ds;
}

BeliefDataset load_dataset(const std::filesystem::path& path, DatasetFileFormat format, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    BeliefDataset ds =
        format == DatasetFileFormat::kJson ? parse_dataset_json(buf.str(), options) : parse_dataset_csv(buf.str(), options);
    if (ds.metadata.empty()) ds.metadata = path.filename().string();
    return ds;
}

BeliefDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return load_dataset(path, ext == ".csv" ? DatasetFileFormat::kCsv : DatasetFileFormat::kJson, options);
}

std::string dataset_to_json(const BeliefDataset& dataset) {
    const StateSpace& space = *dataset.space;
    const bool numeric = std::all_of(space.labels().begin(), space.labels().end(),
                                     [](const std::string& s) { return parse_long(s).has_value(); });
    auto label_json = [&](std::size_t i) -> json {
        if (numeric) return *parse_long(space.label(i));
        return space.label(i);
    };

    json root;
    root["states"] = json::array();
    for (std::size_t i = 0; i < space.size(); ++i) root["states"].push_back(label_json(i));
    if (dataset.true_prior) {
        if (dataset.prior_source && dataset.prior_source->kind == PriorSource::Kind::kBinomial) {
            root["true_prior"] = {{"kind", "binomial"}, {"n", dataset.prior_source->n}, {"p", dataset.prior_source->p}};
        } else {
            root["true_prior"] = {{"kind", "explicit"}, {"probs", dataset.true_prior->probs()}};
        }
    }
    if (!dataset.metadata.empty()) root["metadata"] = dataset.metadata;
    root["formats"] = json::array();
    for (const auto& f : dataset.formats) {
        json jf{{"name", f.name}, {"family", f.family}, {"members", json::array()}};
        for (const auto& m : f.members) {
            json bins = json::array();
            for (const Event& b : m.partition.bins()) {
                json jb = json::array();
                for (std::size_t s : b) jb.push_back(label_json(s));
                bins.push_back(std::move(jb));
            }
            jf["members"].push_back({{"bins", std::move(bins)}, {"empirical", m.empirical}});
        }
        root["formats"].push_back(std::move(jf));
    }
    return root.dump(2) + "\n";
}

}  // namespace erbr
