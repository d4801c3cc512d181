#include "erbr/notation.hpp"

#include "erbr/dataset.hpp"
#include "erbr/error.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <vector>

namespace erbr {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

std::optional<long> to_long(std::string_view s) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

double to_double(std::string_view s, const char* what) {
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
        throw ParseError(std::string("invalid number '") + tmp + "' in " + what);
    }
    return v;
}

}  // namespace

Event parse_bin(std::string_view text, const StateSpace& space) {
    std::string_view body = trim(text);
    bool negate = false;
    if (!body.empty() && body.front() == '~') {
        negate = true;
        body = trim(body.substr(1));
    }
    if (body.empty()) throw ParseError("empty bin in '" + std::string(text) + "'");

    std::vector<std::size_t> states;
    for (std::string_view item : split(body, ',')) {
        if (item.empty()) throw ParseError("empty item in bin '" + std::string(text) + "'");
        if (auto idx = space.index_of(std::string(item))) {
            states.push_back(*idx);
            continue;
        }
        const auto dash = item.find('-', 1);
        if (dash != std::string_view::npos) {
            const auto lo = to_long(trim(item.substr(0, dash)));
            const auto hi = to_long(trim(item.substr(dash + 1)));
            if (lo && hi && *lo <= *hi) {
                for (long k = *lo; k <= *hi; ++k) {
                    auto idx = space.index_of(std::to_string(k));
                    if (!idx) throw ParseError("state " + std::to_string(k) + " in range '" + std::string(item) + "' is not in the space");
                    states.push_back(*idx);
                }
                continue;
            }
        }
        throw ParseError("unknown state '" + std::string(item) + "'");
    }
    Event e(std::move(states));
    return negate ? complement(e, space.size()) : e;
}

Partition parse_partition(std::string_view text, const SpacePtr& space) {
    std::vector<Event> bins;
    for (std::string_view b : split(text, '|')) bins.push_back(parse_bin(b, *space));
    return Partition(space, std::move(bins));
}

std::string format_bin(const Event& e, const StateSpace& space) {
    std::vector<std::optional<long>> values;
    for (std::size_t s : e) values.push_back(to_long(space.label(s)));

    std::string out;
    std::size_t i = 0;
    const auto& st = e.states();
    while (i < st.size()) {
        if (!out.empty()) out += ',';
        std::size_t j = i;
        if (values[i]) {
            while (j + 1 < st.size() && values[j + 1] && *values[j + 1] == *values[j] + 1) ++j;
        }
        if (j >= i + 1) {
            out += space.label(st[i]) + "-" + space.label(st[j]);
        } else {
            out += space.label(st[i]);
        }
        i = j + 1;
    }
    return out;
}

std::string format_partition(const Partition& p) {
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += '|';
        out += format_bin(p.bin(i), *p.space());
    }
    return out;
}

Prior parse_prior(std::string_view text) {
    text = trim(text);
    const auto colon = text.find(':');
    const std::string_view kind = colon == std::string_view::npos ? std::string_view{} : text.substr(0, colon);
    const std::string_view rest = colon == std::string_view::npos ? text : text.substr(colon + 1);

    if (kind == "binomial") {
        const auto parts = split(rest, ':');
        if (parts.size() != 2) throw ParseError("binomial prior must be binomial:N:P");
        const auto n = to_long(parts[0]);
        if (!n || *n < 1) throw ParseError("binomial prior needs a positive integer N");
        return binomial_prior(static_cast<int>(*n), to_double(parts[1], "binomial prior"));
    }
    if (kind == "uniform") {
        const auto n = to_long(rest);
        if (!n || *n < 2) throw ParseError("uniform prior needs N >= 2");
        return Prior::uniform(make_integer_space(0, *n - 1));
    }
    if (kind == "explicit" || kind.empty()) {
        std::vector<double> probs;
        for (std::string_view item : split(rest, ',')) probs.push_back(to_double(item, "explicit prior"));
        if (probs.size() < 2) throw ParseError("explicit prior needs at least 2 probabilities");
        auto space = make_integer_space(0, static_cast<long>(probs.size()) - 1);
        return Prior(std::move(space), std::move(probs));
    }
    throw ParseError("unknown prior kind '" + std::string(kind) + "'");
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace erbr
