#include "erbr/scalar_search.hpp"

#include "erbr/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace erbr::search {

double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) throw DomainError("bisect: root is not bracketed");
    for (int it = 0; it < 2000; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return std::abs(flo) <= std::abs(f(hi)) ? lo : hi;
}

double golden_section(const std::function<double(double)>& f, double lo, double hi, double width_tol) {
    static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 500 && (b - a) > width_tol; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (!(c < d)) break;
    }
    return fc < fd ? c : d;
}

Minimum grid_then_golden(const std::function<double(double)>& f, const GridSearch& grid) {
    if (!(grid.step > 0.0) || !(grid.hi > grid.lo)) throw ConfigurationError("grid search: need lo < hi and step > 0");
    const auto count = static_cast<long>(std::floor((grid.hi - grid.lo) / grid.step + 1e-9)) + 1;
    long best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> xs(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        xs[static_cast<std::size_t>(i)] = grid.lo + static_cast<double>(i) * grid.step;
        const double v = f(xs[static_cast<std::size_t>(i)]);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    const double a = xs[static_cast<std::size_t>(std::max(best - 1, 0L))];
    const double b = xs[static_cast<std::size_t>(std::min(best + 1, count - 1))];
    Minimum out{xs[static_cast<std::size_t>(best)], best_value};
    if (b > a) {
        const double x = golden_section(f, a, b, grid.width_tol);
        const double v = f(x);
        if (v < out.value) out = {x, v};
    }
    return out;
}

std::vector<double> log_spaced(double lo, double hi, int points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2) throw ConfigurationError("log_spaced: need 0 < lo < hi and >= 2 points");
    std::vector<double> out(static_cast<std::size_t>(points));
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < points; ++i) {
        out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * static_cast<double>(i) / (points - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

}  // namespace erbr::search
