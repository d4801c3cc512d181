#pragma once

#include <functional>
#include <vector>

namespace erbr::search {

/// Bisection on a bracket [lo, hi] with f(lo) and f(hi) of opposite sign (or
/// one of them zero). Runs until the bracket cannot be split further in double
/// precision, so the result is the floating-point root of f.
double bisect(const std::function<double(double)>& f, double lo, double hi);

/// Golden-section minimization of a unimodal f on [lo, hi], stopping once the
/// bracket is narrower than width_tol.
double golden_section(const std::function<double(double)>& f, double lo, double hi, double width_tol);

struct GridSearch {
    double lo = -2.0;
    double hi = 4.0;
    double step = 0.01;
    double width_tol = 1e-12;
};

struct Minimum {
    double x = 0.0;
    double value = 0.0;
};

/// Evaluate f on an evenly spaced grid, then refine around the best grid
/// point with golden-section search. The better of the grid point and the
/// refined point is returned.
Minimum grid_then_golden(const std::function<double(double)>& f, const GridSearch& grid);

/// Geometric grid of `points` values from lo to hi inclusive (lo, hi > 0).
std::vector<double> log_spaced(double lo, double hi, int points);

}  // namespace erbr::search
