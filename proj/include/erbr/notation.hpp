#pragma once

// Compact text notation shared by the dataset files and the command line.
//
//   partition := bin ('|' bin)*
//   bin       := ['~'] item (',' item)*      '~' takes the complement
//   item      := label | int '-' int         inclusive integer range
//
// e.g. "0-3|4|5|6|7-10" or "5|~5".

#include "erbr/model.hpp"

#include <string>
#include <string_view>

namespace erbr {

Event parse_bin(std::string_view text, const StateSpace& space);
Partition parse_partition(std::string_view text, const SpacePtr& space);

/// Bin label in the same notation, collapsing runs of consecutive integer
/// labels into ranges ("0-3", "5", "0,2,4").
std::string format_bin(const Event& e, const StateSpace& space);
std::string format_partition(const Partition& p);

/// Prior specifications:
///   binomial:N:P        states 0..N
///   uniform:N           states 0..N-1
///   explicit:p0,p1,...  states 0..k-1 (the "explicit:" prefix is optional)
Prior parse_prior(std::string_view text);

/// printf "%.17g": 17 significant digits, as used in every output file.
std::string format_real(double v);

}  // namespace erbr
