#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "conepos/metric.hpp"

namespace conepos::cli {

/// Runs one command. Writes results to `out` and usage or error JSON to
/// `err`. Returns 0, 2 for usage errors or 3 for numerical failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// Parses "a,b" with inf/-inf allowed, or "full", "half:a".
Domain parse_domain(const std::string& text);
/// Comma-separated reals.
std::vector<double> parse_list(const std::string& text);
/// A covariance given as an inline JSON matrix, @file, or a preset
/// (hilbertK, invhilbertK, identityK, identity).
MetricPair parse_metric(const std::string& text, int size);

}  // namespace conepos::cli
