#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace disvm::cli {

enum ExitCode : int { ok = 0, usage = 1, data = 2, solver = 3 };

/// Runs one subcommand (synth, fit, eval, bench, sweep). Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// key = value lines; '#' starts a comment. Throws InvalidArgument on
/// malformed lines.
std::map<std::string, std::string> parse_config(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

/// Canonical "key=value" lines, sorted by key.
std::string canonical(const std::map<std::string, std::string>& config);

/// "78.1±2.3" from fractions in [0, 1], one decimal of percent.
std::string mean_pm_std(double mean, double std);

}  // namespace disvm::cli
