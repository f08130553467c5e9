#pragma once

#include "disvm/dataset.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace disvm {

/// Columns: sample_id, experiment_id, subject_id, label (1 | -1 | NA), role,
/// f0 ... f{d-1}. Features are written in shortest round-trip form, so a
/// write/read cycle is lossless. Schema problems raise DataError naming the
/// offending line. Lines starting with '#' before the header are provenance
/// comments and are skipped on read.
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& ds, const std::filesystem::path& path,
                   const std::vector<std::string>& comments = {});

Dataset parse_dataset(std::istream& in, const std::string& source = "<stream>");
void format_dataset(const Dataset& ds, std::ostream& out,
                    const std::vector<std::string>& comments = {});

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
/// Full-token parse; throws DataError on trailing junk or non-finite text.
double parse_double(std::string_view token, const std::string& where);

}  // namespace disvm
