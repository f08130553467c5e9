#include "disvm/csv_io.hpp"

#include "disvm/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace disvm {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::string& where) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (token.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw DataError(where + ": '" + std::string(token) + "' is not a finite number");
  }
  return v;
}

namespace {

constexpr int kFixedColumns = 5;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void check_id(const std::string& id, const char* what) {
  if (id.empty() || id.find_first_of(",\"\r\n") != std::string::npos) {
    throw DataError(std::string("cannot write ") + what + " '" + id +
                    "': ids must be non-empty and free of commas, quotes and newlines");
  }
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  do {
    if (!std::getline(in, line)) throw DataError(source + ": empty file, header expected");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
  } while (!line.empty() && line.front() == '#');
  const std::string head = source + ": line " + std::to_string(lineno);

  const auto header = split(line);
  static const char* const fixed[kFixedColumns] = {"sample_id", "experiment_id", "subject_id",
                                                   "label", "role"};
  if (header.size() < kFixedColumns) throw DataError(head + ": malformed header");
  for (int i = 0; i < kFixedColumns; ++i) {
    if (header[static_cast<std::size_t>(i)] != fixed[i]) {
      throw DataError(head + ": column " + std::to_string(i + 1) + " must be '" +
                      fixed[i] + "'");
    }
  }
  const std::size_t d = header.size() - kFixedColumns;
  if (d == 0) throw DataError(head + ": no feature columns");
  for (std::size_t j = 0; j < d; ++j) {
    if (header[kFixedColumns + j] != "f" + std::to_string(j)) {
      throw DataError(head + ": feature column " + std::to_string(j) + " must be 'f" +
                      std::to_string(j) + "'");
    }
  }

  Dataset ds;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ": line " + std::to_string(lineno);
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " columns, found " +
                      std::to_string(cells.size()));
    }
    for (int i = 0; i < 3; ++i) {
      if (cells[static_cast<std::size_t>(i)].empty()) {
        throw DataError(where + ": empty " + fixed[i]);
      }
    }
    ds.sample_id.emplace_back(cells[0]);
    ds.experiment_id.emplace_back(cells[1]);
    ds.subject_id.emplace_back(cells[2]);
    const std::string_view lab = cells[3];
    if (lab == "1") {
      ds.labels.push_back(Label::positive);
    } else if (lab == "-1") {
      ds.labels.push_back(Label::negative);
    } else if (lab == "NA") {
      ds.labels.push_back(Label::unlabeled);
    } else {
      throw DataError(where + ": label '" + std::string(lab) + "' is not one of 1, -1, NA");
    }
    try {
      ds.role.push_back(parse_role(cells[4]));
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    for (std::size_t j = 0; j < d; ++j) {
      values.push_back(parse_double(cells[kFixedColumns + j], where + ", f" + std::to_string(j)));
    }
  }
  const auto n = static_cast<Eigen::Index>(ds.labels.size());
  if (n == 0) throw DataError(source + ": no samples");
  ds.features = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(d), n);
  return ds;
}

void format_dataset(const Dataset& ds, std::ostream& out, const std::vector<std::string>& comments) {
  const Eigen::Index d = ds.dim();
  if (d < 1) throw DataError("cannot write a dataset without features");
  if (ds.features.cols() != static_cast<Eigen::Index>(ds.size()) ||
      ds.sample_id.size() != ds.size() || ds.experiment_id.size() != ds.size() ||
      ds.subject_id.size() != ds.size() || ds.role.size() != ds.size()) {
    throw DataError("cannot write an inconsistent dataset");
  }
  for (const auto& c : comments) {
    if (c.find_first_of("\r\n") != std::string::npos) throw DataError("comment spans lines");
    out << "# " << c << '\n';
  }
  out << "sample_id,experiment_id,subject_id,label,role";
  for (Eigen::Index j = 0; j < d; ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    check_id(ds.sample_id[i], "sample id");
    check_id(ds.experiment_id[i], "experiment id");
    check_id(ds.subject_id[i], "subject id");
    out << ds.sample_id[i] << ',' << ds.experiment_id[i] << ',' << ds.subject_id[i] << ',';
    switch (ds.labels[i]) {
      case Label::positive: out << "1"; break;
      case Label::negative: out << "-1"; break;
      case Label::unlabeled: out << "NA"; break;
    }
    out << ',' << to_string(ds.role[i]);
    for (Eigen::Index j = 0; j < d; ++j) {
      out << ',' << format_double(ds.features(j, static_cast<Eigen::Index>(i)));
    }
    out << '\n';
  }
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_dataset(in, path.string());
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path,
                   const std::vector<std::string>& comments) {
  std::ostringstream buf;
  format_dataset(ds, buf, comments);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << buf.str();
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace disvm
