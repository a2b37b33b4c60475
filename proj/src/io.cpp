#include "predrobust/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace predrobust {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::size_t line_no, std::string_view column) {
  double v = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": column '" + std::string(column) +
                                           "' holds '" + std::string(field) + "', not a number");
  }
  return v;
}

}  // namespace

SeriesTable read_series_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> iy, ix, iv;
  std::size_t ncols = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (line_no == 0 || trim(line).empty()) {
    throw Error(ErrorCode::ParseError, "line 1: file is empty; expected a header with columns y and x");
  }
  const auto header = split(line);
  ncols = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "y") iy = i;
    if (header[i] == "x") ix = i;
    if (header[i] == "true_vol") iv = i;
  }
  if (!iy || !ix) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": header must contain columns 'y' and 'x'");
  }
  SeriesTable table;
  if (iv) table.true_vol.emplace();
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != ncols) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " + std::to_string(ncols) +
                                             " fields, found " + std::to_string(fields.size()));
    }
    table.y.push_back(parse_double(fields[*iy], line_no, "y"));
    table.x.push_back(parse_double(fields[*ix], line_no, "x"));
    if (iv) table.true_vol->push_back(parse_double(fields[*iv], line_no, "true_vol"));
  }
  return table;
}

SeriesTable read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, "cannot open '" + path.string() + "'");
  }
  return read_series_csv(in);
}

std::string format_fixed(double value, int digits) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << value;
  return os.str();
}

}  // namespace predrobust
