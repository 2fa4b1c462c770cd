#include "sramm/io.hpp"

#include "sramm/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

namespace sramm {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_field(std::string_view text, std::size_t line_no) {
  while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.remove_suffix(1);
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return is;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix(std::ostream& os, const Matrix& a) {
  os << a.rows() << ',' << a.cols() << '\n';
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) os << (j ? "," : "") << format_double(a(i, j));
    os << '\n';
  }
}

void write_matrix(const std::filesystem::path& path, const Matrix& a) {
  auto os = open_out(path);
  write_matrix(os, a);
  if (!os) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

Matrix read_matrix(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::Io, "empty matrix file");
  const auto header = split(line);
  if (header.size() != 2) throw Error(ErrorCode::Io, "line 1: expected 'rows,cols'");
  const auto rows = parse_field<Eigen::Index>(header[0], 1);
  const auto cols = parse_field<Eigen::Index>(header[1], 1);
  if (rows < 0 || cols < 0) throw Error(ErrorCode::Io, "line 1: negative dimensions");

  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::size_t line_no = static_cast<std::size_t>(i) + 2;
    if (!std::getline(is, line)) throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": missing row");
    const auto fields = split(line);
    if (static_cast<Eigen::Index>(fields.size()) != cols) {
      throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": expected " + std::to_string(cols) + " values");
    }
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = parse_field<double>(fields[static_cast<std::size_t>(j)], line_no);
  }
  require_finite(a);
  return a;
}

Matrix read_matrix(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_matrix(is);
}

void write_selection(std::ostream& os, const RowSelection& sel) {
  for (std::size_t i = 0; i < sel.indices.size(); ++i) os << sel.indices[i] << ',' << format_double(sel.scales[i]) << '\n';
}

void write_selection(const std::filesystem::path& path, const RowSelection& sel) {
  auto os = open_out(path);
  write_selection(os, sel);
  if (!os) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

RowSelection read_selection(std::istream& is) {
  RowSelection sel;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != 2) throw Error(ErrorCode::Io, "line " + std::to_string(line_no) + ": expected 'index,scale'");
    sel.indices.push_back(parse_field<Eigen::Index>(fields[0], line_no));
    sel.scales.push_back(parse_field<double>(fields[1], line_no));
  }
  sel.nnz = static_cast<Eigen::Index>(sel.indices.size());
  return sel;
}

RowSelection read_selection(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_selection(is);
}

}  // namespace sramm
