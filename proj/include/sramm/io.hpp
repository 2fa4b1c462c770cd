#pragma once

#include "sramm/bss.hpp"
#include "sramm/matcore.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace sramm {

/// Shortest text that round-trips a double (17 significant digits).
std::string format_double(double x);

/// Matrix text format: "rows,cols" then one comma-separated line per row.
void write_matrix(std::ostream& os, const Matrix& a);
void write_matrix(const std::filesystem::path& path, const Matrix& a);
Matrix read_matrix(std::istream& is);
Matrix read_matrix(const std::filesystem::path& path);

/// Selection text format: one "index,scale" line per selected row.
void write_selection(std::ostream& os, const RowSelection& sel);
void write_selection(const std::filesystem::path& path, const RowSelection& sel);
RowSelection read_selection(std::istream& is);
RowSelection read_selection(const std::filesystem::path& path);

}  // namespace sramm
