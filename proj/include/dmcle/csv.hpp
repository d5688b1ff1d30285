#pragma once

// Minimal headered CSV: comma separated, optional double quotes, numbers
// written in shortest round-trip form.

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dmcle {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Shortest decimal string that reads back to exactly x. "nan", "inf", "-inf"
// for non-finite values.
std::string format_double(double x);
// Whole-string parse; DataError on anything else.
double parse_double(const std::string& text);

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);
std::string to_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Every cell parsed as a number; DataError on ragged rows or bad cells.
Eigen::MatrixXd numeric_matrix(const CsvTable& table);

}  // namespace dmcle
