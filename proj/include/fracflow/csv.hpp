#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace fracflow {

// Shortest round-trip text for a double ("%.17g"), locale independent.
std::string format_double(double v);
// Parses a full string as a double; throws ConfigError naming `what` on failure.
double parse_double(const std::string& text, const std::string& what);
std::vector<std::string> split_csv_line(const std::string& line);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t ncols_;
};

}  // namespace fracflow
