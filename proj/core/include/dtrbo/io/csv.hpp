#pragma once

#include <string>
#include <vector>

namespace dtrbo::io {

// 17-significant-digit decimal rendering; round-trips every finite double.
std::string fmt17(double v);

double parse_double(const std::string& field);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // raw fields; "" marks a blank

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace dtrbo::io
