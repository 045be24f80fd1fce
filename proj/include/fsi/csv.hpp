#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

namespace fsi {

/// Comma-separated writer with a header row, '.' decimals and LF line endings.
/// Doubles are written with 17 significant digits so files round-trip exactly.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

  template <typename... Ts>
  void row(const Ts&... values) {
    std::ostringstream line;
    line.imbue(std::locale::classic());
    line.precision(17);
    bool first = true;
    ((write_field(line, values, first)), ...);
    line << '\n';
    out_ << line.str();
  }

 private:
  template <typename T>
  static void write_field(std::ostringstream& line, const T& value, bool& first) {
    if (!first) line << ',';
    first = false;
    line << value;
  }

  std::ofstream out_;
};

}  // namespace fsi
