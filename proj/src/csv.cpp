#include "fsi/csv.hpp"

#include "fsi/errors.hpp"

namespace fsi {

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::initializer_list<std::string_view> header)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  bool first = true;
  for (auto name : header) {
    if (!first) out_ << ',';
    first = false;
    out_ << name;
  }
  out_ << '\n';
}

}  // namespace fsi
