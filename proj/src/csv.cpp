#include "pmd/csv.hpp"

#include <cmath>
#include <cstdio>

namespace pmd::csv {

std::string format_real(Real x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(x));
  return buf;
}

std::string format_int(long long x) { return std::to_string(x); }

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void Writer::comment(std::string_view line) { out_ << "# " << line << "\r\n"; }

void Writer::columns(const std::vector<std::string>& names) { row(names); }

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << quote(fields[i]);
  }
  out_ << "\r\n";
}

}  // namespace pmd::csv
