#pragma once

// Minimal RFC-4180 writer. Reals are printed with 17 significant digits.

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pmd/special_functions.hpp"

namespace pmd::csv {

std::string format_real(Real x);
std::string format_int(long long x);
std::string quote(std::string_view field);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  // Comment lines precede the column header.
  void comment(std::string_view line);
  void columns(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

}  // namespace pmd::csv
