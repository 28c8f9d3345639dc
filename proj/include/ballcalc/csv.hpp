#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ballcalc::csv {

/// Formats a double with 12 significant digits and '.' decimal separator,
/// independent of locale. Infinities print as "inf"/"-inf".
std::string fmt(double v);

/// RFC-4180 field quoting: fields containing comma, quote, CR or LF are
/// quoted, embedded quotes doubled.
std::string quote(const std::string& field);

void write_row(std::ostream& out, std::span<const std::string> fields);

/// Reads an entire CSV document (RFC-4180, with quoted fields and embedded
/// newlines). Returns rows of unquoted fields.
std::vector<std::vector<std::string>> read_all(std::istream& in);

}  // namespace ballcalc::csv
