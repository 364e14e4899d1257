#pragma once

#include <string>

namespace opelab {

/// Decimal form with 17 significant digits; "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double x);
/// Inverse of format_double. Throws ParseError on trailing garbage.
double parse_double(const std::string& s);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace opelab
