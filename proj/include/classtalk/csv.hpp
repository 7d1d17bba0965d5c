#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace classtalk::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
// line breaks; CRLF and LF line endings are both accepted. A UTF-8 BOM is
// skipped. Throws ParseError on an unterminated quote or stray quote.
std::vector<Record> parse(std::string_view data);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace classtalk::csv
