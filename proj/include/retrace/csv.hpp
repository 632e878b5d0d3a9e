#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace retrace::csv {

// RFC 4180 style: quoted fields may hold the separator, doubled quotes and newlines.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

Table parse(std::string_view text, char separator = ',');

// Picks ',' or '\t' from the header line.
char sniff_separator(std::string_view text);

std::string escape(std::string_view field, char separator = ',');
std::string write(const Table& table, char separator = ',');

}  // namespace retrace::csv
