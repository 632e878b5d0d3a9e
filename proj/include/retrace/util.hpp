#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace retrace {

using Json = nlohmann::json;

// Base of every error the toolkit raises. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Carries per-field messages, e.g. for a rejected HTTP body or config file.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::map<std::string, std::string> fields);
  const std::map<std::string, std::string>& fields() const { return fields_; }

 private:
  std::map<std::string, std::string> fields_;
};

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, std::string_view delim);
bool starts_with_ci(std::string_view s, std::string_view prefix);

// Lowercase, trimmed, with any resolver prefix ("https://doi.org/", "doi:") removed.
std::string normalize_doi(std::string_view raw);

// Lowercase, punctuation collapsed to single spaces.
std::string normalize_title(std::string_view raw);

std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& value);

// Fixed-point rendering with `decimals` digits ("22.94").
std::string format_fixed(double value, int decimals = 2);

// Percentage of part/whole rounded to 2 decimals; 0 when whole is 0.
double percent(long long part, long long whole);

}  // namespace retrace
