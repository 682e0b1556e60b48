#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stcpd/tensor.hpp"

namespace stcpd::cli {

using Json = nlohmann::ordered_json;

/// Raised for flag combinations CLI11 cannot check on its own (exit code 2).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shortest text that parses back to the same double.
std::string format_double(double v);

/**
 * Report skeleton: command, version, parameters, seeds, results, timings.
 * Wall-clock numbers live only under "timings" so two runs with the same
 * flags differ nowhere else.
 */
Json make_report(const std::string& command, Json parameters, std::vector<std::uint64_t> seeds);

void write_text(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);
void ensure_directory(const std::string& path);

/// CSV of a factor matrix: first column carries a row label.
void write_factor_csv(const std::string& path, const std::string& label_header,
                      const std::vector<std::string>& labels, const Matrix& factor);

struct FactorTable {
  std::string label_header;
  std::vector<std::string> labels;
  Matrix values;
};

FactorTable read_factor_csv(const std::string& path);

}  // namespace stcpd::cli
