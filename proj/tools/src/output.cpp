#include "output.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stcpd/error.hpp"
#include "stcpd/version.hpp"

namespace stcpd::cli {

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::logic_error("format_double: buffer too small");
  return {buf, ptr};
}

Json make_report(const std::string& command, Json parameters, std::vector<std::uint64_t> seeds) {
  Json report;
  report["command"] = command;
  report["version"] = kVersion;
  report["parameters"] = std::move(parameters);
  report["seeds"] = std::move(seeds);
  report["results"] = Json::object();
  report["timings"] = Json::object();
  return report;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError(FormatErrc::Io, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw FormatError(FormatErrc::Io, "failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError(FormatErrc::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec || !std::filesystem::is_directory(path)) {
    throw FormatError(FormatErrc::Io, "cannot create output directory '" + path + "'");
  }
}

void write_factor_csv(const std::string& path, const std::string& label_header,
                      const std::vector<std::string>& labels, const Matrix& factor) {
  if (static_cast<Index>(labels.size()) != factor.rows()) {
    throw std::logic_error("write_factor_csv: one label per row required");
  }
  std::string text = label_header;
  for (Index r = 0; r < factor.cols(); ++r) text += ",component_" + std::to_string(r + 1);
  text += '\n';
  for (Index i = 0; i < factor.rows(); ++i) {
    text += labels[static_cast<std::size_t>(i)];
    for (Index r = 0; r < factor.cols(); ++r) text += ',' + format_double(factor(i, r));
    text += '\n';
  }
  write_text(path, text);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

FactorTable read_factor_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  auto fail = [&](std::size_t line_no, const std::string& why) {
    return FormatError(FormatErrc::Parse,
                       path + ":" + std::to_string(line_no) + ": " + why);
  };
  if (!std::getline(in, line)) throw fail(1, "empty factor file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 2) throw fail(1, "expected a label column and at least one component");

  FactorTable table;
  table.label_header = header[0];
  const std::size_t cols = header.size() - 1;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw fail(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(fields.size()));
    }
    table.labels.push_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      double v = 0.0;
      const auto& f = fields[c];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw fail(line_no, "cannot parse '" + f + "' as a number");
      }
      if (!std::isfinite(v)) throw FormatError(FormatErrc::NonFinite, path + ": non-finite value");
      values.push_back(v);
    }
  }
  const auto rows = static_cast<Index>(table.labels.size());
  if (rows == 0) throw fail(line_no, "no data rows");
  table.values.resize(rows, static_cast<Index>(cols));
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < static_cast<Index>(cols); ++c) {
      table.values(i, c) = values[static_cast<std::size_t>(i) * cols + static_cast<std::size_t>(c)];
    }
  }
  return table;
}

}  // namespace stcpd::cli
