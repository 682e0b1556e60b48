#include "stcpd/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "stcpd/error.hpp"

namespace stcpd {

namespace {

constexpr std::size_t kHeaderBytes = 4 + 4 + 3 * 8;
constexpr std::size_t kTrailerBytes = 4;

template <typename T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  v = byteswap_if_big(v);
  const std::size_t at = out.size();
  out.resize(at + sizeof(T));
  std::memcpy(out.data() + at, &v, sizeof(T));
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t offset) {
  T v;
  std::memcpy(&v, in.data() + offset, sizeof(T));
  return byteswap_if_big(v);
}

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrc::Io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatErrc::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatErrc::Io, "cannot write " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw FormatError(FormatErrc::Io, "short write to " + path);
}

}  // namespace

const char* to_string(FormatErrc code) noexcept {
  switch (code) {
    case FormatErrc::Io: return "io";
    case FormatErrc::BadMagic: return "bad-magic";
    case FormatErrc::UnsupportedVersion: return "unsupported-version";
    case FormatErrc::DimOverflow: return "dim-overflow";
    case FormatErrc::Truncated: return "truncated";
    case FormatErrc::LengthMismatch: return "length-mismatch";
    case FormatErrc::NonFinite: return "non-finite";
    case FormatErrc::ChecksumMismatch: return "checksum-mismatch";
    case FormatErrc::Parse: return "parse";
    case FormatErrc::MissingEntry: return "missing-entry";
    case FormatErrc::DuplicateEntry: return "duplicate-entry";
    case FormatErrc::UnknownVariable: return "unknown-variable";
    case FormatErrc::OutOfRange: return "out-of-range";
  }
  return "unknown";
}

// ---------------------------------------------------------------- descriptor

DatasetDescriptor DatasetDescriptor::defaults(Dims dims) {
  DatasetDescriptor d;
  for (Index k = 0; k < dims.vars; ++k) d.variables.push_back("v" + std::to_string(k + 1));
  using namespace std::chrono;
  d.time = TimeIndex(Date{year{1979}, month{1}, day{1}}, static_cast<std::size_t>(dims.time));
  if (dims.space > 0) d.grid = GridSpec::line(dims.space);
  return d;
}

Dims DatasetDescriptor::dims() const {
  return {static_cast<Index>(time.size()), grid.active_count(),
          static_cast<Index>(variables.size())};
}

std::string descriptor_to_json(const DatasetDescriptor& d) {
  nlohmann::json j;
  j["variables"] = d.variables;
  j["start_date"] = d.time.size() > 0 ? format_date(d.time.start()) : "";
  j["n_steps"] = d.time.size();
  j["calendar"] = d.time.calendar() == Calendar::NoLeap ? "noleap" : "gregorian";
  j["grid"] = nlohmann::json::parse(grid_to_json(d.grid));
  j["provenance"] = d.provenance;
  return j.dump(2);
}

DatasetDescriptor descriptor_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DatasetDescriptor d;
    d.variables = j.at("variables").get<std::vector<std::string>>();
    const auto start = parse_date(j.at("start_date").get<std::string>());
    if (!start) throw FormatError(FormatErrc::Parse, "descriptor: bad start_date");
    const std::string cal = j.value("calendar", "gregorian");
    if (cal != "gregorian" && cal != "noleap") {
      throw FormatError(FormatErrc::Parse, "descriptor: calendar must be gregorian or noleap");
    }
    d.time = TimeIndex(*start, j.at("n_steps").get<std::size_t>(),
                       cal == "noleap" ? Calendar::NoLeap : Calendar::Gregorian);
    d.grid = grid_from_json(j.at("grid").dump());
    d.provenance = j.value("provenance", "");
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatErrc::Parse, std::string("descriptor JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatErrc::Parse, std::string("descriptor JSON: ") + e.what());
  }
}

std::string descriptor_path(const std::string& tensor_path) { return tensor_path + ".meta.json"; }

// ---------------------------------------------------------------- STT1

std::vector<std::uint8_t> encode_stt1(const DenseTensor3& t) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + static_cast<std::size_t>(t.size()) * 8 + kTrailerBytes);
  out.resize(4);
  std::memcpy(out.data(), "STT1", 4);
  put<std::uint32_t>(out, kStt1Version);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(t.dims().time));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(t.dims().space));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(t.dims().vars));
  for (double v : t.values()) put<double>(out, v);
  const std::uint32_t crc = crc32_of(out.data() + kHeaderBytes, out.size() - kHeaderBytes);
  put<std::uint32_t>(out, crc);
  return out;
}

std::uint32_t stt1_crc(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes + kTrailerBytes) {
    throw FormatError(FormatErrc::Truncated, "file shorter than STT1 header and trailer");
  }
  return get<std::uint32_t>(bytes, bytes.size() - kTrailerBytes);
}

DenseTensor3 decode_stt1(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw FormatError(FormatErrc::Truncated, "file ends inside the magic");
  if (std::memcmp(bytes.data(), "STT1", 4) != 0) {
    throw FormatError(FormatErrc::BadMagic, "missing STT1 magic");
  }
  if (bytes.size() < kHeaderBytes) {
    throw FormatError(FormatErrc::Truncated, "file ends inside the STT1 header");
  }
  const auto version = get<std::uint32_t>(bytes, 4);
  if (version != kStt1Version) {
    throw FormatError(FormatErrc::UnsupportedVersion,
                      "STT1 version " + std::to_string(version) + " is not supported");
  }
  const auto I = get<std::uint64_t>(bytes, 8);
  const auto J = get<std::uint64_t>(bytes, 16);
  const auto K = get<std::uint64_t>(bytes, 24);
  constexpr auto limit = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max() / 8);
  std::uint64_t count = 0;
  if (__builtin_mul_overflow(I, J, &count) || __builtin_mul_overflow(count, K, &count) ||
      count > limit) {
    throw FormatError(FormatErrc::DimOverflow, "dims " + std::to_string(I) + "x" +
                                                   std::to_string(J) + "x" + std::to_string(K) +
                                                   " overflow");
  }
  if (bytes.size() < kHeaderBytes + kTrailerBytes ||
      (bytes.size() - kHeaderBytes - kTrailerBytes) % 8 != 0) {
    throw FormatError(FormatErrc::Truncated, "file ends inside a payload value or the checksum");
  }
  const std::uint64_t present = (bytes.size() - kHeaderBytes - kTrailerBytes) / 8;
  if (present != count) {
    throw FormatError(FormatErrc::LengthMismatch,
                      "header promises " + std::to_string(count) + " values, file holds " +
                          std::to_string(present));
  }
  const std::uint32_t stored = get<std::uint32_t>(bytes, bytes.size() - kTrailerBytes);
  if (crc32_of(bytes.data() + kHeaderBytes, count * 8) != stored) {
    throw FormatError(FormatErrc::ChecksumMismatch, "payload CRC32 mismatch");
  }
  std::vector<double> values(count);
  for (std::uint64_t n = 0; n < count; ++n) {
    values[n] = get<double>(bytes, kHeaderBytes + n * 8);
    if (!std::isfinite(values[n])) {
      throw FormatError(FormatErrc::NonFinite, "non-finite value at linear index " +
                                                   std::to_string(n));
    }
  }
  return DenseTensor3({static_cast<Index>(I), static_cast<Index>(J), static_cast<Index>(K)},
                      std::move(values));
}

void save_binary(const std::string& path, const DenseTensor3& t,
                 const DatasetDescriptor* descriptor) {
  if (!t.all_finite()) throw FormatError(FormatErrc::NonFinite, "refusing to write non-finite tensor");
  if (descriptor && descriptor->dims() != t.dims()) {
    throw std::invalid_argument("save_binary: descriptor dims " + to_string(descriptor->dims()) +
                                " differ from tensor dims " + to_string(t.dims()));
  }
  const auto bytes = encode_stt1(t);
  write_file(path, bytes.data(), bytes.size());
  if (descriptor) {
    const std::string text = descriptor_to_json(*descriptor) + "\n";
    write_file(descriptor_path(path), text.data(), text.size());
  }
}

LoadedTensor load_binary(const std::string& path) {
  LoadedTensor out{decode_stt1(read_file(path)), {}};
  const std::string meta = descriptor_path(path);
  if (std::filesystem::exists(meta)) {
    out.descriptor = descriptor_from_json(read_text(meta));
    if (out.descriptor.dims() != out.tensor.dims()) {
      throw FormatError(FormatErrc::LengthMismatch,
                        "descriptor dims " + to_string(out.descriptor.dims()) +
                            " differ from tensor dims " + to_string(out.tensor.dims()));
    }
  } else {
    out.descriptor = DatasetDescriptor::defaults(out.tensor.dims());
  }
  return out;
}

// ---------------------------------------------------------------- CSV long

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

DenseTensor3 parse_csv_long(const std::string& text, const DatasetDescriptor& descriptor) {
  const Dims dims = descriptor.dims();
  std::unordered_map<std::string, Index> var_index;
  for (std::size_t k = 0; k < descriptor.variables.size(); ++k) {
    var_index.emplace(descriptor.variables[k], static_cast<Index>(k));
  }
  std::vector<double> values(static_cast<std::size_t>(dims.total()), 0.0);
  std::vector<bool> seen(values.size(), false);

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    std::string_view fields[4];
    std::size_t n_fields = 0;
    std::size_t start = 0;
    while (n_fields < 5) {
      const std::size_t comma = row.find(',', start);
      const std::string_view f = row.substr(start, comma == std::string_view::npos ? row.npos : comma - start);
      if (n_fields < 4) fields[n_fields] = trim(f);
      ++n_fields;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const std::string where = "line " + std::to_string(line_no);
    if (n_fields != 4) throw FormatError(FormatErrc::Parse, where + ": expected 4 fields");
    if (!header) {
      if (fields[0] != "date" || fields[1] != "cell_id" || fields[2] != "variable" ||
          fields[3] != "value") {
        throw FormatError(FormatErrc::Parse, "header must be date,cell_id,variable,value");
      }
      header = true;
      continue;
    }
    const auto date = parse_date(std::string(fields[0]));
    if (!date) throw FormatError(FormatErrc::Parse, where + ": bad date '" + std::string(fields[0]) + "'");
    const auto i = descriptor.time.find(*date);
    if (!i) {
      throw FormatError(FormatErrc::OutOfRange,
                        where + ": date " + std::string(fields[0]) + " outside the time index");
    }
    Index j = -1;
    if (std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), j).ptr !=
        fields[1].data() + fields[1].size()) {
      throw FormatError(FormatErrc::Parse, where + ": bad cell_id");
    }
    if (j < 0 || j >= dims.space) {
      throw FormatError(FormatErrc::OutOfRange, where + ": cell_id " + std::to_string(j) +
                                                    " out of range");
    }
    const auto var = var_index.find(std::string(fields[2]));
    if (var == var_index.end()) {
      throw FormatError(FormatErrc::UnknownVariable,
                        where + ": unknown variable '" + std::string(fields[2]) + "'");
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), v);
    if (ec != std::errc() || ptr != fields[3].data() + fields[3].size()) {
      throw FormatError(FormatErrc::Parse, where + ": bad value '" + std::string(fields[3]) + "'");
    }
    if (!std::isfinite(v)) throw FormatError(FormatErrc::NonFinite, where + ": non-finite value");
    const auto at = static_cast<std::size_t>(static_cast<Index>(*i) +
                                             dims.time * (j + dims.space * var->second));
    if (seen[at]) {
      throw FormatError(FormatErrc::DuplicateEntry,
                        where + ": duplicate (" + std::string(fields[0]) + ", " +
                            std::to_string(j) + ", " + std::string(fields[2]) + ")");
    }
    seen[at] = true;
    values[at] = v;
  }
  if (!header) throw FormatError(FormatErrc::Parse, "empty CSV");
  for (std::size_t at = 0; at < seen.size(); ++at) {
    if (seen[at]) continue;
    const auto idx = static_cast<Index>(at);
    const Index i = idx % dims.time;
    const Index j = (idx / dims.time) % dims.space;
    const Index k = idx / (dims.time * dims.space);
    throw FormatError(FormatErrc::MissingEntry,
                      "no row for (" + format_date(descriptor.time.date(static_cast<std::size_t>(i))) +
                          ", " + std::to_string(j) + ", " +
                          descriptor.variables[static_cast<std::size_t>(k)] + ")");
  }
  return DenseTensor3(dims, std::move(values));
}

DenseTensor3 load_csv_long(const std::string& path, const DatasetDescriptor& descriptor) {
  return parse_csv_long(read_text(path), descriptor);
}

void save_csv_long(const std::string& path, const DenseTensor3& t,
                   const DatasetDescriptor& descriptor) {
  if (descriptor.dims() != t.dims()) {
    throw std::invalid_argument("save_csv_long: descriptor dims differ from tensor dims");
  }
  std::ofstream out(path);
  if (!out) throw FormatError(FormatErrc::Io, "cannot write " + path);
  out << "date,cell_id,variable,value\n";
  char buf[32];
  for (Index i = 0; i < t.dims().time; ++i) {
    const std::string date = format_date(descriptor.time.date(static_cast<std::size_t>(i)));
    for (Index j = 0; j < t.dims().space; ++j) {
      for (Index k = 0; k < t.dims().vars; ++k) {
        const auto res = std::to_chars(buf, buf + sizeof buf, t(i, j, k));
        out << date << ',' << j << ',' << descriptor.variables[static_cast<std::size_t>(k)] << ','
            << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
      }
    }
  }
}

}  // namespace stcpd
