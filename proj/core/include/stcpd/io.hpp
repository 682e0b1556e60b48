#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stcpd/calendar.hpp"
#include "stcpd/grid.hpp"
#include "stcpd/tensor.hpp"

namespace stcpd {

/// What the tensor axes mean: variables (mode 3), days (mode 1), grid (mode 2).
struct DatasetDescriptor {
  std::vector<std::string> variables;
  TimeIndex time;
  GridSpec grid;
  std::string provenance;

  /// Generic descriptor: variables v1..vK, Gregorian days from 1979-01-01,
  /// single-row grid.
  static DatasetDescriptor defaults(Dims dims);
  Dims dims() const;
};

std::string descriptor_to_json(const DatasetDescriptor& d);
DatasetDescriptor descriptor_from_json(const std::string& text);

/// Sidecar path holding the descriptor of an STT1 file: "<path>.meta.json".
std::string descriptor_path(const std::string& tensor_path);

inline constexpr std::uint32_t kStt1Version = 1;

/**
 * STT1 layout (all little-endian):
 *   "STT1" | version u32 | I u64 | J u64 | K u64 | I*J*K float64 | CRC32(payload) u32
 * Payload order is the tensor's linear index i + I*j + I*J*k.
 *
 * Failure codes: BadMagic, UnsupportedVersion, DimOverflow, Truncated (file
 * ends inside the header or inside a value), LengthMismatch (whole values
 * present but their count differs from I*J*K), ChecksumMismatch, NonFinite.
 */
std::vector<std::uint8_t> encode_stt1(const DenseTensor3& t);
DenseTensor3 decode_stt1(const std::vector<std::uint8_t>& bytes);

/// CRC32 of the STT1 payload as stored in the trailer.
std::uint32_t stt1_crc(const std::vector<std::uint8_t>& bytes);

struct LoadedTensor {
  DenseTensor3 tensor;
  DatasetDescriptor descriptor;
};

/// Writes the STT1 file; when `descriptor` is given its sidecar is written too.
void save_binary(const std::string& path, const DenseTensor3& t,
                 const DatasetDescriptor* descriptor = nullptr);

/// Reads an STT1 file and its sidecar (or default descriptor when absent).
LoadedTensor load_binary(const std::string& path);

/**
 * CSV-long ingestion: header `date,cell_id,variable,value`, ISO dates that
 * must appear in descriptor.time, 0-based active-cell ids, variable names from
 * the descriptor. Every (date, cell, variable) must appear exactly once.
 */
DenseTensor3 load_csv_long(const std::string& path, const DatasetDescriptor& descriptor);
DenseTensor3 parse_csv_long(const std::string& text, const DatasetDescriptor& descriptor);
void save_csv_long(const std::string& path, const DenseTensor3& t,
                   const DatasetDescriptor& descriptor);

}  // namespace stcpd
