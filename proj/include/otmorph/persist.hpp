#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace otm {

// FNV-1a 64-bit digest as 16 lowercase hex digits.
std::string fnv1a64_hex(const void* data, std::size_t bytes);

struct RawFieldInfo {
    std::vector<std::int64_t> dims;
    std::string ordering;
    bool checksum_ok = true;
    std::string stored_checksum;
    std::string computed_checksum;
};

// Writes values as raw little-endian f64 plus a JSON sidecar at path + ".json"
// carrying dtype, byte order, dims, ordering, count and an fnv1a64 checksum.
void save_raw_field(const std::string& path, std::span<const double> values,
                    std::span<const std::int64_t> dims, const std::string& ordering);

// Reads a raw field back, validating count and checksum against the sidecar.
// With require_checksum, a digest mismatch throws IngestionError; otherwise it
// is only recorded in *info.
std::vector<double> load_raw_field(const std::string& path, RawFieldInfo* info = nullptr,
                                   bool require_checksum = true);

}  // namespace otm
