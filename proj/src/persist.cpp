#include "otmorph/persist.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "otmorph/errors.hpp"

namespace otm {

namespace {

// Doubles are stored little-endian on disk regardless of the host.
void to_little_endian(std::vector<unsigned char>& bytes) {
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t n = 0; n + 8 <= bytes.size(); n += 8) {
            std::swap(bytes[n], bytes[n + 7]);
            std::swap(bytes[n + 1], bytes[n + 6]);
            std::swap(bytes[n + 2], bytes[n + 5]);
            std::swap(bytes[n + 3], bytes[n + 4]);
        }
    }
}

}  // namespace

std::string fnv1a64_hex(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t n = 0; n < bytes; ++n) {
        h ^= p[n];
        h *= 1099511628211ULL;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return std::string(out, 16);
}

void save_raw_field(const std::string& path, std::span<const double> values,
                    std::span<const std::int64_t> dims, const std::string& ordering) {
    std::int64_t expected = 1;
    for (std::int64_t d : dims) expected *= d;
    if (expected != static_cast<std::int64_t>(values.size())) {
        throw ShapeError(path + ": dims do not multiply to the value count");
    }

    std::vector<unsigned char> bytes(values.size() * 8);
    std::memcpy(bytes.data(), values.data(), bytes.size());
    to_little_endian(bytes);
    const std::string digest = fnv1a64_hex(bytes.data(), bytes.size());

    std::ofstream raw(path, std::ios::binary);
    if (!raw) throw ExportError(path + ": cannot open file for writing");
    raw.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!raw) throw ExportError(path + ": write failed");
    raw.close();

    nlohmann::json sidecar{{"dtype", "f64"},
                           {"byte_order", "little"},
                           {"dims", std::vector<std::int64_t>(dims.begin(), dims.end())},
                           {"ordering", ordering},
                           {"count", values.size()},
                           {"checksum", "fnv1a64:" + digest}};
    std::ofstream meta(path + ".json");
    if (!meta) throw ExportError(path + ".json: cannot open sidecar for writing");
    meta << sidecar.dump(2) << "\n";
    if (!meta) throw ExportError(path + ".json: write failed");
}

std::vector<double> load_raw_field(const std::string& path, RawFieldInfo* info,
                                   bool require_checksum) {
    std::ifstream meta(path + ".json");
    if (!meta) throw IngestionError(path + ".json: missing sidecar");
    nlohmann::json sidecar;
    try {
        meta >> sidecar;
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(path + ".json: malformed sidecar: " + e.what());
    }

    std::size_t count = 0;
    std::string stored;
    RawFieldInfo local;
    try {
        if (sidecar.at("dtype").get<std::string>() != "f64") {
            throw IngestionError(path + ": unsupported dtype");
        }
        if (sidecar.at("byte_order").get<std::string>() != "little") {
            throw IngestionError(path + ": unsupported byte order");
        }
        count = sidecar.at("count").get<std::size_t>();
        stored = sidecar.at("checksum").get<std::string>();
        local.dims = sidecar.at("dims").get<std::vector<std::int64_t>>();
        local.ordering = sidecar.value("ordering", "");
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError(path + ".json: incomplete sidecar: " + e.what());
    }

    std::ifstream raw(path, std::ios::binary);
    if (!raw) throw IngestionError(path + ": missing data file");
    std::vector<unsigned char> bytes(count * 8);
    raw.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(raw.gcount()) != bytes.size()) {
        throw IngestionError(path + ": data file shorter than sidecar count");
    }

    local.stored_checksum = stored;
    local.computed_checksum = "fnv1a64:" + fnv1a64_hex(bytes.data(), bytes.size());
    local.checksum_ok = (local.stored_checksum == local.computed_checksum);
    if (info) *info = local;
    if (require_checksum && !local.checksum_ok) {
        throw IngestionError(path + ": checksum mismatch (" + local.computed_checksum +
                             " != " + stored + ")");
    }

    to_little_endian(bytes);  // swaps back on big-endian hosts
    std::vector<double> values(count);
    std::memcpy(values.data(), bytes.data(), bytes.size());
    return values;
}

}  // namespace otm
