#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace semaxis::io {

// SAXD activation dump, little-endian throughout:
//   "SAXD" | u32 version (=1) | u32 header length | header JSON (UTF-8)
//   then `count` records of: u16 name length | name (UTF-8) | dim x f32

inline constexpr std::uint32_t kSaxdVersion = 1;

struct SaxdHeader {
    std::string model_id;
    std::size_t layer = 0;
    std::size_t dim = 0;
    std::string pooling;
    // Any further header keys (written by other producers) survive a round trip.
    nlohmann::json extra = nlohmann::json::object();
};

struct SaxdRecord {
    std::string name;
    std::vector<float> values;

    friend bool operator==(const SaxdRecord&, const SaxdRecord&) = default;
};

struct SaxdDump {
    SaxdHeader header;
    std::vector<SaxdRecord> records;

    const SaxdRecord* find(const std::string& name) const;
};

std::vector<std::uint8_t> encode_saxd(const SaxdDump& dump);
/// Distinct error kinds: bad-magic, version-mismatch, truncated,
/// dim-inconsistency (names the record), duplicate-name, parse.
SaxdDump decode_saxd(std::span<const std::uint8_t> bytes);

void write_saxd(const std::filesystem::path& path, const SaxdDump& dump);
SaxdDump read_saxd(const std::filesystem::path& path);

// SAXD-W weight container: same framing with magic "SAXW"; the header lists
// each tensor's name and shape, and record i carries prod(shape_i) f32 values.

struct WeightTensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<float> values;
};

struct WeightFile {
    std::string model_id;
    std::vector<WeightTensor> tensors;
    nlohmann::json extra = nlohmann::json::object();
};

std::vector<std::uint8_t> encode_weights(const WeightFile& file);
WeightFile decode_weights(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace semaxis::io
