#include "semaxis/saxd.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <set>

#include "semaxis/error.hpp"

namespace semaxis::io {

namespace {

using Bytes = std::span<const std::uint8_t>;

class Writer {
public:
    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void raw(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

std::uint16_t get_u16(Bytes b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t get_u32(Bytes b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[off + static_cast<std::size_t>(i)];
    return v;
}

bool valid_utf8_name(Bytes b, std::size_t off, std::size_t n) {
    std::size_t i = 0;
    while (i < n) {
        const std::uint8_t c = b[off + i];
        std::size_t extra = 0;
        if (c < 0x20 || c == 0x7f) return false;
        if (c < 0x80) extra = 0;
        else if ((c & 0xE0) == 0xC0 && c >= 0xC2) extra = 1;
        else if ((c & 0xF0) == 0xE0) extra = 2;
        else if ((c & 0xF8) == 0xF0 && c <= 0xF4) extra = 3;
        else return false;
        if (i + extra >= n + (extra == 0 ? 1 : 0) && extra) return false;
        for (std::size_t k = 1; k <= extra; ++k)
            if (i + k >= n || (b[off + i + k] & 0xC0) != 0x80) return false;
        i += extra + 1;
    }
    return true;
}

struct Preamble {
    nlohmann::json header;
    std::size_t body = 0;
};

Preamble read_preamble(Bytes b, std::string_view magic) {
    const std::size_t head = std::min<std::size_t>(b.size(), 4);
    if (std::memcmp(b.data(), magic.data(), head) != 0)
        fail(ErrorKind::bad_magic, "not a " + std::string(magic) + " file (bad magic bytes)");
    if (b.size() < 4) fail(ErrorKind::truncated, "file truncated inside magic bytes");
    if (b.size() < 8) fail(ErrorKind::truncated, "file truncated inside version field");
    const std::uint32_t version = get_u32(b, 4);
    if (version != kSaxdVersion)
        fail(ErrorKind::version_mismatch, "unsupported " + std::string(magic) + " version " +
                                              std::to_string(version) + " (expected " +
                                              std::to_string(kSaxdVersion) + ")");
    if (b.size() < 12) fail(ErrorKind::truncated, "file truncated inside header length");
    const std::uint32_t len = get_u32(b, 8);
    if (b.size() - 12 < len) fail(ErrorKind::truncated, "file truncated inside header JSON");
    Preamble p;
    try {
        p.header = nlohmann::json::parse(b.begin() + 12, b.begin() + 12 + len);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::parse, std::string("header JSON does not parse: ") + e.what());
    }
    if (!p.header.is_object()) fail(ErrorKind::parse, "header JSON is not an object");
    p.body = 12 + len;
    return p;
}

struct RecordLoc {
    std::size_t name_off = 0;
    std::size_t name_len = 0;
    std::size_t payload_off = 0;
};

enum class WalkFailure { none, overrun, implausible, trailing };

struct WalkResult {
    WalkFailure failure = WalkFailure::none;
    std::size_t index = 0;  // record at which the walk failed
};

using FloatCount = std::function<std::size_t(std::size_t)>;

// Walks records [first, count) starting at `offset`; succeeds only if the last
// record ends exactly at end of file.
WalkResult walk(Bytes b, std::size_t offset, std::size_t first, std::size_t count,
                const FloatCount& floats, std::vector<RecordLoc>* locs) {
    const std::size_t size = b.size();
    for (std::size_t i = first; i < count; ++i) {
        if (size - offset < 2) return {WalkFailure::overrun, i};
        const std::size_t n = get_u16(b, offset);
        if (size - offset - 2 < n) return {WalkFailure::overrun, i};
        if (n == 0 || !valid_utf8_name(b, offset + 2, n)) return {WalkFailure::implausible, i};
        const std::size_t payload = offset + 2 + n;
        const std::size_t want = 4 * floats(i);
        if (size - payload < want) return {WalkFailure::overrun, i};
        if (locs) locs->push_back({offset + 2, n, payload});
        offset = payload + want;
    }
    if (offset != size) return {WalkFailure::trailing, count};
    return {};
}

// Float count k != expected for record i that lets every later record parse.
std::optional<std::size_t> diagnose(Bytes b, const RecordLoc& loc, std::size_t i,
                                    std::size_t count, const FloatCount& floats) {
    const std::size_t expected = floats(i);
    const std::size_t room = (b.size() - loc.payload_off) / 4;
    const std::size_t span = std::max(room, expected);
    for (std::size_t delta = 1; delta <= span; ++delta) {
        for (int sign : {-1, 1}) {
            if (sign < 0 && delta > expected) continue;
            const std::size_t k = sign < 0 ? expected - delta : expected + delta;
            if (k > room) continue;
            const WalkResult r = walk(b, loc.payload_off + 4 * k, i + 1, count, floats, nullptr);
            if (r.failure == WalkFailure::none) return k;
        }
    }
    return std::nullopt;
}

struct DecodedRecords {
    std::vector<RecordLoc> locs;
};

std::vector<RecordLoc> locate_records(Bytes b, std::size_t body, std::size_t count,
                                      const FloatCount& floats, std::string_view what) {
    std::vector<RecordLoc> locs;
    const WalkResult r = walk(b, body, 0, count, floats, &locs);
    if (r.failure == WalkFailure::none) return locs;

    // A wrong-length record shows up as a failure at the record after it.
    if (r.index > 0) {
        const std::size_t blame = r.index - 1;
        if (auto k = diagnose(b, locs[blame], blame, count, floats)) {
            const std::string name(reinterpret_cast<const char*>(b.data()) + locs[blame].name_off,
                                   locs[blame].name_len);
            fail(ErrorKind::dim_inconsistency,
                 std::string(what) + " record '" + name + "' holds " + std::to_string(*k) +
                     " floats but the header requires " + std::to_string(floats(blame)));
        }
    }
    switch (r.failure) {
        case WalkFailure::overrun:
            fail(ErrorKind::truncated, std::string(what) + " truncated in record " +
                                           std::to_string(r.index) + " of " +
                                           std::to_string(count));
        case WalkFailure::implausible:
            fail(ErrorKind::parse,
                 std::string(what) + " record " + std::to_string(r.index) + " has a corrupt name");
        default:
            fail(ErrorKind::parse, std::string(what) + " has trailing bytes after the last record");
    }
}

std::size_t header_uint(const nlohmann::json& h, const char* key) {
    const auto it = h.find(key);
    if (it == h.end() || !it->is_number_unsigned())
        fail(ErrorKind::parse, std::string("header field '") + key +
                                   "' missing or not an unsigned integer");
    return it->get<std::size_t>();
}

std::string header_string(const nlohmann::json& h, const char* key) {
    const auto it = h.find(key);
    if (it == h.end() || !it->is_string())
        fail(ErrorKind::parse, std::string("header field '") + key + "' missing or not a string");
    return it->get<std::string>();
}

std::vector<float> read_floats(Bytes b, std::size_t off, std::size_t n) {
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::bit_cast<float>(get_u32(b, off + 4 * i));
    return out;
}

void write_record(Writer& w, const std::string& name, std::span<const float> values) {
    if (name.empty() || name.size() > 0xFFFF)
        fail(ErrorKind::invalid_input, "record name must be 1..65535 bytes: '" + name + "'");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.raw(name);
    for (float v : values) w.f32(v);
}

std::vector<std::uint8_t> frame(std::string_view magic, const nlohmann::json& header) {
    Writer w;
    w.raw(magic);
    w.u32(kSaxdVersion);
    const std::string text = header.dump();
    w.u32(static_cast<std::uint32_t>(text.size()));
    w.raw(text);
    return w.take();
}

}  // namespace

const SaxdRecord* SaxdDump::find(const std::string& name) const {
    for (const auto& r : records)
        if (r.name == name) return &r;
    return nullptr;
}

std::vector<std::uint8_t> encode_saxd(const SaxdDump& dump) {
    nlohmann::json header = dump.header.extra.is_object() ? dump.header.extra
                                                          : nlohmann::json::object();
    header["model_id"] = dump.header.model_id;
    header["layer"] = dump.header.layer;
    header["dim"] = dump.header.dim;
    header["pooling"] = dump.header.pooling;
    header["count"] = dump.records.size();
    std::set<std::string> names;
    for (const auto& r : dump.records) {
        if (r.values.size() != dump.header.dim)
            fail(ErrorKind::dim_inconsistency, "record '" + r.name + "' has " +
                                                   std::to_string(r.values.size()) +
                                                   " values, header dim is " +
                                                   std::to_string(dump.header.dim));
        if (!names.insert(r.name).second)
            fail(ErrorKind::duplicate_name, "duplicate record name '" + r.name + "'");
    }
    Writer w;
    auto bytes = frame("SAXD", header);
    for (const auto& r : dump.records) write_record(w, r.name, r.values);
    auto body = w.take();
    bytes.insert(bytes.end(), body.begin(), body.end());
    return bytes;
}

SaxdDump decode_saxd(std::span<const std::uint8_t> bytes) {
    const Preamble pre = read_preamble(bytes, "SAXD");
    SaxdDump dump;
    dump.header.model_id = header_string(pre.header, "model_id");
    dump.header.layer = header_uint(pre.header, "layer");
    dump.header.dim = header_uint(pre.header, "dim");
    dump.header.pooling = header_string(pre.header, "pooling");
    const std::size_t count = header_uint(pre.header, "count");
    if (dump.header.dim == 0) fail(ErrorKind::parse, "header dim must be positive");
    dump.header.extra = pre.header;
    for (const char* key : {"model_id", "layer", "dim", "pooling", "count"})
        dump.header.extra.erase(key);

    const std::size_t dim = dump.header.dim;
    const auto locs = locate_records(bytes, pre.body, count,
                                     [dim](std::size_t) { return dim; }, "SAXD");
    std::set<std::string> names;
    dump.records.reserve(count);
    for (const auto& loc : locs) {
        SaxdRecord rec;
        rec.name.assign(reinterpret_cast<const char*>(bytes.data()) + loc.name_off, loc.name_len);
        if (!names.insert(rec.name).second)
            fail(ErrorKind::duplicate_name, "duplicate record name '" + rec.name + "'");
        rec.values = read_floats(bytes, loc.payload_off, dim);
        dump.records.push_back(std::move(rec));
    }
    return dump;
}

std::vector<std::uint8_t> encode_weights(const WeightFile& file) {
    nlohmann::json header = file.extra.is_object() ? file.extra : nlohmann::json::object();
    header["model_id"] = file.model_id;
    header["count"] = file.tensors.size();
    nlohmann::json list = nlohmann::json::array();
    for (const auto& t : file.tensors) {
        std::size_t n = 1;
        for (auto s : t.shape) n *= s;
        if (n != t.values.size())
            fail(ErrorKind::dim_inconsistency,
                 "tensor '" + t.name + "' shape does not match its value count");
        list.push_back({{"name", t.name}, {"shape", t.shape}});
    }
    header["tensors"] = list;
    auto bytes = frame("SAXW", header);
    Writer w;
    for (const auto& t : file.tensors) write_record(w, t.name, t.values);
    auto body = w.take();
    bytes.insert(bytes.end(), body.begin(), body.end());
    return bytes;
}

WeightFile decode_weights(std::span<const std::uint8_t> bytes) {
    const Preamble pre = read_preamble(bytes, "SAXW");
    WeightFile file;
    file.model_id = header_string(pre.header, "model_id");
    const std::size_t count = header_uint(pre.header, "count");
    const auto it = pre.header.find("tensors");
    if (it == pre.header.end() || !it->is_array() || it->size() != count)
        fail(ErrorKind::parse, "weights header needs a 'tensors' list of length count");
    std::vector<std::size_t> sizes;
    for (const auto& t : *it) {
        WeightTensor wt;
        try {
            wt.name = t.at("name").get<std::string>();
            wt.shape = t.at("shape").get<std::vector<std::size_t>>();
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::parse, std::string("bad tensor entry in weights header: ") + e.what());
        }
        std::size_t n = 1;
        for (auto s : wt.shape) n *= s;
        sizes.push_back(n);
        file.tensors.push_back(std::move(wt));
    }
    file.extra = pre.header;
    for (const char* key : {"model_id", "count", "tensors"}) file.extra.erase(key);

    const auto locs = locate_records(bytes, pre.body, count,
                                     [&](std::size_t i) { return sizes[i]; }, "SAXW");
    for (std::size_t i = 0; i < count; ++i) {
        const std::string name(reinterpret_cast<const char*>(bytes.data()) + locs[i].name_off,
                               locs[i].name_len);
        if (name != file.tensors[i].name)
            fail(ErrorKind::parse, "weights record " + std::to_string(i) + " is '" + name +
                                       "' but the header lists '" + file.tensors[i].name + "'");
        file.tensors[i].values = read_floats(bytes, locs[i].payload_off, sizes[i]);
    }
    return file;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::io, "cannot open '" + tmp.string() + "' for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) fail(ErrorKind::io, "write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorKind::io, "cannot move '" + tmp.string() + "' into place: " + ec.message());
}

void write_saxd(const std::filesystem::path& path, const SaxdDump& dump) {
    write_bytes(path, encode_saxd(dump));
}

SaxdDump read_saxd(const std::filesystem::path& path) { return decode_saxd(read_bytes(path)); }

}  // namespace semaxis::io
