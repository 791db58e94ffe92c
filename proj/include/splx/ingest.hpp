#pragma once

// SPLX binary dumps (activation matrices, per-sample gradient stacks) and JSON
// run manifests. Byte layout is documented in docs/formats.md.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "matrix.hpp"

namespace splx::ingest {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

enum class DumpKind : std::uint8_t { Activation = 1, Gradient = 2 };
enum class DumpDtype : std::uint8_t { Float32 = 1, Float64 = 2 };

inline constexpr std::array<char, 4> kMagic{'S', 'P', 'L', 'X'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 4 + 4 + 1 + 1 + 1 + 2 * 8;

inline const char *to_string(DumpKind k) { return k == DumpKind::Activation ? "activation" : "gradient"; }

struct DumpHeader {
    std::uint32_t version = kVersion;
    DumpKind kind = DumpKind::Activation;
    DumpDtype dtype = DumpDtype::Float64;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;

    std::size_t element_size() const { return dtype == DumpDtype::Float32 ? 4 : 8; }
};

struct Dump {
    DumpHeader header;
    DenseMatrix matrix;
};

namespace detail {

template<typename T>
void put_le(std::string &out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, T>>;
    U bits;
    std::memcpy(&bits, &value, sizeof(T));
    for (std::size_t b = 0; b < sizeof(T); ++b) { out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu)); }
}

template<typename T>
T get_le(const unsigned char *p) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, T>>;
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) { bits |= static_cast<U>(static_cast<U>(p[b]) << (8 * b)); }
    T value;
    std::memcpy(&value, &bits, sizeof(T));
    return value;
}

}  // namespace detail

/// Serialized bytes of a dump; the exact layout written by write_dump.
inline std::string encode_dump(const DenseMatrix &m, DumpKind kind, DumpDtype dtype) {
    std::string out;
    const std::size_t esize = dtype == DumpDtype::Float32 ? 4 : 8;
    out.reserve(kHeaderSize + m.rows() * m.cols() * esize);
    out.append(kMagic.begin(), kMagic.end());
    detail::put_le<std::uint32_t>(out, kVersion);
    out.push_back(static_cast<char>(kind));
    out.push_back(static_cast<char>(dtype));
    out.push_back(static_cast<char>(2));
    detail::put_le<std::uint64_t>(out, m.rows());
    detail::put_le<std::uint64_t>(out, m.cols());
    for (double v : m.entries()) {
        if (dtype == DumpDtype::Float32) {
            detail::put_le<float>(out, static_cast<float>(v));
        } else {
            detail::put_le<double>(out, v);
        }
    }
    return out;
}

inline Dump decode_dump(const std::string &bytes) {
    const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
    const std::size_t n = bytes.size();
    if (n < 11) { throw TruncationError("file shorter than the fixed header"); }
    if (std::memcmp(p, kMagic.data(), 4) != 0) { throw FormatError("bad magic (expected SPLX)"); }
    DumpHeader h;
    h.version = detail::get_le<std::uint32_t>(p + 4);
    if (h.version != kVersion) { throw FormatError("unsupported version " + std::to_string(h.version)); }
    const auto kind = p[8];
    const auto dtype = p[9];
    const auto ndim = p[10];
    if (kind != 1 && kind != 2) { throw FormatError("unknown dump kind " + std::to_string(kind)); }
    if (dtype != 1 && dtype != 2) { throw FormatError("unknown dtype " + std::to_string(dtype)); }
    if (ndim != 2) { throw UnsupportedShape("ndim " + std::to_string(ndim) + " (only 2 is supported)"); }
    h.kind = static_cast<DumpKind>(kind);
    h.dtype = static_cast<DumpDtype>(dtype);
    if (n < kHeaderSize) { throw TruncationError("header dims truncated"); }
    h.rows = detail::get_le<std::uint64_t>(p + 11);
    h.cols = detail::get_le<std::uint64_t>(p + 19);
    if (h.rows == 0 || h.cols == 0) { throw FormatError("dims must be positive"); }
    const std::size_t es = h.element_size();
    if (h.rows > (n / es) || h.cols > (n / es) / h.rows) {
        throw TruncationError("payload shorter than the dims promise");
    }
    const std::size_t count = static_cast<std::size_t>(h.rows * h.cols);
    const std::size_t expected = kHeaderSize + count * es;
    if (n < expected) { throw TruncationError("payload shorter than the dims promise"); }
    if (n > expected) { throw FormatError("trailing bytes after payload"); }
    std::vector<double> values(count);
    const unsigned char *payload = p + kHeaderSize;
    for (std::size_t k = 0; k < count; ++k) {
        const double v = h.dtype == DumpDtype::Float32 ? static_cast<double>(detail::get_le<float>(payload + 4 * k))
                                                       : detail::get_le<double>(payload + 8 * k);
        if (!std::isfinite(v)) { throw FormatError("non-finite entry at index " + std::to_string(k)); }
        values[k] = v;
    }
    return Dump{h, DenseMatrix(h.rows, h.cols, std::move(values))};
}

inline std::string read_file_bytes(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw IoError("cannot open " + path.string()); }
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline Dump read_dump_with_header(const std::filesystem::path &path) { return decode_dump(read_file_bytes(path)); }

inline DenseMatrix read_dump(const std::filesystem::path &path) { return read_dump_with_header(path).matrix; }

inline void write_dump(const DenseMatrix &m, DumpKind kind, DumpDtype dtype, const std::filesystem::path &path) {
    const std::string bytes = encode_dump(m, kind, dtype);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) { throw IoError("cannot open " + path.string() + " for writing"); }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) { throw IoError("write failed for " + path.string()); }
}

// ---------------------------------------------------------------------------
// Run manifests

struct Checkpoint {
    std::int64_t step = 0;
    double tokens = 0.0;
    std::optional<double> loss;
    std::optional<std::filesystem::path> activation_dump;
    std::optional<std::filesystem::path> gradient_dump;

    friend bool operator==(const Checkpoint &, const Checkpoint &) = default;
};

struct RunManifest {
    std::filesystem::path source;
    std::string family;
    std::int64_t tier = 0;
    std::string scale;
    double target_loss = 0.0;
    std::optional<double> throughput;
    std::string layer;
    std::vector<Checkpoint> checkpoints;  // strictly ascending tokens
    std::vector<std::string> warnings;    // unknown fields

    /// Tokens at the first checkpoint whose loss is at or below the target.
    std::optional<double> tokens_to_target() const {
        for (const auto &c : checkpoints) {
            if (c.loss && *c.loss <= target_loss) { return c.tokens; }
        }
        return std::nullopt;
    }

    bool complete() const { return tokens_to_target().has_value(); }

    /// Latest checkpoint at or before `tokens` that carries an activation dump.
    const Checkpoint *early_activation(double tokens) const {
        const Checkpoint *best = nullptr;
        for (const auto &c : checkpoints) {
            if (c.tokens <= tokens && c.activation_dump) { best = &c; }
        }
        return best;
    }

    /// Last checkpoint carrying a dump of the given kind.
    const Checkpoint *final_with(DumpKind kind) const {
        for (auto it = checkpoints.rbegin(); it != checkpoints.rend(); ++it) {
            if (kind == DumpKind::Activation ? it->activation_dump.has_value() : it->gradient_dump.has_value()) {
                return &*it;
            }
        }
        return nullptr;
    }
};

namespace detail {

using nlohmann::json;

inline const json &require(const json &obj, const std::string &key, const std::string &path) {
    auto it = obj.find(key);
    if (it == obj.end()) { throw SchemaError(path + key, "missing required field"); }
    return *it;
}

inline double require_number(const json &v, const std::string &path) {
    if (!v.is_number()) { throw SchemaError(path, "expected a number"); }
    const double d = v.get<double>();
    if (!std::isfinite(d)) { throw SchemaError(path, "expected a finite number"); }
    return d;
}

inline std::int64_t require_integer(const json &v, const std::string &path) {
    if (!v.is_number_integer()) { throw SchemaError(path, "expected an integer"); }
    return v.get<std::int64_t>();
}

inline std::string require_string(const json &v, const std::string &path) {
    if (!v.is_string()) { throw SchemaError(path, "expected a string"); }
    return v.get<std::string>();
}

inline void collect_unknown(const json &obj, std::initializer_list<const char *> known, const std::string &path,
                            std::vector<std::string> &warnings) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool found = false;
        for (const char *k : known) { found = found || it.key() == k; }
        if (!found) { warnings.push_back("ignoring unknown field " + path + it.key()); }
    }
}

inline std::filesystem::path resolve_path(const json &v, const std::string &path, const std::filesystem::path &base) {
    std::filesystem::path p = require_string(v, path);
    if (p.is_relative()) { p = base / p; }
    if (!std::filesystem::exists(p)) { throw SchemaError(path, "file not found: " + p.string()); }
    return p.lexically_normal();
}

}  // namespace detail

inline RunManifest parse_manifest(const std::string &text, const std::filesystem::path &base_dir,
                                  const std::filesystem::path &source = {}) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw SchemaError("$", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) { throw SchemaError("$", "manifest must be a JSON object"); }

    RunManifest m;
    m.source = source;
    detail::collect_unknown(doc, {"family", "tier", "scale", "target_loss", "throughput", "layer", "checkpoints"},
                            "", m.warnings);
    m.family = detail::require_string(detail::require(doc, "family", ""), "family");
    m.tier = detail::require_integer(detail::require(doc, "tier", ""), "tier");
    if (m.tier <= 0) { throw SchemaError("tier", "must be positive"); }
    m.scale = detail::require_string(detail::require(doc, "scale", ""), "scale");
    if (m.scale != "d12" && m.scale != "d36" && m.scale != "d48") {
        throw SchemaError("scale", "must be one of d12, d36, d48");
    }
    m.target_loss = detail::require_number(detail::require(doc, "target_loss", ""), "target_loss");
    if (auto it = doc.find("throughput"); it != doc.end()) {
        const double q = detail::require_number(*it, "throughput");
        if (!(q > 0.0)) { throw SchemaError("throughput", "must be positive"); }
        m.throughput = q;
    }
    if (auto it = doc.find("layer"); it != doc.end()) { m.layer = detail::require_string(*it, "layer"); }

    const json &cps = detail::require(doc, "checkpoints", "");
    if (!cps.is_array()) { throw SchemaError("checkpoints", "expected an array"); }
    for (std::size_t k = 0; k < cps.size(); ++k) {
        const std::string path = "checkpoints[" + std::to_string(k) + "].";
        const json &c = cps[k];
        if (!c.is_object()) { throw SchemaError("checkpoints[" + std::to_string(k) + "]", "expected an object"); }
        detail::collect_unknown(c, {"step", "tokens", "loss", "activation_dump", "gradient_dump"}, path, m.warnings);
        Checkpoint cp;
        cp.step = detail::require_integer(detail::require(c, "step", path), path + "step");
        cp.tokens = detail::require_number(detail::require(c, "tokens", path), path + "tokens");
        if (cp.tokens < 0.0) { throw SchemaError(path + "tokens", "must be nonnegative"); }
        if (auto it = c.find("loss"); it != c.end() && !it->is_null()) { cp.loss = detail::require_number(*it, path + "loss"); }
        if (auto it = c.find("activation_dump"); it != c.end() && !it->is_null()) {
            cp.activation_dump = detail::resolve_path(*it, path + "activation_dump", base_dir);
        }
        if (auto it = c.find("gradient_dump"); it != c.end() && !it->is_null()) {
            cp.gradient_dump = detail::resolve_path(*it, path + "gradient_dump", base_dir);
        }
        if (!m.checkpoints.empty() && !(cp.tokens > m.checkpoints.back().tokens)) {
            throw OrderError("checkpoints must have strictly ascending token counts (at " + path + "tokens)");
        }
        m.checkpoints.push_back(std::move(cp));
    }
    return m;
}

inline RunManifest read_manifest(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) { throw IoError("cannot open manifest " + path.string()); }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_manifest(text, path.parent_path(), path);
}

/// Inverse of parse_manifest; dump paths are written relative to `base_dir`
/// when possible.
inline std::string manifest_to_json(const RunManifest &m, const std::filesystem::path &base_dir = {}) {
    using detail::json;
    json doc = json::object();
    doc["family"] = m.family;
    doc["tier"] = m.tier;
    doc["scale"] = m.scale;
    doc["target_loss"] = m.target_loss;
    if (m.throughput) { doc["throughput"] = *m.throughput; }
    if (!m.layer.empty()) { doc["layer"] = m.layer; }
    auto rel = [&](const std::filesystem::path &p) {
        return base_dir.empty() ? p.generic_string() : p.lexically_relative(base_dir).generic_string();
    };
    json cps = json::array();
    for (const auto &c : m.checkpoints) {
        json j = json::object();
        j["step"] = c.step;
        j["tokens"] = c.tokens;
        if (c.loss) { j["loss"] = *c.loss; }
        if (c.activation_dump) { j["activation_dump"] = rel(*c.activation_dump); }
        if (c.gradient_dump) { j["gradient_dump"] = rel(*c.gradient_dump); }
        cps.push_back(std::move(j));
    }
    doc["checkpoints"] = std::move(cps);
    return doc.dump(2) + "\n";
}

}  // namespace splx::ingest
