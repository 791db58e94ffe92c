#pragma once

// Report plumbing: locale-free CSV at 17 significant digits and the JSON
// metadata block (tool version, timestamp, config echo).

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace splx::report {

inline constexpr const char *kToolVersion = "0.1.0";

/// Round-trip exact rendering of a double; '.' decimal point regardless of
/// the process locale (the library never calls setlocale).
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { write_row(header); }

    CsvWriter &row(const std::vector<std::string> &cells) {
        if (cells.size() != columns_) { throw ShapeError("csv row has the wrong number of cells"); }
        write_row(cells);
        return *this;
    }

    const std::string &str() const noexcept { return text_; }

private:
    static std::string quote(const std::string &cell) {
        if (cell.find_first_of(",\"\n") == std::string::npos) { return cell; }
        std::string out = "\"";
        for (char c : cell) {
            if (c == '"') { out += '"'; }
            out += c;
        }
        return out + "\"";
    }

    void write_row(const std::vector<std::string> &cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k > 0) { text_ += ','; }
            text_ += quote(cells[k]);
        }
        text_ += '\n';
    }

    std::size_t columns_;
    std::string text_;
};

/// SOURCE_DATE_EPOCH as ISO-8601 UTC, or null when unset so repeated runs stay
/// byte-identical.
inline nlohmann::json timestamp() {
    const char *env = std::getenv("SOURCE_DATE_EPOCH");
    if (env == nullptr || *env == '\0') { return nullptr; }
    char *end = nullptr;
    const long long secs = std::strtoll(env, &end, 10);
    if (*end != '\0' || secs < 0) { return nullptr; }
    const std::time_t tt = static_cast<std::time_t>(secs);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

inline nlohmann::json metadata(const std::string &command, nlohmann::json config) {
    nlohmann::json m;
    m["tool"] = "splx";
    m["version"] = kToolVersion;
    m["timestamp"] = timestamp();
    m["command"] = command;
    m["config"] = std::move(config);
    return m;
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
    if (path.has_parent_path()) { std::filesystem::create_directories(path.parent_path()); }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) { throw IoError("cannot open " + path.string() + " for writing"); }
    out << text;
    if (!out) { throw IoError("write failed for " + path.string()); }
}

}  // namespace splx::report
