#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "slidenoise/error.hpp"
#include "slidenoise/version.hpp"

namespace slidenoise::io {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

/// Shortest round-trip-safe text for a double; '.' decimal regardless of locale.
inline std::string format_double(double v) { return fmt::format("{:.17g}", v); }

/// RFC 4180 quoting, applied only when needed.
inline std::string quote(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

using Cell = std::variant<double, std::int64_t, std::uint64_t, std::string, bool>;

inline std::string format_cell(const Cell& c) {
    struct {
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(std::int64_t v) const { return fmt::format("{}", v); }
        std::string operator()(std::uint64_t v) const { return fmt::format("{}", v); }
        std::string operator()(const std::string& v) const { return quote(v); }
        std::string operator()(bool v) const { return v ? "1" : "0"; }
    } visit;
    return std::visit(visit, c);
}

/// CSV file that starts with "# slidenoise <version>, seed <seed>, config <hash>" and a header row.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns, std::uint64_t seed,
              std::uint64_t config_hash)
        : path_(path), columns_(std::move(columns)) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        os_.open(path, std::ios::binary | std::ios::trunc);
        if (!os_) throw Error(Errc::Config, "cannot open " + path.string() + " for writing");
        os_ << fmt::format("# slidenoise {}, seed {}, config {}\n", version, seed, hash_hex(config_hash));
        write_line(columns_);
    }

    void row(std::initializer_list<Cell> cells) { row(std::vector<Cell>(cells)); }

    void row(const std::vector<Cell>& cells) {
        if (cells.size() != columns_.size()) {
            throw Error(Errc::Config, fmt::format("{}: row has {} cells, header has {}", path_.string(), cells.size(),
                                                  columns_.size()));
        }
        std::vector<std::string> text;
        text.reserve(cells.size());
        for (const auto& c : cells) text.push_back(format_cell(c));
        write_line(text);
    }

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    void write_line(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) os_ << ',';
            os_ << fields[i];
        }
        os_ << '\n';
        if (!os_) throw Error(Errc::Config, "write failed: " + path_.string());
    }

    std::filesystem::path path_;
    std::vector<std::string> columns_;
    std::ofstream os_;
};

}  // namespace slidenoise::io
