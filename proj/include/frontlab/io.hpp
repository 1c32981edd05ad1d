#pragma once

#include <charconv>
#include <chrono>
#include <cstddef>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "frontlab/errors.hpp"

namespace frontlab {

/// Shortest round-trip decimal form; identical input bits give identical
/// text, so repeated runs of the same configuration produce byte-identical
/// files.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    if (res.ec != std::errc{}) throw numerical_error("number formatting failed");
    return std::string(buf, res.ptr);
}

class csv_writer {
public:
    csv_writer(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path), cols_(header.size()) {
        if (!out_) throw error(errc::generic, "cannot open output file: " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    void row(std::span<const double> values) {
        if (values.size() != cols_) {
            throw contract_violation("csv row width does not match the header");
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_double(values[i]);
        }
        out_ << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != cols_) {
            throw contract_violation("csv row width does not match the header");
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
    std::size_t cols_;
};

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw error(errc::generic, "cannot open output file: " + path.string());
    out << j.dump(2) << '\n';
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw error(errc::generic, "cannot open output file: " + path.string());
    out << text;
}

inline std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace frontlab
