#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifslab/errors.hpp"

namespace ifslab {

inline constexpr const char* report_schema = "ifslab/v1";

// write-then-rename so partially written artifacts never appear under the
// final name
inline void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

inline void write_report_json(const std::filesystem::path& path, const nlohmann::json& j) {
    atomic_write_text(path, j.dump(2) + "\n");
}

// deterministic shortest-round-trip-ish formatting for CSV cells
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvWriter {
    std::string text;

    explicit CsvWriter(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i > 0) text += ',';
            text += header[i];
        }
        text += '\n';
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) text += ',';
            text += cells[i];
        }
        text += '\n';
    }

    void save(const std::filesystem::path& path) const { atomic_write_text(path, text); }
};

// a numeric result annotated with how it was obtained
inline nlohmann::json measured(double value, nlohmann::json method) {
    return nlohmann::json{{"value", value}, {"method", std::move(method)}};
}

// Minimal structural validation of a report document: schema tag, config echo
// and method metadata on every annotated value.
inline void validate_report(const nlohmann::json& j) {
    if (!j.contains("schema") || j["schema"] != report_schema)
        throw MissingArtifactsError("report schema tag missing or incompatible");
    if (!j.contains("command") || !j.contains("config") || !j.contains("results"))
        throw MissingArtifactsError("report lacks command/config/results sections");
    std::function<void(const nlohmann::json&)> walk = [&walk](const nlohmann::json& node) {
        if (node.is_object()) {
            if (node.contains("value") && !node.contains("method"))
                throw MissingArtifactsError("annotated value lacks method metadata");
            for (const auto& [key, child] : node.items()) walk(child);
        } else if (node.is_array()) {
            for (const auto& child : node) walk(child);
        }
    };
    walk(j["results"]);
}

}  // namespace ifslab
