#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace kfp {

// Frozen identifier embedded in every JSON/CSV report.
std::string report_schema_version();

// Shortest round-trip decimal form; keeps CSV bodies byte-identical across
// reruns and worker counts.
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::string_view bytes);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void add_row(std::vector<std::string> cells);
    std::string body() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// writes the JSON with schema_version injected at the top level
void write_json_file(const std::string& path, nlohmann::json j);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace kfp
