#include "kfp/report.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace kfp {

std::string report_schema_version() { return "hypokfp-report-v1"; }

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::string_view bytes) {
    const std::uint64_t h = fnv1a64(bytes);
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) buf[15 - i] = digits[(h >> (4 * i)) & 0xf];
    buf[16] = '\0';
    return std::string(buf);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("CsvWriter: row width does not match the header");
    rows_.push_back(std::move(cells));
}

std::string CsvWriter::body() const {
    std::string out;
    auto append = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out.push_back(',');
            out += cells[i];
        }
        out.push_back('\n');
    };
    append(header_);
    for (const auto& r : rows_) append(r);
    return out;
}

void write_json_file(const std::string& path, nlohmann::json j) {
    j["schema_version"] = report_schema_version();
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_json_file: cannot open " + path);
    os << j.dump(2) << "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_text_file: cannot open " + path);
    os << text;
}

}  // namespace kfp
