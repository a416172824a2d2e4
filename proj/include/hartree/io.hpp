#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace hartree {

// Writes to a sibling temp file and renames it over the target.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

// Fixed-header CSV with 17 significant digits.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(const std::vector<double>& row);
    std::string str() const;
    void write(const std::string& path) const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

std::string format_double(double x);
void write_json(const std::string& path, const nlohmann::json& j);
void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& records);
std::vector<nlohmann::json> read_jsonl(const std::string& path);

// 64-bit FNV-1a hex digest, used for config fingerprints in manifests.
std::string fingerprint(const std::string& text);

} // namespace hartree
