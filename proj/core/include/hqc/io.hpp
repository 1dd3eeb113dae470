#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hqc/eigen.hpp"

namespace hqc {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Shortest round-trip decimal form; nan and inf spelled out.
std::string format_double(double v);

// Whole-file write through a temporary and rename, so readers never see a
// half-written file.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add_row(std::vector<std::string> row);
    std::string str() const;
    const std::vector<std::string>& header() const { return header_; }
    size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Columns: index, re, im, residual, edge_density.
std::string spectrum_csv(const Spectrum& spec, const std::vector<double>& edge_densities);
nlohmann::json spectrum_json(const Spectrum& spec);

struct ManifestEntry {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct Manifest {
    std::string command;
    nlohmann::json config;
    std::string config_hash;
    bool complete = true;
    std::vector<ManifestEntry> files;
    nlohmann::json failures = nlohmann::json::array();
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
    static Manifest from_json(const nlohmann::json& j);
};

// Hashes every listed file and writes manifest.json into dir.
void write_manifest(const std::filesystem::path& dir, Manifest m, const std::vector<std::string>& files);
// True when dir/manifest.json matches config_hash, is complete, and every
// listed file still has its recorded checksum.
bool manifest_is_current(const std::filesystem::path& dir, const std::string& config_hash);

}  // namespace hqc
