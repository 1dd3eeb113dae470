#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "hqc/errors.hpp"
#include "hqc/io.hpp"

namespace hqc {

namespace fs = std::filesystem;

namespace {

std::string to_hex(const unsigned char* d, unsigned n) {
    static const char* digits = "0123456789abcdef";
    std::string s(2 * n, '0');
    for (unsigned i = 0; i < n; ++i) {
        s[2 * i] = digits[d[i] >> 4];
        s[2 * i + 1] = digits[d[i] & 15];
    }
    return s;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    return to_hex(md, len);
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_text_atomic(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw InputError("CSV row width differs from the header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_escape(cells[i]);
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

std::string spectrum_csv(const Spectrum& spec, const std::vector<double>& dens) {
    CsvTable t({"index", "re", "im", "residual", "edge_density"});
    for (int k = 0; k < spec.size(); ++k) {
        const auto K = static_cast<size_t>(k);
        t.add_row({std::to_string(k), format_double(spec.eigenvalues[k].real()), format_double(spec.eigenvalues[k].imag()),
                   K < spec.residuals.size() ? format_double(spec.residuals[K]) : "nan",
                   K < dens.size() ? format_double(dens[K]) : "nan"});
    }
    return t.str();
}

nlohmann::json spectrum_json(const Spectrum& spec) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (int k = 0; k < spec.size(); ++k) {
        re.push_back(spec.eigenvalues[k].real());
        im.push_back(spec.eigenvalues[k].imag());
    }
    nlohmann::json j{{"re", re}, {"im", im}};
    if (!spec.residuals.empty()) j["residual"] = spec.residuals;
    return j;
}

nlohmann::json Manifest::to_json() const {
    nlohmann::json fj = nlohmann::json::array();
    for (const auto& f : files) fj.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return {{"format", "hqc-manifest/1"}, {"command", command},   {"config", config},
            {"config_hash", config_hash},  {"complete", complete}, {"files", fj},
            {"failures", failures},        {"extra", extra}};
}

Manifest Manifest::from_json(const nlohmann::json& j) {
    Manifest m;
    m.command = j.value("command", "");
    m.config = j.value("config", nlohmann::json::object());
    m.config_hash = j.value("config_hash", "");
    m.complete = j.value("complete", false);
    for (const auto& f : j.value("files", nlohmann::json::array()))
        m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                           f.at("bytes").get<std::uintmax_t>()});
    m.failures = j.value("failures", nlohmann::json::array());
    m.extra = j.value("extra", nlohmann::json::object());
    return m;
}

void write_manifest(const fs::path& dir, Manifest m, const std::vector<std::string>& files) {
    m.files.clear();
    for (const auto& f : files) {
        const fs::path p = dir / f;
        m.files.push_back({f, sha256_file(p), fs::file_size(p)});
    }
    write_text_atomic(dir / "manifest.json", m.to_json().dump(2) + "\n");
}

bool manifest_is_current(const fs::path& dir, const std::string& config_hash) {
    const fs::path mp = dir / "manifest.json";
    if (!fs::exists(mp)) return false;
    Manifest m;
    try {
        m = Manifest::from_json(nlohmann::json::parse(read_text(mp)));
    } catch (const std::exception&) {
        return false;
    }
    if (!m.complete || m.config_hash != config_hash) return false;
    for (const auto& f : m.files) {
        const fs::path p = dir / f.path;
        if (!fs::exists(p) || sha256_file(p) != f.sha256) return false;
    }
    return true;
}

}  // namespace hqc
