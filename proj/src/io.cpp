#include "patchant/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>

#include "patchant/errors.hpp"

namespace patchant {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

std::string format_number(double v) {
    std::array<char, 40> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw ValidationError("failed writing " + path.string());
}

void write_csv(const std::filesystem::path& path, const std::vector<CsvColumn>& columns) {
    if (columns.empty()) throw ValidationError("CSV needs at least one column");
    const std::size_t rows = columns.front().values.size();
    std::string text;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].values.size() != rows) throw ValidationError("CSV column " + columns[c].name + " has wrong length");
        text += (c ? "," : "") + columns[c].name;
    }
    text += '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) text += ',';
            text += format_number(columns[c].values[r]);
        }
        text += '\n';
    }
    write_text(path, text);
}

DecayHistogram load_histogram(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open histogram file " + path.string());
    std::string line;
    std::size_t lineno = 0;
    DecayHistogram h;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos)
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected two comma-separated fields", lineno);
        const auto a = trim(row.substr(0, comma));
        const auto b = trim(row.substr(comma + 1));
        if (!header) {
            if (a != "time_ns" || b != "counts")
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected header time_ns,counts", lineno);
            header = true;
            continue;
        }
        double t = 0.0, c = 0.0;
        if (!parse_double(a, t) || !parse_double(b, c))
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": malformed number", lineno);
        h.bin_start.push_back(t);
        h.counts.push_back(c);
    }
    if (!header) throw ParseError(path.string() + ": empty file", lineno);
    if (h.counts.size() < 2) throw ValidationError("histogram needs at least two bins to define a width");
    h.bin_width = h.bin_start[1] - h.bin_start[0];
    if (!(h.bin_width > 0.0)) throw ValidationError("histogram times must increase");
    h.window = h.bin_width * static_cast<double>(h.counts.size());
    h.validate();
    return h;
}

void write_histogram(const std::filesystem::path& path, const DecayHistogram& hist) {
    write_csv(path, {{"time_ns", hist.bin_start}, {"counts", hist.counts}});
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += kHex[md[i] >> 4];
        out += kHex[md[i] & 15];
    }
    return out;
}

}  // namespace patchant
