#pragma once

// File formats: 16-bit binary PGM frames, JSON weight/batch-norm documents,
// CSV tables, and atomic artifact writes.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctia_ipc/adc.hpp"
#include "ctia_ipc/bayer_frame.hpp"
#include "ctia_ipc/device_model.hpp"
#include "ctia_ipc/error.hpp"
#include "ctia_ipc/layer_mapper.hpp"

namespace ctia_ipc::io {

using json = nlohmann::json;

[[nodiscard]] inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cli-io", "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes to a sibling temporary file and renames it into place, so a failed
/// run never leaves a partial artifact behind.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cli-io", "cannot create " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw IoError("cli-io", "failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cli-io", "cannot move artifact into place at " + path.string());
    }
}

// Shortest round-trip representation; independent of the C locale.
[[nodiscard]] inline std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) {
        throw IoError("cli-io", "number formatting failed");
    }
    return {buf.data(), end};
}

// ---------------------------------------------------------------------------
// PGM

namespace detail {

class PgmCursor {
  public:
    explicit PgmCursor(std::string_view bytes) : bytes_(bytes) {}

    void skip_whitespace_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
                ++pos_;
            } else {
                return;
            }
        }
    }

    std::uint64_t read_uint(const char* what) {
        skip_whitespace_and_comments();
        const std::size_t start = pos_;
        std::uint64_t value = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + static_cast<std::uint64_t>(bytes_[pos_] - '0');
            if (value > 0xFFFFFFFFULL) {
                throw FormatError("cli-io", std::string("PGM ") + what + " out of range", start);
            }
            ++pos_;
        }
        if (pos_ == start) {
            throw FormatError("cli-io", std::string("PGM header: expected ") + what, start);
        }
        return value;
    }

    [[nodiscard]] std::size_t pos() const noexcept { return pos_; }
    void advance(std::size_t n) noexcept { pos_ += n; }
    [[nodiscard]] std::string_view bytes() const noexcept { return bytes_; }

  private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

} // namespace detail

struct PgmImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint16_t> samples;
};

/// Binary PGM with maxval 65535; samples are big-endian 16-bit words.
[[nodiscard]] inline PgmImage decode_pgm(std::string_view bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw FormatError("cli-io", "bad PGM magic, expected P5", 0);
    }
    detail::PgmCursor cur(bytes);
    cur.advance(2);
    const auto width_at = cur.pos();
    const auto cols = cur.read_uint("width");
    const auto rows = cur.read_uint("height");
    if (cols == 0 || rows == 0) {
        throw FormatError("cli-io", "PGM dimensions must be non-zero", width_at);
    }
    const auto maxval_at = cur.pos();
    const auto maxval = cur.read_uint("maxval");
    if (maxval != 65535) {
        throw FormatError("cli-io", "PGM maxval must be 65535, found " + std::to_string(maxval), maxval_at);
    }
    if (cur.pos() >= bytes.size()) {
        throw FormatError("cli-io", "PGM header not terminated", cur.pos());
    }
    cur.advance(1); // single whitespace before the raster

    const std::size_t count = static_cast<std::size_t>(rows * cols);
    const std::size_t raster = cur.pos();
    if (bytes.size() - raster < 2 * count) {
        throw FormatError("cli-io", "PGM raster truncated: need " + std::to_string(2 * count) + " bytes, have " +
                                        std::to_string(bytes.size() - raster),
                          bytes.size());
    }
    PgmImage img{static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::vector<std::uint16_t>(count)};
    for (std::size_t i = 0; i < count; ++i) {
        const auto hi = static_cast<unsigned char>(bytes[raster + 2 * i]);
        const auto lo = static_cast<unsigned char>(bytes[raster + 2 * i + 1]);
        img.samples[i] = static_cast<std::uint16_t>((hi << 8U) | lo);
    }
    return img;
}

[[nodiscard]] inline std::string encode_pgm(std::size_t rows, std::size_t cols, std::span<const std::uint16_t> samples) {
    if (samples.size() != rows * cols) {
        throw DimensionError("cli-io", "PGM sample count does not match dimensions");
    }
    std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n65535\n";
    out.reserve(out.size() + 2 * samples.size());
    for (auto s : samples) {
        out.push_back(static_cast<char>(s >> 8U));
        out.push_back(static_cast<char>(s & 0xFFU));
    }
    return out;
}

/// Photocurrent scale: code 65535 corresponds to `i_max`.
[[nodiscard]] inline BayerFrame load_frame(const std::filesystem::path& path, double i_max) {
    auto img = decode_pgm(read_file(path));
    return {img.rows, img.cols, i_max, std::move(img.samples)};
}

inline void save_frame(const std::filesystem::path& path, const BayerFrame& frame) {
    atomic_write(path, encode_pgm(frame.rows(), frame.cols(), frame.codes()));
}

inline void save_activation(const std::filesystem::path& path, const ActivationMap& map) {
    atomic_write(path, encode_pgm(map.rows, map.cols, map.values));
}

// ---------------------------------------------------------------------------
// Weights + batch norm

struct LayerWeights {
    WeightTensor weights;
    BnParams bn;
};

namespace detail {

inline std::optional<std::size_t> positive_size(const json& doc, const char* key, std::vector<std::string>& issues) {
    if (!doc.contains(key)) {
        issues.push_back(std::string("shape.") + key + ": missing");
        return std::nullopt;
    }
    const auto& v = doc.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        issues.push_back(std::string("shape.") + key + ": must be a positive integer");
        return std::nullopt;
    }
    return v.get<std::size_t>();
}

inline std::vector<double> bn_array(const json& bn, const char* key, std::size_t c_o,
                                    std::vector<std::string>& issues) {
    std::vector<double> out;
    if (!bn.contains(key) || !bn.at(key).is_array()) {
        issues.push_back(std::string("bn.") + key + ": missing or not an array");
        return out;
    }
    const auto& arr = bn.at(key);
    if (arr.size() != c_o) {
        issues.push_back(std::string("bn.") + key + ": expected " + std::to_string(c_o) + " entries, found " +
                         std::to_string(arr.size()));
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number() || !std::isfinite(arr[i].get<double>())) {
            issues.push_back(std::string("bn.") + key + "[" + std::to_string(i) + "] (channel " +
                             std::to_string(i) + "): non-finite value");
            out.push_back(0.0);
        } else {
            out.push_back(arr[i].get<double>());
        }
    }
    return out;
}

} // namespace detail

/// Parses and validates a weight document, reporting every violation found.
[[nodiscard]] inline LayerWeights parse_weights(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError("cli-io", std::string("weights document is not valid JSON: ") + e.what(), e.byte);
    }
    std::vector<std::string> issues;
    if (!doc.is_object()) {
        throw ValidationError("cli-io", {"weights document must be a JSON object"});
    }

    std::optional<std::size_t> c_o;
    std::optional<std::size_t> c_in;
    std::optional<std::size_t> k;
    if (!doc.contains("shape") || !doc.at("shape").is_object()) {
        issues.emplace_back("shape: missing or not an object");
    } else {
        const auto& shape = doc.at("shape");
        c_o = detail::positive_size(shape, "c_o", issues);
        c_in = detail::positive_size(shape, "c_in", issues);
        k = detail::positive_size(shape, "k", issues);
        if (c_in && *c_in != bayer_channels) {
            issues.push_back("shape.c_in: must be 4 (RGGB), found " + std::to_string(*c_in));
        }
    }
    if (!c_o || !c_in || !k) {
        throw ValidationError("cli-io", issues);
    }

    LayerWeights out{WeightTensor(*c_o, *c_in, *k), {}};
    const json* weights = doc.contains("weights") ? &doc.at("weights") : nullptr;
    auto expect_array = [&](const json& node, std::size_t n, const std::string& where) {
        if (!node.is_array() || node.size() != n) {
            issues.push_back(where + ": expected an array of " + std::to_string(n));
            return false;
        }
        return true;
    };
    if (weights == nullptr) {
        issues.emplace_back("weights: missing");
    } else if (expect_array(*weights, *c_o, "weights")) {
        for (std::size_t o = 0; o < *c_o; ++o) {
            const auto where_o = "weights[" + std::to_string(o) + "]";
            if (!expect_array((*weights)[o], *c_in, where_o)) {
                continue;
            }
            for (std::size_t ci = 0; ci < *c_in; ++ci) {
                const auto where_c = where_o + "[" + std::to_string(ci) + "]";
                if (!expect_array((*weights)[o][ci], *k, where_c)) {
                    continue;
                }
                for (std::size_t ky = 0; ky < *k; ++ky) {
                    const auto where_y = where_c + "[" + std::to_string(ky) + "]";
                    if (!expect_array((*weights)[o][ci][ky], *k, where_y)) {
                        continue;
                    }
                    for (std::size_t kx = 0; kx < *k; ++kx) {
                        const auto& v = (*weights)[o][ci][ky][kx];
                        if (!v.is_number() || !std::isfinite(v.get<double>())) {
                            issues.push_back(where_y + "[" + std::to_string(kx) + "] (channel " + std::to_string(o) +
                                             ", tap " + std::to_string((ci * *k + ky) * *k + kx) +
                                             "): non-finite value");
                            continue;
                        }
                        out.weights.at(o, ci, ky, kx) = v.get<double>();
                    }
                }
            }
        }
    }

    if (!doc.contains("bn") || !doc.at("bn").is_object()) {
        issues.emplace_back("bn: missing or not an object");
    } else {
        const auto& bn = doc.at("bn");
        out.bn.gamma = detail::bn_array(bn, "gamma", *c_o, issues);
        out.bn.beta = detail::bn_array(bn, "beta", *c_o, issues);
        out.bn.mu = detail::bn_array(bn, "mu", *c_o, issues);
        out.bn.sigma_sq = detail::bn_array(bn, "sigma_sq", *c_o, issues);
        out.bn.epsilon = detail::bn_array(bn, "epsilon", *c_o, issues);
        for (std::size_t i = 0; i < out.bn.sigma_sq.size(); ++i) {
            if (out.bn.sigma_sq[i] < 0.0) {
                issues.push_back("bn.sigma_sq[" + std::to_string(i) + "]: must be >= 0");
            }
        }
        for (std::size_t i = 0; i < out.bn.epsilon.size(); ++i) {
            if (!(out.bn.epsilon[i] > 0.0)) {
                issues.push_back("bn.epsilon[" + std::to_string(i) + "]: must be > 0");
            }
        }
    }

    if (!issues.empty()) {
        throw ValidationError("cli-io", issues);
    }
    return out;
}

[[nodiscard]] inline LayerWeights load_weights(const std::filesystem::path& path) {
    return parse_weights(read_file(path));
}

[[nodiscard]] inline std::string serialize_weights(const LayerWeights& layer) {
    const auto& w = layer.weights;
    json weights = json::array();
    for (std::size_t o = 0; o < w.c_o; ++o) {
        json channel = json::array();
        for (std::size_t ci = 0; ci < w.c_in; ++ci) {
            json plane = json::array();
            for (std::size_t ky = 0; ky < w.k; ++ky) {
                json row = json::array();
                for (std::size_t kx = 0; kx < w.k; ++kx) {
                    row.push_back(w.at(o, ci, ky, kx));
                }
                plane.push_back(std::move(row));
            }
            channel.push_back(std::move(plane));
        }
        weights.push_back(std::move(channel));
    }
    json doc;
    doc["shape"] = {{"c_o", w.c_o}, {"c_in", w.c_in}, {"k", w.k}};
    doc["weights"] = std::move(weights);
    doc["bn"] = {{"gamma", layer.bn.gamma},
                 {"beta", layer.bn.beta},
                 {"mu", layer.bn.mu},
                 {"sigma_sq", layer.bn.sigma_sq},
                 {"epsilon", layer.bn.epsilon}};
    return doc.dump(2) + "\n";
}

inline void save_weights(const std::filesystem::path& path, const LayerWeights& layer) {
    atomic_write(path, serialize_weights(layer));
}

// ---------------------------------------------------------------------------
// Transfer-curve samples: header `w_norm,x_norm,volts`

[[nodiscard]] inline std::vector<TransferSample> parse_transfer_csv(std::string_view text) {
    std::vector<TransferSample> samples;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t line_offset = offset;
        offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line_no == 1) {
            if (line != "w_norm,x_norm,volts") {
                throw FormatError("cli-io", "transfer CSV header must be w_norm,x_norm,volts", 0);
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::array<double, 3> v{};
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t f = 0; f < 3; ++f) {
            const auto [next, ec] = std::from_chars(p, end, v[f]);
            if (ec != std::errc{} || !std::isfinite(v[f])) {
                throw FormatError("cli-io", "transfer CSV line " + std::to_string(line_no) + ": bad field " +
                                                std::to_string(f + 1),
                                  line_offset + static_cast<std::size_t>(p - line.data()));
            }
            p = next;
            if (f < 2) {
                if (p == end || *p != ',') {
                    throw FormatError("cli-io", "transfer CSV line " + std::to_string(line_no) + ": expected ','",
                                      line_offset + static_cast<std::size_t>(p - line.data()));
                }
                ++p;
            }
        }
        if (p != end) {
            throw FormatError("cli-io", "transfer CSV line " + std::to_string(line_no) + ": trailing data",
                              line_offset + static_cast<std::size_t>(p - line.data()));
        }
        samples.push_back({v[0], v[1], v[2]});
    }
    return samples;
}

/// Minimal CSV builder: fixed header, comma separated, '\n' line endings.
class CsvWriter {
  public:
    explicit CsvWriter(std::string_view header) : text_(header) { text_ += '\n'; }

    template <class... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((append(fields, first)), ...);
        text_ += '\n';
    }

    [[nodiscard]] const std::string& str() const noexcept { return text_; }

  private:
    template <class T>
    void append(const T& v, bool& first) {
        if (!first) {
            text_ += ',';
        }
        first = false;
        if constexpr (std::is_floating_point_v<T>) {
            text_ += format_number(static_cast<double>(v));
        } else if constexpr (std::is_integral_v<T>) {
            text_ += std::to_string(v);
        } else {
            text_ += std::string_view(v);
        }
    }

    std::string text_;
};

} // namespace ctia_ipc::io
