#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ctia_ipc/error.hpp"

namespace ctia_ipc {

// RGGB mosaic: each 2x2 quad is one spatial site carrying four input channels.
enum class BayerChannel : int { R = 0, G1 = 1, G2 = 2, B = 3 };

inline constexpr int bayer_channels = 4;

struct BayerOffset {
    int dy;
    int dx;
};

[[nodiscard]] constexpr BayerOffset bayer_offset(int channel) noexcept {
    return {channel >> 1, channel & 1};
}

[[nodiscard]] constexpr BayerChannel bayer_channel_at(std::size_t row, std::size_t col) noexcept {
    return static_cast<BayerChannel>(static_cast<int>(((row & 1U) << 1U) | (col & 1U)));
}

/// Input activation: 16-bit pixel codes in mosaic layout plus the photocurrent
/// that corresponds to code 65535.
class BayerFrame {
  public:
    static constexpr std::uint32_t full_code = 65535;

    BayerFrame(std::size_t rows, std::size_t cols, double full_scale_current,
               std::vector<std::uint16_t> codes)
        : rows_(rows), cols_(cols), full_scale_current_(full_scale_current), codes_(std::move(codes)) {
        if (rows == 0 || cols == 0) {
            throw DimensionError("array-core", "Bayer frame must be non-empty");
        }
        if (codes_.size() != rows * cols) {
            throw DimensionError("array-core", "Bayer frame holds " + std::to_string(codes_.size()) +
                                                   " codes for " + std::to_string(rows) + "x" +
                                                   std::to_string(cols));
        }
        if (!(full_scale_current > 0.0)) {
            throw InvalidParameter("array-core", "full-scale photocurrent must be > 0");
        }
    }

    BayerFrame(std::size_t rows, std::size_t cols, double full_scale_current)
        : BayerFrame(rows, cols, full_scale_current, std::vector<std::uint16_t>(rows * cols, 0)) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] double full_scale_current() const noexcept { return full_scale_current_; }

    [[nodiscard]] std::uint16_t code(std::size_t row, std::size_t col) const noexcept { return codes_[row * cols_ + col]; }
    void set_code(std::size_t row, std::size_t col, std::uint16_t value) noexcept { codes_[row * cols_ + col] = value; }

    [[nodiscard]] double x_norm(std::size_t row, std::size_t col) const noexcept {
        return static_cast<double>(code(row, col)) / full_code;
    }

    [[nodiscard]] double photocurrent(std::size_t row, std::size_t col) const noexcept {
        return full_scale_current_ * x_norm(row, col);
    }

    [[nodiscard]] const std::vector<std::uint16_t>& codes() const noexcept { return codes_; }

    // Spatial sites (Bayer quads) along each axis.
    [[nodiscard]] std::size_t site_rows() const noexcept { return rows_ / 2; }
    [[nodiscard]] std::size_t site_cols() const noexcept { return cols_ / 2; }

    friend bool operator==(const BayerFrame&, const BayerFrame&) = default;

  private:
    std::size_t rows_;
    std::size_t cols_;
    double full_scale_current_;
    std::vector<std::uint16_t> codes_;
};

} // namespace ctia_ipc
