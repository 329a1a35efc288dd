#pragma once

// Weight-to-time conversion. A free-running 7-bit global counter is compared
// against each pixel's stored 4-bit weight through a selectable 4-bit window;
// the exposure ends at the first tick where the window matches.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ctia_ipc/error.hpp"

namespace ctia_ipc {

class WeightWord {
  public:
    static constexpr std::uint8_t max_magnitude = 15;

    constexpr WeightWord() = default;

    explicit WeightWord(int magnitude) {
        if (magnitude < 0 || magnitude > max_magnitude) {
            throw InvalidParameter("wtc", "weight magnitude " + std::to_string(magnitude) + " outside [0, 15]");
        }
        magnitude_ = static_cast<std::uint8_t>(magnitude);
    }

    [[nodiscard]] constexpr std::uint8_t magnitude() const noexcept { return magnitude_; }

    friend constexpr bool operator==(WeightWord, WeightWord) = default;

  private:
    std::uint8_t magnitude_ = 0;
};

struct CounterConfig {
    static constexpr int width = 7;

    double t_step = 1e-6; // s per counter tick
    int window = 0;       // compares counter bits (3 + window)..window

    void validate() const {
        if (window < 0 || window > 3) {
            throw InvalidParameter("wtc", "counter window must be in {0, 1, 2, 3}");
        }
        if (!std::isfinite(t_step) || t_step <= 0.0) {
            throw InvalidParameter("wtc", "t_step must be finite and > 0");
        }
    }

    [[nodiscard]] constexpr std::int64_t exposure_multiplier() const noexcept {
        return std::int64_t{1} << window;
    }

    // Longest exposure the window can express (weight 15).
    [[nodiscard]] constexpr std::int64_t max_exposure_ticks() const noexcept {
        return WeightWord::max_magnitude * exposure_multiplier();
    }
};

/// First counter tick at which the selected window equals the stored weight.
[[nodiscard]] constexpr std::int64_t match_ticks(const CounterConfig& cfg, WeightWord w) noexcept {
    return static_cast<std::int64_t>(w.magnitude()) * cfg.exposure_multiplier();
}

[[nodiscard]] inline double match_time(const CounterConfig& cfg, WeightWord w) {
    return static_cast<double>(match_ticks(cfg, w)) * cfg.t_step;
}

struct TimedPulse {
    double assert_time = 0.0;
    double deassert_time = 0.0;

    [[nodiscard]] double width() const noexcept { return deassert_time - assert_time; }
};

// Reset dominates: an asserted reset forces the pulse low.
[[nodiscard]] inline TimedPulse pulse(const CounterConfig& cfg, WeightWord w, bool reset) {
    if (reset) {
        return {};
    }
    return {0.0, match_time(cfg, w)};
}

/// Per-pixel SRAM weight storage written during the write phase.
class WeightStore {
  public:
    WeightStore(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), words_(rows * cols) {
        if (rows == 0 || cols == 0) {
            throw InvalidParameter("wtc", "weight store must have at least one row and column");
        }
    }

    void write(std::size_t row, std::size_t col, WeightWord w) { words_[index(row, col)] = w; }

    [[nodiscard]] WeightWord read(std::size_t row, std::size_t col) const { return words_[index(row, col)]; }

    // Unchecked access for the compute phase; callers guarantee bounds.
    [[nodiscard]] WeightWord at(std::size_t row, std::size_t col) const noexcept { return words_[row * cols_ + col]; }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

  private:
    [[nodiscard]] std::size_t index(std::size_t row, std::size_t col) const {
        if (row >= rows_ || col >= cols_) {
            throw IndexError("wtc", "cell (" + std::to_string(row) + ", " + std::to_string(col) +
                                        ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                                        " weight store");
        }
        return row * cols_ + col;
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<WeightWord> words_;
};

} // namespace ctia_ipc
