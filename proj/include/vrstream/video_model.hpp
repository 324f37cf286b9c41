#pragma once

// Tiled panoramic video: rate ladder, tile grid / FoV windows, saliency weights
// and the saliency-weighted quality metric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vrstream {

/// Discrete set of encodable per-tile rates in Mbps, strictly ascending.
class RateLadder {
public:
    RateLadder() : RateLadder(std::vector<double>{1.0, 2.0, 3.0, 4.0}) {}

    explicit RateLadder(std::vector<double> levels) : levels_(std::move(levels)) {
        if (levels_.size() < 2) {
            throw std::invalid_argument("rate ladder needs at least 2 levels");
        }
        for (std::size_t i = 0; i < levels_.size(); ++i) {
            if (!(levels_[i] > 0.0) || !std::isfinite(levels_[i])) {
                throw std::invalid_argument("rate ladder levels must be positive and finite");
            }
            if (i > 0 && !(levels_[i] > levels_[i - 1])) {
                throw std::invalid_argument("rate ladder levels must be strictly increasing");
            }
        }
    }

    [[nodiscard]] std::span<const double> levels() const noexcept { return levels_; }
    [[nodiscard]] std::size_t size() const noexcept { return levels_.size(); }
    [[nodiscard]] double lowest() const noexcept { return levels_.front(); }
    [[nodiscard]] double highest() const noexcept { return levels_.back(); }

    [[nodiscard]] bool contains(double rate) const noexcept {
        return std::binary_search(levels_.begin(), levels_.end(), rate);
    }

    /// Largest level <= rate. Rates below the ladder map to the lowest level.
    [[nodiscard]] double floor(double rate) const noexcept {
        auto it = std::upper_bound(levels_.begin(), levels_.end(), rate);
        if (it == levels_.begin()) return levels_.front();
        return *std::prev(it);
    }

    /// Smallest level >= rate. Rates above the ladder map to the highest level.
    [[nodiscard]] double ceil(double rate) const noexcept {
        auto it = std::lower_bound(levels_.begin(), levels_.end(), rate);
        if (it == levels_.end()) return levels_.back();
        return *it;
    }

    friend bool operator==(const RateLadder&, const RateLadder&) = default;

private:
    std::vector<double> levels_;
};

/// Constants of the utility EM(R) = a * R^b.
struct QualityParams {
    double a = 1.0;
    double b = 0.5;

    void validate() const {
        if (!(a > 0.0)) throw std::invalid_argument("quality parameter a must be > 0");
        if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("quality parameter b must be in (0,1)");
    }

    /// EM(R); a blank tile (R <= 0) contributes nothing.
    [[nodiscard]] double utility(double rate) const noexcept {
        return rate > 0.0 ? a * std::pow(rate, b) : 0.0;
    }

    friend bool operator==(const QualityParams&, const QualityParams&) = default;
};

/// Top-left corner of a FoV-sized window. Columns wrap, rows do not.
struct FovWindow {
    int row = 0;
    int col = 0;
    friend bool operator==(const FovWindow&, const FovWindow&) = default;
};

/// Row-major tile grid with a fixed FoV window size.
struct TileGrid {
    int rows = 4;
    int cols = 8;
    int fov_rows = 2;
    int fov_cols = 3;

    void validate() const {
        if (rows <= 0 || cols <= 0 || fov_rows <= 0 || fov_cols <= 0) {
            throw std::invalid_argument("tile grid dimensions must be positive");
        }
        if (fov_rows > rows || fov_cols > cols) {
            throw std::invalid_argument("FoV window larger than tile grid");
        }
    }

    [[nodiscard]] int tile_count() const noexcept { return rows * cols; }
    [[nodiscard]] int fov_count() const noexcept { return fov_rows * fov_cols; }
    [[nodiscard]] int tile_index(int row, int col) const noexcept { return row * cols + col; }

    /// Number of distinct window origins: vertical positions times horizontal wrap positions.
    [[nodiscard]] int origin_count() const noexcept { return (rows - fov_rows + 1) * cols; }

    [[nodiscard]] FovWindow origin_at(int ordinal) const noexcept {
        return {ordinal / cols, ordinal % cols};
    }
    [[nodiscard]] int origin_ordinal(FovWindow w) const noexcept { return w.row * cols + w.col; }

    [[nodiscard]] bool valid(FovWindow w) const noexcept {
        return w.row >= 0 && w.row + fov_rows <= rows && w.col >= 0 && w.col < cols;
    }

    /// Tile indices covered by a window of the given size anchored at `origin`.
    [[nodiscard]] std::vector<int> window_tiles(FovWindow origin, int win_rows, int win_cols) const {
        std::vector<int> tiles;
        tiles.reserve(static_cast<std::size_t>(win_rows * win_cols));
        for (int r = 0; r < win_rows; ++r) {
            for (int c = 0; c < win_cols; ++c) {
                tiles.push_back(tile_index(origin.row + r, (origin.col + c) % cols));
            }
        }
        return tiles;
    }

    [[nodiscard]] std::vector<int> fov_tiles(FovWindow origin) const {
        return window_tiles(origin, fov_rows, fov_cols);
    }

    friend bool operator==(const TileGrid&, const TileGrid&) = default;
};

/// One chunk's saliency map and FoV windows. `k` is 1-based.
struct ChunkSpec {
    int k = 1;
    double duration = 2.0;
    std::vector<double> weights;
    std::vector<int> predicted_fov;
    std::vector<int> actual_fov;
};

/// Saliency-weighted quality: sum_i w_i * EM(R_i).
inline double quality_utility(std::span<const double> rates, std::span<const double> weights,
                              const QualityParams& params) {
    if (rates.size() != weights.size()) {
        throw std::invalid_argument("quality_utility: rates and weights differ in length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (rates[i] < 0.0) throw std::invalid_argument("quality_utility: negative rate");
        total += weights[i] * params.utility(rates[i]);
    }
    return total;
}

/// Chunk size in megabits: L * sum of all tile rates.
inline double chunk_size_megabits(std::span<const double> rates, double duration) {
    if (!(duration > 0.0)) throw std::invalid_argument("chunk duration must be positive");
    double sum = 0.0;
    for (double r : rates) {
        if (r < 0.0) throw std::invalid_argument("chunk_size_megabits: negative rate");
        sum += r;
    }
    return duration * sum;
}

/// Saliency map: floor(N/2) uniformly chosen tiles at weight 1, the rest
/// independently Uniform(1,2) (open at 1).
template <class Rng>
std::vector<double> make_weight_map(Rng& rng, const TileGrid& grid) {
    const int n = grid.tile_count();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<double> weights(static_cast<std::size_t>(n), 1.0);
    std::uniform_real_distribution<double> salient(std::nextafter(1.0, 2.0), 2.0);
    for (int j = n / 2; j < n; ++j) {
        weights[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] = salient(rng);
    }
    return weights;
}

/// Gathers `values[i]` for every i in `indices`.
inline std::vector<double> gather(std::span<const double> values, std::span<const int> indices) {
    std::vector<double> out;
    out.reserve(indices.size());
    for (int i : indices) out.push_back(values[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace vrstream
