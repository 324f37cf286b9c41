#pragma once

// Per-chunk rate-selection strategies and realized-QoE accounting.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vrstream/channel.hpp"
#include "vrstream/optimizer.hpp"
#include "vrstream/video_model.hpp"

namespace vrstream {

enum class Policy { main, baseline, greedy, main_qpsk };

inline constexpr std::string_view policy_name(Policy p) {
    switch (p) {
        case Policy::main: return "main";
        case Policy::baseline: return "baseline";
        case Policy::greedy: return "greedy";
        case Policy::main_qpsk: return "main-qpsk";
    }
    return "?";
}

inline Policy parse_policy(std::string_view name) {
    for (Policy p : {Policy::main, Policy::baseline, Policy::greedy, Policy::main_qpsk}) {
        if (policy_name(p) == name) return p;
    }
    throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

/// The QPSK-only variant ignores the adaptive selection.
inline Modulation effective_modulation(Policy p, Modulation selected) {
    return p == Policy::main_qpsk ? Modulation::qpsk : selected;
}

/// Everything a policy may look at when deciding chunk k.
struct PolicyInput {
    TileGrid grid;
    RateLadder ladder;
    QualityParams params;
    double lambda = 1.0;
    std::vector<double> weights;  // all N tiles
    FovWindow predicted;
    Modulation mode = Modulation::qpsk;
    double rate_mbps = 40.0;
    double duration = 2.0;
    double backlog = 0.0;      // t_k - t~_{k-1}
    bool prebuffered = false;  // chunk 1: downloaded before playback starts
    RoundingRule rounding = RoundingRule::strict_break;
};

struct ChunkDecision {
    std::vector<double> rates;  // per tile, 0 = not sent
    Modulation mode = Modulation::qpsk;
    double predicted_stall = 0.0;
};

/// Stall the decision would cause if the channel held for its download.
inline double predicted_stall(const PolicyInput& in, std::span<const double> rates) {
    if (in.prebuffered) return 0.0;
    return std::max(0.0, in.backlog + chunk_size_megabits(rates, in.duration) / in.rate_mbps - in.duration);
}

/// Optimizer context for the predicted FoV, with non-FoV tiles pinned at R_1.
inline ChunkContext main_context(const PolicyInput& in) {
    ChunkContext ctx;
    ctx.fov_weights = gather(in.weights, in.grid.fov_tiles(in.predicted));
    ctx.ladder = in.ladder;
    ctx.params = in.params;
    ctx.lambda = in.lambda;
    ctx.rate_mbps = in.rate_mbps;
    ctx.duration = in.duration;
    if (in.prebuffered) {
        ctx.slack = -std::numeric_limits<double>::infinity();
    } else {
        const int outside = in.grid.tile_count() - in.grid.fov_count();
        ctx.slack = in.backlog - in.duration + in.duration * outside * in.ladder.lowest() / in.rate_mbps;
    }
    return ctx;
}

inline ChunkDecision main_policy(const PolicyInput& in) {
    const ChunkContext ctx = main_context(in);
    RelaxedSolution relaxed = solve_relaxed(ctx);
    snap_to_ladder(relaxed.rates, in.ladder);
    const auto fov_rates = round_rates(relaxed.rates, ctx.fov_weights, in.ladder, in.rounding);

    ChunkDecision d;
    d.mode = in.mode;
    d.rates.assign(static_cast<std::size_t>(in.grid.tile_count()), in.ladder.lowest());
    const auto tiles = in.grid.fov_tiles(in.predicted);
    for (std::size_t j = 0; j < tiles.size(); ++j) d.rates[static_cast<std::size_t>(tiles[j])] = fov_rates[j];
    d.predicted_stall = predicted_stall(in, d.rates);
    return d;
}

/// Largest ladder level r such that `tiles` tiles at r download within L.
inline double fitting_rate(int tiles, const RateLadder& ladder, double rate_mbps, double duration) {
    double best = ladder.lowest();
    for (double r : ladder.levels()) {
        if (tiles * r * duration / rate_mbps <= duration) best = r;
    }
    return best;
}

/// Every tile at one common rate that fits the chunk in L seconds.
inline ChunkDecision baseline_policy(const PolicyInput& in) {
    ChunkDecision d;
    d.mode = in.mode;
    const int n = in.grid.tile_count();
    d.rates.assign(static_cast<std::size_t>(n), fitting_rate(n, in.ladder, in.rate_mbps, in.duration));
    d.predicted_stall = predicted_stall(in, d.rates);
    return d;
}

/// Origin of the greedy policy's (fov_rows+1) x (fov_cols+1) window around the
/// predicted FoV. The extra row/column goes below/right of the prediction,
/// clamped vertically; horizontally the window wraps.
struct ExpandedWindow {
    FovWindow origin;
    int rows = 0;
    int cols = 0;
};

inline ExpandedWindow greedy_window(const TileGrid& grid, FovWindow predicted) {
    ExpandedWindow w;
    w.rows = std::min(grid.fov_rows + 1, grid.rows);
    w.cols = std::min(grid.fov_cols + 1, grid.cols);
    w.origin.row = std::clamp(predicted.row, 0, grid.rows - w.rows);
    w.origin.col = predicted.col;
    return w;
}

/// Sends only an enlarged window around the prediction, everything else blank.
inline ChunkDecision greedy_policy(const PolicyInput& in) {
    const ExpandedWindow win = greedy_window(in.grid, in.predicted);
    const auto tiles = in.grid.window_tiles(win.origin, win.rows, win.cols);
    const double rate = fitting_rate(static_cast<int>(tiles.size()), in.ladder, in.rate_mbps, in.duration);

    ChunkDecision d;
    d.mode = in.mode;
    d.rates.assign(static_cast<std::size_t>(in.grid.tile_count()), 0.0);
    for (int t : tiles) d.rates[static_cast<std::size_t>(t)] = rate;
    d.predicted_stall = predicted_stall(in, d.rates);
    return d;
}

inline ChunkDecision decide(Policy p, const PolicyInput& in) {
    switch (p) {
        case Policy::main:
        case Policy::main_qpsk: return main_policy(in);
        case Policy::baseline: return baseline_policy(in);
        case Policy::greedy: return greedy_policy(in);
    }
    throw std::invalid_argument("unknown policy");
}

struct QoEReport {
    double quality = 0.0;
    double stall = 0.0;
    double qoe = 0.0;
    double qoe_normalized = 0.0;
};

/// Realized chunk QoE over the tiles the user actually watched.
/// Normalized by the zero-stall quality of the same tiles at R_max.
inline QoEReport evaluate_chunk(const ChunkDecision& decision, std::span<const int> actual_fov,
                                std::span<const double> weights, double lambda, double realized_stall,
                                const QualityParams& params, const RateLadder& ladder) {
    if (realized_stall < 0.0) throw std::invalid_argument("evaluate_chunk: negative stall");
    const auto rates = gather(decision.rates, actual_fov);
    const auto w = gather(weights, actual_fov);

    QoEReport r;
    r.quality = quality_utility(rates, w, params);
    r.stall = realized_stall;
    r.qoe = r.quality - lambda * realized_stall;
    const std::vector<double> best(actual_fov.size(), ladder.highest());
    r.qoe_normalized = r.qoe / quality_utility(best, w, params);
    return r;
}

}  // namespace vrstream
