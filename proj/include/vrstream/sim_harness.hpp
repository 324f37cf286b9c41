#pragma once

// K-chunk streaming session: saliency maps, viewport motion, FoV prediction
// outcomes, fading channel, policy decisions, timeline and QoE accounting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "vrstream/channel.hpp"
#include "vrstream/policies.hpp"
#include "vrstream/timeline.hpp"
#include "vrstream/video_model.hpp"

namespace vrstream {

enum class ViewportMotion {
    lazy_walk,  // stay with prob 1/2, else one tile in a uniform cardinal direction
    iid,        // fresh uniform origin every chunk
};

struct SimConfig {
    int chunks = 1000;
    double duration = 2.0;
    TileGrid grid;
    RateLadder ladder;
    double beta = 0.8;
    double lambda = 10.0;
    Policy policy = Policy::main;
    LinkConfig link;
    QualityParams quality;
    std::uint64_t seed = 1;
    ViewportMotion motion = ViewportMotion::lazy_walk;
    bool freeze_weights = false;
    RoundingRule rounding = RoundingRule::strict_break;
    bool keep_decisions = false;

    void validate() const {
        if (chunks < 2) throw std::invalid_argument("chunk count must be >= 2");
        if (!(duration > 0.0)) throw std::invalid_argument("chunk duration must be > 0");
        if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must be in [0,1]");
        if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
        grid.validate();
        link.validate();
        quality.validate();
    }
};

/// Independent random streams of one run. Each stream is consumed the same
/// way regardless of policy and beta, so runs sharing a seed see the same
/// saliency maps, viewports and channel.
struct RunStreams {
    std::mt19937_64 weights;
    std::mt19937_64 viewport;
    std::mt19937_64 prediction;
    std::mt19937_64 channel;

    explicit RunStreams(std::uint64_t seed)
        : weights(stream(seed, 1)), viewport(stream(seed, 2)), prediction(stream(seed, 3)),
          channel(stream(seed, 4)) {}

private:
    static std::mt19937_64 stream(std::uint64_t seed, std::uint32_t id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
        return std::mt19937_64(seq);
    }
};

template <class Rng>
FovWindow uniform_window(Rng& rng, const TileGrid& grid) {
    std::uniform_int_distribution<int> pick(0, grid.origin_count() - 1);
    return grid.origin_at(pick(rng));
}

/// With probability beta returns `reference`; otherwise a window drawn
/// uniformly from every other valid origin. Both random draws are always
/// consumed so the stream position does not depend on beta.
template <class Rng>
FovWindow draw_fov_outcome(Rng& rng, FovWindow reference, double beta, const TileGrid& grid) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const double u = coin(rng);
    const int count = grid.origin_count();
    if (count < 2) return reference;
    std::uniform_int_distribution<int> pick(0, count - 2);
    int ordinal = pick(rng);
    if (ordinal >= grid.origin_ordinal(reference)) ++ordinal;
    return u < beta ? reference : grid.origin_at(ordinal);
}

template <class Rng>
FovWindow lazy_walk_step(Rng& rng, FovWindow w, const TileGrid& grid) {
    std::uniform_int_distribution<int> move(0, 7);
    switch (move(rng)) {
        case 0: w.row = std::max(0, w.row - 1); break;
        case 1: w.row = std::min(grid.rows - grid.fov_rows, w.row + 1); break;
        case 2: w.col = (w.col + grid.cols - 1) % grid.cols; break;
        case 3: w.col = (w.col + 1) % grid.cols; break;
        default: break;  // stay
    }
    return w;
}

/// Bin labels of the rate histograms: 0 (blank) followed by the ladder.
inline std::vector<double> rate_bins(const RateLadder& ladder) {
    std::vector<double> bins{0.0};
    bins.insert(bins.end(), ladder.levels().begin(), ladder.levels().end());
    return bins;
}

inline std::size_t rate_bin(const RateLadder& ladder, double rate) {
    if (rate == 0.0) return 0;
    const auto levels = ladder.levels();
    const auto it = std::lower_bound(levels.begin(), levels.end(), rate);
    if (it == levels.end() || *it != rate) throw std::logic_error("rate is not a ladder level");
    return 1 + static_cast<std::size_t>(it - levels.begin());
}

struct ChunkRecord {
    int k = 0;
    FovWindow viewport;
    FovWindow predicted;
    double snr = 0.0;
    Modulation mode = Modulation::bpsk;
    double rate_mbps = 0.0;
    double size_megabits = 0.0;
    double predicted_stall = 0.0;
    double fov_mean_rate = 0.0;
    QoEReport report;
};

struct RunResult {
    Policy policy = Policy::main;
    double beta = 0.0;
    std::uint64_t seed = 0;
    std::vector<ChunkRecord> chunks;
    std::vector<ChunkDecision> decisions;  // only with SimConfig::keep_decisions

    double mean_norm_qoe = 0.0;
    double mean_qoe = 0.0;
    double mean_quality = 0.0;
    double mean_fov_bitrate = 0.0;
    std::vector<double> fov_hist;  // share of actual-FoV tiles per rate bin
    std::vector<double> all_hist;  // share of all tiles per rate bin
    double total_stall = 0.0;
};

inline RunResult run_simulation(const SimConfig& cfg) {
    cfg.validate();
    RunStreams rng(cfg.seed);
    FadingChannel channel(cfg.link, cfg.duration);
    const auto bins = rate_bins(cfg.ladder);
    const int n = cfg.grid.tile_count();
    const int m = cfg.grid.fov_count();

    RunResult out;
    out.policy = cfg.policy;
    out.beta = cfg.beta;
    out.seed = cfg.seed;
    out.chunks.reserve(static_cast<std::size_t>(cfg.chunks));
    std::vector<double> fov_counts(bins.size(), 0.0);
    std::vector<double> all_counts(bins.size(), 0.0);

    Timeline timeline;
    std::vector<double> weights;
    FovWindow viewport;

    for (int k = 1; k <= cfg.chunks; ++k) {
        if (k == 1 || !cfg.freeze_weights) weights = make_weight_map(rng.weights, cfg.grid);
        if (k == 1 || cfg.motion == ViewportMotion::iid) {
            viewport = uniform_window(rng.viewport, cfg.grid);
        } else {
            viewport = lazy_walk_step(rng.viewport, viewport, cfg.grid);
        }
        const FovWindow predicted = draw_fov_outcome(rng.prediction, viewport, cfg.beta, cfg.grid);
        const ChannelState state = channel.draw(rng.channel, k);
        const Modulation mode = effective_modulation(cfg.policy, state.mode);

        PolicyInput in;
        in.grid = cfg.grid;
        in.ladder = cfg.ladder;
        in.params = cfg.quality;
        in.lambda = cfg.lambda;
        in.weights = weights;
        in.predicted = predicted;
        in.mode = mode;
        in.rate_mbps = cfg.link.rate_mbps(mode);
        in.duration = cfg.duration;
        in.backlog = timeline.backlog();
        in.prebuffered = k == 1;
        in.rounding = cfg.rounding;

        const ChunkDecision decision = decide(cfg.policy, in);
        const double size = chunk_size_megabits(decision.rates, cfg.duration);

        double stall = 0.0;
        if (k > 1) {
            auto step = advance(timeline, size, in.rate_mbps, cfg.duration);
            timeline = std::move(step.timeline);
            stall = step.stall;
        }

        const auto actual_tiles = cfg.grid.fov_tiles(viewport);
        ChunkRecord rec;
        rec.k = k;
        rec.viewport = viewport;
        rec.predicted = predicted;
        rec.snr = state.snr;
        rec.mode = mode;
        rec.rate_mbps = in.rate_mbps;
        rec.size_megabits = size;
        rec.predicted_stall = decision.predicted_stall;
        rec.report = evaluate_chunk(decision, actual_tiles, weights, cfg.lambda, stall, cfg.quality, cfg.ladder);

        double fov_sum = 0.0;
        for (int t : actual_tiles) {
            const double r = decision.rates[static_cast<std::size_t>(t)];
            fov_sum += r;
            fov_counts[rate_bin(cfg.ladder, r)] += 1.0;
        }
        for (double r : decision.rates) all_counts[rate_bin(cfg.ladder, r)] += 1.0;
        rec.fov_mean_rate = fov_sum / m;

        out.mean_norm_qoe += rec.report.qoe_normalized;
        out.mean_qoe += rec.report.qoe;
        out.mean_quality += rec.report.quality;
        out.mean_fov_bitrate += rec.fov_mean_rate;
        out.chunks.push_back(rec);
        if (cfg.keep_decisions) out.decisions.push_back(decision);
    }

    const double kk = cfg.chunks;
    out.mean_norm_qoe /= kk;
    out.mean_qoe /= kk;
    out.mean_quality /= kk;
    out.mean_fov_bitrate /= kk;
    out.total_stall = timeline.total_stall;
    out.fov_hist.resize(bins.size());
    out.all_hist.resize(bins.size());
    for (std::size_t b = 0; b < bins.size(); ++b) {
        out.fov_hist[b] = fov_counts[b] / (kk * m);
        out.all_hist[b] = all_counts[b] / (kk * n);
    }
    return out;
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Sample mean and standard error (sample sd / sqrt(n)); stderr is 0 for n = 1.
inline MeanStderr mean_stderr(std::span<const double> xs) {
    if (xs.empty()) throw std::domain_error("mean_stderr: empty sample");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double n = static_cast<double>(xs.size());
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

struct SummaryStats {
    Policy policy = Policy::main;
    double beta = 0.0;
    std::size_t runs = 0;
    MeanStderr norm_qoe;
    MeanStderr qoe;
    MeanStderr fov_bitrate;
    MeanStderr total_stall;
    std::vector<MeanStderr> fov_hist;
    std::vector<MeanStderr> all_hist;
};

/// Across-seed statistics of runs sharing policy and beta.
inline SummaryStats summarize(std::span<const RunResult> results) {
    if (results.empty()) throw std::domain_error("summarize: no results");
    const RunResult& first = results.front();
    for (const RunResult& r : results) {
        if (r.policy != first.policy || r.beta != first.beta || r.fov_hist.size() != first.fov_hist.size()) {
            throw std::invalid_argument("summarize: results come from different configurations");
        }
    }

    auto column = [&results](auto field) {
        std::vector<double> xs;
        xs.reserve(results.size());
        for (const RunResult& r : results) xs.push_back(field(r));
        return mean_stderr(xs);
    };

    SummaryStats s;
    s.policy = first.policy;
    s.beta = first.beta;
    s.runs = results.size();
    s.norm_qoe = column([](const RunResult& r) { return r.mean_norm_qoe; });
    s.qoe = column([](const RunResult& r) { return r.mean_qoe; });
    s.fov_bitrate = column([](const RunResult& r) { return r.mean_fov_bitrate; });
    s.total_stall = column([](const RunResult& r) { return r.total_stall; });
    for (std::size_t b = 0; b < first.fov_hist.size(); ++b) {
        s.fov_hist.push_back(column([b](const RunResult& r) { return r.fov_hist[b]; }));
        s.all_hist.push_back(column([b](const RunResult& r) { return r.all_hist[b]; }));
    }
    return s;
}

}  // namespace vrstream
