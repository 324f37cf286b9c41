#pragma once

// Download / playback timeline with unlimited client buffer.
//
// Chunk 1 is pre-buffered: t_1 = t~_1 = t_2 = 0. Chunk k >= 2 downloads right
// after chunk k-1 and plays at t~_k = max(t~_{k-1} + L, t_k + d_k), where d_k is
// its download time. The stall before chunk k is t~_k - t~_{k-1} - L.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vrstream {

struct Timeline {
    double t = 0.0;             // download start of chunk k
    double t_play_prev = 0.0;   // play time of chunk k-1
    int k = 2;                  // next chunk to download
    double total_stall = 0.0;
    std::vector<double> per_chunk_stall{0.0};  // stall of chunks 1..k-1

    /// t_k - t~_{k-1}: how far the download front is behind (>0) or ahead (<0)
    /// of the playback of the previous chunk.
    [[nodiscard]] double backlog() const noexcept { return t - t_play_prev; }
};

struct TimelineStep {
    Timeline timeline;
    double stall = 0.0;
};

/// Downloads chunk `tl.k` of `size_megabits` at `rate_mbps` (= m_k * B).
inline TimelineStep advance(const Timeline& tl, double size_megabits, double rate_mbps,
                            double duration) {
    if (!(rate_mbps > 0.0)) throw std::domain_error("advance: download rate must be > 0");
    if (size_megabits < 0.0) throw std::invalid_argument("advance: negative chunk size");
    if (tl.k < 2) throw std::invalid_argument("advance: chunk 1 is pre-buffered");

    const double download = size_megabits / rate_mbps;
    const double play = std::max(tl.t_play_prev + duration, tl.t + download);
    const double stall = std::max(0.0, play - tl.t_play_prev - duration);

    TimelineStep step{tl, stall};
    step.timeline.t = tl.t + download;
    step.timeline.t_play_prev = play;
    step.timeline.k = tl.k + 1;
    step.timeline.total_stall += stall;
    step.timeline.per_chunk_stall.push_back(stall);
    return step;
}

/// Closed-form stall of chunk k from its history:
///   max{0, L * (sum_{j=2}^{k-1} (d_j/L - dt_j/L - 1) + d_k/L - 1)}
/// `download_times` holds d_2..d_k; `prior_stalls` holds dt_2..dt_{k-1}.
inline double stall_closed_form(std::span<const double> download_times,
                                std::span<const double> prior_stalls, double duration) {
    if (download_times.empty() || prior_stalls.size() + 1 != download_times.size()) {
        throw std::invalid_argument("stall_closed_form: inconsistent history lengths");
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < prior_stalls.size(); ++j) {
        acc += download_times[j] / duration - prior_stalls[j] / duration - 1.0;
    }
    acc += download_times.back() / duration - 1.0;
    return std::max(0.0, duration * acc);
}

/// Overload taking sizes (Mbit) and per-chunk download rates (Mbit/s).
inline double stall_closed_form(std::span<const double> sizes, std::span<const double> rates_mbps,
                                std::span<const double> prior_stalls, double duration) {
    if (sizes.size() != rates_mbps.size()) {
        throw std::invalid_argument("stall_closed_form: sizes and rates differ in length");
    }
    std::vector<double> download(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) download[j] = sizes[j] / rates_mbps[j];
    return stall_closed_form(download, prior_stalls, duration);
}

}  // namespace vrstream
