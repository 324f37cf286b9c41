#pragma once

// Per-chunk QoE maximization over the predicted-FoV tile rates.
//
// The chunk objective is
//     sum_i w_i * a * R_i^b  -  lambda * max(0, C0 + (L / mB) * sum_i R_i)
// over R in [R_1, R_max]^M, where C0 collects everything in the stall hinge
// that does not depend on the FoV rates (playback backlog, chunk duration and
// the non-FoV tiles pinned at R_1). The continuous relaxation is solved
// exactly, then snapped to the ladder by weight-priority rounding.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "vrstream/timeline.hpp"
#include "vrstream/video_model.hpp"

namespace vrstream {

struct ChunkContext {
    std::vector<double> fov_weights;
    RateLadder ladder;
    QualityParams params;
    double lambda = 1.0;     // QoE units per second of stall
    double rate_mbps = 40.0; // m_k * B
    double duration = 2.0;   // L
    double slack = 0.0;      // C0, seconds; -inf when the chunk cannot stall

    void validate() const {
        params.validate();
        if (fov_weights.empty()) throw std::invalid_argument("chunk context: no FoV tiles");
        for (double w : fov_weights) {
            if (!(w > 0.0)) throw std::invalid_argument("chunk context: weights must be > 0");
        }
        if (!(lambda > 0.0)) throw std::invalid_argument("chunk context: lambda must be > 0");
        if (!(rate_mbps > 0.0)) throw std::invalid_argument("chunk context: download rate must be > 0");
        if (!(duration > 0.0)) throw std::invalid_argument("chunk context: duration must be > 0");
        if (std::isnan(slack) || slack == std::numeric_limits<double>::infinity()) {
            throw std::invalid_argument("chunk context: slack must be finite or -inf");
        }
    }

    /// Seconds of download per Mbps of FoV rate.
    [[nodiscard]] double stall_per_mbps() const noexcept { return duration / rate_mbps; }

    [[nodiscard]] double stall(std::span<const double> rates) const noexcept {
        const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
        return std::max(0.0, slack + stall_per_mbps() * total);
    }

    [[nodiscard]] double objective(std::span<const double> rates) const {
        return quality_utility(rates, fov_weights, params) - lambda * stall(rates);
    }
};

struct RelaxedSolution {
    std::vector<double> rates;
    double objective = 0.0;
    double stall = 0.0;
};

/// Constant part of the stall hinge for the chunk about to download.
///   C0 = (t_k - t~_{k-1}) - L + L * (N - M) * R_1 / mB
/// The backlog term equals L * sum_{j=2}^{k-1} (d_j/L - dt_j/L - 1).
inline double stall_slack(const Timeline& history, double rate_mbps, double duration,
                          const TileGrid& grid, const RateLadder& ladder) {
    if (!(rate_mbps > 0.0)) throw std::domain_error("stall_slack: download rate must be > 0");
    const int outside = grid.tile_count() - grid.fov_count();
    return history.backlog() - duration + duration * outside * ladder.lowest() / rate_mbps;
}

namespace detail {

/// argmax_R w*a*R^b - price*R on [lo, hi].
inline double priced_rate(double weight, const QualityParams& p, double price, double lo, double hi) {
    if (price <= 0.0) return hi;
    const double stationary = std::pow(price / (weight * p.a * p.b), 1.0 / (p.b - 1.0));
    return std::clamp(stationary, lo, hi);
}

inline std::vector<double> priced_rates(const ChunkContext& ctx, double price) {
    std::vector<double> rates(ctx.fov_weights.size());
    for (std::size_t i = 0; i < rates.size(); ++i) {
        rates[i] = priced_rate(ctx.fov_weights[i], ctx.params, price, ctx.ladder.lowest(),
                               ctx.ladder.highest());
    }
    return rates;
}

inline double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

/// Water-filling for max sum w_i a R_i^b s.t. sum R_i <= budget on the box.
/// Requires M*R_1 <= budget < M*R_max.
inline std::vector<double> water_fill(const ChunkContext& ctx, double budget) {
    const double lo_rate = ctx.ladder.lowest();
    const double hi_rate = ctx.ladder.highest();
    const auto [w_min, w_max] = std::minmax_element(ctx.fov_weights.begin(), ctx.fov_weights.end());
    const QualityParams& p = ctx.params;
    // Multiplier at which every tile sits at R_max (lo) / R_1 (hi).
    double mu_lo = *w_min * p.a * p.b * std::pow(hi_rate, p.b - 1.0);
    double mu_hi = *w_max * p.a * p.b * std::pow(lo_rate, p.b - 1.0);
    for (int iter = 0; iter < 200 && (mu_hi - mu_lo) > 1e-10 * mu_hi; ++iter) {
        const double mid = 0.5 * (mu_lo + mu_hi);
        if (sum(priced_rates(ctx, mid)) > budget) {
            mu_lo = mid;
        } else {
            mu_hi = mid;
        }
    }
    return priced_rates(ctx, mu_hi);
}

}  // namespace detail

/// Global maximizer of the relaxed (continuous-rate) chunk problem.
///
/// Regime A keeps the stall hinge inactive: water-filling under the budget
/// sum R <= -C0 * mB / L. Regime B assumes the hinge is active, which makes the
/// problem separable with a constant price lambda * L / mB per Mbps. The
/// objective is concave, so the better self-consistent regime is optimal; the
/// hinge boundary is reachable from regime A.
inline RelaxedSolution solve_relaxed(const ChunkContext& ctx) {
    ctx.validate();
    const std::size_t m = ctx.fov_weights.size();
    const double lo_rate = ctx.ladder.lowest();
    const double hi_rate = ctx.ladder.highest();
    const double c = ctx.stall_per_mbps();
    constexpr double kHingeTol = 1e-9;

    auto finish = [&ctx](std::vector<double> rates) {
        RelaxedSolution s;
        s.stall = ctx.stall(rates);
        s.objective = ctx.objective(rates);
        s.rates = std::move(rates);
        return s;
    };

    std::vector<RelaxedSolution> candidates;

    // Regime A.
    const double budget = -ctx.slack / c;
    if (budget >= static_cast<double>(m) * hi_rate) {
        candidates.push_back(finish(std::vector<double>(m, hi_rate)));
    } else if (budget >= static_cast<double>(m) * lo_rate) {
        candidates.push_back(finish(detail::water_fill(ctx, budget)));
    }

    // Regime B.
    auto active = detail::priced_rates(ctx, ctx.lambda * c);
    if (ctx.slack + c * detail::sum(active) >= -kHingeTol) {
        candidates.push_back(finish(std::move(active)));
    }

    if (candidates.empty()) {
        // Only reachable through round-off right at the hinge boundary.
        std::vector<double> boundary(m, std::clamp(budget / static_cast<double>(m), lo_rate, hi_rate));
        candidates.push_back(finish(std::move(boundary)));
    }

    return *std::max_element(candidates.begin(), candidates.end(),
                             [](const RelaxedSolution& x, const RelaxedSolution& y) {
                                 return x.objective < y.objective;
                             });
}

enum class RoundingRule {
    strict_break,       // stop at the first unaffordable upgrade
    skip_unaffordable,  // keep scanning lower-weight tiles with the leftover budget
};

/// Weight-priority rounding of relaxed rates onto the ladder.
///
/// Every rate is floored to the ladder and the shortfall sum(R* - floor) becomes
/// the upgrade budget. Tiles are then visited by decreasing weight (lower index
/// first on ties); each one-level upgrade to ceil(R*) is charged against the
/// budget and kept while the budget stays non-negative.
inline std::vector<double> round_rates(std::span<const double> relaxed, std::span<const double> weights,
                                       const RateLadder& ladder,
                                       RoundingRule rule = RoundingRule::strict_break) {
    if (relaxed.size() != weights.size()) {
        throw std::invalid_argument("round_rates: rates and weights differ in length");
    }
    const std::size_t m = relaxed.size();
    std::vector<double> rounded(m);
    std::vector<double> upper(m);
    double budget = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        rounded[i] = ladder.floor(relaxed[i]);
        upper[i] = ladder.ceil(relaxed[i]);
        budget += relaxed[i] - rounded[i];
    }
    if (budget == 0.0) return rounded;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&weights](std::size_t x, std::size_t y) { return weights[x] > weights[y]; });

    for (std::size_t i : order) {
        const double remaining = budget - (upper[i] - rounded[i]);
        if (remaining >= 0.0) {
            budget = remaining;
            rounded[i] = upper[i];
        } else if (rule == RoundingRule::strict_break) {
            break;
        }
    }
    return rounded;
}

/// Replaces rates within `tol` of a ladder level by that level.
inline void snap_to_ladder(std::span<double> rates, const RateLadder& ladder, double tol = 1e-9) {
    for (double& r : rates) {
        const double below = ladder.floor(r);
        const double above = ladder.ceil(r);
        if (std::abs(r - below) <= tol) {
            r = below;
        } else if (std::abs(above - r) <= tol) {
            r = above;
        }
    }
}

}  // namespace vrstream
