#pragma once

// Block-fading wireless link (h = alpha * h_r) and adaptive modulation.
//
// SNR values are linear per-symbol SNRs. The BER curves are the usual AWGN
// expressions for BPSK, QPSK and Gray-coded square M-QAM.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace vrstream {

enum class Modulation : int { bpsk = 1, qpsk = 2, qam16 = 4, qam64 = 6 };

inline constexpr std::array<Modulation, 4> kModulations{Modulation::bpsk, Modulation::qpsk,
                                                         Modulation::qam16, Modulation::qam64};

/// Spectral efficiency in bits/symbol; throws on a value outside the mode set.
inline int bits_per_symbol(Modulation m) {
    switch (m) {
        case Modulation::bpsk: return 1;
        case Modulation::qpsk: return 2;
        case Modulation::qam16: return 4;
        case Modulation::qam64: return 6;
    }
    throw std::invalid_argument("unknown modulation mode");
}

inline std::string_view modulation_name(Modulation m) {
    switch (m) {
        case Modulation::bpsk: return "BPSK";
        case Modulation::qpsk: return "QPSK";
        case Modulation::qam16: return "16-QAM";
        case Modulation::qam64: return "64-QAM";
    }
    throw std::invalid_argument("unknown modulation mode");
}

inline std::size_t modulation_slot(Modulation m) {
    switch (m) {
        case Modulation::bpsk: return 0;
        case Modulation::qpsk: return 1;
        case Modulation::qam16: return 2;
        case Modulation::qam64: return 3;
    }
    throw std::invalid_argument("unknown modulation mode");
}

struct LinkConfig {
    double bandwidth = 20e6;         // symbols per second
    double avg_snr = std::pow(10.0, 1.8);  // P_t / (B N_0), linear (18 dB)
    double target_ber = 1e-3;
    double alpha_min = 0.75;
    double alpha_max = 1.25;
    double alpha_period = 40.0;      // seconds between large-scale redraws
    double fading_period = 2.0;      // seconds between small-scale redraws

    void validate() const {
        if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
        if (!(avg_snr > 0.0)) throw std::invalid_argument("average SNR must be > 0");
        if (!(target_ber > 0.0 && target_ber < 0.5)) {
            throw std::invalid_argument("target BER must be in (0, 0.5)");
        }
        if (!(alpha_min > 0.0 && alpha_min <= alpha_max)) {
            throw std::invalid_argument("alpha range must satisfy 0 < min <= max");
        }
        if (!(alpha_period > 0.0 && fading_period > 0.0)) {
            throw std::invalid_argument("fading periods must be > 0");
        }
        const double ratio = alpha_period / fading_period;
        if (std::abs(ratio - std::round(ratio)) > 1e-9) {
            throw std::invalid_argument("fading period must divide alpha period");
        }
    }

    /// Download rate in Mbit/s under the given modulation.
    [[nodiscard]] double rate_mbps(Modulation m) const { return bits_per_symbol(m) * bandwidth / 1e6; }

    friend bool operator==(const LinkConfig&, const LinkConfig&) = default;
};

/// Gaussian tail probability Q(x).
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

inline double ber(Modulation mode, double snr) {
    if (snr < 0.0) throw std::domain_error("ber: negative SNR");
    auto square_qam = [snr](double order) {
        const double k = std::log2(order);
        return (4.0 / k) * (1.0 - 1.0 / std::sqrt(order)) * q_function(std::sqrt(3.0 * snr / (order - 1.0)));
    };
    switch (mode) {
        case Modulation::bpsk: return q_function(std::sqrt(2.0 * snr));
        case Modulation::qpsk: return q_function(std::sqrt(snr));
        case Modulation::qam16: return square_qam(16.0);
        case Modulation::qam64: return square_qam(64.0);
    }
    throw std::invalid_argument("unknown modulation mode");
}

/// S(P_e, mode): the SNR at which `mode` reaches `target_ber`. Bisection to
/// 1e-9 relative width.
inline double snr_threshold(Modulation mode, double target_ber) {
    const double ceiling = ber(mode, 0.0);
    if (!(target_ber > 0.0 && target_ber < ceiling)) {
        throw std::domain_error("snr_threshold: target BER outside (0, ber(mode, 0))");
    }
    double lo = 0.0;
    double hi = 1.0;
    while (ber(mode, hi) > target_ber) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw std::domain_error("snr_threshold: target BER unreachable");
    }
    while (hi - lo > 1e-9 * hi) {
        const double mid = 0.5 * (lo + hi);
        (ber(mode, mid) > target_ber ? lo : hi) = mid;
    }
    return hi;
}

/// Per-mode SNR thresholds for one target BER, in ascending mode order.
class ModulationTable {
public:
    explicit ModulationTable(double target_ber) : target_ber_(target_ber) {
        for (std::size_t i = 0; i < kModulations.size(); ++i) {
            thresholds_[i] = snr_threshold(kModulations[i], target_ber);
        }
    }

    [[nodiscard]] double target_ber() const noexcept { return target_ber_; }
    [[nodiscard]] double threshold(Modulation m) const { return thresholds_[modulation_slot(m)]; }

    /// Highest-efficiency mode whose threshold is <= snr; BPSK below every threshold.
    [[nodiscard]] Modulation select(double snr) const noexcept {
        Modulation chosen = Modulation::bpsk;
        for (std::size_t i = 0; i < kModulations.size(); ++i) {
            if (thresholds_[i] <= snr) chosen = kModulations[i];
        }
        return chosen;
    }

private:
    double target_ber_;
    std::array<double, 4> thresholds_{};
};

inline Modulation select_modulation(double snr, const LinkConfig& cfg) {
    return ModulationTable(cfg.target_ber).select(snr);
}

struct ChannelState {
    double alpha = 1.0;
    std::complex<double> h_r{1.0, 0.0};
    double snr = 0.0;
    Modulation mode = Modulation::bpsk;
};

/// Block-fading process. Alpha is held for `alpha_period` seconds and h_r for
/// `fading_period` seconds; both epochs are aligned to the chunk timeline.
class FadingChannel {
public:
    FadingChannel(LinkConfig cfg, double chunk_duration)
        : cfg_(cfg), chunk_duration_(chunk_duration), table_(cfg.target_ber) {
        cfg_.validate();
        if (!(chunk_duration > 0.0)) throw std::invalid_argument("chunk duration must be positive");
    }

    [[nodiscard]] const LinkConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const ModulationTable& table() const noexcept { return table_; }

    /// Channel for 1-based chunk `k`. Chunks must be requested in order.
    template <class Rng>
    ChannelState draw(Rng& rng, int k) {
        const std::int64_t alpha_epoch = epoch(k, cfg_.alpha_period);
        const std::int64_t fading_epoch = epoch(k, cfg_.fading_period);
        if (alpha_epoch != alpha_epoch_) {
            std::uniform_real_distribution<double> uni(cfg_.alpha_min, cfg_.alpha_max);
            alpha_ = cfg_.alpha_min == cfg_.alpha_max ? cfg_.alpha_min : uni(rng);
            alpha_epoch_ = alpha_epoch;
        }
        if (fading_epoch != fading_epoch_) {
            std::normal_distribution<double> component(0.0, std::sqrt(0.5));
            const double re = component(rng);
            const double im = component(rng);
            h_r_ = {re, im};
            fading_epoch_ = fading_epoch;
        }
        return state_for(alpha_, h_r_);
    }

    /// Builds the state for a given fading draw (used for forced draws in tests).
    [[nodiscard]] ChannelState state_for(double alpha, std::complex<double> h_r) const {
        ChannelState s;
        s.alpha = alpha;
        s.h_r = h_r;
        s.snr = alpha * alpha * std::norm(h_r) * cfg_.avg_snr;
        s.mode = table_.select(s.snr);
        return s;
    }

private:
    [[nodiscard]] std::int64_t epoch(int k, double period) const {
        return static_cast<std::int64_t>(std::floor((k - 1) * chunk_duration_ / period + 1e-9));
    }

    LinkConfig cfg_;
    double chunk_duration_;
    ModulationTable table_;
    double alpha_ = 1.0;
    std::complex<double> h_r_{1.0, 0.0};
    std::int64_t alpha_epoch_ = -1;
    std::int64_t fading_epoch_ = -1;
};

}  // namespace vrstream
