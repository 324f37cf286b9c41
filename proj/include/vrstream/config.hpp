#pragma once

// Flat `key = value` configuration documents.
//
// One setting per line; `#` starts a comment; blank lines are ignored. Every
// key is optional and falls back to the defaults below. Unknown keys, repeated
// keys, malformed lines and out-of-range values are rejected with the line
// number and key.
//
//   chunks           = 1000          # K
//   chunk_duration   = 2             # L, seconds
//   tile_rows        = 4
//   tile_cols        = 8
//   fov_rows         = 2
//   fov_cols         = 3
//   ladder           = 1, 2, 3, 4    # Mbps, strictly ascending
//   a                = 1             # EM(R) = a R^b
//   b                = 0.5
//   lambda           = 10            # QoE units per stall second
//   bandwidth        = 20e6          # symbols/s
//   avg_snr_db       = 18            # or avg_snr = <linear>
//   target_ber       = 1e-3
//   alpha_min        = 0.75
//   alpha_max        = 1.25
//   alpha_period     = 40            # seconds
//   fading_period    = 2             # seconds
//   viewport_motion  = lazy_walk     # lazy_walk | iid
//   freeze_weights   = false
//   rounding         = strict_break  # strict_break | skip_unaffordable
//   betas            = 0.5, 0.6, 0.7, 0.8, 0.9   # or beta = <single value>
//   policies         = main, baseline, greedy, main-qpsk
//   seeds            = 20
//   base_seed        = 1
//   output_dir       = results
//   trace            = false

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vrstream/policies.hpp"
#include "vrstream/sim_harness.hpp"

namespace vrstream {

struct SweepSpec {
    std::vector<double> betas{0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<Policy> policies{Policy::main, Policy::baseline, Policy::greedy, Policy::main_qpsk};
    int seeds = 20;
    std::uint64_t base_seed = 1;
    std::string output_dir = "results";
    bool trace = false;

    void validate() const {
        if (betas.empty()) throw std::invalid_argument("at least one beta required");
        for (double b : betas) {
            if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("beta must be in [0,1]");
        }
        if (policies.empty()) throw std::invalid_argument("at least one policy required");
        if (seeds < 1) throw std::invalid_argument("seed count must be >= 1");
    }
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, std::string key, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + (key.empty() ? "" : ", key '" + key + "'") +
                             ": " + what),
          line_(line), key_(std::move(key)) {}

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

struct ParsedConfig {
    SimConfig sim;
    SweepSpec sweep;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline ParsedConfig parse_config(std::string_view text) {
    ParsedConfig cfg;
    SimConfig& sim = cfg.sim;
    SweepSpec& sweep = cfg.sweep;
    std::set<std::string, std::less<>> seen;
    int line_no = 0;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected 'key = value'");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(line_no, "", "missing key");
        if (value.empty()) throw ConfigError(line_no, key, "missing value");

        auto fail = [&](const std::string& what) { return ConfigError(line_no, key, what); };
        auto number = [&](std::string_view v) {
            double out = 0.0;
            const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
                throw fail("not a number: '" + std::string(v) + "'");
            }
            return out;
        };
        auto integer = [&](std::string_view v) {
            long long out = 0;
            const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (ec != std::errc{} || ptr != v.data() + v.size()) {
                throw fail("not an integer: '" + std::string(v) + "'");
            }
            return out;
        };
        auto boolean = [&](std::string_view v) {
            if (v == "true" || v == "1") return true;
            if (v == "false" || v == "0") return false;
            throw fail("expected true or false");
        };
        auto positive = [&](double v) {
            if (!(v > 0.0)) throw fail("must be > 0");
            return v;
        };
        auto count = [&](long long v, long long min) {
            if (v < min || v > 1'000'000'000) throw fail("must be >= " + std::to_string(min));
            return static_cast<int>(v);
        };
        auto unit_beta = [&](double v) {
            if (!(v >= 0.0 && v <= 1.0)) throw fail("beta out of range [0,1]");
            return v;
        };

        std::string canonical = key == "beta" ? "betas" : key == "avg_snr_db" ? "avg_snr" : key;
        if (!seen.insert(canonical).second) throw fail("set more than once");

        if (key == "chunks") {
            sim.chunks = count(integer(value), 2);
        } else if (key == "chunk_duration") {
            sim.duration = positive(number(value));
        } else if (key == "tile_rows") {
            sim.grid.rows = count(integer(value), 1);
        } else if (key == "tile_cols") {
            sim.grid.cols = count(integer(value), 1);
        } else if (key == "fov_rows") {
            sim.grid.fov_rows = count(integer(value), 1);
        } else if (key == "fov_cols") {
            sim.grid.fov_cols = count(integer(value), 1);
        } else if (key == "ladder") {
            std::vector<double> levels;
            for (auto item : detail::split_list(value)) levels.push_back(number(item));
            try {
                sim.ladder = RateLadder(std::move(levels));
            } catch (const std::invalid_argument& e) {
                throw fail(e.what());
            }
        } else if (key == "a") {
            sim.quality.a = positive(number(value));
        } else if (key == "b") {
            const double b = number(value);
            if (!(b > 0.0 && b < 1.0)) throw fail("must be in (0,1)");
            sim.quality.b = b;
        } else if (key == "lambda") {
            sim.lambda = positive(number(value));
        } else if (key == "bandwidth") {
            sim.link.bandwidth = positive(number(value));
        } else if (key == "avg_snr") {
            sim.link.avg_snr = positive(number(value));
        } else if (key == "avg_snr_db") {
            sim.link.avg_snr = std::pow(10.0, number(value) / 10.0);
        } else if (key == "target_ber") {
            const double p = number(value);
            if (!(p > 0.0 && p < 0.5)) throw fail("must be in (0, 0.5)");
            sim.link.target_ber = p;
        } else if (key == "alpha_min") {
            sim.link.alpha_min = positive(number(value));
        } else if (key == "alpha_max") {
            sim.link.alpha_max = positive(number(value));
        } else if (key == "alpha_period") {
            sim.link.alpha_period = positive(number(value));
        } else if (key == "fading_period") {
            sim.link.fading_period = positive(number(value));
        } else if (key == "viewport_motion") {
            if (value == "lazy_walk") {
                sim.motion = ViewportMotion::lazy_walk;
            } else if (value == "iid") {
                sim.motion = ViewportMotion::iid;
            } else {
                throw fail("expected lazy_walk or iid");
            }
        } else if (key == "freeze_weights") {
            sim.freeze_weights = boolean(value);
        } else if (key == "rounding") {
            if (value == "strict_break") {
                sim.rounding = RoundingRule::strict_break;
            } else if (value == "skip_unaffordable") {
                sim.rounding = RoundingRule::skip_unaffordable;
            } else {
                throw fail("expected strict_break or skip_unaffordable");
            }
        } else if (key == "betas" || key == "beta") {
            sweep.betas.clear();
            for (auto item : detail::split_list(value)) sweep.betas.push_back(unit_beta(number(item)));
            if (key == "beta" && sweep.betas.size() != 1) throw fail("expected a single value");
        } else if (key == "policies") {
            sweep.policies.clear();
            for (auto item : detail::split_list(value)) {
                try {
                    sweep.policies.push_back(parse_policy(item));
                } catch (const std::invalid_argument& e) {
                    throw fail(e.what());
                }
            }
        } else if (key == "seeds") {
            sweep.seeds = count(integer(value), 1);
        } else if (key == "base_seed") {
            std::uint64_t s = 0;
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
            if (ec != std::errc{} || ptr != value.data() + value.size()) {
                throw fail("not an unsigned integer: '" + std::string(value) + "'");
            }
            sweep.base_seed = s;
        } else if (key == "output_dir") {
            sweep.output_dir = std::string(value);
        } else if (key == "trace") {
            sweep.trace = boolean(value);
        } else {
            throw fail("unknown key");
        }
    }

    try {
        sim.grid.validate();
        sim.link.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(line_no, "", e.what());
    }
    sim.beta = sweep.betas.front();
    sim.policy = sweep.policies.front();
    return cfg;
}

/// Writes every key explicitly; parse_config(serialize_config(c)) reproduces c.
inline std::string serialize_config(const SimConfig& sim, const SweepSpec& sweep) {
    using detail::format_double;
    std::ostringstream out;
    auto list = [](const auto& items, auto fmt) {
        std::string s;
        for (const auto& x : items) {
            if (!s.empty()) s += ", ";
            s += fmt(x);
        }
        return s;
    };
    out << "chunks = " << sim.chunks << '\n'
        << "chunk_duration = " << format_double(sim.duration) << '\n'
        << "tile_rows = " << sim.grid.rows << '\n'
        << "tile_cols = " << sim.grid.cols << '\n'
        << "fov_rows = " << sim.grid.fov_rows << '\n'
        << "fov_cols = " << sim.grid.fov_cols << '\n'
        << "ladder = " << list(sim.ladder.levels(), format_double) << '\n'
        << "a = " << format_double(sim.quality.a) << '\n'
        << "b = " << format_double(sim.quality.b) << '\n'
        << "lambda = " << format_double(sim.lambda) << '\n'
        << "bandwidth = " << format_double(sim.link.bandwidth) << '\n'
        << "avg_snr = " << format_double(sim.link.avg_snr) << '\n'
        << "target_ber = " << format_double(sim.link.target_ber) << '\n'
        << "alpha_min = " << format_double(sim.link.alpha_min) << '\n'
        << "alpha_max = " << format_double(sim.link.alpha_max) << '\n'
        << "alpha_period = " << format_double(sim.link.alpha_period) << '\n'
        << "fading_period = " << format_double(sim.link.fading_period) << '\n'
        << "viewport_motion = " << (sim.motion == ViewportMotion::iid ? "iid" : "lazy_walk") << '\n'
        << "freeze_weights = " << (sim.freeze_weights ? "true" : "false") << '\n'
        << "rounding = "
        << (sim.rounding == RoundingRule::skip_unaffordable ? "skip_unaffordable" : "strict_break") << '\n'
        << "betas = " << list(sweep.betas, format_double) << '\n'
        << "policies = " << list(sweep.policies, [](Policy p) { return std::string(policy_name(p)); }) << '\n'
        << "seeds = " << sweep.seeds << '\n'
        << "base_seed = " << sweep.base_seed << '\n'
        << "output_dir = " << sweep.output_dir << '\n'
        << "trace = " << (sweep.trace ? "true" : "false") << '\n';
    return out.str();
}

}  // namespace vrstream
