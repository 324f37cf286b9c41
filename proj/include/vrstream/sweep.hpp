#pragma once

// Beta sweep over policies and seeds, written out as CSV tables.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vrstream/config.hpp"
#include "vrstream/sim_harness.hpp"

namespace vrstream {

struct SweepResult {
    std::vector<SummaryStats> summaries;  // sorted by (policy name, beta)
    std::vector<RunResult> runs;          // same order, seeds innermost
};

/// Runs every (policy, beta, seed) combination on up to `jobs` threads.
/// Results are laid out deterministically regardless of scheduling.
inline SweepResult run_sweep_runs(const SweepSpec& spec, const SimConfig& tmpl, int jobs) {
    spec.validate();
    std::vector<Policy> policies = spec.policies;
    std::sort(policies.begin(), policies.end(),
              [](Policy x, Policy y) { return policy_name(x) < policy_name(y); });
    policies.erase(std::unique(policies.begin(), policies.end()), policies.end());
    std::vector<double> betas = spec.betas;
    std::sort(betas.begin(), betas.end());
    betas.erase(std::unique(betas.begin(), betas.end()), betas.end());

    std::vector<SimConfig> configs;
    for (Policy p : policies) {
        for (double beta : betas) {
            for (int s = 0; s < spec.seeds; ++s) {
                SimConfig c = tmpl;
                c.policy = p;
                c.beta = beta;
                c.seed = spec.base_seed + static_cast<std::uint64_t>(s);
                c.validate();
                configs.push_back(std::move(c));
            }
        }
    }

    SweepResult out;
    out.runs.resize(configs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            try {
                out.runs[i] = run_simulation(configs[i]);
                if (!spec.trace) out.runs[i].chunks.clear();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = configs.size();
            }
        }
    };
    const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(configs.size(), 1)));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    const auto per_group = static_cast<std::size_t>(spec.seeds);
    for (std::size_t g = 0; g < out.runs.size(); g += per_group) {
        out.summaries.push_back(summarize(std::span<const RunResult>(out.runs).subspan(g, per_group)));
    }
    return out;
}

namespace detail {

inline std::string sig6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail

inline std::string qoe_csv(const SweepResult& r) {
    std::ostringstream out;
    out << "policy,beta,mean_norm_qoe,stderr\n";
    for (const auto& s : r.summaries) {
        out << policy_name(s.policy) << ',' << detail::sig6(s.beta) << ',' << detail::sig6(s.norm_qoe.mean) << ','
            << detail::sig6(s.norm_qoe.stderr_) << '\n';
    }
    return out.str();
}

inline std::string fov_bitrate_csv(const SweepResult& r) {
    std::ostringstream out;
    out << "policy,beta,mean_fov_bitrate_mbps,stderr\n";
    for (const auto& s : r.summaries) {
        out << policy_name(s.policy) << ',' << detail::sig6(s.beta) << ',' << detail::sig6(s.fov_bitrate.mean)
            << ',' << detail::sig6(s.fov_bitrate.stderr_) << '\n';
    }
    return out.str();
}

/// Long-format histogram: one row per (policy, beta, rate bin).
inline std::string histogram_csv(const SweepResult& r, const RateLadder& ladder, bool fov_only) {
    const auto bins = rate_bins(ladder);
    std::ostringstream out;
    out << "policy,beta,rate_mbps,share,stderr\n";
    for (const auto& s : r.summaries) {
        const auto& hist = fov_only ? s.fov_hist : s.all_hist;
        for (std::size_t b = 0; b < bins.size(); ++b) {
            out << policy_name(s.policy) << ',' << detail::sig6(s.beta) << ',' << detail::sig6(bins[b]) << ','
                << detail::sig6(hist[b].mean) << ',' << detail::sig6(hist[b].stderr_) << '\n';
        }
    }
    return out.str();
}

inline std::string per_chunk_csv(const SweepResult& r) {
    std::ostringstream out;
    out << "policy,beta,seed,chunk,viewport_row,viewport_col,predicted_row,predicted_col,snr,modulation,"
           "download_rate_mbps,size_mbit,predicted_stall_s,stall_s,fov_mean_rate_mbps,quality,qoe,qoe_normalized\n";
    for (const auto& run : r.runs) {
        for (const auto& c : run.chunks) {
            out << policy_name(run.policy) << ',' << detail::sig6(run.beta) << ',' << run.seed << ',' << c.k << ','
                << c.viewport.row << ',' << c.viewport.col << ',' << c.predicted.row << ',' << c.predicted.col << ','
                << detail::sig6(c.snr) << ',' << modulation_name(c.mode) << ',' << detail::sig6(c.rate_mbps) << ','
                << detail::sig6(c.size_megabits) << ',' << detail::sig6(c.predicted_stall) << ','
                << detail::sig6(c.report.stall) << ',' << detail::sig6(c.fov_mean_rate) << ','
                << detail::sig6(c.report.quality) << ',' << detail::sig6(c.report.qoe) << ','
                << detail::sig6(c.report.qoe_normalized) << '\n';
        }
    }
    return out.str();
}

namespace detail {

inline const SummaryStats* find_summary(const SweepResult& r, Policy p, double beta) {
    for (const auto& s : r.summaries) {
        if (s.policy == p && s.beta == beta) return &s;
    }
    return nullptr;
}

}  // namespace detail

inline std::string summary_text(const SweepResult& r, const SimConfig& tmpl, const SweepSpec& spec) {
    std::ostringstream out;
    char line[256];
    out << "VR tile streaming sweep: K=" << tmpl.chunks << ", L=" << detail::sig6(tmpl.duration)
        << " s, lambda=" << detail::sig6(tmpl.lambda) << ", seeds=" << spec.seeds
        << " (base " << spec.base_seed << ")\n\n";
    std::snprintf(line, sizeof line, "%-10s %5s  %-20s  %-20s  %12s\n", "policy", "beta", "norm QoE (+-se)",
                  "FoV Mbps (+-se)", "stall s/run");
    out << line;
    for (const auto& s : r.summaries) {
        std::snprintf(line, sizeof line, "%-10s %5.2f  %8.4f (+-%7.4f)  %8.4f (+-%7.4f)  %12.2f\n",
                      std::string(policy_name(s.policy)).c_str(), s.beta, s.norm_qoe.mean, s.norm_qoe.stderr_,
                      s.fov_bitrate.mean, s.fov_bitrate.stderr_, s.total_stall.mean);
        out << line;
    }

    bool header = false;
    for (const auto& s : r.summaries) {
        if (s.policy != Policy::main) continue;
        const auto* qpsk = detail::find_summary(r, Policy::main_qpsk, s.beta);
        double best_other = -1.0;
        for (Policy p : {Policy::baseline, Policy::greedy, Policy::main_qpsk}) {
            if (const auto* o = detail::find_summary(r, p, s.beta)) best_other = std::max(best_other, o->fov_bitrate.mean);
        }
        if (!qpsk && best_other < 0.0) continue;
        if (!header) {
            out << "\nmain policy vs. alternatives\n";
            header = true;
        }
        std::snprintf(line, sizeof line, "beta %.2f:", s.beta);
        out << line;
        if (qpsk) {
            std::snprintf(line, sizeof line, "  QoE gain over main-qpsk %+.1f%%",
                          100.0 * (s.norm_qoe.mean - qpsk->norm_qoe.mean) / std::abs(qpsk->norm_qoe.mean));
            out << line;
        }
        if (best_other > 0.0) {
            std::snprintf(line, sizeof line, "  FoV bitrate margin over best other %+.1f%%",
                          100.0 * (s.fov_bitrate.mean - best_other) / best_other);
            out << line;
        }
        out << '\n';
    }
    return out.str();
}

/// Runs the sweep and writes the CSV tables and summary into spec.output_dir.
/// Nothing is written unless every run completes.
inline SweepResult run_sweep(const SweepSpec& spec, const SimConfig& tmpl, int jobs) {
    SweepResult result = run_sweep_runs(spec, tmpl, jobs);

    namespace fs = std::filesystem;
    const fs::path dir(spec.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

    std::vector<std::pair<std::string, std::string>> files{
        {"qoe_vs_beta.csv", qoe_csv(result)},
        {"fov_bitrate_vs_beta.csv", fov_bitrate_csv(result)},
        {"fov_rate_hist.csv", histogram_csv(result, tmpl.ladder, true)},
        {"all_rate_hist.csv", histogram_csv(result, tmpl.ladder, false)},
        {"summary.txt", summary_text(result, tmpl, spec)},
    };
    if (spec.trace) files.emplace_back("per_chunk.csv", per_chunk_csv(result));

    for (const auto& [name, body] : files) {
        const fs::path path = dir / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << body;
        f.close();
        if (!f) throw std::runtime_error("cannot write " + path.string());
    }
    return result;
}

}  // namespace vrstream
