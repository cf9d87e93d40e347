#pragma once

// Monte-Carlo comparison of joint and TDMA relaying over a relay-SNR sweep.
// Each trial draws one channel realization that is reused at every SNR point
// and by both schemes.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "marc/channel.hpp"
#include "marc/joint_relaying.hpp"
#include "marc/parallel.hpp"
#include "marc/random.hpp"
#include "marc/tdma_relaying.hpp"

namespace marc {

struct SweepConfig {
    std::size_t users = 8;
    std::vector<std::size_t> user_antennas = std::vector<std::size_t>(8, 4);
    std::size_t relay_antennas = 4;
    std::vector<double> user_power = std::vector<double>(8, 10.0);
    std::vector<double> snr_db = default_snr_grid();
    std::size_t trials = 1000;
    std::uint64_t master_seed = 1;

    /// 0, 2, ..., 30 dB.
    static std::vector<double> default_snr_grid() {
        std::vector<double> grid;
        for (int db = 0; db <= 30; db += 2) grid.push_back(db);
        return grid;
    }

    void validate() const {
        if (users == 0 || relay_antennas == 0) throw Error(ErrorKind::InvalidDimensions, "need K >= 1 and Mr >= 1");
        if (user_antennas.size() != users || user_power.size() != users) {
            throw Error(ErrorKind::InvalidDimensions, "per-user lists must have K entries");
        }
        if (trials == 0) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
        for (double s : snr_db)
            if (!std::isfinite(s)) throw Error(ErrorKind::InvalidArgument, "SNR points must be finite");
        PowerBudget{user_power, 0.0}.validate(users);
    }
};

/// Relay power for a relay SNR in dB (unit noise power).
inline double relay_power_from_db(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

struct SweepPoint {
    double snr_db = 0.0;
    double joint_mean = 0.0;
    double tdma_mean = 0.0;
    double gain_pct = 0.0;  // 100 * (tdma_mean - joint_mean) / joint_mean
    double joint_se = 0.0;
    double tdma_se = 0.0;
    std::size_t trials = 0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
};

namespace detail {

struct MeanAndError {
    double mean = 0.0;
    double standard_error = 0.0;
};

inline MeanAndError summarize(const std::vector<double>& xs) {
    MeanAndError out;
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.standard_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return out;
}

}  // namespace detail

inline SweepResult run_sweep(const SweepConfig& cfg, std::size_t workers = 1) {
    cfg.validate();
    const std::size_t points = cfg.snr_db.size();
    // rates[point][trial], filled per trial index, reduced in index order.
    std::vector<std::vector<double>> joint(points, std::vector<double>(cfg.trials));
    std::vector<std::vector<double>> tdma(points, std::vector<double>(cfg.trials));

    parallel_for(cfg.trials, workers, [&](std::size_t t) {
        const ChannelSet c =
            sample_rayleigh(cfg.users, cfg.user_antennas, cfg.relay_antennas, derive_seed(cfg.master_seed, t));
        for (std::size_t i = 0; i < points; ++i) {
            const PowerBudget p{cfg.user_power, relay_power_from_db(cfg.snr_db[i])};
            joint[i][t] = joint_sum_rate(c, p).sum_rate;
            tdma[i][t] = tdma_sum_rate(c, p).sum_rate;
        }
    });

    SweepResult r;
    for (std::size_t i = 0; i < points; ++i) {
        const auto j = detail::summarize(joint[i]);
        const auto d = detail::summarize(tdma[i]);
        SweepPoint pt;
        pt.snr_db = cfg.snr_db[i];
        pt.joint_mean = j.mean;
        pt.tdma_mean = d.mean;
        pt.gain_pct = j.mean > 0.0 ? 100.0 * (d.mean - j.mean) / j.mean : 0.0;
        pt.joint_se = j.standard_error;
        pt.tdma_se = d.standard_error;
        pt.trials = cfg.trials;
        r.points.push_back(pt);
    }
    return r;
}

// ---- CSV -------------------------------------------------------------------

inline constexpr const char* kSweepCsvHeader = "snr_db,joint_mean,tdma_mean,gain_pct,joint_se,tdma_se,trials";

inline std::string format_csv(const SweepResult& r) {
    std::string out = std::string(kSweepCsvHeader) + "\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.12g", x);
        out += buf;
        out += ',';
    };
    for (const auto& p : r.points) {
        num(p.snr_db);
        num(p.joint_mean);
        num(p.tdma_mean);
        num(p.gain_pct);
        num(p.joint_se);
        num(p.tdma_se);
        out += std::to_string(p.trials);
        out += '\n';
    }
    return out;
}

inline void write_csv(const SweepResult& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
    out << format_csv(r);
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

inline SweepResult parse_csv(std::istream& in, const std::string& source = "<stream>") {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line) || line != kSweepCsvHeader) {
        throw Error(ErrorKind::MalformedFile, source + ":1: unexpected header");
    }
    SweepResult r;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        double v[6];
        std::size_t trials = 0;
        bool ok = cells.size() == 7 && detail::parse_count(cells[6], trials);
        for (int i = 0; ok && i < 6; ++i) ok = detail::parse_double(cells[i], v[i]);
        if (!ok) throw Error(ErrorKind::MalformedFile, source + ":" + std::to_string(line_no) + ": bad row '" + line + "'");
        r.points.push_back({v[0], v[1], v[2], v[3], v[4], v[5], trials});
    }
    return r;
}

inline SweepResult load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
    return parse_csv(in, path);
}

}  // namespace marc
