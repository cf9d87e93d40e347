// marc: compare relaying schemes, run the Monte-Carlo sweep, verify the
// optimality results, and generate channel fixtures.
//
// Exit codes: 0 success, 1 usage error, 2 oracle violation, 3 I/O error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "marc/marc.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitViolation = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("MARC_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') return v;
        throw UsageError("MARC_SEED must be an unsigned integer");
    }
    return 1;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw UsageError(what + ": expected a non-negative integer, got '" + s + "'");
    }
    return std::stoull(s);
}

std::size_t parse_positive(const std::string& s, const std::string& what) {
    const auto v = parse_u64(s, what);
    if (v == 0) throw UsageError(what + " must be >= 1");
    return static_cast<std::size_t>(v);
}

double parse_real(const std::string& s, const std::string& what) {
    double v = 0.0;
    if (!marc::detail::parse_double(s, v)) throw UsageError(what + ": expected a number, got '" + s + "'");
    return v;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

struct Dims {
    std::size_t users = 0;
    std::size_t user_antennas = 0;
    std::size_t relay_antennas = 0;
};

Dims parse_dims(const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() != 3) throw UsageError("dims must be K,M,Mr, got '" + s + "'");
    return {parse_positive(parts[0], "K"), parse_positive(parts[1], "M"), parse_positive(parts[2], "Mr")};
}

std::vector<double> parse_powers(const std::string& s, std::size_t users) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) {
        const double v = parse_real(tok, "power");
        if (v < 0.0) throw UsageError("powers must be >= 0");
        out.push_back(v);
    }
    if (out.size() == 1 && users > 1) out.assign(users, out.front());
    if (out.size() != users) {
        throw UsageError("got " + std::to_string(out.size()) + " powers for " + std::to_string(users) + " users");
    }
    return out;
}

// ---- compare ----------------------------------------------------------------

struct CompareArgs {
    std::string channels;
    std::string random;
    std::string powers = "10";
    std::optional<double> relay_power;
    std::optional<double> relay_snr_db;
    std::string format = "human";
};

int run_compare(const CompareArgs& a) {
    if (a.channels.empty() == a.random.empty()) throw UsageError("give exactly one of --channels or --random");
    if (a.relay_power.has_value() == a.relay_snr_db.has_value()) {
        throw UsageError("give exactly one of --relay-power or --relay-snr-db");
    }

    marc::ChannelSet c;
    if (!a.channels.empty()) {
        c = marc::load_channels(a.channels);
    } else {
        const auto parts = split(a.random, ',');
        if (parts.size() != 4) throw UsageError("--random expects K,M,Mr,seed");
        c = marc::sample_rayleigh(parse_positive(parts[0], "K"), parse_positive(parts[1], "M"),
                                  parse_positive(parts[2], "Mr"), parse_u64(parts[3], "seed"));
    }
    const double relay = a.relay_power ? *a.relay_power : marc::relay_power_from_db(*a.relay_snr_db);
    if (!(relay >= 0.0)) throw UsageError("relay power must be >= 0");
    const marc::PowerBudget p{parse_powers(a.powers, c.users()), relay};

    const auto joint = marc::joint_sum_rate(c, p);
    const auto tdma = marc::tdma_sum_rate(c, p);
    const auto gains = marc::derive_gains(c);
    double weighted = 0.0;
    for (std::size_t k = 0; k < c.users(); ++k) weighted += gains.user_gain[k] * p.user_power[k];
    const double gain_pct = joint.sum_rate > 0.0 ? 100.0 * (tdma.sum_rate - joint.sum_rate) / joint.sum_rate : 0.0;

    if (a.format == "csv") {
        std::cout << "joint_rate,tdma_rate,lambda_max_rtilde,alpha_power_sum,gain_pct";
        for (std::size_t k = 0; k < c.users(); ++k) std::cout << ",tau_" << (k + 1);
        std::cout << '\n'
                  << fmt(joint.sum_rate) << ',' << fmt(tdma.sum_rate) << ',' << fmt(joint.lambda_max_r_tilde) << ','
                  << fmt(weighted) << ',' << fmt(gain_pct);
        for (double t : tdma.allocation.tau) std::cout << ',' << fmt(t);
        std::cout << '\n';
    } else {
        std::cout << "joint_rate        " << fmt(joint.sum_rate) << '\n'
                  << "tdma_rate         " << fmt(tdma.sum_rate) << '\n'
                  << "lambda_max_rtilde " << fmt(joint.lambda_max_r_tilde) << '\n'
                  << "alpha_power_sum   " << fmt(weighted) << '\n'
                  << "gain_pct          " << fmt(gain_pct) << '\n'
                  << "tau              ";
        for (double t : tdma.allocation.tau) std::cout << ' ' << fmt(t);
        std::cout << '\n';
    }
    return kExitOk;
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
    std::string config;
    std::size_t users = 8;
    std::size_t antennas = 4;
    std::size_t relay_antennas = 4;
    double power = 10.0;
    std::string snr_db;
    std::size_t trials = 1000;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 1;
    std::string out = "sweep.csv";
};

marc::SweepConfig load_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw marc::Error(marc::ErrorKind::IoError, "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config '" + path + "': " + e.what());
    }
    marc::SweepConfig cfg;
    try {
        cfg.users = j.value("K", cfg.users);
        cfg.relay_antennas = j.value("Mr", cfg.relay_antennas);
        if (j.contains("M") && j["M"].is_array()) {
            cfg.user_antennas = j["M"].get<std::vector<std::size_t>>();
        } else {
            cfg.user_antennas.assign(cfg.users, j.value("M", std::size_t{4}));
        }
        if (j.contains("P") && j["P"].is_array()) {
            cfg.user_power = j["P"].get<std::vector<double>>();
        } else {
            cfg.user_power.assign(cfg.users, j.value("P", 10.0));
        }
        if (j.contains("snr_db")) cfg.snr_db = j["snr_db"].get<std::vector<double>>();
        cfg.trials = j.value("trials", cfg.trials);
        cfg.master_seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : default_seed();
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config '" + path + "': " + e.what());
    }
    return cfg;
}

int run_sweep_cmd(const SweepArgs& a) {
    marc::SweepConfig cfg;
    if (!a.config.empty()) {
        cfg = load_sweep_config(a.config);
    } else {
        cfg.users = a.users;
        cfg.user_antennas.assign(a.users, a.antennas);
        cfg.relay_antennas = a.relay_antennas;
        cfg.user_power.assign(a.users, a.power);
        if (!a.snr_db.empty()) {
            cfg.snr_db.clear();
            for (const auto& tok : split(a.snr_db, ',')) cfg.snr_db.push_back(parse_real(tok, "snr"));
        }
        cfg.trials = a.trials;
        cfg.master_seed = a.seed ? *a.seed : default_seed();
    }
    try {
        cfg.validate();
    } catch (const marc::Error& e) {
        throw UsageError(e.what());
    }
    const auto result = marc::run_sweep(cfg, a.workers);
    marc::write_csv(result, a.out);
    if (!result.points.empty()) {
        const auto& last = result.points.back();
        std::cout << "wrote " << result.points.size() << " points to " << a.out << "; at " << fmt(last.snr_db)
                  << " dB joint=" << fmt(last.joint_mean) << " tdma=" << fmt(last.tdma_mean)
                  << " gain=" << fmt(last.gain_pct) << "%\n";
    } else {
        std::cout << "wrote header-only sweep to " << a.out << '\n';
    }
    return kExitOk;
}

// ---- verify -----------------------------------------------------------------

struct VerifyArgs {
    std::string suite = "all";
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 1;
    std::string dump_dir = "marc-violations";
};

void print_report(const std::string& name, const marc::OracleReport& r, bool show_strict = false) {
    std::cout << name << ": trials=" << r.trials << " violations=" << r.violations
              << " worst_gap=" << fmt(r.worst_gap);
    if (show_strict) std::cout << " strict=" << r.strict;
    std::cout << (r.passed() ? " PASS" : " FAIL") << '\n';
    for (const auto& d : r.details) std::cout << "  " << d << '\n';
}

int run_verify(const VerifyArgs& a) {
    const std::uint64_t seed = a.seed ? *a.seed : default_seed();
    const marc::OracleOptions opts{a.workers, a.dump_dir};
    const bool all = a.suite == "all";
    bool ok = true;

    if (all || a.suite == "lemmas") {
        const std::size_t n = a.trials.value_or(10000);
        for (std::size_t dim = 1; dim <= 6; ++dim) {
            const auto r = marc::check_lemma1(n, dim, marc::derive_seed(seed, 100 + dim), opts);
            print_report("lemma1 dim=" + std::to_string(dim), r);
            ok = ok && r.passed();
        }
        const std::pair<std::size_t, std::size_t> shapes[] = {{1, 1}, {3, 5}, {5, 3}, {4, 4}, {6, 6}, {2, 6}};
        for (auto [rows, cols] : shapes) {
            const auto r = marc::check_lemma2(n, rows, cols, marc::derive_seed(seed, 200 + rows * 10 + cols), opts);
            print_report("lemma2 A=" + std::to_string(rows) + "x" + std::to_string(cols), r);
            ok = ok && r.passed();
        }
    }
    if (all || a.suite == "theorem1") {
        const std::size_t n = a.trials.value_or(10000);
        marc::OracleReport total;
        total.worst_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < 20; ++i) {
            const auto c = marc::sample_rayleigh(2, 2, 2, marc::derive_seed(seed, 1000 + i));
            const auto p = marc::PowerBudget::uniform(2, 10.0, 10.0);
            const auto r = marc::random_feasible_joint_search(c, p, n, marc::derive_seed(seed, 2000 + i), opts);
            total.trials += r.trials;
            total.violations += r.violations;
            total.worst_gap = std::min(total.worst_gap, r.worst_gap);
            total.details.insert(total.details.end(), r.details.begin(), r.details.end());
        }
        print_report("theorem1", total);
        ok = ok && total.passed();
    }
    if (all || a.suite == "theorem2") {
        marc::OracleReport total;
        total.worst_gap = std::numeric_limits<double>::infinity();
        double worst_kkt = 0.0;
        for (std::size_t i = 0; i < 20; ++i) {
            const std::size_t users = 2 + i % 2;
            const auto c = marc::sample_rayleigh(users, 4, 4, marc::derive_seed(seed, 3000 + i));
            const auto p = marc::PowerBudget::uniform(users, 10.0, 10.0);
            const auto g = marc::tau_grid_search(c, p, 200, opts);
            total.trials += g.report.trials;
            total.violations += g.report.violations;
            total.worst_gap = std::min(total.worst_gap, g.report.worst_gap);
            total.details.insert(total.details.end(), g.report.details.begin(), g.report.details.end());
            const double kkt = marc::kkt_residual(c, p, marc::optimal_time_slots(c, p), 1e-6);
            worst_kkt = std::max(worst_kkt, kkt);
            if (kkt >= 1e-5) {
                ++total.violations;
                total.details.push_back("instance " + std::to_string(i) + ": KKT residual " + fmt(kkt));
                marc::dump_violation(c, p, opts, "theorem2_kkt_" + std::to_string(i), "KKT residual " + fmt(kkt));
            }
        }
        print_report("theorem2", total);
        std::cout << "theorem2 worst_kkt_residual=" << fmt(worst_kkt) << '\n';
        ok = ok && total.passed();
    }
    if (all || a.suite == "theorem3") {
        const std::size_t n = a.trials.value_or(1000);
        const auto r = marc::check_theorem3(n, {{2, 4, 8}, 4, 4}, 10.0, 100.0, seed, opts);
        print_report("theorem3", r, true);
        ok = ok && r.passed();

        const auto witness = marc::make_shared_direction_instance(4, 4, seed);
        const auto p = marc::PowerBudget::uniform(4, 10.0, 100.0);
        const double gap = marc::tdma_sum_rate(witness, p).sum_rate - marc::joint_sum_rate(witness, p).sum_rate;
        const bool equal = std::abs(gap) < 1e-9;
        std::cout << "theorem3 witness: gap=" << fmt(gap) << (equal ? " equality PASS" : " FAIL") << '\n';
        if (!equal) {
            marc::dump_violation(witness, p, opts, "theorem3_witness", "equality witness gap " + fmt(gap));
            ok = false;
        }
    }
    if (!ok) {
        std::cout << "violations found; instances dumped under " << a.dump_dir << '\n';
        return kExitViolation;
    }
    return kExitOk;
}

// ---- gen-channels -------------------------------------------------------------

struct GenArgs {
    std::string dims;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int run_gen(const GenArgs& a) {
    const Dims d = parse_dims(a.dims);
    const std::uint64_t seed = a.seed ? *a.seed : default_seed();
    const auto c = marc::sample_rayleigh(d.users, d.user_antennas, d.relay_antennas, seed);
    marc::save_channels(c, a.out);
    std::cout << "wrote K=" << d.users << " M=" << d.user_antennas << " Mr=" << d.relay_antennas << " seed=" << seed
              << " to " << a.out << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sum rates of joint and TDMA amplify-and-forward relaying in the multiple-access relay channel"};
    app.require_subcommand(1);

    CompareArgs compare;
    auto* cmp = app.add_subcommand("compare", "Evaluate both schemes on one channel instance");
    cmp->add_option("--channels", compare.channels, "Channel file");
    cmp->add_option("--random", compare.random, "Random instance K,M,Mr,seed");
    cmp->add_option("--powers", compare.powers, "Per-user powers p1,...,pK (one value is broadcast)");
    cmp->add_option("--relay-power", compare.relay_power, "Relay power (linear)");
    cmp->add_option("--relay-snr-db", compare.relay_snr_db, "Relay SNR in dB");
    cmp->add_option("--format", compare.format, "Output format")->check(CLI::IsMember({"human", "csv"}));

    SweepArgs sweep;
    auto* swp = app.add_subcommand("sweep", "Monte-Carlo relay-SNR sweep, written as CSV");
    swp->add_option("--config", sweep.config, "JSON config {K, M, Mr, P, snr_db, trials, seed}");
    swp->add_option("--users", sweep.users, "Number of users K");
    swp->add_option("--antennas", sweep.antennas, "Antennas per user");
    swp->add_option("--relay-antennas", sweep.relay_antennas, "Relay antennas");
    swp->add_option("--power", sweep.power, "Per-user transmit power");
    swp->add_option("--snr-db", sweep.snr_db, "Comma-separated relay SNR points in dB (default 0,2,...,30)");
    swp->add_option("--trials", sweep.trials, "Channel realizations");
    swp->add_option("--seed", sweep.seed, "Master seed (default: MARC_SEED or 1)");
    swp->add_option("--workers", sweep.workers, "Worker threads")->check(CLI::PositiveNumber);
    swp->add_option("--out", sweep.out, "CSV output path");

    VerifyArgs verify;
    auto* ver = app.add_subcommand("verify", "Run the randomized optimality and ordering checks");
    ver->add_option("--suite", verify.suite, "Suite to run")
        ->check(CLI::IsMember({"lemmas", "theorem1", "theorem2", "theorem3", "all"}));
    ver->add_option("--trials", verify.trials, "Trials per check (overrides suite defaults)");
    ver->add_option("--seed", verify.seed, "Seed (default: MARC_SEED or 1)");
    ver->add_option("--workers", verify.workers, "Worker threads")->check(CLI::PositiveNumber);
    ver->add_option("--dump-dir", verify.dump_dir, "Directory for violating instances");

    GenArgs gen;
    auto* gch = app.add_subcommand("gen-channels", "Write a seeded Rayleigh channel fixture");
    gch->add_option("--dims", gen.dims, "K,M,Mr")->required();
    gch->add_option("--seed", gen.seed, "Seed (default: MARC_SEED or 1)");
    gch->add_option("--out", gen.out, "Output channel file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (cmp->parsed()) return run_compare(compare);
        if (swp->parsed()) return run_sweep_cmd(sweep);
        if (ver->parsed()) return run_verify(verify);
        if (gch->parsed()) return run_gen(gen);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const marc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
            case marc::ErrorKind::IoError: return kExitIo;
            case marc::ErrorKind::MalformedFile: return kExitIo;
            default: return kExitUsage;
        }
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}
