#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "marc/error.hpp"
#include "marc/matrix_core.hpp"
#include "marc/random.hpp"

namespace marc {

/// One realization of the multiple-access relay channel: K transmitter->relay
/// matrices H_r^(k) (Mr x M^(k)) and the relay->receiver vector h (received
/// signal uses h^H).
struct ChannelSet {
    std::size_t relay_antennas = 0;
    std::vector<std::size_t> user_antennas;
    std::vector<ComplexMatrix> to_relay;
    CVector to_receiver;

    std::size_t users() const noexcept { return to_relay.size(); }

    void validate() const {
        if (to_relay.empty()) throw Error(ErrorKind::InvalidDimensions, "channel set needs at least one user");
        if (relay_antennas == 0) throw Error(ErrorKind::InvalidDimensions, "relay needs at least one antenna");
        if (user_antennas.size() != to_relay.size()) {
            throw Error(ErrorKind::InvalidDimensions, "antenna list length differs from user count");
        }
        for (std::size_t k = 0; k < to_relay.size(); ++k) {
            const auto& h = to_relay[k];
            if (user_antennas[k] == 0) throw Error(ErrorKind::InvalidDimensions, "user antenna count must be >= 1");
            if (h.rows() != relay_antennas || h.cols() != user_antennas[k]) {
                throw Error(ErrorKind::ShapeMismatch, "user " + std::to_string(k) + " channel is " + h.shape());
            }
            require_finite(h);
        }
        if (to_receiver.size() != relay_antennas) {
            throw Error(ErrorKind::ShapeMismatch, "receiver channel length differs from relay antennas");
        }
        for (const auto& z : to_receiver) {
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                throw Error(ErrorKind::NotFinite, "receiver channel has non-finite entries");
            }
        }
    }

    friend bool operator==(const ChannelSet&, const ChannelSet&) = default;
};

struct PowerBudget {
    std::vector<double> user_power;  // P^(k), average transmit power per user
    double relay_power = 0.0;        // P_r

    void validate(std::size_t users) const {
        if (user_power.size() != users) {
            throw Error(ErrorKind::ShapeMismatch, "power list has " + std::to_string(user_power.size()) +
                                                      " entries for " + std::to_string(users) + " users");
        }
        for (double p : user_power) {
            if (!std::isfinite(p) || p < 0.0) throw Error(ErrorKind::InvalidArgument, "user power must be finite and >= 0");
        }
        if (!std::isfinite(relay_power) || relay_power < 0.0) {
            throw Error(ErrorKind::InvalidArgument, "relay power must be finite and >= 0");
        }
    }

    static PowerBudget uniform(std::size_t users, double user_power, double relay_power) {
        return {std::vector<double>(users, user_power), relay_power};
    }
};

struct DerivedGains {
    double receiver_gain = 0.0;       // ||h||^2
    std::vector<double> user_gain;    // largest eigenvalue of H_r^(k) H_r^(k)^H
};

inline ChannelSet sample_rayleigh(std::size_t users, const std::vector<std::size_t>& user_antennas,
                                  std::size_t relay_antennas, std::uint64_t seed) {
    if (users == 0 || relay_antennas == 0 || user_antennas.size() != users) {
        throw Error(ErrorKind::InvalidDimensions, "need K >= 1, Mr >= 1 and one antenna count per user");
    }
    for (auto m : user_antennas)
        if (m == 0) throw Error(ErrorKind::InvalidDimensions, "user antenna count must be >= 1");

    // Draw order: H^(1) row-major, ..., H^(K), then h.
    RandomSource rng(seed);
    ChannelSet c;
    c.relay_antennas = relay_antennas;
    c.user_antennas = user_antennas;
    for (std::size_t k = 0; k < users; ++k) {
        ComplexMatrix h(relay_antennas, user_antennas[k]);
        for (std::size_t i = 0; i < relay_antennas; ++i)
            for (std::size_t j = 0; j < user_antennas[k]; ++j) h(i, j) = rng.complex_gaussian();
        c.to_relay.push_back(std::move(h));
    }
    c.to_receiver.resize(relay_antennas);
    for (auto& z : c.to_receiver) z = rng.complex_gaussian();
    return c;
}

inline ChannelSet sample_rayleigh(std::size_t users, std::size_t user_antennas, std::size_t relay_antennas,
                                  std::uint64_t seed) {
    return sample_rayleigh(users, std::vector<std::size_t>(users, user_antennas), relay_antennas, seed);
}

inline DerivedGains derive_gains(const ChannelSet& c) {
    c.validate();
    DerivedGains g;
    const double n = norm(c.to_receiver);
    g.receiver_gain = n * n;
    g.user_gain.reserve(c.users());
    for (const auto& h : c.to_relay) g.user_gain.push_back(eig_max(gram(h)).lambda);
    return g;
}

// ---- channel file format --------------------------------------------------
//
//   MARC v1 K=<k> Mr=<mr> M=<m1,...,mk>
//   <re> <im>          Mr*M^(k) lines per user, row-major
//   <re> <im>          Mr lines for h
//
// Lines starting with '#' and blank lines are ignored by the loader.

namespace detail {

inline std::string format_exact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline bool parse_double(const std::string& token, double& out) {
    if (token.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(token.c_str(), &end);
    return errno == 0 && end == token.c_str() + token.size() && std::isfinite(out);
}

inline bool parse_count(const std::string& token, std::size_t& out) {
    if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) return false;
    errno = 0;
    const unsigned long long v = std::strtoull(token.c_str(), nullptr, 10);
    if (errno != 0) return false;
    out = static_cast<std::size_t>(v);
    return true;
}

}  // namespace detail

inline std::string format_channels(const ChannelSet& c, const std::vector<std::string>& comments = {}) {
    c.validate();
    std::ostringstream os;
    for (const auto& line : comments) os << "# " << line << '\n';
    os << "MARC v1 K=" << c.users() << " Mr=" << c.relay_antennas << " M=";
    for (std::size_t k = 0; k < c.users(); ++k) os << (k ? "," : "") << c.user_antennas[k];
    os << '\n';
    auto put = [&os](const cplx& z) { os << detail::format_exact(z.real()) << ' ' << detail::format_exact(z.imag()) << '\n'; };
    for (const auto& h : c.to_relay)
        for (const auto& z : h.entries()) put(z);
    for (const auto& z : c.to_receiver) put(z);
    return os.str();
}

inline void save_channels(const ChannelSet& c, const std::string& path, const std::vector<std::string>& comments = {}) {
    const std::string text = format_channels(c, comments);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

inline ChannelSet parse_channels(std::istream& in, const std::string& source = "<stream>") {
    std::size_t line_no = 0;
    std::string line;
    auto malformed = [&](const std::string& why) {
        return Error(ErrorKind::MalformedFile, source + ":" + std::to_string(line_no) + ": " + why);
    };
    auto next_content_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto first = line.find_first_not_of(" \t");
            if (first == std::string::npos || line[first] == '#') continue;
            return true;
        }
        return false;
    };

    if (!next_content_line()) throw malformed("missing header");
    std::istringstream header(line);
    std::string magic, version, k_field, mr_field, m_field, extra;
    header >> magic >> version >> k_field >> mr_field >> m_field;
    if (magic != "MARC" || version != "v1") throw malformed("expected 'MARC v1' header");
    if (header >> extra) throw malformed("trailing header field '" + extra + "'");

    std::size_t users = 0, relay = 0;
    if (k_field.rfind("K=", 0) != 0 || !detail::parse_count(k_field.substr(2), users) || users == 0) {
        throw malformed("bad K field '" + k_field + "'");
    }
    if (mr_field.rfind("Mr=", 0) != 0 || !detail::parse_count(mr_field.substr(3), relay) || relay == 0) {
        throw malformed("bad Mr field '" + mr_field + "'");
    }
    if (m_field.rfind("M=", 0) != 0) throw malformed("bad M field '" + m_field + "'");
    std::vector<std::size_t> antennas;
    {
        std::istringstream ms(m_field.substr(2));
        std::string tok;
        while (std::getline(ms, tok, ',')) {
            std::size_t m = 0;
            if (!detail::parse_count(tok, m) || m == 0) throw malformed("bad antenna count '" + tok + "'");
            antennas.push_back(m);
        }
    }
    if (antennas.size() != users) {
        throw malformed("declared K=" + std::to_string(users) + " but M lists " + std::to_string(antennas.size()) +
                        " users");
    }

    auto read_entry = [&]() -> cplx {
        if (!next_content_line()) throw malformed("unexpected end of file");
        std::istringstream ls(line);
        std::string re_tok, im_tok, more;
        ls >> re_tok >> im_tok;
        double re = 0.0, im = 0.0;
        if (!detail::parse_double(re_tok, re) || !detail::parse_double(im_tok, im) || (ls >> more)) {
            throw malformed("expected '<re> <im>', got '" + line + "'");
        }
        return {re, im};
    };

    ChannelSet c;
    c.relay_antennas = relay;
    c.user_antennas = antennas;
    for (std::size_t k = 0; k < users; ++k) {
        ComplexMatrix h(relay, antennas[k]);
        for (std::size_t i = 0; i < relay; ++i)
            for (std::size_t j = 0; j < antennas[k]; ++j) h(i, j) = read_entry();
        c.to_relay.push_back(std::move(h));
    }
    c.to_receiver.resize(relay);
    for (auto& z : c.to_receiver) z = read_entry();
    if (next_content_line()) throw malformed("trailing data '" + line + "'");
    c.validate();
    return c;
}

inline ChannelSet load_channels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
    return parse_channels(in, path);
}

}  // namespace marc
