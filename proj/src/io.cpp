#include "gkpsim/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gkpsim {

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const CsvRow& header, const std::vector<CsvRow>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_csv: cannot open " + path);
    auto emit = [&](const CsvRow& row) {
        for (size_t k = 0; k < row.size(); ++k) {
            if (k) f << ',';
            f << row[k];
        }
        f << '\n';
    };
    emit(header);
    for (const CsvRow& row : rows) emit(row);
}

// --- SHA-256 (FIPS 180-4) -----------------------------------------------------

namespace {

struct Sha256 {
    uint32_t h[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                     0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
    uint8_t buf[64];
    uint64_t total = 0;
    size_t fill = 0;

    static uint32_t rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void block(const uint8_t* p) {
        static const uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
            0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
            0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
            0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
            0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
            0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
            0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
            0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
            0xc67178f2};
        uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (uint32_t(p[4 * i]) << 24) | (uint32_t(p[4 * i + 1]) << 16) |
                   (uint32_t(p[4 * i + 2]) << 8) | p[4 * i + 3];
        for (int i = 16; i < 64; ++i) {
            const uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int i = 0; i < 64; ++i) {
            const uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const uint32_t ch = (e & f) ^ (~e & g);
            const uint32_t t1 = hh + s1 + ch + k[i] + w[i];
            const uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const uint32_t t2 = s0 + maj;
            hh = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d;
        h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
    }

    void update(const uint8_t* p, size_t n) {
        total += n;
        while (n > 0) {
            const size_t take = std::min(n, sizeof(buf) - fill);
            std::memcpy(buf + fill, p, take);
            fill += take;
            p += take;
            n -= take;
            if (fill == sizeof(buf)) {
                block(buf);
                fill = 0;
            }
        }
    }

    std::string hex() {
        const uint64_t bits = total * 8;
        const uint8_t one = 0x80;
        update(&one, 1);
        const uint8_t zero = 0;
        while (fill != 56) update(&zero, 1);
        uint8_t len[8];
        for (int i = 0; i < 8; ++i) len[i] = uint8_t(bits >> (56 - 8 * i));
        update(len, 8);
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (uint32_t v : h)
            for (int i = 28; i >= 0; i -= 4) out += digits[(v >> i) & 0xf];
        return out;
    }
};

}  // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("sha256_file: cannot open " + path);
    Sha256 sha;
    char chunk[65536];
    while (f) {
        f.read(chunk, sizeof(chunk));
        sha.update(reinterpret_cast<const uint8_t*>(chunk), size_t(f.gcount()));
    }
    return sha.hex();
}

void export_codewords_csv(const std::string& path, const GkpCode& code) {
    CsvRow header{"fock_index"};
    for (int k = 0; k < code.d; ++k) {
        header.push_back("re_z" + std::to_string(k));
        header.push_back("im_z" + std::to_string(k));
    }
    std::vector<CsvRow> rows;
    for (int n = 0; n < code.space.cavity_dim; ++n) {
        CsvRow row{std::to_string(n)};
        for (int k = 0; k < code.d; ++k) {
            row.push_back(format_double(code.codewords[k](n).real()));
            row.push_back(format_double(code.codewords[k](n).imag()));
        }
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

void export_grid_csv(const std::string& path, const PhaseSpaceGrid& grid) {
    const char* name = grid.kind == PhaseSpaceGrid::Kind::Wigner
                           ? "wigner"
                           : (grid.kind == PhaseSpaceGrid::Kind::CfReal ? "cf_real" : "cf_imag");
    std::vector<CsvRow> rows;
    for (size_t i = 0; i < grid.re_axis.size(); ++i)
        for (size_t j = 0; j < grid.im_axis.size(); ++j)
            rows.push_back({format_double(grid.re_axis[i]), format_double(grid.im_axis[j]),
                            format_double(grid.values(i, j))});
    write_csv(path, {"re", "im", name}, rows);
}

void export_lifetime_csv(const std::string& path, const std::vector<LifetimeCurve>& curves) {
    std::vector<CsvRow> rows;
    for (const LifetimeCurve& c : curves)
        for (size_t k = 0; k < c.rounds.size(); ++k)
            rows.push_back({c.basis_label, std::to_string(c.rounds[k]),
                            format_double(c.t_us[k]), format_double(c.survival[k])});
    write_csv(path, {"state", "rounds", "t_us", "survival"}, rows);
}

void export_budget_csv(const std::string& path, const std::vector<ErrorBudgetEntry>& entries) {
    std::vector<CsvRow> rows;
    for (const ErrorBudgetEntry& e : entries) {
        CsvRow row{e.error_type, format_double(e.gamma_total),
                   format_double(e.gamma_total > 0 ? 1.0 / e.gamma_total : 0.0),
                   format_double(e.percent_share)};
        for (double g : e.gamma) row.push_back(format_double(g));
        rows.push_back(std::move(row));
    }
    CsvRow header{"error_type", "gamma_per_us", "lifetime_us", "percent_share"};
    size_t most = 0;
    for (const ErrorBudgetEntry& e : entries) most = std::max(most, e.gamma.size());
    for (size_t k = 0; k < most; ++k) header.push_back("gamma_basis" + std::to_string(k));
    write_csv(path, header, rows);
}

void export_sweep_csv(const std::string& path, const std::vector<FidelitySweepRow>& rows_in) {
    std::vector<CsvRow> rows;
    for (const FidelitySweepRow& r : rows_in)
        rows.push_back({format_double(r.delta), r.basis_label, format_double(r.fidelity)});
    write_csv(path, {"delta", "basis", "fidelity"}, rows);
}

void save_circuit_json(const std::string& path, const EcdCircuitParams& params, double fidelity) {
    nlohmann::json j;
    j["depth"] = params.depth;
    j["fidelity"] = fidelity;
    for (int k = 0; k < params.depth; ++k) {
        j["beta_re"].push_back(params.beta[k].real());
        j["beta_im"].push_back(params.beta[k].imag());
        j["phi"].push_back(params.phi[k]);
        j["theta"].push_back(params.theta[k]);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_circuit_json: cannot open " + path);
    f << j.dump(2) << '\n';
}

EcdCircuitParams load_circuit_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_circuit_json: cannot open " + path);
    nlohmann::json j;
    f >> j;
    EcdCircuitParams p;
    p.depth = j.at("depth").get<int>();
    for (int k = 0; k < p.depth; ++k) {
        p.beta.emplace_back(j.at("beta_re").at(k).get<double>(),
                            j.at("beta_im").at(k).get<double>());
        p.phi.push_back(j.at("phi").at(k).get<double>());
        p.theta.push_back(j.at("theta").at(k).get<double>());
    }
    return p;
}

std::string schedule_to_json(const CircuitSchedule& schedule) {
    nlohmann::json steps = nlohmann::json::array();
    for (const CircuitStep& s : schedule.steps) {
        nlohmann::json step;
        switch (s.kind) {
            case CircuitStep::Kind::Ecd:
                step["op"] = "ecd";
                step["beta_re"] = s.beta.real();
                step["beta_im"] = s.beta.imag();
                break;
            case CircuitStep::Kind::Rotate:
                step["op"] = "rotate";
                step["phi"] = s.phi;
                step["theta"] = s.theta;
                break;
            case CircuitStep::Kind::ZPhase:
                step["op"] = "zphase";
                step["theta"] = s.theta;
                break;
            case CircuitStep::Kind::Displace:
                step["op"] = "displace";
                step["beta_re"] = s.beta.real();
                step["beta_im"] = s.beta.imag();
                break;
            case CircuitStep::Kind::Frame:
                step["op"] = "frame";
                step["phi"] = s.phi;
                break;
            case CircuitStep::Kind::Measure:
                step["op"] = "measure";
                step["tag"] = s.tag;
                break;
            case CircuitStep::Kind::Reset:
                step["op"] = "reset";
                break;
        }
        steps.push_back(std::move(step));
    }
    nlohmann::json j;
    j["cavity_dim"] = schedule.space.cavity_dim;
    j["steps"] = std::move(steps);
    return j.dump(2);
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::map<std::string, std::string>& config, double wall_seconds) {
    nlohmann::json j;
    j["command"] = command;
    j["wall_seconds"] = wall_seconds;
    for (const auto& [key, value] : config) j["config"][key] = value;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_manifest: cannot open " + path);
    f << j.dump(2) << '\n';
}

}  // namespace gkpsim
