// layerq command-line driver. Links only the C API.

#include "layerq/layerq.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kNotCertified = 1, kUsage = 2, kConsistency = 3 };

// Published reference values written next to computed ones.
constexpr double kPublishedFidelity = 0.854;
constexpr double kPublishedFidelityStd = 0.007;
constexpr double kPublishedBound = 0.75;

struct Failure : std::runtime_error {
    int code;
    Failure(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

void check(layerq_status s, const std::string& context) {
    if (s == LAYERQ_OK) return;
    const int code = (s == LAYERQ_ERR_CONSISTENCY || s == LAYERQ_ERR_INTERNAL) ? kConsistency : kUsage;
    throw Failure(code, context + ": " + layerq_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using State = std::unique_ptr<layerq_state, Deleter<layerq_state, layerq_state_free>>;
using Density = std::unique_ptr<layerq_density, Deleter<layerq_density, layerq_density_free>>;
using Counts = std::unique_ptr<layerq_counts, Deleter<layerq_counts, layerq_counts_free>>;
using Estimates = std::unique_ptr<layerq_estimates, Deleter<layerq_estimates, layerq_estimates_free>>;
using Qkd = std::unique_ptr<layerq_qkd, Deleter<layerq_qkd, layerq_qkd_free>>;

struct RunConfig {
    std::uint64_t seed = 1;
    double visibility = 0.8493;
    double rate = 0.66;
    double integration_time = 1800.0;
    std::size_t trials = 1000;
    std::size_t rounds = 100000;
    std::string out = "out";
    bool timestamp = true;
};

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> visibility, rate, time;
    std::optional<std::size_t> trials, rounds;
    std::optional<std::string> out;
    bool no_timestamp = false;
};

RunConfig resolve(const Flags& f) {
    RunConfig c;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw Failure(kUsage, "cannot open config " + f.config);
        json j;
        try {
            in >> j;
            c.seed = j.value("seed", c.seed);
            c.visibility = j.value("visibility", c.visibility);
            c.rate = j.value("rate", c.rate);
            c.integration_time = j.value("integration_time", c.integration_time);
            c.trials = j.value("monte_carlo_trials", c.trials);
            c.rounds = j.value("rounds", c.rounds);
            c.out = j.value("out", c.out);
            c.timestamp = j.value("timestamp", c.timestamp);
        } catch (const json::exception& e) {
            throw Failure(kUsage, "config " + f.config + ": " + e.what());
        }
    }
    if (f.seed) c.seed = *f.seed;
    if (f.visibility) c.visibility = *f.visibility;
    if (f.rate) c.rate = *f.rate;
    if (f.time) c.integration_time = *f.time;
    if (f.trials) c.trials = *f.trials;
    if (f.rounds) c.rounds = *f.rounds;
    if (f.out) c.out = *f.out;
    if (f.no_timestamp) c.timestamp = false;
    if (!(c.visibility >= 0.0 && c.visibility <= 1.0)) throw Failure(kUsage, "visibility must lie in [0, 1]");
    if (c.trials < 100)
        std::cerr << "warning: " << c.trials << " Monte Carlo trials; error bars need at least 100\n";
    return c;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

layerq_metadata metadata(const RunConfig& c) { return {1, c.seed, c.timestamp ? 1 : 0}; }

json header(const RunConfig& c, const std::string& command) {
    json j = {{"command", command}, {"seed", c.seed}, {"layerq_version", layerq_version()}};
    if (c.timestamp) j["timestamp"] = utc_now();
    return j;
}

fs::path output(const RunConfig& c, const std::string& name) { return fs::path(c.out) / name; }

void write_file(const fs::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure(kUsage, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Failure(kUsage, "failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

State target() {
    layerq_state* s = nullptr;
    check(layerq_state_psi442(&s), "target state");
    return State(s);
}

Density noisy(const layerq_state* psi, double visibility) {
    layerq_density* d = nullptr;
    check(layerq_density_white_noise(psi, visibility, &d), "noisy state");
    return Density(d);
}

// Counts from --counts, else simulated from the config.
Counts counts_from(const RunConfig& c, const std::string& counts_path) {
    layerq_counts* raw = nullptr;
    if (!counts_path.empty()) {
        check(layerq_counts_load(counts_path.c_str(), &raw), "loading counts");
    } else {
        const auto psi = target();
        const auto rho = noisy(psi.get(), c.visibility);
        check(layerq_counts_simulate(rho.get(), c.rate, c.integration_time, c.seed, &raw), "simulating counts");
    }
    return Counts(raw);
}

Estimates estimates_from(const RunConfig& c, const std::string& counts_path, const std::string& fixture) {
    layerq_estimates* raw = nullptr;
    if (!fixture.empty()) {
        check(layerq_estimates_load_fixture(fixture.c_str(), &raw), "loading element fixture");
    } else {
        const auto counts = counts_from(c, counts_path);
        check(layerq_estimates_from_counts(counts.get(), c.trials, c.seed, &raw), "estimating elements");
    }
    return Estimates(raw);
}

json source_info(const RunConfig& c, const std::string& counts_path, const std::string& fixture) {
    if (!fixture.empty()) return {{"mode", "fixture"}, {"path", fixture}};
    if (!counts_path.empty()) return {{"mode", "counts"}, {"path", counts_path}, {"trials", c.trials}};
    return {{"mode", "simulation"}, {"visibility", c.visibility}, {"rate", c.rate},
            {"integration_time", c.integration_time}, {"trials", c.trials}};
}

std::string number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

// ---- commands

int cmd_gen_state(const RunConfig& c) {
    const auto closed = target();
    layerq_state* raw = nullptr;
    double p = 0.0;
    check(layerq_state_from_circuit(&raw, &p), "circuit");
    const State circuit(raw);
    double dist = 0.0;
    check(layerq_state_distance(closed.get(), circuit.get(), &dist), "comparing states");

    int dims[8];
    std::size_t parties = 0;
    check(layerq_state_dims(closed.get(), dims, 8, &parties), "dims");
    int ranks[8];
    check(layerq_state_rank_vector(circuit.get(), 0.0, ranks, 8, &parties), "rank vector");
    std::vector<double> re(64), im(64);
    std::size_t n = 0;
    check(layerq_state_amplitudes(circuit.get(), re.data(), im.data(), re.size(), &n), "amplitudes");

    json amps = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        if (std::hypot(re[i], im[i]) < 1e-12) continue;
        std::string ket;
        std::size_t rest = i;
        for (std::size_t p = parties; p-- > 0;) {
            ket.insert(ket.begin(), static_cast<char>('0' + rest % dims[p]));
            rest /= dims[p];
        }
        amps.push_back({{"index", i}, {"ket", ket}, {"re", re[i]}, {"im", im[i]}});
    }
    const auto rho = noisy(closed.get(), c.visibility);
    double f = 0.0;
    check(layerq_density_fidelity(rho.get(), closed.get(), &f), "fidelity");

    json j = header(c, "gen-state");
    j["dims"] = std::vector<int>(dims, dims + parties);
    j["amplitudes"] = amps;
    j["rank_vector"] = std::vector<int>(ranks, ranks + parties);
    j["circuit"] = {{"success_probability", p}, {"distance_to_closed_form", dist}};
    j["visibility"] = c.visibility;
    j["fidelity"] = f;
    j["reference"] = {{"rank_vector", {4, 4, 2}}, {"success_probability_per_stage", 0.5}};
    write_json(output(c, "state.json"), j);

    std::cout << "rank vector (" << ranks[0] << "," << ranks[1] << "," << ranks[2] << "), circuit distance " << dist
              << ", success probability " << p << ", fidelity " << f << "\n";
    if (!(dist < 1e-12)) {
        std::cerr << "error: circuit output differs from the closed form (distance " << dist << ")\n";
        return kConsistency;
    }
    return kOk;
}

int cmd_simulate_counts(const RunConfig& c) {
    const auto counts = counts_from(c, "");
    const auto path = output(c, "counts.json");
    const auto meta = metadata(c);
    check(layerq_counts_save(counts.get(), path.string().c_str(), &meta), "writing counts");
    std::cout << "wrote " << layerq_counts_size(counts.get()) << " count records to " << path.string() << "\n";
    return kOk;
}

int cmd_estimate(const RunConfig& c, const std::string& counts_path) {
    const auto est = estimates_from(c, counts_path, "");
    const auto path = output(c, "estimates.csv");
    const auto meta = metadata(c);
    check(layerq_estimates_save_csv(est.get(), path.string().c_str(), &meta), "writing estimates");
    double f = 0.0, sd = 0.0;
    check(layerq_estimates_fidelity(est.get(), &f, &sd), "fidelity");
    layerq_estimates_info info{};
    check(layerq_estimates_info_get(est.get(), &info), "info");
    std::cout << "F = " << f << " +- " << sd << " (" << info.trials << " trials) -> " << path.string() << "\n";
    if (info.degenerate) std::cerr << "warning: fewer than 100 trials, error bars are degenerate\n";
    if (info.low_statistics_settings)
        std::cerr << "warning: " << info.low_statistics_settings << " settings have fewer than 50 counts\n";
    return kOk;
}

int cmd_witness(const RunConfig& c, const std::string& counts_path, const std::string& fixture) {
    const auto est = estimates_from(c, counts_path, fixture);
    json elements = json::array();
    for (std::size_t i = 0; i < layerq_estimates_size(est.get()); ++i) {
        layerq_element e{};
        check(layerq_estimates_element(est.get(), i, &e), "element");
        elements.push_back({{"bra", e.bra}, {"ket", e.ket}, {"value", e.value}, {"std_dev", e.std_dev},
                            {"low_statistics", e.low_statistics != 0}});
    }
    double f = 0.0, sd = 0.0;
    check(layerq_estimates_fidelity(est.get(), &f, &sd), "fidelity");
    const auto psi = target();
    const int cls[3] = {4, 3, 2};
    double bound = 0.0;
    check(layerq_state_fmax(psi.get(), cls, 3, &bound), "class bound");

    json j = header(c, "witness");
    j["source"] = source_info(c, counts_path, fixture);
    j["elements"] = elements;
    j["fidelity"] = {{"value", f}, {"std_dev", sd}};
    j["bound"] = bound;
    j["rank_class"] = {4, 3, 2};
    bool certified = false;
    if (sd > 0.0) {
        layerq_certification cert{};
        check(layerq_certify(f, sd, bound, &cert), "certification");
        j["sigma_margin"] = cert.sigma_margin;
        certified = cert.certified != 0;
    } else {
        j["sigma_margin"] = nullptr;
        certified = f > bound;
    }
    j["certified"] = certified;
    j["reference"] = {{"fidelity", kPublishedFidelity},
                      {"std_dev", kPublishedFidelityStd},
                      {"bound", kPublishedBound},
                      {"sigma_margin", (kPublishedFidelity - kPublishedBound) / kPublishedFidelityStd}};
    write_json(output(c, "witness.json"), j);

    std::cout << "F = " << f << " +- " << sd << ", bound " << bound;
    if (!j["sigma_margin"].is_null()) std::cout << ", margin " << j["sigma_margin"].get<double>() << " sigma";
    std::cout << (certified ? ", certified" : ", not certified") << "\n";
    return certified ? kOk : kNotCertified;
}

std::vector<std::pair<std::string, std::string>> parse_pairs(const std::string& kets) {
    std::vector<std::pair<std::string, std::string>> out;
    if (kets.empty()) {
        out = {{"000", "111"}, {"000", "220"}, {"000", "331"}, {"111", "220"}, {"111", "331"}, {"220", "331"}};
        return out;
    }
    std::stringstream ss(kets);
    std::string pair;
    while (std::getline(ss, pair, ';')) {
        const auto comma = pair.find(',');
        if (comma == std::string::npos) throw Failure(kUsage, "--kets expects KET,KET pairs separated by ';'");
        out.push_back({pair.substr(0, comma), pair.substr(comma + 1)});
    }
    return out;
}

int cmd_subspace(const RunConfig& c, const std::string& counts_path, const std::string& fixture,
                 const std::string& kets, const std::string& published_path) {
    const auto pairs = parse_pairs(kets);
    const auto est = estimates_from(c, counts_path, fixture);

    json published = json::array();
    if (!published_path.empty()) {
        std::ifstream in(published_path);
        if (!in) throw Failure(kUsage, "cannot open " + published_path);
        try {
            published = json::parse(in).at("subspaces");
        } catch (const json::exception& e) {
            throw Failure(kUsage, published_path + ": " + e.what());
        }
    }

    json rows = json::array();
    std::string csv = "ket_a,ket_b,fidelity,std_dev,witness_expectation,gme,published_fidelity,published_std_dev\n";
    bool all_witnessed = true;
    for (const auto& [a, b] : pairs) {
        double f = 0.0, sd = 0.0;
        check(layerq_estimates_subspace(est.get(), a.c_str(), b.c_str(), &f, &sd), "subspace " + a + "/" + b);
        layerq_ghz_witness w{};
        check(layerq_ghz_witness_value(std::clamp(f, 0.0, 1.0), &w), "witness");
        all_witnessed = all_witnessed && w.witnessed;
        json row = {{"ket_a", a}, {"ket_b", b}, {"fidelity", f}, {"std_dev", sd},
                    {"witness_expectation", w.expectation}, {"gme", w.witnessed != 0}};
        std::string ref_f, ref_sd;
        for (const auto& p : published) {
            const auto pa = p.at("ket_a").get<std::string>(), pb = p.at("ket_b").get<std::string>();
            if ((pa == a && pb == b) || (pa == b && pb == a)) {
                row["reference"] = {{"fidelity", p.at("value")}, {"std_dev", p.at("std_dev")}};
                ref_f = number(p.at("value").get<double>());
                ref_sd = number(p.at("std_dev").get<double>());
            }
        }
        rows.push_back(row);
        csv += a + "," + b + "," + number(f) + "," + number(sd) + "," + number(w.expectation) + "," +
               (w.witnessed ? "1" : "0") + "," + ref_f + "," + ref_sd + "\n";
        std::cout << a << "/" << b << ": F = " << f << " +- " << sd << (w.witnessed ? "  GME" : "  no GME") << "\n";
    }
    json j = header(c, "subspace");
    j["source"] = source_info(c, counts_path, fixture);
    j["gme_bound"] = 0.5;
    j["subspaces"] = rows;
    write_json(output(c, "subspace.json"), j);
    std::string meta = "# seed=" + std::to_string(c.seed) + "\n";
    if (c.timestamp) meta += "# timestamp=" + j["timestamp"].get<std::string>() + "\n";
    write_file(output(c, "subspace.csv"), meta + csv);
    return all_witnessed ? kOk : kNotCertified;
}

int cmd_qkd(const RunConfig& c, const std::string& fixture, std::optional<double> inject_qber_x, bool exact) {
    layerq_qkd* raw = nullptr;
    if (!fixture.empty()) {
        check(layerq_qkd_load_fixture(fixture.c_str(), &raw), "loading QBER fixture");
    } else {
        const auto psi = target();
        const auto rho = noisy(psi.get(), c.visibility);
        if (exact)
            check(layerq_qkd_exact(rho.get(), &raw), "exact QBERs");
        else
            check(layerq_qkd_simulate(rho.get(), c.rounds, c.seed, &raw), "simulating layers");
    }
    const Qkd q(raw);
    if (inject_qber_x) check(layerq_qkd_inject_qber_x(q.get(), *inject_qber_x), "injecting QBER_X");

    const auto meta = metadata(c);
    const auto path = output(c, "qkd.csv");
    check(layerq_qkd_save_csv(q.get(), path.string().c_str(), &meta), "writing QKD report");

    std::string disc = "# seed=" + std::to_string(c.seed) + "\n";
    if (c.timestamp) disc += "# timestamp=" + utc_now() + "\n";
    disc += "subspace,computed_mean,computed_pessimistic,printed,difference\n";
    bool have_printed = false;
    for (std::size_t i = 0; i < layerq_qkd_size(q.get()); ++i) {
        layerq_layer_report r{};
        check(layerq_qkd_layer(q.get(), i, &r), "layer");
        std::cout << r.subspace << ": QBER_Z " << r.qber_z << " QBER_X " << r.qber_x << " rate " << r.rate_mean
                  << " (pessimistic " << r.rate_pessimistic << ")";
        if (!std::isnan(r.printed_rate)) {
            have_printed = true;
            std::cout << " printed " << r.printed_rate;
            disc += std::string(r.subspace) + "," + number(r.rate_mean) + "," + number(r.rate_pessimistic) + "," +
                    number(r.printed_rate) + "," + number(r.rate_mean - r.printed_rate) + "\n";
        }
        std::cout << "\n";
    }
    if (have_printed) write_file(output(c, "qkd_discrepancy.csv"), disc);
    return kOk;
}

int cmd_fmax(const RunConfig& c, const std::vector<int>& ranks) {
    const auto psi = target();
    double f = 0.0;
    check(layerq_state_fmax(psi.get(), ranks.data(), ranks.size(), &f), "class bound");
    json j = header(c, "fmax");
    j["rank_class"] = ranks;
    j["fmax"] = f;
    j["reference"] = {{"rank_class", {4, 3, 2}}, {"fmax", kPublishedBound}};
    write_json(output(c, "fmax.json"), j);
    std::cout << "fmax = " << number(f) << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Layered (4,4,2) entanglement: state generation, certification and key rates"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", layerq_version());

    Flags flags;
    app.add_option("--config", flags.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    app.add_option("--seed", flags.seed, "RNG seed");
    app.add_option("--visibility", flags.visibility, "white-noise visibility in [0, 1]");
    app.add_option("--trials", flags.trials, "Monte Carlo trials");
    app.add_option("--rate", flags.rate, "coincidence rate per second");
    app.add_option("--time", flags.time, "integration time per setting in seconds");
    app.add_option("--rounds", flags.rounds, "QKD rounds per layer and basis");
    app.add_option("--out", flags.out, "output directory");
    app.add_flag("--no-timestamp", flags.no_timestamp, "omit timestamps so outputs are byte-identical");

    std::string counts_path, fixture, kets, published;
    std::optional<double> inject;
    bool exact = false;
    std::vector<int> ranks{4, 3, 2};

    auto* gen = app.add_subcommand("gen-state", "build the state from the circuit and check it against the closed form");
    auto* sim = app.add_subcommand("simulate-counts", "simulate Poissonian counts for the witness settings");
    auto* est = app.add_subcommand("estimate", "estimate density-matrix elements with Monte Carlo errors");
    est->add_option("--counts", counts_path, "count file (JSON); simulated when absent");
    auto* wit = app.add_subcommand("witness", "fidelity witness against the (4,3,2) class bound");
    wit->add_option("--counts", counts_path, "count file (JSON)");
    wit->add_option("--fixture", fixture, "published element fixture (JSON)");
    auto* sub = app.add_subcommand("subspace", "two-level GHZ fidelities and GME decisions");
    sub->add_option("--counts", counts_path, "count file (JSON)");
    sub->add_option("--fixture", fixture, "published element fixture (JSON)");
    sub->add_option("--kets", kets, "pairs like 000,111;220,331 (default: all six)");
    sub->add_option("--published", published, "published subspace fidelities (JSON) for the report");
    auto* qkd = app.add_subcommand("qkd", "per-layer QBERs and asymptotic key rates");
    qkd->add_option("--fixture", fixture, "published QBER fixture (JSON)");
    qkd->add_option("--inject-qber-x", inject, "override QBER_X on every layer");
    qkd->add_flag("--exact", exact, "infinite-statistics QBERs instead of sampling");
    auto* fm = app.add_subcommand("fmax", "class bound for the layered target");
    fm->add_option("--ranks", ranks, "rank class, e.g. 4 3 2")->expected(1, 8);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    if (wit->get_option("--fixture")->count() && wit->get_option("--counts")->count()) {
        std::cerr << "error: --counts and --fixture are exclusive\n";
        return kUsage;
    }

    try {
        const RunConfig c = resolve(flags);
        if (*gen) return cmd_gen_state(c);
        if (*sim) return cmd_simulate_counts(c);
        if (*est) return cmd_estimate(c, counts_path);
        if (*wit) return cmd_witness(c, counts_path, fixture);
        if (*sub) return cmd_subspace(c, counts_path, fixture, kets, published);
        if (*qkd) return cmd_qkd(c, fixture, inject, exact);
        if (*fm) return cmd_fmax(c, ranks);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.what() << "\n";
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConsistency;
    }
    return kUsage;
}
