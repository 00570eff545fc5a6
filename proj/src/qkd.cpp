#include "layerq/qkd.hpp"

#include "layerq/tomography.hpp"
#include "layerq/witness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace layerq::qkd {

namespace {

struct Weighted {
    std::array<int, 3> outcome;
    double weight;
};

Measured binomial(double errors, double kept, bool with_std) {
    const double q = errors / kept;
    return {q, with_std ? std::sqrt(q * (1.0 - q) / kept) : 0.0};
}

QberReport qbers_from_weighted(std::span<const Weighted> z, std::span<const Weighted> x, const LayerSpec& layer,
                               std::size_t reference, bool with_std) {
    if (z.empty() || x.empty()) throw std::invalid_argument("compute_qbers: both bases need samples");
    if (reference >= layer.participants.size())
        throw std::invalid_argument("compute_qbers: reference participant out of range");
    const std::size_t n = layer.participants.size();

    double z_total = 0.0, z_kept = 0.0, z_err = 0.0;
    std::vector<double> pair_err(n, 0.0);
    for (const auto& [o, w] : z) {
        z_total += w;
        bool kept = true;
        for (std::size_t k = 0; k < n && kept; ++k) {
            const auto lv = layer.levels(k);
            const int d = o[layer.participants[k]];
            kept = d == lv[0] || d == lv[1];
        }
        if (!kept) continue;
        z_kept += w;
        std::vector<int> bits(n);
        for (std::size_t k = 0; k < n; ++k) bits[k] = layer.bit(o[layer.participants[k]]);
        if (std::adjacent_find(bits.begin(), bits.end(), std::not_equal_to<>()) != bits.end()) z_err += w;
        for (std::size_t k = 0; k < n; ++k)
            if (bits[k] != bits[reference]) pair_err[k] += w;
    }

    double x_total = 0.0, x_kept = 0.0, x_err = 0.0;
    for (const auto& [o, w] : x) {
        x_total += w;
        int product = 1;
        for (std::size_t k = 0; k < n; ++k) product *= o[layer.participants[k]];
        if (product == 0) continue;
        x_kept += w;
        if (product != 1) x_err += w;
    }
    if (!(z_kept > 0.0)) throw std::invalid_argument("compute_qbers: no Z rounds survive sifting");
    if (!(x_kept > 0.0)) throw std::invalid_argument("compute_qbers: no X rounds survive sifting");

    QberReport r;
    r.layer = layer.id;
    r.qber_z = binomial(z_err, z_kept, with_std);
    r.qber_x = binomial(x_err, x_kept, with_std);
    r.z_discard_fraction = 1.0 - z_kept / z_total;
    r.x_discard_fraction = 1.0 - x_kept / x_total;
    if (layer.tripartite())
        for (std::size_t k = 0; k < n; ++k)
            if (k != reference)
                r.pairwise.push_back({layer.participants[reference], layer.participants[k],
                                      binomial(pair_err[k], z_kept, with_std)});
    return r;
}

std::array<int, 3> parse_outcome(const std::string& outcome) {
    std::array<int, 3> out{};
    for (std::size_t p = 0; p < 3; ++p) {
        const char c = outcome.at(p);
        out[p] = (c >= '0' && c <= '9') ? c - '0' : tomography::LocalMeasurement::eigenvalue(c);
    }
    return out;
}

std::vector<Weighted> weighted_outcomes(const DensityOperator& rho, const std::string& setting) {
    std::vector<Weighted> out;
    const auto s = tomography::MeasurementSetting::parse(setting, rho.dims());
    for (const auto& [o, p] : tomography::born_probabilities(rho, s)) out.push_back({parse_outcome(o), p});
    return out;
}

void require_layered(const DensityOperator& rho) {
    if (!(rho.dims() == witness::layered_dims()))
        throw std::invalid_argument("layered QKD needs a (4,4,2) state, got " + rho.dims().to_string());
}

double h_clamped(double q) { return binary_entropy(std::clamp(q, 0.0, 0.5)); }

} // namespace

std::array<int, 2> LayerSpec::levels(std::size_t k) const {
    return {ket_a.at(k) - '0', ket_b.at(k) - '0'};
}

std::string LayerSpec::x_setting() const {
    std::string label;
    for (std::size_t p = 0; p < 3; ++p) {
        if (p) label += '-';
        const auto it = std::find(participants.begin(), participants.end(), p);
        if (it == participants.end()) {
            label += 'Z';
            continue;
        }
        const auto lv = levels(static_cast<std::size_t>(it - participants.begin()));
        label += 'X';
        label += static_cast<char>('0' + std::min(lv[0], lv[1]));
        label += static_cast<char>('0' + std::max(lv[0], lv[1]));
    }
    return label;
}

int LayerSpec::bit(int digit) const { return tripartite() ? key_map_abc(digit) : key_map_ab(digit); }

const std::array<LayerSpec, 4>& layers() {
    static const std::array<LayerSpec, 4> all = {{
        {LayerId::Abc0, {0, 1, 2}, "000", "111"},
        {LayerId::Abc1, {0, 1, 2}, "220", "331"},
        {LayerId::Ab0, {0, 1}, "00", "22"},
        {LayerId::Ab1, {0, 1}, "11", "33"},
    }};
    return all;
}

const LayerSpec& layer(LayerId id) { return layers()[static_cast<std::size_t>(id)]; }

int key_map_abc(int digit) {
    if (digit < 0 || digit > 3) throw std::invalid_argument("key_map_abc: digit must be in 0..3");
    return digit % 2;
}

int key_map_ab(int digit) {
    if (digit < 0 || digit > 3) throw std::invalid_argument("key_map_ab: digit must be in 0..3");
    return digit / 2;
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binary_entropy: p must lie in [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::optional<Measured> QberReport::pair(std::size_t first, std::size_t second) const {
    for (const auto& pq : pairwise)
        if ((pq.first == first && pq.second == second) || (pq.first == second && pq.second == first))
            return pq.qber;
    return std::nullopt;
}

QberReport compute_qbers(const LayerSamples& samples, const LayerSpec& layer, std::size_t reference) {
    std::vector<Weighted> z, x;
    z.reserve(samples.z_rounds.size());
    x.reserve(samples.x_rounds.size());
    for (const auto& o : samples.z_rounds) z.push_back({o, 1.0});
    for (const auto& o : samples.x_rounds) x.push_back({o, 1.0});
    return qbers_from_weighted(z, x, layer, reference, true);
}

QberReport exact_qbers(const DensityOperator& rho, const LayerSpec& layer, std::size_t reference) {
    require_layered(rho);
    const auto z = weighted_outcomes(rho, "Z");
    const auto x = weighted_outcomes(rho, layer.x_setting());
    return qbers_from_weighted(z, x, layer, reference, false);
}

LayerSamples simulate_layer_samples(const DensityOperator& rho, const LayerSpec& layer, std::size_t rounds,
                                    std::uint64_t seed) {
    require_layered(rho);
    if (rounds == 0) throw std::invalid_argument("simulate_layer_samples: rounds must be positive");
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(layer.id)};
    std::mt19937_64 engine(seq);

    auto draw = [&](const std::vector<Weighted>& dist, std::vector<std::array<int, 3>>& out) {
        std::vector<double> w;
        for (const auto& d : dist) w.push_back(d.weight);
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        out.reserve(rounds);
        for (std::size_t i = 0; i < rounds; ++i) out.push_back(dist[pick(engine)].outcome);
    };
    LayerSamples s;
    draw(weighted_outcomes(rho, "Z"), s.z_rounds);
    draw(weighted_outcomes(rho, layer.x_setting()), s.x_rounds);
    return s;
}

LayerKeyReport asymptotic_key_rate(const QberReport& report) {
    auto rate = [&](double sigmas) {
        const auto raised = [&](const Measured& m) { return m.value + sigmas * m.std_dev; };
        double z_term = 0.0;
        if (report.pairwise.empty()) {
            z_term = h_clamped(raised(report.qber_z));
        } else {
            for (const auto& pq : report.pairwise) z_term = std::max(z_term, h_clamped(raised(pq.qber)));
        }
        return std::clamp(1.0 - h_clamped(raised(report.qber_x)) - z_term, 0.0, 1.0);
    };
    return {report.layer, rate(0.0), rate(1.0)};
}

KeyAgreement key_agreement(std::span<const std::array<int, 3>> z_rounds) {
    if (z_rounds.empty()) throw std::invalid_argument("key_agreement: no rounds");
    double abc = 0.0, ab = 0.0;
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> key_marginal, c_marginal;
    for (const auto& o : z_rounds) {
        const int ka = key_map_abc(o[0]);
        if (ka == key_map_abc(o[1]) && ka == key_map_abc(o[2])) abc += 1.0;
        const int k = key_map_ab(o[0]);
        if (k == key_map_ab(o[1])) ab += 1.0;
        joint[{k, o[2]}] += 1.0;
        key_marginal[k] += 1.0;
        c_marginal[o[2]] += 1.0;
    }
    const double n = static_cast<double>(z_rounds.size());
    double mi = 0.0;
    for (const auto& [kc, c] : joint) {
        const double pj = c / n;
        mi += pj * std::log2(pj / ((key_marginal[kc.first] / n) * (c_marginal[kc.second] / n)));
    }
    return {abc / n, ab / n, std::max(mi, 0.0), z_rounds.size()};
}

} // namespace layerq::qkd
