#pragma once

// Layered key extraction: per-layer sifting, Z/X-basis QBERs and the
// asymptotic one-way key rate per post-selected round.

#include "layerq/tensor.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace layerq::qkd {

enum class LayerId { Abc0, Abc1, Ab0, Ab1 };

struct LayerSpec {
    LayerId id;
    std::vector<std::size_t> participants;   // party indices, reference first
    std::string ket_a;                       // Z-basis kets over the participants
    std::string ket_b;

    bool tripartite() const { return participants.size() == 3; }
    /// "000/111", "00/22", ...
    std::string subspace() const { return ket_a + "/" + ket_b; }
    /// Levels participant k may report and still be kept by sifting.
    std::array<int, 2> levels(std::size_t k) const;
    /// X-basis setting on the full (4,4,2) system, e.g. "X01-X01-X01" or "X02-X02-Z".
    std::string x_setting() const;
    /// Key bit of a kept digit: key_map_abc for ABC layers, key_map_ab otherwise.
    int bit(int digit) const;
};

/// ABC layer {000,111}, ABC layer {220,331}, AB layer {00,22}, AB layer {11,33}.
const std::array<LayerSpec, 4>& layers();
const LayerSpec& layer(LayerId id);

/// 0 for outcomes 0 and 2, 1 for 1 and 3.
int key_map_abc(int digit);
/// 0 for outcomes 0 and 1, 1 for 2 and 3.
int key_map_ab(int digit);

double binary_entropy(double p);

struct Measured {
    double value = 0.0;
    double std_dev = 0.0;
};

struct PairwiseQber {
    std::size_t first;
    std::size_t second;
    Measured qber;
};

struct QberReport {
    LayerId layer;
    Measured qber_z;
    Measured qber_x;
    /// Z-basis disagreement between the reference party and every other
    /// participant; empty for two-party layers.
    std::vector<PairwiseQber> pairwise;
    double z_discard_fraction = 0.0;
    double x_discard_fraction = 0.0;

    /// Pairwise QBER between parties (first, second) in either order.
    std::optional<Measured> pair(std::size_t first, std::size_t second) const;
};

/// Per-round outcomes on all three parties. Z rounds hold computational
/// digits. X rounds hold +1/-1 for parties measuring sigma_x on the layer
/// levels, 0 for a residual detection, and the digit for a party measured in
/// the computational basis (ignored by the layer).
struct LayerSamples {
    std::vector<std::array<int, 3>> z_rounds;
    std::vector<std::array<int, 3>> x_rounds;
};

/// Sifts both bases into the layer subspace. QBER_Z counts kept rounds whose
/// participant bits are not all equal; QBER_X counts kept rounds whose sign
/// product is not +1. Errors are binomial. reference picks the participant
/// the pairwise QBERs are taken against (index into layer.participants).
QberReport compute_qbers(const LayerSamples& samples, const LayerSpec& layer, std::size_t reference = 0);

/// Infinite-statistics QBERs from Born probabilities (std_dev = 0).
QberReport exact_qbers(const DensityOperator& rho, const LayerSpec& layer, std::size_t reference = 0);

/// Draws rounds z and x rounds from rho for a layer.
LayerSamples simulate_layer_samples(const DensityOperator& rho, const LayerSpec& layer, std::size_t rounds,
                                    std::uint64_t seed);

struct LayerKeyReport {
    LayerId layer;
    double rate_mean;          // from central QBER values
    double rate_pessimistic;   // every QBER raised by one standard deviation
};

/// r = 1 - h(QBER_X) - max over pairs h(QBER_Z(pair)), clamped to [0, 1].
/// Two-party layers use QBER_Z as the single pair.
LayerKeyReport asymptotic_key_rate(const QberReport& report);

struct KeyAgreement {
    double abc_agreement;        // k_ABC equal for A, B and C
    double ab_agreement;         // k_AB equal for A and B
    double mutual_information;   // plug-in I(k_AB ; C outcome) in bits
    std::size_t rounds;
};

/// Unsifted Z rounds mapped with the two key maps.
KeyAgreement key_agreement(std::span<const std::array<int, 3>> z_rounds);

} // namespace layerq::qkd
