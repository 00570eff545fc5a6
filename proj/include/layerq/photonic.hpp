#pragma once

// Mode-level simulation of the polarization/path photonic source.
//
// Each photon carries a polarization (H, V) and a spatial path (upper,
// lower). Elements act on a superposition of labelled multi-photon terms;
// PBS coincidence post-selection drops terms with two photons in one output
// port, so the squared norm left after a circuit is its success probability.

#include "layerq/tensor.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <vector>

namespace layerq::photonic {

enum class Polarization : int { H = 0, V = 1 };
enum class Path : int { Upper = 0, Lower = 1 };

struct ModeLabel {
    Polarization polarization = Polarization::H;
    Path path = Path::Upper;

    /// (H,upper)->0, (H,lower)->1, (V,upper)->2, (V,lower)->3.
    int digit() const { return 2 * static_cast<int>(polarization) + static_cast<int>(path); }
    static ModeLabel from_digit(int digit);

    friend auto operator<=>(const ModeLabel&, const ModeLabel&) = default;
};

using Jones = Eigen::Matrix2cd;

/// Half-wave plate at angle theta (radians) on the (H, V) basis.
Jones hwp_matrix(double theta);
/// Quarter-wave plate: diag(1, i) in the frame rotated by theta.
Jones qwp_matrix(double theta);

struct OpticalElement {
    enum class Kind { HWP, QWP, BD, PBS };

    Kind kind = Kind::HWP;
    double angle = 0.0;                        // waveplates only
    std::vector<std::size_t> photons;          // one photon, or two for PBS
    std::array<bool, 2> paths = {true, true};  // waveplates act on these paths

    static OpticalElement hwp(std::size_t photon, double theta, std::array<bool, 2> paths = {true, true});
    static OpticalElement qwp(std::size_t photon, double theta, std::array<bool, 2> paths = {true, true});
    /// Beam displacer: (H,upper)->(H,upper), (V,upper)->(V,lower).
    static OpticalElement bd(std::size_t photon);
    /// PBS with photon a and photon b on the two input ports; keeps only terms
    /// with one photon in each output port.
    static OpticalElement pbs(std::size_t a, std::size_t b);
};

/// Unnormalized superposition over labelled photon configurations.
class ModeState {
public:
    using Config = std::vector<ModeLabel>;

    /// Polarization-only state (all local dims 2, digit 0 = H, 1 = V); every
    /// photon starts in the upper path.
    static ModeState from_polarization(const PureState& psi);

    std::size_t photons() const { return photons_; }
    const std::map<Config, Complex>& terms() const { return terms_; }
    double squared_norm() const;

    ModeState apply(const OpticalElement& element) const;

    /// Projects photon onto the polarization vector (on any path) and removes it.
    ModeState project_out(std::size_t photon, const Eigen::Vector2cd& polarization) const;

    /// Encodes into a PureState: photons flagged hybrid use the 4-level digit,
    /// others must sit in the upper path and use H->0, V->1.
    PureState encode(const std::vector<bool>& hybrid) const;

private:
    std::size_t photons_ = 0;
    std::map<Config, Complex> terms_;
};

struct CircuitOutcome {
    PureState state;
    double success_probability;
};

/// (|HH> + |VV>)/sqrt(2).
PureState bell_pair();

/// PBS fusion of photon 2 (from pair1) and photon 3 (from pair2). Photon 3 is
/// the trigger: it is registered in the diagonal basis and removed. The output
/// orders photons (1, 2, 4); success_probability is the coincidence
/// probability of the fusion PBS.
CircuitOutcome ghz_fuse(const PureState& pair1, const PureState& pair2);

/// Beam displacers, 22.5 degree waveplates and PBS coincidence on the first two
/// photons, which leave with 4-level hybrid digits. Further parties are
/// spectator polarization qubits.
CircuitOutcome dimension_double(const PureState& psi);

/// bell_pair x2 -> ghz_fuse -> dimension_double. success_probability is the
/// product of both post-selection stages.
CircuitOutcome layered_source();

/// (|000> + |111> + |220> + |331>)/2 on dims (4,4,2).
PureState make_psi442();

/// v |psi><psi| + (1 - v) I / D.
DensityOperator apply_white_noise(const PureState& psi, double visibility);

} // namespace layerq::photonic
