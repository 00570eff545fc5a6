#pragma once

// Measurement settings, Born-rule outcome probabilities, Poissonian count
// simulation, element estimation from counts and Monte Carlo error bars.

#include "layerq/tensor.hpp"
#include "layerq/witness.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace layerq::tomography {

/// One party's projective measurement: the computational basis, or the
/// eigenbasis of sigma_x^{a,b} = |a><b| + |b><a| or
/// sigma_y^{a,b} = i|a><b| - i|b><a| on levels (a, b).
struct LocalMeasurement {
    enum class Kind { Computational, SigmaX, SigmaY };
    Kind kind = Kind::Computational;
    int a = 0;
    int b = 1;

    /// "Z", "X01", "Y23", ...
    std::string token() const;
    /// Outcome symbols: digits for the computational basis; '+', '-' and,
    /// when the party has levels outside (a, b), the residual 'r'.
    std::vector<char> outcomes(int dim) const;
    /// +1, -1, or 0 for residual; throws for the computational basis.
    static int eigenvalue(char outcome);
};

class MeasurementSetting {
public:
    /// "Z" (every party computational) or per-party tokens joined by '-',
    /// e.g. "X01-Y01-X01" or "X02-X02-Z".
    static MeasurementSetting parse(const std::string& label, const Dims& dims);
    static MeasurementSetting computational(const Dims& dims);

    const std::string& label() const { return label_; }
    const Dims& dims() const { return dims_; }
    const std::vector<LocalMeasurement>& parties() const { return parties_; }
    bool is_computational() const;

    /// Exhaustive outcome labels, one symbol per party, in mixed-radix order.
    std::vector<std::string> outcomes() const;

private:
    std::string label_;
    Dims dims_;
    std::vector<LocalMeasurement> parties_;
};

struct OutcomeProbability {
    std::string outcome;
    double probability;
};

std::vector<OutcomeProbability> born_probabilities(const DensityOperator& rho,
                                                   const MeasurementSetting& setting);

/// Counts are integral for simulated or measured data; expected_counts
/// produces the real-valued means used as the infinite-statistics limit.
struct CountRecord {
    std::string setting;
    std::string outcome;
    double counts = 0.0;
};

struct ExperimentPlan {
    double rate = 0.66;               // coincidences per second
    double integration_time = 1800;   // seconds per setting
    std::vector<MeasurementSetting> settings;

    void validate() const;
};

/// Settings that fix the off-diagonal element Re<ket_a|rho|ket_b>: sigma
/// patterns on the parties whose digits differ, computational elsewhere.
std::vector<std::string> offdiagonal_settings(const std::string& ket_a, const std::string& ket_b);

/// Computational setting plus the correlator settings of all six layered pairs.
ExperimentPlan witness_plan(double rate, double integration_time);

/// Poisson(rate * time * p) per outcome; setting i draws from a generator
/// seeded with (seed, i).
std::vector<CountRecord> simulate_counts(const DensityOperator& rho, const ExperimentPlan& plan,
                                         std::uint64_t seed);
std::vector<CountRecord> expected_counts(const DensityOperator& rho, const ExperimentPlan& plan);

/// Settings with fewer total counts are flagged low-statistics.
inline constexpr double kLowStatisticsThreshold = 50.0;

struct Estimate {
    witness::ElementTable elements;   // 32 diagonals then 6 off-diagonals
    double fidelity = 0.0;
    std::vector<std::string> low_statistics_settings;
};

/// Diagonals are C(ijk)/C_T from the computational setting. Each correlator
/// is normalized by the in-subspace counts of its setting (residual outcomes
/// and computational-party mismatches excluded) and rescaled by the subspace
/// population taken from the diagonals, giving Tr(rho O).
Estimate estimate_elements(std::span<const CountRecord> records);

struct SubspaceEstimate {
    std::string ket_a;
    std::string ket_b;
    double value;
    double std_dev;
};

struct MonteCarloResult {
    witness::ElementTable elements;   // point estimates with Monte Carlo std_dev
    double fidelity = 0.0;
    double fidelity_std = 0.0;
    std::vector<SubspaceEstimate> subspaces;   // the six layered pairs
    std::vector<std::string> low_statistics_settings;
    std::size_t trials = 0;
    bool degenerate = false;                   // fewer than kMinTrials trials
};

inline constexpr std::size_t kMinTrials = 100;

/// Resamples every count as Poisson(observed) per trial and reports sample
/// standard deviations. Trial t draws from a generator seeded with (seed, t).
MonteCarloResult monte_carlo_errors(std::span<const CountRecord> records, std::size_t trials,
                                    std::uint64_t seed);

} // namespace layerq::tomography
