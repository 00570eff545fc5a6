#include "layerq/photonic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace layerq::photonic {

namespace {

constexpr double kInputNormTol = 1e-10;
constexpr double kEmptyTol = 1e-14;

void require_photon(std::size_t photon, std::size_t count, const char* what) {
    if (photon >= count)
        throw std::invalid_argument(std::string(what) + ": photon " + std::to_string(photon) +
                                    " out of range");
}

void require_qubits(const PureState& psi, std::size_t parties, const char* what) {
    const auto& d = psi.dims();
    if (d.parties() != parties)
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(parties) +
                                    " photons, got dims " + d.to_string());
    for (int x : d.values())
        if (x != 2)
            throw std::invalid_argument(std::string(what) +
                                        ": every photon must be a polarization qubit, got dims " +
                                        d.to_string());
}

void require_normalized(const PureState& psi, const char* what) {
    if (std::abs(psi.amplitudes().squaredNorm() - 1.0) > kInputNormTol)
        throw std::invalid_argument(std::string(what) + ": input is not normalized");
}

void add_term(std::map<ModeState::Config, Complex>& terms, const ModeState::Config& c, Complex a) {
    if (a == Complex(0.0)) return;
    terms[c] += a;
}

} // namespace

ModeLabel ModeLabel::from_digit(int digit) {
    if (digit < 0 || digit > 3) throw std::invalid_argument("ModeLabel: digit must be in 0..3");
    return {static_cast<Polarization>(digit / 2), static_cast<Path>(digit % 2)};
}

Jones hwp_matrix(double theta) {
    if (!std::isfinite(theta)) throw std::invalid_argument("hwp_matrix: angle must be finite");
    const double c = std::cos(2.0 * theta);
    const double s = std::sin(2.0 * theta);
    Jones m;
    m << c, s, s, -c;
    return m;
}

Jones qwp_matrix(double theta) {
    if (!std::isfinite(theta)) throw std::invalid_argument("qwp_matrix: angle must be finite");
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Jones r;
    r << c, -s, s, c;
    Jones d = Jones::Zero();
    d(0, 0) = 1.0;
    d(1, 1) = Complex(0.0, 1.0);
    return r * d * r.adjoint();
}

OpticalElement OpticalElement::hwp(std::size_t photon, double theta, std::array<bool, 2> paths) {
    return {Kind::HWP, theta, {photon}, paths};
}

OpticalElement OpticalElement::qwp(std::size_t photon, double theta, std::array<bool, 2> paths) {
    return {Kind::QWP, theta, {photon}, paths};
}

OpticalElement OpticalElement::bd(std::size_t photon) { return {Kind::BD, 0.0, {photon}, {true, true}}; }

OpticalElement OpticalElement::pbs(std::size_t a, std::size_t b) {
    if (a == b) throw std::invalid_argument("OpticalElement::pbs: input photons must differ");
    return {Kind::PBS, 0.0, {a, b}, {true, true}};
}

ModeState ModeState::from_polarization(const PureState& psi) {
    for (int d : psi.dims().values())
        if (d != 2)
            throw std::invalid_argument("ModeState: polarization input needs dims of 2, got " +
                                        psi.dims().to_string());
    ModeState out;
    out.photons_ = psi.dims().parties();
    for (std::size_t i = 0; i < psi.dims().total(); ++i) {
        const Complex a = psi.amplitudes()(static_cast<Eigen::Index>(i));
        if (a == Complex(0.0)) continue;
        Config c;
        for (int d : psi.dims().digits(i)) c.push_back({static_cast<Polarization>(d), Path::Upper});
        out.terms_[c] = a;
    }
    return out;
}

double ModeState::squared_norm() const {
    double n = 0.0;
    for (const auto& [c, a] : terms_) n += std::norm(a);
    return n;
}

ModeState ModeState::apply(const OpticalElement& element) const {
    ModeState out;
    out.photons_ = photons_;
    using Kind = OpticalElement::Kind;

    switch (element.kind) {
    case Kind::HWP:
    case Kind::QWP: {
        require_photon(element.photons.at(0), photons_, "waveplate");
        const std::size_t k = element.photons[0];
        const Jones m = element.kind == Kind::HWP ? hwp_matrix(element.angle) : qwp_matrix(element.angle);
        for (const auto& [c, a] : terms_) {
            if (!element.paths[static_cast<int>(c[k].path)]) {
                add_term(out.terms_, c, a);
                continue;
            }
            const int in = static_cast<int>(c[k].polarization);
            for (int o = 0; o < 2; ++o) {
                Config next = c;
                next[k].polarization = static_cast<Polarization>(o);
                add_term(out.terms_, next, m(o, in) * a);
            }
        }
        break;
    }
    case Kind::BD: {
        require_photon(element.photons.at(0), photons_, "beam displacer");
        const std::size_t k = element.photons[0];
        for (const auto& [c, a] : terms_) {
            if (c[k].path != Path::Upper)
                throw std::invalid_argument("beam displacer: photon must enter on the upper path");
            Config next = c;
            next[k].path = c[k].polarization == Polarization::H ? Path::Upper : Path::Lower;
            add_term(out.terms_, next, a);
        }
        break;
    }
    case Kind::PBS: {
        const std::size_t i = element.photons.at(0);
        const std::size_t j = element.photons.at(1);
        require_photon(i, photons_, "PBS");
        require_photon(j, photons_, "PBS");
        // Photon i: H transmits to output 0, V reflects to output 1. Photon j
        // enters the other face, so its H goes to output 1 and V to output 0.
        // One photon per output therefore means equal polarizations. Photons
        // are relabelled by output port: for VV the photons swap ports.
        for (const auto& [c, a] : terms_) {
            if (c[i].polarization != c[j].polarization) continue;
            Config next = c;
            if (c[i].polarization == Polarization::V) std::swap(next[i], next[j]);
            add_term(out.terms_, next, a);
        }
        break;
    }
    }
    return out;
}

ModeState ModeState::project_out(std::size_t photon, const Eigen::Vector2cd& polarization) const {
    require_photon(photon, photons_, "project_out");
    ModeState out;
    out.photons_ = photons_ - 1;
    for (const auto& [c, a] : terms_) {
        Config next = c;
        const int pol = static_cast<int>(c[photon].polarization);
        next.erase(next.begin() + static_cast<std::ptrdiff_t>(photon));
        add_term(out.terms_, next, std::conj(polarization(pol)) * a);
    }
    return out;
}

PureState ModeState::encode(const std::vector<bool>& hybrid) const {
    if (hybrid.size() != photons_)
        throw std::invalid_argument("ModeState::encode: hybrid flags do not match photon count");
    std::vector<int> dims;
    for (bool h : hybrid) dims.push_back(h ? 4 : 2);
    const Dims d(dims);
    Vector v = Vector::Zero(static_cast<Eigen::Index>(d.total()));
    std::vector<int> digits(photons_);
    for (const auto& [c, a] : terms_) {
        for (std::size_t k = 0; k < photons_; ++k) {
            if (hybrid[k]) {
                digits[k] = c[k].digit();
            } else {
                if (c[k].path != Path::Upper)
                    throw std::invalid_argument("ModeState::encode: path qubit on a non-hybrid photon");
                digits[k] = static_cast<int>(c[k].polarization);
            }
        }
        v(static_cast<Eigen::Index>(d.index(digits))) += a;
    }
    return PureState::normalized(d, std::move(v));
}

PureState bell_pair() {
    Vector v = Vector::Zero(4);
    v(0) = std::numbers::sqrt2 / 2.0;
    v(3) = std::numbers::sqrt2 / 2.0;
    return PureState(Dims{2, 2}, std::move(v));
}

CircuitOutcome ghz_fuse(const PureState& pair1, const PureState& pair2) {
    require_qubits(pair1, 2, "ghz_fuse");
    require_qubits(pair2, 2, "ghz_fuse");
    require_normalized(pair1, "ghz_fuse");
    require_normalized(pair2, "ghz_fuse");

    // Photons 1..4 sit at indices 0..3.
    const ModeState fused =
        ModeState::from_polarization(tensor_product(pair1, pair2)).apply(OpticalElement::pbs(1, 2));
    const double probability = fused.squared_norm();
    if (probability < kEmptyTol)
        throw std::invalid_argument("ghz_fuse: inputs never give a PBS coincidence");

    // Trigger registered as |+>; the |-> result differs by a sigma_z
    // feed-forward on photon 1 for GHZ-type outputs.
    const Eigen::Vector2cd plus(std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0);
    ModeState heralded = fused.project_out(2, plus);
    if (heralded.squared_norm() < kEmptyTol) {
        const Eigen::Vector2cd minus(std::numbers::sqrt2 / 2.0, -std::numbers::sqrt2 / 2.0);
        heralded = fused.project_out(2, minus);
    }
    return {heralded.encode({false, false, false}), probability};
}

CircuitOutcome dimension_double(const PureState& psi) {
    const auto& d = psi.dims();
    if (d.parties() < 2)
        throw std::invalid_argument("dimension_double: needs at least two photons, got dims " +
                                    d.to_string());
    require_qubits(psi, d.parties(), "dimension_double");
    require_normalized(psi, "dimension_double");

    constexpr double kHalfWaveAngle = std::numbers::pi / 8.0;  // 22.5 degrees
    ModeState s = ModeState::from_polarization(psi);
    for (std::size_t k : {0u, 1u}) s = s.apply(OpticalElement::bd(k));
    for (std::size_t k : {0u, 1u}) s = s.apply(OpticalElement::hwp(k, kHalfWaveAngle));
    s = s.apply(OpticalElement::pbs(0, 1));

    const double probability = s.squared_norm();
    if (probability < kEmptyTol)
        throw std::invalid_argument("dimension_double: input never gives a PBS coincidence");
    std::vector<bool> hybrid(d.parties(), false);
    hybrid[0] = hybrid[1] = true;
    return {s.encode(hybrid), probability};
}

CircuitOutcome layered_source() {
    const CircuitOutcome ghz = ghz_fuse(bell_pair(), bell_pair());
    CircuitOutcome doubled = dimension_double(ghz.state);
    doubled.success_probability *= ghz.success_probability;
    return doubled;
}

PureState make_psi442() {
    const Dims dims{4, 4, 2};
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dims.total()));
    for (auto ket : {std::array{0, 0, 0}, std::array{1, 1, 1}, std::array{2, 2, 0}, std::array{3, 3, 1}})
        v(static_cast<Eigen::Index>(dims.index(ket))) = 0.5;
    return PureState(dims, std::move(v));
}

DensityOperator apply_white_noise(const PureState& psi, double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0))
        throw std::invalid_argument("apply_white_noise: visibility must lie in [0, 1]");
    const auto n = static_cast<Eigen::Index>(psi.dims().total());
    Matrix m = visibility * (psi.amplitudes() * psi.amplitudes().adjoint()) +
               (1.0 - visibility) / static_cast<double>(n) * Matrix::Identity(n, n);
    return DensityOperator(psi.dims(), std::move(m));
}

} // namespace layerq::photonic
