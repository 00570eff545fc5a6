#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the code under test except for the basic state
// containers.

#include "layerq/tensor.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#ifndef LAYERQ_TEST_DATA_DIR
#define LAYERQ_TEST_DATA_DIR "data"
#endif

namespace support {

using layerq::Complex;
using layerq::Dims;
using layerq::Matrix;
using layerq::Vector;

inline std::string data_path(const std::string& name) { return std::string(LAYERQ_TEST_DATA_DIR) + "/" + name; }

inline Vector random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
    return v / v.norm();
}

inline layerq::PureState random_state(const Dims& dims, std::mt19937_64& rng) {
    return layerq::PureState(dims, random_vector(dims.total(), rng));
}

// Ginibre construction; rank <= 0 means full rank.
inline layerq::DensityOperator random_density(const Dims& dims, std::mt19937_64& rng, int rank = 0) {
    const auto n = static_cast<Eigen::Index>(dims.total());
    const Eigen::Index k = rank > 0 ? rank : n;
    std::normal_distribution<double> g;
    Matrix a(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < k; ++j) a(i, j) = Complex(g(rng), g(rng));
    Matrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    rho = (rho + rho.adjoint()).eval() * 0.5;
    return layerq::DensityOperator(dims, rho);
}

inline Matrix kron(const Matrix& x, const Matrix& y) {
    Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
}

inline Matrix kron_all(const std::vector<Matrix>& ops) {
    Matrix out = Matrix::Identity(1, 1);
    for (const auto& m : ops) out = kron(out, m);
    return out;
}

// sigma_x / sigma_y on levels (a, b) of a d-level system, zero elsewhere.
inline Matrix sigma(char kind, int a, int b, int d) {
    Matrix m = Matrix::Zero(d, d);
    if (kind == 'X') {
        m(a, b) = 1.0;
        m(b, a) = 1.0;
    } else {
        m(a, b) = Complex(0.0, 1.0);
        m(b, a) = Complex(0.0, -1.0);
    }
    return m;
}

inline Matrix level_projector(int level, int d) {
    Matrix m = Matrix::Zero(d, d);
    m(level, level) = 1.0;
    return m;
}

// Tr(rho O) by explicit dense contraction.
inline double expectation(const Matrix& rho, const Matrix& op) { return (rho * op).trace().real(); }

// Squared Schmidt coefficients across a single-party cut from the
// eigenvalues of the reduced Gram matrix (no SVD, no partial trace code).
inline std::vector<double> gram_spectrum(const layerq::PureState& psi, std::size_t party) {
    const auto& dims = psi.dims();
    const int dp = dims[party];
    Matrix g = Matrix::Zero(dp, dp);
    for (std::size_t i = 0; i < dims.total(); ++i) {
        const auto di = dims.digits(i);
        for (std::size_t j = 0; j < dims.total(); ++j) {
            const auto dj = dims.digits(j);
            bool same_rest = true;
            for (std::size_t p = 0; p < dims.parties(); ++p)
                if (p != party && di[p] != dj[p]) same_rest = false;
            if (same_rest)
                g(di[party], dj[party]) += psi.amplitudes()(static_cast<Eigen::Index>(i)) *
                                           std::conj(psi.amplitudes()(static_cast<Eigen::Index>(j)));
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

// Eigenvalues carry ~1e-16 absolute noise, so squared coefficients are
// compared on their own scale rather than through a square root.
inline int gram_rank(const layerq::PureState& psi, std::size_t party, double tol = 1e-10) {
    const auto ev = gram_spectrum(psi, party);
    return static_cast<int>(std::count_if(ev.begin(), ev.end(), [&](double e) { return e > tol * ev.front(); }));
}

// Applies a local operator on one party of a pure state.
inline Vector apply_local(const Dims& dims, const Vector& v, std::size_t party, const Matrix& op) {
    std::vector<Matrix> ops;
    for (std::size_t p = 0; p < dims.parties(); ++p)
        ops.push_back(p == party ? op : Matrix::Identity(dims[p], dims[p]));
    return kron_all(ops) * v;
}

// Thin isometry with orthonormal columns from an arbitrary full-rank matrix.
inline Matrix orthonormalize(const Matrix& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

struct HillClimbResult {
    double best = 0.0;            // largest overlap reached
    double worst_violation = 0.0; // largest overlap of any constructed state minus the cap
    std::size_t restarts = 0;
    bool rank_respected = true;   // every candidate had the required rank cap
};

// Brute-force maximum of |<target|phi>|^2 over phi whose reduction on `party`
// has rank <= rank. phi is the normalized projection of target onto a
// rank-dimensional local subspace (the best state for that subspace), and the
// subspace is improved by small random perturbations re-orthonormalized.
inline HillClimbResult hill_climb_overlap(const layerq::PureState& target, std::size_t party, int rank,
                                          std::size_t restarts, std::size_t steps, std::uint64_t seed,
                                          double cap) {
    const auto& dims = target.dims();
    const int d = dims[party];
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    auto random_matrix = [&](int r, int c) {
        Matrix m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = Complex(g(rng), g(rng));
        return m;
    };
    auto overlap = [&](const Matrix& iso, bool check_rank, HillClimbResult& res) {
        const Matrix proj = iso * iso.adjoint();
        Vector phi = apply_local(dims, target.amplitudes(), party, proj);
        const double nrm = phi.norm();
        if (nrm < 1e-14) return 0.0;
        phi /= nrm;
        if (check_rank && gram_rank(layerq::PureState(dims, phi), party) > rank) res.rank_respected = false;
        return std::norm(target.amplitudes().dot(phi));
    };

    HillClimbResult res;
    for (std::size_t r = 0; r < restarts; ++r) {
        Matrix iso = orthonormalize(random_matrix(d, rank));
        double cur = overlap(iso, r % 97 == 0, res);
        double step = 0.5;
        for (std::size_t s = 0; s < steps; ++s) {
            const Matrix trial = orthonormalize(iso + step * random_matrix(d, rank));
            const double val = overlap(trial, false, res);
            if (val > cur) {
                cur = val;
                iso = trial;
            } else {
                step = std::max(step * 0.9, 1e-4);
            }
        }
        res.best = std::max(res.best, cur);
        res.worst_violation = std::max(res.worst_violation, cur - cap);
        ++res.restarts;
    }
    return res;
}

// Sample standard deviation (n - 1).
inline double sample_std(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Binary entropy via the series of the natural-log form around p = 1/2:
// h(p) = 1 - (1/ln 2) sum_{n>=1} (1-2p)^{2n} / (2n(2n-1)).
inline double binary_entropy_series(double p) {
    const double x = 1.0 - 2.0 * p;
    const double x2 = x * x;
    double term = x2, sum = 0.0;
    for (int n = 1; n < 20000; ++n) {
        sum += term / (2.0 * n * (2.0 * n - 1.0));
        term *= x2;
        if (term < 1e-20) break;
    }
    return 1.0 - sum / std::log(2.0);
}

} // namespace support
