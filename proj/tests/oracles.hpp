// oracles.hpp — independent brute-force references used by the tests. These
// deliberately re-derive the physics from raw amplitude vectors instead of
// calling the production operators, so that agreement is meaningful.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qfilab/fock.hpp"

namespace oracle {

inline double log_binom(int n, int k) {
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

inline double pmf(int trials, int k, double p) {
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == trials ? 1.0 : 0.0;
    return std::exp(log_binom(trials, k) + k * std::log(p) + (trials - k) * std::log1p(-p));
}

// Raw annihilator actions on an amplitude vector over |n atoms in a>.
inline Eigen::VectorXcd apply_a(const Eigen::VectorXcd& amps) {
    const Eigen::Index n_atoms = amps.size() - 1;
    Eigen::VectorXcd out(n_atoms);
    for (Eigen::Index n = 1; n <= n_atoms; ++n) {
        out(n - 1) = std::sqrt(double(n)) * amps(n);
    }
    return out;
}

inline Eigen::VectorXcd apply_b(const Eigen::VectorXcd& amps) {
    const Eigen::Index n_atoms = amps.size() - 1;
    Eigen::VectorXcd out(n_atoms);
    for (Eigen::Index n = 0; n < n_atoms; ++n) {
        out(n) = std::sqrt(double(n_atoms - n)) * amps(n);
    }
    return out;
}

// 4 Var(n) for a possibly unnormalized vector; S_z-QFI since S_z = n - N/2.
inline double qfi_sz(const Eigen::VectorXcd& amps) {
    double mass = 0.0, m1 = 0.0, m2 = 0.0;
    for (Eigen::Index n = 0; n < amps.size(); ++n) {
        const double mu = std::norm(amps(n));
        mass += mu;
        m1 += mu * double(n);
        m2 += mu * double(n) * double(n);
    }
    if (mass <= 0.0) return 0.0;
    m1 /= mass;
    m2 /= mass;
    return 4.0 * (m2 - m1 * m1);
}

// Full double sum of the two-channel averaged sensitivity, no truncation.
// Infeasible and annihilated terms contribute zero.
inline double f2_dual(const Eigen::VectorXcd& amps, double p_a, double p_b) {
    const int n_atoms = int(amps.size()) - 1;
    double total = 0.0;
    Eigen::VectorXcd row = amps;
    for (int ka = 0; ka <= n_atoms; ++ka) {
        if (ka > 0) row = apply_a(row);
        if (row.squaredNorm() < 1e-300) break;
        Eigen::VectorXcd cell = row;
        for (int kb = 0; ka + kb <= n_atoms; ++kb) {
            if (kb > 0) cell = apply_b(cell);
            const double norm2 = cell.squaredNorm();
            if (norm2 < 1e-300) break;
            total += pmf(n_atoms, ka, p_a) * pmf(n_atoms, kb, p_b) * qfi_sz(cell);
        }
    }
    return total;
}

inline double f2_single_a(const Eigen::VectorXcd& amps, double p) {
    return f2_dual(amps, p, 0.0);
}

// Textbook mixed-state QFI on the full direct-sum space: assemble the global
// density matrix and the global (block-diagonal) S_z, diagonalize once, and
// evaluate 2 sum (l_i - l_j)^2 / (l_i + l_j) |<i|Sz|j>|^2.
inline double mixed_qfi_global(const std::vector<std::pair<int, Eigen::MatrixXcd>>& blocks) {
    Eigen::Index dim = 0;
    for (const auto& [sector, block] : blocks) dim += sector + 1;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::Index offset = 0;
    for (const auto& [sector, block] : blocks) {
        rho.block(offset, offset, sector + 1, sector + 1) = block;
        for (int n = 0; n <= sector; ++n) {
            sz(offset + n, offset + n) = double(n) - double(sector) / 2.0;
        }
        offset += sector + 1;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho);
    const Eigen::VectorXd& lambda = solver.eigenvalues();
    const Eigen::MatrixXcd g = solver.eigenvectors().adjoint() * sz * solver.eigenvectors();
    double total = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double sum = lambda(i) + lambda(j);
            if (sum < 1e-14) continue;
            const double diff = lambda(i) - lambda(j);
            total += 2.0 * diff * diff / sum * std::norm(g(i, j));
        }
    }
    return total;
}

inline qfilab::fock::PureState random_state(int atom_count, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd amps(atom_count + 1);
    for (int n = 0; n <= atom_count; ++n) {
        amps(n) = std::complex<double>(gauss(rng), gauss(rng));
    }
    return qfilab::fock::normalized_state(atom_count, std::move(amps));
}

} // namespace oracle
