#pragma once

#include <Eigen/Dense>
#include <vector>

namespace netfail {

struct PlantModel {
    Eigen::MatrixXd A;  // n x n
    Eigen::MatrixXd B;  // n x m
    Eigen::MatrixXd K;  // m x n

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    Eigen::MatrixXd closed_loop() const { return A + B * K; }
    void validate() const;  // dimension consistency
};

double spectral_radius(const Eigen::MatrixXd& M);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. Sweeps
// until the off-diagonal Frobenius norm falls below tol relative to the
// matrix scale, at most max_sweeps sweeps.
std::vector<double> symmetric_eigenvalues(Eigen::MatrixXd S, double tol = 1e-12,
                                          int max_sweeps = 100);

// Solves Acl' P Acl - P = -Q for the unique P by summing the convergent
// series sum_k (Acl')^k Q Acl^k; terms are added until the increment's
// largest entry falls below 1e-14. Requires spectral radius(Acl) < 1.
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& Acl, const Eigen::MatrixXd& Q);

// Smallest beta with Acl' P Acl <= beta P and smallest admissible
// phi >= 1 with A' P A <= phi P: the largest generalized eigenvalues of
// the corresponding pencils, computed through the Cholesky similarity
// transform. Throws if P is not positive definite.
std::pair<double, double> extract_beta_phi(const Eigen::MatrixXd& P, const PlantModel& plant);

struct StabilityCertificate {
    Eigen::MatrixXd P;  // normalized to unit max-abs entry
    double beta = 0.0;
    double phi = 1.0;
    double rho_star = 0.0;
};

// Failure-ratio threshold implied by (beta, phi): the largest rho with
// (1-rho) ln beta + rho ln phi < 0. Equals 1 when phi = 1.
double rho_star_from(double beta, double phi);

// Maximizes rho_star over positive definite P: seeds P from the
// discrete Lyapunov equation with Q = I, then runs a derivative-free
// coordinate search over the entries of the Cholesky factor (geometric
// steps, halved on failure), restarted from deterministically perturbed
// seeds. Deterministic for a fixed budget; more restarts never lower the
// result.
StabilityCertificate max_tolerable_rho(const PlantModel& plant, int search_budget);

enum class Verdict { certified, not_certified };

struct StabilityDecision {
    Verdict verdict = Verdict::not_certified;
    double rho = 0.0;
    StabilityCertificate certificate;
};

// Certified iff rho < rho_star of the best found certificate. A negative
// verdict is not an instability proof.
StabilityDecision check_stability(const PlantModel& plant, double rho, int search_budget);

}  // namespace netfail
