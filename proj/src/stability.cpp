#include "netfail/stability.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "netfail/rng.hpp"

namespace netfail {

void PlantModel::validate() const {
    if (A.rows() == 0 || A.rows() != A.cols())
        throw std::invalid_argument("plant: A must be square and nonempty");
    if (B.rows() != A.rows() || B.cols() == 0)
        throw std::invalid_argument("plant: B must be n x m");
    if (K.rows() != B.cols() || K.cols() != A.rows())
        throw std::invalid_argument("plant: K must be m x n");
}

double spectral_radius(const Eigen::MatrixXd& M) {
    return M.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> symmetric_eigenvalues(Eigen::MatrixXd S, double tol, int max_sweeps) {
    const int n = static_cast<int>(S.rows());
    if (n == 1) return {S(0, 0)};
    const double scale = std::max(1.0, S.norm());
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += 2.0 * S(p, q) * S(p, q);
        if (std::sqrt(off) <= tol * scale) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (S(p, q) == 0.0) continue;
                double theta = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double skp = S(k, p), skq = S(k, q);
                    S(k, p) = c * skp - s * skq;
                    S(k, q) = s * skp + c * skq;
                }
                for (int k = 0; k < n; ++k) {
                    double spk = S(p, k), sqk = S(q, k);
                    S(p, k) = c * spk - s * sqk;
                    S(q, k) = s * spk + c * sqk;
                }
            }
        }
    }
    std::vector<double> eigs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) eigs[static_cast<std::size_t>(i)] = S(i, i);
    return eigs;
}

Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& Acl, const Eigen::MatrixXd& Q) {
    if (spectral_radius(Acl) >= 1.0)
        throw std::invalid_argument("lyapunov: closed loop is not contractive");
    Eigen::MatrixXd P = Q;
    Eigen::MatrixXd term = Q;
    const Eigen::MatrixXd At = Acl.transpose();
    for (long k = 0; k < 100000; ++k) {
        term = At * term * Acl;
        P += term;
        if (term.cwiseAbs().maxCoeff() < 1e-14) return P;
    }
    throw std::runtime_error("lyapunov: series did not converge within 1e5 terms");
}

namespace {

double max_generalized_eigenvalue(const Eigen::MatrixXd& L, const Eigen::MatrixXd& S) {
    // lambda_max of inv(L) S inv(L'); L lower triangular with positive diagonal.
    Eigen::MatrixXd X = L.triangularView<Eigen::Lower>().solve(S);
    Eigen::MatrixXd M = L.triangularView<Eigen::Lower>().solve(X.transpose());
    M = 0.5 * (M + M.transpose().eval());
    auto eigs = symmetric_eigenvalues(M);
    double best = eigs.front();
    for (double e : eigs) best = std::max(best, e);
    return best;
}

struct Objective {
    const Eigen::MatrixXd& A;
    const Eigen::MatrixXd& Acl;

    // rho_star of P = L L'; -inf when the factor is unusable.
    double operator()(const Eigen::MatrixXd& L, double* beta_out = nullptr,
                      double* phi_out = nullptr) const {
        const int n = static_cast<int>(L.rows());
        for (int i = 0; i < n; ++i)
            if (!(L(i, i) > 1e-150)) return -std::numeric_limits<double>::infinity();
        Eigen::MatrixXd P = L * L.transpose();
        double beta = max_generalized_eigenvalue(L, Acl.transpose() * P * Acl);
        double phi = std::max(1.0, max_generalized_eigenvalue(L, A.transpose() * P * A));
        if (!std::isfinite(beta) || !std::isfinite(phi))
            return -std::numeric_limits<double>::infinity();
        if (beta_out) *beta_out = beta;
        if (phi_out) *phi_out = phi;
        return rho_star_from(beta, phi);
    }
};

// Coordinate-wise geometric hill climb over the free entries of L.
double coordinate_search(Eigen::MatrixXd& L, const Objective& f) {
    const int n = static_cast<int>(L.rows());
    double best = f(L);
    double delta = 0.5;
    int sweeps = 0;
    while (delta > 1e-10 && sweeps < 400) {
        bool improved = false;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                const double factors[4] = {1.0 + delta, 1.0 / (1.0 + delta), -(1.0 + delta),
                                           -1.0 / (1.0 + delta)};
                const int nf = (i == j) ? 2 : 4;  // diagonal stays positive
                for (int fi = 0; fi < nf; ++fi) {
                    Eigen::MatrixXd cand = L;
                    double v = L(i, j);
                    cand(i, j) = (v != 0.0) ? v * factors[fi]
                                            : (factors[fi] > 0.0 ? delta : -delta);
                    double val = f(cand);
                    if (val > best + 1e-15) {
                        best = val;
                        L = cand;
                        improved = true;
                    }
                }
            }
        }
        if (!improved) delta *= 0.5;
        ++sweeps;
    }
    return best;
}

}  // namespace

std::pair<double, double> extract_beta_phi(const Eigen::MatrixXd& P, const PlantModel& plant) {
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("extract_beta_phi: P is not positive definite");
    Eigen::MatrixXd L = llt.matrixL();
    const Eigen::MatrixXd Acl = plant.closed_loop();
    double beta = max_generalized_eigenvalue(L, Acl.transpose() * P * Acl);
    double phi = std::max(1.0, max_generalized_eigenvalue(L, plant.A.transpose() * P * plant.A));
    return {beta, phi};
}

double rho_star_from(double beta, double phi) {
    beta = std::min(std::max(beta, 1e-12), 1.0 - 1e-12);
    phi = std::max(phi, 1.0);
    const double num = -std::log(beta);
    return num / (std::log(phi) + num);
}

StabilityCertificate max_tolerable_rho(const PlantModel& plant, int search_budget) {
    plant.validate();
    const Eigen::MatrixXd Acl = plant.closed_loop();
    if (spectral_radius(Acl) >= 1.0)
        throw std::invalid_argument("max_tolerable_rho: spectral radius of A+BK must be < 1");
    if (search_budget < 1) search_budget = 1;

    const int n = plant.n();
    Eigen::MatrixXd P0 = solve_discrete_lyapunov(Acl, Eigen::MatrixXd::Identity(n, n));
    Eigen::LLT<Eigen::MatrixXd> llt(P0);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("max_tolerable_rho: Lyapunov seed not positive definite");
    const Eigen::MatrixXd L0 = llt.matrixL();

    Objective f{plant.A, Acl};
    Eigen::MatrixXd best_L = L0;
    double best = -std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < search_budget; ++restart) {
        Eigen::MatrixXd L = L0;
        if (restart > 0) {
            auto rng = substream(0x6e657466u, static_cast<std::uint64_t>(restart), "psearch");
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j <= i; ++j) {
                    double u = 2.0 * rng.next_double() - 1.0;
                    L(i, j) *= std::exp(u * std::log(3.0));
                    if (i != j && rng.next_double() < 0.25) L(i, j) = -L(i, j);
                }
            }
        }
        double val = coordinate_search(L, f);
        if (val > best) {
            best = val;
            best_L = L;
        }
    }

    StabilityCertificate cert;
    Eigen::MatrixXd P = best_L * best_L.transpose();
    P /= P.cwiseAbs().maxCoeff();
    P = 0.5 * (P + P.transpose().eval());
    cert.P = P;
    auto [beta, phi] = extract_beta_phi(P, plant);
    cert.beta = std::min(std::max(beta, 1e-12), 1.0 - 1e-12);
    cert.phi = std::max(phi, 1.0);
    cert.rho_star = rho_star_from(cert.beta, cert.phi);
    return cert;
}

StabilityDecision check_stability(const PlantModel& plant, double rho, int search_budget) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::invalid_argument("check_stability: rho must lie in [0,1]");
    StabilityDecision d;
    d.rho = rho;
    d.certificate = max_tolerable_rho(plant, search_budget);
    d.verdict = rho < d.certificate.rho_star ? Verdict::certified : Verdict::not_certified;
    return d;
}

}  // namespace netfail
