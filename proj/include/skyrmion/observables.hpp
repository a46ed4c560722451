#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "skyrmion/hilbert.hpp"
#include "skyrmion/lattice.hpp"
#include "skyrmion/measurement.hpp"

namespace skyrmion {

/// Q = (1/pi) sum over up plaquettes of <S_i . (S_j x S_k)>.
double chirality(const Cluster& c, const StateVector& psi);
/// Probability-weighted over branches.
double chirality(const Cluster& c, const BranchEnsemble& e);

/// Q and Q / Q_GS.
struct ChiralityValue {
    double raw;
    double normalized;
};
/// Throws PhysicsError when the reference is zero.
ChiralityValue normalize_chirality(double raw, double q_gs);

/// Chirality operator applied to a state, for expectation() and the dense
/// comparisons.
OperatorApply chirality_operator(const Cluster& c);

/// <S^z_i> for every site.
std::vector<double> magnetization(const StateVector& psi);
double mean_magnetization(const StateVector& psi);

/// |<anchor|current>|
double overlap(const StateVector& anchor, const StateVector& current);

/// sum_gamma p_gamma |<anchor_gamma|state_gamma>|
double weighted_overlap(const BranchEnsemble& e);

/// C_jk = <S^z_j S^z_k>
Eigen::MatrixXd correlation_matrix(const StateVector& psi);
Eigen::MatrixXd correlation_matrix(const BranchEnsemble& e);

struct StructureFactorMap {
    std::vector<Vec2> q_points;
    std::vector<double> values;
};

/// X_q = (1/N) sum_jk exp(i q . (r_j - r_k)) C_jk over minimum-image
/// displacements. Throws PhysicsError when the imaginary part exceeds 1e-8.
StructureFactorMap structure_factor(const Eigen::MatrixXd& corr, const Cluster& c, const std::vector<Vec2>& q_points);

/// CSV: qx,qy,intensity
void write_structure_factor_csv(std::ostream& os, const StructureFactorMap& m);
/// CSV: header "site,0,..,N-1", then one row per site.
void write_correlation_csv(std::ostream& os, const Eigen::MatrixXd& corr);

}  // namespace skyrmion
