#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skyrmion/hilbert.hpp"

namespace skyrmion {

class ChebyshevPropagator;

enum class Outcome { down, up };

/// Outcomes below this probability are treated as impossible.
inline constexpr double kZeroProbability = 1e-12;

struct Projection {
    StateVector state;  // normalized
    double probability;
};

/// Projects site onto the given S^z eigenstate and renormalizes. Returns
/// nullopt for an outcome with probability below kZeroProbability. A state
/// already inside the outcome subspace is returned unchanged with p = 1.
std::optional<Projection> project(const StateVector& psi, std::size_t site, Outcome outcome);

/// (p_down, p_up) from a single pass; they sum to the squared norm.
std::pair<double, double> outcome_probabilities(const StateVector& psi, std::size_t site);

struct Branch {
    std::vector<Outcome> outcomes;
    double probability = 1.0;  // product of the outcome probabilities along the branch
    StateVector state;
    StateVector anchor_state;  // state right after the latest projection

    /// Outcome sequence as text, e.g. "udd"; empty before any measurement.
    std::string label() const;
};

struct BranchEnsemble {
    std::vector<Branch> branches;
    std::size_t site = 0;

    /// One branch holding psi, anchored at psi.
    static BranchEnsemble from_state(const StateVector& psi, std::size_t site);

    double total_probability() const;
};

/// Splits every branch on the S^z outcome at `site`. Throws PhysicsError if
/// the pruned probability exceeds 1e-10 or the total drifts from 1.
BranchEnsemble measure(const BranchEnsemble& e, std::size_t site);

/// Evolves every branch state; probabilities and anchors are untouched.
BranchEnsemble evolve_ensemble(const BranchEnsemble& e, const ChebyshevPropagator& p, double t);
void evolve_ensemble_in_place(BranchEnsemble& e, const ChebyshevPropagator& p, double t);

/// sum_gamma p_gamma <psi_gamma|O|psi_gamma>
double ensemble_expectation(const BranchEnsemble& e, const OperatorApply& op);

/// CSV: outcome_sequence,probability,energy,chirality
void write_branch_csv(std::ostream& os, const BranchEnsemble& e, const Hamiltonian& h);

}  // namespace skyrmion
