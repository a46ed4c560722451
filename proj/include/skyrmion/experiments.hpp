#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skyrmion/config.hpp"
#include "skyrmion/hilbert.hpp"
#include "skyrmion/lattice.hpp"
#include "skyrmion/measurement.hpp"
#include "skyrmion/observables.hpp"
#include "skyrmion/propagator.hpp"
#include "skyrmion/solver.hpp"

namespace skyrmion {

struct GroundStateRecord {
    double B = 0.0;
    double energy = 0.0;
    std::optional<double> next_energy;
    bool degenerate = false;
    double residual = 0.0;
    std::size_t matvecs = 0;
    bool from_cache = false;
    StateVector state;
};

/// Ground state, chirality reference and propagator at the configured field.
struct SkyrmionReference {
    const Hamiltonian* h = nullptr;
    GroundStateRecord gs;
    double q_gs = 0.0;
    SpectralBounds bounds{};
    std::unique_ptr<ChebyshevPropagator> propagator;
};

/// Shared state of one pipeline run: cluster, Hamiltonians, the on-disk
/// ground-state cache, and the list of manifest entries.
class ExperimentRunner {
  public:
    explicit ExperimentRunner(ExperimentConfig cfg);

    const ExperimentConfig& config() const { return cfg_; }
    const Cluster& cluster() const { return *cluster_; }
    std::size_t measurement_site() const;

    const Hamiltonian& hamiltonian(double B);
    /// Solved once per field and cached as a QSPN checkpoint plus a sidecar.
    GroundStateRecord ground_state(double B);
    SpectralBounds bounds(double B);

    /// Throws PhysicsError when the ground state at cfg.B is degenerate or
    /// has zero chirality.
    SkyrmionReference reference();

    /// Path inside the output directory; parent directories are created.
    std::filesystem::path output_path(const std::string& name) const;
    void note(const std::string& key, const std::string& value);

    /// Writes the manifest. Call once, after every output is closed.
    void finish(const std::string& pipeline);

  private:
    std::string cache_key(double B) const;

    ExperimentConfig cfg_;
    std::shared_ptr<const Cluster> cluster_;
    std::map<double, std::unique_ptr<Hamiltonian>> hamiltonians_;
    std::vector<std::pair<std::string, std::string>> notes_;
};

struct PhaseDiagramRow {
    double B;
    double q_raw;
    double q_normalized;  // Q / max|Q| over the scan
    double mean_sz;
    double energy;
    double gap;  // E1 - E0, NaN when unresolved
    bool degenerate;
    bool in_window;
};

struct PhaseDiagramResult {
    std::vector<PhaseDiagramRow> rows;
    std::optional<std::pair<double, double>> window;
};

struct QuenchSeries {
    std::string label;
    double probability;
    std::vector<double> times;
    std::vector<double> q_over_qgs;
    std::vector<double> overlap;
};

struct QuenchResult {
    double q_gs;
    std::vector<QuenchSeries> branches;
    QuenchSeries ensemble;  // probability-weighted Q and weighted overlap
};

struct ZenoScanRow {
    double dt;
    int m;
    double q_over_qgs;
    std::size_t branches;
};

struct ZenoScanResult {
    double q_gs;
    std::vector<ZenoScanRow> rows;
};

struct ZenoTraceRow {
    double time;
    double q_over_qgs;
    double weighted_overlap;
    int measurements;  // performed so far, including one at this instant
};

struct ZenoTraceResult {
    double q_gs;
    double dt;
    std::vector<ZenoTraceRow> rows;
};

struct SpectrumBranchEnergy {
    int m;
    std::string label;
    double probability;
    double energy;
};

struct SpectrumResult {
    EigenResult levels;
    std::vector<double> mean_energy;  // index m = 0..n_measurements
    std::vector<SpectrumBranchEnergy> branches;
    std::size_t n_low;  // levels below the largest spacing
    double gap_lower;
    double gap_upper;
};

struct StructureFactorEntry {
    std::string name;
    StructureFactorMap allowed;
    StructureFactorMap grid;
};

struct StructureFactorResult {
    std::vector<StructureFactorEntry> ground_states;  // one per sf_fields entry
    std::vector<StructureFactorEntry> ensemble;       // m = 0..n_measurements at cfg.B
};

PhaseDiagramResult run_phase_diagram(ExperimentRunner& run);
QuenchResult run_quench(ExperimentRunner& run);
ZenoScanResult run_zeno_scan(ExperimentRunner& run);
ZenoTraceResult run_zeno_trace(ExperimentRunner& run);
SpectrumResult run_spectrum(ExperimentRunner& run);
StructureFactorResult run_structure_factor(ExperimentRunner& run);

/// Field values of the configured scan, rounded to 1e-12.
std::vector<double> field_values(const ExperimentConfig& cfg);

/// Contiguous run of rows around the largest |Q| with |Q| >= 0.5 max|Q|.
std::pair<std::size_t, std::size_t> chirality_window(const std::vector<double>& q);

}  // namespace skyrmion
