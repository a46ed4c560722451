#include "skyrmion/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "skyrmion/artifacts.hpp"
#include "skyrmion/errors.hpp"

namespace skyrmion {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string field_tag(double B) { return fmt::format("B{:.2f}", B); }

// Output stream that fails loudly.
class CsvFile {
  public:
    explicit CsvFile(const fs::path& path) : path_(path), os_(path) {
        if (!os_) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
    }
    std::ofstream& stream() { return os_; }
    ~CsvFile() noexcept(false) {
        os_.close();
        if (!os_ && std::uncaught_exceptions() == 0) {
            throw std::runtime_error(fmt::format("writing '{}' failed", path_.string()));
        }
    }

  private:
    fs::path path_;
    std::ofstream os_;
};

std::map<std::string, std::string> read_sidecar(const fs::path& path) {
    std::map<std::string, std::string> kv;
    std::ifstream is(path);
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

double to_double(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("corrupt cache sidecar");
    return v;
}

void write_atomically(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".partial";
    {
        std::ofstream os(tmp);
        os << text;
        if (!os) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
    }
    fs::rename(tmp, path);
}

void write_map_files(ExperimentRunner& run, const std::string& stem, const StructureFactorEntry& entry,
                     const Eigen::MatrixXd& corr, int resolution, const std::string& title) {
    {
        CsvFile f(run.output_path(stem + "_grid.csv"));
        write_structure_factor_csv(f.stream(), entry.grid);
    }
    {
        CsvFile f(run.output_path(stem + "_allowed.csv"));
        write_structure_factor_csv(f.stream(), entry.allowed);
    }
    {
        CsvFile f(run.output_path(stem + "_correlation.csv"));
        write_correlation_csv(f.stream(), corr);
    }
    {
        CsvFile f(run.output_path(stem + ".svg"));
        write_heatmap_svg(f.stream(), entry.grid.q_points, entry.grid.values, resolution, title);
    }
}

StructureFactorEntry structure_factor_entry(const std::string& name, const Eigen::MatrixXd& corr, const Cluster& c,
                                            const std::vector<Vec2>& grid) {
    return {name, structure_factor(corr, c, c.allowed_momenta()), structure_factor(corr, c, grid)};
}

}  // namespace

ExperimentRunner::ExperimentRunner(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    cluster_ = std::make_shared<const Cluster>(cfg_.cluster_a, cfg_.cluster_b);
    fs::create_directories(cfg_.output_dir);
    fs::create_directories(cfg_.effective_cache_dir());
}

std::size_t ExperimentRunner::measurement_site() const {
    return cfg_.measurement_site.value_or(cluster_->center_site());
}

const Hamiltonian& ExperimentRunner::hamiltonian(double B) {
    auto& slot = hamiltonians_[B];
    if (!slot) slot = std::make_unique<Hamiltonian>(cluster_, Couplings{cfg_.J, cfg_.D, B});
    return *slot;
}

std::string ExperimentRunner::cache_key(double B) const {
    return fmt::format("a={};b={};J={};D={};B={};residual_tol={};seed={:#x};format={}", cfg_.cluster_a, cfg_.cluster_b,
                       num(cfg_.J), num(cfg_.D), num(B), num(cfg_.residual_tol), kLanczosSeed, kCheckpointVersion);
}

GroundStateRecord ExperimentRunner::ground_state(double B) {
    const std::string key = cache_key(B);
    const std::string stem = "gs_" + sha256_string(key).substr(0, 16);
    const fs::path dir = cfg_.effective_cache_dir();
    const fs::path state_path = dir / (stem + ".qspn");
    const fs::path meta_path = dir / (stem + ".meta");

    GroundStateRecord rec;
    rec.B = B;
    if (fs::exists(state_path) && fs::exists(meta_path)) {
        const auto kv = read_sidecar(meta_path);
        if (kv.count("key") && kv.at("key") == key) {
            rec.state = read_checkpoint(state_path);
            rec.energy = to_double(kv.at("energy"));
            if (kv.count("next_energy")) rec.next_energy = to_double(kv.at("next_energy"));
            rec.residual = to_double(kv.at("residual"));
            rec.matvecs = static_cast<std::size_t>(to_double(kv.at("matvecs")));
            rec.from_cache = true;
        }
    }
    if (!rec.from_cache) {
        SolverOptions opts;
        opts.degeneracy_tol = cfg_.degeneracy_tol;
        EigenResult r = skyrmion::ground_state(hamiltonian(B), cfg_.residual_tol, opts);
        r.require_converged(fmt::format("ground state at B = {}", B).c_str());
        rec.energy = r.energies[0];
        rec.next_energy = r.next_energy;
        rec.residual = r.residuals[0];
        rec.matvecs = r.matvecs;
        rec.state = std::move(r.states[0]);
        write_checkpoint(state_path, rec.state);
        std::string meta = fmt::format("key={}\nenergy={}\nresidual={}\nmatvecs={}\n", key, num(rec.energy),
                                       num(rec.residual), rec.matvecs);
        if (rec.next_energy) meta += fmt::format("next_energy={}\n", num(*rec.next_energy));
        write_atomically(meta_path, meta);
    }
    rec.degenerate = rec.next_energy && *rec.next_energy - rec.energy < cfg_.degeneracy_tol;
    return rec;
}

SpectralBounds ExperimentRunner::bounds(double B) {
    const std::string key = cache_key(B);
    const fs::path path = cfg_.effective_cache_dir() / ("bounds_" + sha256_string(key).substr(0, 16) + ".meta");
    if (fs::exists(path)) {
        const auto kv = read_sidecar(path);
        if (kv.count("key") && kv.at("key") == key) return {to_double(kv.at("e_min")), to_double(kv.at("e_max"))};
    }
    const SpectralBounds b = extremal_eigenvalues(hamiltonian(B), cfg_.residual_tol);
    write_atomically(path, fmt::format("key={}\ne_min={}\ne_max={}\n", key, num(b.e_min), num(b.e_max)));
    return b;
}

SkyrmionReference ExperimentRunner::reference() {
    SkyrmionReference ref;
    ref.h = &hamiltonian(cfg_.B);
    ref.gs = ground_state(cfg_.B);
    if (ref.gs.degenerate) {
        throw PhysicsError(fmt::format("ground state at B = {} is degenerate (E1 - E0 = {:.3e} < {:.1e}); observables "
                                       "of a degenerate manifold are basis dependent",
                                       cfg_.B, *ref.gs.next_energy - ref.gs.energy, cfg_.degeneracy_tol));
    }
    ref.q_gs = chirality(*cluster_, ref.gs.state);
    if (std::abs(ref.q_gs) < 1e-12) {
        throw PhysicsError(fmt::format("ground state at B = {} has no chirality to normalize by", cfg_.B));
    }
    ref.bounds = bounds(cfg_.B);
    ref.propagator = std::make_unique<ChebyshevPropagator>(*ref.h, ref.bounds, cfg_.propagator_dt, cfg_.tail_tol);
    note("reference.B", num(cfg_.B));
    note("reference.energy", num(ref.gs.energy));
    if (ref.gs.next_energy) note("reference.next_energy", num(*ref.gs.next_energy));
    note("reference.q_gs", num(ref.q_gs));
    note("reference.spectral_min", num(ref.bounds.e_min));
    note("reference.spectral_max", num(ref.bounds.e_max));
    note("reference.chebyshev_order", std::to_string(ref.propagator->order()));
    note("reference.measurement_site", std::to_string(measurement_site()));
    return ref;
}

fs::path ExperimentRunner::output_path(const std::string& name) const {
    const fs::path p = cfg_.output_dir / name;
    fs::create_directories(p.parent_path());
    return p;
}

void ExperimentRunner::note(const std::string& key, const std::string& value) {
    for (auto& [k, v] : notes_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    notes_.emplace_back(key, value);
}

void ExperimentRunner::finish(const std::string& pipeline) {
    std::vector<std::pair<std::string, std::string>> entries = {
        {"engine_version", kEngineVersion},
        {"pipeline", pipeline},
        {"cluster.n_sites", std::to_string(cluster_->n_sites())},
        {"solver.seed", fmt::format("{:#x}", kLanczosSeed)},
    };
    for (const auto& [k, v] : cfg_.snapshot()) entries.emplace_back("config." + k, v);
    for (const auto& kv : notes_) entries.push_back(kv);
    write_manifest(cfg_.output_dir, entries);
}

std::vector<double> field_values(const ExperimentConfig& cfg) {
    const auto n = static_cast<std::size_t>(std::floor((cfg.field_max - cfg.field_min) / cfg.field_step + 1e-9)) + 1;
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(std::round((cfg.field_min + static_cast<double>(i) * cfg.field_step) * 1e12) / 1e12);
    }
    return out;
}

std::pair<std::size_t, std::size_t> chirality_window(const std::vector<double>& q) {
    if (q.empty()) throw std::invalid_argument("empty chirality scan");
    std::size_t imax = 0;
    for (std::size_t i = 1; i < q.size(); ++i) {
        if (std::abs(q[i]) > std::abs(q[imax])) imax = i;
    }
    const double threshold = 0.5 * std::abs(q[imax]);
    std::size_t lo = imax;
    std::size_t hi = imax;
    while (lo > 0 && std::abs(q[lo - 1]) >= threshold) --lo;
    while (hi + 1 < q.size() && std::abs(q[hi + 1]) >= threshold) ++hi;
    return {lo, hi};
}

PhaseDiagramResult run_phase_diagram(ExperimentRunner& run) {
    const auto& cfg = run.config();
    PhaseDiagramResult result;
    std::vector<double> qs;
    for (double B : field_values(cfg)) {
        const GroundStateRecord gs = run.ground_state(B);
        PhaseDiagramRow row{};
        row.B = B;
        row.q_raw = chirality(run.cluster(), gs.state);
        row.mean_sz = mean_magnetization(gs.state);
        row.energy = gs.energy;
        row.gap = gs.next_energy ? *gs.next_energy - gs.energy : std::numeric_limits<double>::quiet_NaN();
        row.degenerate = gs.degenerate;
        result.rows.push_back(row);
        qs.push_back(row.q_raw);
        std::clog << fmt::format("phase-diagram B={:.2f} E0={:.10f} Q={:.6f} Sz={:.6f}{}{}\n", B, gs.energy, row.q_raw,
                                 row.mean_sz, gs.degenerate ? " degenerate" : "", gs.from_cache ? " (cached)" : "");
    }
    double qmax = 0.0;
    for (double q : qs) qmax = std::max(qmax, std::abs(q));
    const auto [lo, hi] = chirality_window(qs);
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        auto& row = result.rows[i];
        row.q_normalized = qmax > 0.0 ? row.q_raw / qmax : 0.0;
        row.in_window = qmax > 0.0 && i >= lo && i <= hi;
    }
    if (qmax > 0.0) {
        result.window = std::pair{result.rows[lo].B, result.rows[hi].B};
        run.note("phase_diagram.window_lower", num(result.rows[lo].B));
        run.note("phase_diagram.window_upper", num(result.rows[hi].B));
    }
    {
        CsvFile f(run.output_path("phase_diagram.csv"));
        fmt::print(f.stream(), "B,Q_raw,Q_normalized_to_max,mean_Sz,energy,gap,degenerate_flag,in_window\n");
        for (const auto& r : result.rows) {
            fmt::print(f.stream(), "{},{},{},{},{},{},{},{}\n", num(r.B), num(r.q_raw), num(r.q_normalized), num(r.mean_sz),
                       num(r.energy), num(r.gap), r.degenerate ? 1 : 0, r.in_window ? 1 : 0);
        }
    }
    return result;
}

QuenchResult run_quench(ExperimentRunner& run) {
    const auto& cfg = run.config();
    const SkyrmionReference ref = run.reference();
    const std::size_t site = run.measurement_site();
    const BranchEnsemble e = measure(BranchEnsemble::from_state(ref.gs.state, site), site);
    {
        CsvFile f(run.output_path("quench_branches.csv"));
        write_branch_csv(f.stream(), e, *ref.h);
    }
    for (Outcome o : {Outcome::up, Outcome::down}) {
        const bool present = std::any_of(e.branches.begin(), e.branches.end(),
                                         [o](const Branch& b) { return b.outcomes.back() == o; });
        if (!present) run.note(fmt::format("quench.skipped_outcome.{}", o == Outcome::up ? "u" : "d"), "zero probability");
    }

    QuenchResult result;
    result.q_gs = ref.q_gs;
    const Cluster& c = run.cluster();
    for (const Branch& b : e.branches) {
        std::clog << fmt::format("quench: evolving branch {} (p = {:.6f}) to t = {}\n", b.label(), b.probability, cfg.t_max);
        const double q_gs = ref.q_gs;
        const std::vector<Probe> probes = {
            {"Q_over_QGS", [&c, q_gs](const StateVector& s) { return chirality(c, s) / q_gs; }},
            {"overlap", [&b](const StateVector& s) { return overlap(b.anchor_state, s); }},
        };
        const TimeSeries ts = evolve_trace(*ref.propagator, b.state, cfg.t_max, cfg.sample_every, probes);
        result.branches.push_back({b.label(), b.probability, ts.times, ts.values[0], ts.values[1]});
        CsvFile f(run.output_path("quench_" + b.label() + ".csv"));
        fmt::print(f.stream(), "time,Q_over_QGS,overlap\n");
        for (std::size_t i = 0; i < ts.times.size(); ++i) {
            fmt::print(f.stream(), "{},{},{}\n", num(ts.times[i]), num(ts.values[0][i]), num(ts.values[1][i]));
        }
    }
    QuenchSeries& ens = result.ensemble;
    ens.label = "ensemble";
    ens.probability = 1.0;
    ens.times = result.branches.front().times;
    ens.q_over_qgs.assign(ens.times.size(), 0.0);
    ens.overlap.assign(ens.times.size(), 0.0);
    for (const auto& s : result.branches) {
        for (std::size_t i = 0; i < ens.times.size(); ++i) {
            ens.q_over_qgs[i] += s.probability * s.q_over_qgs[i];
            ens.overlap[i] += s.probability * s.overlap[i];
        }
    }
    {
        CsvFile f(run.output_path("quench_ensemble.csv"));
        fmt::print(f.stream(), "time,Q_over_QGS,weighted_overlap\n");
        for (std::size_t i = 0; i < ens.times.size(); ++i) {
            fmt::print(f.stream(), "{},{},{}\n", num(ens.times[i]), num(ens.q_over_qgs[i]), num(ens.overlap[i]));
        }
    }
    return result;
}

ZenoScanResult run_zeno_scan(ExperimentRunner& run) {
    const auto& cfg = run.config();
    const SkyrmionReference ref = run.reference();
    const std::size_t site = run.measurement_site();
    const Cluster& c = run.cluster();
    ZenoScanResult result;
    result.q_gs = ref.q_gs;
    const BranchEnsemble first = measure(BranchEnsemble::from_state(ref.gs.state, site), site);
    const double q_first = chirality(c, first) / ref.q_gs;
    for (double dt : cfg.dt_list) {
        result.rows.push_back({dt, 1, q_first, first.branches.size()});
        BranchEnsemble e = first;
        for (int m = 2; m <= cfg.n_measurements; ++m) {
            evolve_ensemble_in_place(e, *ref.propagator, dt);
            e = measure(e, site);
            result.rows.push_back({dt, m, chirality(c, e) / ref.q_gs, e.branches.size()});
        }
        std::clog << fmt::format("zeno-scan dt={} Q/QGS after {} measurements = {:.6f}\n", dt, cfg.n_measurements,
                                 result.rows.back().q_over_qgs);
    }
    CsvFile f(run.output_path("zeno_scan.csv"));
    fmt::print(f.stream(), "dt,n_measurements,Q_over_QGS_after_last,branches\n");
    for (const auto& r : result.rows) {
        fmt::print(f.stream(), "{},{},{},{}\n", num(r.dt), r.m, num(r.q_over_qgs), r.branches);
    }
    return result;
}

ZenoTraceResult run_zeno_trace(ExperimentRunner& run) {
    const auto& cfg = run.config();
    const SkyrmionReference ref = run.reference();
    const std::size_t site = run.measurement_site();
    const Cluster& c = run.cluster();
    const double dt = cfg.trace_dt;
    const auto samples = std::max<long>(1, std::lround(dt / cfg.trace_sample_every));
    const double h = dt / static_cast<double>(samples);

    ZenoTraceResult result;
    result.q_gs = ref.q_gs;
    result.dt = dt;
    auto record = [&](const BranchEnsemble& e, double t, int m) {
        result.rows.push_back({t, chirality(c, e) / ref.q_gs, weighted_overlap(e), m});
    };

    BranchEnsemble e = measure(BranchEnsemble::from_state(ref.gs.state, site), site);
    record(e, 0.0, 1);
    for (int k = 0; k < cfg.n_measurements; ++k) {
        for (long s = 1; s <= samples; ++s) {
            evolve_ensemble_in_place(e, *ref.propagator, h);
            const double t = static_cast<double>(k * samples + s) * dt / static_cast<double>(samples);
            record(e, t, k + 1);
        }
        if (k + 1 < cfg.n_measurements) {
            e = measure(e, site);
            record(e, static_cast<double>(k + 1) * dt, k + 2);
        }
        std::clog << fmt::format("zeno-trace interval {} done, {} branches\n", k + 1, e.branches.size());
    }
    CsvFile f(run.output_path("zeno_trace.csv"));
    fmt::print(f.stream(), "time,Q_over_QGS,weighted_overlap,measurements\n");
    for (const auto& r : result.rows) {
        fmt::print(f.stream(), "{},{},{},{}\n", num(r.time), num(r.q_over_qgs), num(r.weighted_overlap), r.measurements);
    }
    return result;
}

SpectrumResult run_spectrum(ExperimentRunner& run) {
    const auto& cfg = run.config();
    const SkyrmionReference ref = run.reference();
    const std::size_t site = run.measurement_site();
    SpectrumResult result;

    SolverOptions opts;
    opts.degeneracy_tol = cfg.degeneracy_tol;
    std::clog << fmt::format("spectrum: {} lowest levels at B = {}\n", cfg.spectrum_k, cfg.B);
    result.levels = low_spectrum(*ref.h, cfg.spectrum_k, cfg.residual_tol, opts);
    result.levels.require_converged("low spectrum");
    {
        CsvFile f(run.output_path("spectrum_levels.csv"));
        write_spectrum_csv(f.stream(), result.levels);
    }

    const OperatorApply hop = ref.h->as_operator();
    BranchEnsemble e = BranchEnsemble::from_state(ref.gs.state, site);
    result.mean_energy.push_back(ensemble_expectation(e, hop));
    result.branches.push_back({0, "-", 1.0, result.mean_energy.back()});
    for (int m = 1; m <= cfg.n_measurements; ++m) {
        if (m > 1) evolve_ensemble_in_place(e, *ref.propagator, cfg.spectrum_dt);
        e = measure(e, site);
        double mean = 0.0;
        for (const Branch& b : e.branches) {
            const double energy = expectation(hop, b.state);
            mean += b.probability * energy;
            result.branches.push_back({m, b.label(), b.probability, energy});
        }
        result.mean_energy.push_back(mean);
    }

    const auto& lv = result.levels.energies;
    std::size_t widest = 0;
    for (std::size_t i = 1; i + 1 < lv.size(); ++i) {
        if (lv[i + 1] - lv[i] > lv[widest + 1] - lv[widest]) widest = i;
    }
    result.n_low = lv.size() > 1 ? widest + 1 : lv.size();
    result.gap_lower = lv.size() > 1 ? lv[widest] : lv.front();
    result.gap_upper = lv.size() > 1 ? lv[widest + 1] : lv.front();
    run.note("spectrum.n_low", std::to_string(result.n_low));
    run.note("spectrum.gap_lower", num(result.gap_lower));
    run.note("spectrum.gap_upper", num(result.gap_upper));

    {
        CsvFile f(run.output_path("spectrum_measurements.csv"));
        fmt::print(f.stream(), "m,ensemble_mean_energy,outcome_sequence,probability,branch_energy\n");
        for (const auto& b : result.branches) {
            fmt::print(f.stream(), "{},{},{},{},{}\n", b.m, num(result.mean_energy[static_cast<std::size_t>(b.m)]), b.label,
                       num(b.probability), num(b.energy));
        }
    }
    {
        CsvFile f(run.output_path("spectrum_gap.csv"));
        fmt::print(f.stream(), "m,mean_energy,n_low,gap_lower,gap_upper,inside_gap,non_decreasing\n");
        for (std::size_t m = 0; m < result.mean_energy.size(); ++m) {
            const double en = result.mean_energy[m];
            const bool inside = en > result.gap_lower && en < result.gap_upper;
            const bool non_decreasing = m == 0 || en >= result.mean_energy[m - 1] - 1e-12;
            fmt::print(f.stream(), "{},{},{},{},{},{},{}\n", m, num(en), result.n_low, num(result.gap_lower),
                       num(result.gap_upper), inside ? 1 : 0, non_decreasing ? 1 : 0);
            if (!non_decreasing) run.note(fmt::format("spectrum.decreasing_mean_energy.m{}", m), num(en));
        }
    }
    return result;
}

StructureFactorResult run_structure_factor(ExperimentRunner& run) {
    const auto& cfg = run.config();
    const Cluster& c = run.cluster();
    const std::vector<Vec2> grid = momentum_grid(c, cfg.q_grid);
    StructureFactorResult result;

    for (double B : cfg.sf_fields) {
        const GroundStateRecord gs = run.ground_state(B);
        if (gs.degenerate) run.note("structure_factor.degenerate." + field_tag(B), "1");
        const Eigen::MatrixXd corr = correlation_matrix(gs.state);
        const std::string name = "sf_gs_" + field_tag(B);
        result.ground_states.push_back(structure_factor_entry(name, corr, c, grid));
        write_map_files(run, name, result.ground_states.back(), corr, cfg.q_grid,
                        fmt::format("ground state X_q, B = {:.2f}", B));
        std::clog << fmt::format("structure-factor ground state B={:.2f} done\n", B);
    }

    const SkyrmionReference ref = run.reference();
    const std::size_t site = run.measurement_site();
    BranchEnsemble e = BranchEnsemble::from_state(ref.gs.state, site);
    for (int m = 0; m <= cfg.n_measurements; ++m) {
        if (m > 1) evolve_ensemble_in_place(e, *ref.propagator, cfg.sf_dt);
        if (m > 0) e = measure(e, site);
        const Eigen::MatrixXd corr = correlation_matrix(e);
        const std::string name = fmt::format("sf_ensemble_m{}", m);
        result.ensemble.push_back(structure_factor_entry(name, corr, c, grid));
        write_map_files(run, name, result.ensemble.back(), corr, cfg.q_grid,
                        fmt::format("ensemble X_q after {} measurements, B = {:.2f}", m, cfg.B));
    }
    return result;
}

}  // namespace skyrmion
