#pragma once

#include <array>
#include <atomic>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hqc/eigen.hpp"
#include "hqc/lattice.hpp"
#include "hqc/observables.hpp"

namespace hqc {

struct Range {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    static Range single(double v) { return {v, v, 1.0}; }
    // Inclusive grid start + k*step, k = 0..round((stop-start)/step).
    std::vector<double> values() const;
    nlohmann::json to_json() const;
    static Range from_json(const nlohmann::json& j);
};

struct SizeSpec {
    int Lx = 20;
    int Ly = 20;
    bool operator==(const SizeSpec&) const = default;
};

struct ModelSpec {
    std::string kind = "haldane";  // haldane | two-chain | aah-chain
    double t1 = 1.0;               // NN hopping; the chain hopping t for chain kinds
    std::optional<double> t2;      // required for haldane, never defaulted here
    double phi = 1.5707963267948966;
    double lambda = 1.0;
    int boundary_rows = 1;
    std::string chain_boundary = "periodic";
    std::optional<Rational> alpha;  // default quasi_alpha(L_x)
    int impurity_separation = 0;    // 0 = no impurities; gamma drives them otherwise
    int impurity_anchor = -1;       // -1 = L_x / 2
    bool domain_wall = false;       // gamma drives a gain/loss wall instead

    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);
};

inline const std::set<std::string> kKnownObservables = {
    "ipr", "tau", "beta", "fidelity", "gap", "max_abs_im", "max_abs_im_edge", "edge_density", "zeros"};

struct SweepConfig {
    int version = 1;
    ModelSpec model;
    Range V = Range::single(1.0);
    Range h = Range::single(0.0);
    Range gamma = Range::single(0.0);
    std::vector<SizeSpec> sizes{{20, 20}};
    StateSelector selector;
    TopologicalWindow window;
    std::set<std::string> observables = kKnownObservables;
    std::string output_dir = "out";
    int workers = 1;
    double npt_threshold = 0.9;
    double refine_step = 0.002;  // impurity scans: bisection resolution in gamma
    bool write_spectra = false;
    bool cache_points = true;

    nlohmann::json to_json() const;
    // Missing keys keep their defaults; malformed or unknown values throw ConfigError.
    static SweepConfig from_json(const nlohmann::json& j);
    void validate() const;
    // Hash of everything that changes results (output_dir and workers excluded).
    std::string hash() const;
    bool wants(const std::string& obs) const { return observables.count(obs) > 0; }
};

SweepConfig load_config(const std::filesystem::path& path);

// Builds the Hamiltonian for one grid point.
OperatorMatrix build_point(const ModelSpec& model, const SizeSpec& size, double V, double h, double gamma);
LatticeMap point_map(const ModelSpec& model, const SizeSpec& size);
Rational point_alpha(const ModelSpec& model, const SizeSpec& size);

struct SweepRecord {
    int Lx = 0;
    int Ly = 0;
    double V = 0.0;
    double h = 0.0;
    double gamma = 0.0;
    ObservableRecord obs;
    std::string selector;
    std::string meta_hash;
    bool ok = true;
    std::string error;
};

// Canonical order: Lx, Ly, V, gamma, h.
bool canonical_less(const SweepRecord& a, const SweepRecord& b);
void canonical_sort(std::vector<SweepRecord>& records);
std::vector<std::string> record_columns();
std::vector<std::string> record_row(const SweepRecord& r);
nlohmann::json record_json(const SweepRecord& r);
SweepRecord record_from_json(const nlohmann::json& j);

struct PointResult {
    SweepRecord record;
    CVector ground_edge;  // ground-state amplitudes on the boundary sites
    cplx Eg = 0.0;
    cplx Ef = 0.0;
    std::optional<Spectrum> spectrum;
    std::vector<double> edge_dens;  // per state, when vectors were formed
};

// Point-local observables. Curve quantities (fidelity, dEg_dh, npt) are nan/0.
PointResult evaluate_point(const SweepConfig& cfg, const SizeSpec& size, double V, double h, double gamma,
                           bool keep_spectrum = false);
ObservableRecord observe(const SweepConfig& cfg, const SizeSpec& size, double V, double h, double gamma);

// Fills fidelity, dEg_dh and npt along each h line of points sharing (size, V, gamma).
void assemble_curves(std::vector<PointResult>& points, double npt_threshold);

void request_cancel();
void reset_cancel();
bool cancel_requested();

// Runs task(i) for i in [0, n) on a bounded pool. Tasks not started after a
// cancel request are skipped; returns the number completed.
int parallel_for(int n, int workers, const std::function<void(int)>& task);

using ProgressFn = std::function<void(int done, int total)>;

struct SweepResult {
    std::vector<SweepRecord> records;
    std::vector<std::string> failures;
    bool complete = true;
    bool reused = false;  // outputs were current, nothing recomputed
    std::vector<std::string> files;
};

SweepResult run_phase_diagram(const SweepConfig& cfg, const ProgressFn& progress = {});

struct SizeScanRow {
    int Lx = 0;
    int Ly = 0;
    double h1 = std::numeric_limits<double>::quiet_NaN();
    double h2 = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> jump_points;
    int npt = 0;
    int n_im_zeros = 0;
    bool zeros_degenerate = false;
};

struct SizeScanResult {
    std::vector<SizeScanRow> rows;
    std::optional<LinearFit> h2_fit;   // log(Lx) = k*h2 + c  (slope k, intercept c)
    std::optional<LinearFit> npt_fit;  // NPT = slope*Lx + intercept
    SweepResult sweep;
};

SizeScanResult run_size_scan(const SweepConfig& cfg, const ProgressFn& progress = {});

struct ImpurityPoint {
    double gamma = 0.0;
    int Lx = 0;
    int Ly = 0;
    int n_axis = 0;  // eigenvalues with Re E = 0 (E -> -conj(E) singlets)
    double max_abs_im = 0.0;
    cplx top1 = 0.0;  // largest Im
    cplx top2 = 0.0;
    int pt_events = 0;  // cumulative events up to this gamma
};

struct ImpurityEvent {
    double gamma = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    int n_axis_before = 0;
    int n_axis_after = 0;
    bool breaking = true;  // pair joins the axis; false = pair leaves it
};

struct ImpurityScanResult {
    std::vector<ImpurityPoint> points;
    std::vector<ImpurityEvent> events;
    std::vector<std::string> failures;
    bool complete = true;
    std::vector<std::string> files;
};

int count_axis_states(const Spectrum& spec);
ImpurityScanResult run_impurity_scan(const SweepConfig& cfg, const ProgressFn& progress = {});

// IPR regions on a (V, h) grid: 0 below lo, 1 between, 2 above hi.
// Components are 4-connected on the grid.
struct RegionMap {
    std::vector<double> Vs;
    std::vector<double> hs;
    std::vector<std::vector<int>> labels;  // [iV][ih], -1 where no record
    std::array<int, 3> components{};
    bool three_contiguous = false;  // every label present, one component each
};
RegionMap classify_regions(const std::vector<SweepRecord>& records, double lo, double hi);

// Figure data: fig1b, fig2c, fig4d, fig4e, fig4f, fig6. Unknown id or
// records that do not span the figure's axes -> CoverageError.
std::vector<std::string> emit_plot_data(const std::vector<SweepRecord>& records, const std::string& figure_id,
                                        const std::filesystem::path& dir, bool svg = true);

}  // namespace hqc
