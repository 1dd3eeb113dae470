#include "hqc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "hqc/errors.hpp"
#include "hqc/io.hpp"

namespace hqc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kPointFormat = "hqc-point/1";

std::atomic<bool> g_cancel{false};

json num(double v) { return std::isfinite(v) ? json(v) : json(); }
double denum(const json& j) { return j.is_number() ? j.get<double>() : kNaN; }

json vec_json(const CVector& v) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        re.push_back(v[i].real());
        im.push_back(v[i].imag());
    }
    return {{"re", re}, {"im", im}};
}

CVector vec_from_json(const json& j) {
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    CVector v(static_cast<Eigen::Index>(re.size()));
    for (size_t i = 0; i < re.size(); ++i) v[static_cast<Eigen::Index>(i)] = cplx(re[i], im[i]);
    return v;
}

bool needs_all_vectors(const SweepConfig& cfg, bool keep_spectrum) {
    return keep_spectrum || cfg.selector.rule == SelectorRule::in_gap_edge ||
           cfg.selector.rule == SelectorRule::max_edge_density || cfg.wants("max_abs_im_edge") || cfg.wants("beta");
}

bool needs_ground_vector(const SweepConfig& cfg) {
    return cfg.wants("ipr") || cfg.wants("tau") || cfg.wants("fidelity") || cfg.wants("edge_density") ||
           cfg.wants("beta");
}

std::string point_key(const SweepConfig& cfg, const OperatorMatrix& H, bool keep_spectrum) {
    json j{{"format", kPointFormat},
           {"meta", H.meta.to_json()},
           {"selector", cfg.selector.to_json()},
           {"window", {cfg.window.gap_edge, cfg.window.ipr_cut}},
           {"observables", cfg.observables},
           {"all_vectors", needs_all_vectors(cfg, keep_spectrum)}};
    return sha256_hex(j.dump());
}

json obs_json(const ObservableRecord& o) {
    return {{"ipr_full", num(o.ipr_full)},     {"ipr_edge", num(o.ipr_edge)},
            {"tau", num(o.tau)},               {"beta_min_edge", num(o.beta_min_edge)},
            {"fidelity", num(o.fidelity)},     {"gap", num(o.gap)},
            {"dEg_dh", num(o.dEg_dh)},         {"max_abs_im", num(o.max_abs_im)},
            {"max_abs_im_edge", num(o.max_abs_im_edge)}, {"edge_density", num(o.edge_density)},
            {"npt", o.npt},                    {"n_im_zeros", o.n_im_zeros},
            {"eg_re", num(o.eg_re)},           {"eg_im", num(o.eg_im)}};
}

ObservableRecord obs_from_json(const json& j) {
    ObservableRecord o;
    o.ipr_full = denum(j.at("ipr_full"));
    o.ipr_edge = denum(j.at("ipr_edge"));
    o.tau = denum(j.at("tau"));
    o.beta_min_edge = denum(j.at("beta_min_edge"));
    o.fidelity = denum(j.at("fidelity"));
    o.gap = denum(j.at("gap"));
    o.dEg_dh = denum(j.at("dEg_dh"));
    o.max_abs_im = denum(j.at("max_abs_im"));
    o.max_abs_im_edge = denum(j.at("max_abs_im_edge"));
    o.edge_density = denum(j.at("edge_density"));
    o.npt = j.at("npt").get<int>();
    o.n_im_zeros = j.at("n_im_zeros").get<int>();
    o.eg_re = denum(j.at("eg_re"));
    o.eg_im = denum(j.at("eg_im"));
    return o;
}

PointResult compute_point(const SweepConfig& cfg, const SizeSpec& size, double V, double h, double gamma,
                          bool keep_spectrum, const OperatorMatrix& H) {
    const LatticeMap map = point_map(cfg.model, size);
    const auto boundary = map.boundary_sites();
    const bool all = needs_all_vectors(cfg, keep_spectrum);

    PointResult pr;
    SweepRecord& r = pr.record;
    r.Lx = size.Lx;
    r.Ly = size.Ly;
    r.V = V;
    r.h = h;
    r.gamma = gamma;
    r.selector = to_string(cfg.selector.rule);
    r.meta_hash = H.meta.hash();
    ObservableRecord& o = r.obs;
    o.fidelity = kNaN;
    o.dEg_dh = kNaN;

    Spectrum spec = all ? decompose(H) : eigenvalues_only(H.entries);
    std::vector<double> eiprs;
    if (all) {
        pr.edge_dens = edge_densities(spec, map);
        eiprs = edge_iprs(spec, map);
    }
    const int g = select_state(spec, cfg.selector, pr.edge_dens);
    pr.Eg = spec.eigenvalues[g];
    try {
        pr.Ef = spec.eigenvalues[first_excited(spec, cfg.selector, pr.edge_dens)];
    } catch (const SelectionError&) {
        pr.Ef = cplx(kNaN, kNaN);
    }
    o.eg_re = pr.Eg.real();
    o.eg_im = pr.Eg.imag();
    o.gap = std::abs(pr.Ef - pr.Eg);
    o.max_abs_im = max_abs_imag(spec);
    o.max_abs_im_edge = all ? max_abs_imag_window(spec, eiprs, cfg.window) : kNaN;

    const PotentialProfile profile(V, h, point_alpha(cfg.model, size), size.Lx);
    o.n_im_zeros = count_imag_zeros(profile).count;

    o.ipr_full = o.ipr_edge = o.tau = o.beta_min_edge = o.edge_density = kNaN;
    if (all || needs_ground_vector(cfg)) {
        const CVector psi = all ? CVector(spec.right_vectors.col(g)) : eigenvector_for(H.entries, pr.Eg);
        o.ipr_full = ipr(psi);
        o.ipr_edge = ipr(psi, boundary);
        o.tau = boundary.size() > 1 ? fractal_dimension_single(o.ipr_edge, static_cast<double>(boundary.size())) : kNaN;
        o.edge_density = edge_density(psi, map);
        pr.ground_edge.resize(static_cast<Eigen::Index>(boundary.size()));
        for (size_t k = 0; k < boundary.size(); ++k) pr.ground_edge[static_cast<Eigen::Index>(k)] = psi[boundary[k]];
        const int edge_size = 2 * size.Lx;
        if (all && map.kind() == LatticeKind::honeycomb_cylinder) {
            double bmin = kNaN;
            for (int k : window_states(spec, eiprs, cfg.window)) {
                CVector amp(static_cast<Eigen::Index>(boundary.size()));
                for (size_t s = 0; s < boundary.size(); ++s)
                    amp[static_cast<Eigen::Index>(s)] = spec.right_vectors(boundary[s], k);
                const double b = scaling_exponent_min(amp, edge_size);
                if (!(b >= bmin)) bmin = std::isnan(bmin) ? b : std::min(bmin, b);
            }
            o.beta_min_edge = bmin;
        } else {
            o.beta_min_edge = scaling_exponent_min(pr.ground_edge, edge_size);
        }
    }
    if (keep_spectrum) pr.spectrum = std::move(spec);
    return pr;
}

json point_cache_json(const PointResult& pr) {
    return {{"format", kPointFormat},
            {"record", record_json(pr.record)},
            {"ground_edge", vec_json(pr.ground_edge)},
            {"Eg", {pr.Eg.real(), pr.Eg.imag()}},
            {"Ef", {num(pr.Ef.real()), num(pr.Ef.imag())}}};
}

PointResult point_from_cache(const json& j) {
    PointResult pr;
    pr.record = record_from_json(j.at("record"));
    pr.ground_edge = vec_from_json(j.at("ground_edge"));
    pr.Eg = cplx(j.at("Eg")[0].get<double>(), j.at("Eg")[1].get<double>());
    pr.Ef = cplx(denum(j.at("Ef")[0]), denum(j.at("Ef")[1]));
    return pr;
}

struct Task {
    SizeSpec size;
    double V;
    double gamma;
    double h;
};

std::vector<Task> grid_tasks(const SweepConfig& cfg) {
    std::vector<Task> tasks;
    for (const auto& s : cfg.sizes)
        for (double V : cfg.V.values())
            for (double g : cfg.gamma.values())
                for (double h : cfg.h.values()) tasks.push_back({s, V, g, h});
    return tasks;
}

struct GridOutcome {
    std::vector<PointResult> points;
    std::vector<std::string> failures;
    bool complete = true;
};

GridOutcome compute_grid(const SweepConfig& cfg, const ProgressFn& progress) {
    const auto tasks = grid_tasks(cfg);
    GridOutcome out;
    out.points.resize(tasks.size());
    std::vector<char> done(tasks.size(), 0);
    std::mutex mu;
    int finished = 0;
    const int completed = parallel_for(static_cast<int>(tasks.size()), cfg.workers, [&](int i) {
        const Task& t = tasks[static_cast<size_t>(i)];
        PointResult pr;
        try {
            pr = evaluate_point(cfg, t.size, t.V, t.h, t.gamma);
        } catch (const std::exception& e) {
            pr.record.Lx = t.size.Lx;
            pr.record.Ly = t.size.Ly;
            pr.record.V = t.V;
            pr.record.h = t.h;
            pr.record.gamma = t.gamma;
            pr.record.selector = to_string(cfg.selector.rule);
            pr.record.ok = false;
            pr.record.error = e.what();
            pr.record.obs.fidelity = kNaN;
        }
        out.points[static_cast<size_t>(i)] = std::move(pr);
        done[static_cast<size_t>(i)] = 1;
        std::lock_guard<std::mutex> lock(mu);
        ++finished;
        if (progress) progress(finished, static_cast<int>(tasks.size()));
    });
    if (completed < static_cast<int>(tasks.size())) {
        out.complete = false;
        std::vector<PointResult> kept;
        for (size_t i = 0; i < tasks.size(); ++i)
            if (done[i]) kept.push_back(std::move(out.points[i]));
        out.points = std::move(kept);
    }
    for (const auto& p : out.points)
        if (!p.record.ok) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "Lx=%d Ly=%d V=%.6g h=%.6g gamma=%.6g: ", p.record.Lx, p.record.Ly,
                          p.record.V, p.record.h, p.record.gamma);
            out.failures.push_back(buf + p.record.error);
        }
    return out;
}

void write_records(const fs::path& dir, const std::vector<SweepRecord>& records, std::vector<std::string>& files) {
    CsvTable t(record_columns());
    json arr = json::array();
    for (const auto& r : records) {
        t.add_row(record_row(r));
        arr.push_back(record_json(r));
    }
    write_text_atomic(dir / "records.csv", t.str());
    write_text_atomic(dir / "records.json", arr.dump(1) + "\n");
    files.push_back("records.csv");
    files.push_back("records.json");
}

std::vector<SweepRecord> load_records(const fs::path& dir) {
    std::vector<SweepRecord> out;
    for (const auto& j : json::parse(read_text(dir / "records.json"))) out.push_back(record_from_json(j));
    return out;
}

Manifest base_manifest(const std::string& command, const SweepConfig& cfg, bool complete,
                       const std::vector<std::string>& failures) {
    Manifest m;
    m.command = command;
    m.config = cfg.to_json();
    m.config_hash = cfg.hash();
    m.complete = complete;
    m.failures = failures;
    m.extra["fidelity_dh"] = cfg.h.step;
    m.extra["selector"] = cfg.selector.to_json();
    m.extra["edge_orientation"] = kEdgeOrientation;
    if (cfg.model.impurity_separation)
        m.extra["impurity_weights"] = {1.0, 0.5};
    return m;
}

}  // namespace

bool canonical_less(const SweepRecord& a, const SweepRecord& b) {
    if (a.Lx != b.Lx) return a.Lx < b.Lx;
    if (a.Ly != b.Ly) return a.Ly < b.Ly;
    if (a.V != b.V) return a.V < b.V;
    if (a.gamma != b.gamma) return a.gamma < b.gamma;
    return a.h < b.h;
}

void canonical_sort(std::vector<SweepRecord>& records) {
    std::stable_sort(records.begin(), records.end(), canonical_less);
}

std::vector<std::string> record_columns() {
    return {"L_x",      "L_y",        "V",         "h",        "gamma",    "ipr_full",        "ipr_edge",
            "tau",      "beta_min_edge", "fidelity", "gap",     "dEg_dh",   "max_abs_im",      "max_abs_im_edge",
            "edge_density", "npt",    "n_im_zeros", "eg_re",   "eg_im",    "selector",        "meta_hash",
            "status"};
}

std::vector<std::string> record_row(const SweepRecord& r) {
    const auto& o = r.obs;
    const auto f = format_double;
    return {std::to_string(r.Lx), std::to_string(r.Ly), f(r.V), f(r.h), f(r.gamma), f(o.ipr_full), f(o.ipr_edge),
            f(o.tau), f(o.beta_min_edge), f(o.fidelity), f(o.gap), f(o.dEg_dh), f(o.max_abs_im),
            f(o.max_abs_im_edge), f(o.edge_density), std::to_string(o.npt), std::to_string(o.n_im_zeros), f(o.eg_re),
            f(o.eg_im), r.selector, r.meta_hash, r.ok ? "ok" : "failed: " + r.error};
}

json record_json(const SweepRecord& r) {
    return {{"L_x", r.Lx},   {"L_y", r.Ly},           {"V", r.V},         {"h", r.h},
            {"gamma", r.gamma}, {"obs", obs_json(r.obs)}, {"selector", r.selector},
            {"meta_hash", r.meta_hash}, {"ok", r.ok}, {"error", r.error}};
}

SweepRecord record_from_json(const json& j) {
    SweepRecord r;
    r.Lx = j.at("L_x").get<int>();
    r.Ly = j.at("L_y").get<int>();
    r.V = j.at("V").get<double>();
    r.h = j.at("h").get<double>();
    r.gamma = j.at("gamma").get<double>();
    r.obs = obs_from_json(j.at("obs"));
    r.selector = j.at("selector").get<std::string>();
    r.meta_hash = j.at("meta_hash").get<std::string>();
    r.ok = j.at("ok").get<bool>();
    r.error = j.at("error").get<std::string>();
    return r;
}

PointResult evaluate_point(const SweepConfig& cfg, const SizeSpec& size, double V, double h, double gamma,
                           bool keep_spectrum) {
    const OperatorMatrix H = build_point(cfg.model, size, V, h, gamma);
    const bool use_cache = cfg.cache_points && !keep_spectrum;
    fs::path cache_file;
    if (use_cache) {
        cache_file = fs::path(cfg.output_dir) / "points" / (point_key(cfg, H, keep_spectrum) + ".json");
        if (fs::exists(cache_file)) {
            try {
                return point_from_cache(json::parse(read_text(cache_file)));
            } catch (const std::exception&) {
                // unreadable cache entry: recompute and overwrite
            }
        }
    }
    PointResult pr = compute_point(cfg, size, V, h, gamma, keep_spectrum, H);
    if (use_cache) write_text_atomic(cache_file, point_cache_json(pr).dump());
    return pr;
}

ObservableRecord observe(const SweepConfig& cfg, const SizeSpec& size, double V, double h, double gamma) {
    SweepConfig c = cfg;
    c.cache_points = false;
    return compute_point(c, size, V, h, gamma, false, build_point(c.model, size, V, h, gamma)).record.obs;
}

void assemble_curves(std::vector<PointResult>& points, double npt_threshold) {
    std::stable_sort(points.begin(), points.end(),
                     [](const PointResult& a, const PointResult& b) { return canonical_less(a.record, b.record); });
    size_t i = 0;
    while (i < points.size()) {
        size_t j = i + 1;
        auto same_line = [&](const SweepRecord& a, const SweepRecord& b) {
            return a.Lx == b.Lx && a.Ly == b.Ly && a.V == b.V && a.gamma == b.gamma;
        };
        while (j < points.size() && same_line(points[i].record, points[j].record)) ++j;
        std::vector<double> hs, fid;
        std::vector<cplx> eg, ef;
        bool all_ok = true;
        for (size_t k = i; k < j; ++k) {
            hs.push_back(points[k].record.h);
            eg.push_back(points[k].Eg);
            ef.push_back(points[k].Ef);
            all_ok = all_ok && points[k].record.ok;
        }
        for (size_t k = i; k + 1 < j; ++k) {
            double F = kNaN;
            const auto& a = points[k].ground_edge;
            const auto& b = points[k + 1].ground_edge;
            if (points[k].record.ok && points[k + 1].record.ok && a.size() > 0 && a.size() == b.size()) {
                std::vector<int> sup(static_cast<size_t>(a.size()));
                for (size_t s = 0; s < sup.size(); ++s) sup[s] = static_cast<int>(s);
                try {
                    F = edge_fidelity(a, b, sup);
                } catch (const UndefinedObservableError&) {
                }
            }
            points[k].record.obs.fidelity = F;
            fid.push_back(std::isnan(F) ? 1.0 : F);
        }
        if (all_ok && hs.size() >= 3) {
            try {
                const GapCurve gc = gap_and_derivative(hs, eg, ef);
                for (size_t k = i; k < j; ++k) points[k].record.obs.dEg_dh = gc.dEg_dh[k - i];
            } catch (const InputError&) {
            }
        }
        const int npt = count_npt(fid, npt_threshold);
        for (size_t k = i; k < j; ++k) points[k].record.obs.npt = npt;
        i = j;
    }
}

void request_cancel() { g_cancel.store(true); }
void reset_cancel() { g_cancel.store(false); }
bool cancel_requested() { return g_cancel.load(); }

int parallel_for(int n, int workers, const std::function<void(int)>& task) {
    std::atomic<int> next{0};
    std::atomic<int> completed{0};
    std::mutex err_mu;
    std::exception_ptr first_error;
    auto body = [&] {
        for (;;) {
            if (cancel_requested()) return;
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                task(i);
                completed.fetch_add(1);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    const int nw = std::max(1, std::min(workers, n));
    if (nw == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return completed.load();
}

SweepResult run_phase_diagram(const SweepConfig& cfg, const ProgressFn& progress) {
    cfg.validate();
    const fs::path dir(cfg.output_dir);
    SweepResult res;
    if (manifest_is_current(dir, cfg.hash())) {
        res.records = load_records(dir);
        res.reused = true;
        res.files = {"records.csv", "records.json"};
        for (const auto& r : res.records)
            if (!r.ok) res.failures.push_back(r.error);
        return res;
    }
    GridOutcome g = compute_grid(cfg, progress);
    assemble_curves(g.points, cfg.npt_threshold);
    for (auto& p : g.points) res.records.push_back(std::move(p.record));
    canonical_sort(res.records);
    res.failures = g.failures;
    res.complete = g.complete;
    fs::create_directories(dir);
    write_records(dir, res.records, res.files);
    write_manifest(dir, base_manifest("phase-diagram", cfg, res.complete, res.failures), res.files);
    return res;
}

SizeScanResult run_size_scan(const SweepConfig& cfg, const ProgressFn& progress) {
    cfg.validate();
    if (cfg.V.values().size() != 1 || cfg.gamma.values().size() != 1)
        throw ConfigError("size scan takes a single V and gamma");
    SizeScanResult out;
    out.sweep = run_phase_diagram(cfg, progress);
    const fs::path dir(cfg.output_dir);
    const bool windowed = cfg.wants("max_abs_im_edge");
    for (const auto& s : cfg.sizes) {
        SizeScanRow row;
        row.Lx = s.Lx;
        row.Ly = s.Ly;
        std::vector<double> hs, im, eg, fid;
        for (const auto& r : out.sweep.records) {
            if (r.Lx != s.Lx || r.Ly != s.Ly) continue;
            hs.push_back(r.h);
            im.push_back(windowed ? r.obs.max_abs_im_edge : r.obs.max_abs_im);
            eg.push_back(r.obs.eg_re);
            fid.push_back(std::isnan(r.obs.fidelity) ? 1.0 : r.obs.fidelity);
            row.npt = r.obs.npt;
        }
        if (!fid.empty()) fid.pop_back();
        const PotentialProfile prof(cfg.V.values()[0], cfg.h.values().back(), point_alpha(cfg.model, s), s.Lx);
        const ZeroCount zc = count_imag_zeros(prof);
        row.n_im_zeros = zc.count;
        row.zeros_degenerate = zc.degenerate;
        if (hs.size() >= 3) {
            const auto on = detect_transitions(hs, im, TransitionMethod::onset_of_max_im);
            if (!on.empty()) row.h1 = on[0];
            if (on.size() > 1) row.h2 = on[1];
            row.jump_points = detect_transitions(hs, eg, TransitionMethod::derivative_jump);
            row.npt = count_npt(fid, cfg.npt_threshold);
        }
        out.rows.push_back(row);
    }
    std::vector<double> lx, npt, h2, loglx;
    for (const auto& r : out.rows) {
        lx.push_back(r.Lx);
        npt.push_back(r.npt);
        if (std::isfinite(r.h2)) {
            h2.push_back(r.h2);
            loglx.push_back(std::log(static_cast<double>(r.Lx)));
        }
    }
    auto distinct = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return std::unique(v.begin(), v.end()) - v.begin();
    };
    if (distinct(lx) >= 2) out.npt_fit = linear_fit(lx, npt);
    if (distinct(h2) >= 2) out.h2_fit = linear_fit(h2, loglx);

    CsvTable t({"L_x", "L_y", "h1", "h2", "jump_points", "npt", "n_im_zeros", "zeros_degenerate"});
    for (const auto& r : out.rows) {
        std::string jp;
        for (double v : r.jump_points) jp += (jp.empty() ? "" : ";") + format_double(v);
        t.add_row({std::to_string(r.Lx), std::to_string(r.Ly), format_double(r.h1), format_double(r.h2), jp,
                   std::to_string(r.npt), std::to_string(r.n_im_zeros), r.zeros_degenerate ? "1" : "0"});
    }
    write_text_atomic(dir / "size_scan.csv", t.str());
    json fits = json::object();
    if (out.npt_fit) fits["npt_vs_Lx"] = {{"slope", out.npt_fit->slope}, {"intercept", out.npt_fit->intercept},
                                          {"r2", out.npt_fit->r2}};
    if (out.h2_fit) fits["logLx_vs_h2"] = {{"k", out.h2_fit->slope}, {"c", out.h2_fit->intercept},
                                           {"r2", out.h2_fit->r2}};
    write_text_atomic(dir / "fits.json", fits.dump(2) + "\n");
    out.sweep.files = {"records.csv", "records.json", "size_scan.csv", "fits.json"};
    Manifest m = base_manifest("size-scan", cfg, out.sweep.complete, out.sweep.failures);
    m.extra["fits"] = fits;
    write_manifest(dir, m, out.sweep.files);
    return out;
}

int count_axis_states(const Spectrum& spec) {
    double m = 0.0;
    for (int k = 0; k < spec.size(); ++k) m = std::max(m, std::abs(spec.eigenvalues[k]));
    const double tol = 1e-7 * (1.0 + m);
    int n = 0;
    for (int k = 0; k < spec.size(); ++k)
        if (std::abs(spec.eigenvalues[k].real()) < tol) ++n;
    return n;
}

namespace {

ImpurityPoint impurity_point(const SweepConfig& cfg, const SizeSpec& s, double gamma) {
    const OperatorMatrix H = build_point(cfg.model, s, cfg.V.values()[0], cfg.h.values()[0], gamma);
    const Spectrum spec = eigenvalues_only(H.entries);
    ImpurityPoint p;
    p.gamma = gamma;
    p.Lx = s.Lx;
    p.Ly = s.Ly;
    p.n_axis = count_axis_states(spec);
    p.max_abs_im = max_abs_imag(spec);
    std::vector<int> order(static_cast<size_t>(spec.size()));
    for (int k = 0; k < spec.size(); ++k) order[static_cast<size_t>(k)] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return spec.eigenvalues[a].imag() > spec.eigenvalues[b].imag(); });
    p.top1 = spec.eigenvalues[order[0]];
    if (order.size() > 1) p.top2 = spec.eigenvalues[order[1]];
    return p;
}

json impurity_point_json(const ImpurityPoint& p) {
    return {{"gamma", p.gamma}, {"L_x", p.Lx}, {"L_y", p.Ly}, {"n_axis", p.n_axis}, {"max_abs_im", p.max_abs_im},
            {"top1", {p.top1.real(), p.top1.imag()}}, {"top2", {p.top2.real(), p.top2.imag()}},
            {"pt_events", p.pt_events}};
}

}  // namespace

ImpurityScanResult run_impurity_scan(const SweepConfig& cfg, const ProgressFn& progress) {
    cfg.validate();
    if (cfg.model.impurity_separation == 0) throw ConfigError("impurity scan needs impurity_separation 1 or 2");
    if (cfg.V.values().size() != 1 || cfg.h.values().size() != 1)
        throw ConfigError("impurity scan takes a single V and h");
    const fs::path dir(cfg.output_dir);
    ImpurityScanResult res;
    const std::vector<std::string> files{"impurity_scan.csv", "impurity_events.json"};
    if (manifest_is_current(dir, cfg.hash())) {
        const json j = json::parse(read_text(dir / "impurity_events.json"));
        for (const auto& p : j.at("points")) {
            ImpurityPoint q;
            q.gamma = p.at("gamma").get<double>();
            q.Lx = p.at("L_x").get<int>();
            q.Ly = p.at("L_y").get<int>();
            q.n_axis = p.at("n_axis").get<int>();
            q.max_abs_im = p.at("max_abs_im").get<double>();
            q.top1 = cplx(p.at("top1")[0].get<double>(), p.at("top1")[1].get<double>());
            q.top2 = cplx(p.at("top2")[0].get<double>(), p.at("top2")[1].get<double>());
            q.pt_events = p.at("pt_events").get<int>();
            res.points.push_back(q);
        }
        for (const auto& e : j.at("events"))
            res.events.push_back({e.at("gamma").get<double>(), e.at("lo").get<double>(), e.at("hi").get<double>(),
                                  e.at("n_axis_before").get<int>(), e.at("n_axis_after").get<int>(),
                                  e.at("breaking").get<bool>()});
        res.files = files;
        return res;
    }
    const auto gammas = cfg.gamma.values();
    std::vector<std::pair<SizeSpec, double>> tasks;
    for (const auto& s : cfg.sizes)
        for (double g : gammas) tasks.push_back({s, g});
    std::vector<ImpurityPoint> pts(tasks.size());
    std::vector<char> ok(tasks.size(), 0);
    std::mutex mu;
    int finished = 0;
    const int completed = parallel_for(static_cast<int>(tasks.size()), cfg.workers, [&](int i) {
        const auto& t = tasks[static_cast<size_t>(i)];
        try {
            pts[static_cast<size_t>(i)] = impurity_point(cfg, t.first, t.second);
            ok[static_cast<size_t>(i)] = 1;
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(mu);
            res.failures.push_back("gamma=" + format_double(t.second) + ": " + e.what());
        }
        std::lock_guard<std::mutex> lock(mu);
        ++finished;
        if (progress) progress(finished, static_cast<int>(tasks.size()));
    });
    res.complete = completed == static_cast<int>(tasks.size());
    for (size_t i = 0; i < tasks.size(); ++i)
        if (ok[i]) res.points.push_back(pts[i]);
    std::sort(res.points.begin(), res.points.end(), [](const ImpurityPoint& a, const ImpurityPoint& b) {
        if (a.Lx != b.Lx) return a.Lx < b.Lx;
        if (a.Ly != b.Ly) return a.Ly < b.Ly;
        return a.gamma < b.gamma;
    });
    std::sort(res.failures.begin(), res.failures.end());

    // Refine each change of the axis count by bisection down to refine_step.
    for (size_t k = 0; k + 1 < res.points.size(); ++k) {
        const auto& a = res.points[k];
        const auto& b = res.points[k + 1];
        if (a.Lx != b.Lx || a.Ly != b.Ly || a.n_axis == b.n_axis) continue;
        double lo = a.gamma, hi = b.gamma;
        const int n_lo = a.n_axis;
        try {
            while (hi - lo > cfg.refine_step && !cancel_requested()) {
                const double mid = 0.5 * (lo + hi);
                const int n_mid = impurity_point(cfg, {a.Lx, a.Ly}, mid).n_axis;
                (n_mid == n_lo ? lo : hi) = mid;
            }
        } catch (const std::exception& e) {
            res.failures.push_back("refine near gamma=" + format_double(a.gamma) + ": " + e.what());
        }
        res.events.push_back({0.5 * (lo + hi), lo, hi, a.n_axis, b.n_axis, b.n_axis > a.n_axis});
    }
    for (auto& p : res.points) {
        int n = 0;
        for (const auto& e : res.events)
            if (e.breaking && e.gamma <= p.gamma) ++n;
        p.pt_events = n;
    }

    fs::create_directories(dir);
    CsvTable t({"L_x", "L_y", "gamma", "n_axis", "max_abs_im", "top1_re", "top1_im", "top2_re", "top2_im", "pt_events"});
    json pj = json::array();
    for (const auto& p : res.points) {
        t.add_row({std::to_string(p.Lx), std::to_string(p.Ly), format_double(p.gamma), std::to_string(p.n_axis),
                   format_double(p.max_abs_im), format_double(p.top1.real()), format_double(p.top1.imag()),
                   format_double(p.top2.real()), format_double(p.top2.imag()), std::to_string(p.pt_events)});
        pj.push_back(impurity_point_json(p));
    }
    json ej = json::array();
    for (const auto& e : res.events)
        ej.push_back({{"gamma", e.gamma}, {"lo", e.lo}, {"hi", e.hi}, {"n_axis_before", e.n_axis_before},
                      {"n_axis_after", e.n_axis_after}, {"breaking", e.breaking}});
    write_text_atomic(dir / "impurity_scan.csv", t.str());
    write_text_atomic(dir / "impurity_events.json", json{{"points", pj}, {"events", ej}}.dump(1) + "\n");
    res.files = files;
    Manifest m = base_manifest("impurity-scan", cfg, res.complete, res.failures);
    m.extra["impurity_anchor"] = cfg.model.impurity_anchor >= 0 ? json(cfg.model.impurity_anchor) : json("L_x/2");
    write_manifest(dir, m, res.files);
    return res;
}

}  // namespace hqc
