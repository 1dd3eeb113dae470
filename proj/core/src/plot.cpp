#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "hqc/errors.hpp"
#include "hqc/io.hpp"
#include "hqc/sweep.hpp"

namespace hqc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Getter = double (*)(const SweepRecord&);

struct Column {
    const char* name;
    Getter get;
};

double g_V(const SweepRecord& r) { return r.V; }
double g_h(const SweepRecord& r) { return r.h; }
double g_Lx(const SweepRecord& r) { return r.Lx; }
double g_ipr(const SweepRecord& r) { return r.obs.ipr_full; }
double g_ipr_edge(const SweepRecord& r) { return r.obs.ipr_edge; }
double g_fid(const SweepRecord& r) { return r.obs.fidelity; }
double g_im(const SweepRecord& r) { return r.obs.max_abs_im; }
double g_im_edge(const SweepRecord& r) { return r.obs.max_abs_im_edge; }
double g_beta(const SweepRecord& r) { return r.obs.beta_min_edge; }
double g_gap(const SweepRecord& r) { return r.obs.gap; }
double g_eg(const SweepRecord& r) { return r.obs.eg_re; }
double g_deg(const SweepRecord& r) { return r.obs.dEg_dh; }

enum class Shape { heatmap, curves };

struct Figure {
    Shape shape;
    std::vector<Column> columns;  // heatmap: x, y, value...; curves: group, x, value...
    const char* title;
};

const std::map<std::string, Figure>& figures() {
    static const std::map<std::string, Figure> f = {
        {"fig1b", {Shape::heatmap, {{"V", g_V}, {"h", g_h}, {"ipr_full", g_ipr}, {"ipr_edge", g_ipr_edge}},
                   "ground-state IPR over (V, h)"}},
        {"fig2c", {Shape::curves, {{"L_x", g_Lx}, {"h", g_h}, {"fidelity", g_fid}}, "ground-state fidelity vs h"}},
        {"fig4d", {Shape::curves, {{"V", g_V}, {"h", g_h}, {"max_abs_im", g_im}, {"max_abs_im_edge", g_im_edge}},
                   "largest |Im E| vs h"}},
        {"fig4e", {Shape::curves, {{"V", g_V}, {"h", g_h}, {"beta_min_edge", g_beta}}, "minimal scaling exponent vs h"}},
        {"fig4f", {Shape::curves, {{"V", g_V}, {"h", g_h}, {"fidelity", g_fid}}, "ground-state fidelity vs h"}},
        {"fig6", {Shape::curves, {{"V", g_V}, {"h", g_h}, {"gap", g_gap}, {"eg_re", g_eg}, {"dEg_dh", g_deg}},
                  "gap, Re E_g and dE_g/dh vs h"}},
    };
    return f;
}

std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            default: o += c;
        }
    }
    return o;
}

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

std::pair<double, double> finite_range(const std::vector<double>& v) {
    double lo = INFINITY, hi = -INFINITY;
    for (double x : v)
        if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (!std::isfinite(lo)) return {0.0, 1.0};
    if (hi == lo) hi = lo + 1.0;
    return {lo, hi};
}

// Sequential blue-to-yellow ramp.
std::string ramp(double t) {
    if (!std::isfinite(t)) return "#cccccc";
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(40 + 215 * t));
    const int g = static_cast<int>(std::lround(30 + 200 * t));
    const int b = static_cast<int>(std::lround(120 - 90 * t));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

constexpr double W = 480, Hh = 360, M = 50;

std::string svg_open(const std::string& title, const json& meta) {
    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh << "\" viewBox=\"0 0 " << W
      << ' ' << Hh << "\">\n"
      << "<metadata>" << xml_escape(meta.dump()) << "</metadata>\n"
      << "<title>" << xml_escape(title) << "</title>\n"
      << "<rect x=\"" << M << "\" y=\"" << M / 2 << "\" width=\"" << W - 1.5 * M << "\" height=\"" << Hh - 1.5 * M
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    return s.str();
}

std::string axis_labels(const std::string& xl, std::pair<double, double> xr, const std::string& yl,
                        std::pair<double, double> yr) {
    std::ostringstream s;
    s << "<text x=\"" << W / 2 << "\" y=\"" << Hh - 8 << "\" font-size=\"12\" text-anchor=\"middle\">"
      << xml_escape(xl) << " [" << fmt(xr.first) << ", " << fmt(xr.second) << "]</text>\n"
      << "<text x=\"12\" y=\"" << Hh / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12 " << Hh / 2
      << ")\" text-anchor=\"middle\">" << xml_escape(yl) << " [" << fmt(yr.first) << ", " << fmt(yr.second)
      << "]</text>\n";
    return s.str();
}

std::string heatmap_svg(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& vs,
                        const std::string& xl, const std::string& yl, const std::string& title, const json& meta) {
    std::vector<double> ux(xs), uy(ys);
    std::sort(ux.begin(), ux.end());
    ux.erase(std::unique(ux.begin(), ux.end()), ux.end());
    std::sort(uy.begin(), uy.end());
    uy.erase(std::unique(uy.begin(), uy.end()), uy.end());
    const auto vr = finite_range(vs);
    const double pw = (W - 1.5 * M) / static_cast<double>(ux.size());
    const double ph = (Hh - 1.5 * M) / static_cast<double>(uy.size());
    std::ostringstream s;
    s << svg_open(title, meta);
    for (size_t k = 0; k < xs.size(); ++k) {
        const auto ix = std::lower_bound(ux.begin(), ux.end(), xs[k]) - ux.begin();
        const auto iy = std::lower_bound(uy.begin(), uy.end(), ys[k]) - uy.begin();
        const double t = (vs[k] - vr.first) / (vr.second - vr.first);
        s << "<rect x=\"" << M + pw * static_cast<double>(ix) << "\" y=\""
          << M / 2 + (Hh - 1.5 * M) - ph * static_cast<double>(iy + 1) << "\" width=\"" << pw << "\" height=\"" << ph
          << "\" fill=\"" << ramp(t) << "\"/>\n";
    }
    s << axis_labels(xl, {ux.front(), ux.back()}, yl, {uy.front(), uy.back()}) << "</svg>\n";
    return s.str();
}

std::string curves_svg(const std::map<double, std::vector<std::pair<double, double>>>& lines, const std::string& xl,
                       const std::string& yl, const std::string& title, const json& meta) {
    std::vector<double> xs, ys;
    for (const auto& [g, pts] : lines)
        for (const auto& [x, y] : pts) {
            xs.push_back(x);
            ys.push_back(y);
        }
    const auto xr = finite_range(xs), yr = finite_range(ys);
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream s;
    s << svg_open(title, meta);
    int c = 0;
    for (const auto& [g, pts] : lines) {
        s << "<polyline fill=\"none\" stroke=\"" << colors[c++ % 6] << "\" points=\"";
        for (const auto& [x, y] : pts) {
            if (!std::isfinite(y)) continue;
            s << M + (x - xr.first) / (xr.second - xr.first) * (W - 1.5 * M) << ','
              << M / 2 + (1.0 - (y - yr.first) / (yr.second - yr.first)) * (Hh - 1.5 * M) << ' ';
        }
        s << "\"/>\n";
    }
    s << axis_labels(xl, xr, yl, yr) << "</svg>\n";
    return s.str();
}

}  // namespace

std::vector<std::string> emit_plot_data(const std::vector<SweepRecord>& records, const std::string& figure_id,
                                        const fs::path& dir, bool svg) {
    const auto it = figures().find(figure_id);
    if (it == figures().end()) throw CoverageError("unknown figure id: " + figure_id);
    const Figure& fig = it->second;

    std::vector<SweepRecord> rs;
    for (const auto& r : records)
        if (r.ok) rs.push_back(r);
    canonical_sort(rs);
    if (rs.empty()) throw CoverageError(figure_id + ": no successful records");

    std::set<double> a0, a1;
    for (const auto& r : rs) {
        a0.insert(fig.columns[0].get(r));
        a1.insert(fig.columns[1].get(r));
    }
    if (fig.shape == Shape::heatmap && (a0.size() < 2 || a1.size() < 2))
        throw CoverageError(figure_id + ": records must span both " + fig.columns[0].name + " and " +
                            fig.columns[1].name);
    if (fig.shape == Shape::curves && a1.size() < 2)
        throw CoverageError(figure_id + ": records must span " + std::string(fig.columns[1].name));
    for (size_t c = 2; c < fig.columns.size(); ++c) {
        bool any = false;
        for (const auto& r : rs) any = any || std::isfinite(fig.columns[c].get(r));
        if (!any && c == 2)
            throw CoverageError(figure_id + ": column " + fig.columns[c].name + " was not computed");
    }

    std::vector<std::string> names;
    for (const auto& col : fig.columns) names.emplace_back(col.name);
    CsvTable t(names);
    for (const auto& r : rs) {
        std::vector<std::string> row;
        for (const auto& col : fig.columns) row.push_back(format_double(col.get(r)));
        t.add_row(row);
    }
    fs::create_directories(dir);
    std::vector<std::string> files{figure_id + ".csv"};
    write_text_atomic(dir / files[0], t.str());

    if (svg) {
        const json meta{{"figure", figure_id},
                        {"columns", names},
                        {"selector", rs.front().selector},
                        {"records", rs.size()},
                        {"edge_orientation", kEdgeOrientation}};
        std::string body;
        if (fig.shape == Shape::heatmap) {
            std::vector<double> xs, ys, vs;
            for (const auto& r : rs) {
                xs.push_back(fig.columns[0].get(r));
                ys.push_back(fig.columns[1].get(r));
                vs.push_back(fig.columns[2].get(r));
            }
            body = heatmap_svg(xs, ys, vs, fig.columns[0].name, fig.columns[1].name, fig.title, meta);
        } else {
            std::map<double, std::vector<std::pair<double, double>>> lines;
            for (const auto& r : rs) lines[fig.columns[0].get(r)].push_back({fig.columns[1].get(r), fig.columns[2].get(r)});
            body = curves_svg(lines, fig.columns[1].name, fig.columns[2].name, fig.title, meta);
        }
        files.push_back(figure_id + ".svg");
        write_text_atomic(dir / files[1], body);
    }
    return files;
}

}  // namespace hqc

namespace hqc {

RegionMap classify_regions(const std::vector<SweepRecord>& records, double lo, double hi) {
    RegionMap m;
    std::set<double> vs, hs;
    for (const auto& r : records)
        if (r.ok) {
            vs.insert(r.V);
            hs.insert(r.h);
        }
    m.Vs.assign(vs.begin(), vs.end());
    m.hs.assign(hs.begin(), hs.end());
    m.labels.assign(m.Vs.size(), std::vector<int>(m.hs.size(), -1));
    for (const auto& r : records) {
        if (!r.ok || !std::isfinite(r.obs.ipr_full)) continue;
        const auto i = std::lower_bound(m.Vs.begin(), m.Vs.end(), r.V) - m.Vs.begin();
        const auto j = std::lower_bound(m.hs.begin(), m.hs.end(), r.h) - m.hs.begin();
        const double v = r.obs.ipr_full;
        m.labels[static_cast<size_t>(i)][static_cast<size_t>(j)] = v < lo ? 0 : (v > hi ? 2 : 1);
    }
    const int nv = static_cast<int>(m.Vs.size()), nh = static_cast<int>(m.hs.size());
    std::vector<std::vector<char>> seen(m.Vs.size(), std::vector<char>(m.hs.size(), 0));
    for (int i = 0; i < nv; ++i)
        for (int j = 0; j < nh; ++j) {
            const int lab = m.labels[static_cast<size_t>(i)][static_cast<size_t>(j)];
            if (lab < 0 || seen[static_cast<size_t>(i)][static_cast<size_t>(j)]) continue;
            ++m.components[static_cast<size_t>(lab)];
            std::vector<std::pair<int, int>> stack{{i, j}};
            seen[static_cast<size_t>(i)][static_cast<size_t>(j)] = 1;
            while (!stack.empty()) {
                const auto [a, b] = stack.back();
                stack.pop_back();
                const int nb[4][2] = {{a + 1, b}, {a - 1, b}, {a, b + 1}, {a, b - 1}};
                for (const auto& q : nb) {
                    if (q[0] < 0 || q[0] >= nv || q[1] < 0 || q[1] >= nh) continue;
                    auto& s = seen[static_cast<size_t>(q[0])][static_cast<size_t>(q[1])];
                    if (s || m.labels[static_cast<size_t>(q[0])][static_cast<size_t>(q[1])] != lab) continue;
                    s = 1;
                    stack.push_back({q[0], q[1]});
                }
            }
        }
    m.three_contiguous = m.components[0] == 1 && m.components[1] == 1 && m.components[2] == 1;
    return m;
}

}  // namespace hqc
