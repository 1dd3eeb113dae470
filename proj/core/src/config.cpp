#include <cmath>

#include "hqc/errors.hpp"
#include "hqc/io.hpp"
#include "hqc/sweep.hpp"

namespace hqc {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw ConfigError(std::string("unknown key '") + it.key() + "' in " + where);
    }
}

}  // namespace

std::vector<double> Range::values() const {
    if (!(step > 0.0)) throw ConfigError("range step must be positive");
    if (stop < start) throw ConfigError("range is empty (stop < start)");
    const long n = std::lround((stop - start) / step);
    std::vector<double> v;
    v.reserve(static_cast<size_t>(n) + 1);
    for (long k = 0; k <= n; ++k) v.push_back(start + static_cast<double>(k) * step);
    return v;
}

json Range::to_json() const { return {{"start", start}, {"stop", stop}, {"step", step}}; }

Range Range::from_json(const json& j) {
    if (j.is_number()) return single(j.get<double>());
    reject_unknown(j, {"start", "stop", "step"}, "range");
    Range r;
    r.start = get_or(j, "start", 0.0);
    r.stop = get_or(j, "stop", r.start);
    r.step = get_or(j, "step", 1.0);
    r.values();
    return r;
}

json ModelSpec::to_json() const {
    json j{{"kind", kind},
           {"t1", t1},
           {"phi", phi},
           {"lambda", lambda},
           {"boundary_rows", boundary_rows},
           {"chain_boundary", chain_boundary},
           {"impurity_separation", impurity_separation},
           {"impurity_anchor", impurity_anchor},
           {"domain_wall", domain_wall}};
    j["t2"] = t2 ? json(*t2) : json();
    j["alpha"] = alpha ? json{alpha->p, alpha->q} : json();
    return j;
}

ModelSpec ModelSpec::from_json(const json& j) {
    reject_unknown(j,
                   {"kind", "t1", "t2", "phi", "lambda", "boundary_rows", "chain_boundary", "alpha",
                    "impurity_separation", "impurity_anchor", "domain_wall"},
                   "model");
    ModelSpec m;
    m.kind = get_or(j, "kind", m.kind);
    m.t1 = get_or(j, "t1", m.t1);
    if (j.contains("t2") && !j.at("t2").is_null()) m.t2 = get_or(j, "t2", 0.0);
    m.phi = get_or(j, "phi", m.phi);
    m.lambda = get_or(j, "lambda", m.lambda);
    m.boundary_rows = get_or(j, "boundary_rows", m.boundary_rows);
    m.chain_boundary = get_or(j, "chain_boundary", m.chain_boundary);
    if (j.contains("alpha") && !j.at("alpha").is_null()) {
        const auto a = get_or(j, "alpha", std::vector<long>{});
        if (a.size() != 2) throw ConfigError("alpha must be [p, q]");
        m.alpha = Rational{a[0], a[1]};
    }
    m.impurity_separation = get_or(j, "impurity_separation", m.impurity_separation);
    m.impurity_anchor = get_or(j, "impurity_anchor", m.impurity_anchor);
    m.domain_wall = get_or(j, "domain_wall", m.domain_wall);
    return m;
}

json SweepConfig::to_json() const {
    json sz = json::array();
    for (const auto& s : sizes) sz.push_back({s.Lx, s.Ly});
    return {{"version", version},
            {"model", model.to_json()},
            {"V", V.to_json()},
            {"h", h.to_json()},
            {"gamma", gamma.to_json()},
            {"sizes", sz},
            {"selector", selector.to_json()},
            {"window", {{"gap_edge", window.gap_edge}, {"ipr_cut", window.ipr_cut}}},
            {"observables", observables},
            {"output_dir", output_dir},
            {"workers", workers},
            {"npt_threshold", npt_threshold},
            {"refine_step", refine_step},
            {"write_spectra", write_spectra},
            {"cache_points", cache_points}};
}

SweepConfig SweepConfig::from_json(const json& j) {
    reject_unknown(j,
                   {"version", "model", "V", "h", "gamma", "sizes", "selector", "window", "observables",
                    "output_dir", "workers", "npt_threshold", "refine_step", "write_spectra", "cache_points"},
                   "config");
    SweepConfig c;
    c.version = get_or(j, "version", 1);
    if (c.version != 1) throw ConfigError("unsupported config version " + std::to_string(c.version));
    if (j.contains("model")) c.model = ModelSpec::from_json(j.at("model"));
    try {
        if (j.contains("V")) c.V = Range::from_json(j.at("V"));
        if (j.contains("h")) c.h = Range::from_json(j.at("h"));
        if (j.contains("gamma")) c.gamma = Range::from_json(j.at("gamma"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad range: ") + e.what());
    }
    if (j.contains("sizes")) {
        c.sizes.clear();
        const auto& sz = j.at("sizes");
        if (!sz.is_array()) throw ConfigError("sizes must be a list of [Lx, Ly]");
        for (const auto& s : sz) {
            if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() || !s[1].is_number_integer())
                throw ConfigError("each size must be [Lx, Ly]");
            c.sizes.push_back({s[0].get<int>(), s[1].get<int>()});
        }
    }
    if (j.contains("selector")) {
        const auto& s = j.at("selector");
        if (s.is_string()) {
            c.selector.rule = selector_from_string(s.get<std::string>());
        } else {
            reject_unknown(s, {"rule", "gap_edge", "edge_threshold"}, "selector");
            c.selector.rule = selector_from_string(get_or(s, "rule", std::string("min-real")));
            c.selector.gap_edge = get_or(s, "gap_edge", c.selector.gap_edge);
            c.selector.edge_threshold = get_or(s, "edge_threshold", c.selector.edge_threshold);
        }
    }
    if (j.contains("window")) {
        const auto& w = j.at("window");
        reject_unknown(w, {"gap_edge", "ipr_cut"}, "window");
        c.window.gap_edge = get_or(w, "gap_edge", c.window.gap_edge);
        c.window.ipr_cut = get_or(w, "ipr_cut", c.window.ipr_cut);
    }
    if (j.contains("observables")) c.observables = get_or(j, "observables", std::set<std::string>{});
    c.output_dir = get_or(j, "output_dir", c.output_dir);
    c.workers = get_or(j, "workers", c.workers);
    c.npt_threshold = get_or(j, "npt_threshold", c.npt_threshold);
    c.refine_step = get_or(j, "refine_step", c.refine_step);
    c.write_spectra = get_or(j, "write_spectra", c.write_spectra);
    c.cache_points = get_or(j, "cache_points", c.cache_points);
    c.validate();
    return c;
}

void SweepConfig::validate() const {
    V.values();
    h.values();
    gamma.values();
    if (sizes.empty()) throw ConfigError("sizes list is empty");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (!(refine_step > 0.0)) throw ConfigError("refine_step must be positive");
    if (model.kind != "haldane" && model.kind != "two-chain" && model.kind != "aah-chain")
        throw ConfigError("unknown model kind '" + model.kind + "'");
    if (model.kind == "haldane" && !model.t2) throw ConfigError("haldane model needs an explicit t2");
    if (model.chain_boundary != "periodic" && model.chain_boundary != "open")
        throw ConfigError("chain_boundary must be periodic or open");
    if (model.impurity_separation != 0 && model.domain_wall)
        throw ConfigError("impurities and domain wall are exclusive uses of gamma");
    if (model.impurity_separation < 0 || model.impurity_separation > 2)
        throw ConfigError("impurity_separation must be 0, 1 or 2");
    if (model.impurity_separation == 0 && !model.domain_wall) {
        const auto g = gamma.values();
        if (g.size() != 1 || g[0] != 0.0) throw ConfigError("gamma axis given but nothing uses it");
    }
    for (const auto& o : observables)
        if (!kKnownObservables.count(o)) throw ConfigError("unknown observable '" + o + "'");
    for (const auto& s : sizes) {
        if (s.Lx < 2) throw ConfigError("L_x must be >= 2");
        if (model.kind == "haldane" && s.Ly < 2) throw ConfigError("haldane model needs L_y >= 2");
        // Fibonacci sizes pair with alpha = F_{n-1}/F_n; a fixed alpha must agree.
        if (model.alpha && is_fibonacci(s.Lx) && s.Lx > 2 && !(quasi_alpha(s.Lx) == *model.alpha))
            throw ConfigError("alpha does not match the Fibonacci pairing for L_x = " + std::to_string(s.Lx));
    }
}

std::string SweepConfig::hash() const {
    json j = to_json();
    j.erase("output_dir");
    j.erase("workers");
    j.erase("cache_points");
    return sha256_hex(j.dump());
}

SweepConfig load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return SweepConfig::from_json(j);
}

Rational point_alpha(const ModelSpec& model, const SizeSpec& size) {
    return model.alpha ? *model.alpha : quasi_alpha(size.Lx);
}

LatticeMap point_map(const ModelSpec& model, const SizeSpec& size) {
    if (model.kind == "haldane") return LatticeMap::honeycomb(size.Lx, size.Ly, model.boundary_rows);
    if (model.kind == "two-chain") return LatticeMap::two_chain(size.Lx);
    return LatticeMap::chain(size.Lx);
}

OperatorMatrix build_point(const ModelSpec& model, const SizeSpec& size, double V, double h, double gamma) {
    const PotentialProfile profile(V, h, point_alpha(model, size), size.Lx);
    const ChainBoundary cb = model.chain_boundary == "open" ? ChainBoundary::open : ChainBoundary::periodic;
    OperatorMatrix H;
    if (model.kind == "haldane") {
        if (!model.t2) throw ConfigError("haldane model needs an explicit t2");
        H = build_haldane_cylinder(size.Lx, size.Ly, model.t1, *model.t2, model.phi, model.boundary_rows);
        H = add_boundary_potential(H, point_map(model, size), profile);
    } else if (model.kind == "two-chain") {
        H = build_two_chain(size.Lx, model.t1, model.lambda, profile, cb);
    } else {
        H = build_aah_chain(size.Lx, model.t1, profile, cb);
    }
    const LatticeMap map = point_map(model, size);
    if (model.impurity_separation != 0) {
        ImpuritySpec spec;
        spec.anchor = model.impurity_anchor >= 0 ? model.impurity_anchor : size.Lx / 2;
        spec.separation = model.impurity_separation;
        spec.gamma = gamma;
        H = add_impurities(H, map, spec);
    } else if (model.domain_wall) {
        H = add_domain_wall(H, map, gamma);
    }
    return H;
}

}  // namespace hqc
