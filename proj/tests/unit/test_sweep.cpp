#include <gtest/gtest.h>

#include <filesystem>

#include "hqc/errors.hpp"
#include "hqc/io.hpp"
#include "hqc/sweep.hpp"

using namespace hqc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hqc_test_" + name);
    fs::remove_all(p);
    return p;
}

SweepConfig small_config(const fs::path& out) {
    SweepConfig c;
    c.model.t2 = 0.2;
    c.sizes = {{5, 3}};
    c.V = {0.5, 1.0, 0.5};
    c.h = {0.0, 1.0, 0.25};
    c.output_dir = out.string();
    return c;
}

}  // namespace

TEST(Config, RoundTripAndHash) {
    SweepConfig c = small_config("x");
    const SweepConfig d = SweepConfig::from_json(c.to_json());
    EXPECT_EQ(d.to_json(), c.to_json());
    EXPECT_EQ(d.hash(), c.hash());
    SweepConfig e = c;
    e.workers = 8;
    e.output_dir = "elsewhere";
    EXPECT_EQ(e.hash(), c.hash());
    e.h.step = 0.5;
    EXPECT_NE(e.hash(), c.hash());
}

TEST(Config, Validation) {
    auto bad = [](auto mutate) {
        SweepConfig c = small_config("x");
        mutate(c);
        return c;
    };
    EXPECT_THROW(bad([](SweepConfig& c) { c.h.step = 0.0; }).validate(), ConfigError);
    EXPECT_THROW(bad([](SweepConfig& c) { c.h = {1.0, 0.0, 0.1}; }).validate(), ConfigError);
    EXPECT_THROW(bad([](SweepConfig& c) { c.sizes.clear(); }).validate(), ConfigError);
    EXPECT_THROW(bad([](SweepConfig& c) { c.model.t2.reset(); }).validate(), ConfigError);
    EXPECT_THROW(bad([](SweepConfig& c) { c.model.kind = "kagome"; }).validate(), ConfigError);
    EXPECT_THROW(bad([](SweepConfig& c) { c.observables.insert("entropy"); }).validate(), ConfigError);
    EXPECT_THROW(bad([](SweepConfig& c) { c.workers = 0; }).validate(), ConfigError);
    EXPECT_THROW(bad([](SweepConfig& c) {
                     c.sizes = {{21, 3}};
                     c.model.alpha = Rational{8, 21};
                 }).validate(),
                 ConfigError);
    EXPECT_THROW(SweepConfig::from_json(json{{"bogus", 1}}), ConfigError);
    EXPECT_THROW(SweepConfig::from_json(json{{"h", "wide"}}), ConfigError);
    EXPECT_NO_THROW(bad([](SweepConfig& c) { c.sizes = {{21, 3}, {34, 3}}; }).validate());
}

TEST(PhaseDiagram, SinglePointEqualsLibraryCall) {
    const fs::path out = scratch("single");
    SweepConfig c = small_config(out);
    c.V = Range::single(1.0);
    c.h = Range::single(0.6);
    const auto r = run_phase_diagram(c);
    ASSERT_EQ(r.records.size(), 1u);
    const ObservableRecord direct = observe(c, c.sizes[0], 1.0, 0.6, 0.0);
    const ObservableRecord& o = r.records[0].obs;
    EXPECT_EQ(o.ipr_full, direct.ipr_full);
    EXPECT_EQ(o.ipr_edge, direct.ipr_edge);
    EXPECT_EQ(o.max_abs_im, direct.max_abs_im);
    EXPECT_EQ(o.gap, direct.gap);
    EXPECT_EQ(o.n_im_zeros, direct.n_im_zeros);
}

TEST(PhaseDiagram, WorkerCountInvariance) {
    std::string ref_csv, ref_json;
    for (int w : {1, 2, 8}) {
        const fs::path out = scratch("workers" + std::to_string(w));
        SweepConfig c = small_config(out);
        c.workers = w;
        c.cache_points = false;
        const auto r = run_phase_diagram(c);
        EXPECT_TRUE(r.complete);
        EXPECT_TRUE(r.failures.empty());
        const std::string csv = read_text(out / "records.csv"), js = read_text(out / "records.json");
        if (w == 1) {
            ref_csv = csv;
            ref_json = js;
        } else {
            EXPECT_EQ(csv, ref_csv);
            EXPECT_EQ(js, ref_json);
        }
    }
}

TEST(PhaseDiagram, ResumeIsIdempotentAndManifestComplete) {
    const fs::path out = scratch("resume");
    const SweepConfig c = small_config(out);
    const auto first = run_phase_diagram(c);
    EXPECT_FALSE(first.reused);
    const std::string before = read_text(out / "records.csv");
    const auto second = run_phase_diagram(c);
    EXPECT_TRUE(second.reused);
    EXPECT_EQ(read_text(out / "records.csv"), before);

    const Manifest m = Manifest::from_json(json::parse(read_text(out / "manifest.json")));
    EXPECT_TRUE(m.complete);
    EXPECT_EQ(m.config_hash, c.hash());
    for (const auto& e : m.files) EXPECT_EQ(sha256_file(out / e.path), e.sha256);
    std::set<std::string> listed;
    for (const auto& e : m.files) listed.insert(e.path);
    for (const auto& f : fs::directory_iterator(out))
        if (f.is_regular_file() && f.path().filename() != "manifest.json")
            EXPECT_TRUE(listed.count(f.path().filename().string())) << f.path();
    EXPECT_EQ(m.config, c.to_json());
}

TEST(PhaseDiagram, CanonicalOrderAndCurves) {
    const fs::path out = scratch("canon");
    const auto r = run_phase_diagram(small_config(out));
    ASSERT_EQ(r.records.size(), 10u);
    for (size_t k = 1; k < r.records.size(); ++k) EXPECT_FALSE(canonical_less(r.records[k], r.records[k - 1]));
    for (const auto& rec : r.records) {
        if (rec.h == 1.0) EXPECT_TRUE(std::isnan(rec.obs.fidelity));
        else {
            EXPECT_GE(rec.obs.fidelity, 0.0);
            EXPECT_LE(rec.obs.fidelity, 1.0 + 1e-12);
        }
        EXPECT_GE(rec.obs.ipr_full, 1.0 / 30 - 1e-12);
        EXPECT_LE(rec.obs.ipr_full, 1.0 + 1e-12);
        EXPECT_FALSE(std::isnan(rec.obs.dEg_dh));
    }
}

TEST(PhaseDiagram, FailuresAreReportedAndRunContinues) {
    const fs::path out = scratch("fail");
    SweepConfig c = small_config(out);
    c.selector.rule = SelectorRule::in_gap_edge;
    c.selector.edge_threshold = 1.01;  // nothing qualifies
    const auto r = run_phase_diagram(c);
    EXPECT_EQ(r.records.size(), 10u);
    EXPECT_EQ(r.failures.size(), 10u);
    const Manifest m = Manifest::from_json(json::parse(read_text(out / "manifest.json")));
    EXPECT_EQ(m.failures.size(), 10u);
}

TEST(SizeScan, SingleSizeHasNoFit) {
    const fs::path out = scratch("sizescan");
    SweepConfig c = small_config(out);
    c.V = Range::single(1.0);
    const auto r = run_size_scan(c);
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_FALSE(r.npt_fit.has_value());
    EXPECT_FALSE(r.h2_fit.has_value());
    EXPECT_TRUE(fs::exists(out / "size_scan.csv"));
}

TEST(ImpurityScan, HermitianStartHasNoEvents) {
    const fs::path out = scratch("imp");
    SweepConfig c;
    c.model.t2 = 0.2;
    c.model.impurity_separation = 1;
    c.sizes = {{6, 3}};
    c.V = Range::single(0.0);
    c.h = Range::single(0.0);
    c.gamma = Range::single(0.0);
    c.output_dir = out.string();
    const auto r = run_impurity_scan(c);
    ASSERT_EQ(r.points.size(), 1u);
    EXPECT_EQ(r.points[0].pt_events, 0);
    EXPECT_LT(r.points[0].max_abs_im, 1e-10);
    EXPECT_TRUE(r.events.empty());
    c.model.impurity_separation = 0;
    EXPECT_THROW(run_impurity_scan(c), ConfigError);
}

TEST(PlotData, SchemasAndCoverage) {
    const fs::path out = scratch("plots");
    const auto r = run_phase_diagram(small_config(out));
    const auto files = emit_plot_data(r.records, "fig1b", out / "plots");
    ASSERT_EQ(files.size(), 2u);
    const std::string csv = read_text(out / "plots" / "fig1b.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "V,h,ipr_full,ipr_edge");
    const std::string svg = read_text(out / "plots" / "fig1b.svg");
    EXPECT_NE(svg.find("<metadata>"), std::string::npos);
    emit_plot_data(r.records, "fig4d", out / "plots", false);
    const std::string c4 = read_text(out / "plots" / "fig4d.csv");
    EXPECT_EQ(c4.substr(0, c4.find('\n')), "V,h,max_abs_im,max_abs_im_edge");
    EXPECT_THROW(emit_plot_data(r.records, "fig9z", out / "plots"), CoverageError);
    std::vector<SweepRecord> one_v;
    for (const auto& x : r.records)
        if (x.V == 1.0) one_v.push_back(x);
    EXPECT_THROW(emit_plot_data(one_v, "fig1b", out / "plots"), CoverageError);
}

TEST(Regions, ContiguityCount) {
    std::vector<SweepRecord> recs;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j) {
            SweepRecord r;
            r.V = i;
            r.h = j;
            r.obs.ipr_full = j < 2 ? 0.01 : (j < 4 ? 0.2 : 0.9);
            recs.push_back(r);
        }
    auto m = classify_regions(recs, 0.05, 0.5);
    EXPECT_TRUE(m.three_contiguous);
    recs[5].obs.ipr_full = 0.01;  // isolated island of label 0 at (0, 5)
    m = classify_regions(recs, 0.05, 0.5);
    EXPECT_EQ(m.components[0], 2);
    EXPECT_FALSE(m.three_contiguous);
}

TEST(Cancel, SkipsRemainingTasks) {
    reset_cancel();
    std::atomic<int> ran{0};
    const int done = parallel_for(100, 1, [&](int i) {
        ++ran;
        if (i == 4) request_cancel();
    });
    reset_cancel();
    EXPECT_EQ(done, 5);
    EXPECT_EQ(ran.load(), 5);
}
