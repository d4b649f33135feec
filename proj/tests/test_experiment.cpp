#include <doctest.h>

#include "amcsim/experiment.hpp"

#include <filesystem>

#include <fstream>

namespace fs = std::filesystem;

using namespace amcsim;

namespace {

ExperimentSpec small_spec(const std::string& prefetcher, uint64_t seed = 42) {
    ExperimentSpec spec;
    spec.workload.kernel = "pgd";
    spec.workload.vertices = 200;
    spec.workload.degree = 6;
    spec.workload.iterations = 5;
    spec.l1 = {1024, 8, 4};
    spec.l2 = {4 * 1024, 8, 12};
    spec.prefetcher.name = prefetcher;
    spec.seed = seed;
    return spec;
}

} // namespace

TEST_CASE("an init/end trace produces all-zero counters") {
    // write a minimal trace file and run it
    std::vector<TraceEvent> ev{TraceEvent::directive(TraceEvent::Kind::init),
                               TraceEvent::directive(TraceEvent::Kind::end)};
    std::string trace_path = (fs::temp_directory_path() / "amcsim_empty_trace.bin").string();
    save_trace(ev, trace_path);
    ExperimentSpec spec;
    spec.workload.kernel.clear();
    spec.workload.trace_file = trace_path;
    spec.prefetcher.name = "amc";
    ReportRow row = run_experiment(spec);
    CHECK(row.demand_misses_baseline == 0);
    CHECK(row.prefetches_issued == 0);
    CHECK(row.coverage == 0.0);
    CHECK(row.accuracy == 0.0);
    CHECK(row.storage_overhead == 0.0);
}

TEST_CASE("identical specs produce byte-identical reports") {
    auto spec = small_spec("amc");
    ReportRow a = run_experiment(spec);
    ReportRow b = run_experiment(spec);
    CHECK(report_csv_row(a) == report_csv_row(b));
    CHECK(report_to_json(a).dump() == report_to_json(b).dump());
}

TEST_CASE("metric identities hold on a real run") {
    auto spec = small_spec("amc");
    ReportRow row = run_experiment(spec);
    uint64_t consumed = row.useful + row.useful_late;
    CHECK(row.useful + row.useful_late + row.evicted_unused + row.never_used == row.prefetches_issued);
    uint64_t eliminated = row.demand_misses_baseline - row.demand_misses_with_prefetch;
    CHECK(row.coverage ==
          doctest::Approx(static_cast<double>(eliminated) / static_cast<double>(row.demand_misses_baseline)));
    CHECK(row.accuracy ==
          doctest::Approx(static_cast<double>(consumed) / static_cast<double>(row.prefetches_issued)));
    uint64_t meta_accesses =
        (row.metadata_bytes_read + 63) / 64 + (row.metadata_bytes_written + 63) / 64;
    CHECK(row.prefetch_dram_accesses ==
          row.demand_misses_with_prefetch + row.prefetches_issued + meta_accesses);
    CHECK(row.input_bytes > 0);
    CHECK(row.storage_overhead ==
          doctest::Approx(static_cast<double>(row.peak_metadata_bytes) / static_cast<double>(row.input_bytes)));
}

TEST_CASE("next line nearly covers a sequential trace") {
    // sequential accesses over a large array, two iterations
    std::vector<TraceEvent> ev;
    ev.push_back(TraceEvent::directive(TraceEvent::Kind::init));
    ev.push_back(TraceEvent::region_directive(TraceEvent::Kind::addr_tbase, {VirtualAddress{0x10000000}, 8, 8}));
    ev.push_back(TraceEvent::region_directive(TraceEvent::Kind::addr_fbase, {VirtualAddress{0x20000000}, 8, 1}));
    for (int iter = 0; iter < 2; ++iter) {
        for (uint64_t i = 0; i < 4096; ++i)
            ev.push_back(TraceEvent::access(0x40000000 + i * 64));
        ev.push_back(TraceEvent::directive(TraceEvent::Kind::update));
    }
    ev.push_back(TraceEvent::directive(TraceEvent::Kind::end));
    std::string trace_path = (fs::temp_directory_path() / "amcsim_seq_trace.bin").string();
    save_trace(ev, trace_path);

    ExperimentSpec spec;
    spec.workload.kernel.clear();
    spec.workload.trace_file = trace_path;
    spec.l1 = {1024, 8, 4};
    spec.l2 = {4 * 1024, 8, 12};
    spec.prefetcher.name = "next_line";
    ReportRow row = run_experiment(spec);
    CHECK(row.coverage > 0.9);
    CHECK(row.demand_misses_with_prefetch < row.demand_misses_baseline / 4);
}

TEST_CASE("compare rejects mismatched workloads and orders the composite above next line") {
    // the composite is the deployed configuration: next-line stays on as the
    // L2 stream prefetcher while the correlation prefetcher covers the rest
    auto amc = small_spec("next_line,amc");
    auto nl = small_spec("next_line");
    auto rows = compare({nl, amc});
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].coverage > rows[0].coverage);

    auto other = small_spec("amc");
    other.workload.vertices = 300;
    CHECK_THROWS_AS(compare({nl, other}), ConfigError);
    CHECK_THROWS_AS(compare({nl}), ConfigError);
}

TEST_CASE("config parsing reports the offending field") {
    nlohmann::json j;
    j["workload"]["kernel"] = "pgd";
    j["workload"]["vertices"] = "not-a-number";
    try {
        parse_config(j);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.field == "workload.vertices");
    }

    nlohmann::json bad_pf;
    bad_pf["prefetcher"]["name"] = "warp_drive";
    try {
        parse_config(bad_pf);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(e.field == "prefetcher.name");
    }

    nlohmann::json bad_cache;
    bad_cache["cache"]["l2"]["capacity"] = 1000;
    CHECK_THROWS_AS(parse_config(bad_cache), ConfigError);
}

TEST_CASE("config file round trip drives a run") {
    nlohmann::json j;
    j["workload"] = {{"kernel", "pgd"}, {"vertices", 100}, {"degree", 4}, {"iterations", 3}};
    j["cache"] = {{"l1", {{"capacity", 1024}}}, {"l2", {{"capacity", 4096}}}};
    j["prefetcher"] = {{"name", "next_line,amc"}};
    j["translation"] = {{"mode", "page_shuffled"}, {"seed", 3}};
    j["seed"] = 7;
    std::string cfg_path = (fs::temp_directory_path() / "amcsim_exp_config.json").string();
    std::ofstream(cfg_path) << j.dump(2);
    ExperimentSpec spec = load_config(cfg_path);
    CHECK(spec.prefetcher.name == "next_line,amc");
    CHECK(spec.translation.mode == Translator::Mode::page_shuffled);
    ReportRow row = run_experiment(spec);
    CHECK(row.iterations == 3);
}

TEST_CASE("sweep reports a monotone cumulative distribution") {
    auto spec = small_spec("amc");
    auto report = sweep_miss_size(spec, {1, 5, 10, 20, 40, 1000});
    REQUIRE_FALSE(report.fraction_at_cap.empty());
    double prev = 0.0;
    for (const auto& [cap, frac] : report.fraction_at_cap) {
        CHECK(frac >= prev);
        prev = frac;
    }
    CHECK(report.fraction_at_cap.back().second == doctest::Approx(1.0));

    auto not_amc = small_spec("next_line");
    CHECK_THROWS_AS(sweep_miss_size(not_amc, {5}), ConfigError);
}

TEST_CASE("single-miss windows saturate the sweep at cap 1") {
    // one miss per window: each target access followed by one distinct miss
    std::vector<TraceEvent> ev;
    ev.push_back(TraceEvent::directive(TraceEvent::Kind::init));
    RegionDescriptor target{VirtualAddress{0x10000000}, 512, 8};
    RegionDescriptor frontier{VirtualAddress{0x20000000}, 512, 1};
    ev.push_back(TraceEvent::region_directive(TraceEvent::Kind::addr_tbase, target));
    ev.push_back(TraceEvent::region_directive(TraceEvent::Kind::addr_fbase, frontier));
    for (uint64_t v = 0; v < 64; ++v) {
        ev.push_back(TraceEvent::access(target.base.value + v * 8));
        ev.push_back(TraceEvent::access(0x40000000 + v * 64));
    }
    ev.push_back(TraceEvent::directive(TraceEvent::Kind::update));
    ev.push_back(TraceEvent::directive(TraceEvent::Kind::end));
    std::string trace_path = (fs::temp_directory_path() / "amcsim_one_miss_trace.bin").string();
    save_trace(ev, trace_path);

    ExperimentSpec spec;
    spec.workload.kernel.clear();
    spec.workload.trace_file = trace_path;
    spec.l1 = {512, 8, 4};
    spec.l2 = {512, 8, 12};
    spec.prefetcher.name = "amc";
    auto report = sweep_miss_size(spec, {1, 20});
    REQUIRE(report.fraction_at_cap.size() == 2);
    CHECK(report.fraction_at_cap[0].second == doctest::Approx(1.0));
}

TEST_CASE("replay fidelity does not depend on contiguous physical pages") {
    // frozen active sets; the candidate set must equal the previous
    // iteration's non-target miss set under both translations, even though
    // page shuffling scatters the recorded block addresses
    for (auto mode : {Translator::Mode::identity, Translator::Mode::page_shuffled}) {
        // full-thrash geometry: every touched line misses, so the recorded
        // windows tile the baseline miss set exactly
        ExperimentSpec spec;
        spec.workload.kernel = "pgd";
        spec.workload.vertices = 1000;
        spec.workload.degree = 6;
        spec.workload.iterations = 5;
        spec.workload.delta_threshold = 0.0;
        spec.workload.epsilon = 0.0;
        spec.l1 = {1024, 8, 4};
        spec.l2 = {4096, 8, 12};
        spec.translation = {mode, 7};
        spec.seed = 13;
        spec.prefetcher.name = "amc";
        spec.collect_iteration_sets = true;
        ReportRow row = run_experiment(spec);
        REQUIRE(row.iterations == 5);
        for (unsigned k = 2; k < row.iterations; ++k) {
            REQUIRE(k < row.candidate_sets.size());
            REQUIRE(row.candidate_sets[k] == row.baseline_nontarget_miss_sets[k - 1]);
        }
        CHECK(row.coverage > 0.5);
    }
}

TEST_CASE("assertions surface threshold violations") {
    auto spec = small_spec("amc");
    ReportRow row = run_experiment(spec);
    nlohmann::json ok = {{"coverage", {{"min", 0.0}}}};
    CHECK(check_assertions(ok, row).empty());
    nlohmann::json bad = {{"coverage", {{"min", 1.1}}}, {"unknown_metric", {{"min", 0}}}};
    auto failures = check_assertions(bad, row);
    CHECK(failures.size() == 2);
}
