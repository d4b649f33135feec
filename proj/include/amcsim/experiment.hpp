#pragma once

#include "amcsim/amc.hpp"
#include "amcsim/baselines.hpp"
#include "amcsim/cache.hpp"
#include "amcsim/graph.hpp"
#include "amcsim/prefetcher.hpp"
#include "amcsim/translate.hpp"
#include "amcsim/workload.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace amcsim {

struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string f, const std::string& what)
        : std::runtime_error("config field '" + f + "': " + what), field(std::move(f)) {}
};

struct WorkloadSpec {
    std::string kernel = "pgd"; // pgd | bfs | cc | bellmanford, or empty with trace_file
    std::string trace_file;
    uint64_t vertices = 1000;
    uint64_t degree = 9;
    DegreeModel model = DegreeModel::uniform;
    unsigned iterations = 10;
    double alpha = 0.85;
    double delta_threshold = -1.0; // < 0: auto (0.7 / vertices)
    double epsilon = 1e-12;
    double add_fraction = 0.1; // bfs / bellmanford second run
    double delete_fraction = 0.1;

    friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

struct PrefetcherSpec {
    std::string name = "none"; // comma-joined composite of:
                               // none,next_line,ip_stride,markov,pc_temporal_lite,amc
    unsigned degree = 1;       // pc_temporal_lite prediction depth
    AmcConfig amc{};
};

struct ExperimentSpec {
    WorkloadSpec workload{};
    CacheConfig l1 = l1_default();
    CacheConfig l2 = l2_default();
    unsigned memory_latency = 200;
    unsigned mshr_entries = 16;
    PrefetcherSpec prefetcher{};
    Translator translation{};
    uint64_t seed = 42;
    bool collect_iteration_sets = false;
};

struct IterationStats {
    uint64_t demand_misses = 0;
    uint64_t nontarget_misses = 0;
    uint64_t prefetches_issued = 0;
    uint64_t consumed = 0; // timely + late
};

struct ReportRow {
    std::string prefetcher;
    uint64_t seed = 0;
    unsigned iterations = 0;
    uint64_t demand_misses_baseline = 0;
    uint64_t demand_misses_with_prefetch = 0;
    uint64_t prefetches_issued = 0;
    uint64_t useful = 0;      // consumed timely
    uint64_t useful_late = 0; // consumed late
    uint64_t evicted_unused = 0;
    uint64_t never_used = 0;
    uint64_t dropped = 0;
    double coverage = 0.0; // (useful + useful_late) / baseline misses
    double accuracy = 0.0; // (useful + useful_late) / issued
    uint64_t demand_dram_accesses = 0;
    uint64_t prefetch_dram_accesses = 0;
    double additional_traffic = 0.0;
    uint64_t metadata_bytes_read = 0;
    uint64_t metadata_bytes_written = 0;
    uint64_t peak_metadata_bytes = 0;
    uint64_t input_bytes = 0;
    double storage_overhead = 0.0;

    std::vector<IterationStats> per_iteration;
    std::vector<IterationStats> baseline_per_iteration;
    // Populated when collect_iteration_sets is on.
    std::vector<std::set<uint64_t>> baseline_nontarget_miss_sets;
    std::vector<std::set<uint64_t>> candidate_sets;
};

struct BuiltWorkload {
    std::vector<TraceEvent> events;
    uint64_t input_bytes = 0;
};

BuiltWorkload build_workload(const ExperimentSpec& spec);

struct PrefetcherHandle {
    std::unique_ptr<Prefetcher> prefetcher;
    AmcPrefetcher* amc = nullptr; // borrowed, may be null
};

PrefetcherHandle make_prefetcher(const PrefetcherSpec& spec);

// Runs the prefetcher-free baseline pass, then the selected prefetcher on the
// identical trace; fully deterministic for a fixed spec.
ReportRow run_experiment(const ExperimentSpec& spec);

struct SweepReport {
    std::map<unsigned, uint64_t> histogram; // window miss count -> entries
    std::vector<std::pair<unsigned, double>> fraction_at_cap;
};

// Unbounded-window recording pass; reports the window miss-count distribution
// and the cumulative fraction at each cap.
SweepReport sweep_miss_size(const ExperimentSpec& spec, const std::vector<unsigned>& caps);

// One row per prefetcher selection over a shared workload; rejects specs
// whose workloads differ.
std::vector<ReportRow> compare(const std::vector<ExperimentSpec>& specs);

std::string report_csv_header(bool with_deltas = false);
std::string report_csv_row(const ReportRow& row, const ReportRow* baseline_row = nullptr);
nlohmann::json report_to_json(const ReportRow& row);
nlohmann::json sweep_to_json(const SweepReport& report);
std::string sweep_csv(const SweepReport& report);

ExperimentSpec parse_config(const nlohmann::json& j);
ExperimentSpec load_config(const std::string& path);

// Post-run threshold checks from the config's "assertions" section:
// { "coverage": {"min": 0.4}, "accuracy": {"min": 0.5}, ... }
std::vector<std::string> check_assertions(const nlohmann::json& assertions, const ReportRow& row);

} // namespace amcsim
