#include "amcsim/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace amcsim {

namespace {

std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        } else if (!isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

double default_delta_threshold(const WorkloadSpec& w) {
    if (w.delta_threshold >= 0.0)
        return w.delta_threshold;
    return w.vertices ? 0.7 / static_cast<double>(w.vertices) : 0.0;
}

} // namespace

BuiltWorkload build_workload(const ExperimentSpec& spec) {
    const WorkloadSpec& w = spec.workload;
    BuiltWorkload out;
    if (!w.trace_file.empty()) {
        out.events = load_trace(w.trace_file);
        validate_trace(out.events);
        return out;
    }
    Graph g = gen_graph(w.vertices, w.degree, w.model, spec.seed);
    out.input_bytes = csr_file_bytes(g);

    if (w.kernel == "pgd") {
        PgdParams params{w.alpha, default_delta_threshold(w), w.epsilon, w.iterations};
        LayoutPlan layout = default_layout(g.vertex_count(), g.edge_count());
        out.events = emit_pgd_trace(g, params, layout);
    } else if (w.kernel == "cc") {
        LayoutPlan layout = default_layout(g.vertex_count(), g.edge_count());
        out.events = emit_cc_trace(g, layout, w.iterations);
    } else if (w.kernel == "bfs" || w.kernel == "bellmanford") {
        MutationSchedule schedule{w.add_fraction, w.delete_fraction, spec.seed + 1};
        Graph g2 = mutate(g, schedule);
        LayoutPlan layout = default_layout(std::max(g.vertex_count(), g2.vertex_count()),
                                           std::max<uint64_t>(g.edge_count(), g2.edge_count()));
        out.events = w.kernel == "bfs" ? emit_bfs_trace(g, schedule, layout, w.iterations)
                                       : emit_bellmanford_trace(g, schedule, layout, w.iterations);
    } else {
        throw ConfigError("workload.kernel", "unknown kernel '" + w.kernel + "'");
    }
    return out;
}

PrefetcherHandle make_prefetcher(const PrefetcherSpec& spec) {
    PrefetcherHandle handle;
    std::vector<std::unique_ptr<Prefetcher>> children;
    for (const auto& name : split_names(spec.name)) {
        if (name == "none") {
            children.push_back(std::make_unique<NullPrefetcher>());
        } else if (name == "next_line") {
            children.push_back(std::make_unique<NextLinePrefetcher>());
        } else if (name == "ip_stride") {
            children.push_back(std::make_unique<IpStridePrefetcher>());
        } else if (name == "markov") {
            children.push_back(std::make_unique<MarkovPrefetcher>());
        } else if (name == "pc_temporal_lite") {
            children.push_back(std::make_unique<PcTemporalLitePrefetcher>(spec.degree));
        } else if (name == "amc") {
            auto amc = std::make_unique<AmcPrefetcher>(spec.amc);
            handle.amc = amc.get();
            children.push_back(std::move(amc));
        } else {
            throw ConfigError("prefetcher.name", "unknown prefetcher '" + name + "'");
        }
    }
    if (children.empty())
        children.push_back(std::make_unique<NullPrefetcher>());
    if (children.size() == 1)
        handle.prefetcher = std::move(children.front());
    else
        handle.prefetcher = std::make_unique<CompositePrefetcher>(std::move(children));
    return handle;
}

namespace {

struct PassResult {
    uint64_t demand_misses = 0;
    uint64_t issued = 0;
    uint64_t dropped = 0;
    PrefetchOutcomes outcomes;
    AmcStats amc;
    bool has_amc = false;
    unsigned iterations = 0;
    std::vector<IterationStats> per_iteration;
    std::vector<std::set<uint64_t>> nontarget_miss_sets;
};

PassResult run_pass(const std::vector<TraceEvent>& events, const ExperimentSpec& spec,
                    const PrefetcherSpec& pf_spec) {
    PrefetcherSpec effective = pf_spec;
    effective.amc.collect_iteration_sets = spec.collect_iteration_sets;
    PrefetcherHandle handle = make_prefetcher(effective);
    Hierarchy hier(spec.l1, spec.l2, spec.memory_latency, spec.mshr_entries);

    PassResult result;
    RegionMap map{};
    bool has_target = false, has_frontier = false;
    bool saw_target_this_iteration = false;
    auto iter_stats = [&]() -> IterationStats& {
        while (result.per_iteration.size() <= result.iterations)
            result.per_iteration.emplace_back();
        return result.per_iteration[result.iterations];
    };
    auto iter_set = [&]() -> std::set<uint64_t>& {
        while (result.nontarget_miss_sets.size() <= result.iterations)
            result.nontarget_miss_sets.emplace_back();
        return result.nontarget_miss_sets[result.iterations];
    };

    for (const auto& e : events) {
        if (!e.is_access()) {
            if (e.kind == TraceEvent::Kind::addr_tbase) {
                map.target = e.region;
                has_target = true;
            } else if (e.kind == TraceEvent::Kind::addr_fbase) {
                map.frontier = e.region;
                has_frontier = true;
            }
            if (has_target && has_frontier)
                map.validate();
            if (e.kind == TraceEvent::Kind::end && handle.amc != nullptr) {
                // snapshot before the prefetcher releases its buffers
                result.amc = handle.amc->stats();
                result.has_amc = true;
            }
            handle.prefetcher->on_directive(e);
            if (e.kind == TraceEvent::Kind::update) {
                ++result.iterations;
                saw_target_this_iteration = false;
            }
            continue;
        }

        PrefetchAccess pa;
        pa.vaddr = VirtualAddress{e.vaddr};
        pa.block = spec.translation.translate(pa.vaddr);
        pa.pc = e.pc;
        pa.has_pc = e.has_pc;
        pa.is_store = e.kind == TraceEvent::Kind::store;
        pa.region = classify(map, pa.vaddr);

        AccessOutcome outcome = hier.demand_access(pa.block, pa.is_store);
        pa.reached_l2 = outcome.level_hit != AccessOutcome::Level::l1;
        pa.l2_missed = outcome.has_l2_miss;
        if (pa.region == Region::target)
            saw_target_this_iteration = true;
        IterationStats& is = iter_stats();
        if (outcome.has_l2_miss) {
            ++is.demand_misses;
            ++result.demand_misses;
            // nontarget accounting mirrors the recorder: pre-trigger prologue
            // misses are excluded (used by the replay-fidelity analysis)
            if (pa.region != Region::target && saw_target_this_iteration) {
                ++is.nontarget_misses;
                if (spec.collect_iteration_sets)
                    iter_set().insert(pa.block.value);
            }
        }
        if (outcome.was_prefetched_hit)
            ++is.consumed;

        auto candidates = handle.prefetcher->on_access(pa);
        if (outcome.has_l2_miss) {
            auto miss_candidates =
                handle.prefetcher->on_l2_miss(outcome.l2_miss_block, pa.region == Region::target);
            candidates.insert(candidates.end(), miss_candidates.begin(), miss_candidates.end());
        }
        for (auto c : dedupe_candidates(std::move(candidates))) {
            if (hier.issue_prefetch(c)) {
                ++result.issued;
                ++is.prefetches_issued;
            }
        }
    }
    result.outcomes = hier.finalize();
    result.dropped = hier.prefetches_dropped();
    if (handle.amc != nullptr && !result.has_amc) {
        result.amc = handle.amc->stats();
        result.has_amc = true;
    }
    return result;
}

} // namespace

ReportRow run_experiment(const ExperimentSpec& spec) {
    BuiltWorkload workload = build_workload(spec);
    validate_trace(workload.events);

    PrefetcherSpec none;
    none.name = "none";
    PassResult baseline = run_pass(workload.events, spec, none);
    PassResult pass = run_pass(workload.events, spec, spec.prefetcher);

    ReportRow row;
    row.prefetcher = spec.prefetcher.name;
    row.seed = spec.seed;
    row.iterations = pass.iterations;
    row.demand_misses_baseline = baseline.demand_misses;
    row.demand_misses_with_prefetch = pass.demand_misses;
    row.prefetches_issued = pass.issued;
    row.useful = pass.outcomes.consumed_timely;
    row.useful_late = pass.outcomes.consumed_late;
    row.evicted_unused = pass.outcomes.evicted_unused;
    row.never_used = pass.outcomes.never_used;
    row.dropped = pass.dropped;
    uint64_t consumed = row.useful + row.useful_late;
    // coverage is miss elimination: the fraction of baseline demand misses
    // that no longer reach memory with the prefetcher on
    uint64_t eliminated = row.demand_misses_baseline > row.demand_misses_with_prefetch
                              ? row.demand_misses_baseline - row.demand_misses_with_prefetch
                              : 0;
    row.coverage = row.demand_misses_baseline
                       ? static_cast<double>(eliminated) / static_cast<double>(row.demand_misses_baseline)
                       : 0.0;
    row.accuracy =
        row.prefetches_issued ? static_cast<double>(consumed) / static_cast<double>(row.prefetches_issued) : 0.0;

    row.demand_dram_accesses = baseline.demand_misses;
    uint64_t metadata_accesses = 0;
    if (pass.has_amc) {
        row.metadata_bytes_read = pass.amc.metadata_bytes_read;
        row.metadata_bytes_written = pass.amc.metadata_bytes_written;
        row.peak_metadata_bytes = pass.amc.peak_metadata_bytes;
        metadata_accesses = (pass.amc.metadata_bytes_read + 63) / 64 + (pass.amc.metadata_bytes_written + 63) / 64;
    }
    row.prefetch_dram_accesses = pass.demand_misses + pass.issued + metadata_accesses;
    row.additional_traffic =
        row.demand_dram_accesses
            ? (static_cast<double>(row.prefetch_dram_accesses) - static_cast<double>(row.demand_dram_accesses)) /
                  static_cast<double>(row.demand_dram_accesses)
            : 0.0;

    row.input_bytes = workload.input_bytes;
    row.storage_overhead = row.input_bytes
                               ? static_cast<double>(row.peak_metadata_bytes) / static_cast<double>(row.input_bytes)
                               : 0.0;

    row.per_iteration = pass.per_iteration;
    row.baseline_per_iteration = baseline.per_iteration;
    if (spec.collect_iteration_sets) {
        row.baseline_nontarget_miss_sets = baseline.nontarget_miss_sets;
        row.candidate_sets = pass.amc.iteration_candidates;
    }
    return row;
}

SweepReport sweep_miss_size(const ExperimentSpec& spec, const std::vector<unsigned>& caps) {
    if (spec.prefetcher.name.find("amc") == std::string::npos)
        throw ConfigError("prefetcher.name", "sweep requires the amc prefetcher");
    ExperimentSpec unbounded = spec;
    unbounded.prefetcher.amc.miss_cap = 0;
    BuiltWorkload workload = build_workload(unbounded);
    PassResult pass = run_pass(workload.events, unbounded, unbounded.prefetcher);

    SweepReport report;
    for (const auto& [count, entries] : pass.amc.miss_count_histogram)
        report.histogram[count] = entries;
    uint64_t total = 0;
    for (const auto& [count, entries] : report.histogram)
        total += entries;
    for (unsigned cap : caps) {
        uint64_t within = 0;
        for (const auto& [count, entries] : report.histogram)
            if (count <= cap)
                within += entries;
        report.fraction_at_cap.emplace_back(cap, total ? static_cast<double>(within) / static_cast<double>(total)
                                                       : 0.0);
    }
    return report;
}

std::vector<ReportRow> compare(const std::vector<ExperimentSpec>& specs) {
    if (specs.size() < 2)
        throw ConfigError("prefetchers", "compare needs at least two prefetcher selections");
    for (size_t i = 1; i < specs.size(); ++i) {
        if (!(specs[i].workload == specs[0].workload) || specs[i].seed != specs[0].seed)
            throw ConfigError("workload", "compare requires all specs to share one workload and seed");
    }
    std::vector<ReportRow> rows;
    rows.reserve(specs.size());
    for (const auto& s : specs)
        rows.push_back(run_experiment(s));
    return rows;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

std::string report_csv_header(bool with_deltas) {
    std::string h =
        "prefetcher,seed,iterations,demand_misses_baseline,demand_misses_with_prefetch,prefetches_issued,"
        "useful,useful_late,evicted_unused,never_used,dropped,coverage,accuracy,demand_dram_accesses,"
        "prefetch_dram_accesses,additional_traffic,metadata_bytes_read,metadata_bytes_written,"
        "peak_metadata_bytes,input_bytes,storage_overhead";
    if (with_deltas)
        h += ",delta_coverage,delta_accuracy,delta_additional_traffic";
    return h;
}

std::string report_csv_row(const ReportRow& r, const ReportRow* baseline_row) {
    std::ostringstream os;
    std::string name = r.prefetcher;
    if (name.find(',') != std::string::npos)
        name = '"' + name + '"';
    os << name << ',' << r.seed << ',' << r.iterations << ',' << r.demand_misses_baseline << ','
       << r.demand_misses_with_prefetch << ',' << r.prefetches_issued << ',' << r.useful << ',' << r.useful_late
       << ',' << r.evicted_unused << ',' << r.never_used << ',' << r.dropped << ',' << fmt(r.coverage) << ','
       << fmt(r.accuracy) << ',' << r.demand_dram_accesses << ',' << r.prefetch_dram_accesses << ','
       << fmt(r.additional_traffic) << ',' << r.metadata_bytes_read << ',' << r.metadata_bytes_written << ','
       << r.peak_metadata_bytes << ',' << r.input_bytes << ',' << fmt(r.storage_overhead);
    if (baseline_row != nullptr) {
        os << ',' << fmt(r.coverage - baseline_row->coverage) << ',' << fmt(r.accuracy - baseline_row->accuracy)
           << ',' << fmt(r.additional_traffic - baseline_row->additional_traffic);
    }
    return os.str();
}

nlohmann::json report_to_json(const ReportRow& r) {
    nlohmann::json j;
    j["prefetcher"] = r.prefetcher;
    j["seed"] = r.seed;
    j["iterations"] = r.iterations;
    j["demand_misses_baseline"] = r.demand_misses_baseline;
    j["demand_misses_with_prefetch"] = r.demand_misses_with_prefetch;
    j["prefetches_issued"] = r.prefetches_issued;
    j["useful"] = r.useful;
    j["useful_late"] = r.useful_late;
    j["evicted_unused"] = r.evicted_unused;
    j["never_used"] = r.never_used;
    j["dropped"] = r.dropped;
    j["coverage"] = r.coverage;
    j["accuracy"] = r.accuracy;
    j["demand_dram_accesses"] = r.demand_dram_accesses;
    j["prefetch_dram_accesses"] = r.prefetch_dram_accesses;
    j["additional_traffic"] = r.additional_traffic;
    j["metadata_bytes_read"] = r.metadata_bytes_read;
    j["metadata_bytes_written"] = r.metadata_bytes_written;
    j["peak_metadata_bytes"] = r.peak_metadata_bytes;
    j["input_bytes"] = r.input_bytes;
    j["storage_overhead"] = r.storage_overhead;
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& it : r.per_iteration) {
        iters.push_back({{"demand_misses", it.demand_misses},
                         {"nontarget_misses", it.nontarget_misses},
                         {"prefetches_issued", it.prefetches_issued},
                         {"consumed", it.consumed}});
    }
    j["per_iteration"] = std::move(iters);
    return j;
}

nlohmann::json sweep_to_json(const SweepReport& report) {
    nlohmann::json j;
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [count, entries] : report.histogram)
        hist.push_back({{"miss_count", count}, {"entries", entries}});
    j["histogram"] = std::move(hist);
    nlohmann::json fracs = nlohmann::json::array();
    for (const auto& [cap, frac] : report.fraction_at_cap)
        fracs.push_back({{"cap", cap}, {"fraction", frac}});
    j["fraction_at_cap"] = std::move(fracs);
    return j;
}

std::string sweep_csv(const SweepReport& report) {
    std::ostringstream os;
    os << "miss_count,entries\n";
    for (const auto& [count, entries] : report.histogram)
        os << count << ',' << entries << '\n';
    os << "cap,fraction\n";
    for (const auto& [cap, frac] : report.fraction_at_cap)
        os << cap << ',' << fmt(frac) << '\n';
    return os.str();
}

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* section, const char* field, T fallback) {
    if (!j.contains(field))
        return fallback;
    try {
        return j.at(field).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string(section) + "." + field, "wrong type");
    }
}

CacheConfig parse_cache_level(const nlohmann::json& j, const char* section, CacheConfig fallback) {
    CacheConfig cfg = fallback;
    cfg.capacity_bytes = get_or<uint64_t>(j, section, "capacity", cfg.capacity_bytes);
    cfg.associativity = get_or<unsigned>(j, section, "associativity", cfg.associativity);
    cfg.hit_latency = get_or<unsigned>(j, section, "hit_latency", cfg.hit_latency);
    try {
        cfg.validate();
    } catch (const std::exception& ex) {
        throw ConfigError(section, ex.what());
    }
    return cfg;
}

} // namespace

ExperimentSpec parse_config(const nlohmann::json& j) {
    ExperimentSpec spec;
    if (j.contains("workload")) {
        const auto& w = j.at("workload");
        spec.workload.kernel = get_or<std::string>(w, "workload", "kernel", spec.workload.kernel);
        spec.workload.trace_file = get_or<std::string>(w, "workload", "trace_file", "");
        spec.workload.vertices = get_or<uint64_t>(w, "workload", "vertices", spec.workload.vertices);
        spec.workload.degree = get_or<uint64_t>(w, "workload", "degree", spec.workload.degree);
        std::string model = get_or<std::string>(w, "workload", "model", "uniform");
        if (model == "uniform")
            spec.workload.model = DegreeModel::uniform;
        else if (model == "power_law")
            spec.workload.model = DegreeModel::power_law;
        else
            throw ConfigError("workload.model", "must be 'uniform' or 'power_law'");
        spec.workload.iterations = get_or<unsigned>(w, "workload", "iterations", spec.workload.iterations);
        spec.workload.alpha = get_or<double>(w, "workload", "alpha", spec.workload.alpha);
        spec.workload.delta_threshold =
            get_or<double>(w, "workload", "delta_threshold", spec.workload.delta_threshold);
        spec.workload.epsilon = get_or<double>(w, "workload", "epsilon", spec.workload.epsilon);
        spec.workload.add_fraction = get_or<double>(w, "workload", "add_fraction", spec.workload.add_fraction);
        spec.workload.delete_fraction =
            get_or<double>(w, "workload", "delete_fraction", spec.workload.delete_fraction);
    }
    if (j.contains("cache")) {
        const auto& c = j.at("cache");
        if (c.contains("l1"))
            spec.l1 = parse_cache_level(c.at("l1"), "cache.l1", spec.l1);
        if (c.contains("l2"))
            spec.l2 = parse_cache_level(c.at("l2"), "cache.l2", spec.l2);
        spec.memory_latency = get_or<unsigned>(c, "cache", "memory_latency", spec.memory_latency);
        spec.mshr_entries = get_or<unsigned>(c, "cache", "mshr", spec.mshr_entries);
    }
    if (j.contains("prefetcher")) {
        const auto& p = j.at("prefetcher");
        spec.prefetcher.name = get_or<std::string>(p, "prefetcher", "name", spec.prefetcher.name);
        spec.prefetcher.degree = get_or<unsigned>(p, "prefetcher", "degree", spec.prefetcher.degree);
        spec.prefetcher.amc.miss_cap = get_or<unsigned>(p, "prefetcher", "miss_cap", spec.prefetcher.amc.miss_cap);
        spec.prefetcher.amc.consume_on_hit =
            get_or<bool>(p, "prefetcher", "consume_on_hit", spec.prefetcher.amc.consume_on_hit);
    }
    if (j.contains("translation")) {
        const auto& t = j.at("translation");
        std::string mode = get_or<std::string>(t, "translation", "mode", "identity");
        if (mode == "identity")
            spec.translation.mode = Translator::Mode::identity;
        else if (mode == "page_shuffled")
            spec.translation.mode = Translator::Mode::page_shuffled;
        else
            throw ConfigError("translation.mode", "must be 'identity' or 'page_shuffled'");
        spec.translation.seed = get_or<uint64_t>(t, "translation", "seed", 0);
    }
    spec.seed = get_or<uint64_t>(j, "", "seed", spec.seed);
    // fail fast on unusable selections
    make_prefetcher(spec.prefetcher);
    return spec;
}

ExperimentSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError("config", std::string("bad json: ") + ex.what());
    }
    return parse_config(j);
}

std::vector<std::string> check_assertions(const nlohmann::json& assertions, const ReportRow& row) {
    std::vector<std::string> failures;
    auto metric = [&](const std::string& name) -> std::optional<double> {
        if (name == "coverage")
            return row.coverage;
        if (name == "accuracy")
            return row.accuracy;
        if (name == "additional_traffic")
            return row.additional_traffic;
        if (name == "storage_overhead")
            return row.storage_overhead;
        return std::nullopt;
    };
    for (auto it = assertions.begin(); it != assertions.end(); ++it) {
        auto value = metric(it.key());
        if (!value) {
            failures.push_back("unknown metric '" + it.key() + "'");
            continue;
        }
        if (it.value().contains("min") && *value < it.value().at("min").get<double>())
            failures.push_back(it.key() + "=" + fmt(*value) + " below min " +
                               fmt(it.value().at("min").get<double>()));
        if (it.value().contains("max") && *value > it.value().at("max").get<double>())
            failures.push_back(it.key() + "=" + fmt(*value) + " above max " +
                               fmt(it.value().at("max").get<double>()));
    }
    return failures;
}

} // namespace amcsim
