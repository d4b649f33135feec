#include "amcsim/amc.hpp"
#include "amcsim/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace amcsim;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitAssertFailed = 3;

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError("config", std::string("bad json: ") + ex.what());
    }
    return j;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << content;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, const std::string& format,
            bool check_asserts, const std::string& dump_metadata_dir) {
    nlohmann::json j = read_json(config_path);
    ExperimentSpec spec = parse_config(j);
    ReportRow row = run_experiment(spec);

    std::string rendered;
    if (format == "json") {
        rendered = report_to_json(row).dump(2) + "\n";
    } else {
        rendered = report_csv_header() + "\n" + report_csv_row(row) + "\n";
    }
    if (out_dir.empty()) {
        std::cout << rendered;
    } else {
        write_file(fs::path(out_dir) / (format == "json" ? "report.json" : "report.csv"), rendered);
    }

    if (!dump_metadata_dir.empty()) {
        // rebuild the prefetcher pass to snapshot its metadata buffers
        BuiltWorkload wl = build_workload(spec);
        PrefetcherHandle handle = make_prefetcher(spec.prefetcher);
        if (handle.amc != nullptr) {
            Hierarchy hier(spec.l1, spec.l2, spec.memory_latency, spec.mshr_entries);
            RegionMap map{};
            for (const auto& e : wl.events) {
                if (!e.is_access()) {
                    if (e.kind == TraceEvent::Kind::addr_tbase)
                        map.target = e.region;
                    if (e.kind == TraceEvent::Kind::addr_fbase)
                        map.frontier = e.region;
                    if (e.kind == TraceEvent::Kind::end)
                        break; // keep the buffers alive for the dump
                    handle.prefetcher->on_directive(e);
                    continue;
                }
                PrefetchAccess pa;
                pa.vaddr = VirtualAddress{e.vaddr};
                pa.block = spec.translation.translate(pa.vaddr);
                pa.pc = e.pc;
                pa.has_pc = e.has_pc;
                pa.is_store = e.kind == TraceEvent::Kind::store;
                pa.region = classify(map, pa.vaddr);
                AccessOutcome out = hier.demand_access(pa.block, pa.is_store);
                pa.reached_l2 = out.level_hit != AccessOutcome::Level::l1;
                pa.l2_missed = out.has_l2_miss;
                auto cands = handle.prefetcher->on_access(pa);
                if (out.has_l2_miss) {
                    auto more = handle.prefetcher->on_l2_miss(out.l2_miss_block, pa.region == Region::target);
                    cands.insert(cands.end(), more.begin(), more.end());
                }
                for (auto c : dedupe_candidates(std::move(cands)))
                    hier.issue_prefetch(c);
            }
            handle.amc->dump_metadata(dump_metadata_dir);
        } else {
            std::cerr << "warning: --dump-metadata needs an amc prefetcher in the selection\n";
        }
    }

    if (check_asserts && j.contains("assertions")) {
        auto failures = check_assertions(j.at("assertions"), row);
        for (const auto& f : failures)
            std::cerr << "assertion failed: " << f << "\n";
        if (!failures.empty())
            return kExitAssertFailed;
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& caps_arg, const std::string& out_dir) {
    ExperimentSpec spec = parse_config(read_json(config_path));
    std::vector<unsigned> caps;
    std::stringstream ss(caps_arg);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            caps.push_back(static_cast<unsigned>(std::stoul(tok)));
    if (caps.empty())
        throw ConfigError("caps", "no cap values given");
    SweepReport report = sweep_miss_size(spec, caps);
    std::string rendered = sweep_csv(report);
    if (out_dir.empty())
        std::cout << rendered;
    else
        write_file(fs::path(out_dir) / "sweep.csv", rendered);
    return 0;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& out_dir) {
    std::vector<ExperimentSpec> specs;
    for (const auto& path : config_paths) {
        nlohmann::json j = read_json(path);
        if (j.contains("prefetchers")) {
            // one config listing several selections
            for (const auto& sel : j.at("prefetchers")) {
                nlohmann::json one = j;
                one.erase("prefetchers");
                one["prefetcher"]["name"] = sel.get<std::string>();
                specs.push_back(parse_config(one));
            }
        } else {
            specs.push_back(parse_config(j));
        }
    }
    auto rows = compare(specs);
    std::ostringstream os;
    os << report_csv_header(true) << "\n";
    for (const auto& row : rows)
        os << report_csv_row(row, &rows.front()) << "\n";
    if (out_dir.empty())
        std::cout << os.str();
    else
        write_file(fs::path(out_dir) / "compare.csv", os.str());
    return 0;
}

int cmd_gen_trace(const std::string& kernel, uint64_t vertices, uint64_t degree, uint64_t seed,
                  unsigned iterations, const std::string& model, const std::string& out_path) {
    ExperimentSpec spec;
    spec.workload.kernel = kernel;
    spec.workload.vertices = vertices;
    spec.workload.degree = degree;
    spec.workload.iterations = iterations;
    if (model == "power_law")
        spec.workload.model = DegreeModel::power_law;
    else if (model != "uniform")
        throw ConfigError("model", "must be 'uniform' or 'power_law'");
    spec.seed = seed;
    BuiltWorkload wl = build_workload(spec);
    save_trace(wl.events, out_path);
    std::cout << "wrote " << wl.events.size() << " events to " << out_path << "\n";
    return 0;
}

int cmd_fixture(const std::string& name, const std::string& out_dir) {
    if (name != "worked-example")
        throw ConfigError("name", "unknown fixture '" + name + "'");
    auto fx = worked_example_fixture();
    fs::create_directories(out_dir);

    save_trace(fx.full_trace(), (fs::path(out_dir) / "worked_example.jsonl").string());
    save_csr(fx.graph, (fs::path(out_dir) / "worked_example.csr").string());

    nlohmann::json meta;
    auto rows_to_json = [](const std::vector<ExpectedEntry>& rows) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json j;
            j["trigger_deltas"] = r.trigger_deltas;
            std::vector<uint64_t> misses;
            for (auto m : r.misses)
                misses.push_back(m.value);
            j["miss_blocks"] = misses;
            out.push_back(std::move(j));
        }
        return out;
    };
    meta["expected_entries"] = rows_to_json(fx.expected_entries);
    meta["table_entries"] = rows_to_json(fx.table_entries);
    meta["active_iteration1"] = fx.active1;
    meta["active_iteration2"] = fx.active2;
    nlohmann::json flags = nlohmann::json::array();
    for (const auto* iter : {&fx.iteration1, &fx.iteration2}) {
        nlohmann::json one = nlohmann::json::array();
        for (const auto& a : *iter)
            one.push_back({{"vaddr", a.vaddr}, {"l2_miss", a.l2_miss}});
        flags.push_back(std::move(one));
    }
    meta["iteration_access_flags"] = std::move(flags);
    write_file(fs::path(out_dir) / "expected_entries.json", meta.dump(2) + "\n");
    std::cout << "wrote worked-example fixture to " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trace-driven cache hierarchy simulator with an access-to-miss correlation prefetcher"};
    app.require_subcommand(1);

    std::string config_path, out_dir, format = "csv", caps = "5,10,20,40", dump_dir;
    bool check_asserts = false;
    std::vector<std::string> compare_configs;
    std::string kernel = "pgd", model = "uniform", trace_out, fixture_name = "worked-example";
    uint64_t vertices = 1000, degree = 9, seed = 42;
    unsigned iterations = 10;

    auto* run = app.add_subcommand("run", "run one experiment from a config file");
    run->add_option("--config", config_path, "experiment config (json)")->required();
    run->add_option("--out", out_dir, "output directory (stdout when omitted)");
    run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    run->add_flag("--assert", check_asserts, "evaluate the config's assertions section");
    run->add_option("--dump-metadata", dump_dir, "dump the prefetcher metadata buffers to a directory");

    auto* sweep = app.add_subcommand("sweep", "miss-size sensitivity sweep (unbounded windows)");
    sweep->add_option("--config", config_path, "experiment config (json)")->required();
    sweep->add_option("--caps", caps, "comma-separated cap list");
    sweep->add_option("--out", out_dir, "output directory (stdout when omitted)");

    auto* cmp = app.add_subcommand("compare", "compare prefetchers over one workload");
    cmp->add_option("--config", compare_configs, "config file(s); one may list \"prefetchers\": [...]")
        ->required()
        ->expected(-1);
    cmp->add_option("--out", out_dir, "output directory (stdout when omitted)");

    auto* gen = app.add_subcommand("gen-trace", "generate a kernel trace file");
    gen->add_option("--kernel", kernel, "pgd|bfs|cc|bellmanford")
        ->check(CLI::IsMember({"pgd", "bfs", "cc", "bellmanford"}));
    gen->add_option("--vertices", vertices, "vertex count");
    gen->add_option("--degree", degree, "average degree");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--iterations", iterations, "max iterations");
    gen->add_option("--model", model, "uniform|power_law");
    gen->add_option("--out", trace_out, "output trace path (.jsonl for text)")->required();

    auto* fix = app.add_subcommand("fixture", "write a named fixture to a directory");
    fix->add_option("--name", fixture_name, "fixture name (worked-example)");
    fix->add_option("--out", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, out_dir, format, check_asserts, dump_dir);
        if (sweep->parsed())
            return cmd_sweep(config_path, caps, out_dir);
        if (cmp->parsed())
            return cmd_compare(compare_configs, out_dir);
        if (gen->parsed())
            return cmd_gen_trace(kernel, vertices, degree, seed, iterations, model, trace_out);
        if (fix->parsed())
            return cmd_fixture(fixture_name, out_dir);
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitConfigError;
    }
    return 0;
}
