// Command line front end: build and persist partitioned indexes, run top-k
// queries against them, cross-check with a linear scan, benchmark, and
// generate clustered synthetic workloads.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "reftrie/reftrie.hpp"

namespace {

using nlohmann::json;

json stats_json(reftrie::TrajectoryId query_id, const reftrie::SearchStats& stats,
                double elapsed_seconds) {
    return json{{"query", query_id},
                {"nodes_visited", stats.nodes_visited},
                {"nodes_pruned", stats.nodes_pruned},
                {"leaves_evaluated", stats.leaves_evaluated},
                {"exact_distances", stats.exact_distances},
                {"elapsed_seconds", elapsed_seconds}};
}

void print_hits(reftrie::TrajectoryId query_id,
                const std::vector<reftrie::SearchHit>& hits) {
    for (std::size_t rank = 0; rank < hits.size(); ++rank)
        std::printf("%llu\t%zu\t%llu\t%.9f\n",
                    static_cast<unsigned long long>(query_id), rank + 1,
                    static_cast<unsigned long long>(hits[rank].id),
                    hits[rank].distance);
}

std::pair<std::uint32_t, std::uint32_t> parse_len_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw reftrie::ConfigError("len-range must look like A:B");
    try {
        const auto a = static_cast<std::uint32_t>(std::stoul(text.substr(0, colon)));
        const auto b = static_cast<std::uint32_t>(std::stoul(text.substr(colon + 1)));
        return {a, b};
    } catch (const std::exception&) {
        throw reftrie::ConfigError("len-range must look like A:B");
    }
}

int run(int argc, char** argv) {
    CLI::App app{"top-k trajectory similarity search over reference point tries"};
    app.require_subcommand(1);

    // build
    auto* build = app.add_subcommand("build", "ingest a dataset and build an index");
    std::string build_input, build_out;
    std::string build_measure = "hausdorff", build_strategy = "hetero";
    reftrie::BuildOptions opts;
    std::uint32_t dense_levels = reftrie::kDefaultDenseLevels;
    std::size_t min_len = 10, max_len = 1000;
    build->add_option("--input", build_input, "trajectory file")->required();
    build->add_option("--measure", build_measure, "hausdorff|frechet|dtw");
    build->add_option("--delta", opts.delta, "requested grid cell size")->required();
    build->add_option("--partitions", opts.partitions, "number of partitions");
    build->add_option("--pivots", opts.pivot_count, "number of pivot trajectories");
    build->add_option("--pivot-groups", opts.pivot_groups,
                      "random groups sampled when picking pivots");
    build->add_option("--strategy", build_strategy, "hetero|homo|random");
    build->add_flag("--optimize-trie", opts.optimize_trie,
                    "order-free trie rearrangement (hausdorff only)");
    build->add_option("--seed", opts.seed, "rng seed");
    build->add_option("--dense-levels", dense_levels,
                      "trie levels stored as bitmaps on disk")
        ->check(CLI::Range(0, 255));
    build->add_option("--min-len", min_len, "drop trajectories shorter than this");
    build->add_option("--max-len", max_len, "split trajectories longer than this");
    build->add_option("--out", build_out, "output index file")->required();

    // query
    auto* query_cmd = app.add_subcommand("query", "run top-k queries against an index");
    std::string query_index, query_file;
    std::size_t query_k = 100;
    bool query_stats = false;
    query_cmd->add_option("--index", query_index, "index file")->required();
    query_cmd->add_option("--query", query_file, "query trajectory file")->required();
    query_cmd->add_option("--k", query_k, "result count");
    query_cmd->add_flag("--stats", query_stats, "emit JSON counters per query");

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "brute-force oracle over a dataset");
    std::string scan_input, scan_query, scan_measure = "hausdorff";
    std::size_t scan_k = 100, scan_min_len = 10, scan_max_len = 1000;
    scan_cmd->add_option("--input", scan_input, "trajectory file")->required();
    scan_cmd->add_option("--query", scan_query, "query trajectory file")->required();
    scan_cmd->add_option("--k", scan_k, "result count");
    scan_cmd->add_option("--measure", scan_measure, "hausdorff|frechet|dtw");
    scan_cmd->add_option("--min-len", scan_min_len, "drop trajectories shorter than this");
    scan_cmd->add_option("--max-len", scan_max_len, "split trajectories longer than this");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "time queries and report counters");
    std::string bench_index, bench_queries;
    std::size_t bench_k = 100, bench_repeats = 20;
    bench_cmd->add_option("--index", bench_index, "index file")->required();
    bench_cmd->add_option("--queries", bench_queries, "query trajectory file")->required();
    bench_cmd->add_option("--k", bench_k, "result count");
    bench_cmd->add_option("--repeats", bench_repeats, "repeats per query");

    // gen
    auto* gen_cmd = app.add_subcommand("gen", "generate a clustered synthetic dataset");
    reftrie::GenOptions gen;
    std::string gen_out, gen_len_range = "10:50";
    gen_cmd->add_option("--clusters", gen.clusters, "cluster count");
    gen_cmd->add_option("--per-cluster", gen.per_cluster, "trajectories per cluster");
    gen_cmd->add_option("--len-range", gen_len_range, "trajectory length range A:B");
    gen_cmd->add_option("--seed", gen.seed, "rng seed");
    gen_cmd->add_option("--spread", gen.cluster_spread, "start scatter around centers");
    gen_cmd->add_option("--out", gen_out, "output trajectory file")->required();

    CLI11_PARSE(app, argc, argv);

    if (build->parsed()) {
        opts.measure = reftrie::measure_from_name(build_measure);
        opts.strategy = reftrie::strategy_from_name(build_strategy);
        opts.dense_levels = static_cast<std::uint8_t>(dense_levels);
        reftrie::IngestReport report;
        auto dataset = reftrie::ingest(build_input, min_len, max_len, &report);
        std::fprintf(stderr,
                     "ingested %zu trajectories (%zu parsed, %zu dropped short, "
                     "%zu split chunks, %zu points)\n",
                     report.kept, report.lines_parsed, report.dropped_short,
                     report.split_extra, report.points_total);
        const auto index = reftrie::build_index(std::move(dataset), opts);
        reftrie::save_index(index, build_out);
        std::size_t nodes = 0;
        for (const auto& shard : index.shards) nodes += shard.node_count();
        std::fprintf(stderr, "index: %zu partitions, %zu trie nodes, saved to %s\n",
                     index.shards.size(), nodes, build_out.c_str());
        return 0;
    }

    if (query_cmd->parsed()) {
        const auto index = reftrie::load_index(query_index);
        const auto queries = reftrie::parse_trajectories(query_file);
        for (const auto& q : queries) {
            const auto result = reftrie::query(index, q, query_k);
            print_hits(q.id, result.hits);
            if (query_stats)
                std::cout << stats_json(q.id, result.stats, result.elapsed_seconds)
                          << "\n";
        }
        return 0;
    }

    if (scan_cmd->parsed()) {
        const auto dataset = reftrie::ingest(scan_input, scan_min_len, scan_max_len);
        const auto queries = reftrie::parse_trajectories(scan_query);
        const auto measure = reftrie::measure_from_name(scan_measure);
        for (const auto& q : queries) {
            const auto result = reftrie::linear_scan(dataset, q, scan_k, measure);
            print_hits(q.id, result.hits);
        }
        return 0;
    }

    if (bench_cmd->parsed()) {
        const auto index = reftrie::load_index(bench_index);
        const auto queries = reftrie::parse_trajectories(bench_queries);
        const auto rows = reftrie::bench(index, queries, bench_k, bench_repeats);
        for (const auto& row : rows) {
            json j = stats_json(row.query_id, row.stats, row.mean_seconds);
            j["min_seconds"] = row.min_seconds;
            j["max_seconds"] = row.max_seconds;
            j["scan_seconds"] = row.scan_seconds;
            j["speedup"] = row.speedup;
            j["repeats"] = row.repeats;
            std::cout << j << "\n";
        }
        return 0;
    }

    if (gen_cmd->parsed()) {
        const auto [lo, hi] = parse_len_range(gen_len_range);
        gen.min_len = lo;
        gen.max_len = hi;
        const auto dataset = reftrie::generate_clustered(gen);
        reftrie::write_trajectories(gen_out, dataset);
        std::fprintf(stderr, "wrote %zu trajectories to %s\n", dataset.size(),
                     gen_out.c_str());
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
