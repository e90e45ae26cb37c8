#pragma once

#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "reftrie/binio.hpp"
#include "reftrie/engine.hpp"
#include "reftrie/succinct.hpp"

namespace reftrie {

inline constexpr char kIndexMagic[4] = {'R', 'P', 'S', 'X'};
inline constexpr std::uint16_t kIndexVersion = 1;

namespace detail {

// Canonical dataset fingerprint: (id, point count, coordinates) per
// trajectory in ascending id order, independent of partitioning.
inline std::string dataset_sha256(std::span<const Trajectory> sorted_dataset) {
    ByteWriter w;
    for (const Trajectory& t : sorted_dataset) {
        w.u64(t.id);
        w.u64(t.points.size());
        for (const Point& p : t.points) {
            w.f64(p.x);
            w.f64(p.y);
        }
    }
    return sha256_hex(w.bytes());
}

// Bitmap levels degrade to pure byte encoding when the grid is too fine for
// per-node cell bitmaps.
inline std::uint8_t effective_dense_levels(const GridConfig& grid,
                                           std::uint8_t requested) {
    return grid.cell_count() > (1ull << 22) ? std::uint8_t{0} : requested;
}

inline nlohmann::json manifest_json(const PartitionedIndex& index) {
    const BuildOptions& o = index.options;
    nlohmann::json m{
        {"format_version", kIndexVersion},
        {"measure", measure_name(o.measure)},
        {"delta", o.delta},
        {"partitions", o.partitions},
        {"pivot_count", o.pivot_count},
        {"pivot_groups", o.pivot_groups},
        {"strategy", strategy_name(o.strategy)},
        {"optimize_trie", o.optimize_trie},
        {"seed", o.seed},
        {"dense_levels", o.dense_levels},
        {"padding_fraction", o.padding_fraction},
        {"trajectory_count", index.dataset.size()},
        {"dataset_sha256", dataset_sha256(index.dataset)},
    };
    if (o.region_override) {
        m["region"] = {o.region_override->min_x, o.region_override->min_y,
                       o.region_override->max_x, o.region_override->max_y};
    } else {
        m["region"] = nullptr;
    }
    return m;
}

inline BuildOptions options_from_manifest(const nlohmann::json& m) {
    BuildOptions o;
    o.measure = measure_from_name(m.at("measure").get<std::string>());
    o.delta = m.at("delta").get<double>();
    o.partitions = m.at("partitions").get<std::uint32_t>();
    o.pivot_count = m.at("pivot_count").get<std::uint32_t>();
    o.pivot_groups = m.at("pivot_groups").get<std::uint32_t>();
    o.strategy = strategy_from_name(m.at("strategy").get<std::string>());
    o.optimize_trie = m.at("optimize_trie").get<bool>();
    o.seed = m.at("seed").get<std::uint64_t>();
    o.dense_levels = m.at("dense_levels").get<std::uint8_t>();
    o.padding_fraction = m.at("padding_fraction").get<double>();
    if (!m.at("region").is_null()) {
        const auto r = m.at("region");
        BBox box;
        box.min_x = r.at(0).get<double>();
        box.min_y = r.at(1).get<double>();
        box.max_x = r.at(2).get<double>();
        box.max_y = r.at(3).get<double>();
        o.region_override = box;
    }
    return o;
}

}  // namespace detail

inline std::vector<std::uint8_t> index_to_bytes(const PartitionedIndex& index) {
    detail::ByteWriter w;
    w.text(std::string(kIndexMagic, 4));
    w.u16(kIndexVersion);

    const std::string manifest = detail::manifest_json(index).dump();
    w.u32(static_cast<std::uint32_t>(manifest.size()));
    w.text(manifest);

    const std::size_t pivot_start = w.size();
    w.u32(static_cast<std::uint32_t>(index.pivots.size()));
    w.f64(index.pivots.score);
    for (const Trajectory& p : index.pivots.pivots) {
        w.u64(p.id);
        w.u64(p.points.size());
        for (const Point& pt : p.points) {
            w.f64(pt.x);
            w.f64(pt.y);
        }
    }
    w.u32(detail::crc32(std::span<const std::uint8_t>(w.bytes()).subspan(pivot_start)));

    // Assignment block carries the trajectories themselves: a loaded index
    // must evaluate exact distances, so the points travel with their
    // partition assignment.
    const std::size_t assign_start = w.size();
    w.u32(index.options.partitions);
    w.u64(index.dataset.size());
    for (const Trajectory& t : index.dataset) {
        auto it = index.assignment.partition_of.find(t.id);
        if (it == index.assignment.partition_of.end())
            throw InternalError("save: trajectory left unassigned");
        w.u64(t.id);
        w.u32(it->second);
        w.u64(t.points.size());
        for (const Point& p : t.points) {
            w.f64(p.x);
            w.f64(p.y);
        }
    }
    w.u32(detail::crc32(std::span<const std::uint8_t>(w.bytes()).subspan(assign_start)));

    const std::uint8_t dense =
        detail::effective_dense_levels(index.grid, index.options.dense_levels);
    w.u32(static_cast<std::uint32_t>(index.shards.size()));
    for (const Trie& shard : index.shards) {
        const std::vector<std::uint8_t> payload =
            SuccinctCodec::to_bytes(encode_succinct(shard, index.pivots, dense));
        w.u64(payload.size());
        w.u32(detail::crc32(payload));
        w.blob(payload);
    }
    return w.take();
}

inline PartitionedIndex index_from_bytes(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes, "index container");
    const auto magic = r.blob(4);
    if (!std::equal(magic.begin(), magic.end(), kIndexMagic))
        throw FormatError("index container: bad magic");
    const std::uint16_t version = r.u16();
    if (version != kIndexVersion)
        throw FormatError("index container: unsupported version " +
                          std::to_string(version));

    r.section("index manifest");
    const std::uint32_t manifest_len = r.u32();
    if (manifest_len > r.remaining()) r.fail("length overruns file");
    const auto manifest_bytes = r.blob(manifest_len);
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(manifest_bytes.begin(), manifest_bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("index manifest: ") + e.what());
    }

    PartitionedIndex index;
    try {
        index.options = detail::options_from_manifest(manifest);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("index manifest: ") + e.what());
    }
    index.measure = index.options.measure;

    r.section("pivot block");
    const std::size_t pivot_start = r.offset();
    const std::uint32_t n_pivots = r.u32();
    index.pivots.score = r.f64();
    for (std::uint32_t i = 0; i < n_pivots; ++i) {
        Trajectory p;
        p.id = r.u64();
        const std::uint64_t n = r.u64();
        if (n > r.remaining() / 16 + 1) r.fail("point count implausible");
        for (std::uint64_t j = 0; j < n; ++j) {
            const double x = r.f64();
            const double y = r.f64();
            p.points.push_back(Point{x, y});
        }
        index.pivots.pivots.push_back(std::move(p));
    }
    {
        const std::uint32_t crc = detail::crc32(r.consumed_since(pivot_start));
        if (r.u32() != crc) r.fail("checksum mismatch");
    }

    r.section("assignment block");
    const std::size_t assign_start = r.offset();
    const std::uint32_t n_partitions = r.u32();
    const std::uint64_t n_traj = r.u64();
    if (n_traj > r.remaining() / 20 + 1) r.fail("trajectory count implausible");
    index.assignment.sizes.assign(n_partitions, 0);
    for (std::uint64_t i = 0; i < n_traj; ++i) {
        Trajectory t;
        t.id = r.u64();
        const std::uint32_t part = r.u32();
        if (part >= n_partitions) r.fail("partition id out of range");
        const std::uint64_t n = r.u64();
        if (n > r.remaining() / 16 + 1) r.fail("point count implausible");
        for (std::uint64_t j = 0; j < n; ++j) {
            const double x = r.f64();
            const double y = r.f64();
            t.points.push_back(Point{x, y});
        }
        index.assignment.partition_of.emplace(t.id, part);
        ++index.assignment.sizes[part];
        index.dataset.push_back(std::move(t));
    }
    {
        const std::uint32_t crc = detail::crc32(r.consumed_since(assign_start));
        if (r.u32() != crc) r.fail("checksum mismatch");
    }
    const std::string expected_sha =
        manifest.at("dataset_sha256").get<std::string>();
    if (detail::dataset_sha256(index.dataset) != expected_sha)
        throw FormatError("assignment block: dataset checksum mismatch");

    r.section("shard payloads");
    const std::uint32_t n_shards = r.u32();
    if (n_shards == 0) r.fail("no shards");
    if (n_shards != n_partitions)
        r.fail("shard count disagrees with partition count");
    for (std::uint32_t s = 0; s < n_shards; ++s) {
        r.section("shard " + std::to_string(s));
        const std::uint64_t len = r.u64();
        if (len > r.remaining()) r.fail("length overruns file");
        const std::uint32_t crc = r.u32();
        const auto payload = r.blob(len);
        if (detail::crc32(payload) != crc) r.fail("checksum mismatch");
        const SuccinctLevels levels = SuccinctCodec::from_bytes(payload);
        index.shards.push_back(SuccinctCodec::decode(levels));
        if (index.shards.back().measure() != index.measure)
            r.fail("measure disagrees with manifest");
        if (index.shards.back().grid().level != index.shards.front().grid().level ||
            index.shards.back().grid().side_u != index.shards.front().grid().side_u)
            r.fail("grid disagrees across shards");
    }
    if (!r.done()) {
        r.section("index container");
        r.fail("trailing bytes");
    }

    index.grid = index.shards.front().grid();
    index.lookup = make_member_lookup(index.dataset);
    return index;
}

inline void save_index(const PartitionedIndex& index, const std::string& path) {
    const std::vector<std::uint8_t> bytes = index_to_bytes(index);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("write failed: " + path);
}

inline PartitionedIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return index_from_bytes(bytes);
}

}  // namespace reftrie
