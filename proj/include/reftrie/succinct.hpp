#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "reftrie/binio.hpp"
#include "reftrie/trie.hpp"

namespace reftrie {

inline constexpr char kTriePayloadMagic[4] = {'R', 'P', 'T', 'T'};
inline constexpr std::uint16_t kTriePayloadVersion = 1;
inline constexpr std::uint8_t kDefaultDenseLevels = 2;

// Storage form of a trie: the upper `dense_levels` levels as child bitmaps
// (one bit per grid cell per node, breadth-first), everything deeper as
// length-delimited byte records. Queries run on the decoded linked form.
struct SuccinctLevels {
    GridConfig grid;
    Measure measure = Measure::hausdorff;
    std::uint8_t dense_levels = 0;
    std::vector<Trajectory> pivots;
    std::vector<std::uint8_t> bc;      // child-existence bitmaps
    std::vector<std::uint8_t> bl;      // child-is-internal bitmaps
    std::vector<std::uint8_t> sparse;  // annotations + deep subtrees
    std::vector<std::uint64_t> rank_index;  // popcount of bc per 64-byte block

    std::size_t bitmap_stride() const {
        return static_cast<std::size_t>((grid.cell_count() + 7) / 8);
    }
};

namespace detail {

inline std::vector<std::uint64_t> build_rank_index(std::span<const std::uint8_t> bits) {
    std::vector<std::uint64_t> rank;
    rank.reserve(bits.size() / 64 + 2);
    std::uint64_t total = 0;
    rank.push_back(0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        total += std::popcount(bits[i]);
        if ((i + 1) % 64 == 0) rank.push_back(total);
    }
    rank.push_back(total);
    return rank;
}

inline std::uint64_t popcount_range(std::span<const std::uint8_t> bits,
                                    std::span<const std::uint64_t> rank,
                                    std::size_t begin_byte, std::size_t end_byte) {
    const std::size_t b0 = begin_byte / 64, b1 = end_byte / 64;
    if (b1 < rank.size() - 1 && b1 > b0) {
        std::uint64_t n = rank[b1] - rank[b0];
        for (std::size_t i = b0 * 64; i < begin_byte; ++i) n -= std::popcount(bits[i]);
        for (std::size_t i = b1 * 64; i < end_byte; ++i) n += std::popcount(bits[i]);
        return n;
    }
    std::uint64_t n = 0;
    for (std::size_t i = begin_byte; i < end_byte; ++i) n += std::popcount(bits[i]);
    return n;
}

}  // namespace detail

class SuccinctCodec {
   public:
    static SuccinctLevels encode(const Trie& trie, const PivotSet& pivots,
                                 std::uint8_t dense_levels) {
        if (pivots.size() > 255)
            throw ConfigError("succinct: at most 255 pivots fit the payload");
        if (dense_levels > 0 && trie.grid().cell_count() > (1ull << 22))
            throw ConfigError("succinct: grid too fine for bitmap levels");

        SuccinctLevels out;
        out.grid = trie.grid();
        out.measure = trie.measure();
        out.dense_levels = dense_levels;
        out.pivots = pivots.pivots;

        detail::ByteWriter sparse;
        if (dense_levels == 0) {
            write_subtree(sparse, trie.root(), trie.terminator());
        } else {
            const std::size_t stride = out.bitmap_stride();
            std::vector<const TrieNode*> level{&trie.root()};
            std::vector<const TrieNode*> bfs;
            std::vector<const TrieNode*> last_dense;
            for (std::uint8_t depth = 0; depth < dense_levels && !level.empty();
                 ++depth) {
                std::vector<const TrieNode*> next;
                for (const TrieNode* node : level) {
                    bfs.push_back(node);
                    const std::size_t base = out.bc.size();
                    out.bc.resize(base + stride, 0);
                    out.bl.resize(base + stride, 0);
                    for (const auto& child : node->children) {
                        if (child->label >= trie.terminator()) continue;
                        const std::size_t bit = static_cast<std::size_t>(child->label);
                        out.bc[base + bit / 8] |= std::uint8_t(1u << (bit % 8));
                        if (!child->is_leaf())
                            out.bl[base + bit / 8] |= std::uint8_t(1u << (bit % 8));
                        next.push_back(child.get());
                    }
                }
                if (depth + 1 == dense_levels) last_dense = level;
                level = std::move(next);
            }
            for (const TrieNode* node : bfs)
                write_annotation(sparse, *node, trie.terminator());
            for (const TrieNode* node : last_dense)
                for (const auto& child : node->children)
                    if (child->label < trie.terminator())
                        write_subtree(sparse, *child, trie.terminator());
        }
        out.sparse = sparse.take();
        out.rank_index = detail::build_rank_index(out.bc);
        return out;
    }

    static Trie decode(const SuccinctLevels& in, PivotSet* pivots_out = nullptr) {
        if (pivots_out) {
            pivots_out->pivots = in.pivots;
            pivots_out->score = 0.0;
        }
        Trie trie(in.grid, in.measure);
        detail::ByteReader sparse(in.sparse, "trie payload (sparse)");
        if (in.dense_levels == 0) {
            read_subtree(sparse, trie.root(), trie.terminator(), nullptr);
            if (!sparse.done()) sparse.fail("trailing bytes");
            return trie;
        }

        const std::size_t stride = in.bitmap_stride();
        struct Pending {
            TrieNode* node;
            std::vector<ZValue> child_labels;
            std::vector<bool> child_internal;
        };
        std::vector<TrieNode*> bfs;
        std::vector<Pending> last_dense;
        std::vector<TrieNode*> level{&trie.root()};
        std::size_t cursor = 0;
        for (std::uint8_t depth = 0; depth < in.dense_levels && !level.empty();
             ++depth) {
            std::vector<TrieNode*> next;
            for (TrieNode* node : level) {
                bfs.push_back(node);
                if (cursor + stride > in.bc.size() || cursor + stride > in.bl.size())
                    throw FormatError("trie payload (bitmaps): truncated at byte " +
                                      std::to_string(cursor));
                const std::uint64_t child_count = detail::popcount_range(
                    in.bc, in.rank_index, cursor, cursor + stride);
                Pending pending{node, {}, {}};
                pending.child_labels.reserve(child_count);
                for (std::size_t byte = 0; byte < stride; ++byte) {
                    std::uint8_t bits = in.bc[cursor + byte];
                    while (bits) {
                        const int b = std::countr_zero(bits);
                        bits = static_cast<std::uint8_t>(bits & (bits - 1));
                        const ZValue z = static_cast<ZValue>(byte * 8 + b);
                        pending.child_labels.push_back(z);
                        pending.child_internal.push_back(
                            (in.bl[cursor + byte] >> b) & 1u);
                    }
                }
                if (pending.child_labels.size() != child_count)
                    throw FormatError("trie payload (bitmaps): rank index disagrees");
                if (depth + 1 < in.dense_levels) {
                    for (std::size_t i = 0; i < pending.child_labels.size(); ++i) {
                        TrieNode* child = node->add_child(pending.child_labels[i]);
                        next.push_back(child);
                    }
                } else {
                    last_dense.push_back(std::move(pending));
                }
                cursor += stride;
            }
            level = std::move(next);
        }
        if (cursor != in.bc.size())
            throw FormatError("trie payload (bitmaps): trailing bytes");

        // Dense nodes created above minus the last level, whose subtrees are
        // parsed from records below. Annotations are stored for all of them.
        for (TrieNode* node : bfs)
            read_annotation(sparse, *node, trie.terminator());
        for (Pending& pending : last_dense) {
            for (std::size_t i = 0; i < pending.child_labels.size(); ++i) {
                TrieNode* child = pending.node->add_child(pending.child_labels[i]);
                read_subtree(sparse, *child, trie.terminator(),
                             &pending.child_labels[i]);
                if (child->is_leaf() == pending.child_internal[i])
                    sparse.fail("child state bitmap disagrees with subtree");
            }
        }
        if (!sparse.done()) sparse.fail("trailing bytes");
        verify_dense_state_bits(trie, in);
        return trie;
    }

    static std::vector<std::uint8_t> to_bytes(const SuccinctLevels& in) {
        detail::ByteWriter w;
        w.text(std::string(kTriePayloadMagic, 4));
        w.u16(kTriePayloadVersion);
        w.f64(in.grid.origin.x);
        w.f64(in.grid.origin.y);
        w.f64(in.grid.side_u);
        w.u32(in.grid.level);
        w.u8(static_cast<std::uint8_t>(in.measure));
        w.u8(static_cast<std::uint8_t>(in.pivots.size()));
        w.u8(in.dense_levels);
        for (const Trajectory& p : in.pivots) {
            w.u64(p.id);
            w.u64(p.points.size());
            for (const Point& pt : p.points) {
                w.f64(pt.x);
                w.f64(pt.y);
            }
        }
        w.u64(in.bc.size());
        w.blob(in.bc);
        w.u64(in.bl.size());
        w.blob(in.bl);
        w.u64(in.sparse.size());
        w.blob(in.sparse);
        return w.take();
    }

    static SuccinctLevels from_bytes(std::span<const std::uint8_t> bytes) {
        detail::ByteReader r(bytes, "trie payload");
        const auto magic = r.blob(4);
        if (!std::equal(magic.begin(), magic.end(), kTriePayloadMagic))
            throw FormatError("trie payload: bad magic");
        const std::uint16_t version = r.u16();
        if (version != kTriePayloadVersion)
            throw FormatError("trie payload: unsupported version " +
                              std::to_string(version));
        SuccinctLevels out;
        out.grid.origin.x = r.f64();
        out.grid.origin.y = r.f64();
        out.grid.side_u = r.f64();
        out.grid.level = r.u32();
        if (out.grid.level == 0 || (out.grid.level & (out.grid.level - 1)) != 0)
            r.fail("grid level is not a power of two");
        out.grid.bits_per_axis =
            static_cast<std::uint32_t>(std::countr_zero(out.grid.level));
        out.grid.cell_size = out.grid.side_u / out.grid.level;
        out.grid.slack = std::sqrt(2.0) * out.grid.cell_size / 2.0;
        const std::uint8_t measure = r.u8();
        if (measure > 2) r.fail("unknown measure");
        out.measure = static_cast<Measure>(measure);
        const std::uint8_t n_p = r.u8();
        out.dense_levels = r.u8();
        for (std::uint8_t i = 0; i < n_p; ++i) {
            Trajectory p;
            p.id = r.u64();
            const std::uint64_t n = r.u64();
            if (n > r.remaining() / 16 + 1) r.fail("pivot point count implausible");
            p.points.reserve(n);
            for (std::uint64_t j = 0; j < n; ++j) {
                const double x = r.f64();
                const double y = r.f64();
                p.points.push_back(Point{x, y});
            }
            out.pivots.push_back(std::move(p));
        }
        const std::uint64_t bc_len = r.u64();
        if (bc_len > r.remaining()) r.fail("child bitmap length overruns payload");
        auto bc = r.blob(bc_len);
        out.bc.assign(bc.begin(), bc.end());
        const std::uint64_t bl_len = r.u64();
        if (bl_len > r.remaining()) r.fail("state bitmap length overruns payload");
        auto bl = r.blob(bl_len);
        out.bl.assign(bl.begin(), bl.end());
        const std::uint64_t sparse_len = r.u64();
        if (sparse_len > r.remaining()) r.fail("sparse section length overruns payload");
        auto sp = r.blob(sparse_len);
        out.sparse.assign(sp.begin(), sp.end());
        if (!r.done()) r.fail("trailing bytes");
        if (out.bc.size() != out.bl.size())
            throw FormatError("trie payload: bitmap sections differ in length");
        out.rank_index = detail::build_rank_index(out.bc);
        return out;
    }

   private:
    static void write_leaf_payload(detail::ByteWriter& w, const TrieNode& node) {
        w.u8(static_cast<std::uint8_t>(node.hr.size()));
        for (const HrRange& hr : node.hr) {
            w.f64(hr.min);
            w.f64(hr.max);
        }
        if (!node.tids.empty()) {
            w.f64(node.d_max);
            w.u32(static_cast<std::uint32_t>(node.tids.size()));
            for (TrajectoryId tid : node.tids) w.u64(tid);
        }
    }

    static void read_leaf_payload(detail::ByteReader& r, TrieNode& node,
                                  bool has_tids) {
        const std::uint8_t hr_count = r.u8();
        node.hr.resize(hr_count);
        for (auto& hr : node.hr) {
            hr.min = r.f64();
            hr.max = r.f64();
        }
        if (has_tids) {
            node.d_max = r.f64();
            const std::uint32_t n = r.u32();
            node.tids.reserve(n);
            for (std::uint32_t i = 0; i < n; ++i) node.tids.push_back(r.u64());
        }
    }

    static void write_annotation(detail::ByteWriter& w, const TrieNode& node,
                                 ZValue terminator) {
        const TrieNode* term = nullptr;
        for (const auto& c : node.children)
            if (c->label == terminator) term = c.get();
        std::uint8_t flags = 0;
        if (!node.tids.empty()) flags |= 1;
        if (term) flags |= 2;
        w.u8(flags);
        write_leaf_payload(w, node);
        if (term) write_subtree(w, *term, terminator);
    }

    static void read_annotation(detail::ByteReader& r, TrieNode& node,
                                ZValue terminator) {
        const std::uint8_t flags = r.u8();
        read_leaf_payload(r, node, flags & 1);
        if (flags & 2) {
            TrieNode* term = node.add_child(terminator);
            read_subtree(r, *term, terminator, &terminator);
        }
    }

    static void write_subtree(detail::ByteWriter& w, const TrieNode& node,
                              ZValue terminator) {
        w.u64(node.label);
        w.u8(node.tids.empty() ? 0 : 1);
        write_leaf_payload(w, node);
        w.u32(static_cast<std::uint32_t>(node.children.size()));
        for (const auto& child : node.children) write_subtree(w, *child, terminator);
    }

    static void read_subtree(detail::ByteReader& r, TrieNode& node,
                             ZValue terminator, const ZValue* expected_label) {
        node.label = r.u64();
        if (expected_label && node.label != *expected_label)
            r.fail("node label disagrees with parent bitmap");
        if (node.label > terminator) r.fail("node label out of range");
        const std::uint8_t flags = r.u8();
        if (flags > 1) r.fail("unknown node flags");
        read_leaf_payload(r, node, flags & 1);
        const std::uint32_t n_children = r.u32();
        if (n_children > r.remaining()) r.fail("child count implausible");
        for (std::uint32_t i = 0; i < n_children; ++i) {
            auto child = std::make_unique<TrieNode>();
            read_subtree(r, *child, terminator, nullptr);
            auto it = std::lower_bound(
                node.children.begin(), node.children.end(), child->label,
                [](const std::unique_ptr<TrieNode>& n, ZValue v) {
                    return n->label < v;
                });
            node.children.insert(it, std::move(child));
        }
    }

    static void verify_dense_state_bits(const Trie& trie, const SuccinctLevels& in) {
        const std::size_t stride = in.bitmap_stride();
        std::vector<const TrieNode*> level{&trie.root()};
        std::size_t cursor = 0;
        for (std::uint8_t depth = 0; depth < in.dense_levels && !level.empty();
             ++depth) {
            std::vector<const TrieNode*> next;
            for (const TrieNode* node : level) {
                for (const auto& child : node->children) {
                    if (child->label >= trie.terminator()) continue;
                    const std::size_t bit = static_cast<std::size_t>(child->label);
                    const bool internal =
                        (in.bl[cursor + bit / 8] >> (bit % 8)) & 1u;
                    if (internal == child->is_leaf())
                        throw FormatError(
                            "trie payload (bitmaps): child state bit mismatch");
                    next.push_back(child.get());
                }
                cursor += stride;
            }
            level = std::move(next);
        }
    }
};

inline SuccinctLevels encode_succinct(const Trie& trie, const PivotSet& pivots,
                                      std::uint8_t dense_levels) {
    return SuccinctCodec::encode(trie, pivots, dense_levels);
}

inline Trie decode_succinct(const SuccinctLevels& levels,
                            PivotSet* pivots_out = nullptr) {
    return SuccinctCodec::decode(levels, pivots_out);
}

}  // namespace reftrie
