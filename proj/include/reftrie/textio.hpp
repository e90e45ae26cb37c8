#pragma once

#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "reftrie/core.hpp"

namespace reftrie {

// Line format: `id<TAB>x1,y1;x2,y2;...` with `#` comment lines ignored.

struct IngestReport {
    std::size_t lines_parsed = 0;
    std::size_t kept = 0;
    std::size_t dropped_short = 0;
    std::size_t split_extra = 0;  // additional chunks created by splitting
    std::size_t points_total = 0;
};

namespace detail {

inline Trajectory parse_trajectory_line(const std::string& line,
                                        std::size_t line_no) {
    const auto fail = [&](const std::string& what) -> Trajectory {
        throw InputError("line " + std::to_string(line_no) + ": " + what);
    };

    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) return fail("missing tab after id");

    Trajectory traj;
    {
        const std::string id_text = line.substr(0, tab);
        // strict digits: stoull would wrap a negative id around silently
        if (id_text.empty() ||
            id_text.find_first_not_of("0123456789") != std::string::npos)
            return fail("bad id '" + id_text + "'");
        try {
            traj.id = std::stoull(id_text);
        } catch (const std::exception&) {
            return fail("bad id '" + id_text + "'");
        }
    }

    std::size_t pos = tab + 1;
    const std::size_t end = line.find_last_not_of(" \r\n") + 1;
    while (pos < end) {
        std::size_t next = line.find(';', pos);
        if (next == std::string::npos || next > end) next = end;
        if (next > pos) {
            const std::string pair = line.substr(pos, next - pos);
            const std::size_t comma = pair.find(',');
            if (comma == std::string::npos)
                return fail("point '" + pair + "' missing comma");
            try {
                std::size_t ux = 0, uy = 0;
                const std::string xs = pair.substr(0, comma);
                const std::string ys = pair.substr(comma + 1);
                const Point p{std::stod(xs, &ux), std::stod(ys, &uy)};
                if (ux != xs.size() || uy != ys.size() || !finite(p))
                    return fail("bad coordinates '" + pair + "'");
                traj.points.push_back(p);
            } catch (const std::exception&) {
                return fail("bad coordinates '" + pair + "'");
            }
        }
        pos = next + 1;
    }
    if (traj.points.empty()) return fail("no points");
    return traj;
}

}  // namespace detail

// Raw parse with no filtering or splitting; used for query files, where a
// single-point trajectory is legal.
inline std::vector<Trajectory> parse_trajectories(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<Trajectory> out;
    std::unordered_set<TrajectoryId> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Trajectory t = detail::parse_trajectory_line(line, line_no);
        if (!seen.insert(t.id).second)
            throw InputError("line " + std::to_string(line_no) + ": duplicate id " +
                             std::to_string(t.id));
        out.push_back(std::move(t));
    }
    if (out.empty()) throw InputError(path + ": no trajectories");
    return out;
}

// Dataset ingestion: drops trajectories shorter than min_len and splits ones
// longer than max_len into consecutive chunks, the extra chunks getting
// fresh ids past the largest id in the file.
inline std::vector<Trajectory> ingest(const std::string& path, std::size_t min_len = 10,
                                      std::size_t max_len = 1000,
                                      IngestReport* report = nullptr) {
    if (max_len < 2) throw ConfigError("ingest: max_len must be at least 2");
    min_len = std::max<std::size_t>(min_len, 2);

    std::vector<Trajectory> raw = parse_trajectories(path);
    IngestReport rep;
    rep.lines_parsed = raw.size();

    TrajectoryId next_id = 0;
    for (const Trajectory& t : raw) next_id = std::max(next_id, t.id);
    ++next_id;

    std::vector<Trajectory> out;
    for (Trajectory& t : raw) {
        if (t.points.size() <= max_len) {
            if (t.points.size() < min_len) {
                ++rep.dropped_short;
                continue;
            }
            rep.points_total += t.points.size();
            out.push_back(std::move(t));
            continue;
        }
        for (std::size_t offset = 0; offset < t.points.size(); offset += max_len) {
            const std::size_t n = std::min(max_len, t.points.size() - offset);
            Trajectory chunk;
            chunk.id = offset == 0 ? t.id : next_id++;
            if (offset > 0) ++rep.split_extra;
            chunk.points.assign(t.points.begin() + offset,
                                t.points.begin() + offset + n);
            if (chunk.points.size() < min_len) {
                ++rep.dropped_short;
                continue;
            }
            rep.points_total += chunk.points.size();
            out.push_back(std::move(chunk));
        }
    }
    rep.kept = out.size();
    if (report) *report = rep;
    if (out.empty()) throw InputError(path + ": no trajectories survive filtering");
    return out;
}

inline void write_trajectories(const std::string& path,
                               std::span<const Trajectory> trajectories) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    char buf[64];
    for (const Trajectory& t : trajectories) {
        out << t.id << '\t';
        for (std::size_t i = 0; i < t.points.size(); ++i) {
            if (i) out << ';';
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", t.points[i].x,
                          t.points[i].y);
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw InputError("write failed: " + path);
}

}  // namespace reftrie
