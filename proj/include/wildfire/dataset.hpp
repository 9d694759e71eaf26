#pragma once

// Labeled spatiotemporal samples extracted from a trajectory by uniform
// subsampling, and their columnar text serialization.

#include "wildfire/error.hpp"
#include "wildfire/fdsolver.hpp"
#include "wildfire/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace wildfire {

enum class Tag { interior, boundary, initial };

inline const char* to_string(Tag t)
{
    switch (t) {
    case Tag::interior:
        return "interior";
    case Tag::boundary:
        return "boundary";
    case Tag::initial:
        return "initial";
    }
    return "?";
}

inline Tag parse_tag(std::string_view s)
{
    if (s == "interior")
        return Tag::interior;
    if (s == "boundary")
        return Tag::boundary;
    if (s == "initial")
        return Tag::initial;
    throw ConfigError("unknown record tag '" + std::string(s) + "'");
}

struct Record {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
    StatePoint value{};
    Tag tag = Tag::interior;
};

struct Spacing {
    double dx = 1.0;
    double dy = 0.0;
    double dt = 1.0;
};

/// Domain extents; used to normalize network inputs to [0, 1].
struct Domain {
    int dim = 1;
    double lx = 100.0;
    double ly = 0.0;
    double t_end = 200.0;
};

struct Dataset {
    Domain domain{};
    Spacing spacing{};
    std::vector<Record> records;

    std::size_t size() const { return records.size(); }
    std::size_t count(Tag t) const
    {
        return static_cast<std::size_t>(
            std::count_if(records.begin(), records.end(), [t](const Record& r) { return r.tag == t; }));
    }
};

/// Number of records the cardinality identity predicts:
/// (Lx/dx + 1)(t_end/dt + 1) [(Ly/dy + 1) in 2D].
inline std::size_t expected_cardinality(const Domain& d, const Spacing& s)
{
    std::size_t n = static_cast<std::size_t>(Grid::count_for(d.lx, s.dx, "dx")) *
                    static_cast<std::size_t>(Grid::count_for(d.t_end, s.dt, "dt"));
    if (d.dim == 2)
        n *= static_cast<std::size_t>(Grid::count_for(d.ly, s.dy, "dy"));
    return n;
}

namespace detail {

inline int stride_for(double sample, double sim, const char* name)
{
    if (!(sample > 0.0))
        throw ConfigError(std::string("dataset spacing ") + name + " must be > 0");
    const double q = sample / sim;
    const double r = std::round(q);
    if (r < 1.0 || std::abs(q - r) > 1e-9 * std::max(1.0, q))
        throw ConfigError(std::string("dataset spacing ") + name +
                          " is not an integer multiple of the simulation spacing");
    return static_cast<int>(r);
}

} // namespace detail

/// Uniform subsampling of a trajectory. Tags: initial at t = 0, boundary on
/// the spatial boundary for t > 0, interior otherwise. Records are ordered by
/// t, then y, then x.
inline Dataset extract_dataset(const Trajectory& traj, const Spacing& spacing)
{
    const Grid& g = traj.grid;
    if (g.nt < 2)
        throw ConfigError("extract_dataset: trajectory has a single time level");
    const int sx = detail::stride_for(spacing.dx, g.dx(), "dx");
    const int sy = g.dim == 2 ? detail::stride_for(spacing.dy, g.dy(), "dy") : 1;
    const int st = detail::stride_for(spacing.dt, g.dt(), "dt");
    if ((g.nx - 1) % sx != 0 || (g.dim == 2 && (g.ny - 1) % sy != 0) || (g.nt - 1) % st != 0)
        throw ConfigError("extract_dataset: spacing does not tile the domain");

    Dataset ds;
    ds.domain = {g.dim, g.lx, g.ly, g.t_end};
    ds.spacing = spacing;
    if (g.dim == 1)
        ds.spacing.dy = 0.0;
    for (int n = 0; n < g.nt; n += st) {
        const auto& f = traj.frames[static_cast<std::size_t>(n)];
        for (int j = 0; j < g.ny; j += sy) {
            for (int i = 0; i < g.nx; i += sx) {
                Record r;
                r.x = g.x(i);
                r.y = g.y(j);
                r.t = g.t(n);
                r.value = f.at(g.index(i, j));
                r.tag = n == 0 ? Tag::initial : (g.on_boundary(i, j) ? Tag::boundary : Tag::interior);
                ds.records.push_back(r);
            }
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Columnar text: header row, one comma-separated record per line.

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.remove_suffix(1);
        while (!field.empty() && field.front() == ' ')
            field.remove_prefix(1);
        out.emplace_back(field);
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& s, std::size_t line_no, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": cannot parse " + what + " value '" + s +
                          "'");
    }
}

inline std::string dataset_header(int dim)
{
    return dim == 2 ? "x,y,t,T,E,X,tag" : "x,t,T,E,X,tag";
}

inline void write_records(std::ostream& os, int dim, const std::vector<Record>& records)
{
    os << dataset_header(dim) << '\n';
    for (const auto& r : records) {
        os << format_double(r.x) << ',';
        if (dim == 2)
            os << format_double(r.y) << ',';
        os << format_double(r.t) << ',' << format_double(r.value.T) << ',' << format_double(r.value.E)
           << ',' << format_double(r.value.X) << ',' << to_string(r.tag) << '\n';
    }
}

/// Parses the columnar record format. The dimensionality is taken from the
/// header. Errors carry the 1-based line number.
inline std::vector<Record> read_records(std::istream& is, int& dim)
{
    std::string line;
    if (!std::getline(is, line))
        throw ConfigError("line 1: missing header");
    const auto header = split_csv(line);
    if (header == split_csv(dataset_header(1)))
        dim = 1;
    else if (header == split_csv(dataset_header(2)))
        dim = 2;
    else
        throw ConfigError("line 1: unexpected header '" + line + "' (expected '" + dataset_header(1) +
                          "' or '" + dataset_header(2) + "')");
    const std::size_t ncol = header.size();
    std::vector<Record> out;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const auto f = split_csv(line);
        if (f.size() != ncol)
            throw ConfigError("line " + std::to_string(line_no) + ": expected " + std::to_string(ncol) +
                              " fields, got " + std::to_string(f.size()));
        Record r;
        std::size_t c = 0;
        r.x = parse_double(f[c++], line_no, "x");
        if (dim == 2)
            r.y = parse_double(f[c++], line_no, "y");
        r.t = parse_double(f[c++], line_no, "t");
        r.value.T = parse_double(f[c++], line_no, "T");
        r.value.E = parse_double(f[c++], line_no, "E");
        r.value.X = parse_double(f[c++], line_no, "X");
        try {
            r.tag = parse_tag(f[c]);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(r);
    }
    return out;
}

inline void write_dataset_csv(const std::string& path, const Dataset& ds)
{
    std::ofstream os(path);
    if (!os)
        throw ConfigError("cannot open '" + path + "' for writing");
    write_records(os, ds.domain.dim, ds.records);
}

/// Reads records only; domain and spacing come from the manifest.
inline std::vector<Record> read_dataset_csv(const std::string& path, int& dim)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open dataset '" + path + "'");
    return read_records(is, dim);
}

/// Whole trajectory in the record format (every node of every stored level).
inline void write_trajectory_csv(const std::string& path, const Trajectory& traj)
{
    const Grid& g = traj.grid;
    std::ofstream os(path);
    if (!os)
        throw ConfigError("cannot open '" + path + "' for writing");
    std::vector<Record> rows;
    rows.reserve(g.nodes());
    os << dataset_header(g.dim) << '\n';
    for (int n = 0; n < g.nt; ++n) {
        rows.clear();
        const auto& f = traj.frames[static_cast<std::size_t>(n)];
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                rows.push_back({g.x(i), g.y(j), g.t(n), f.at(g.index(i, j)),
                                n == 0 ? Tag::initial : (g.on_boundary(i, j) ? Tag::boundary : Tag::interior)});
        std::ostringstream chunk;
        write_records(chunk, g.dim, rows);
        const auto s = chunk.str();
        os << s.substr(s.find('\n') + 1);
    }
}

} // namespace wildfire
