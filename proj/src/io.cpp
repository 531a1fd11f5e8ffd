#include "pmelab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pmelab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void write_header(std::ostream& os, const Grid& g, std::size_t nstamps) {
    os << "pmelab-field 1\n";
    os << "dimension " << g.dim << "\n";
    os << "counts";
    for (int a = 0; a < g.dim; ++a) os << " " << g.counts[a];
    os << "\nextents";
    for (int a = 0; a < g.dim; ++a) os << " " << format_double(g.extents[a]);
    os << "\nstamps " << nstamps << "\n";
}

struct Header {
    Grid grid;
    std::vector<double> stamps;
};

Header read_header(std::istream& is, const std::string& path) {
    auto bad = [&](const std::string& what) {
        throw std::runtime_error("bad field file " + path + ": " + what);
    };
    std::string tag;
    int version = 0;
    is >> tag >> version;
    if (tag != "pmelab-field" || version != 1) bad("unrecognized header");
    int dim = 0;
    is >> tag >> dim;
    if (tag != "dimension" || dim < 1 || dim > 3) bad("dimension");
    std::vector<int> counts(dim);
    is >> tag;
    if (tag != "counts") bad("counts");
    for (int& c : counts) is >> c;
    std::vector<double> extents(dim);
    is >> tag;
    if (tag != "extents") bad("extents");
    for (double& e : extents) is >> e;
    std::size_t nstamps = 0;
    is >> tag >> nstamps;
    if (tag != "stamps") bad("stamps");
    Header h;
    h.grid = make_grid(dim, counts, extents);
    h.stamps.resize(nstamps);
    for (double& s : h.stamps) is >> s;
    if (!is) bad("truncated header");
    return h;
}

void write_values(std::ostream& os, const std::vector<double>& v) {
    for (double x : v) os << format_double(x) << "\n";
}

void read_values(std::istream& is, std::vector<double>& v, const std::string& path) {
    for (double& x : v)
        if (!(is >> x)) throw std::runtime_error("bad field file " + path + ": truncated values");
}

}  // namespace

void write_field(const std::string& path, const ScalarField& f) {
    std::ofstream os(path);
    require(bool(os), "cannot open for writing: " + path);
    write_header(os, *f.grid, 0);
    write_values(os, f.v);
}

void write_field(const std::string& path, const TimeField& f) {
    std::ofstream os(path);
    require(bool(os), "cannot open for writing: " + path);
    write_header(os, *f.grid, f.steps());
    for (double s : f.stamps) os << format_double(s) << "\n";
    for (const auto& frame : f.frames) write_values(os, frame.v);
}

LoadedField read_field(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open field file: " + path);
    auto h = read_header(is, path);
    if (!h.stamps.empty()) throw std::runtime_error("expected a scalar field, got a time field: " + path);
    LoadedField out;
    out.grid = std::move(h.grid);
    out.field = ScalarField(out.grid);
    read_values(is, out.field.v, path);
    return out;
}

LoadedTimeField read_time_field(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open field file: " + path);
    auto h = read_header(is, path);
    LoadedTimeField out;
    out.grid = std::move(h.grid);
    out.field.grid = &out.grid;
    out.field.stamps = h.stamps;
    out.field.frames.assign(h.stamps.size(), ScalarField(out.grid));
    for (auto& frame : out.field.frames) read_values(is, frame.v, path);
    return out;
}

void write_csv(const std::string& path, const ScalarField& f, const std::string& value_name) {
    std::ofstream os(path);
    require(bool(os), "cannot open for writing: " + path);
    const Grid& g = *f.grid;
    for (int a = 0; a < g.dim; ++a) os << "x" << a + 1 << ",";
    os << value_name << "\n";
    for (std::size_t n = 0; n < g.num_nodes; ++n) {
        auto x = g.coords(n);
        for (int a = 0; a < g.dim; ++a) os << format_double(x[a]) << ",";
        os << format_double(f[n]) << "\n";
    }
}

void write_csv(const std::string& path, const BoundaryField& f, const std::string& value_name) {
    std::ofstream os(path);
    require(bool(os), "cannot open for writing: " + path);
    const Grid& g = *f.grid;
    for (int a = 0; a < g.dim; ++a) os << "x" << a + 1 << ",";
    os << "normal_axis,normal_side," << value_name << "\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto& b = g.boundary[i];
        auto x = g.coords(b.node);
        for (int a = 0; a < g.dim; ++a) os << format_double(x[a]) << ",";
        os << b.axis + 1 << "," << b.side << "," << format_double(f[i]) << "\n";
    }
}

}  // namespace pmelab
