#include "pcgrow/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pcgrow/cluster.hpp"

namespace pcg {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

// Line reader that tracks the 1-based offset for parse errors.
struct LineReader {
    std::istream& in;
    int64_t line_no = 0;

    explicit LineReader(std::istream& s) : in(s) {}

    bool next(std::string& line) {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_no); }

    std::string require(const std::string& what) {
        std::string line;
        if (!next(line)) throw ParseError("unexpected end of file, expected " + what, line_no);
        return line;
    }
};

long long parse_int(LineReader& r, std::istringstream& ss, const std::string& what) {
    long long v;
    if (!(ss >> v)) r.fail("expected integer " + what);
    return v;
}

double parse_real(LineReader& r, std::istringstream& ss, const std::string& what) {
    double v;
    if (!(ss >> v)) r.fail("expected number " + what);
    return v;
}

}  // namespace

void write_circuit(std::ostream& out, const Circuit& c) {
    out << "PC v1 " << c.num_vars << ' ' << c.roots.size() << '\n';
    for (int v = 0; v < c.num_vars; ++v) out << c.domains[v] << '\n';
    for (int u = 0; u < c.num_units(); ++u) {
        const Unit& unit = c.units[u];
        out << u;
        switch (unit.kind) {
            case UnitKind::Input:
                out << " I " << unit.var;
                for (double p : unit.table) out << ' ' << format_double(p);
                break;
            case UnitKind::Product:
                out << " P";
                for (int ch : unit.children) out << ' ' << ch;
                break;
            case UnitKind::Sum:
                out << " S";
                for (size_t i = 0; i < unit.children.size(); ++i)
                    out << ' ' << unit.children[i] << ':' << format_double(unit.weights[i]);
                break;
        }
        out << '\n';
    }
    out << "ROOTS";
    for (int r : c.roots) out << ' ' << r;
    out << '\n';
}

Circuit read_circuit(std::istream& in) {
    LineReader r(in);
    Circuit c;

    {
        std::istringstream ss(r.require("header"));
        std::string magic, version;
        ss >> magic >> version;
        if (magic != "PC" || version != "v1") r.fail("expected header `PC v1 <num_vars> <num_roots>`");
        long long nv = parse_int(r, ss, "num_vars");
        long long nr = parse_int(r, ss, "num_roots");
        if (nv <= 0) r.fail("num_vars must be positive");
        if (nr <= 0) r.fail("circuit must declare at least one root");
        c.num_vars = static_cast<int>(nv);
        c.roots.reserve(nr);
    }
    int expected_roots = static_cast<int>(c.roots.capacity());

    for (int v = 0; v < c.num_vars; ++v) {
        std::istringstream ss(r.require("domain size"));
        long long d = parse_int(r, ss, "domain size");
        if (d < 1) r.fail("domain size must be at least 1");
        c.domains.push_back(static_cast<int>(d));
    }

    std::string line;
    while (true) {
        line = r.require("unit line or ROOTS");
        if (line.rfind("ROOTS", 0) == 0) break;
        std::istringstream ss(line);
        long long id = parse_int(r, ss, "unit id");
        if (id != c.num_units()) r.fail("unit id " + std::to_string(id) + " out of order, expected " +
                                        std::to_string(c.num_units()));
        std::string tag;
        if (!(ss >> tag)) r.fail("missing unit kind");
        Unit u;
        if (tag == "I") {
            u.kind = UnitKind::Input;
            long long var = parse_int(r, ss, "variable index");
            if (var < 0 || var >= c.num_vars) r.fail("unit " + std::to_string(id) + ": variable out of range");
            u.var = static_cast<int>(var);
            double p, total = 0.0;
            while (ss >> p) {
                if (p < 0.0) r.fail("unit " + std::to_string(id) + ": negative table entry");
                u.table.push_back(p);
                total += p;
            }
            if (static_cast<int>(u.table.size()) != c.domains[u.var])
                r.fail("unit " + std::to_string(id) + ": table size " + std::to_string(u.table.size()) +
                       " does not match domain " + std::to_string(c.domains[u.var]));
            if (std::fabs(total - 1.0) > 1e-9)
                r.fail("unit " + std::to_string(id) + ": table sums to " + format_double(total));
        } else if (tag == "P") {
            u.kind = UnitKind::Product;
            long long ch;
            while (ss >> ch) {
                if (ch < 0 || ch >= id) r.fail("unit " + std::to_string(id) + ": child " +
                                               std::to_string(ch) + " must precede its parent");
                u.children.push_back(static_cast<int>(ch));
            }
            if (u.children.empty()) r.fail("unit " + std::to_string(id) + ": product with no children");
        } else if (tag == "S") {
            u.kind = UnitKind::Sum;
            std::string edge;
            double total = 0.0;
            while (ss >> edge) {
                size_t colon = edge.find(':');
                if (colon == std::string::npos)
                    r.fail("unit " + std::to_string(id) + ": sum edge must be <child>:<weight>");
                long long ch;
                double w;
                try {
                    ch = std::stoll(edge.substr(0, colon));
                    w = std::stod(edge.substr(colon + 1));
                } catch (const std::exception&) {
                    r.fail("unit " + std::to_string(id) + ": malformed sum edge `" + edge + "`");
                }
                if (ch < 0 || ch >= id) r.fail("unit " + std::to_string(id) + ": child " +
                                               std::to_string(ch) + " must precede its parent");
                if (w < 0.0) r.fail("unit " + std::to_string(id) + ": negative edge weight");
                u.children.push_back(static_cast<int>(ch));
                u.weights.push_back(w);
                total += w;
            }
            if (u.children.empty()) r.fail("unit " + std::to_string(id) + ": sum with no children");
            if (std::fabs(total - 1.0) > 1e-9)
                r.fail("unit " + std::to_string(id) + ": weights sum to " + format_double(total));
        } else {
            r.fail("unknown unit kind `" + tag + "`");
        }
        c.units.push_back(std::move(u));
    }

    {
        std::istringstream ss(line.substr(5));
        long long root;
        while (ss >> root) {
            if (root < 0 || root >= c.num_units()) r.fail("root id out of range");
            if (c.units[root].kind != UnitKind::Sum)
                r.fail("root " + std::to_string(root) + " is not a sum unit");
            c.roots.push_back(static_cast<int>(root));
        }
        if (c.roots.empty()) r.fail("ROOTS line lists no roots");
        if (static_cast<int>(c.roots.size()) != expected_roots)
            r.fail("header declares " + std::to_string(expected_roots) + " roots, ROOTS lists " +
                   std::to_string(c.roots.size()));
    }
    return c;
}

void write_cluster_map(std::ostream& out, const ClusterMap& map) {
    out << "CM v1 " << map.k << ' ' << map.dim << '\n';
    for (int i = 0; i < map.k; ++i) {
        const double* c = map.centroid(i);
        for (int d = 0; d < map.dim; ++d) out << (d ? " " : "") << format_double(c[d]);
        out << '\n';
    }
    for (size_t i = 0; i < map.labels.size(); ++i) out << i << ' ' << map.labels[i] << '\n';
}

ClusterMap read_cluster_map(std::istream& in, int64_t* line_counter) {
    LineReader r(in);
    if (line_counter) r.line_no = *line_counter;
    ClusterMap map;
    {
        std::istringstream ss(r.require("CM header"));
        std::string magic, version;
        ss >> magic >> version;
        if (magic != "CM" || version != "v1") r.fail("expected header `CM v1 <k> <dim>`");
        long long k = parse_int(r, ss, "k");
        long long dim = parse_int(r, ss, "dim");
        if (k < 1 || dim < 1) r.fail("cluster map must have k >= 1 and dim >= 1");
        map.k = static_cast<int>(k);
        map.dim = static_cast<int>(dim);
    }
    map.centroids.reserve(static_cast<int64_t>(map.k) * map.dim);
    for (int i = 0; i < map.k; ++i) {
        std::istringstream ss(r.require("centroid line"));
        for (int d = 0; d < map.dim; ++d) map.centroids.push_back(parse_real(r, ss, "centroid entry"));
    }
    std::string line;
    std::streampos before = in.tellg();
    while (r.next(line)) {
        if (line.rfind("CM", 0) == 0) {
            // start of the next block; rewind so the caller can read it
            in.seekg(before);
            r.line_no -= 1;
            break;
        }
        std::istringstream ss(line);
        long long idx = parse_int(r, ss, "sample index");
        long long lab = parse_int(r, ss, "label");
        if (idx != static_cast<long long>(map.labels.size()))
            r.fail("sample index " + std::to_string(idx) + " out of order");
        if (lab < 0 || lab >= map.k) r.fail("label " + std::to_string(lab) + " out of range");
        map.labels.push_back(static_cast<int>(lab));
        before = in.tellg();
    }
    if (line_counter) *line_counter = r.line_no;
    return map;
}

void write_cluster_maps(std::ostream& out, const std::vector<ClusterMap>& maps) {
    for (const ClusterMap& m : maps) write_cluster_map(out, m);
}

std::vector<ClusterMap> read_cluster_maps(std::istream& in) {
    std::vector<ClusterMap> maps;
    int64_t line = 0;
    while (true) {
        // peek for another block
        std::streampos pos = in.tellg();
        std::string probe;
        bool any = false;
        while (std::getline(in, probe)) {
            if (!probe.empty() && probe != "\r") {
                any = true;
                break;
            }
        }
        if (!any) break;
        in.clear();
        in.seekg(pos);
        maps.push_back(read_cluster_map(in, &line));
    }
    if (maps.empty()) throw ParseError("labels file contains no cluster maps", 1);
    return maps;
}

void write_dataset(std::ostream& out, const GridDataset& ds) {
    int64_t n = ds.images.num_samples();
    out << "DS v1 " << n << ' ' << ds.images.num_vars << ' ' << ds.embed_dim << ' ' << ds.grid_h << ' '
        << ds.grid_w << '\n';
    for (int64_t i = 0; i < n; ++i) {
        const int32_t* row = ds.images.row(i);
        for (int v = 0; v < ds.images.num_vars; ++v) out << (v ? " " : "") << row[v];
        out << '\n';
        for (int p = 0; p < ds.num_positions(); ++p) {
            const double* h = ds.embedding(i, p);
            for (int d = 0; d < ds.embed_dim; ++d) out << (d ? " " : "") << format_double(h[d]);
            out << '\n';
        }
    }
}

GridDataset read_dataset(std::istream& in) {
    LineReader r(in);
    GridDataset ds;
    long long n;
    {
        std::istringstream ss(r.require("DS header"));
        std::string magic, version;
        ss >> magic >> version;
        if (magic != "DS" || version != "v1")
            r.fail("expected header `DS v1 <N> <V> <D> <grid_h> <grid_w>`");
        n = parse_int(r, ss, "sample count");
        long long v = parse_int(r, ss, "variable count");
        long long d = parse_int(r, ss, "embedding dim");
        long long gh = parse_int(r, ss, "grid height");
        long long gw = parse_int(r, ss, "grid width");
        if (n < 0 || v < 1 || d < 1 || gh < 1 || gw < 1) r.fail("invalid dataset dimensions");
        ds.images.num_vars = static_cast<int>(v);
        ds.embed_dim = static_cast<int>(d);
        ds.grid_h = static_cast<int>(gh);
        ds.grid_w = static_cast<int>(gw);
    }
    ds.images.values.reserve(n * ds.images.num_vars);
    ds.embeddings.reserve(n * ds.num_positions() * ds.embed_dim);
    for (int64_t i = 0; i < n; ++i) {
        std::istringstream ss(r.require("pixel line"));
        for (int v = 0; v < ds.images.num_vars; ++v) {
            long long px = parse_int(r, ss, "pixel value");
            if (px < 0) r.fail("negative pixel value");
            ds.images.values.push_back(static_cast<int32_t>(px));
        }
        for (int p = 0; p < ds.num_positions(); ++p) {
            std::istringstream es(r.require("embedding line"));
            for (int d = 0; d < ds.embed_dim; ++d)
                ds.embeddings.push_back(parse_real(r, es, "embedding entry"));
        }
    }
    // domains are not part of the format; infer from the data
    ds.images.domains.assign(ds.images.num_vars, 2);
    for (int64_t i = 0; i < n; ++i) {
        const int32_t* row = ds.images.row(i);
        for (int v = 0; v < ds.images.num_vars; ++v)
            if (row[v] + 1 > ds.images.domains[v]) ds.images.domains[v] = row[v] + 1;
    }
    return ds;
}

void atomic_write_file(const std::string& path, const std::string& contents) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ArgError("cannot open " + tmp + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw ArgError("write failed for " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw ArgError("rename failed for " + path + ": " + std::strerror(errno));
    }
}

Circuit load_circuit_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgError("cannot open circuit file " + path);
    return read_circuit(in);
}

void save_circuit_file(const std::string& path, const Circuit& c) {
    std::ostringstream out;
    write_circuit(out, c);
    atomic_write_file(path, out.str());
}

GridDataset load_dataset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgError("cannot open dataset file " + path);
    return read_dataset(in);
}

void save_dataset_file(const std::string& path, const GridDataset& ds) {
    std::ostringstream out;
    write_dataset(out, ds);
    atomic_write_file(path, out.str());
}

std::vector<ClusterMap> load_labels_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgError("cannot open labels file " + path);
    return read_cluster_maps(in);
}

void save_labels_file(const std::string& path, const std::vector<ClusterMap>& maps) {
    std::ostringstream out;
    write_cluster_maps(out, maps);
    atomic_write_file(path, out.str());
}

}  // namespace pcg
