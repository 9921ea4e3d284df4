#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pcgrow/circuit.hpp"
#include "pcgrow/data.hpp"

namespace pcg {

struct ClusterMap;

// Circuit text format:
//   PC v1 <num_vars> <num_roots>
//   one line per domain size
//   <id> I <var> <p0> <p1> ...
//   <id> P <child ids...>
//   <id> S <child>:<weight> ...
//   ROOTS <ids...>
// Ids equal line order; children must precede parents. Parameters are printed
// with 17 significant digits, so a round trip is bit-exact.
void write_circuit(std::ostream& out, const Circuit& c);
Circuit read_circuit(std::istream& in);

// ClusterMap format: `CM v1 <k> <dim>`, k centroid lines, then one
// `<sample_index> <label>` line per sample.
void write_cluster_map(std::ostream& out, const ClusterMap& map);
ClusterMap read_cluster_map(std::istream& in, int64_t* line_counter = nullptr);

// Per-position label files are ClusterMap blocks back to back.
void write_cluster_maps(std::ostream& out, const std::vector<ClusterMap>& maps);
std::vector<ClusterMap> read_cluster_maps(std::istream& in);

// Dataset format: `DS v1 <N> <V> <D> <grid_h> <grid_w>`, then per sample one
// line of V pixels followed by grid_h*grid_w embedding lines of D floats.
void write_dataset(std::ostream& out, const GridDataset& ds);
GridDataset read_dataset(std::istream& in);

std::string format_double(double v);  // 17 significant digits

// Write via a temp file in the same directory, then rename; no partial files
// are left behind on failure.
void atomic_write_file(const std::string& path, const std::string& contents);

Circuit load_circuit_file(const std::string& path);
void save_circuit_file(const std::string& path, const Circuit& c);
GridDataset load_dataset_file(const std::string& path);
void save_dataset_file(const std::string& path, const GridDataset& ds);
std::vector<ClusterMap> load_labels_file(const std::string& path);
void save_labels_file(const std::string& path, const std::vector<ClusterMap>& maps);

}  // namespace pcg
