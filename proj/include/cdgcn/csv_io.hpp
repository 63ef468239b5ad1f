#pragma once

#include <string>
#include <vector>

#include "cdgcn/graph.hpp"
#include "cdgcn/mask.hpp"
#include "cdgcn/tensor.hpp"

namespace cdgcn {

// File formats
//   stations.csv  header `station_id,lat,lon`, decimal degrees
//   readings.csv  header `t,station_id,f1,...,fF`; one row per (t, station);
//                 empty cell = missing; t contiguous from 0
//   mask.csv      header `t,station_id,feature`; one row per marked cell
// Doubles are written with shortest round-trip formatting, so identical data
// produces byte-identical files.

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

std::vector<Station> load_stations(const std::string& path);
void write_stations_csv(const std::string& path,
                        const std::vector<Station>& stations);

struct ReadingsData {
  Tensor3 values;  // (N, F, T); unobserved entries are 0
  Mask observed;
  std::vector<std::string> feature_names;
};

ReadingsData load_readings(const std::string& path,
                           const std::vector<Station>& stations);

/// Reads a readings file without a station list; stations are indexed in
/// order of first appearance. Used by standalone evaluation.
struct StandaloneReadings {
  ReadingsData data;
  std::vector<std::string> station_ids;
};
StandaloneReadings load_readings_standalone(const std::string& path);

/// observed == nullptr writes every cell.
void write_readings_csv(const std::string& path,
                        const std::vector<Station>& stations,
                        const std::vector<std::string>& feature_names,
                        const Tensor3& values, const Mask* observed = nullptr);

Mask load_mask_csv(const std::string& path,
                   const std::vector<std::string>& station_ids,
                   const std::vector<std::string>& feature_names,
                   std::size_t depth);

void write_mask_csv(const std::string& path,
                    const std::vector<std::string>& station_ids,
                    const std::vector<std::string>& feature_names,
                    const Mask& mask);

std::vector<std::string> station_ids_of(const std::vector<Station>& stations);

}  // namespace cdgcn
