#include "cdgcn/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace cdgcn {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw std::runtime_error(where + ": invalid number '" + s + "'");
  }
  return v;
}

std::size_t parse_index(const std::string& s, const std::string& where) {
  std::size_t v = 0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) {
    throw std::runtime_error(where + ": invalid index '" + s + "'");
  }
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

std::string line_ref(const std::string& path, std::size_t line_no) {
  return path + ":" + std::to_string(line_no);
}

std::unordered_map<std::string, std::size_t> station_index(
    const std::vector<Station>& stations) {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    idx.emplace(stations[i].id, i);
  }
  return idx;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<Station> load_stations(const std::string& path) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line) || split_csv(line) !=
      std::vector<std::string>{"station_id", "lat", "lon"}) {
    throw std::runtime_error(path + ": expected header 'station_id,lat,lon'");
  }
  std::vector<Station> out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) {
      throw std::runtime_error(line_ref(path, line_no) +
                               ": expected 3 fields, got " +
                               std::to_string(fields.size()));
    }
    Station s;
    s.id = fields[0];
    if (s.id.empty()) {
      throw std::runtime_error(line_ref(path, line_no) + ": empty station id");
    }
    if (!seen.insert(s.id).second) {
      throw std::runtime_error(line_ref(path, line_no) +
                               ": duplicate station id '" + s.id + "'");
    }
    s.lat_deg = parse_double(fields[1], line_ref(path, line_no));
    s.lon_deg = parse_double(fields[2], line_ref(path, line_no));
    if (!(s.lat_deg >= -90.0 && s.lat_deg <= 90.0)) {
      throw std::runtime_error(line_ref(path, line_no) + ": latitude " +
                               fields[1] + " outside [-90, 90]");
    }
    if (!(s.lon_deg >= -180.0 && s.lon_deg <= 180.0)) {
      throw std::runtime_error(line_ref(path, line_no) + ": longitude " +
                               fields[2] + " outside [-180, 180]");
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw std::runtime_error(path + ": no stations");
  return out;
}

void write_stations_csv(const std::string& path,
                        const std::vector<Station>& stations) {
  std::ofstream f = open_out(path);
  f << "station_id,lat,lon\n";
  for (const Station& s : stations) {
    f << s.id << ',' << format_double(s.lat_deg) << ','
      << format_double(s.lon_deg) << '\n';
  }
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

ReadingsData load_readings(const std::string& path,
                           const std::vector<Station>& stations) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) {
    throw std::runtime_error(path + ": empty file");
  }
  auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "station_id") {
    throw std::runtime_error(path +
                             ": expected header 't,station_id,<features...>'");
  }
  std::vector<std::string> features(header.begin() + 2, header.end());
  const std::size_t n_features = features.size();
  const auto idx = station_index(stations);

  struct Cell {
    std::size_t t, station;
    std::vector<double> values;      // parallel to `present`
    std::vector<std::uint8_t> present;
  };
  std::vector<Cell> rows;
  std::size_t max_t = 0;
  std::unordered_set<std::uint64_t> seen_pairs;
  std::vector<std::uint8_t> t_seen;

  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2 + n_features) {
      throw std::runtime_error(line_ref(path, line_no) + ": expected " +
                               std::to_string(2 + n_features) +
                               " fields, got " +
                               std::to_string(fields.size()));
    }
    Cell c;
    c.t = parse_index(fields[0], line_ref(path, line_no));
    auto it = idx.find(fields[1]);
    if (it == idx.end()) {
      throw std::runtime_error(line_ref(path, line_no) +
                               ": unknown station id '" + fields[1] + "'");
    }
    c.station = it->second;
    const std::uint64_t key =
        static_cast<std::uint64_t>(c.t) * stations.size() + c.station;
    if (!seen_pairs.insert(key).second) {
      throw std::runtime_error(line_ref(path, line_no) +
                               ": duplicate row for t=" + fields[0] +
                               ", station '" + fields[1] + "'");
    }
    for (std::size_t j = 0; j < n_features; ++j) {
      const std::string& cell = fields[2 + j];
      if (cell.empty()) {
        c.values.push_back(0.0);
        c.present.push_back(0);
      } else {
        c.values.push_back(parse_double(cell, line_ref(path, line_no)));
        c.present.push_back(1);
      }
    }
    max_t = std::max(max_t, c.t);
    if (c.t >= t_seen.size()) t_seen.resize(c.t + 1, 0);
    t_seen[c.t] = 1;
    rows.push_back(std::move(c));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  for (std::size_t t = 0; t <= max_t; ++t) {
    if (!t_seen[t]) {
      throw std::runtime_error(path + ": time index " + std::to_string(t) +
                               " missing; t must be contiguous from 0");
    }
  }

  ReadingsData out;
  out.feature_names = std::move(features);
  out.values = Tensor3(stations.size(), n_features, max_t + 1);
  out.observed = Mask(stations.size(), n_features, max_t + 1);
  for (const Cell& c : rows) {
    for (std::size_t j = 0; j < n_features; ++j) {
      if (c.present[j]) {
        out.values(c.station, j, c.t) = c.values[j];
        out.observed(c.station, j, c.t) = 1;
      }
    }
  }
  return out;
}

void write_readings_csv(const std::string& path,
                        const std::vector<Station>& stations,
                        const std::vector<std::string>& feature_names,
                        const Tensor3& values, const Mask* observed) {
  if (values.rows() != stations.size() ||
      values.cols() != feature_names.size()) {
    throw std::invalid_argument(
        "write_readings_csv: tensor dims do not match stations/features");
  }
  std::ofstream f = open_out(path);
  f << "t,station_id";
  for (const auto& name : feature_names) f << ',' << name;
  f << '\n';
  for (std::size_t t = 0; t < values.depth(); ++t) {
    for (std::size_t i = 0; i < stations.size(); ++i) {
      f << t << ',' << stations[i].id;
      for (std::size_t j = 0; j < feature_names.size(); ++j) {
        f << ',';
        if (!observed || (*observed)(i, j, t)) {
          f << format_double(values(i, j, t));
        }
      }
      f << '\n';
    }
  }
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<std::string> station_ids_of(const std::vector<Station>& stations) {
  std::vector<std::string> ids;
  ids.reserve(stations.size());
  for (const Station& s : stations) ids.push_back(s.id);
  return ids;
}

StandaloneReadings load_readings_standalone(const std::string& path) {
  // first pass: station ids in order of first appearance
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() < 2) {
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    }
    if (seen.insert(fields[1]).second) ids.push_back(fields[1]);
  }
  std::vector<Station> stations;
  stations.reserve(ids.size());
  for (const auto& id : ids) stations.push_back({id, 0.0, 0.0});
  StandaloneReadings out;
  out.data = load_readings(path, stations);
  out.station_ids = std::move(ids);
  return out;
}

Mask load_mask_csv(const std::string& path,
                   const std::vector<std::string>& station_ids,
                   const std::vector<std::string>& feature_names,
                   std::size_t depth) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line) || split_csv(line) !=
      std::vector<std::string>{"t", "station_id", "feature"}) {
    throw std::runtime_error(path + ": expected header 't,station_id,feature'");
  }
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < station_ids.size(); ++i) {
    idx.emplace(station_ids[i], i);
  }
  std::unordered_map<std::string, std::size_t> fidx;
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    fidx.emplace(feature_names[j], j);
  }
  Mask mask(station_ids.size(), feature_names.size(), depth);
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) {
      throw std::runtime_error(line_ref(path, line_no) +
                               ": expected 3 fields");
    }
    const std::size_t t = parse_index(fields[0], line_ref(path, line_no));
    if (t >= depth) {
      throw std::runtime_error(line_ref(path, line_no) + ": time index " +
                               fields[0] + " out of range (T=" +
                               std::to_string(depth) + ")");
    }
    auto si = idx.find(fields[1]);
    if (si == idx.end()) {
      throw std::runtime_error(line_ref(path, line_no) +
                               ": unknown station id '" + fields[1] + "'");
    }
    auto fi = fidx.find(fields[2]);
    if (fi == fidx.end()) {
      throw std::runtime_error(line_ref(path, line_no) +
                               ": unknown feature '" + fields[2] + "'");
    }
    mask(si->second, fi->second, t) = 1;
  }
  return mask;
}

void write_mask_csv(const std::string& path,
                    const std::vector<std::string>& station_ids,
                    const std::vector<std::string>& feature_names,
                    const Mask& mask) {
  std::ofstream f = open_out(path);
  f << "t,station_id,feature\n";
  for (std::size_t t = 0; t < mask.depth; ++t) {
    for (std::size_t i = 0; i < mask.rows; ++i) {
      for (std::size_t j = 0; j < mask.cols; ++j) {
        if (mask(i, j, t)) {
          f << t << ',' << station_ids[i] << ',' << feature_names[j] << '\n';
        }
      }
    }
  }
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace cdgcn
