#include "cdgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cdgcn {

namespace {

void check_station(const Station& s) {
  if (!(s.lat_deg >= -90.0 && s.lat_deg <= 90.0)) {
    throw std::invalid_argument("station '" + s.id + "': latitude " +
                                std::to_string(s.lat_deg) +
                                " outside [-90, 90]");
  }
  if (!(s.lon_deg >= -180.0 && s.lon_deg <= 180.0)) {
    throw std::invalid_argument("station '" + s.id + "': longitude " +
                                std::to_string(s.lon_deg) +
                                " outside [-180, 180]");
  }
}

inline double hav(double x) {
  const double s = std::sin(0.5 * x);
  return s * s;
}

}  // namespace

double haversine_distance(const Station& a, const Station& b,
                          double earth_radius_km) {
  check_station(a);
  check_station(b);
  if (!(earth_radius_km > 0.0)) {
    throw std::invalid_argument("haversine_distance: radius must be > 0");
  }
  constexpr double deg = std::numbers::pi / 180.0;
  const double la1 = a.lat_deg * deg, la2 = b.lat_deg * deg;
  const double dlat = (b.lat_deg - a.lat_deg) * deg;
  const double dlon = (b.lon_deg - a.lon_deg) * deg;
  const double h = hav(dlat) + std::cos(la1) * std::cos(la2) * hav(dlon);
  return 2.0 * earth_radius_km * std::asin(std::min(1.0, std::sqrt(h)));
}

Matrix distance_matrix(const std::vector<Station>& stations,
                       double earth_radius_km) {
  const std::size_t n = stations.size();
  if (n == 0) throw std::invalid_argument("distance_matrix: no stations");
  Matrix d(n, n, 0.0);
  // computed once per unordered pair so D is exactly symmetric
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double km =
          haversine_distance(stations[i], stations[j], earth_radius_km);
      d(i, j) = km;
      d(j, i) = km;
    }
  }
  return d;
}

Matrix gaussian_similarity(const Matrix& distance, double theta_km) {
  if (!(theta_km > 0.0)) {
    throw std::invalid_argument("gaussian_similarity: theta must be > 0");
  }
  Matrix p(distance.rows, distance.cols);
  const double inv = 1.0 / (2.0 * theta_km * theta_km);
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    const double d = distance.v[i];
    p.v[i] = std::exp(-d * d * inv);
  }
  return p;
}

Matrix threshold_adjacency(const Matrix& similarity, double omega) {
  if (!(omega >= 0.0 && omega < 1.0)) {
    throw std::invalid_argument("threshold_adjacency: omega must be in [0, 1)");
  }
  Matrix a(similarity.rows, similarity.cols);
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    a.v[i] = similarity.v[i] > omega ? similarity.v[i] : 0.0;
  }
  return a;
}

Matrix symmetric_normalized_adjacency(const Matrix& similarity, double omega) {
  Matrix a = threshold_adjacency(similarity, omega);
  const std::size_t n = a.rows;
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += a(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);  // self-loop keeps deg >= 1
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
    }
  }
  return a;
}

Tensor3 adjacency_tensor(const Matrix& adjacency, std::size_t depth) {
  if (depth == 0) {
    throw std::invalid_argument("adjacency_tensor: depth must be >= 1");
  }
  const std::size_t n = adjacency.rows;
  Tensor3 out(n, n, depth);
  for (std::size_t k = 0; k < depth; ++k) {
    double* slice = out.slice(k);
    // adjacency is row-major, slices are column-major; A is symmetric so the
    // copy order is immaterial, but keep indices explicit anyway.
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        slice[j * n + i] = adjacency(i, j);
      }
    }
  }
  return out;
}

StationGraph build_station_graph(std::vector<Station> stations,
                                 double theta_km, double omega,
                                 AdjacencyMode mode, double earth_radius_km) {
  StationGraph g;
  g.stations = std::move(stations);
  g.theta_km = theta_km;
  g.omega = omega;
  g.mode = mode;
  g.distance_km = distance_matrix(g.stations, earth_radius_km);
  g.similarity = gaussian_similarity(g.distance_km, theta_km);
  g.adjacency = mode == AdjacencyMode::gaussian
                    ? threshold_adjacency(g.similarity, omega)
                    : symmetric_normalized_adjacency(g.similarity, omega);
  return g;
}

}  // namespace cdgcn
