#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cdgcn/tensor.hpp"

namespace cdgcn {

inline constexpr double kEarthRadiusKm = 6371.0;

struct Station {
  std::string id;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

/// Small dense matrix, row-major. Used for the N x N graph matrices.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), v(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return v[i * cols + j];
  }
};

enum class AdjacencyMode { gaussian, sym_normalized };

/// Station set with its derived distance, similarity and adjacency matrices.
struct StationGraph {
  std::vector<Station> stations;
  Matrix distance_km;   // D: symmetric, zero diagonal
  Matrix similarity;    // P: Gaussian kernel of D, unit diagonal
  Matrix adjacency;     // A: thresholded P (optionally sym-normalized)
  double theta_km = 0.0;
  double omega = 0.0;
  AdjacencyMode mode = AdjacencyMode::gaussian;

  std::size_t node_count() const { return stations.size(); }
};

/// Great-circle distance in km between two stations.
/// Throws std::invalid_argument for out-of-range coordinates or R <= 0.
double haversine_distance(const Station& a, const Station& b,
                          double earth_radius_km = kEarthRadiusKm);

Matrix distance_matrix(const std::vector<Station>& stations,
                       double earth_radius_km = kEarthRadiusKm);

/// P(i,j) = exp(-D(i,j)^2 / (2 theta^2)). Requires theta > 0.
Matrix gaussian_similarity(const Matrix& distance, double theta_km);

/// A(i,j) = P(i,j) when P(i,j) > omega, else 0. No renormalization; the unit
/// diagonal of P always survives the threshold, so self-loops are kept.
Matrix threshold_adjacency(const Matrix& similarity, double omega);

/// Thresholded adjacency rescaled by inverse sqrt degrees,
/// D^-1/2 A D^-1/2. Retained self-loops keep every degree >= 1.
Matrix symmetric_normalized_adjacency(const Matrix& similarity, double omega);

/// Lift an N x N adjacency to an (N, N, T) tensor with identical slices.
Tensor3 adjacency_tensor(const Matrix& adjacency, std::size_t depth);

StationGraph build_station_graph(std::vector<Station> stations,
                                 double theta_km, double omega,
                                 AdjacencyMode mode = AdjacencyMode::gaussian,
                                 double earth_radius_km = kEarthRadiusKm);

}  // namespace cdgcn
