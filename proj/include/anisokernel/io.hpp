#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "anisokernel/geometry.hpp"
#include "anisokernel/verdict.hpp"

namespace anisokernel::io {

/// %.17g
std::string format(double v);

/// CSV with a leading "# config_hash=<hex>" line and a column header.
void write_csv(const std::string& path, std::uint64_t hash, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// Coordinate triplets "i j value" of the nonzero entries.
void write_triplets(const std::string& path, std::uint64_t hash, const Eigen::MatrixXd& m);

/// Node coordinates and values of a field (boundary nodes included).
void write_field(const std::string& path, std::uint64_t hash, const Field& u);

void write_mesh(const std::string& dir, std::uint64_t hash, const FeSpace& space);

/// {"config_hash": ..., <key>: payload}
void write_json(const std::string& path, std::uint64_t hash, const std::string& key,
                const nlohmann::json& payload);

nlohmann::json to_json(const PropertyVerdict& v);
nlohmann::json to_json(const std::vector<PropertyVerdict>& vs);

std::string make_dir(const std::string& dir);

} // namespace anisokernel::io
