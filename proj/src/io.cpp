#include "anisokernel/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "anisokernel/config.hpp"
#include "anisokernel/error.hpp"

namespace anisokernel::io {

namespace {

std::ofstream open(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    return out;
}

} // namespace

std::string format(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, std::uint64_t hash, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows)
{
    auto out = open(path);
    out << "# config_hash=" << hash_string(hash) << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out << (c ? "," : "") << columns[c];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << format(row[c]);
        }
        out << '\n';
    }
}

void write_triplets(const std::string& path, std::uint64_t hash, const Eigen::MatrixXd& m)
{
    auto out = open(path);
    out << "# config_hash=" << hash_string(hash) << '\n';
    out << "# rows=" << m.rows() << " cols=" << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (m(i, j) != 0.0) {
                out << i << ' ' << j << ' ' << format(m(i, j)) << '\n';
            }
        }
    }
}

void write_field(const std::string& path, std::uint64_t hash, const Field& u)
{
    const FeSpace& space = *u.space;
    const Eigen::VectorXd values = u.node_values();
    std::vector<std::vector<double>> rows;
    rows.reserve(space.num_nodes());
    for (int i = 0; i < space.num_nodes(); ++i) {
        Point x = space.nodes()[i];
        if (space.dim() == 1) {
            rows.push_back({x.x, values[i]});
        } else {
            rows.push_back({x.x, x.y, values[i]});
        }
    }
    if (space.dim() == 1) {
        write_csv(path, hash, {"x", "value"}, rows);
    } else {
        write_csv(path, hash, {"x", "y", "value"}, rows);
    }
}

void write_mesh(const std::string& dir, std::uint64_t hash, const FeSpace& space)
{
    std::vector<std::vector<double>> nodes;
    for (int i = 0; i < space.num_nodes(); ++i) {
        Point x = space.nodes()[i];
        nodes.push_back({static_cast<double>(i), x.x, x.y, static_cast<double>(space.dof(i)),
                         space.delta(i)});
    }
    write_csv(dir + "/nodes.csv", hash, {"node", "x", "y", "dof", "delta"}, nodes);
    std::vector<std::vector<double>> elements;
    for (int e = 0; e < space.num_elements(); ++e) {
        std::vector<double> row{static_cast<double>(e)};
        for (int k = 0; k < space.vertices_per_element(); ++k) {
            row.push_back(space.elements()[e][k]);
        }
        elements.push_back(std::move(row));
    }
    if (space.dim() == 1) {
        write_csv(dir + "/elements.csv", hash, {"element", "v0", "v1"}, elements);
    } else {
        write_csv(dir + "/elements.csv", hash, {"element", "v0", "v1", "v2"}, elements);
    }
}

void write_json(const std::string& path, std::uint64_t hash, const std::string& key,
                const nlohmann::json& payload)
{
    nlohmann::json doc;
    doc["config_hash"] = hash_string(hash);
    doc[key] = payload;
    auto out = open(path);
    out << doc.dump(2) << '\n';
}

nlohmann::json to_json(const PropertyVerdict& v)
{
    return {{"name", v.name},
            {"pass", v.pass},
            {"measured", v.measured},
            {"threshold", v.threshold},
            {"context", v.context}};
}

nlohmann::json to_json(const std::vector<PropertyVerdict>& vs)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : vs) {
        arr.push_back(to_json(v));
    }
    return arr;
}

std::string make_dir(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error("cannot create output directory '" + dir + "': " + ec.message());
    }
    return dir;
}

} // namespace anisokernel::io
