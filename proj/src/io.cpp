#include "trispline/io.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "trispline/errors.hpp"
#include "trispline/parallel.hpp"

namespace trispline {

namespace {

std::string format_double(double v) {
    char buf[48];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open " + path + " for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot open " + path + " for writing");
    return out;
}

bool looks_numeric(const std::string& field) {
    if (field.empty()) return false;
    char* end = nullptr;
    std::strtod(field.c_str(), &end);
    return end != field.c_str() && *end == '\0';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) {
        std::size_t b = cur.find_first_not_of(" \t\r");
        std::size_t e = cur.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
    }
    return out;
}

} // namespace

Triangulation load_mesh_json(const std::string& path) {
    auto in = open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw io_error("bad mesh JSON in " + path + ": " + e.what());
    }
    if (!j.contains("vertices") || !j.contains("triangles"))
        throw validation_error(path + ": mesh JSON needs 'vertices' and 'triangles'");
    std::vector<Point2> vertices;
    for (const auto& v : j["vertices"])
        vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    std::vector<std::array<int, 3>> triangles;
    for (const auto& t : j["triangles"])
        triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    return Triangulation(std::move(vertices), std::move(triangles));
}

void save_mesh_json(const Triangulation& tri, const std::string& path) {
    nlohmann::json j;
    j["vertices"] = nlohmann::json::array();
    for (const auto& v : tri.vertices())
        j["vertices"].push_back({v.x, v.y});
    j["triangles"] = nlohmann::json::array();
    for (const auto& t : tri.triangles())
        j["triangles"].push_back({t[0], t[1], t[2]});
    auto out = open_output(path);
    out << j.dump(1) << '\n';
}

Triangulation load_mesh_csv(const std::string& vertices_path, const std::string& triangles_path) {
    Eigen::MatrixXd V = load_csv_matrix(vertices_path);
    Eigen::MatrixXd T = load_csv_matrix(triangles_path);
    if (V.cols() != 2)
        throw validation_error(vertices_path + ": expected two columns (x,y)");
    if (T.cols() != 3)
        throw validation_error(triangles_path + ": expected three columns (i,j,k)");
    std::vector<Point2> vertices;
    for (Eigen::Index r = 0; r < V.rows(); ++r)
        vertices.push_back({V(r, 0), V(r, 1)});
    std::vector<std::array<int, 3>> triangles;
    for (Eigen::Index r = 0; r < T.rows(); ++r)
        triangles.push_back({static_cast<int>(T(r, 0)), static_cast<int>(T(r, 1)),
                             static_cast<int>(T(r, 2))});
    return Triangulation(std::move(vertices), std::move(triangles));
}

Eigen::MatrixXd load_csv_matrix(const std::string& path) {
    auto in = open_input(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (first) {
            first = false;
            if (!fields.empty() && !looks_numeric(fields[0]))
                continue; // header row
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            if (f.empty() || f == "nan" || f == "NaN" || f == "NA") {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (end == f.c_str())
                throw validation_error(path + ": non-numeric field '" + f + "'");
            row.push_back(v);
        }
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw validation_error(path + ": ragged row with " + std::to_string(row.size()) +
                                   " fields, expected " + std::to_string(width));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw validation_error(path + ": no data rows");
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return M;
}

void save_csv_matrix(const Eigen::MatrixXd& m, const std::string& path,
                     const std::string& header) {
    auto out = open_output(path);
    if (!header.empty())
        out << header << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
}

std::vector<Point2> load_pixels_csv(const std::string& path) {
    Eigen::MatrixXd M = load_csv_matrix(path);
    if (M.cols() != 2)
        throw validation_error(path + ": expected two columns (z1,z2)");
    std::vector<Point2> px;
    px.reserve(static_cast<std::size_t>(M.rows()));
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        px.push_back({M(r, 0), M(r, 1)});
    return px;
}

void save_pixels_csv(const std::vector<Point2>& pixels, const std::string& path) {
    auto out = open_output(path);
    out << "z1,z2\n";
    for (const auto& p : pixels)
        out << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

void save_pgm(const Eigen::VectorXd& values, const std::vector<bool>& inside, int nx, int ny,
              const std::string& path) {
    if (static_cast<int>(values.size()) != nx * ny)
        throw validation_error("save_pgm: value count does not match the raster size");
    double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
    for (Eigen::Index j = 0; j < values.size(); ++j)
        if (inside[static_cast<std::size_t>(j)]) {
            lo = std::min(lo, values(j));
            hi = std::max(hi, values(j));
        }
    if (!(lo <= hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    const double span = hi > lo ? hi - lo : 1.0;

    auto out = open_output(path);
    out << "P2\n" << nx << ' ' << ny << "\n255\n";
    // raster rows top to bottom
    for (int row = ny - 1; row >= 0; --row) {
        for (int ix = 0; ix < nx; ++ix) {
            const int j = row * nx + ix;
            int g = 0;
            if (inside[static_cast<std::size_t>(j)])
                g = 1 + static_cast<int>(254.0 * (values(j) - lo) / span);
            out << g << (ix + 1 < nx ? ' ' : '\n');
        }
    }

    nlohmann::json side;
    side["min"] = lo;
    side["max"] = hi;
    side["nx"] = nx;
    side["ny"] = ny;
    side["encoding"] = "value = min + (gray-1)/254*(max-min); gray 0 = outside";
    auto sout = open_output(path + ".json");
    sout << side.dump(1) << '\n';
}

std::string csv_double(double v) { return format_double(v); }

int resolve_threads(int requested) {
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("TRISPLINE_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0)
            return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

} // namespace trispline
