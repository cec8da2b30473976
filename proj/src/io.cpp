#include "loewner/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "loewner/errors.hpp"

namespace loewner {

namespace {

using nlohmann::ordered_json;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

ordered_json to_json(const std::map<std::string, ParamValue>& values) {
    ordered_json j = ordered_json::object();
    for (const auto& [key, value] : values) {
        std::visit([&](const auto& v) { j[key] = v; }, value);
    }
    return j;
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json report_object(const CheckReport& report) {
    ordered_json measured = ordered_json::object();
    for (const auto& [key, value] : report.measured) measured[key] = number_or_null(value);
    ordered_json threshold = ordered_json::object();
    for (const auto& c : report.criteria) {
        threshold[c.quantity] = {{"op", c.op == Criterion::Op::at_most ? "<=" : ">="},
                                 {"value", number_or_null(c.threshold)}};
    }
    ordered_json j;
    j["check"] = report.check;
    j["params"] = to_json(report.params);
    j["measured"] = measured;
    j["threshold"] = threshold;
    j["pass"] = report.pass;
    j["notes"] = report.notes;
    j["solver_metadata"] = to_json(report.solver_metadata);
    return j;
}

// Maps window coordinates onto a fixed 800 x 400 canvas with y pointing up.
struct Canvas {
    double x0, x1, y0, y1;
    static constexpr double width = 800.0;
    static constexpr double height = 400.0;

    double px(double x) const { return (x - x0) / (x1 - x0) * width; }
    double py(double y) const { return height - (y - y0) / (y1 - y0) * height; }
};

std::string svg_header(const Canvas& c) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 400\" width=\"800\" height=\"400\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"400\" fill=\"white\"/>\n";
    if (c.y0 <= 0.0 && c.y1 >= 0.0) {
        os << "<line x1=\"0\" y1=\"" << short_num(c.py(0.0)) << "\" x2=\"800\" y2=\"" << short_num(c.py(0.0))
           << "\" stroke=\"gray\" stroke-width=\"1\"/>\n";
    }
    return os.str();
}

}  // namespace

std::string trace_csv(const TracePath& trace) {
    std::string out = "t,re,im\n";
    for (std::size_t i = 0; i < trace.points.size(); ++i) {
        out += num(trace.times[i]) + "," + num(trace.points[i].real()) + "," + num(trace.points[i].imag()) + "\n";
    }
    return out;
}

std::string trajectory_csv(const FlowTrajectory& trajectory) {
    std::string out = "t,re,im\n";
    for (std::size_t i = 0; i < trajectory.points.size(); ++i) {
        out += num(trajectory.times[i]) + "," + num(trajectory.points[i].real()) + "," +
               num(trajectory.points[i].imag()) + "\n";
    }
    return out;
}

std::string curvature_csv(const std::vector<double>& times, const std::vector<double>& values) {
    std::string out = "t,LC\n";
    for (std::size_t i = 0; i < times.size(); ++i) out += num(times[i]) + "," + num(values[i]) + "\n";
    return out;
}

std::string subordinator_csv(const SubordinatorPath& path) {
    std::string out = "u,S\n";
    for (std::size_t i = 0; i < path.u_grid.size(); ++i) out += num(path.u_grid[i]) + "," + num(path.S_values[i]) + "\n";
    return out;
}

std::string inverse_csv(const InversePath& path) {
    std::string out = "t,E\n";
    for (std::size_t i = 0; i < path.t_grid.size(); ++i) out += num(path.t_grid[i]) + "," + num(path.E_values[i]) + "\n";
    return out;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    using namespace boost::archive::iterators;
    using It = base64_from_binary<transform_width<std::vector<std::uint8_t>::const_iterator, 6, 8>>;
    std::string out(It(bytes.begin()), It(bytes.end()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    using namespace boost::archive::iterators;
    using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
    std::string body = text;
    const auto pad = static_cast<std::size_t>(std::count(body.begin(), body.end(), '='));
    std::replace(body.begin(), body.end(), '=', 'A');
    std::vector<std::uint8_t> out;
    try {
        out.assign(It(body.begin()), It(body.end()));
    } catch (const std::exception&) {
        throw ParseError("invalid base64 data", 0);
    }
    out.resize(out.size() - std::min(pad, out.size()));
    return out;
}

std::vector<std::uint8_t> pack_membership(const HullRaster& raster) {
    std::vector<std::uint8_t> bytes((raster.cells.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < raster.cells.size(); ++i) {
        if (raster.cells[i] == CellState::member) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
    return bytes;
}

std::string raster_json(const HullRaster& raster) {
    ordered_json j;
    j["window"] = {raster.window.x0, raster.window.x1, raster.window.y0, raster.window.y1};
    j["resolution"] = {raster.resolution.nx, raster.resolution.ny};
    j["time"] = raster.time;
    j["layout"] = "row-major, row 0 at y0, msb-first";
    j["members"] = raster.member_count();
    j["coverage_fraction"] = static_cast<double>(raster.member_count()) / static_cast<double>(raster.cells.size());
    j["bits"] = base64_encode(pack_membership(raster));
    if (raster.real_interval) {
        j["real_interval"] = {raster.real_interval->left, raster.real_interval->right};
    } else {
        j["real_interval"] = nullptr;
    }
    j["unknown_cells"] = raster.unknown_cells;
    return j.dump(2) + "\n";
}

HullRaster raster_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    HullRaster r;
    try {
        const auto& w = j.at("window");
        r.window = {w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>(), w.at(3).get<double>()};
        r.resolution = {j.at("resolution").at(0).get<std::size_t>(), j.at("resolution").at(1).get<std::size_t>()};
        r.time = j.at("time").get<double>();
        r.unknown_cells = j.at("unknown_cells").get<std::size_t>();
        if (!j.at("real_interval").is_null()) {
            r.real_interval = RealInterval{j["real_interval"].at(0).get<double>(), j["real_interval"].at(1).get<double>()};
        }
        const auto bytes = base64_decode(j.at("bits").get<std::string>());
        r.cells.assign(r.resolution.nx * r.resolution.ny, CellState::outside);
        if (bytes.size() * 8 < r.cells.size()) throw ParseError("raster bit array too short", 0);
        for (std::size_t i = 0; i < r.cells.size(); ++i) {
            if (bytes[i / 8] & (0x80u >> (i % 8))) r.cells[i] = CellState::member;
        }
    } catch (const ordered_json::exception& e) {
        throw ParseError(std::string("malformed raster document: ") + e.what(), 0);
    }
    return r;
}

std::string report_json(const CheckReport& report) { return report_object(report).dump(2) + "\n"; }

std::string reports_json(const std::vector<CheckReport>& reports) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : reports) arr.push_back(report_object(r));
    return arr.dump(2) + "\n";
}

std::string trace_svg(const TracePath& trace) {
    double x0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
    if (!trace.points.empty()) {
        x0 = x1 = trace.points.front().real();
        for (const auto& z : trace.points) {
            x0 = std::min(x0, z.real());
            x1 = std::max(x1, z.real());
            y1 = std::max(y1, z.imag());
        }
    }
    // keep a 2:1 aspect so the picture is not distorted
    const double span = std::max({x1 - x0, 2.0 * y1, 1e-9}) * 1.1;
    const double cx = 0.5 * (x0 + x1);
    const Canvas c{cx - 0.5 * span, cx + 0.5 * span, -0.05 * span, 0.45 * span};
    std::ostringstream os;
    os << svg_header(c) << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < trace.points.size(); ++i) {
        if (i) os << ' ';
        os << short_num(c.px(trace.points[i].real())) << ',' << short_num(c.py(trace.points[i].imag()));
    }
    os << "\"/>\n</svg>\n";
    return os.str();
}

std::string raster_svg(const HullRaster& raster) {
    const Canvas c{raster.window.x0, raster.window.x1, raster.window.y0, raster.window.y1};
    const double cw = Canvas::width / static_cast<double>(raster.resolution.nx);
    const double ch = Canvas::height / static_cast<double>(raster.resolution.ny);
    std::ostringstream os;
    os << svg_header(c);
    for (std::size_t j = 0; j < raster.resolution.ny; ++j) {
        for (std::size_t i = 0; i < raster.resolution.nx; ++i) {
            const CellState s = raster.cells[j * raster.resolution.nx + i];
            if (s == CellState::outside) continue;
            os << "<rect x=\"" << short_num(i * cw) << "\" y=\"" << short_num(Canvas::height - (j + 1) * ch)
               << "\" width=\"" << short_num(cw) << "\" height=\"" << short_num(ch) << "\" fill=\""
               << (s == CellState::member ? "#1f4e9c" : "#d62728") << "\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

}  // namespace loewner
