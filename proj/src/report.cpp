#include "began/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "began/error.hpp"

namespace began {

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void MetricsRecord::validate() const {
    if (step < 0) throw Error("metrics: step must be >= 0");
    if (!(k >= 0.0 && k <= 1.0)) throw Error("metrics: k outside [0,1] at step " + std::to_string(step));
    for (const double loss : {loss_real, loss_gen, loss_constraint})
        if (!(loss >= 0.0) || !std::isfinite(loss))
            throw Error("metrics: negative or non-finite loss at step " + std::to_string(step));
    if (!(convergence_measure >= 0.0)) throw Error("metrics: negative convergence measure");
    if (!(var_real >= 0.0) || !(var_gen >= 0.0)) throw Error("metrics: negative variance");
    if (modes_covered < 0 || modes_covered > 25)
        throw Error("metrics: modes_covered outside [0,25] at step " + std::to_string(step));
    if (!(hq_fraction >= 0.0 && hq_fraction <= 1.0))
        throw Error("metrics: hq_fraction outside [0,1] at step " + std::to_string(step));
}

std::string metrics_csv_header() {
    return "step,loss_real,loss_gen,loss_constraint,k,convergence_measure,var_real,var_gen,"
           "modes_covered,hq_fraction\n";
}

std::string to_csv_row(const MetricsRecord& r) {
    r.validate();
    std::ostringstream os;
    os << r.step << ',' << format_double(r.loss_real) << ',' << format_double(r.loss_gen) << ','
       << format_double(r.loss_constraint) << ',' << format_double(r.k) << ','
       << format_double(r.convergence_measure) << ',' << format_double(r.var_real) << ','
       << format_double(r.var_gen) << ',' << r.modes_covered << ','
       << format_double(r.hq_fraction) << '\n';
    return os.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    return out;
}

double field_double(const std::string& s) {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw Error("metrics csv: malformed number '" + s + "'");
    return v;
}

}  // namespace

MetricsRecord metrics_from_csv_row(const std::string& line) {
    const auto fields = split_csv(line);
    if (fields.size() != 10) throw Error("metrics csv: expected 10 fields, got " + std::to_string(fields.size()));
    MetricsRecord r;
    r.step = static_cast<int64_t>(field_double(fields[0]));
    r.loss_real = field_double(fields[1]);
    r.loss_gen = field_double(fields[2]);
    r.loss_constraint = field_double(fields[3]);
    r.k = field_double(fields[4]);
    r.convergence_measure = field_double(fields[5]);
    r.var_real = field_double(fields[6]);
    r.var_gen = field_double(fields[7]);
    r.modes_covered = static_cast<int>(field_double(fields[8]));
    r.hq_fraction = field_double(fields[9]);
    r.validate();
    return r;
}

std::vector<MetricsRecord> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open metrics csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("metrics csv is empty: " + path);
    if (line + "\n" != metrics_csv_header()) throw Error("metrics csv has unexpected header: " + path);
    std::vector<MetricsRecord> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(metrics_from_csv_row(line));
    }
    return rows;
}

void write_svg_scatter(const std::string& path, const std::vector<ScatterSeries>& series,
                       const std::string& title) {
    double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
    bool first = true;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            if (first) {
                min_x = max_x = p[0];
                min_y = max_y = p[1];
                first = false;
            }
            min_x = std::min(min_x, p[0]);
            max_x = std::max(max_x, p[0]);
            min_y = std::min(min_y, p[1]);
            max_y = std::max(max_y, p[1]);
        }
    const double pad_x = 0.05 * std::max(1e-9, max_x - min_x);
    const double pad_y = 0.05 * std::max(1e-9, max_y - min_y);
    min_x -= pad_x;
    max_x += pad_x;
    min_y -= pad_y;
    max_y += pad_y;

    constexpr double W = 640.0, H = 640.0, margin = 40.0;
    auto sx = [&](double x) { return margin + (x - min_x) / (max_x - min_x) * (W - 2 * margin); };
    auto sy = [&](double y) { return H - margin - (y - min_y) / (max_y - min_y) * (H - 2 * margin); };

    std::ofstream out(path);
    if (!out) throw Error("cannot write svg: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"15\">" << title << "</text>\n";
    out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << W - 2 * margin
        << "\" height=\"" << H - 2 * margin << "\" fill=\"none\" stroke=\"#888\"/>\n";

    double legend_y = margin + 14.0;
    for (const auto& s : series) {
        out << "<g fill=\"" << s.color << "\" fill-opacity=\"0.55\">\n";
        for (const auto& p : s.points)
            out << "<circle cx=\"" << format_double(sx(p[0])) << "\" cy=\"" << format_double(sy(p[1]))
                << "\" r=\"" << s.radius << "\"/>\n";
        out << "</g>\n";
        if (!s.label.empty()) {
            out << "<circle cx=\"" << W - margin - 110 << "\" cy=\"" << legend_y - 4 << "\" r=\"4\" fill=\""
                << s.color << "\"/>\n";
            out << "<text x=\"" << W - margin - 100 << "\" y=\"" << legend_y
                << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
            legend_y += 18.0;
        }
    }
    out << "</svg>\n";
}

void write_points_csv(const std::string& path, const Tensor& points) {
    const auto& s = points.shape();
    if (s.size() != 2) throw Error("write_points_csv expects a 2-D tensor");
    std::ofstream out(path);
    if (!out) throw Error("cannot write csv: " + path);
    const double* p = points.data();
    for (int r = 0; r < s[0]; ++r) {
        for (int c = 0; c < s[1]; ++c) {
            if (c) out << ',';
            out << format_double(p[static_cast<int64_t>(r) * s[1] + c]);
        }
        out << '\n';
    }
}

}  // namespace began
