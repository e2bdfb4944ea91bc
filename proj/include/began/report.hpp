#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "began/analysis.hpp"

namespace began {

/// One emitted metrics row. Loss fields at step 0 come from an evaluation
/// pass; at later steps they are the training-step values. Variance and
/// coverage always come from the step-seeded analysis streams.
struct MetricsRecord {
    int64_t step = 0;
    double loss_real = 0.0;
    double loss_gen = 0.0;
    double loss_constraint = 0.0;
    double k = 0.0;
    double convergence_measure = 0.0;
    double var_real = 0.0;
    double var_gen = 0.0;
    int modes_covered = 0;
    double hq_fraction = 0.0;

    /// Throws Error when any schema invariant fails (k outside [0,1],
    /// negative loss, coverage out of range).
    void validate() const;
};

std::string metrics_csv_header();
std::string to_csv_row(const MetricsRecord& r);  // includes trailing newline
MetricsRecord metrics_from_csv_row(const std::string& line);
std::vector<MetricsRecord> read_metrics_csv(const std::string& path);

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

// ---- plotting ---------------------------------------------------------------

struct ScatterSeries {
    std::vector<std::array<double, 2>> points;
    std::string color = "#1f77b4";
    double radius = 1.5;
    std::string label;
};

/// Minimal self-contained SVG scatter plot with an auto-fitted viewport.
void write_svg_scatter(const std::string& path, const std::vector<ScatterSeries>& series,
                       const std::string& title);

void write_points_csv(const std::string& path, const Tensor& points);

}  // namespace began
