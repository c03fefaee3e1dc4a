#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "osdrl/distributions.hpp"
#include "osdrl/dp.hpp"

namespace osdrl {

/// Shortest decimal text that round-trips the double; stable across runs.
std::string format_number(double value);

/// Minimal CSV writer. Creates parent directories; throws on I/O failure.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& cell(double value);
    CsvWriter& cell(std::uint64_t value);
    CsvWriter& cell(const std::string& value);
    void end_row();

private:
    std::ofstream out_;
    bool first_in_row_ = true;
};

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Line chart with one polyline per series.
void write_line_chart(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                      const std::vector<Series>& series);

/// Bar chart of (bin_lo, bin_hi, mass) triples; several overlaid with transparency.
struct Histogram {
    std::string label;
    std::vector<double> edges;  ///< bins + 1
    std::vector<double> mass;   ///< bins
};

Histogram histogram(const AtomicDistribution& nu, double lo, double hi, std::size_t bins);
void write_histogram_chart(const std::filesystem::path& path, const std::string& title,
                           const std::vector<Histogram>& histograms);

/// Trace export: (iteration, entry_id, atom_or_gridpoint, weight) and
/// (iteration, dist_to_next, dist_to_reference).
void write_trace_entries(const std::filesystem::path& path, const IterationTrace<AtomicDistribution>& trace);
void write_trace_entries(const std::filesystem::path& path, const IterationTrace<CategoricalDistribution>& trace);

template <class Dist>
void write_trace_distances(const std::filesystem::path& path, const IterationTrace<Dist>& trace) {
    CsvWriter csv(path, {"iteration", "dist_to_next", "dist_to_reference"});
    for (std::size_t n = 0; n < trace.iterates.size(); ++n) {
        csv.cell(static_cast<std::uint64_t>(n));
        if (n < trace.dist_to_next.size()) csv.cell(trace.dist_to_next[n]); else csv.cell(std::string());
        if (n < trace.dist_to_reference.size()) csv.cell(trace.dist_to_reference[n]); else csv.cell(std::string());
        csv.end_row();
    }
}

}  // namespace osdrl
