#include "osdrl/output.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace osdrl {

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path);
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (const auto& h : header) cell(h);
    end_row();
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_number(value)); }

CsvWriter& CsvWriter::cell(std::uint64_t value) { return cell(std::to_string(value)); }

CsvWriter& CsvWriter::cell(const std::string& value) {
    if (!first_in_row_) out_ << ',';
    out_ << value;
    first_in_row_ = false;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    first_in_row_ = true;
    if (!out_) throw std::runtime_error("CSV write failed");
}

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 60.0;
constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x_lo, x_hi, y_lo, y_hi;

    double px(double x) const { return kMargin + (x - x_lo) / (x_hi - x_lo) * (kWidth - 2 * kMargin); }
    double py(double y) const { return kHeight - kMargin - (y - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin); }
};

void widen(double& lo, double& hi) {
    if (!(lo < hi)) {
        lo -= 0.5;
        hi += 0.5;
    }
}

void open_svg(std::ostringstream& svg, const std::string& title, const Frame& f, const std::string& x_label) {
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
        << "</text>\n";
    svg << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin << "\" y2=\""
        << kHeight - kMargin << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\"" << kHeight - kMargin
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 16 << "\" text-anchor=\"middle\">"
        << format_number(f.x_lo) << "</text>\n";
    svg << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - kMargin + 16 << "\" text-anchor=\"middle\">"
        << format_number(f.x_hi) << "</text>\n";
    svg << "<text x=\"" << kMargin - 6 << "\" y=\"" << kHeight - kMargin << "\" text-anchor=\"end\">"
        << format_number(f.y_lo) << "</text>\n";
    svg << "<text x=\"" << kMargin - 6 << "\" y=\"" << kMargin + 4 << "\" text-anchor=\"end\">" << format_number(f.y_hi)
        << "</text>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">" << escape(x_label)
        << "</text>\n";
}

void save(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
}

}  // namespace

void write_line_chart(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                      const std::vector<Series>& series) {
    Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& s : series) {
        for (double x : s.x) f.x_lo = std::min(f.x_lo, x), f.x_hi = std::max(f.x_hi, x);
        for (double y : s.y) {
            if (std::isfinite(y)) f.y_lo = std::min(f.y_lo, y), f.y_hi = std::max(f.y_hi, y);
        }
    }
    if (!std::isfinite(f.x_lo)) f = {0, 1, 0, 1};
    if (!std::isfinite(f.y_lo)) f.y_lo = 0, f.y_hi = 1;
    widen(f.x_lo, f.x_hi);
    widen(f.y_lo, f.y_hi);

    std::ostringstream svg;
    open_svg(svg, title, f, x_label);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* colour = kPalette[i % kPalette.size()];
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t j = 0; j < std::min(s.x.size(), s.y.size()); ++j) {
            if (!std::isfinite(s.y[j])) continue;
            svg << f.px(s.x[j]) << ',' << f.py(s.y[j]) << ' ';
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << kWidth - kMargin + 4 << "\" y=\"" << kMargin + 16 * static_cast<double>(i) << "\" fill=\""
            << colour << "\">" << escape(s.label) << "</text>\n";
    }
    svg << "</svg>\n";
    save(path, svg.str());
}

Histogram histogram(const AtomicDistribution& nu, double lo, double hi, std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("histogram: need at least one bin");
    widen(lo, hi);
    Histogram h;
    h.edges.resize(bins + 1);
    h.mass.assign(bins, 0.0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const double pos = (nu.atoms()[i] - lo) / width;
        auto b = static_cast<std::ptrdiff_t>(std::floor(pos));
        b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
        h.mass[static_cast<std::size_t>(b)] += nu.weights()[i];
    }
    return h;
}

void write_histogram_chart(const std::filesystem::path& path, const std::string& title,
                           const std::vector<Histogram>& histograms) {
    Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (const auto& h : histograms) {
        f.x_lo = std::min(f.x_lo, h.edges.front());
        f.x_hi = std::max(f.x_hi, h.edges.back());
        for (double m : h.mass) f.y_hi = std::max(f.y_hi, m);
    }
    if (!std::isfinite(f.x_lo)) f.x_lo = 0, f.x_hi = 1;
    widen(f.x_lo, f.x_hi);
    if (f.y_hi <= 0.0) f.y_hi = 1.0;

    std::ostringstream svg;
    open_svg(svg, title, f, "return");
    for (std::size_t i = 0; i < histograms.size(); ++i) {
        const auto& h = histograms[i];
        const char* colour = kPalette[i % kPalette.size()];
        for (std::size_t b = 0; b < h.mass.size(); ++b) {
            if (h.mass[b] <= 0.0) continue;
            const double x0 = f.px(h.edges[b]);
            const double x1 = f.px(h.edges[b + 1]);
            const double y = f.py(h.mass[b]);
            svg << "<rect x=\"" << x0 << "\" y=\"" << y << "\" width=\"" << std::max(1.0, x1 - x0) << "\" height=\""
                << f.py(0.0) - y << "\" fill=\"" << colour << "\" fill-opacity=\"0.5\"/>\n";
        }
        svg << "<text x=\"" << kWidth - kMargin + 4 << "\" y=\"" << kMargin + 16 * static_cast<double>(i) << "\" fill=\""
            << colour << "\">" << escape(h.label) << "</text>\n";
    }
    svg << "</svg>\n";
    save(path, svg.str());
}

void write_trace_entries(const std::filesystem::path& path, const IterationTrace<AtomicDistribution>& trace) {
    CsvWriter csv(path, {"iteration", "entry_id", "atom_or_gridpoint", "weight"});
    for (std::size_t n = 0; n < trace.iterates.size(); ++n) {
        const auto& mu = trace.iterates[n];
        for (std::size_t e = 0; e < mu.size(); ++e) {
            for (std::size_t i = 0; i < mu[e].size(); ++i) {
                csv.cell(static_cast<std::uint64_t>(n)).cell(static_cast<std::uint64_t>(e));
                csv.cell(mu[e].atoms()[i]).cell(mu[e].weights()[i]);
                csv.end_row();
            }
        }
    }
}

void write_trace_entries(const std::filesystem::path& path, const IterationTrace<CategoricalDistribution>& trace) {
    CsvWriter csv(path, {"iteration", "entry_id", "atom_or_gridpoint", "weight"});
    for (std::size_t n = 0; n < trace.iterates.size(); ++n) {
        const auto& eta = trace.iterates[n];
        for (std::size_t e = 0; e < eta.size(); ++e) {
            for (std::size_t k = 0; k < eta[e].size(); ++k) {
                csv.cell(static_cast<std::uint64_t>(n)).cell(static_cast<std::uint64_t>(e));
                csv.cell(eta[e].grid()[k]).cell(eta[e].probs()[k]);
                csv.end_row();
            }
        }
    }
}

}  // namespace osdrl
