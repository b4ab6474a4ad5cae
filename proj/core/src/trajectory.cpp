#include "freqctl/trajectory.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace freqctl {

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int Trajectory::column(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == name) return static_cast<int>(c);
    return -1;
}

std::vector<double> Trajectory::series(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw std::out_of_range("no trajectory column '" + name + "'");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[static_cast<std::size_t>(c)]);
    return out;
}

void Trajectory::write_csv(std::ostream& out) const {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
        out << '\n';
    }
}

}  // namespace freqctl
