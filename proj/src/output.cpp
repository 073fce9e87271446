#include "mems/output.hpp"

#include <cmath>
#include <cstdio>

namespace mems {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

void write_potential_csv(std::ostream& os, const Potential& phi, const Grid& grid) {
    os << "x,eta,phi\n";
    for (int j = 0; j <= grid.neta(); ++j) {
        for (int i = 0; i <= grid.nx(); ++i) {
            os << format_number(grid.x(i)) << ',' << format_number(grid.eta(j)) << ',' << format_number(phi(i, j))
               << '\n';
        }
    }
}

void write_physical_potential_csv(std::ostream& os, const std::vector<PhysicalSample>& samples) {
    os << "x,z,psi\n";
    for (const auto& s : samples) {
        os << format_number(s.x) << ',' << format_number(s.z) << ',' << format_number(s.psi) << '\n';
    }
}

void write_profile_csv(std::ostream& os, const Deflection& defl, const Grid& grid) {
    os << "x,u\n";
    for (int i = 0; i <= grid.nx(); ++i) {
        os << format_number(grid.x(i)) << ',' << format_number(defl.u()[static_cast<std::size_t>(i)]) << '\n';
    }
}

void write_bifurcation_csv(std::ostream& os, const std::vector<BifurcationPoint>& points) {
    os << "lambda,u0,branch,converged\n";
    for (const auto& p : points) {
        os << format_number(p.lambda) << ',' << format_number(p.u0) << ','
           << (p.branch == BranchTag::Upper ? "upper" : "lower") << ',' << (p.converged ? 1 : 0) << '\n';
    }
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& samples) {
    os << "t,u0,min_u\n";
    for (const auto& s : samples) {
        os << format_number(s.t) << ',' << format_number(s.u0) << ',' << format_number(s.min_u) << '\n';
    }
}

void write_snapshots_csv(std::ostream& os, const std::vector<Snapshot>& snapshots, const Grid& grid) {
    os << "t,x,u\n";
    for (const auto& s : snapshots) {
        for (int i = 0; i <= grid.nx(); ++i) {
            os << format_number(s.t) << ',' << format_number(grid.x(i)) << ','
               << format_number(s.u[static_cast<std::size_t>(i)]) << '\n';
        }
    }
}

void Manifest::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void Manifest::set(const std::string& key, double value) { set(key, format_number(value)); }

void Manifest::set(const std::string& key, long value) { set(key, std::to_string(value)); }

void Manifest::write(std::ostream& os) const {
    for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
}

} // namespace mems
