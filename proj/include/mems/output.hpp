#pragma once

// CSV and manifest writers. Numbers are written with 15 significant digits.

#include "mems/dynamics.hpp"
#include "mems/potential.hpp"
#include "mems/statics.hpp"

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace mems {

std::string format_number(double v);

/// x,eta,phi; rows ordered by eta index then x index.
void write_potential_csv(std::ostream& os, const Potential& phi, const Grid& grid);
/// x,z,psi in the physical (deformed) domain.
void write_physical_potential_csv(std::ostream& os, const std::vector<PhysicalSample>& samples);
/// x,u
void write_profile_csv(std::ostream& os, const Deflection& defl, const Grid& grid);
/// lambda,u0,branch,converged
void write_bifurcation_csv(std::ostream& os, const std::vector<BifurcationPoint>& points);
/// t,u0,min_u
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& samples);
/// t,x,u
void write_snapshots_csv(std::ostream& os, const std::vector<Snapshot>& snapshots, const Grid& grid);

/// Ordered flat `key = value` record.
class Manifest {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long value);
    void set(const std::string& key, int value) { set(key, static_cast<long>(value)); }

    void write(std::ostream& os) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

} // namespace mems
