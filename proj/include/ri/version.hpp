#pragma once

namespace ri {

// Component versions embedded in artifact files for provenance.  Bump a
// component whenever its output format or numerical behavior changes, so a
// stored artifact can always be matched to the code that produced it.
inline constexpr const char* kVersionLattice = "1.0.0";
inline constexpr const char* kVersionSoup = "1.0.0";
inline constexpr const char* kVersionStats = "1.0.0";
inline constexpr const char* kVersionTheta = "1.0.0";
inline constexpr const char* kVersionSolver = "1.0.0";
inline constexpr const char* kVersionCli = "1.0.0";

}  // namespace ri
