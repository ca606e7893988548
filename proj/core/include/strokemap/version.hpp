#pragma once

namespace strokemap {

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr int kStrokeFormatVersion = 1;      // stroke / mapped-stroke JSON
inline constexpr int kTrajectoryFormatVersion = 1;  // trajectory / recovery JSON
inline constexpr int kReportFormatVersion = 1;      // benchmark + summary output

}  // namespace strokemap
