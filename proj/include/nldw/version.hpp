#pragma once

namespace nldw {

// Per-module version strings, recorded in run manifests.
inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr const char* kDampingVersion = "1.0.0";
inline constexpr const char* kHeatKernelVersion = "1.0.0";
inline constexpr const char* kSolverVersion = "1.0.0";
inline constexpr const char* kLifespanVersion = "1.0.0";
inline constexpr const char* kIdentityVersion = "1.0.0";
inline constexpr const char* kOdeLabVersion = "1.0.0";
inline constexpr const char* kCliVersion = "1.0.0";

}  // namespace nldw
