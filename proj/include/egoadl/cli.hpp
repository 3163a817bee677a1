#pragma once

#include <string>

namespace egoadl::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr unsigned long long kDefaultSeed = 42;

/// Exit codes: 0 success, 1 completed with validation errors, 2 fatal error
/// or bad usage.
int run(int argc, char** argv);

}  // namespace egoadl::cli
