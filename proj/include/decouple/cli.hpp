#pragma once

#include <iosfwd>
#include <string>

#include "decouple/studies.hpp"

namespace decouple::cli {

/// Exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // solver failure, failed rate verdict or property check
inline constexpr int kExitUsage = 2;    // bad flags or configuration

struct RunConfig {
    StudyConfig study{};
    std::string output = ".";
    bool vtk = false;
    bool corrupt_mesh = false;  // hidden negative control for `check`
};

/// Parses `key = value` lines ('#' starts a comment, optional [section]
/// headers are ignored, values may be quoted).
[[nodiscard]] std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace decouple::cli
