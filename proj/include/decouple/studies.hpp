#pragma once

#include <string>

#include "decouple/verification.hpp"

namespace decouple {

enum class Problem { poisson, stokes, biharmonic, biharmonic_eps, hhj, triharmonic };
enum class Geometry { square, lshape };

[[nodiscard]] const char* to_string(Problem p) noexcept;
[[nodiscard]] const char* to_string(Geometry g) noexcept;
/// Throw InvalidArgument on unknown names.
[[nodiscard]] Problem parse_problem(const std::string& s);
[[nodiscard]] Geometry parse_geometry(const std::string& s);

struct StudyConfig {
    Problem problem = Problem::biharmonic;
    Geometry geometry = Geometry::square;
    int n = 4;
    int levels = 4;
    PipelineOptions pipeline{};  // scalar_order doubles as the Poisson order
    double epsilon = 1.0;
    bool gap = false;
    int jobs = 1;
};

/// Checks the config against solver and case preconditions.
void validate(const StudyConfig& cfg);

[[nodiscard]] Mesh base_mesh(Geometry g, int n);

/// The manufactured case used for a problem.
[[nodiscard]] ManufacturedCase case_for(const StudyConfig& cfg);

/// Solves one level and fills the named errors (and gaps when requested).
void run_level(const StudyConfig& cfg, const ManufacturedCase& mcase, MeshPtr mesh, LevelRecord& rec);

/// Default rate expectations for a configuration.
[[nodiscard]] std::map<std::string, RateExpectation> default_expectations(const StudyConfig& cfg);

[[nodiscard]] ConvergenceReport run_study(const StudyConfig& cfg);

}  // namespace decouple
