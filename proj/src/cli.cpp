#include "decouple/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "decouple/error.hpp"
#include "decouple/io.hpp"

namespace decouple::cli {

namespace {

using io::json;

struct Flags {
    std::string problem = "biharmonic";
    std::string geometry = "square";
    int n = 4;
    int levels = 4;
    int order = 2;
    std::string pair = "2,1";
    double epsilon = 1.0;
    double tol = 1e-10;
    int max_iterations = 20000;
    std::string output = ".";
    std::string config;
    bool vtk = false;
    bool gap = false;
    bool no_singular_check = false;
    int jobs = 1;
    bool corrupt_mesh = false;
};

void add_common(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config, "flat key = value config file; flags take precedence");
    app.add_option("--problem", f.problem, "poisson | stokes | biharmonic | biharmonic-eps | hhj | triharmonic");
    app.add_option("--geometry", f.geometry, "square | lshape");
    app.add_option("--n", f.n, "base resolution (cells per unit length)");
    app.add_option("--levels", f.levels, "number of uniformly refined levels");
    app.add_option("--order", f.order, "order of the scalar spaces (Poisson order, V_h)");
    app.add_option("--pair", f.pair, "velocity,pressure orders, e.g. 2,1 (Taylor-Hood) or 1,1");
    app.add_option("--epsilon", f.epsilon, "perturbation parameter for biharmonic-eps");
    app.add_option("--tol", f.tol, "relative solver tolerance (env DECOUPLE_FEM_TOL)");
    app.add_option("--max-iterations", f.max_iterations, "iteration budget per linear solve");
    app.add_option("--output", f.output, "output directory");
    app.add_flag("--vtk", f.vtk, "also write a legacy VTK file");
    app.add_flag("--gap", f.gap, "add superconvergence gap rows to a study");
    app.add_flag("--no-singular-check", f.no_singular_check, "skip the kernel probe after saddle solves");
    app.add_option("--jobs", f.jobs, "levels solved concurrently in a study");
    app.add_flag("--corrupt-mesh", f.corrupt_mesh)->group("");
}

/// Applies config-file values to options not given on the command line.
void apply_config(CLI::App& app, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    for (const auto& [key, value] : parse_config_text(ss.str())) {
        CLI::Option* opt = nullptr;
        try {
            opt = app.get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw InvalidArgument("unknown config key '" + key + "'");
        }
        if (key == "config") throw InvalidArgument("config files cannot include other config files");
        if (opt->count() > 0) continue;
        opt->add_result(value);
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw InvalidArgument("config key '" + key + "': " + e.what());
        }
    }
}

std::pair<int, int> parse_pair(const std::string& s) {
    std::stringstream ss(s);
    int v = 0, p = 0;
    char comma = 0;
    if (!(ss >> v >> comma >> p) || comma != ',' || !ss.eof()) {
        throw InvalidArgument("--pair expects 'velocity,pressure', got '" + s + "'");
    }
    return {v, p};
}

RunConfig to_run_config(const Flags& f, bool tol_given) {
    RunConfig rc;
    auto& s = rc.study;
    s.problem = parse_problem(f.problem);
    s.geometry = parse_geometry(f.geometry);
    s.n = f.n;
    s.levels = f.levels;
    s.pipeline.scalar_order = f.order;
    std::tie(s.pipeline.velocity_order, s.pipeline.pressure_order) = parse_pair(f.pair);
    s.epsilon = f.epsilon;
    s.pipeline.solver.tol = f.tol;
    if (!tol_given) {
        if (const char* env = std::getenv("DECOUPLE_FEM_TOL")) {
            try {
                std::size_t used = 0;
                s.pipeline.solver.tol = std::stod(env, &used);
                if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw InvalidArgument(std::string("DECOUPLE_FEM_TOL is not a number: '") + env + "'");
            }
        }
    }
    s.pipeline.solver.max_iterations = f.max_iterations;
    s.pipeline.check_singular = !f.no_singular_check;
    s.gap = f.gap;
    s.jobs = f.jobs;
    rc.output = f.output;
    rc.vtk = f.vtk;
    rc.corrupt_mesh = f.corrupt_mesh;
    validate(s);
    return rc;
}

json error_json(const std::string& code, const std::string& message) {
    return {{"error", {{"code", code}, {"message", message}}}};
}

std::filesystem::path ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("io", "cannot create output directory '" + dir + "': " + ec.message());
    return dir;
}

json config_json(const RunConfig& rc) {
    const auto& s = rc.study;
    return {{"problem", to_string(s.problem)},
            {"geometry", to_string(s.geometry)},
            {"n", s.n},
            {"levels", s.levels},
            {"order", s.pipeline.scalar_order},
            {"pair", {s.pipeline.velocity_order, s.pipeline.pressure_order}},
            {"epsilon", s.epsilon},
            {"tol", s.pipeline.solver.tol}};
}

int cmd_solve(const RunConfig& rc, std::ostream& out) {
    const auto& s = rc.study;
    auto mesh = std::make_shared<const Mesh>(base_mesh(s.geometry, s.n));
    const auto mc = case_for(s);
    const auto& o = s.pipeline;

    DecoupledSolution sol;
    switch (s.problem) {
        case Problem::poisson: {
            auto v = build_space(mesh, o.scalar_order, ValueShape::scalar);
            auto p = solve_poisson_system(v, assemble_load(*v, mc.load), PoissonForm::grad, o.solver);
            sol.stages.push_back(p.info);
            sol.fields.emplace("u", std::move(p.u));
            break;
        }
        case Problem::stokes: {
            StokesOptions so;
            so.velocity_order = o.velocity_order;
            so.pressure_order = o.pressure_order;
            so.solver = o.solver;
            so.check_singular = o.check_singular;
            auto st = solve_stokes(mesh, mc.load, so);
            sol.stages.push_back(st.info);
            sol.fields.emplace("phi", std::move(st.velocity));
            sol.fields.emplace("p", std::move(st.pressure));
            break;
        }
        case Problem::biharmonic: sol = solve_biharmonic_decoupled(mesh, mc.load, o); break;
        case Problem::biharmonic_eps: sol = solve_biharmonic_perturbed(mesh, mc.load, s.epsilon, o); break;
        case Problem::hhj: sol = solve_hhj_decoupled(mesh, mc.load, o); break;
        case Problem::triharmonic: sol = solve_triharmonic_decoupled(mesh, mc.load, o); break;
    }

    json errors = json::object();
    for (const auto& [name, jet] : mc.exact) {
        if (!sol.has(name)) continue;
        errors["L2(" + name + ")"] = error_norm(sol.field(name), jet, Norm::l2);
        if (jet.gradient.eval) errors["H1(" + name + ")"] = error_norm(sol.field(name), jet, Norm::h1_semi);
    }

    const auto dir = ensure_dir(rc.output);
    json doc = config_json(rc);
    doc["manufactured_case"] = mc.id;
    doc["errors"] = errors;
    doc["solution"] = io::to_json(sol);
    io::write_file((dir / "solution.json").string(), doc.dump(2) + "\n");
    if (rc.vtk) {
        std::ostringstream vtk;
        std::vector<std::pair<std::string, const FEFunction*>> fields;
        for (const auto& [name, f] : sol.fields) {
            if (&f.space().mesh() == mesh.get()) fields.emplace_back(name, &f);
        }
        // VTK names cannot contain '/'.
        for (auto& [name, _] : fields) {
            for (auto& ch : name) if (ch == '/') ch = '_';
        }
        io::write_vtk(vtk, *mesh, fields);
        io::write_file((dir / "solution.vtk").string(), vtk.str());
    }

    std::size_t dofs = 0;
    for (const auto& st : sol.stages) dofs += st.n_dofs;
    out << "solve " << to_string(s.problem) << " " << to_string(s.geometry) << " n=" << s.n << " dofs=" << dofs
        << " iterations=" << sol.total_iterations() << " max_residual=" << sol.max_relative_residual() << " stages:";
    for (const auto& st : sol.stages) out << ' ' << st.name << '(' << st.iterations << ", " << st.relative_residual << ')';
    out << '\n';
    return kExitOk;
}

int cmd_study(const RunConfig& rc, std::ostream& out) {
    const auto report = run_study(rc.study);
    const auto dir = ensure_dir(rc.output);
    std::ostringstream csv;
    io::write_report_csv(csv, report);
    io::write_file((dir / "report.csv").string(), csv.str());
    json doc = io::to_json(report);
    doc["config"] = config_json(rc);
    io::write_file((dir / "report.json").string(), doc.dump(2) + "\n");

    out << "study " << report.problem << " levels=" << report.levels.size() << '\n';
    for (const auto& [name, rate] : report.rates) {
        out << "  rate " << name << " = " << rate;
        auto v = report.verdicts.find(name);
        if (v != report.verdicts.end()) out << (v->second ? "  [pass]" : "  [FAIL]");
        out << '\n';
    }
    for (const auto& [name, ok] : report.verdicts) {
        if (report.rates.count(name) == 0) out << "  check " << name << (ok ? "  [pass]" : "  [FAIL]") << '\n';
    }
    for (const auto& n : report.notes) out << "  note: " << n << '\n';
    out << (report.passed() ? "PASS" : "FAIL") << '\n';
    return report.passed() ? kExitOk : kExitFailure;
}

Mesh corrupt(const Mesh& m) {
    auto cells = m.cells();
    std::swap(cells[0][1], cells[0][2]);
    return Mesh::from_cells(m.vertices(), std::move(cells), m.level());
}

int cmd_check(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const auto& s = rc.study;
    Mesh base = base_mesh(s.geometry, s.n);
    if (rc.corrupt_mesh) base = corrupt(base);

    CheckReport all;
    const auto mc = check_invariants(base);
    all.items.push_back({"mesh_invariants", mc.ok, 0.0, 0.0, mc.ok ? "all invariants hold" : mc.failed_invariant + ": " + mc.detail});
    if (mc.ok) {
        auto mesh = std::make_shared<const Mesh>(base);
        const auto ex = exactness_check(mesh, s.pipeline.scalar_order);
        all.items.insert(all.items.end(), ex.items.begin(), ex.items.end());
        for (auto [zp, zw, tag] : {std::tuple{false, false, ""}, std::tuple{true, false, "_p0"}, std::tuple{false, true, "_w0"}}) {
            auto h = helmholtz_recompose_check(mesh, s.pipeline.scalar_order, 2, zp, zw);
            for (auto& i : h.items) {
                i.name += tag;
                all.items.push_back(i);
            }
        }
        // Inf-sup of the configured pair over three levels.
        std::vector<double> betas;
        MeshPtr m = mesh;
        for (int l = 0; l < 3; ++l) {
            const auto est = estimate_infsup(m, s.pipeline.velocity_order, s.pipeline.pressure_order);
            betas.push_back(est.beta);
            all.items.push_back({"infsup_level" + std::to_string(l), est.beta > 0.0 && est.kernel_dim == 1, est.beta, 0.0,
                                 "beta over mean-zero pressures; kernel dim " + std::to_string(est.kernel_dim)});
            if (l < 2) m = std::make_shared<const Mesh>(refine_uniform(*m));
        }
        const double lo = *std::min_element(betas.begin(), betas.end());
        const double hi = *std::max_element(betas.begin(), betas.end());
        const double variation = hi > 0.0 ? (hi - lo) / hi : 1.0;
        all.items.push_back({"infsup_variation", variation < 0.25, variation, 0.25, "(max - min) / max over 3 levels"});

        // Negative control: the unstable P1-P1 pair must be flagged by the same estimator.
        std::vector<InfSupEstimate> control;
        m = mesh;
        for (int l = 0; l < 3; ++l) {
            control.push_back(estimate_infsup(m, 1, 1));
            if (l < 2) m = std::make_shared<const Mesh>(refine_uniform(*m));
        }
        const double decay = control.front().beta_quotient > 0.0 ? control.back().beta_quotient / control.front().beta_quotient : 0.0;
        const bool spurious = control.back().kernel_dim > 1;
        all.items.push_back({"infsup_negative_control", decay < 0.6 && spurious, decay, 0.6,
                             "P1-P1: beta on the spurious-mode quotient shrinks by this factor over 3 levels; " +
                                 std::to_string(control.back().kernel_dim) + " pressure modes (constants included) with zero inf-sup"});
    }

    json doc = config_json(rc);
    doc["check"] = io::to_json(all);
    const auto dir = ensure_dir(rc.output);
    io::write_file((dir / "check.json").string(), doc.dump(2) + "\n");
    for (const auto& i : all.items) {
        out << (i.passed ? "  pass " : "  FAIL ") << i.name << " value=" << i.value << "  " << i.detail << '\n';
    }
    if (const auto* f = all.first_failure()) {
        std::string code = f->name;
        if (f->name == "mesh_invariants") code = "invalid_mesh:" + mc.failed_invariant;
        err << error_json(code, "check failed: " + f->name + " (" + f->detail + ")").dump() << '\n';
        out << "FAIL\n";
        return kExitFailure;
    }
    out << "PASS\n";
    return kExitOk;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        for (auto& ch : key) if (ch == '_') ch = '-';
        if (key.empty()) throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Decoupled finite element solvers for high-order elliptic problems"};
    app.require_subcommand(1);
    Flags solve_f, study_f, check_f;
    auto* solve = app.add_subcommand("solve", "single solve; writes solution.json (and solution.vtk)");
    auto* study = app.add_subcommand("study", "convergence study; writes report.csv and report.json");
    auto* check = app.add_subcommand("check", "discrete-complex, Helmholtz and inf-sup property checks");
    add_common(*solve, solve_f);
    add_common(*study, study_f);
    add_common(*check, check_f);

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return kExitOk;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            throw InvalidArgument(e.what());
        }
        CLI::App* sub = solve->parsed() ? solve : (study->parsed() ? study : check);
        Flags& f = solve->parsed() ? solve_f : (study->parsed() ? study_f : check_f);
        if (!f.config.empty()) apply_config(*sub, f.config);
        const bool tol_given = sub->get_option("--tol")->count() > 0;
        const RunConfig rc = to_run_config(f, tol_given);
        if (sub == solve) return cmd_solve(rc, out);
        if (sub == study) return cmd_study(rc, out);
        return cmd_check(rc, out, err);
    } catch (const InvalidArgument& e) {
        err << error_json("usage", e.what()).dump() << '\n';
        return kExitUsage;
    } catch (const ShapeMismatch& e) {
        err << error_json("usage", e.what()).dump() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << error_json(e.code(), e.what()).dump() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << error_json("internal", e.what()).dump() << '\n';
        return kExitFailure;
    }
}

}  // namespace decouple::cli
