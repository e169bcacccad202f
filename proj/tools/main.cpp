#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mla/bench.hpp"
#include "mla/discounted.hpp"
#include "mla/game_io.hpp"
#include "mla/longrun.hpp"
#include "mla/models.hpp"

namespace {

using namespace mla;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNoConvergence = 3;

std::map<std::string, std::string> parse_params(const std::vector<std::string>& kvs) {
    std::map<std::string, std::string> out;
    for (const auto& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParamError("--param expects key=value, got '" + kv + "'");
        out[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return out;
}

void write_report(const std::string& path, const std::vector<std::string>& lines) {
    if (path.empty()) {
        for (const auto& l : lines) std::cout << l << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write report file '" + path + "'");
    for (const auto& l : lines) out << l << '\n';
}

struct SolveOptions {
    std::string in_path, objective = "discounted", engine = "mla", report_path, dump_path;
    DiscountedConfig dcfg;
    LongRunConfig lcfg;
};

int run_solve(const SolveOptions& opt) {
    GameGraph g = load_game(opt.in_path);
    std::vector<std::string> lines;
    int exit_code = kExitOk;
    if (opt.objective == "discounted") {
        if (opt.engine == "vi") {
            const auto t0 = std::chrono::steady_clock::now();
            std::string status = "ok";
            ValueIterationResult vi;
            try {
                vi = value_iteration_discounted(g, opt.dcfg.beta, opt.dcfg.eps_float,
                                                opt.dcfg.max_global_sweeps);
            } catch (const NoConvergenceError& e) {
                status = "no_convergence";
                vi.residual = e.residual;
                vi.sweeps = e.sweeps;
                exit_code = kExitNoConvergence;
            }
            const double ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
            lines.push_back(vi_report_emit(g, vi, opt.dcfg.beta, ms, status));
        } else {
            SolveReport rep = mla_discounted(g, opt.dcfg);
            if (!opt.dump_path.empty()) {
                std::ofstream dump(opt.dump_path);
                dump << rep.partition.dump(&rep.lower, &rep.upper);
                rep.regions_dump = opt.dump_path;
            }
            if (rep.status != "ok") exit_code = kExitNoConvergence;
            lines.push_back(solve_report_emit(rep));
        }
    } else if (opt.objective == "average") {
        if (g.is_mdp()) {
            MdpLongRunResult res = solve_mdp_longrun(g, opt.lcfg);
            if (res.report.status != "ok") exit_code = kExitNoConvergence;
            lines.push_back(longrun_report_emit(res.report));
        } else {
            UniformValueCheck uv = check_uniform_value(g);
            if (!uv.uniform) {
                std::cerr << "error: two-player game without a certified uniform value; "
                             "the long-run engine requires one\n";
                return kExitValidation;
            }
            LongRunReport rep = mla_longrun(g, opt.lcfg);
            if (rep.status != "ok") exit_code = kExitNoConvergence;
            lines.push_back(longrun_report_emit(rep));
        }
    } else {
        throw ConfigError("unknown objective '" + opt.objective + "'");
    }
    write_report(opt.report_path, lines);
    return exit_code;
}

int run_check(const std::string& in_path, const std::string& what) {
    std::ifstream in(in_path, std::ios::binary);
    if (!in) throw Error("cannot open game file '" + in_path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (what == "validate") {
        try {
            parse_game(text);
        } catch (const ValidationError& e) {
            std::cout << e.result.to_string();
            return kExitValidation;
        }
        std::cout << "ok\n";
        return kExitOk;
    }
    GameGraph g = parse_game(text);
    if (what == "uniform-value") {
        UniformValueCheck uv = check_uniform_value(g);
        if (uv.uniform) {
            std::cout << "uniform-value: yes (witness state " << *uv.witness << ")\n";
        } else {
            std::cout << "uniform-value: not certified\n";
        }
        return kExitOk;
    }
    if (what == "mec") {
        auto mecs = mec_decomposition(g);
        std::cout << mecs.size() << " maximal end components\n";
        for (std::size_t i = 0; i < mecs.size(); ++i) {
            std::cout << i << ": size " << mecs[i].states.size() << '\n';
        }
        return kExitOk;
    }
    throw ConfigError("unknown check '" + what + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver for turn-based stochastic games with discounted and long-run average "
                 "objectives, with value-based partition abstraction"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate a benchmark model file");
    std::string gen_model, gen_out;
    std::vector<std::string> gen_params;
    std::uint64_t gen_seed = 0;
    gen->add_option("--model", gen_model, "planning | inventory | machine | network")->required();
    gen->add_option("--param", gen_params, "model parameter key=value (repeatable)");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output game file")->required();

    // solve
    auto* solve = app.add_subcommand("solve", "solve a game file and write a report");
    SolveOptions sopt;
    solve->add_option("input", sopt.in_path, "game file")->required();
    solve->add_option("--objective", sopt.objective, "discounted | average");
    solve->add_option("--engine", sopt.engine, "vi | mla");
    solve->add_option("--beta", sopt.dcfg.beta, "discount factor");
    solve->add_option("--eps-abs", sopt.dcfg.eps_abs, "bound gap target");
    solve->add_option("--eps-float", sopt.dcfg.eps_float, "iteration stop tolerance");
    solve->add_option("--k", sopt.lcfg.k, "steps per divergence probe (average)");
    solve->add_option("--ratio", sopt.lcfg.ratio, "refinement share (average)");
    solve->add_option("--init-depth", sopt.dcfg.initial_depth, "initial partition depth");
    solve->add_option("--max-rounds", sopt.dcfg.max_outer_rounds, "refinement round limit");
    solve->add_option("--report", sopt.report_path, "report file (JSON lines; default stdout)");
    solve->add_option("--dump-regions", sopt.dump_path, "write the per-region bounds dump here");

    // bench
    auto* bench = app.add_subcommand("bench", "run vi and mla on one model and cross-check");
    std::string bench_model, bench_report, bench_engines = "vi,mla";
    std::vector<std::string> bench_params;
    std::uint64_t bench_seed = 0;
    DiscountedConfig bench_cfg;
    bench->add_option("--model", bench_model, "model name")->required();
    bench->add_option("--param", bench_params, "model parameter key=value (repeatable)");
    bench->add_option("--seed", bench_seed, "generator seed");
    bench->add_option("--engines", bench_engines, "engine list (informational; both always run)");
    bench->add_option("--beta", bench_cfg.beta, "discount factor");
    bench->add_option("--eps-abs", bench_cfg.eps_abs, "bound gap target");
    bench->add_option("--eps-float", bench_cfg.eps_float, "iteration stop tolerance");
    bench->add_option("--init-depth", bench_cfg.initial_depth, "initial partition depth");
    bench->add_option("--report", bench_report, "report file (JSON lines; default stdout)");

    // check
    auto* check = app.add_subcommand("check", "structural checks on a game file");
    std::string check_in, check_what = "validate";
    check->add_option("input", check_in, "game file")->required();
    check->add_option("--what", check_what, "validate | uniform-value | mec");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            GameGraph g = generate_model(gen_model, parse_params(gen_params), gen_seed);
            save_game(g, gen_out);
            std::cout << "wrote " << gen_out << " (" << g.num_states() << " states, "
                      << g.num_transitions() << " transitions)\n";
            return kExitOk;
        }
        if (solve->parsed()) {
            sopt.lcfg.eps_abs = sopt.dcfg.eps_abs;
            sopt.lcfg.initial_depth = sopt.dcfg.initial_depth;
            sopt.lcfg.max_bisection_steps = std::max(sopt.dcfg.max_outer_rounds, 64);
            return run_solve(sopt);
        }
        if (bench->parsed()) {
            GameGraph g = generate_model(bench_model, parse_params(bench_params), bench_seed);
            BenchResult res = bench_compare(g, bench_cfg);
            write_report(bench_report, res.rows);
            return kExitOk;
        }
        if (check->parsed()) {
            return run_check(check_in, check_what);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what();
        return kExitValidation;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NoConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoConvergence;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
