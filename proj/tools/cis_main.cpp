// cis — one binary wiring the pipeline: check, schedule, emit, sim, bench,
// and an end-to-end run that self-verifies its trace. stdout carries the
// machine-readable reports; diagnostics go to stderr. Exit codes: 0 success,
// 1 user error, 2 infeasible/no schedule, 3 broken internal invariant.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cis/bench.hpp"
#include "cis/emitter.hpp"
#include "cis/error.hpp"
#include "cis/kernels.hpp"
#include "cis/machine.hpp"
#include "cis/parser.hpp"
#include "cis/scheduler.hpp"
#include "cis/simulator.hpp"
#include "cis/timing.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cis::Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cis::Error("cannot write " + path);
    out << text;
}

struct Options {
    std::string input;
    std::string machine_path;
    std::string mem_path;
    std::string out_path;
    std::string csv_path;
    cis::SolverConfig solver;
    int repeats = 10;
    std::string bench_what = "sweep";
};

cis::MachineConfig load_machine(const Options& opt) {
    if (opt.machine_path.empty()) return cis::MachineConfig::toy();
    return cis::parse_machine(read_file(opt.machine_path));
}

std::vector<std::int64_t> load_memory(const Options& opt, const cis::MachineConfig& mc) {
    if (opt.mem_path.empty()) return std::vector<std::int64_t>(mc.storage_words, 0);
    return cis::read_memory_file(opt.mem_path);
}

std::int64_t cycle_cap() {
    if (const char* cap = std::getenv("CIS_CYCLE_CAP")) return std::stoll(cap);
    return cis::kDefaultCycleCap;
}

cis::Schedule schedule_model(const cis::Model& model, const cis::SolverConfig& cfg) {
    cis::ConstraintSystem sys = cis::formulate(model, cfg);
    cis::Schedule sched = cis::solve(sys, cfg);
    cis::VerificationReport rep = cis::verify_schedule(model, sched.assignment);
    CIS_ASSERT(rep.all_ok, "scheduler produced an assignment its re-check rejects");
    return sched;
}

int cmd_check(const Options& opt) {
    cis::Model model = cis::parse_spec(read_file(opt.input));
    std::cout << "operations = " << model.operations.size() << "\n"
              << "constraints = " << model.constraints.size() << "\n";
    for (const auto& op : model.operations) {
        std::cout << "operation " << op.name << ": events=" << op.expr->num_events()
                  << " repeats=" << op.expr->num_repeats()
                  << " transits=" << op.expr->num_transits();
        if (op.binding)
            std::cout << " bound=" << op.binding->slot << ":" << op.binding->fsm << "@"
                      << op.binding->kind_text();
        std::cout << "\n";
    }
    std::cout << "check: OK\n";
    return 0;
}

int cmd_schedule(const Options& opt) {
    cis::Model model = cis::parse_spec(read_file(opt.input));
    cis::Schedule sched = schedule_model(model, opt.solver);
    std::cout << cis::render_schedule(sched);
    return 0;
}

int cmd_emit(const Options& opt) {
    cis::Model model = cis::parse_spec(read_file(opt.input));
    cis::Schedule sched = schedule_model(model, opt.solver);
    cis::Program prog = cis::synchronize(model, sched);
    std::string text = cis::emit_assembly(prog);
    if (opt.out_path.empty())
        std::cout << text;
    else
        write_file(opt.out_path, text);
    return 0;
}

int cmd_sim(const Options& opt) {
    cis::Program prog = cis::parse_assembly(read_file(opt.input));
    cis::MachineConfig mc = load_machine(opt);
    cis::Trace trace = cis::simulate(prog, mc, load_memory(opt, mc), cycle_cap());
    std::cout << "total_cycles = " << trace.total_cycles << "\n" << trace.text();
    if (!opt.out_path.empty()) cis::write_memory_file(opt.out_path, trace.final_memory);
    return 0;
}

int cmd_run(const Options& opt) {
    cis::Model model = cis::parse_spec(read_file(opt.input));
    cis::Schedule sched = schedule_model(model, opt.solver);
    cis::Program prog = cis::synchronize(model, sched);
    cis::MachineConfig mc = load_machine(opt);
    cis::Trace trace = cis::simulate(prog, mc, load_memory(opt, mc), cycle_cap());
    cis::TraceCheckReport rep = cis::check_trace(trace, model, sched);
    CIS_ASSERT(rep.ok, "trace does not realize the schedule: " + rep.detail);
    std::cout << "latency = " << sched.latency << "\n"
              << "status = " << (sched.proof == cis::Schedule::Proof::Optimal ? "optimal" : "feasible")
              << "\n"
              << "instructions = " << prog.instructions.size() << "\n"
              << "total_cycles = " << trace.total_cycles << "\n"
              << "anchors_checked = " << rep.anchors_checked << "\n"
              << "functional: OK\n";
    if (!opt.out_path.empty()) cis::write_memory_file(opt.out_path, trace.final_memory);
    return 0;
}

// The three sweep axes: each knob swept alone with the others at midrange.
std::vector<cis::ComplexityParams> sweep_axis(char axis, std::uint64_t seed) {
    std::vector<cis::ComplexityParams> grid;
    auto add = [&](std::int64_t n, std::int64_t m, std::int64_t c) {
        grid.push_back({n, m, c, seed});
    };
    switch (axis) {
        case 'N':
            for (std::int64_t n = 10; n <= 100; n += 10) add(n, 4, 32);
            break;
        case 'M':
            for (std::int64_t m = 1; m <= 8; ++m) add(50, m, 32);
            break;
        default:
            for (std::int64_t c = 4; c <= 64; c += 4) add(50, 4, c);
            break;
    }
    return grid;
}

int cmd_bench(const Options& opt) {
    std::ostream* csv_out = &std::cout;
    std::ofstream csv_file;
    if (!opt.csv_path.empty()) {
        csv_file.open(opt.csv_path, std::ios::binary);
        if (!csv_file) throw cis::Error("cannot write " + opt.csv_path);
        csv_out = &csv_file;
    }
    // Keep stdout machine-readable: when the CSV goes there, the fit
    // summaries move to stderr.
    std::ostream& report = opt.csv_path.empty() ? std::cerr : std::cout;

    if (opt.bench_what == "kernels") {
        cis::KernelTable table = cis::kernel_table(cis::kernel_corpus(), opt.solver);
        *csv_out << table.csv();
        return 0;
    }

    for (char axis : {'N', 'M', 'C'}) {
        cis::SweepResult res =
            cis::run_sweep(sweep_axis(axis, opt.solver.seed), opt.repeats, opt.solver);
        *csv_out << res.csv();
        // Median time per grid point: robust against one-off stragglers.
        std::vector<double> xs, ys;
        for (size_t i = 0; i < res.rows.size(); i += static_cast<size_t>(opt.repeats)) {
            std::vector<double> times;
            for (size_t j = i; j < i + static_cast<size_t>(opt.repeats) && j < res.rows.size(); ++j)
                times.push_back(res.rows[j].time_ms);
            std::sort(times.begin(), times.end());
            const auto& p = res.rows[i].params;
            xs.push_back(static_cast<double>(axis == 'N' ? p.n_ops
                                             : axis == 'M' ? p.m_operators
                                                           : p.c_constraints));
            ys.push_back(times[times.size() / 2]);
        }
        report << "axis " << axis << "\n" << cis::fit_curves(xs, ys).text();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"composable-instruction-set toolchain"};
    app.require_subcommand(1);
    Options opt;

    auto add_solver_flags = [&](CLI::App* cmd) {
        cmd->add_option("--solver-domain-max", opt.solver.domain_max,
                        "inclusive upper bound for schedule variables");
        cmd->add_option("--time-budget-ms", opt.solver.time_budget_ms, "solver time budget");
        cmd->add_option("--seed", opt.solver.seed, "generator seed");
    };

    CLI::App* check = app.add_subcommand("check", "parse and validate a model");
    check->add_option("input", opt.input, "model file")->required();

    CLI::App* schedule = app.add_subcommand("schedule", "solve for the optimal schedule");
    schedule->add_option("input", opt.input, "model file")->required();
    add_solver_flags(schedule);

    CLI::App* emit = app.add_subcommand("emit", "schedule and emit assembly");
    emit->add_option("input", opt.input, "model file")->required();
    emit->add_option("--out", opt.out_path, "assembly output path");
    add_solver_flags(emit);

    CLI::App* sim = app.add_subcommand("sim", "simulate an assembly program");
    sim->add_option("input", opt.input, "assembly file")->required();
    sim->add_option("--machine", opt.machine_path, "machine config file");
    sim->add_option("--mem", opt.mem_path, "initial memory image");
    sim->add_option("--out", opt.out_path, "final memory output path");

    CLI::App* bench = app.add_subcommand("bench", "run sweeps or the kernel table");
    bench->add_option("what", opt.bench_what, "sweep | kernels")
        ->check(CLI::IsMember({"sweep", "kernels"}));
    bench->add_option("--csv", opt.csv_path, "CSV output path");
    bench->add_option("--repeats", opt.repeats, "instances per grid point")
        ->check(CLI::PositiveNumber);
    add_solver_flags(bench);

    CLI::App* run = app.add_subcommand("run", "schedule, emit, simulate, and verify");
    run->add_option("input", opt.input, "model file")->required();
    run->add_option("--machine", opt.machine_path, "machine config file");
    run->add_option("--mem", opt.mem_path, "initial memory image");
    run->add_option("--out", opt.out_path, "final memory output path");
    add_solver_flags(run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*check) return cmd_check(opt);
        if (*schedule) return cmd_schedule(opt);
        if (*emit) return cmd_emit(opt);
        if (*sim) return cmd_sim(opt);
        if (*bench) return cmd_bench(opt);
        return cmd_run(opt);
    } catch (const cis::InfeasibleError& e) {
        std::cerr << "cis: " << e.what() << "\n";
        return 2;
    } catch (const cis::TimeoutError& e) {
        std::cerr << "cis: " << e.what() << "\n";
        return 2;
    } catch (const cis::InternalError& e) {
        std::cerr << "cis: internal error: " << e.what() << "\n";
        return 3;
    } catch (const cis::Error& e) {
        std::cerr << "cis: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "cis: internal error: " << e.what() << "\n";
        return 3;
    }
}
