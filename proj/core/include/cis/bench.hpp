#ifndef CIS_BENCH_HPP
#define CIS_BENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cis/kernels.hpp"
#include "cis/model.hpp"
#include "cis/scheduler.hpp"

namespace cis {

// Size knobs of a generated application: N operations, M transformation
// operators per operation, C custom constraints.
struct ComplexityParams {
    std::int64_t n_ops = 1;
    std::int64_t m_operators = 0;
    std::int64_t c_constraints = 0;
    std::uint64_t seed = 0;
};

// Deterministic in seed. Constraints are planted around a sampled witness
// assignment, so every generated model is satisfiable by construction.
Model gen_random_app(const ComplexityParams& params);

struct SweepRow {
    ComplexityParams params;
    int instance = 0;
    double time_ms = 0.0;
    std::int64_t latency = -1;  // -1 when no assignment was obtained
    std::string status;         // optimal | feasible | infeasible | timeout
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string csv() const;  // header: N,M,C,seed,instance,time_ms,latency,status
};

// Generates `repeats` instances per grid point (seeds seed+0..repeats-1),
// schedules each, and records wall-clock formulate+solve time.
SweepResult run_sweep(const std::vector<ComplexityParams>& grid, int repeats = 10,
                      const SolverConfig& solver = SolverConfig{});

struct CurveFit {
    double a = 0.0;
    double b = 0.0;
    double mse = 0.0;
};

struct FitReport {
    CurveFit linear;       // y = a*x + b
    CurveFit quadratic;    // y = a*x^2 + b
    CurveFit exponential;  // y = a*e^(b*x), fitted log-linear on y+eps
    std::string winner;    // family with minimal MSE; ties prefer the order above
    bool tie = false;
    std::string text() const;  // rows: family,mse,params,winner
};

FitReport fit_curves(const std::vector<double>& xs, const std::vector<double>& ys);

struct KernelRow {
    std::string kernel;
    std::string size_params;
    std::int64_t instr_count = 0;
    std::int64_t latency = 0;  // simulated end-to-end cycles
    std::int64_t ideal = 0;
    double overhead = 0.0;
    bool functional_ok = false;
    std::string error;  // nonempty when a pipeline stage failed
};

struct KernelTable {
    std::vector<KernelRow> rows;
    std::string csv() const;  // kernel,size_params,instr_count,latency,ideal,overhead_pct,functional_ok
};

// schedule -> emit -> simulate each kernel and compare against its reference.
KernelTable kernel_table(const std::vector<KernelSpec>& corpus,
                         const SolverConfig& solver = SolverConfig{});

}  // namespace cis

#endif
