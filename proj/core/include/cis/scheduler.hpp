#ifndef CIS_SCHEDULER_HPP
#define CIS_SCHEDULER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cis/model.hpp"

namespace cis {

struct SolverConfig {
    std::int64_t domain_max = std::int64_t(1) << 20;  // inclusive upper bound for starts/delays
    std::int64_t time_budget_ms = 10000;
    std::uint64_t seed = 0;  // reserved; the engine is deterministic
};

// Integer constraint system: minimize `objective` subject to linear
// (in)equalities over bounded variables.
struct ConstraintSystem {
    struct Bound {
        VarId var;
        std::int64_t lo = 0;
        std::int64_t hi = 0;
    };
    struct Con {
        LinExpr lhs;
        Rel rel = Rel::EQ;
        LinExpr rhs;
        std::string origin;  // human-readable source, for infeasibility reports
    };

    std::vector<Bound> variables;  // sorted by VarId
    std::vector<Con> constraints;
    LinExpr objective;
    VarId latency_var;

    const Bound* find(const VarId& v) const;
};

struct Schedule {
    enum class Proof { Optimal, FeasibleOnly };

    std::map<VarId, std::int64_t> assignment;
    std::int64_t latency = 0;
    Proof proof = Proof::Optimal;
};

// The 7-step compilation: one variable per operation start, per delay
// symbol, and per anchor referenced by constraints; anchor variables bound
// to their timing expressions; latency >= every operation end time;
// objective = latency.
ConstraintSystem formulate(const Model& model, const SolverConfig& config);

// Deterministic optimal solve: bounds propagation, binary search on the
// objective, then a lexicographic-minimum labeling pass at the optimum.
// Throws InfeasibleError (first constraint failing under propagation) or
// TimeoutError (budget gone with nothing feasible found); an exhausted
// budget with an incumbent yields proof=FeasibleOnly.
Schedule solve(const ConstraintSystem& system, const SolverConfig& config);

struct VerificationReport {
    struct Entry {
        std::string constraint;
        std::int64_t lhs = 0;
        std::int64_t rhs = 0;
        bool ok = false;
    };
    std::vector<Entry> entries;
    bool all_ok = true;
    std::int64_t implied_latency = 0;
};

// Trusted re-check: evaluates every custom constraint and anchor binding
// through the timing algebra, sharing no code with the solver's propagation.
VerificationReport verify_schedule(const Model& model,
                                   const std::map<VarId, std::int64_t>& assignment);

// Flat key-value report: one "<var> = <value>" line per variable in VarId
// order, then "latency = <n>" and "status = optimal|feasible".
std::string render_schedule(const Schedule& schedule);

}  // namespace cis

#endif
