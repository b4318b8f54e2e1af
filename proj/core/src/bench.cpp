#include "cis/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "cis/emitter.hpp"
#include "cis/error.hpp"
#include "cis/simulator.hpp"
#include "cis/timing.hpp"

namespace cis {
namespace {

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

Model gen_random_app(const ComplexityParams& params) {
    if (params.n_ops < 1 || params.m_operators < 0 || params.c_constraints < 0)
        throw ValidationError("complexity parameters out of range (need N>=1, M>=0, C>=0)");

    std::mt19937_64 rng(params.seed);
    auto rint = [&](std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    };

    Model model;
    std::map<VarId, std::int64_t> witness;
    int sym_counter = 0;
    int sym_budget = 0;

    // Delays are mostly fixed; each operation gets at most two free slack
    // symbols, and only on transit gaps outside any repeat. That mirrors
    // real pipelines: the schedulable knobs are the hand-off gaps between
    // phases, while gaps inside a loop body are pinned by the datapath's
    // initiation interval. (A slack inside a repeat would also scale with
    // the iteration index, so one knob would mean something different for
    // every beat it covers.)
    auto fresh_delay = [&](bool in_repeat) {
        if (in_repeat || sym_budget <= 0 || rint(0, 9) >= 3)
            return DelayTerm::constant(rint(0, 4));
        --sym_budget;
        std::string name = "t" + std::to_string(++sym_counter);
        witness[VarId::delay_sym(name)] = rint(0, 3);
        return DelayTerm::symbol(name);
    };

    int next_event = 0;
    std::function<std::shared_ptr<OpExpr>(std::int64_t, bool)> build = [&](std::int64_t m,
                                                                           bool in_repeat) {
        if (m == 0) return OpExpr::make_event(next_event++);
        if (rint(0, 1) == 0) {
            std::int64_t iter = rint(2, 8);
            DelayTerm delay = DelayTerm::constant(rint(0, 4));
            auto child = build(m - 1, true);
            return OpExpr::make_repeat(iter, delay, child);
        }
        DelayTerm delay = fresh_delay(in_repeat);
        std::int64_t ml = rint(0, m - 1);
        auto left = build(ml, in_repeat);
        auto right = build(m - 1 - ml, in_repeat);
        return OpExpr::make_transit(delay, left, right);
    };

    for (std::int64_t i = 0; i < params.n_ops; ++i) {
        OperationDef op;
        op.name = "op" + std::to_string(i);
        next_event = 0;
        sym_budget = 2;
        op.expr = build(params.m_operators, false);
        witness[VarId::op_start(op.name)] = rint(0, 20);
        model.operations.push_back(std::move(op));
    }

    auto anchor_of = [&](std::int64_t idx) {
        const OperationDef& op = model.operations[static_cast<size_t>(idx)];
        int ev = static_cast<int>(rint(0, op.expr->num_events() - 1));
        Anchor a;
        a.op = op.name;
        a.event = ev;
        for (std::int64_t iter : model.repeat_iters_on_path(op.name, ev))
            a.indices.push_back(static_cast<int>(rint(0, iter - 1)));
        return a;
    };

    // Constraints couple an operation to a near neighbour, the shape real
    // streaming pipelines take: each stage aligns against the stage (or the
    // stage before the stage) that feeds it, not against arbitrary peers.
    for (std::int64_t c = 0; c < params.c_constraints; ++c) {
        std::int64_t i = rint(0, params.n_ops - 1);
        std::int64_t j = std::max<std::int64_t>(0, i - rint(1, 2));
        Anchor a1 = anchor_of(i);
        Anchor a2 = anchor_of(j);
        std::int64_t t1 = anchor_time(model, a1).evaluate(witness);
        std::int64_t t2 = anchor_time(model, a2).evaluate(witness);

        ConstraintStmt stmt;
        stmt.lhs = LinExpr(a1.var());
        std::int64_t form = rint(0, 2);
        if (form == 0) {
            stmt.rel = Rel::EQ;
            stmt.rhs = LinExpr(a2.var()) + LinExpr(t1 - t2);
        } else if (form == 1) {
            stmt.rel = Rel::LE;
            stmt.rhs = LinExpr(a2.var()) + LinExpr(t1 - t2 + rint(0, 3));
        } else {
            stmt.rel = Rel::LT;
            stmt.rhs = LinExpr(a2.var()) + LinExpr(t1 - t2 + rint(1, 4));
        }
        model.constraints.push_back(std::move(stmt));
    }

    model.validate();
    return model;
}

std::string SweepResult::csv() const {
    std::string out = "N,M,C,seed,instance,time_ms,latency,status\n";
    for (const auto& r : rows) {
        out += std::to_string(r.params.n_ops) + "," + std::to_string(r.params.m_operators) +
               "," + std::to_string(r.params.c_constraints) + "," +
               std::to_string(r.params.seed) + "," + std::to_string(r.instance) + "," +
               fmt(r.time_ms, "%.3f") + "," + std::to_string(r.latency) + "," + r.status + "\n";
    }
    return out;
}

SweepResult run_sweep(const std::vector<ComplexityParams>& grid, int repeats,
                      const SolverConfig& solver) {
    SweepResult result;
    for (const auto& point : grid) {
        for (int inst = 0; inst < repeats; ++inst) {
            ComplexityParams p = point;
            p.seed = point.seed + static_cast<std::uint64_t>(inst);
            Model model = gen_random_app(p);

            SweepRow row;
            row.params = p;
            row.instance = inst;
            auto t0 = std::chrono::steady_clock::now();
            try {
                ConstraintSystem sys = formulate(model, solver);
                Schedule s = solve(sys, solver);
                row.latency = s.latency;
                row.status = s.proof == Schedule::Proof::Optimal ? "optimal" : "feasible";
            } catch (const InfeasibleError&) {
                row.status = "infeasible";
            } catch (const TimeoutError&) {
                row.status = "timeout";
            }
            auto t1 = std::chrono::steady_clock::now();
            row.time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

namespace {

struct XY {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::int64_t n = 0;
};

// Least squares y = a*f + b over precomputed features f.
CurveFit ls_fit(const std::vector<double>& fs, const std::vector<double>& ys) {
    XY s;
    s.n = static_cast<std::int64_t>(fs.size());
    for (size_t i = 0; i < fs.size(); ++i) {
        s.sx += fs[i];
        s.sy += ys[i];
        s.sxx += fs[i] * fs[i];
        s.sxy += fs[i] * ys[i];
    }
    double n = static_cast<double>(s.n);
    double denom = n * s.sxx - s.sx * s.sx;
    CurveFit fit;
    if (denom == 0.0) {
        fit.a = 0.0;
        fit.b = s.sy / n;
    } else {
        fit.a = (n * s.sxy - s.sx * s.sy) / denom;
        fit.b = (s.sy - fit.a * s.sx) / n;
    }
    return fit;
}

double mse_of(const std::vector<double>& ys, const std::vector<double>& preds) {
    double sse = 0.0;
    for (size_t i = 0; i < ys.size(); ++i) {
        double d = ys[i] - preds[i];
        sse += d * d;
    }
    return sse / static_cast<double>(ys.size());
}

}  // namespace

FitReport fit_curves(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw ValidationError("fit_curves: xs/ys size mismatch");
    if (xs.size() < 3) throw ValidationError("fit_curves: need at least 3 points");
    bool degenerate = true;
    for (double x : xs)
        if (x != xs[0]) degenerate = false;
    if (degenerate) throw ValidationError("fit_curves: all x values equal");
    for (double y : ys)
        if (y < 0) throw ValidationError("fit_curves: negative y value");

    size_t n = xs.size();
    FitReport rep;

    rep.linear = ls_fit(xs, ys);
    std::vector<double> pred(n);
    for (size_t i = 0; i < n; ++i) pred[i] = rep.linear.a * xs[i] + rep.linear.b;
    rep.linear.mse = mse_of(ys, pred);

    std::vector<double> x2(n);
    for (size_t i = 0; i < n; ++i) x2[i] = xs[i] * xs[i];
    rep.quadratic = ls_fit(x2, ys);
    for (size_t i = 0; i < n; ++i) pred[i] = rep.quadratic.a * x2[i] + rep.quadratic.b;
    rep.quadratic.mse = mse_of(ys, pred);

    constexpr double kEps = 1e-9;
    std::vector<double> logy(n);
    for (size_t i = 0; i < n; ++i) logy[i] = std::log(ys[i] + kEps);
    CurveFit loglin = ls_fit(xs, logy);
    rep.exponential.a = std::exp(loglin.b);
    rep.exponential.b = loglin.a;
    for (size_t i = 0; i < n; ++i)
        pred[i] = rep.exponential.a * std::exp(rep.exponential.b * xs[i]);
    rep.exponential.mse = mse_of(ys, pred);

    // Tie-break in declaration order: linear, then quadratic, then exponential.
    rep.winner = "linear";
    double best = rep.linear.mse;
    if (rep.quadratic.mse < best) {
        rep.winner = "quadratic";
        best = rep.quadratic.mse;
    }
    if (rep.exponential.mse < best) {
        rep.winner = "exponential";
        best = rep.exponential.mse;
    }
    int at_best = 0;
    for (double m : {rep.linear.mse, rep.quadratic.mse, rep.exponential.mse})
        if (m == best) ++at_best;
    rep.tie = at_best > 1;
    return rep;
}

std::string FitReport::text() const {
    auto row = [&](const char* family, const CurveFit& f) {
        return std::string(family) + "," + fmt(f.mse) + ",a=" + fmt(f.a) + " b=" + fmt(f.b) +
               "," + (winner == family ? (tie ? "yes (tie)" : "yes") : "no") + "\n";
    };
    std::string out = "family,mse,params,winner\n";
    out += row("linear", linear);
    out += row("quadratic", quadratic);
    out += row("exponential", exponential);
    return out;
}

std::string KernelTable::csv() const {
    std::string out = "kernel,size_params,instr_count,latency,ideal,overhead_pct,functional_ok\n";
    for (const auto& r : rows) {
        out += r.kernel + "," + r.size_params + "," + std::to_string(r.instr_count) + "," +
               std::to_string(r.latency) + "," + std::to_string(r.ideal) + "," +
               fmt(r.overhead, "%.1f") + "," + (r.functional_ok ? "true" : "false") + "\n";
    }
    return out;
}

KernelTable kernel_table(const std::vector<KernelSpec>& corpus, const SolverConfig& solver) {
    KernelTable table;
    for (const KernelSpec& spec : corpus) {
        KernelRow row;
        row.kernel = spec.name();
        row.ideal = ideal_latency(spec);
        {
            std::ostringstream sp;
            switch (spec.family) {
                case KernelSpec::Family::Dot:
                    sp << "n=" << spec.n;
                    break;
                case KernelSpec::Family::Mvm:
                    sp << "m=" << spec.m << ";n=" << spec.n;
                    break;
                case KernelSpec::Family::Mmm:
                    sp << "m=" << spec.m << ";n=" << spec.n << ";k=" << spec.k;
                    break;
                case KernelSpec::Family::Conv1d:
                case KernelSpec::Family::Conv2d:
                    sp << "n=" << spec.n << ";k=" << spec.k;
                    break;
            }
            row.size_params = sp.str();
        }

        try {
            KernelBundle bundle = build_kernel(spec);
            ConstraintSystem sys = formulate(bundle.model, solver);
            Schedule schedule = solve(sys, solver);
            Program program = synchronize(bundle.model, schedule);
            Trace trace = simulate(program, bundle.machine, bundle.memory);

            row.instr_count = static_cast<std::int64_t>(program.instructions.size());
            row.latency = trace.total_cycles;
            row.overhead = overhead_pct(row.latency, row.ideal);

            bool ok = check_trace(trace, bundle.model, schedule).ok;
            for (size_t i = 0; ok && i < bundle.expected_output.size(); ++i) {
                std::int64_t got =
                    trace.final_memory[static_cast<size_t>(bundle.output_base) + i];
                if (got != bundle.expected_output[i]) ok = false;
            }
            row.functional_ok = ok;
        } catch (const Error& e) {
            row.error = e.what();
            row.functional_ok = false;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace cis
