#include "cis/emitter.hpp"

#include <algorithm>

#include "cis/error.hpp"

namespace cis {
namespace {

std::int64_t delay_value(const DelayTerm& d, const std::map<VarId, std::int64_t>& assignment) {
    if (d.kind == DelayTerm::Kind::Constant) return d.value;
    auto it = assignment.find(VarId::delay_sym(d.name));
    if (it == assignment.end()) throw EvalError("unbound delay symbol " + d.name);
    return it->second;
}

std::vector<std::string> split_segments(const std::string& payload) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= payload.size()) {
        size_t semi = payload.find(';', start);
        std::string seg =
            payload.substr(start, (semi == std::string::npos ? payload.size() : semi) - start);
        size_t a = seg.find_first_not_of(" \t");
        if (a != std::string::npos) {
            size_t b = seg.find_last_not_of(" \t");
            out.push_back(seg.substr(a, b - a + 1));
        }
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    return out;
}

// Post-order transform emission; Repeats take their stride by
// outermost-first ordinal from `steps`.
void emit_transforms(const OpExpr& n, const std::map<VarId, std::int64_t>& assignment,
                     const std::vector<std::int64_t>& steps, int& repeat_ordinal, int slot,
                     int fsm, std::vector<Instruction>& out) {
    switch (n.kind) {
        case OpExpr::Kind::Event:
            return;
        case OpExpr::Kind::Repeat: {
            int ordinal = repeat_ordinal++;
            emit_transforms(*n.left, assignment, steps, repeat_ordinal, slot, fsm, out);
            Instruction r;
            r.kind = Instruction::Kind::ConfigR;
            r.slot = slot;
            r.fsm = fsm;
            r.iter = n.iter;
            r.step = static_cast<size_t>(ordinal) < steps.size() ? steps[ordinal] : 1;
            r.delay = delay_value(n.delay, assignment);
            out.push_back(std::move(r));
            return;
        }
        case OpExpr::Kind::Transit: {
            emit_transforms(*n.left, assignment, steps, repeat_ordinal, slot, fsm, out);
            emit_transforms(*n.right, assignment, steps, repeat_ordinal, slot, fsm, out);
            Instruction t;
            t.kind = Instruction::Kind::ConfigT;
            t.slot = slot;
            t.fsm = fsm;
            t.delay = delay_value(n.delay, assignment);
            out.push_back(std::move(t));
            return;
        }
    }
}

}  // namespace

std::vector<Instruction> expand_config(const OperationDef& op,
                                       const std::map<VarId, std::int64_t>& assignment) {
    if (!op.binding)
        throw ValidationError("operation '" + op.name + "' has no resource binding");
    const ResourceBinding& b = *op.binding;

    std::vector<std::string> segments = split_segments(b.payload);
    std::vector<std::int64_t> steps;
    if (!segments.empty() && segments.back().rfind("steps=", 0) == 0) {
        std::string list = segments.back().substr(6);
        segments.pop_back();
        size_t start = 0;
        while (start <= list.size()) {
            size_t comma = list.find(',', start);
            std::string item =
                list.substr(start, (comma == std::string::npos ? list.size() : comma) - start);
            try {
                steps.push_back(std::stoll(item));
            } catch (const std::exception&) {
                throw ValidationError("operation '" + op.name + "': bad steps entry '" + item +
                                      "'");
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    if (segments.empty())
        throw ValidationError("operation '" + op.name + "': binding payload is empty");

    std::vector<Instruction> out;
    for (const auto& seg : segments) {
        Instruction in;
        in.slot = b.slot;
        in.fsm = b.fsm;
        switch (b.kind) {
            case ResourceBinding::Kind::I:
                in.kind = Instruction::Kind::ConfigI;
                in.path = seg;
                break;
            case ResourceBinding::Kind::C:
                in.kind = Instruction::Kind::ConfigC;
                in.function = seg;
                break;
            case ResourceBinding::Kind::S: {
                in.kind = Instruction::Kind::ConfigS;
                if (seg.rfind("address=", 0) != 0)
                    throw ValidationError("operation '" + op.name +
                                          "': @S payload must be 'address=<n>', got '" + seg +
                                          "'");
                try {
                    in.address = std::stoll(seg.substr(8));
                } catch (const std::exception&) {
                    throw ValidationError("operation '" + op.name + "': bad address in '" + seg +
                                          "'");
                }
                break;
            }
        }
        out.push_back(std::move(in));
    }

    int repeat_ordinal = 0;
    emit_transforms(*op.expr, assignment, steps, repeat_ordinal, b.slot, b.fsm, out);
    return out;
}

Program synchronize(const Model& model, const Schedule& schedule) {
    Program prog;
    if (model.operations.empty()) return prog;

    // Scheduled activation cycle per operation.
    std::map<std::string, std::int64_t> starts;
    for (const auto& op : model.operations) {
        auto it = schedule.assignment.find(VarId::op_start(op.name));
        if (it == schedule.assignment.end())
            throw EvalError("schedule has no start for operation '" + op.name + "'");
        starts[op.name] = it->second;
    }

    // Step 1: one Activate per distinct cycle, targets ordered by slot:fsm.
    std::map<std::int64_t, Instruction> slots;  // cycle -> instruction (pre-shift)
    std::map<std::int64_t, std::vector<std::pair<int, int>>> act_targets;
    for (const auto& op : model.operations) {
        if (!op.binding)
            throw ValidationError("operation '" + op.name + "' has no resource binding");
        act_targets[starts[op.name]].push_back({op.binding->slot, op.binding->fsm});
    }
    for (auto& [cycle, targets] : act_targets) {
        std::sort(targets.begin(), targets.end());
        Instruction a;
        a.kind = Instruction::Kind::Activate;
        a.targets = targets;
        slots[cycle] = std::move(a);
    }

    // Steps 2+3: pack configurations into the zone below the earliest
    // activation, latest-activated operation first, ties by name.
    std::vector<const OperationDef*> order;
    for (const auto& op : model.operations) order.push_back(&op);
    std::sort(order.begin(), order.end(), [&](const OperationDef* a, const OperationDef* b) {
        std::int64_t sa = starts[a->name];
        std::int64_t sb = starts[b->name];
        if (sa != sb) return sa > sb;
        return a->name < b->name;
    });

    std::int64_t next_free = act_targets.begin()->first - 1;
    for (const OperationDef* op : order) {
        std::vector<Instruction> config = expand_config(*op, schedule.assignment);
        for (auto it = config.rbegin(); it != config.rend(); ++it) slots[next_free--] = *it;
    }

    // Step 4: shift so the first occupied slot is cycle 0.
    std::int64_t shift = -slots.begin()->first;
    CIS_ASSERT(shift >= 0, "activation zone starts above cycle 0");

    // Steps 5+6: walk slots in order, covering gaps with waits, then pad to
    // the shifted scheduled latency.
    std::int64_t declared = checked_add(schedule.latency, shift);
    std::int64_t cursor = 0;
    for (auto& [cycle, in] : slots) {
        std::int64_t at = cycle + shift;
        if (at > cursor) {
            Instruction w;
            w.kind = Instruction::Kind::Wait;
            w.delay = at - cursor;
            prog.instructions.push_back(std::move(w));
        }
        prog.instructions.push_back(std::move(in));
        cursor = at + 1;
    }
    if (cursor < declared) {
        Instruction w;
        w.kind = Instruction::Kind::Wait;
        w.delay = declared - cursor;
        prog.instructions.push_back(std::move(w));
        cursor = declared;
    }
    prog.declared_latency = declared;
    for (const auto& [name, start] : starts) prog.op_activation[name] = start + shift;
    return prog;
}

std::map<std::string, std::int64_t> activation_offsets(const Program& program) {
    if (program.op_activation.empty())
        throw ValidationError("program carries no activation metadata");
    std::int64_t base = program.op_activation.begin()->second;
    for (const auto& [op, cycle] : program.op_activation) base = std::min(base, cycle);
    std::map<std::string, std::int64_t> out;
    for (const auto& [op, cycle] : program.op_activation) out[op] = cycle - base;
    return out;
}

}  // namespace cis
