#include "cis/simulator.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "cis/error.hpp"
#include "cis/timing.hpp"

namespace cis {
namespace {

constexpr std::int64_t kMaxFirings = std::int64_t(1) << 24;

struct Firing {
    std::int64_t cycle = 0;
    std::int64_t addr = 0;
    int event = 0;
};

struct ParsedPath {
    int src_slot = 0;
    int dst_slot = 0;
    int dst_port = 0;  // 0 = primary input, 1 = second ALU operand
    std::string text;
};

ParsedPath parse_path(const std::string& s, const MachineConfig& mc) {
    auto bad = [&](const std::string& why) {
        throw SimError("bad path '" + s + "': " + why);
    };
    size_t arrow = s.find("->");
    if (arrow == std::string::npos) bad("missing '->'");
    std::string src = s.substr(0, arrow);
    std::string dst = s.substr(arrow + 2);
    ParsedPath p;
    p.text = s;
    if (dst.size() > 2 && dst.compare(dst.size() - 2, 2, ".b") == 0) {
        p.dst_port = 1;
        dst = dst.substr(0, dst.size() - 2);
    }
    if (src.rfind("slot", 0) != 0 || dst.rfind("slot", 0) != 0) bad("endpoints must be slot<N>");
    try {
        p.src_slot = std::stoi(src.substr(4));
        p.dst_slot = std::stoi(dst.substr(4));
    } catch (const std::exception&) {
        bad("endpoints must be slot<N>");
    }
    const auto* srcs = mc.find_slot(p.src_slot);
    const auto* dsts = mc.find_slot(p.dst_slot);
    if (!srcs) bad("source slot not in machine");
    if (!dsts) bad("destination slot not in machine");
    if (srcs->kind == MachineConfig::SlotKind::Interconnect) bad("source has no output port");
    if (dsts->kind == MachineConfig::SlotKind::Interconnect) bad("destination has no input port");
    if (p.dst_port == 1 && dsts->kind != MachineConfig::SlotKind::Computation)
        bad("only computation slots have a second input");
    return p;
}

struct AluFunction {
    std::string name;
    std::int64_t period = 0;  // MAC accumulator reset period; 0 = reset at enable only
};

AluFunction parse_function(const std::string& s, const MachineConfig& mc) {
    AluFunction f;
    size_t pct = s.find('%');
    f.name = s.substr(0, pct == std::string::npos ? s.size() : pct);
    if (!mc.functions.count(f.name)) throw SimError("unknown ALU function '" + s + "'");
    if (pct != std::string::npos) {
        try {
            f.period = std::stoll(s.substr(pct + 1));
        } catch (const std::exception&) {
            throw SimError("bad function period in '" + s + "'");
        }
        if (f.period < 1) throw SimError("function period must be >= 1 in '" + s + "'");
    }
    return f;
}

struct FsmRuntime {
    std::vector<Instruction> bases;
    std::vector<Instruction> transforms;
    bool sealed = false;  // an @A consumed this configuration

    std::vector<Firing> firings;
    size_t next = 0;

    bool running() const { return next < firings.size(); }
};

struct AluState {
    bool enabled = false;
    std::int64_t enable_cycle = 0;
    AluFunction fn;
    std::uint64_t acc = 0;
};

// Expands the configured loop structure into firing times and addresses.
// Supported shape: k base instructions chained by k-1 @T delays, wrapped by
// any number of @R levels (configured innermost first). An interconnect FSM
// instead fires its whole routing table as one event, so its base count is
// independent of the chain and @T is not allowed.
std::vector<Firing> build_firings(const FsmRuntime& f, std::int64_t start, int slot, int fsm,
                                  bool bundle_bases) {
    auto unsupported = [&](const std::string& why) {
        throw SimError("slot" + std::to_string(slot) + ":FSM" + std::to_string(fsm) + ": " + why);
    };

    size_t k = bundle_bases ? 1 : f.bases.size();
    size_t t = 0;
    while (t < f.transforms.size() && f.transforms[t].kind == Instruction::Kind::ConfigT) ++t;
    for (size_t i = t; i < f.transforms.size(); ++i)
        if (f.transforms[i].kind != Instruction::Kind::ConfigR)
            unsupported("@T after @R is not executable");
    if (bundle_bases && t != 0) unsupported("interconnect FSM cannot take @T transitions");
    if (t != k - 1)
        unsupported("configured " + std::to_string(k) + " base(s) but " + std::to_string(t) +
                    " @T transition(s); need k-1");

    // Base chain: event j fires at offset o_j with address a_j.
    std::vector<std::int64_t> offset(k), base_addr(k, 0);
    offset[0] = 0;
    for (size_t j = 1; j < k; ++j)
        offset[j] = checked_add(offset[j - 1], checked_add(1, f.transforms[j - 1].delay));
    if (!bundle_bases)
        for (size_t j = 0; j < k; ++j) base_addr[j] = f.bases[j].address;
    std::int64_t span = checked_add(offset[k - 1], 1);

    // Repeat levels, innermost first.
    struct Level {
        std::int64_t iter, step, period;
    };
    std::vector<Level> levels;
    std::int64_t total = static_cast<std::int64_t>(k);
    for (size_t i = t; i < f.transforms.size(); ++i) {
        const auto& r = f.transforms[i];
        levels.push_back({r.iter, r.step, checked_add(span, r.delay)});
        span = checked_add(checked_mul(span, r.iter), checked_mul(r.delay, r.iter - 1));
        total = checked_mul(total, r.iter);
        if (total > kMaxFirings) unsupported("firing schedule too large");
    }

    std::vector<Firing> out;
    out.reserve(static_cast<size_t>(total));
    std::vector<std::int64_t> idx(levels.size(), 0);
    for (;;) {
        std::int64_t block = start;
        std::int64_t addr_off = 0;
        for (size_t i = 0; i < levels.size(); ++i) {
            block = checked_add(block, checked_mul(idx[i], levels[i].period));
            addr_off = checked_add(addr_off, checked_mul(idx[i], levels[i].step));
        }
        for (size_t j = 0; j < k; ++j)
            out.push_back(Firing{checked_add(block, offset[j]),
                                 checked_add(base_addr[j], addr_off), static_cast<int>(j)});
        // Odometer: innermost level is the fastest digit, so firings come
        // out in ascending cycle order.
        size_t d = 0;
        while (d < levels.size() && ++idx[d] == levels[d].iter) idx[d++] = 0;
        if (d == levels.size()) break;
    }
    return out;
}

}  // namespace

std::string Trace::text() const {
    std::string out;
    for (const auto& e : events) {
        out += "cycle=" + std::to_string(e.cycle) + " slot=" + std::to_string(e.slot) +
               " fsm=" + std::to_string(e.fsm) + " event=e" + std::to_string(e.event) +
               " addr=" + std::to_string(e.addr) + " data=" + std::to_string(e.data) + "\n";
    }
    return out;
}

std::vector<std::string> Trace::paths_at(std::int64_t cycle) const {
    std::map<std::pair<int, int>, std::string> live;
    for (const auto& p : path_log) {
        if (p.cycle > cycle) break;
        live[{p.dst_slot, p.dst_port}] = p.path;
    }
    std::vector<std::string> out;
    for (const auto& [_, path] : live) out.push_back(path);
    std::sort(out.begin(), out.end());
    return out;
}

Trace simulate(const Program& program, const MachineConfig& config,
               const std::vector<std::int64_t>& memory_init, std::int64_t cycle_cap) {
    if (static_cast<std::int64_t>(memory_init.size()) > config.storage_words)
        throw SimError("initial memory image larger than storage");

    Trace trace;
    trace.final_memory = memory_init;
    trace.final_memory.resize(static_cast<size_t>(config.storage_words), 0);
    auto& memory = trace.final_memory;

    std::map<std::pair<int, int>, FsmRuntime> fsms;
    std::map<int, AluState> alus;              // per computation slot
    std::map<int, std::int64_t> out_reg;       // storage/computation outputs
    std::map<std::pair<int, int>, ParsedPath> route;  // (dst slot, port) -> path

    for (const auto& s : config.slots)
        if (s.kind != MachineConfig::SlotKind::Interconnect) out_reg[s.ordinal] = 0;

    auto fsm_at = [&](int slot, int fsm) -> FsmRuntime& {
        const auto* s = config.find_slot(slot);
        if (!s) throw SimError("slot" + std::to_string(slot) + " not in machine");
        if (fsm < 0 || fsm >= s->fsms)
            throw SimError("slot" + std::to_string(slot) + " has no FSM" + std::to_string(fsm));
        return fsms[{slot, fsm}];
    };
    auto slot_kind = [&](int slot) { return config.find_slot(slot)->kind; };

    auto check_config_kind = [&](const Instruction& in) {
        auto kind = slot_kind(in.slot);
        bool ok = true;
        if (in.kind == Instruction::Kind::ConfigI)
            ok = kind == MachineConfig::SlotKind::Interconnect;
        else if (in.kind == Instruction::Kind::ConfigC)
            ok = kind == MachineConfig::SlotKind::Computation;
        else if (in.kind == Instruction::Kind::ConfigS)
            ok = kind == MachineConfig::SlotKind::Storage;
        if (!ok)
            throw SimError(in.text() + ": instruction kind does not match slot resource");
    };

    const auto issue_at = program.issue_cycles();
    size_t ip = 0;

    auto any_running = [&]() {
        for (const auto& [_, f] : fsms)
            if (f.running()) return true;
        return false;
    };

    const std::int64_t seq_end = program.end_cycle();
    std::int64_t cycle = 0;
    for (;; ++cycle) {
        if (!(ip < program.instructions.size() || any_running() || cycle < seq_end)) break;
        if (cycle >= cycle_cap) throw SimError("cycle cap exceeded (" +
                                               std::to_string(cycle_cap) + " cycles)");

        // --- Sequencer: at most one instruction per cycle. ---
        if (ip < program.instructions.size() && issue_at[ip] == cycle) {
            const Instruction& in = program.instructions[ip];
            trace.issue_log.push_back({cycle, static_cast<int>(ip)});
            ++ip;
            if (in.is_config()) {
                check_config_kind(in);
                FsmRuntime& f = fsm_at(in.slot, in.fsm);
                if (f.sealed) {
                    f.bases.clear();
                    f.transforms.clear();
                    f.sealed = false;
                }
                if (in.kind == Instruction::Kind::ConfigR || in.kind == Instruction::Kind::ConfigT)
                    f.transforms.push_back(in);
                else
                    f.bases.push_back(in);
            } else if (in.kind == Instruction::Kind::Activate) {
                for (const auto& [slot, fsm] : in.targets) {
                    FsmRuntime& f = fsm_at(slot, fsm);
                    if (f.bases.empty())
                        throw SimError("activation of unconfigured slot" + std::to_string(slot) +
                                       ":FSM" + std::to_string(fsm));
                    if (slot_kind(slot) == MachineConfig::SlotKind::Computation &&
                        f.bases.size() > 1)
                        throw SimError("computation FSM configured with several functions");
                    f.firings = build_firings(
                        f, cycle, slot, fsm,
                        slot_kind(slot) == MachineConfig::SlotKind::Interconnect);
                    f.next = 0;
                    f.sealed = true;
                }
            }
        }

        // --- Collect this cycle's events. ---
        struct Fired {
            int slot, fsm;
            const FsmRuntime* f;
            Firing firing;
        };
        std::vector<Fired> fired;
        for (auto& [key, f] : fsms) {
            while (f.running() && f.firings[f.next].cycle == cycle) {
                fired.push_back({key.first, key.second, &f, f.firings[f.next]});
                ++f.next;
            }
        }

        // Interconnect events first: routing changes are combinational.
        std::map<std::pair<int, int>, std::string> fresh;
        for (const auto& ev : fired) {
            if (slot_kind(ev.slot) != MachineConfig::SlotKind::Interconnect) continue;
            const FsmRuntime& f = *ev.f;
            for (const auto& base : f.bases) {
                ParsedPath p = parse_path(base.path, config);
                auto key = std::make_pair(p.dst_slot, p.dst_port);
                auto it = fresh.find(key);
                if (it != fresh.end() && it->second != p.text)
                    throw SimError("datapath conflict: '" + it->second + "' and '" + p.text +
                                   "' drive the same port in cycle " + std::to_string(cycle));
                if (fresh.insert({key, p.text}).second) {
                    auto cur = route.find(key);
                    if (cur == route.end() || cur->second.text != p.text) {
                        route[key] = p;
                        trace.path_log.push_back({cycle, p.dst_slot, p.dst_port, p.text});
                    }
                }
            }
            trace.events.push_back({cycle, ev.slot, ev.fsm, ev.firing.event, 0, 0});
        }

        // Input wires from registered outputs through the current routes.
        auto wire = [&](int slot, int port) -> std::int64_t {
            auto it = route.find({slot, port});
            if (it == route.end()) return 0;
            return out_reg[it->second.src_slot];
        };

        // Computation enable events.
        for (const auto& ev : fired) {
            if (slot_kind(ev.slot) != MachineConfig::SlotKind::Computation) continue;
            AluState& alu = alus[ev.slot];
            alu.fn = parse_function(ev.f->bases[0].function, config);
            alu.enabled = true;
            alu.enable_cycle = cycle;
            alu.acc = 0;
            trace.events.push_back({cycle, ev.slot, ev.fsm, ev.firing.event, 0, 0});
        }

        // Storage: sample write data and read values against the pre-write
        // memory image, then commit.
        struct WriteOp {
            std::int64_t addr, value;
            int slot, fsm, event;
        };
        std::vector<WriteOp> writes;
        struct ReadOp {
            std::int64_t addr, value;
            int slot, fsm, event;
        };
        std::vector<ReadOp> reads;
        for (const auto& ev : fired) {
            if (slot_kind(ev.slot) != MachineConfig::SlotKind::Storage) continue;
            std::int64_t addr = ev.firing.addr;
            if (addr < 0 || addr >= config.storage_words)
                throw SimError("address " + std::to_string(addr) + " out of storage range at cycle " +
                               std::to_string(cycle));
            if (ev.fsm == 0)
                writes.push_back({addr, wire(ev.slot, 0), ev.slot, ev.fsm, ev.firing.event});
            else
                reads.push_back({addr, memory[static_cast<size_t>(addr)], ev.slot, ev.fsm,
                                 ev.firing.event});
        }
        for (size_t i = 0; i < writes.size(); ++i)
            for (size_t j = i + 1; j < writes.size(); ++j)
                if (writes[i].addr == writes[j].addr)
                    throw SimError("two writes to address " + std::to_string(writes[i].addr) +
                                   " in cycle " + std::to_string(cycle));
        for (const auto& w : writes) {
            memory[static_cast<size_t>(w.addr)] = w.value;
            trace.events.push_back({cycle, w.slot, w.fsm, w.event, w.addr, w.value});
        }
        for (const auto& r : reads)
            trace.events.push_back({cycle, r.slot, r.fsm, r.event, r.addr, r.value});

        // --- End of cycle: all registers clock at once, so ALUs sample the
        // wire values from before this cycle's read registers update. ---
        std::map<int, std::pair<std::int64_t, std::int64_t>> alu_in;
        for (auto& [slot, alu] : alus)
            if (alu.enabled) alu_in[slot] = {wire(slot, 0), wire(slot, 1)};
        for (const auto& r : reads) out_reg[r.slot] = r.value;  // 1-cycle read latency
        for (auto& [slot, alu] : alus) {
            if (!alu.enabled) continue;
            std::uint64_t a = static_cast<std::uint64_t>(alu_in[slot].first);
            std::uint64_t b = static_cast<std::uint64_t>(alu_in[slot].second);
            std::uint64_t res = 0;
            if (alu.fn.name == "ADD-1") {
                res = a + 1;
            } else if (alu.fn.name == "PASS") {
                res = a;
            } else if (alu.fn.name == "ADD") {
                res = a + b;
            } else if (alu.fn.name == "MUL") {
                res = a * b;
            } else if (alu.fn.name == "MAC") {
                bool reset = alu.fn.period > 0
                                 ? (cycle - alu.enable_cycle) % alu.fn.period == 0
                                 : cycle == alu.enable_cycle;
                if (reset) alu.acc = 0;
                alu.acc += a * b;
                res = alu.acc;
            } else {
                throw SimError("unknown ALU function '" + alu.fn.name + "'");
            }
            out_reg[slot] = static_cast<std::int64_t>(res);  // registered result
        }

        // Sort this cycle's trace entries for a stable order.
        auto begin = trace.events.end() - static_cast<std::ptrdiff_t>(fired.size());
        std::sort(begin, trace.events.end(), [](const TraceEvent& x, const TraceEvent& y) {
            return std::tie(x.slot, x.fsm, x.event, x.addr) <
                   std::tie(y.slot, y.fsm, y.event, y.addr);
        });
    }

    trace.total_cycles = cycle;
    return trace;
}

TraceCheckReport check_trace(const Trace& trace, const Model& model, const Schedule& schedule) {
    TraceCheckReport rep;

    std::set<Anchor> referenced;
    for (const auto& c : model.constraints)
        for (const auto& side : {c.lhs, c.rhs})
            for (const auto& a : anchors_in(side)) referenced.insert(a);
    if (referenced.empty()) return rep;  // vacuous pass

    // Firing cycles per (slot, fsm, event ordinal), in trace order.
    std::map<std::tuple<int, int, int>, std::vector<std::int64_t>> firings;
    for (const auto& e : trace.events)
        firings[{e.slot, e.fsm, e.event}].push_back(e.cycle);

    bool have_shift = false;
    for (const auto& a : referenced) {
        const OperationDef* op = model.find_op(a.op);
        CIS_ASSERT(op, "constraint anchor on unknown operation");
        if (!op->binding) {
            rep.ok = false;
            rep.detail = "operation '" + a.op + "' has no resource binding";
            return rep;
        }

        // Flatten the anchor's indices to its firing ordinal.
        auto iters = model.repeat_iters_on_path(a.op, a.event);
        std::int64_t ordinal = 0;
        for (size_t i = 0; i < iters.size(); ++i)
            ordinal = checked_add(checked_mul(ordinal, iters[i]), a.indices[i]);

        auto it = firings.find({op->binding->slot, op->binding->fsm, a.event});
        if (it == firings.end() || ordinal >= static_cast<std::int64_t>(it->second.size())) {
            rep.ok = false;
            rep.detail = "anchor " + a.text() + " never fired";
            return rep;
        }
        std::int64_t actual = it->second[static_cast<size_t>(ordinal)];
        std::int64_t scheduled = anchor_time(model, a).evaluate(schedule.assignment);
        if (!have_shift) {
            rep.shift = actual - scheduled;
            have_shift = true;
        }
        if (actual != scheduled + rep.shift) {
            rep.ok = false;
            rep.detail = "anchor " + a.text() + " fired at cycle " + std::to_string(actual) +
                         ", expected " + std::to_string(scheduled + rep.shift) + " (scheduled " +
                         std::to_string(scheduled) + " + shift " + std::to_string(rep.shift) + ")";
            return rep;
        }
        ++rep.anchors_checked;
    }
    return rep;
}

std::vector<std::int64_t> read_memory_file(const std::string& path) {
    std::vector<std::int64_t> words;
    if (path.size() > 4 && path.compare(path.size() - 4, 4, ".bin") == 0) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw Error("cannot open memory file '" + path + "'");
        char buf[8];
        while (f.read(buf, 8)) {
            std::uint64_t w = 0;
            for (int i = 7; i >= 0; --i) w = (w << 8) | static_cast<unsigned char>(buf[i]);
            words.push_back(static_cast<std::int64_t>(w));
        }
        return words;
    }
    std::ifstream f(path);
    if (!f) throw Error("cannot open memory file '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::int64_t w;
        if (ls >> w) {
            words.push_back(w);
            std::string rest;
            if (ls >> rest) throw ParseError(line_no, 1, "one word per line expected");
        }
    }
    return words;
}

void write_memory_file(const std::string& path, const std::vector<std::int64_t>& words) {
    if (path.size() > 4 && path.compare(path.size() - 4, 4, ".bin") == 0) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write memory file '" + path + "'");
        for (std::int64_t w : words) {
            std::uint64_t u = static_cast<std::uint64_t>(w);
            char buf[8];
            for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xff);
            f.write(buf, 8);
        }
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error("cannot write memory file '" + path + "'");
    for (std::int64_t w : words) f << w << "\n";
}

}  // namespace cis
