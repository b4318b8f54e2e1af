#ifndef CIS_ASSEMBLY_HPP
#define CIS_ASSEMBLY_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cis {

// One CIS instruction. Config instructions write FSM state, @A arms FSMs,
// @W stalls the sequencer.
struct Instruction {
    enum class Kind { ConfigI, ConfigC, ConfigS, ConfigR, ConfigT, Wait, Activate };

    Kind kind = Kind::Wait;
    int slot = 0;
    int fsm = 0;
    int option = 0;            // @I, @C
    std::string path;          // @I: "slotA->slotB" or "slotA->slotB.b"
    std::string function;      // @C: e.g. "ADD-1", "MAC%64"
    std::int64_t address = 0;  // @S
    std::int64_t iter = 0;     // @R
    std::int64_t step = 0;     // @R
    std::int64_t delay = 0;    // @R, @T, @W
    std::vector<std::pair<int, int>> targets;  // @A: (slot, fsm)

    bool is_config() const { return kind != Kind::Wait && kind != Kind::Activate; }
    std::string text() const;

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

// A sequencer program. Issue cycles follow the replay rule: the first
// instruction issues at 0; @W(d) at cycle c puts the next instruction at
// c + d, anything else at c + 1.
struct Program {
    std::vector<Instruction> instructions;
    std::int64_t declared_latency = 0;
    // Sidecar metadata (`#! op <name> activate=<cycle>`): which cycle each
    // operation's FSM is armed, so downstream tools need not reschedule.
    std::map<std::string, std::int64_t> op_activation;

    std::vector<std::int64_t> issue_cycles() const;
    // First cycle after the program: where the next instruction would issue.
    std::int64_t end_cycle() const;

    friend bool operator==(const Program&, const Program&) = default;
};

Program parse_assembly(const std::string& text);
std::string emit_assembly(const Program& program);

}  // namespace cis

#endif
