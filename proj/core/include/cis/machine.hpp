#ifndef CIS_MACHINE_HPP
#define CIS_MACHINE_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace cis {

// Hardware template instance: a single-issue sequencer plus resource slots,
// each slot carrying two local FSMs. Storage slots are ports into one shared
// scratchpad; computation slots are single ALUs; interconnect slots own the
// datapath routing table.
struct MachineConfig {
    enum class SlotKind { Interconnect, Storage, Computation };

    struct Slot {
        int ordinal = 0;
        SlotKind kind = SlotKind::Interconnect;
        int fsms = 2;
    };

    std::vector<Slot> slots;
    std::int64_t storage_words = 16384;
    std::set<std::string> functions;  // ALU functions programs may name

    const Slot* find_slot(int ordinal) const;

    // slot0 interconnect, slot1 storage, slot2 computation, every builtin
    // function available.
    static MachineConfig toy();
};

// Declarative text format, one directive per line, `#` comments:
//   slot <ordinal> <interconnect|storage|computation> [fsms=<n>]
//   storage <words>
//   function <name>
// Function names must be builtins: ADD-1, ADD, MUL, MAC, PASS.
MachineConfig parse_machine(const std::string& text);

const std::set<std::string>& builtin_functions();

}  // namespace cis

#endif
