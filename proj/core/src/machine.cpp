#include "cis/machine.hpp"

#include <sstream>

#include "cis/error.hpp"

namespace cis {

const std::set<std::string>& builtin_functions() {
    static const std::set<std::string> fns = {"ADD-1", "ADD", "MUL", "MAC", "PASS"};
    return fns;
}

const MachineConfig::Slot* MachineConfig::find_slot(int ordinal) const {
    for (const auto& s : slots)
        if (s.ordinal == ordinal) return &s;
    return nullptr;
}

MachineConfig MachineConfig::toy() {
    MachineConfig m;
    m.slots = {{0, SlotKind::Interconnect, 2},
               {1, SlotKind::Storage, 2},
               {2, SlotKind::Computation, 2}};
    m.storage_words = 16384;
    m.functions = builtin_functions();
    return m;
}

MachineConfig parse_machine(const std::string& text) {
    MachineConfig m;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        size_t hash = raw.find('#');
        std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;

        if (word == "slot") {
            MachineConfig::Slot s;
            std::string kind;
            if (!(ls >> s.ordinal >> kind))
                throw ParseError(line_no, 1, "slot directive needs '<ordinal> <kind>'");
            if (kind == "interconnect")
                s.kind = MachineConfig::SlotKind::Interconnect;
            else if (kind == "storage")
                s.kind = MachineConfig::SlotKind::Storage;
            else if (kind == "computation")
                s.kind = MachineConfig::SlotKind::Computation;
            else
                throw ParseError(line_no, 1, "unknown slot kind '" + kind + "'");
            std::string extra;
            if (ls >> extra) {
                if (extra.rfind("fsms=", 0) != 0)
                    throw ParseError(line_no, 1, "unexpected field '" + extra + "'");
                s.fsms = std::stoi(extra.substr(5));
                if (s.fsms < 1 || s.fsms > 2)
                    throw ParseError(line_no, 1, "fsms must be 1 or 2");
            }
            if (m.find_slot(s.ordinal))
                throw ParseError(line_no, 1, "slot " + std::to_string(s.ordinal) + " redefined");
            m.slots.push_back(s);
        } else if (word == "storage") {
            if (!(ls >> m.storage_words) || m.storage_words < 1)
                throw ParseError(line_no, 1, "storage directive needs a positive word count");
        } else if (word == "function") {
            std::string name;
            if (!(ls >> name)) throw ParseError(line_no, 1, "function directive needs a name");
            if (!builtin_functions().count(name))
                throw ParseError(line_no, 1, "unknown function '" + name + "'");
            m.functions.insert(name);
        } else {
            throw ParseError(line_no, 1, "unknown directive '" + word + "'");
        }
    }
    if (m.slots.empty()) throw ValidationError("machine config declares no slots");
    return m;
}

}  // namespace cis
