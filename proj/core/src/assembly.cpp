#include "cis/assembly.hpp"

#include <cctype>
#include <set>
#include <sstream>

#include "cis/error.hpp"
#include "cis/lin_expr.hpp"

namespace cis {
namespace {

struct Field {
    std::string text;
    int col = 1;
};

std::vector<Field> split_fields(const std::string& line) {
    std::vector<Field> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        out.push_back(Field{line.substr(i, j - i), static_cast<int>(i + 1)});
        i = j;
    }
    return out;
}

std::int64_t parse_int(const std::string& s, int line, int col) {
    if (s.empty()) throw ParseError(line, col, "expected integer");
    size_t k = s[0] == '-' ? 1 : 0;
    if (k == s.size()) throw ParseError(line, col, "expected integer, got '" + s + "'");
    for (; k < s.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(s[k])))
            throw ParseError(line, col, "expected integer, got '" + s + "'");
    try {
        return std::stoll(s);
    } catch (const std::out_of_range&) {
        throw ParseError(line, col, "integer out of range: '" + s + "'");
    }
}

std::int64_t parse_kv(const Field& f, const char* key, int line) {
    std::string prefix = std::string(key) + "=";
    if (f.text.rfind(prefix, 0) != 0)
        throw ParseError(line, f.col,
                         "expected '" + std::string(key) + "=<n>', got '" + f.text + "'");
    return parse_int(f.text.substr(prefix.size()), line, f.col);
}

std::pair<int, int> parse_slot_fsm(const std::string& s, int line, int col) {
    size_t colon = s.find(':');
    if (s.rfind("slot", 0) != 0 || colon == std::string::npos ||
        s.compare(colon + 1, 3, "FSM") != 0)
        throw ParseError(line, col, "expected slot<N>:FSM<N>, got '" + s + "'");
    int slot = static_cast<int>(parse_int(s.substr(4, colon - 4), line, col));
    int fsm = static_cast<int>(parse_int(s.substr(colon + 4), line, col));
    return {slot, fsm};
}

const Field& field(const std::vector<Field>& fs, size_t i, int line, const char* what) {
    if (i >= fs.size()) throw ParseError(line, 1, std::string("missing field: ") + what);
    return fs[i];
}

int parse_option(const Field& f, int line) {
    if (f.text.rfind("option", 0) != 0)
        throw ParseError(line, f.col, "expected option<N>, got '" + f.text + "'");
    return static_cast<int>(parse_int(f.text.substr(6), line, f.col));
}

std::string slot_fsm_text(int slot, int fsm) {
    return "slot" + std::to_string(slot) + ":FSM" + std::to_string(fsm);
}

}  // namespace

std::string Instruction::text() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::ConfigI:
            os << "@I " << slot_fsm_text(slot, fsm) << " option" << option << " " << path;
            break;
        case Kind::ConfigC:
            os << "@C " << slot_fsm_text(slot, fsm) << " option" << option << " " << function;
            break;
        case Kind::ConfigS:
            os << "@S " << slot_fsm_text(slot, fsm) << " address=" << address;
            break;
        case Kind::ConfigR:
            os << "@R " << slot_fsm_text(slot, fsm) << " iter=" << iter << " step=" << step
               << " delay=" << delay;
            break;
        case Kind::ConfigT:
            os << "@T " << slot_fsm_text(slot, fsm) << " delay=" << delay;
            break;
        case Kind::Wait:
            os << "@W delay=" << delay;
            break;
        case Kind::Activate: {
            os << "@A [";
            for (size_t i = 0; i < targets.size(); ++i) {
                if (i) os << ", ";
                os << slot_fsm_text(targets[i].first, targets[i].second);
            }
            os << "]";
            break;
        }
    }
    return os.str();
}

std::vector<std::int64_t> Program::issue_cycles() const {
    std::vector<std::int64_t> out;
    out.reserve(instructions.size());
    std::int64_t c = 0;
    for (const auto& in : instructions) {
        out.push_back(c);
        c = checked_add(c, in.kind == Instruction::Kind::Wait ? in.delay : 1);
    }
    return out;
}

std::int64_t Program::end_cycle() const {
    std::int64_t c = 0;
    for (const auto& in : instructions)
        c = checked_add(c, in.kind == Instruction::Kind::Wait ? in.delay : 1);
    return c;
}

Program parse_assembly(const std::string& text) {
    Program prog;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();

        size_t first = raw.find_first_not_of(" \t");
        if (first != std::string::npos && raw.compare(first, 2, "#!") == 0) {
            // Sidecar metadata: "#! op <name> activate=<cycle>"
            auto fs = split_fields(raw.substr(first + 2));
            if (fs.size() == 3 && fs[0].text == "op")
                prog.op_activation[fs[1].text] = parse_kv(fs[2], "activate", line_no);
            continue;
        }
        size_t hash = raw.find('#');
        std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
        auto fs = split_fields(line);
        if (fs.empty()) continue;

        const std::string& m = fs[0].text;
        Instruction in;
        if (m == "@I" || m == "@C") {
            in.kind = m == "@I" ? Instruction::Kind::ConfigI : Instruction::Kind::ConfigC;
            const Field& sf = field(fs, 1, line_no, "slot:FSM");
            std::tie(in.slot, in.fsm) = parse_slot_fsm(sf.text, line_no, sf.col);
            in.option = parse_option(field(fs, 2, line_no, "option"), line_no);
            const Field& last = field(fs, 3, line_no, m == "@I" ? "path" : "function");
            (m == "@I" ? in.path : in.function) = last.text;
            if (fs.size() > 4) throw ParseError(line_no, fs[4].col, "trailing fields");
        } else if (m == "@S") {
            in.kind = Instruction::Kind::ConfigS;
            const Field& sf = field(fs, 1, line_no, "slot:FSM");
            std::tie(in.slot, in.fsm) = parse_slot_fsm(sf.text, line_no, sf.col);
            in.address = parse_kv(field(fs, 2, line_no, "address"), "address", line_no);
            if (fs.size() > 3) throw ParseError(line_no, fs[3].col, "trailing fields");
        } else if (m == "@R") {
            in.kind = Instruction::Kind::ConfigR;
            const Field& sf = field(fs, 1, line_no, "slot:FSM");
            std::tie(in.slot, in.fsm) = parse_slot_fsm(sf.text, line_no, sf.col);
            in.iter = parse_kv(field(fs, 2, line_no, "iter"), "iter", line_no);
            in.step = parse_kv(field(fs, 3, line_no, "step"), "step", line_no);
            in.delay = parse_kv(field(fs, 4, line_no, "delay"), "delay", line_no);
            if (in.iter < 1) throw ParseError(line_no, fs[2].col, "@R iter must be >= 1");
            if (in.delay < 0) throw ParseError(line_no, fs[4].col, "@R delay must be >= 0");
            if (fs.size() > 5) throw ParseError(line_no, fs[5].col, "trailing fields");
        } else if (m == "@T") {
            in.kind = Instruction::Kind::ConfigT;
            const Field& sf = field(fs, 1, line_no, "slot:FSM");
            std::tie(in.slot, in.fsm) = parse_slot_fsm(sf.text, line_no, sf.col);
            in.delay = parse_kv(field(fs, 2, line_no, "delay"), "delay", line_no);
            if (in.delay < 0) throw ParseError(line_no, fs[2].col, "@T delay must be >= 0");
            if (fs.size() > 3) throw ParseError(line_no, fs[3].col, "trailing fields");
        } else if (m == "@W") {
            in.kind = Instruction::Kind::Wait;
            in.delay = parse_kv(field(fs, 1, line_no, "delay"), "delay", line_no);
            if (in.delay < 1) throw ParseError(line_no, fs[1].col, "@W delay must be >= 1");
            if (fs.size() > 2) throw ParseError(line_no, fs[2].col, "trailing fields");
        } else if (m == "@A") {
            in.kind = Instruction::Kind::Activate;
            // Re-join and split on commas: "[slot0:FSM0, slot2:FSM0]"
            size_t lb = line.find('[');
            size_t rb = line.rfind(']');
            if (lb == std::string::npos || rb == std::string::npos || rb < lb)
                throw ParseError(line_no, fs[0].col, "@A expects [slot:FSM, ...]");
            std::string inner = line.substr(lb + 1, rb - lb - 1);
            size_t start = 0;
            while (start <= inner.size()) {
                size_t comma = inner.find(',', start);
                std::string item = inner.substr(
                    start, (comma == std::string::npos ? inner.size() : comma) - start);
                size_t a = item.find_first_not_of(" \t");
                size_t b = item.find_last_not_of(" \t");
                if (a != std::string::npos)
                    in.targets.push_back(parse_slot_fsm(item.substr(a, b - a + 1), line_no,
                                                        static_cast<int>(lb + 2 + start)));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (in.targets.empty())
                throw ParseError(line_no, fs[0].col, "@A target list is empty");
            std::set<std::pair<int, int>> seen(in.targets.begin(), in.targets.end());
            if (seen.size() != in.targets.size())
                throw ParseError(line_no, fs[0].col, "@A has duplicate targets");
        } else {
            throw ParseError(line_no, fs[0].col, "unknown mnemonic '" + m + "'");
        }
        prog.instructions.push_back(std::move(in));
    }
    prog.declared_latency = prog.end_cycle();
    return prog;
}

std::string emit_assembly(const Program& program) {
    std::string out;
    for (const auto& [op, cycle] : program.op_activation)
        out += "#! op " + op + " activate=" + std::to_string(cycle) + "\n";
    for (const auto& in : program.instructions) out += in.text() + "\n";
    return out;
}

}  // namespace cis
