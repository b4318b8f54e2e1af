#include "cis/var_id.hpp"

#include <utility>

namespace cis {

VarId VarId::op_start(std::string op_name) {
    VarId v;
    v.kind = Kind::OpStart;
    v.op = std::move(op_name);
    return v;
}

VarId VarId::delay_sym(std::string name) {
    VarId v;
    v.kind = Kind::DelaySym;
    v.sym = std::move(name);
    return v;
}

VarId VarId::anchor(std::string op_name, int event, std::vector<int> indices) {
    VarId v;
    v.kind = Kind::Anchor;
    v.op = std::move(op_name);
    v.event = event;
    v.indices = std::move(indices);
    return v;
}

VarId VarId::latency() {
    VarId v;
    v.kind = Kind::Latency;
    return v;
}

std::string VarId::text() const {
    switch (kind) {
        case Kind::OpStart:
            return "start(" + op + ")";
        case Kind::DelaySym:
            return sym;
        case Kind::Anchor: {
            std::string s = op + ".e" + std::to_string(event);
            for (int i : indices) s += "[" + std::to_string(i) + "]";
            return s;
        }
        case Kind::Latency:
            return "latency";
    }
    return "?";
}

}  // namespace cis
