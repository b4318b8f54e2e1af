#ifndef CIS_VAR_ID_HPP
#define CIS_VAR_ID_HPP

#include <compare>
#include <string>
#include <vector>

namespace cis {

// A solver/timing variable. Four kinds share one identifier type so linear
// expressions can mix them freely:
//   OpStart   start(op)       start cycle of an operation's root
//   DelaySym  t1              symbolic delay parameter
//   Anchor    op.e0[i][j]     concrete anchor of one event instance
//   Latency   latency         the objective variable
struct VarId {
    enum class Kind { OpStart, DelaySym, Anchor, Latency };

    Kind kind = Kind::Latency;
    std::string op;            // OpStart, Anchor
    std::string sym;           // DelaySym
    int event = 0;             // Anchor: event ordinal within the op
    std::vector<int> indices;  // Anchor: repeat indices, outermost first

    static VarId op_start(std::string op_name);
    static VarId delay_sym(std::string name);
    static VarId anchor(std::string op_name, int event, std::vector<int> indices);
    static VarId latency();

    std::string text() const;

    friend auto operator<=>(const VarId&, const VarId&) = default;
};

}  // namespace cis

#endif
