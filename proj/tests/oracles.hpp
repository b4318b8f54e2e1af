// Independent reference implementations the tests trust instead of the
// library's own algebra: a literal tree unroller for anchor firing cycles
// and a brute-force enumerator for minimum latency. Kept deliberately
// naive — correctness over speed.
#ifndef CIS_TESTS_ORACLES_HPP
#define CIS_TESTS_ORACLES_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "cis/model.hpp"
#include "cis/timing.hpp"

namespace oracles {

// Walks the expression tree cycle by cycle and records when every event
// instance fires. Returns the subtree's total duration.
inline std::int64_t unroll(const cis::OpExpr& e, std::int64_t t0,
                           const std::map<std::string, std::int64_t>& delays,
                           std::vector<int>& idx,
                           std::map<cis::VarId, std::int64_t>& fired,
                           const std::string& op) {
    auto delay_of = [&](const cis::DelayTerm& d) {
        return d.kind == cis::DelayTerm::Kind::Constant ? d.value : delays.at(d.name);
    };
    switch (e.kind) {
        case cis::OpExpr::Kind::Event:
            fired[cis::VarId::anchor(op, e.event, idx)] = t0;
            return 1;
        case cis::OpExpr::Kind::Repeat: {
            std::int64_t d = delay_of(e.delay);
            std::int64_t t = t0;
            std::int64_t last_end = t0;
            for (int k = 0; k < e.iter; ++k) {
                idx.push_back(k);
                std::int64_t child = unroll(*e.left, t, delays, idx, fired, op);
                idx.pop_back();
                last_end = t + child;
                t = last_end + d;
            }
            return last_end - t0;
        }
        default: {
            std::int64_t dl = unroll(*e.left, t0, delays, idx, fired, op);
            std::int64_t d = delay_of(e.delay);
            std::int64_t dr = unroll(*e.right, t0 + dl + d, delays, idx, fired, op);
            return dl + d + dr;
        }
    }
}

// All anchor firing times of a single-operation model started at cycle 0.
inline std::map<cis::VarId, std::int64_t> unroll_op(
    const cis::OperationDef& op, const std::map<std::string, std::int64_t>& delays) {
    std::map<cis::VarId, std::int64_t> fired;
    std::vector<int> idx;
    unroll(*op.expr, 0, delays, idx, fired, op.name);
    return fired;
}

// Minimum latency by full enumeration of op starts and delay symbols over
// [0, domain_max]; -1 when nothing is feasible.
inline std::int64_t exhaustive_min_latency(const cis::Model& model, std::int64_t domain_max,
                                           size_t* n_vars = nullptr) {
    using namespace cis;
    std::set<VarId> delay_set;
    std::set<Anchor> anchors;
    for (const auto& op : model.operations) {
        LinExpr end = op_end_time(model, op.name);
        for (const auto& [v, a] : end.terms())
            if (v.kind == VarId::Kind::DelaySym) delay_set.insert(v);
    }
    for (const auto& c : model.constraints)
        for (const auto* side : {&c.lhs, &c.rhs})
            for (const Anchor& a : anchors_in(*side)) {
                anchors.insert(a);
                LinExpr at = anchor_time(model, a);
                for (const auto& [v, coeff] : at.terms())
                    if (v.kind == VarId::Kind::DelaySym) delay_set.insert(v);
            }

    std::vector<VarId> vars;
    for (const auto& op : model.operations) vars.push_back(VarId::op_start(op.name));
    vars.insert(vars.end(), delay_set.begin(), delay_set.end());
    if (n_vars) *n_vars = vars.size();

    std::map<VarId, std::int64_t> assign;
    std::int64_t best = -1;
    std::function<void(size_t)> rec = [&](size_t i) {
        if (i == vars.size()) {
            std::map<VarId, std::int64_t> full = assign;
            for (const Anchor& a : anchors) full[a.var()] = anchor_time(model, a).evaluate(assign);
            for (const auto& c : model.constraints)
                if (!c.holds(c.lhs.evaluate(full), c.rhs.evaluate(full))) return;
            std::int64_t lat = 0;
            for (const auto& op : model.operations)
                lat = std::max(lat, op_end_time(model, op.name).evaluate(assign));
            if (best < 0 || lat < best) best = lat;
            return;
        }
        for (std::int64_t v = 0; v <= domain_max; ++v) {
            assign[vars[i]] = v;
            rec(i + 1);
        }
    };
    rec(0);
    return best;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace oracles

#endif
