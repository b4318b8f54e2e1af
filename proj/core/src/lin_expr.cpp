#include "cis/lin_expr.hpp"

#include "cis/error.hpp"

namespace cis {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError();
    return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError();
    return r;
}

LinExpr LinExpr::var(const VarId& v, std::int64_t coeff) {
    LinExpr e;
    if (coeff != 0) e.terms_[v] = coeff;
    return e;
}

std::int64_t LinExpr::coeff(const VarId& v) const {
    auto it = terms_.find(v);
    return it == terms_.end() ? 0 : it->second;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    constant_ = checked_add(constant_, o.constant_);
    for (const auto& [v, c] : o.terms_) {
        std::int64_t nc = checked_add(coeff(v), c);
        if (nc == 0)
            terms_.erase(v);
        else
            terms_[v] = nc;
    }
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
    return *this += o * -1;
}

LinExpr& LinExpr::operator*=(std::int64_t k) {
    if (k == 0) {
        constant_ = 0;
        terms_.clear();
        return *this;
    }
    constant_ = checked_mul(constant_, k);
    for (auto& [v, c] : terms_) c = checked_mul(c, k);
    return *this;
}

std::int64_t LinExpr::evaluate(const std::map<VarId, std::int64_t>& assignment) const {
    std::int64_t acc = constant_;
    for (const auto& [v, c] : terms_) {
        auto it = assignment.find(v);
        if (it == assignment.end()) throw EvalError("unbound variable " + v.text());
        acc = checked_add(acc, checked_mul(c, it->second));
    }
    return acc;
}

LinExpr LinExpr::substitute(const std::map<VarId, std::int64_t>& partial) const {
    LinExpr out(constant_);
    for (const auto& [v, c] : terms_) {
        auto it = partial.find(v);
        if (it == partial.end())
            out.terms_[v] = c;
        else
            out.constant_ = checked_add(out.constant_, checked_mul(c, it->second));
    }
    return out;
}

std::string LinExpr::text() const {
    std::string s;
    for (const auto& [v, c] : terms_) {
        if (s.empty()) {
            if (c < 0) s += "-";
        } else {
            s += c < 0 ? "-" : "+";
        }
        std::int64_t m = c < 0 ? -c : c;
        if (m != 1) s += std::to_string(m) + "*";
        s += v.text();
    }
    if (s.empty()) return std::to_string(constant_);
    if (constant_ > 0)
        s += "+" + std::to_string(constant_);
    else if (constant_ < 0)
        s += std::to_string(constant_);
    return s;
}

}  // namespace cis
