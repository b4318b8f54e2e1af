#ifndef CIS_LIN_EXPR_HPP
#define CIS_LIN_EXPR_HPP

#include <cstdint>
#include <map>
#include <string>

#include "cis/var_id.hpp"

namespace cis {

// Integer-affine expression: constant + sum(coeff * var). Canonical form:
// zero coefficients are never stored, so operator== is structural equality.
// All arithmetic is overflow-checked (cycle math must never wrap).
class LinExpr {
public:
    LinExpr() = default;
    explicit LinExpr(std::int64_t constant) : constant_(constant) {}
    explicit LinExpr(const VarId& v) { terms_[v] = 1; }

    static LinExpr var(const VarId& v, std::int64_t coeff);

    std::int64_t constant() const { return constant_; }
    const std::map<VarId, std::int64_t>& terms() const { return terms_; }
    bool is_constant() const { return terms_.empty(); }
    std::int64_t coeff(const VarId& v) const;

    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(std::int64_t k);
    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(LinExpr a, std::int64_t k) { return a *= k; }
    friend LinExpr operator*(std::int64_t k, LinExpr a) { return a *= k; }

    friend bool operator==(const LinExpr&, const LinExpr&) = default;

    // Throws EvalError if a variable has no binding.
    std::int64_t evaluate(const std::map<VarId, std::int64_t>& assignment) const;

    // Replaces bound variables by their values; unbound ones stay symbolic.
    LinExpr substitute(const std::map<VarId, std::int64_t>& partial) const;

    // Terms in VarId order, constant last: "start(a)+2*t1+17*t2+19".
    std::string text() const;

private:
    std::int64_t constant_ = 0;
    std::map<VarId, std::int64_t> terms_;
};

// Overflow-checked int64 helpers (throw OverflowError).
std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);

}  // namespace cis

#endif
