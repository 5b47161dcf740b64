#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>

namespace unravel {

// Sparse polynomial in the four quantum-expectation coordinates x0..x3 with
// complex coefficients. Small enough that an ordered map is the right tool.
struct Monomial {
    std::array<std::uint8_t, 4> e{};

    int degree() const { return e[0] + e[1] + e[2] + e[3]; }
    bool operator<(const Monomial& o) const { return e < o.e; }
    bool operator==(const Monomial& o) const { return e == o.e; }

    Monomial times(const Monomial& o) const {
        Monomial m;
        for (int i = 0; i < 4; ++i) m.e[i] = static_cast<std::uint8_t>(e[i] + o.e[i]);
        return m;
    }
};

class Poly {
  public:
    using coeff_t = std::complex<double>;
    using term_map = std::map<Monomial, coeff_t>;

    Poly() = default;
    static Poly constant(coeff_t c) {
        Poly p;
        if (c != 0.0) p.terms_[Monomial{}] = c;
        return p;
    }
    static Poly variable(int i, coeff_t c = 1.0) {
        Poly p;
        Monomial m;
        m.e[static_cast<std::size_t>(i)] = 1;
        p.terms_[m] = c;
        return p;
    }

    const term_map& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
        return d;
    }
    double max_abs_coeff() const {
        double v = 0.0;
        for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
        return v;
    }
    double max_abs_imag() const {
        double v = 0.0;
        for (const auto& [m, c] : terms_) v = std::max(v, std::abs(std::imag(c)));
        return v;
    }

    void add_term(const Monomial& m, coeff_t c) {
        if (c == 0.0) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_[m] = c;
        } else {
            it->second += c;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    Poly& operator+=(const Poly& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }

    friend Poly operator*(const Poly& a, const Poly& b) {
        Poly r;
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) r.add_term(ma.times(mb), ca * cb);
        return r;
    }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }
    Poly& operator*=(coeff_t s) {
        if (s == 0.0) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, c] : terms_) c *= s;
        return *this;
    }
    friend Poly operator*(Poly a, coeff_t s) { return a *= s; }
    friend Poly operator*(coeff_t s, Poly a) { return a *= s; }

    Poly conjugated() const {
        Poly r;
        for (const auto& [m, c] : terms_) r.terms_[m] = std::conj(c);
        return r;
    }

    /// Multiply by x_v^k.
    Poly shifted(int v, int k) const {
        Poly r;
        for (const auto& [m, c] : terms_) {
            Monomial n = m;
            n.e[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(n.e[v] + k);
            r.terms_[n] = c;
        }
        return r;
    }

  private:
    term_map terms_;
};

struct PolyDivision {
    Poly quotient;
    Poly remainder;
};

/// Divides by an affine divisor c + b*x_v with b != 0 in exactly one variable
/// (synthetic division along x_v; the remainder is free of x_v).
PolyDivision divide_affine(const Poly& num, const Poly& divisor);

inline PolyDivision divide_affine(const Poly& num, const Poly& divisor) {
    int var = -1;
    std::complex<double> b = 0.0, c = 0.0;
    for (const auto& [m, coef] : divisor.terms()) {
        if (m.degree() == 0) {
            c = coef;
        } else if (m.degree() == 1) {
            for (int v = 0; v < 4; ++v)
                if (m.e[v] == 1) {
                    if (var >= 0 && var != v) throw std::invalid_argument("divisor must be affine in one variable");
                    var = v;
                    b = coef;
                }
        } else {
            throw std::invalid_argument("divisor must be affine");
        }
    }
    if (var < 0 || b == 0.0) throw std::invalid_argument("divisor has no linear part");

    // Work down from the highest power of x_var. The leading terms are
    // removed exactly so float dust cannot stall the loop; any inexactness
    // surfaces in the remainder where callers check it.
    PolyDivision out;
    Poly rest = num;
    for (;;) {
        int top = 0;
        for (const auto& [m, coef] : rest.terms()) top = std::max<int>(top, m.e[var]);
        if (top == 0) break;
        Poly q_part, top_terms;
        for (const auto& [m, coef] : rest.terms()) {
            if (m.e[var] == top) {
                Monomial n = m;
                n.e[var] = static_cast<std::uint8_t>(top - 1);
                q_part.add_term(n, coef / b);
                top_terms.add_term(m, coef);
            }
        }
        out.quotient += q_part;
        rest -= top_terms;
        rest -= q_part * Poly::constant(c);
    }
    out.remainder = rest;
    return out;
}

} // namespace unravel
