#pragma once

#include "mstop/model.hpp"

#include <cstddef>
#include <vector>

namespace mstop {

/// coef * x^exponent * (ln x)^log_power on (0, inf).
///
/// Log powers only appear after applying a resolvent to a term that is
/// resonant with the discount (exponent equal to psi_q or phi_q) on a bounded
/// piece; for plain power sums log_power stays 0.
struct PowerTerm {
    double coef = 0.0;
    double exponent = 0.0;
    int log_power = 0;
};

double eval_term(const PowerTerm& t, double x);

/// Exponents closer than this are treated as equal when merging terms.
inline constexpr double kExponentMergeTol = 1e-12;
/// Coefficients smaller in magnitude are dropped.
inline constexpr double kCoefFloor = 1e-300;
/// A power integral of y^s with |s + 1| below this produces a log term.
inline constexpr double kLogSnapTol = 1e-9;

/// Function on (0, inf) given by a sum of PowerTerms on each interval
/// (0, x_1], (x_1, x_2], ..., (x_m, inf). Intervals are right-closed.
///
/// Pieces are kept canonical: exponents within a piece are distinct (up to
/// kExponentMergeTol), sorted ascending, and zero coefficients are removed.
class PiecewisePowerSum {
public:
    using Piece = std::vector<PowerTerm>;

    /// The zero function.
    PiecewisePowerSum();

    /// Throws std::invalid_argument unless breakpoints are positive, finite and
    /// strictly increasing and there is exactly one more piece than breakpoints.
    PiecewisePowerSum(std::vector<double> breakpoints, std::vector<Piece> pieces);

    static PiecewisePowerSum constant(double c);
    static PiecewisePowerSum power(double coef, double exponent);
    static PiecewisePowerSum from_terms(Piece terms);

    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    const std::vector<Piece>& pieces() const noexcept { return pieces_; }
    std::size_t piece_count() const noexcept { return pieces_.size(); }

    /// Index of the piece containing x (binary search, right-closed).
    std::size_t piece_index(double x) const;

    /// Throws std::domain_error for x <= 0.
    double operator()(double x) const;

    /// Evaluates piece `index` at x regardless of whether x lies in it; used
    /// for one-sided limits at breakpoints.
    double eval_piece(std::size_t index, double x) const;

    bool is_zero() const noexcept;

private:
    std::vector<double> breakpoints_;
    std::vector<Piece> pieces_;
};

/// Sorts, merges equal exponents and drops negligible coefficients.
PiecewisePowerSum::Piece canonicalize(PiecewisePowerSum::Piece terms);

/// cf * f + cg * g over the union of both breakpoint sets.
PiecewisePowerSum combine(const PiecewisePowerSum& f, const PiecewisePowerSum& g, double cf,
                          double cg);

PiecewisePowerSum operator+(const PiecewisePowerSum& f, const PiecewisePowerSum& g);
PiecewisePowerSum operator-(const PiecewisePowerSum& f, const PiecewisePowerSum& g);
PiecewisePowerSum operator*(double c, const PiecewisePowerSum& f);

/// Piecewise derivative d/dx f (one-sided at breakpoints).
PiecewisePowerSum derivative(const PiecewisePowerSum& f);

/// d/dx (f(x) / x^p), piecewise.
PiecewisePowerSum ratio_derivative(const PiecewisePowerSum& f, double p);

/// x^p * f(x).
PiecewisePowerSum times_power(const PiecewisePowerSum& f, double p);

/// `lower` on (0, at] and `upper` on (at, inf). Breakpoints of `lower` above
/// `at` and of `upper` below `at` are dropped.
PiecewisePowerSum splice(const PiecewisePowerSum& lower, const PiecewisePowerSum& upper,
                         double at);

/// Exact integral of f over (lo, hi); lo may be 0 and hi may be +inf.
/// Throws ResolventError when an improper end does not converge.
double integrate(const PiecewisePowerSum& f, double lo, double hi);

/// Generator of GBM applied term-wise: (A f)(x) = sigma^2/2 x^2 f'' + mu x f'.
PiecewisePowerSum generator_apply(const PiecewisePowerSum& f, const GbmModel& model);

/// Exact resolvent R_q f through the integral representation
///
///   (R_q f)(x) = B_q^{-1} [ phi_q(x) int_0^x psi_q f m' + psi_q(x) int_x^inf phi_q f m' ].
///
/// Every integrand is a power-log term, so each piece integrates in closed
/// form. Output breakpoints equal input breakpoints.
///
/// Preconditions: exponents on the leftmost piece exceed phi_q's and those on
/// the rightmost piece are below psi_q's. Violations throw ResolventError
/// (Resonance when the exponent coincides with psi_q/phi_q, Divergence
/// otherwise).
PiecewisePowerSum resolvent_apply(const PiecewisePowerSum& f, const HarmonicPair& kernel,
                                  const GbmModel& model);

PiecewisePowerSum resolvent_apply(const PiecewisePowerSum& f, const GbmModel& model,
                                  double discount);

/// (x - K)^+ as a two-piece power sum.
PiecewisePowerSum call_payoff(double strike);

/// Largest |coefficient| over all pieces; 0 for the zero function.
double max_abs_coef(const PiecewisePowerSum& f);

}  // namespace mstop
