#pragma once

#include "mstop/finite.hpp"
#include "mstop/model.hpp"
#include "mstop/powerfn.hpp"

#include <functional>
#include <span>
#include <vector>

namespace mstop {

struct QuadSpec {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int max_depth = 50;
};

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

using RealFunction = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7/15) integral of h over [a, b] with global
/// bisection of the worst interval. Throws QuadratureError when an interval
/// at max_depth still misses the tolerance.
QuadResult adaptive_integrate(const RealFunction& h, double a, double b, const QuadSpec& spec);

/// Resolvent R_q f at x by quadrature of the diffusion integral representation
///
///   B_q^{-1} [ phi_q(x) int_0^x psi_q f m' + psi_q(x) int_x^inf phi_q f m' ],
///
/// computed in y = e^u. Both improper ends are cut where a power majorant of
/// the tail (fitted from the local decay of the integrand) drops below
/// tolerance; the bound is added to the error estimate. `breakpoints` are
/// optional kink locations of f (in y) used to split the integration.
///
/// Throws QuadratureError when the tolerance is not reached or a tail does not
/// decay.
QuadResult quad_resolvent(const RealFunction& f, const GbmModel& model, double discount, double x,
                          const QuadSpec& spec = {}, std::span<const double> breakpoints = {});

QuadResult quad_resolvent(const PiecewisePowerSum& f, const GbmModel& model, double discount,
                          double x, const QuadSpec& spec = {});

/// Ladder rebuilt layer by layer with quadrature. Each H^i is evaluated as
/// g + lambda * quad_resolvent(V^{i-1}) with V^{i-1} taken from the algebra
/// ladder, and x*_i is the maximiser of H^i(x) / x^b found numerically (the
/// threshold form of the least excessive majorant), so neither the delta
/// formula nor resolvent_apply of layer i enters layer i.
struct QuadratureLadder {
    std::vector<double> thresholds;
    std::vector<double> deltas;        // recovered from x*_i through the threshold equation
    std::vector<double> values_at_x0;  // V^i(x0), i = 1..n
    double v_inf_at_x0 = 0.0;          // R_r sigma at x0 by quadrature
};

QuadratureLadder solve_ladder_quadrature(const GbmModel& model, std::size_t n, double x0,
                                         const QuadSpec& spec = {1e-12, 1e-14, 50});

}  // namespace mstop
