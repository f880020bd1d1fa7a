//! Exact gap distribution for sequential adsorption of fixed-length segments.
//!
//! Reduced units throughout (`R = 1`, `ℓ = 1`, so `τ = 1`). With
//!
//! ```text
//! Ein(u) = ∫₀ᵘ (1 − e^{−v})/v dv,      Φ(u) = exp(−2·Ein(u))
//! ```
//!
//! the gap density on an initially empty line is
//!
//! ```text
//! G(x,t) = t²·e^{−t(x−1)}·Φ(t)            x ≥ 1
//! G(x,t) = 2∫₀ᵗ u·e^{−ux}·Φ(u) du         0 ≤ x < 1
//! ```
//!
//! and the covered fraction is `ℓ·n(t) = ∫₀ᵗ Φ(u) du`. For large `u`,
//! `u²Φ(u) → e^{−2γ}`, hence `G(0,t) ≈ 2e^{−2γ}·ln t`.

use crate::quad::{geometric_breaks, integrate, integrate_pieces};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Series region of `Ein` is `u ≤ SERIES_MAX`.
const SERIES_MAX: f64 = 1.0;
/// Above this, `Ein(u) = ln u + γ + E₁(u)` with the asymptotic `E₁`.
const ASYMPTOTIC_MIN: f64 = 30.0;

/// `e^{−2γ}`, the limit of `u²Φ(u)`.
pub fn phi_tail_constant() -> f64 {
    (-2.0 * EULER_GAMMA).exp()
}

/// Alternating series `Σ_{k≥1} (−1)^{k+1} u^k / (k·k!)`.
pub fn ein_series(u: f64) -> f64 {
    let mut term = u; // u^k / k!
    let mut sum = 0.0;
    let mut k = 1.0;
    loop {
        let contrib = term / k;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(1e-300) || k > 200.0 {
            return sum;
        }
        k += 1.0;
        term *= -u / k;
    }
}

/// `ln u + γ + E₁(u)` with `E₁(u) ≈ e^{−u}/u·Σ (−1)^k k!/u^k`, for large `u`.
pub fn ein_asymptotic(u: f64) -> f64 {
    let mut e1_series = 0.0;
    let mut term = 1.0;
    for k in 0..12 {
        e1_series += term;
        term *= -((k + 1) as f64) / u;
    }
    u.ln() + EULER_GAMMA + (-u).exp() / u * e1_series
}

/// Evaluator for the exact solution with a fixed quadrature tolerance.
#[derive(Clone, Copy, Debug)]
pub struct ExactSolver {
    tolerance: f64,
    ein_one: f64,
}

impl Default for ExactSolver {
    fn default() -> Self {
        Self::with_tolerance(1e-10)
    }
}

impl ExactSolver {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self { tolerance, ein_one: ein_series(SERIES_MAX) }
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `Ein(u)`: series, then adaptive quadrature, then the asymptotic form.
    pub fn ein(&self, u: f64) -> f64 {
        if u <= SERIES_MAX {
            ein_series(u)
        } else if u <= ASYMPTOTIC_MIN {
            self.ein_one + self.ein_quadrature(SERIES_MAX, u)
        } else {
            ein_asymptotic(u)
        }
    }

    /// `∫_a^b (1 − e^{−v})/v dv` by adaptive Gauss–Kronrod.
    pub fn ein_quadrature(&self, a: f64, b: f64) -> f64 {
        // keeps the inner integral well below the outer tolerance
        let tol = (self.tolerance * 1e-3).max(1e-15);
        integrate(|v: f64| -(-v).exp_m1() / v, a, b, tol, tol)
    }

    /// `Φ(u) = exp(−2·Ein(u))`.
    pub fn phi(&self, u: f64) -> f64 {
        (-2.0 * self.ein(u)).exp()
    }

    /// `G(x, t)` in reduced units.
    pub fn gap(&self, x: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            t * t * (-t * (x - 1.0)).exp() * self.phi(t)
        } else {
            let breaks = geometric_breaks(t, &[ASYMPTOTIC_MIN]);
            2.0 * integrate_pieces(|u| u * (-u * x).exp() * self.phi(u), &breaks, self.tolerance, self.tolerance)
        }
    }

    /// `G(0, t)`, the value at contact.
    pub fn contact_value(&self, t: f64) -> f64 {
        self.gap(0.0, t)
    }

    /// Covered fraction `ℓ·n(t) = ∫₀ᵗ Φ`. Accepts `t = +∞` (jamming limit).
    pub fn coverage(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let head_end = t.min(ASYMPTOTIC_MIN);
        let breaks = geometric_breaks(head_end, &[]);
        let head = integrate_pieces(|u| self.phi(u), &breaks, self.tolerance, self.tolerance);
        if t <= ASYMPTOTIC_MIN {
            return head;
        }
        if t.is_infinite() {
            // Φ(u) = e^{−2γ}/u²·(1 − O(e^{−u}/u)) beyond u = 30
            return head + phi_tail_constant() / ASYMPTOTIC_MIN;
        }
        let breaks: Vec<f64> = std::iter::successors(Some(ASYMPTOTIC_MIN), |b| Some(b * 2.0))
            .take_while(|&b| b < t)
            .chain(std::iter::once(t))
            .collect();
        head + integrate_pieces(|u| self.phi(u), &breaks, self.tolerance, self.tolerance)
    }

    /// Number density of gaps, equal to the segment density: `n = coverage/ℓ`.
    pub fn density(&self, t: f64) -> f64 {
        self.coverage(t)
    }

    /// Samples `(x, G(x,t))` at `x = j·dx` for `j = 0..=⌊x_max/dx⌋`.
    pub fn curve(&self, t: f64, dx: f64, x_max: f64) -> Vec<(f64, f64)> {
        let n = (x_max / dx + 1e-9).floor() as usize;
        (0..=n)
            .map(|j| {
                let x = j as f64 * dx;
                (x, self.gap(x, t))
            })
            .collect()
    }

    /// `∂G/∂t` from the closed form.
    pub fn time_derivative(&self, x: f64, t: f64) -> f64 {
        if x >= 1.0 {
            self.gap(x, t) * (2.0 * (-t).exp() / t - (x - 1.0))
        } else {
            2.0 * t * (-t * x).exp() * self.phi(t)
        }
    }

    /// `2∫_{x+1}^∞ G(y, t) dy` by quadrature of [`gap`](Self::gap).
    pub fn creation_integral(&self, x: f64, t: f64) -> f64 {
        let a = x + 1.0;
        let b = a + 40.0 / t;
        let head = integrate(|y| self.gap(y, t), a, b, self.tolerance * 1e-2, self.tolerance * 1e-2);
        // beyond b the integrand is exactly exponential in y
        2.0 * (head + self.gap(b, t) / t)
    }

    /// Residual of the fixed-length kinetic equation
    /// `∂G/∂t + (x − 1)₊·G − 2∫_{x+1}^∞ G`, with the time derivative taken by
    /// Richardson-extrapolated central differences of [`gap`](Self::gap).
    pub fn equation_residual(&self, x: f64, t: f64) -> f64 {
        let h = 0.02 * t.min(1.0);
        let central = |h: f64| (self.gap(x, t + h) - self.gap(x, t - h)) / (2.0 * h);
        let dg_dt = (4.0 * central(0.5 * h) - central(h)) / 3.0;
        dg_dt + (x - 1.0).max(0.0) * self.gap(x, t) - self.creation_integral(x, t)
    }

    /// Average of `G(·, t)` over each bin `[k·w, (k+1)·w)` for `k < bins`.
    pub fn binned(&self, t: f64, bin_width: f64, bins: usize) -> Vec<f64> {
        (0..bins)
            .map(|k| {
                let (a, b) = (k as f64 * bin_width, (k + 1) as f64 * bin_width);
                let mut breaks = vec![a, b];
                if a < 1.0 && b > 1.0 {
                    breaks.insert(1, 1.0);
                }
                integrate_pieces(|x| self.gap(x, t), &breaks, self.tolerance, self.tolerance) / bin_width
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    // Oracle values recomputed with 30-digit arithmetic (independent quadrature
    // of the defining integrals) before wiring these tests.
    const PHI_ONE: f64 = 0.203_274_255_668_101_95;
    const EIN_ONE: f64 = 0.796_599_599_297_053_1;
    const JAMMING: f64 = 0.747_597_920_253_411_4;
    const COVERAGE_ONE: f64 = 0.471_424_633_908_587_4;

    #[test]
    fn series_value_at_one() {
        assert_relative_eq!(ein_series(1.0), EIN_ONE, max_relative = 1e-15);
    }

    #[test]
    fn phi_values() {
        let s = ExactSolver::default();
        assert_eq!(s.phi(0.0), 1.0);
        assert_relative_eq!(s.phi(1.0), PHI_ONE, max_relative = 1e-14);
        let u: f64 = 1.0e6;
        assert_relative_eq!(u * u * s.phi(u), phi_tail_constant(), max_relative = 1e-12);
        assert_relative_eq!(phi_tail_constant(), 0.315_236_751_687_193_4, max_relative = 1e-15);
    }

    #[test]
    fn quadrature_agrees_with_series_on_overlap() {
        let s = ExactSolver::with_tolerance(1e-13);
        for &u in &[0.25, 0.5, 1.0, 2.0, 3.0] {
            let q = s.ein_quadrature(1e-300, u);
            assert!((q - ein_series(u)).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn switchover_to_asymptotic_is_seamless() {
        let s = ExactSolver::with_tolerance(1e-13);
        for &u in &[25.0, 30.0, 35.0] {
            let q = s.ein_one + s.ein_quadrature(1.0, u);
            assert!((q - ein_asymptotic(u)).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn coverage_values() {
        let s = ExactSolver::with_tolerance(1e-12);
        assert_relative_eq!(s.coverage(1.0), COVERAGE_ONE, max_relative = 1e-11);
        assert!((s.coverage(f64::INFINITY) - JAMMING).abs() < 1e-10);
        let t = 1e-4;
        assert_relative_eq!(s.coverage(t), t, max_relative = 1e-3);
        // coverage is continuous across the asymptotic switch
        assert!((s.coverage(30.0 + 1e-9) - s.coverage(30.0)).abs() < 1e-10);
    }

    #[test]
    fn coverage_derivative_is_phi() {
        let s = ExactSolver::with_tolerance(1e-13);
        for &t in &[0.5, 2.0, 7.0] {
            let h = 1e-3;
            let fd = (s.coverage(t + h) - s.coverage(t - h)) / (2.0 * h);
            assert!((fd - s.phi(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn empty_initial_line() {
        let s = ExactSolver::default();
        for &x in &[0.0, 0.5, 1.0, 3.0] {
            assert_eq!(s.gap(x, 0.0), 0.0);
        }
    }

    #[test]
    fn branches_join_at_contact_length() {
        let s = ExactSolver::with_tolerance(1e-13);
        for &t in &[0.5, 3.0, 40.0] {
            assert_relative_eq!(s.gap(1.0 - 1e-12, t), s.gap(1.0, t), max_relative = 1e-9);
        }
    }

    #[test]
    fn late_time_jump_at_contact_length() {
        let s = ExactSolver::default();
        let t = 200.0;
        assert!(s.gap(1.0 - 1e-3, t) > 0.1);
        assert!(s.gap(1.05, t) < 1e-4);
    }

    #[test]
    fn moments_match_coverage() {
        let s = ExactSolver::with_tolerance(1e-12);
        for &t in &[0.5, 2.0, 8.0] {
            let n = integrate_pieces(|x| s.gap(x, t), &[0.0, 1.0, 2.0, 40.0], 1e-11, 1e-11) + s.gap(40.0, t) / t;
            let first = integrate_pieces(|x| x * s.gap(x, t), &[0.0, 1.0, 2.0, 40.0], 1e-11, 1e-11)
                + s.gap(40.0, t) * (40.0 / t + 1.0 / (t * t));
            assert_relative_eq!(n, s.coverage(t), max_relative = 1e-8);
            assert!((n + first - 1.0).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn closed_form_solves_kinetic_equation() {
        let s = ExactSolver::with_tolerance(1e-13);
        for &t in &[0.1, 1.0, 4.0, 10.0] {
            for &x in &[0.0, 0.4, 0.99, 1.0, 2.5, 5.0] {
                let r = s.equation_residual(x, t);
                assert!(r.abs() < 1e-8, "x = {x}, t = {t}: {r:e}");
                let analytic = s.time_derivative(x, t) + (x - 1.0).max(0.0) * s.gap(x, t);
                assert!((analytic - s.creation_integral(x, t)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn contact_value_grows() {
        let s = ExactSolver::default();
        let v: Vec<f64> = [1.0, 2.0, 4.0, 6.0, 8.0].iter().map(|&t| s.contact_value(t)).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }
}
