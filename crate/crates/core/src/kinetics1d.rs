//! Deterministic solver for the gap-density kinetic equation on the line,
//!
//! ```text
//! ∂G/∂t = −(x − ℓ)₊·G + 2∫_{x+ℓ}^∞ G(y) dy + ℓ̇·∂G/∂x,     x ≥ 0,
//! ```
//!
//! in reduced units (`R = 1`, `ℓ(∞) = 1`, `τ = 1`), started from a small-time
//! exponential profile on an empty line.
//!
//! Each step is split:
//!
//! * destruction is applied exactly as a factor `exp(−(x − ℓ)₊·Δt/2)` before
//!   and after the creation sub-step (Strang splitting);
//! * creation `2∫_{x+ℓ}^∞ G` is integrated with explicit midpoint RK2, the
//!   integral taken from suffix trapezoid sums with linear interpolation;
//! * drift is exact: the nodes ride the characteristics `dx/dt = −ℓ̇`. The
//!   sub-cell offset accumulates in `drift` and the array shifts one cell
//!   right whenever it reaches `Δx`.
//!
//! Between `x = 0` and the first node lies a strip narrower than one cell
//! whose gaps were all created after they entered the domain at zero length.
//! Its profile follows from the characteristics: `G(x,t) = C(t) − C(t_e(x))`
//! with `C` the cumulative creation rate at contact and `t_e(x)` the entry
//! time solving `ℓ(t_e) − ℓ(t) = x`. In particular `G(0,t) = 0` exactly for
//! every shrinking schedule.

use crate::error::{Error, Result};
use crate::schedules::SizeSchedule;

/// Values below this fraction of the maximum are dropped from the tail.
const TAIL_CUTOFF: f64 = 1e-30;
/// Upper bound on any single time step, in units of `τ`.
pub const MAX_STEP: f64 = 0.1;
/// The recommended step is also capped at `Δx·min(STEP_PER_CELL, t)`, so the
/// time error shrinks with the grid. Early profiles span `x ~ 1/t`, where both
/// rates are large, hence the factor `t`.
pub const STEP_PER_CELL: f64 = 20.0;
/// Cells next to contact whose profile is interpolated in entry time.
const NEAR_CONTACT_CELLS: usize = 64;

/// Diagnostics reported by [`KineticState::diagnostics`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub time: f64,
    pub density: f64,
    pub conservation_residual: f64,
    pub total_shift: f64,
}

/// Discretized gap density.
#[derive(Clone, Debug)]
pub struct KineticState {
    schedule: SizeSchedule,
    dx: f64,
    /// `values[j]` sits at `x = j·Δx + drift`.
    values: Vec<f64>,
    /// Nodes at and beyond this index are zero.
    active: usize,
    time: f64,
    start_time: f64,
    drift: f64,
    shifts: usize,
    /// `(t, C(t))` with `C` the time integral of the creation rate at contact.
    history: Vec<(f64, f64)>,
}

impl KineticState {
    /// Bootstraps the solution at `t0` with `G = A·e^{−t0·x}` for `x > 0`,
    /// `A = t0²/(1 + t0·ℓ(t0))`, which satisfies `ℓn + ∫xG = 1` exactly.
    /// `G(0, t0) = 0` for shrinking schedules.
    pub fn initialize(schedule: SizeSchedule, t0: f64, dx: f64, x_max: f64) -> Result<Self> {
        if !(t0 > 0.0 && t0 <= MAX_STEP) {
            return Err(Error::Config(format!("bootstrap time must lie in (0, 0.1], got {t0}")));
        }
        if !(dx > 0.0 && dx <= 0.1) {
            return Err(Error::Config(format!("dx must lie in (0, 0.1], got {dx}")));
        }
        if !(x_max >= 30.0 / t0) {
            return Err(Error::Config(format!("x_max = {x_max} too small for t0 = {t0}; need at least {}", 30.0 / t0)));
        }
        let nodes = (x_max / dx).round() as usize + 1;
        let ell = schedule.reduced_size(t0);
        let amplitude = t0 * t0 / (1.0 + t0 * ell);
        let mut values: Vec<f64> = (0..nodes).map(|j| amplitude * (-t0 * j as f64 * dx).exp()).collect();
        if schedule.is_shrinking() {
            values[0] = 0.0;
        }
        let mut state = Self {
            schedule,
            dx,
            values,
            active: nodes,
            time: t0,
            start_time: t0,
            drift: 0.0,
            shifts: 0,
            history: vec![(t0, 0.0)],
        };
        state.trim_tail();
        Ok(state)
    }

    /// Same as [`initialize`](Self::initialize) with `x_max = 30/t0`.
    pub fn bootstrap(schedule: SizeSchedule, t0: f64, dx: f64) -> Result<Self> {
        Self::initialize(schedule, t0, dx, 30.0 / t0)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn schedule(&self) -> &SizeSchedule {
        &self.schedule
    }

    pub fn segment_length(&self) -> f64 {
        self.schedule.reduced_size(self.time)
    }

    /// Node values; `values()[j]` belongs to [`node_position(j)`](Self::node_position).
    pub fn values(&self) -> &[f64] {
        &self.values[..self.active]
    }

    pub fn node_position(&self, j: usize) -> f64 {
        j as f64 * self.dx + self.drift
    }

    /// Largest Δt the accuracy constraint admits at the current time.
    pub fn max_step(&self) -> f64 {
        let rate = self.schedule.reduced_rate(self.time).abs();
        MAX_STEP.min(self.dx / rate.max(f64::MIN_POSITIVE))
    }

    /// Step used by [`advance_to`](Self::advance_to).
    pub fn recommended_step(&self) -> f64 {
        self.max_step().min(self.dx * self.time.min(STEP_PER_CELL))
    }

    /// Advances by `dt`, rejecting steps that violate
    /// `Δt ≤ min(0.1, Δx/|ℓ̇|)`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::StepRejected(format!("time step must be positive, got {dt}")));
        }
        let limit = self.max_step();
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::StepRejected(format!(
                "dt = {dt} exceeds min(0.1, dx/|rate|) = {limit} at t = {}",
                self.time
            )));
        }
        let t = self.time;
        let t_mid = t + 0.5 * dt;
        let t_end = t + dt;
        let ell_now = self.schedule.reduced_size(t);
        let ell_mid = self.schedule.reduced_size(t_mid);
        let drift_mid = self.drift + (ell_now - ell_mid);

        self.destroy_half(ell_mid, drift_mid, dt);
        let contact_rate = self.create(ell_mid, drift_mid, dt);
        self.destroy_half(ell_mid, drift_mid, dt);

        let cumulative = self.history.last().map_or(0.0, |h| h.1) + contact_rate * dt;
        self.history.push((t_end, cumulative));
        self.time = t_end;
        self.drift += ell_now - self.schedule.reduced_size(t_end);
        while self.drift >= self.dx {
            self.drift -= self.dx;
            self.shift_right();
        }
        self.trim_tail();
        self.prune_history();
        Ok(())
    }

    /// Steps with [`recommended_step`](Self::recommended_step) until exactly `t_end`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.time < t_end {
            let remaining = t_end - self.time;
            let dt = self.recommended_step();
            if remaining <= dt {
                self.step(remaining)?;
                self.time = t_end;
            } else {
                self.step(dt)?;
            }
        }
        Ok(())
    }

    fn destroy_half(&mut self, ell: f64, drift: f64, dt: f64) {
        let first = ((ell - drift) / self.dx).floor().max(0.0) as usize;
        let half = 0.5 * dt;
        for j in first..self.active {
            let excess = j as f64 * self.dx + drift - ell;
            if excess > 0.0 {
                self.values[j] *= (-excess * half).exp();
            }
        }
    }

    /// Midpoint RK2 for `dG/dt = 2∫_{x+ℓ}^∞ G`. Returns the midpoint creation
    /// rate at contact `2∫_ℓ^∞ G`.
    fn create(&mut self, ell: f64, drift: f64, dt: f64) -> f64 {
        let n = self.active;
        let mut suffix = vec![0.0; n + 1];
        let mut rate = vec![0.0; n];

        creation_rates(&self.values[..n], self.dx, ell, &mut suffix, &mut rate);
        let stage: Vec<f64> = self.values[..n].iter().zip(&rate).map(|(g, r)| g + 0.5 * dt * r).collect();
        creation_rates(&stage, self.dx, ell, &mut suffix, &mut rate);
        let contact = 2.0 * suffix_at(&stage, &suffix, self.dx, ell - drift);
        for (g, r) in self.values[..n].iter_mut().zip(&rate) {
            *g += dt * r;
        }
        contact
    }

    fn shift_right(&mut self) {
        if self.active == self.values.len() {
            self.active -= 1;
        }
        self.values[..=self.active].rotate_right(1);
        self.active += 1;
        self.shifts += 1;
        self.values[0] = self.strip_value(self.drift);
    }

    fn trim_tail(&mut self) {
        let peak = self.values[..self.active].iter().copied().fold(0.0, f64::max);
        let cutoff = peak * TAIL_CUTOFF;
        let mut last = self.active;
        while last > 0 && self.values[last - 1] <= cutoff {
            last -= 1;
        }
        let end = (last + 1).min(self.values.len());
        if end < self.active {
            self.values[end..self.active].fill(0.0);
        }
        self.active = end;
    }

    /// Keeps only the history needed to reach back to the oldest strip gap.
    fn prune_history(&mut self) {
        let oldest = self.entry_time(self.drift);
        let keep_from = self.history.partition_point(|h| h.0 <= oldest).saturating_sub(1);
        if keep_from > 0 {
            self.history.drain(..keep_from);
        }
    }

    /// Entry time of the characteristic now at `x`; `x = 0` enters now.
    fn entry_time(&self, x: f64) -> f64 {
        if x <= 0.0 || !self.schedule.is_shrinking() {
            return self.time;
        }
        let excess = self.schedule.reduced_excess(self.time) + x;
        self.schedule.reduced_time_at_excess(excess).max(self.history[0].0)
    }

    fn cumulative_at(&self, t: f64) -> f64 {
        let h = &self.history;
        let i = h.partition_point(|p| p.0 <= t);
        if i == 0 {
            return h[0].1;
        }
        if i == h.len() {
            return h[h.len() - 1].1;
        }
        let (t0, c0) = h[i - 1];
        let (t1, c1) = h[i];
        c0 + (c1 - c0) * (t - t0) / (t1 - t0)
    }

    /// Gap density inside the strip `0 ≤ x ≤ drift`.
    fn strip_value(&self, x: f64) -> f64 {
        let now = self.history.last().map_or(0.0, |h| h.1);
        now - self.cumulative_at(self.entry_time(x))
    }

    /// `∫ x^power·G dx` over `lo ≤ x ≤ hi` inside the strip, integrated in
    /// entry time with `dx = −ℓ̇(s)·ds` (5-point Gauss per history segment).
    fn strip_moment(&self, lo: f64, hi: f64, power: i32) -> f64 {
        let hi = hi.min(self.drift);
        if hi <= lo || !self.schedule.is_shrinking() {
            return 0.0;
        }
        let s_hi = self.entry_time(hi);
        let s_lo = self.entry_time(lo);
        let now_c = self.history.last().map_or(0.0, |h| h.1);
        let excess_now = self.schedule.reduced_excess(self.time);
        let mut cuts: Vec<f64> = vec![s_hi];
        cuts.extend(self.history.iter().map(|h| h.0).filter(|&t| t > s_hi && t < s_lo));
        cuts.push(s_lo);
        let integrand = |s: f64| {
            let x = self.schedule.reduced_excess(s) - excess_now;
            let g = now_c - self.cumulative_at(s);
            x.max(0.0).powi(power) * g * (-self.schedule.reduced_rate(s))
        };
        cuts.windows(2).map(|w| gauss5(&integrand, w[0], w[1])).sum()
    }

    /// `G(x)` from the strip, the nodes, or interpolation between them.
    pub fn value_at(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x < self.drift && self.schedule.is_shrinking() {
            return self.strip_value(x);
        }
        let u = (x - self.drift) / self.dx;
        let j = u.floor() as usize;
        if j + 1 >= self.active {
            return if j < self.active && u == j as f64 { self.values[j] } else { 0.0 };
        }
        if let Some(frame) = self.entry_frame(j) {
            if let Some(s) = self.exact_entry_time(x) {
                return frame.value(s);
            }
        }
        let frac = u - j as f64;
        self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
    }

    /// Entry time of the characteristic at `x`, if it entered after the start.
    fn exact_entry_time(&self, x: f64) -> Option<f64> {
        if !self.schedule.is_shrinking() {
            return None;
        }
        let excess = self.schedule.reduced_excess(self.time) + x;
        let s = self.schedule.reduced_time_at_excess(excess);
        (s.is_finite() && s >= self.start_time && s <= self.time).then_some(s)
    }

    /// Near contact, the cell `[x_j, x_{j+1}]` in entry-time coordinates.
    fn entry_frame(&self, j: usize) -> Option<EntryFrame> {
        if j >= NEAR_CONTACT_CELLS || j + 1 >= self.active {
            return None;
        }
        let sa = self.exact_entry_time(self.node_position(j))?;
        let sb = self.exact_entry_time(self.node_position(j + 1))?;
        (sa > sb).then_some(EntryFrame { sa, ga: self.values[j], sb, gb: self.values[j + 1] })
    }

    /// `∫_a^b x^power·G` within cell `j`.
    fn cell_moment(&self, j: usize, a: f64, b: f64, power: i32) -> f64 {
        if let Some(frame) = self.entry_frame(j) {
            if let (Some(s_a), Some(s_b)) = (self.exact_entry_time(a), self.exact_entry_time(b)) {
                let excess_now = self.schedule.reduced_excess(self.time);
                let integrand = |s: f64| {
                    let x = (self.schedule.reduced_excess(s) - excess_now).max(0.0);
                    x.powi(power) * frame.value(s) * (-self.schedule.reduced_rate(s))
                };
                let h = (s_a - s_b) / 4.0;
                return (0..4).map(|k| gauss5(&integrand, s_b + k as f64 * h, s_b + (k + 1) as f64 * h)).sum();
            }
        }
        let (x0, x1) = (self.node_position(j), self.node_position(j + 1));
        let lin = |x: f64| self.values[j] + (self.values[j + 1] - self.values[j]) * (x - x0) / (x1 - x0);
        0.5 * (a.powi(power) * lin(a) + b.powi(power) * lin(b)) * (b - a)
    }

    /// `G(0, t)`; exactly zero for shrinking schedules.
    pub fn contact_value(&self) -> f64 {
        if self.schedule.is_shrinking() && self.drift > 0.0 {
            return self.strip_value(0.0);
        }
        self.value_at(0.0)
    }

    /// `∫_lo^hi x^power·G dx` for `power ∈ {0, 1}`: the strip along
    /// characteristics, cells next to contact in entry time, the rest by the
    /// trapezoid rule.
    pub fn moment_between(&self, lo: f64, hi: f64, power: i32) -> f64 {
        let lo = lo.max(0.0);
        let mut total = self.strip_moment(lo, hi, power);
        if self.active < 2 {
            return total;
        }
        let a0 = lo.max(self.drift);
        let b0 = hi.min(self.node_position(self.active - 1));
        if b0 <= a0 {
            return total;
        }
        let first = ((a0 - self.drift) / self.dx).floor() as usize;
        for j in first..self.active - 1 {
            let (xa, xb) = (self.node_position(j), self.node_position(j + 1));
            if xa >= b0 {
                break;
            }
            let (a, b) = (xa.max(a0), xb.min(b0));
            if b > a {
                total += self.cell_moment(j, a, b, power);
            }
        }
        total
    }

    /// Number density `n = ∫G`.
    pub fn density(&self) -> f64 {
        self.moment_between(0.0, f64::INFINITY, 0)
    }

    /// Uncovered fraction `∫x·G`.
    pub fn first_moment(&self) -> f64 {
        self.moment_between(0.0, f64::INFINITY, 1)
    }

    /// `|ℓ(t)·n(t) + ∫x·G − 1|`.
    pub fn conservation_residual(&self) -> f64 {
        (self.segment_length() * self.density() + self.first_moment() - 1.0).abs()
    }

    /// `∫(x − ℓ)₊·G`, the rate at which the gap count grows.
    pub fn available_length(&self) -> f64 {
        let ell = self.segment_length();
        self.moment_between(ell, f64::INFINITY, 1) - ell * self.moment_between(ell, f64::INFINITY, 0)
    }

    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            time: self.time,
            density: self.density(),
            conservation_residual: self.conservation_residual(),
            total_shift: self.shifts as f64 * self.dx + self.drift,
        }
    }

    /// Sampled curve `(x/ℓ(∞), ℓ(∞)²·G)`: the contact point (when the strip is
    /// non-empty) followed by every active node.
    pub fn gap_curve(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.active + 1);
        if self.drift > 0.0 && self.schedule.is_shrinking() {
            out.push((0.0, self.contact_value()));
        }
        out.extend((0..self.active).map(|j| (self.node_position(j), self.values[j])));
        out
    }

    /// Average of `G` over `[k·w, (k+1)·w)` for `k < bins`.
    pub fn binned(&self, bin_width: f64, bins: usize) -> Vec<f64> {
        (0..bins)
            .map(|k| {
                let lo = k as f64 * bin_width;
                self.moment_between(lo, lo + bin_width, 0) / bin_width
            })
            .collect()
    }
}

/// `G` linear in entry time between two nodes.
#[derive(Clone, Copy, Debug)]
struct EntryFrame {
    sa: f64,
    ga: f64,
    sb: f64,
    gb: f64,
}

impl EntryFrame {
    fn value(&self, s: f64) -> f64 {
        self.gb + (self.ga - self.gb) * (s - self.sb) / (self.sa - self.sb)
    }
}

/// Fills `suffix[k] = ∫_{x_k}^{x_end} G` (trapezoid) and
/// `rate[j] = 2∫_{x_j+ℓ}^∞ G` for the node array `g`.
fn creation_rates(g: &[f64], dx: f64, ell: f64, suffix: &mut [f64], rate: &mut [f64]) {
    let n = g.len();
    suffix[n] = 0.0;
    if n > 0 {
        suffix[n - 1] = 0.0;
    }
    for k in (0..n.saturating_sub(1)).rev() {
        suffix[k] = suffix[k + 1] + 0.5 * dx * (g[k] + g[k + 1]);
    }
    for (j, r) in rate.iter_mut().enumerate() {
        *r = 2.0 * suffix_at(g, suffix, dx, j as f64 * dx + ell);
    }
}

/// `∫_y^∞` of the piecewise-linear interpolant of `g` (array coordinates).
fn suffix_at(g: &[f64], suffix: &[f64], dx: f64, y: f64) -> f64 {
    let n = g.len();
    if y <= 0.0 {
        return suffix[0];
    }
    let u = y / dx;
    let k = u.floor() as usize;
    if k + 1 >= n {
        return 0.0;
    }
    let frac = u - k as f64;
    let g_y = g[k] * (1.0 - frac) + g[k + 1] * frac;
    suffix[k + 1] + 0.5 * (1.0 - frac) * dx * (g_y + g[k + 1])
}

fn gauss5<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    const X: [f64; 5] =
        [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    X.iter().zip(W).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}
