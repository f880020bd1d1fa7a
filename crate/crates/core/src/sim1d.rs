//! Random sequential adsorption of shrinking segments on a periodic line.
//!
//! Lengths are in units of `ℓ(∞)` and times in units of `τ = 1/(R·ℓ(∞))`.
//! Attempt `k` (counting from 1) happens at `t_k = k/L`, so a run to time `t`
//! makes `⌊L·t⌋` attempts at uniformly random positions.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::ops::Bound;

use rand::{Rng, SeedableRng};

use crate::error::{domain, Error, Result};
use crate::histogram::{DistributionHistogram, HistogramKind, Normalization};
use crate::replicas::ReplicaRng;
use crate::schedules::SizeSchedule;

/// Outcome of a single deposition attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attempt {
    Accepted,
    Rejected,
}

/// Segment center on the line, totally ordered.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Center(f64);

impl Eq for Center {}

impl PartialOrd for Center {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Center {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Segments deposited on a periodic interval `[0, L)`.
#[derive(Clone, Debug)]
pub struct LineDeposit {
    schedule: SizeSchedule,
    box_length: f64,
    centers: BTreeSet<Center>,
    current_time: f64,
}

impl LineDeposit {
    /// Empty line of length `box_length` (in units of `ℓ(∞)`).
    pub fn new(schedule: SizeSchedule, box_length: f64) -> Result<Self> {
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::Config(format!("box length must be positive, got {box_length}")));
        }
        Ok(Self { schedule, box_length, centers: BTreeSet::new(), current_time: 0.0 })
    }

    pub fn schedule(&self) -> &SizeSchedule {
        &self.schedule
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn current_time(&self) -> f64 {
        self.current_time
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Segment length `ℓ(t)/ℓ(∞)` at the current time.
    pub fn segment_length(&self) -> f64 {
        self.schedule.reduced_size(self.current_time)
    }

    /// Centers in increasing order.
    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        self.centers.iter().map(|c| c.0)
    }

    /// Moves the clock forward without depositing anything.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if t.is_nan() || t < self.current_time {
            return Err(domain(format!("cannot move clock from {} back to {t}", self.current_time)));
        }
        self.current_time = t;
        Ok(())
    }

    /// Tries to deposit a segment centered at `position` at time `t`.
    ///
    /// Accepted iff both circular neighbors are at center distance `≥ ℓ(t)`.
    /// The clock moves to `t` either way.
    pub fn attempt(&mut self, position: f64, t: f64) -> Result<Attempt> {
        if !(0.0..self.box_length).contains(&position) {
            return Err(domain(format!("position {position} outside [0, {})", self.box_length)));
        }
        self.advance_to(t)?;
        let length = self.schedule.reduced_size(t);
        if self.fits(position, length) {
            self.centers.insert(Center(position));
            Ok(Attempt::Accepted)
        } else {
            Ok(Attempt::Rejected)
        }
    }

    fn fits(&self, position: f64, length: f64) -> bool {
        let (Some(first), Some(last)) = (self.centers.first(), self.centers.last()) else {
            return true;
        };
        let key = Center(position);
        let below = self
            .centers
            .range((Bound::Unbounded, Bound::Included(key)))
            .next_back()
            .map_or(last.0 - self.box_length, |c| c.0);
        let above = self
            .centers
            .range((Bound::Excluded(key), Bound::Unbounded))
            .next()
            .map_or(first.0 + self.box_length, |c| c.0);
        position - below >= length && above - position >= length
    }

    /// Number density `N/L`.
    pub fn density(&self) -> f64 {
        self.centers.len() as f64 / self.box_length
    }

    /// Circular center spacings, one per adjacent pair. A single segment
    /// yields one spacing of `L`.
    pub fn spacings(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.centers.len());
        let mut iter = self.centers.iter();
        let Some(first) = iter.next() else {
            return out;
        };
        let mut prev = first.0;
        for c in iter {
            out.push(c.0 - prev);
            prev = c.0;
        }
        out.push(first.0 + self.box_length - prev);
        out
    }

    /// Smallest circular center spacing, `+∞` for fewer than two segments.
    pub fn min_spacing(&self) -> f64 {
        if self.centers.len() < 2 {
            return f64::INFINITY;
        }
        self.spacings().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Full scan of the hard-core constraint at the current segment length.
    pub fn is_overlap_free(&self) -> bool {
        self.min_spacing() >= self.segment_length()
    }

    /// Gap lengths `spacing − ℓ(t)`, clamped at zero.
    pub fn gaps(&self) -> Vec<f64> {
        let length = self.segment_length();
        self.spacings().into_iter().map(|s| (s - length).max(0.0)).collect()
    }

    /// Gap density histogram normalized so that `Σ G·w = n(t)`.
    ///
    /// Fewer than two segments give an empty histogram.
    pub fn gap_histogram(&self, bin_width: f64) -> Result<DistributionHistogram> {
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(domain(format!("bin width must be positive, got {bin_width}")));
        }
        let mut counts: Vec<u64> = Vec::new();
        if self.centers.len() >= 2 {
            for gap in self.gaps() {
                let k = (gap / bin_width) as usize;
                if k >= counts.len() {
                    counts.resize(k + 1, 0);
                }
                counts[k] += 1;
            }
        }
        let scale = 1.0 / (self.box_length * bin_width);
        let values = counts.into_iter().map(|c| c as f64 * scale).collect();
        Ok(DistributionHistogram::new(
            HistogramKind::GapDensity,
            bin_width,
            self.current_time,
            values,
            Normalization { box_measure: self.box_length, replicas: 1, density: self.density() },
        ))
    }
}

/// Number of attempts made in `[0, t]` on a line of length `box_length`.
pub fn attempts_until(box_length: f64, t: f64) -> u64 {
    (box_length * t + 1e-9).floor() as u64
}

/// Runs one replica from an empty line, calling `on_snapshot` at each
/// snapshot time. Snapshot times must be sorted ascending.
pub fn run_with<F>(
    schedule: SizeSchedule,
    box_length: f64,
    rng: &mut ReplicaRng,
    snapshot_times: &[f64],
    mut on_snapshot: F,
) -> Result<()>
where
    F: FnMut(&LineDeposit),
{
    check_snapshots(snapshot_times)?;
    let mut deposit = LineDeposit::new(schedule, box_length)?;
    let mut k: u64 = 0;
    for &t in snapshot_times {
        let target = attempts_until(box_length, t);
        while k < target {
            k += 1;
            let mut position = rng.random::<f64>() * box_length;
            if position >= box_length {
                position = 0.0;
            }
            deposit.attempt(position, k as f64 / box_length)?;
        }
        deposit.advance_to(t)?;
        on_snapshot(&deposit);
    }
    Ok(())
}

/// Runs one replica seeded with `seed` and returns a copy of the deposit at
/// every snapshot time.
pub fn run(schedule: SizeSchedule, box_length: f64, seed: u64, snapshot_times: &[f64]) -> Result<Vec<LineDeposit>> {
    let mut rng = ReplicaRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(snapshot_times.len());
    run_with(schedule, box_length, &mut rng, snapshot_times, |d| out.push(d.clone()))?;
    Ok(out)
}

pub(crate) fn check_snapshots(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(domain("snapshot times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("snapshot times must be sorted ascending"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::schedules::ScheduleKind;

    fn line(kind: ScheduleKind, l: f64) -> LineDeposit {
        LineDeposit::new(SizeSchedule::reduced(kind, 1), l).unwrap()
    }

    #[test]
    fn empty_line_accepts() {
        let mut d = line(ScheduleKind::Exponential, 10.0);
        assert_eq!(d.attempt(3.3, 0.0).unwrap(), Attempt::Accepted);
    }

    #[test]
    fn overlap_rejected_and_contact_accepted() {
        let mut d = line(ScheduleKind::Exponential, 100.0);
        let t = 0.5;
        let l = d.schedule().reduced_size(t);
        d.attempt(0.0, t).unwrap();
        assert_eq!(d.attempt(0.5 * l, t).unwrap(), Attempt::Rejected);
        assert_eq!(d.attempt(l, t).unwrap(), Attempt::Accepted);
        // wrap-around neighbour of 0.0
        assert_eq!(d.attempt(100.0 - 0.5 * l, t).unwrap(), Attempt::Rejected);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn shrinking_opens_room() {
        let mut d = line(ScheduleKind::Exponential, 100.0);
        d.attempt(10.0, 0.0).unwrap();
        assert_eq!(d.attempt(11.5, 0.0).unwrap(), Attempt::Rejected);
        assert_eq!(d.attempt(11.5, 2.0).unwrap(), Attempt::Accepted);
    }

    #[test]
    fn domain_errors() {
        let mut d = line(ScheduleKind::Constant, 5.0);
        assert!(matches!(d.attempt(5.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(d.attempt(-0.1, 0.0), Err(Error::Domain(_))));
        d.attempt(1.0, 2.0).unwrap();
        assert!(matches!(d.attempt(3.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(d.gap_histogram(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn two_center_histogram() {
        let mut d = line(ScheduleKind::Constant, 3.0);
        d.attempt(0.0, 0.0).unwrap();
        d.attempt(1.5, 0.0).unwrap();
        assert_eq!(d.gaps(), vec![0.5, 0.5]);
        let w = 0.1;
        let h = d.gap_histogram(w).unwrap();
        let k = (0.5 / w) as usize;
        assert_relative_eq!(h.values[k], 2.0 / (3.0 * w));
        assert_eq!(h.values.iter().filter(|v| **v > 0.0).count(), 1);
        assert_relative_eq!(h.zeroth_moment(), d.density());
    }

    #[test]
    fn zero_time_run_is_empty() {
        let snaps = run(SizeSchedule::reduced(ScheduleKind::Exponential, 1), 100.0, 1, &[0.0]).unwrap();
        assert!(snaps[0].is_empty());
        assert_eq!(snaps[0].density(), 0.0);
    }

    #[test]
    fn unsorted_snapshots_rejected() {
        let s = SizeSchedule::reduced(ScheduleKind::Exponential, 1);
        assert!(run(s, 10.0, 1, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn low_coverage_density_tracks_flux() {
        let s = SizeSchedule::reduced(ScheduleKind::Exponential, 1);
        let snaps = run(s, 1.0e5, 3, &[0.01]).unwrap();
        // n ≈ t − ℓ(0)·t² at low coverage
        let n = snaps[0].density();
        assert!((n - 0.0098).abs() < 0.001, "n = {n}");
    }

    #[test]
    fn snapshots_are_deterministic() {
        let s = SizeSchedule::reduced(ScheduleKind::Exponential, 1);
        let a = run(s, 500.0, 99, &[1.0, 3.0]).unwrap();
        let b = run(s, 500.0, 99, &[1.0, 3.0]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let bits = |d: &LineDeposit| d.centers().map(f64::to_bits).collect::<Vec<_>>();
            assert_eq!(bits(x), bits(y));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn snapshot_invariants(seed in any::<u64>(), kind_ix in 0usize..4) {
            let kind = [ScheduleKind::Exponential, ScheduleKind::Logarithmic,
                        ScheduleKind::Reciprocal, ScheduleKind::Constant][kind_ix];
            let s = SizeSchedule::reduced(kind, 1);
            let snaps = run(s, 300.0, seed, &[0.5, 1.0, 2.0, 4.0]).unwrap();
            let mut last_n = 0.0;
            for d in &snaps {
                prop_assert!(d.is_overlap_free());
                prop_assert!(d.density() >= last_n);
                last_n = d.density();
                let w = 0.02;
                let h = d.gap_histogram(w).unwrap();
                prop_assert!((h.zeroth_moment() - d.density()).abs() < 1e-12);
                let residual = d.segment_length() * d.density() + h.first_moment() - 1.0;
                prop_assert!(residual.abs() <= 2.0 * w * d.density() + 1e-12);
            }
        }
    }
}
