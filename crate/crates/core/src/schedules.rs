//! Time-dependent object sizes.
//!
//! Every schedule decays monotonically from twice its final size toward the
//! final size `D(∞)` (or `ℓ(∞)` on the line). Time is measured against the
//! process time scale `τ = 1/(R·D(∞)^d)`, where `R` is the attempt flux per
//! unit length (d = 1) or area (d = 2).
//!
//! The simulation kernels work in reduced units (`D(∞) = 1`, `τ = 1`) and use
//! [`SizeSchedule::reduced_size`] and [`SizeSchedule::reduced_rate`]; the
//! physical [`SizeSchedule::size`] and [`SizeSchedule::rate`] convert.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Functional form of the size decay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `D(∞)·(1 + exp(−t/τ))`
    Exponential,
    /// `D(∞)·(1 + 1/ln(e + t/τ))`
    Logarithmic,
    /// `D(∞)·(1 + 1/(1 + t/τ))`
    Reciprocal,
    /// `D(∞)` at all times.
    Constant,
}

impl ScheduleKind {
    pub const SHRINKING: [ScheduleKind; 3] =
        [ScheduleKind::Exponential, ScheduleKind::Logarithmic, ScheduleKind::Reciprocal];

    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Exponential => "exponential",
            ScheduleKind::Logarithmic => "logarithmic",
            ScheduleKind::Reciprocal => "reciprocal",
            ScheduleKind::Constant => "constant",
        }
    }
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(ScheduleKind::Exponential),
            "logarithmic" => Ok(ScheduleKind::Logarithmic),
            "reciprocal" => Ok(ScheduleKind::Reciprocal),
            "constant" => Ok(ScheduleKind::Constant),
            other => Err(Error::Parse(format!("unknown schedule kind `{other}`"))),
        }
    }
}

/// A monotone size schedule together with the deposition flux.
///
/// Immutable once built; cheap to copy into parallel replica workers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", deny_unknown_fields)]
pub struct SizeSchedule {
    kind: ScheduleKind,
    final_size: f64,
    flux: f64,
    dimension: u8,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    kind: ScheduleKind,
    #[serde(default = "one")]
    final_size: f64,
    #[serde(default = "one")]
    flux: f64,
    dimension: u8,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawSchedule> for SizeSchedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        SizeSchedule::new(raw.kind, raw.final_size, raw.flux, raw.dimension)
    }
}

impl SizeSchedule {
    pub fn new(kind: ScheduleKind, final_size: f64, flux: f64, dimension: u8) -> Result<Self> {
        if !(final_size.is_finite() && final_size > 0.0) {
            return Err(Error::Config(format!("final_size must be positive, got {final_size}")));
        }
        if !(flux.is_finite() && flux > 0.0) {
            return Err(Error::Config(format!("flux must be positive, got {flux}")));
        }
        if dimension != 1 && dimension != 2 {
            return Err(Error::Config(format!("dimension must be 1 or 2, got {dimension}")));
        }
        Ok(Self { kind, final_size, flux, dimension })
    }

    /// Schedule in reduced units: `final_size = 1`, `flux = 1`.
    pub fn reduced(kind: ScheduleKind, dimension: u8) -> Self {
        Self::new(kind, 1.0, 1.0, dimension).expect("unit schedule is valid")
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn final_size(&self) -> f64 {
        self.final_size
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    pub fn dimension(&self) -> u8 {
        self.dimension
    }

    pub fn is_shrinking(&self) -> bool {
        self.kind != ScheduleKind::Constant
    }

    /// `τ = 1/(R·final_size^d)`.
    pub fn time_scale(&self) -> f64 {
        1.0 / (self.flux * self.final_size.powi(i32::from(self.dimension)))
    }

    /// Object size at physical time `t`.
    pub fn size(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.final_size * self.reduced_size(t / self.time_scale()))
    }

    /// Exact derivative of [`size`](Self::size) at physical time `t`.
    pub fn rate(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let tau = self.time_scale();
        Ok(self.final_size * self.reduced_rate(t / tau) / tau)
    }

    /// `size / final_size` as a function of `s = t/τ`.
    pub fn reduced_size(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        1.0 + self.reduced_excess(s)
    }

    /// `d(size/final_size)/ds` with `s = t/τ`.
    pub fn reduced_rate(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        match self.kind {
            ScheduleKind::Exponential => -(-s).exp(),
            ScheduleKind::Logarithmic => {
                let arg = E + s;
                let ln = arg.ln();
                -1.0 / (arg * ln * ln)
            }
            ScheduleKind::Reciprocal => {
                let d = 1.0 + s;
                -1.0 / (d * d)
            }
            ScheduleKind::Constant => 0.0,
        }
    }

    /// Reduced time `s` at which the reduced excess size `size/final_size − 1`
    /// equals `excess`. Returns 0 when `excess ≥ 1` and `+∞` for `excess ≤ 0`.
    /// Always `+∞` for the constant schedule.
    pub fn reduced_time_at_excess(&self, excess: f64) -> f64 {
        if self.kind == ScheduleKind::Constant || excess <= 0.0 {
            return f64::INFINITY;
        }
        if excess >= 1.0 {
            return 0.0;
        }
        match self.kind {
            ScheduleKind::Exponential => -excess.ln(),
            ScheduleKind::Logarithmic => ((1.0 / excess).exp() - E).max(0.0),
            ScheduleKind::Reciprocal => (1.0 / excess - 1.0).max(0.0),
            ScheduleKind::Constant => unreachable!(),
        }
    }

    /// `reduced_size(s) − 1`, without cancellation at late times.
    pub fn reduced_excess(&self, s: f64) -> f64 {
        match self.kind {
            ScheduleKind::Exponential => (-s).exp(),
            ScheduleKind::Logarithmic => 1.0 / (E + s).ln(),
            ScheduleKind::Reciprocal => 1.0 / (1.0 + s),
            ScheduleKind::Constant => 0.0,
        }
    }

    /// One-line `key=value` description used in output headers.
    pub fn describe(&self) -> String {
        format!(
            "kind={} final_size={} flux={} dimension={}",
            self.kind.name(),
            self.final_size,
            self.flux,
            self.dimension
        )
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(domain(format!("time must be non-negative, got {t}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    fn unit(kind: ScheduleKind, d: u8) -> SizeSchedule {
        SizeSchedule::reduced(kind, d)
    }

    #[test]
    fn size_at_origin_is_twice_final() {
        assert_eq!(unit(ScheduleKind::Exponential, 2).size(0.0).unwrap(), 2.0);
        assert_eq!(unit(ScheduleKind::Logarithmic, 2).size(0.0).unwrap(), 2.0);
        assert_eq!(unit(ScheduleKind::Reciprocal, 1).size(0.0).unwrap(), 2.0);
        assert_eq!(unit(ScheduleKind::Constant, 1).size(0.0).unwrap(), 1.0);
    }

    #[test]
    fn reciprocal_at_one_tau() {
        let s = unit(ScheduleKind::Reciprocal, 2);
        assert_eq!(s.size(s.time_scale()).unwrap(), 1.5);
    }

    #[test]
    fn exponential_limit() {
        let s = unit(ScheduleKind::Exponential, 2);
        assert_relative_eq!(s.size(1e3).unwrap(), 1.0);
    }

    #[test]
    fn rates_at_origin() {
        let s = SizeSchedule::new(ScheduleKind::Exponential, 1.0, 2.0, 1).unwrap();
        assert_relative_eq!(s.rate(0.0).unwrap(), -1.0 / s.time_scale());
        let s = SizeSchedule::new(ScheduleKind::Reciprocal, 1.0, 3.0, 2).unwrap();
        assert_relative_eq!(s.rate(0.0).unwrap(), -1.0 / s.time_scale());
        assert_eq!(unit(ScheduleKind::Constant, 2).rate(17.0).unwrap(), 0.0);
    }

    #[test]
    fn time_scales() {
        assert_eq!(unit(ScheduleKind::Exponential, 2).time_scale(), 1.0);
        let s = SizeSchedule::new(ScheduleKind::Exponential, 1.0, 2.0, 1).unwrap();
        assert_eq!(s.time_scale(), 0.5);
        let s = SizeSchedule::new(ScheduleKind::Exponential, 2.0, 1.0, 2).unwrap();
        assert_eq!(s.time_scale(), 0.25);
    }

    #[test]
    fn negative_time_rejected() {
        let s = unit(ScheduleKind::Exponential, 1);
        assert!(matches!(s.size(-1e-9), Err(Error::Domain(_))));
        assert!(matches!(s.rate(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_construction() {
        assert!(SizeSchedule::new(ScheduleKind::Exponential, 0.0, 1.0, 1).is_err());
        assert!(SizeSchedule::new(ScheduleKind::Exponential, 1.0, -1.0, 1).is_err());
        assert!(SizeSchedule::new(ScheduleKind::Exponential, 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn deserialize_validates() {
        let ok: SizeSchedule =
            serde_json::from_str(r#"{"kind":"logarithmic","final_size":2.0,"flux":1.0,"dimension":2}"#).unwrap();
        assert_eq!(ok.kind(), ScheduleKind::Logarithmic);
        assert!(serde_json::from_str::<SizeSchedule>(
            r#"{"kind":"exponential","final_size":-2.0,"flux":1.0,"dimension":2}"#
        )
        .is_err());
        assert!(serde_json::from_str::<SizeSchedule>(r#"{"kind":"cubic","dimension":2}"#).is_err());
    }

    #[test]
    fn inverse_time_roundtrip() {
        for kind in ScheduleKind::SHRINKING {
            let s = unit(kind, 1);
            for &t in &[0.0, 0.3, 1.0, 4.5, 20.0] {
                let ex = s.reduced_excess(t);
                assert_relative_eq!(s.reduced_time_at_excess(ex), t, epsilon = 1e-9, max_relative = 1e-9);
            }
        }
    }

    fn kinds() -> impl Strategy<Value = ScheduleKind> {
        prop_oneof![
            Just(ScheduleKind::Exponential),
            Just(ScheduleKind::Logarithmic),
            Just(ScheduleKind::Reciprocal),
            Just(ScheduleKind::Constant),
        ]
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(kind in kinds(), t1 in 0.0f64..50.0, dt in 1e-6f64..50.0,
                                final_size in 0.1f64..10.0, flux in 0.1f64..10.0, d in 1u8..=2) {
            let s = SizeSchedule::new(kind, final_size, flux, d).unwrap();
            let t2 = t1 + dt;
            let (a, b) = (s.size(t1).unwrap(), s.size(t2).unwrap());
            if kind == ScheduleKind::Constant {
                prop_assert_eq!(a, b);
                prop_assert_eq!(a, final_size);
            } else {
                // the excess underflows relative to the final size at late times
                prop_assert!(a >= b);
                prop_assert!(b >= final_size && a <= 2.0 * final_size);
                if s.size(t2).unwrap() - final_size > 1e-12 * final_size {
                    prop_assert!(a > b);
                }
            }
            prop_assert!(s.rate(t1).unwrap() <= 0.0);
        }

        #[test]
        fn rate_matches_central_difference(kind in kinds(), s_red in 0.01f64..30.0, d in 1u8..=2) {
            let s = SizeSchedule::new(kind, 1.5, 0.7, d).unwrap();
            let tau = s.time_scale();
            let t = s_red * tau;
            for h in [1e-3 * tau, 1e-4 * tau] {
                let fd = (s.size(t + h).unwrap() - s.size(t - h).unwrap()) / (2.0 * h);
                // third derivative of every kind is bounded by 6/τ³ in size units
                let bound = 6.0 * 1.5 / tau.powi(3) * h * h + 1e-9;
                prop_assert!((fd - s.rate(t).unwrap()).abs() <= bound);
            }
        }
    }
}
