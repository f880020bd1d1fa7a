//! Peak extraction, logarithmic fits of peak growth, and replica statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::DistributionHistogram;

/// Location and height of a curve maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub x: f64,
    pub y: f64,
    pub error: f64,
    /// The maximum sits at the edge of the sampled range (or the local
    /// quadratic is not concave there), so `x` and `y` are the largest raw
    /// sample nearby rather than an interpolated vertex.
    pub boundary: bool,
}

/// Finds the peak of `(x, y, standard_error)` samples.
///
/// The curve is smoothed with a 3-point moving average (defined on interior
/// samples only); the largest smoothed sample selects a window of three raw
/// samples, whose interpolating parabola gives the vertex.
pub fn find_peak(curve: &[(f64, f64, f64)]) -> Result<Peak> {
    let n = curve.len();
    if n < 5 {
        return Err(Error::NoPeak(format!("need at least 5 samples, got {n}")));
    }
    if curve.iter().all(|p| p.1 == 0.0) {
        return Err(Error::NoPeak("curve is identically zero".into()));
    }
    let smoothed: Vec<f64> = (1..n - 1).map(|i| (curve[i - 1].1 + curve[i].1 + curve[i + 1].1) / 3.0).collect();
    let (best, _) =
        smoothed.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
    let i = best + 1;
    let window = [curve[i - 1], curve[i], curve[i + 1]];
    let xs = [window[0].0, window[1].0, window[2].0];
    let ys = [window[0].1, window[1].1, window[2].1];
    let at_edge = i == 1 || i == n - 2;

    match parabola_vertex(xs, ys) {
        Some((x, y)) if x >= xs[0] && x <= xs[2] => {
            let mut variance = 0.0;
            for k in 0..3 {
                let h = 1e-6 * (ys[k].abs() + 1.0);
                let mut up = ys;
                up[k] += h;
                let mut down = ys;
                down[k] -= h;
                let dy = match (parabola_vertex(xs, up), parabola_vertex(xs, down)) {
                    (Some(a), Some(b)) => (a.1 - b.1) / (2.0 * h),
                    _ => 1.0,
                };
                variance += (dy * window[k].2).powi(2);
            }
            Ok(Peak { x, y, error: variance.sqrt(), boundary: false })
        }
        _ => {
            let &(x, y, error) = window.iter().fold(&window[1], |best, p| if p.1 > best.1 { p } else { best });
            Ok(Peak { x, y, error, boundary: at_edge })
        }
    }
}

/// Same as [`find_peak`] for `(x, y)` samples without error bars.
pub fn find_peak_xy(curve: &[(f64, f64)]) -> Result<Peak> {
    let c: Vec<(f64, f64, f64)> = curve.iter().map(|&(x, y)| (x, y, 0.0)).collect();
    find_peak(&c)
}

/// Vertex of the concave parabola through three points, if any.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d12 - d01) / (x[2] - x[0]);
    if !(a < 0.0) {
        return None;
    }
    let b = d01 - a * (x[0] + x[1]);
    let xv = -b / (2.0 * a);
    let yv = y[0] + (xv - x[0]) * (d01 + a * (xv - x[1]));
    Some((xv, yv))
}

/// Where a peak series came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesSource {
    Sim1d,
    Sim2d,
    Kinetics,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakPoint {
    /// `t/τ`
    pub time: f64,
    pub value: f64,
    pub error: f64,
}

/// Peak values against time, strictly increasing in time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSeries {
    pub source: SeriesSource,
    points: Vec<PeakPoint>,
}

impl PeakSeries {
    pub fn new(source: SeriesSource) -> Self {
        Self { source, points: Vec::new() }
    }

    pub fn from_points(source: SeriesSource, points: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<Self> {
        let mut s = Self::new(source);
        for (t, v, e) in points {
            s.push(t, v, e)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, time: f64, value: f64, error: f64) -> Result<()> {
        if !(time > 0.0) || !time.is_finite() {
            return Err(Error::Fit(format!("peak time must be positive, got {time}")));
        }
        if let Some(last) = self.points.last() {
            if time <= last.time {
                return Err(Error::Fit(format!("times must increase: {time} after {}", last.time)));
            }
        }
        if !(error >= 0.0) {
            return Err(Error::Fit(format!("error must be non-negative, got {error}")));
        }
        self.points.push(PeakPoint { time, value, error });
        Ok(())
    }

    pub fn points(&self) -> &[PeakPoint] {
        &self.points
    }
}

/// Least-squares line through peak value vs `ln(t/τ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual variance. It ignores the
    /// per-point errors and drift of the slope over decades.
    pub slope_error: f64,
    pub t_min: f64,
    pub source: SeriesSource,
    pub n_points: usize,
    /// Largest `|residual|` of the fit.
    pub max_residual: f64,
    /// Set when the fitted times span less than one decade.
    pub low_reliability: bool,
}

/// Unweighted fit of `value = slope·ln(t) + intercept` over points with `t ≥ t_min`.
pub fn log_fit(series: &PeakSeries, t_min: f64) -> Result<LogFit> {
    let pts: Vec<(f64, f64)> =
        series.points.iter().filter(|p| p.time >= t_min).map(|p| (p.time.ln(), p.value)).collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 points with t ≥ {t_min}, got {n}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all fitted times coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = pts.iter().map(|p| p.1 - (slope * p.0 + intercept)).collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let slope_error = (ssr / (nf - 2.0) / sxx).sqrt();
    let span = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
        - pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    Ok(LogFit {
        slope,
        intercept,
        slope_error,
        t_min,
        source: series.source,
        n_points: n,
        max_residual: residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
        low_reliability: span < std::f64::consts::LN_10,
    })
}

/// Running per-bin sums for a replica average.
#[derive(Clone, Debug, Default)]
pub struct ReplicaAccumulator {
    template: Option<DistributionHistogram>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    density_sum: f64,
    count: usize,
}

impl ReplicaAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, h: &DistributionHistogram) -> Result<()> {
        if let Some(t) = &self.template {
            let same_width = (t.bin_width - h.bin_width).abs() <= 1e-12 * t.bin_width;
            if t.kind != h.kind || !same_width || t.snapshot_time != h.snapshot_time {
                return Err(Error::Schema(format!(
                    "cannot merge {:?}/w={}/t={} with {:?}/w={}/t={}",
                    t.kind, t.bin_width, t.snapshot_time, h.kind, h.bin_width, h.snapshot_time
                )));
            }
        } else {
            self.template = Some(h.clone());
        }
        if h.len() > self.sum.len() {
            self.sum.resize(h.len(), 0.0);
            self.sum_sq.resize(h.len(), 0.0);
        }
        for (k, &v) in h.values.iter().enumerate() {
            self.sum[k] += v;
            self.sum_sq[k] += v * v;
        }
        self.density_sum += h.normalization.density;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Mean histogram with standard errors of the mean.
    pub fn finish(&self) -> Result<DistributionHistogram> {
        let Some(template) = &self.template else {
            return Err(Error::Schema("no histograms to average".into()));
        };
        let n = self.count as f64;
        let mut out = template.clone();
        out.values = self.sum.iter().map(|s| s / n).collect();
        out.std_errors = self
            .sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(&s, &sq)| {
                if self.count < 2 {
                    return 0.0;
                }
                let mean = s / n;
                let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            })
            .collect();
        out.normalization.replicas = self.count;
        out.normalization.density = self.density_sum / n;
        Ok(out)
    }
}

/// Per-bin mean and standard error over replicas with identical binning.
pub fn replica_average(histograms: &[DistributionHistogram]) -> Result<DistributionHistogram> {
    let mut acc = ReplicaAccumulator::new();
    for h in histograms {
        acc.push(h)?;
    }
    let mut out = acc.finish()?;
    let longest = histograms.iter().map(|h| h.len()).max().unwrap_or(0);
    out.pad_to(longest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::histogram::{HistogramKind, Normalization};

    fn hist(values: Vec<f64>) -> DistributionHistogram {
        DistributionHistogram::new(
            HistogramKind::GapDensity,
            0.1,
            1.0,
            values,
            Normalization { box_measure: 10.0, replicas: 1, density: 0.5 },
        )
    }

    #[test]
    fn exact_quadratic_peak() {
        let curve: Vec<(f64, f64)> = (0..41)
            .map(|k| {
                let x = k as f64 * 0.1;
                (x, 1.0 - (x - 2.0) * (x - 2.0))
            })
            .collect();
        let p = find_peak_xy(&curve).unwrap();
        assert_relative_eq!(p.x, 2.0, epsilon = 1e-12);
        assert_relative_eq!(p.y, 1.0, epsilon = 1e-12);
        assert!(!p.boundary);
    }

    #[test]
    fn monotone_curve_is_boundary_peak() {
        let curve: Vec<(f64, f64)> = (0..20).map(|k| (k as f64, (-(k as f64) * 0.3).exp())).collect();
        let p = find_peak_xy(&curve).unwrap();
        assert!(p.boundary);
        assert_eq!(p.x, 0.0);
        assert_eq!(p.y, 1.0);
    }

    #[test]
    fn degenerate_curves() {
        let zero: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 0.0)).collect();
        assert!(matches!(find_peak_xy(&zero), Err(Error::NoPeak(_))));
        assert!(find_peak_xy(&[(0.0, 1.0), (1.0, 2.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn peak_error_propagates() {
        let curve: Vec<(f64, f64, f64)> = (0..11)
            .map(|k| {
                let x = k as f64;
                (x, 5.0 - (x - 5.0).powi(2) * 0.1, 0.2)
            })
            .collect();
        let p = find_peak(&curve).unwrap();
        // vertex at a sample: y* = y_i exactly, so the error is that sample's
        assert_relative_eq!(p.error, 0.2, max_relative = 1e-4);
    }

    #[test]
    fn noiseless_log_fit() {
        let s = PeakSeries::from_points(
            SeriesSource::Sim1d,
            [4.0, 6.0, 8.0, 12.0, 18.0, 24.0].map(|t: f64| (t, 0.4 * t.ln() + 0.1, 0.0)),
        )
        .unwrap();
        let f = log_fit(&s, 4.0).unwrap();
        assert_relative_eq!(f.slope, 0.4, epsilon = 1e-12);
        assert_relative_eq!(f.intercept, 0.1, epsilon = 1e-12);
        assert!(f.slope_error < 1e-12);
        assert_eq!(f.n_points, 6);
        assert!(f.low_reliability);
    }

    #[test]
    fn log_fit_needs_three_points() {
        let s =
            PeakSeries::from_points(SeriesSource::Sim2d, [(1.0, 1.0, 0.0), (8.0, 2.0, 0.0), (9.0, 2.1, 0.0)]).unwrap();
        assert!(matches!(log_fit(&s, 4.0), Err(Error::Fit(_))));
        assert!(log_fit(&s, 1.0).is_ok());
    }

    #[test]
    fn series_rejects_unsorted_times() {
        let mut s = PeakSeries::new(SeriesSource::Kinetics);
        s.push(2.0, 1.0, 0.0).unwrap();
        assert!(s.push(2.0, 1.0, 0.0).is_err());
        assert!(s.push(3.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn log_fit_slope_invariant_under_time_rescaling() {
        let pts = [(4.0, 1.0), (6.0, 1.3), (8.0, 1.35), (12.0, 1.6), (24.0, 1.9)];
        let a = PeakSeries::from_points(SeriesSource::Sim2d, pts.map(|(t, v)| (t, v, 0.0))).unwrap();
        let b = PeakSeries::from_points(SeriesSource::Sim2d, pts.map(|(t, v)| (10.0 * t, v, 0.0))).unwrap();
        let (fa, fb) = (log_fit(&a, 0.0).unwrap(), log_fit(&b, 0.0).unwrap());
        assert_relative_eq!(fa.slope, fb.slope, max_relative = 1e-12);
        assert_relative_eq!(fa.slope_error, fb.slope_error, max_relative = 1e-9);
        assert_relative_eq!(fb.intercept, fa.intercept - fa.slope * 10f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn average_of_identical_histograms() {
        let h = hist(vec![1.0, 2.0, 3.0]);
        let avg = replica_average(&[h.clone(), h.clone(), h.clone()]).unwrap();
        assert_eq!(avg.values, h.values);
        assert!(avg.std_errors.iter().all(|&e| e == 0.0));
        assert_eq!(avg.normalization.replicas, 3);
    }

    #[test]
    fn two_value_standard_error() {
        let avg = replica_average(&[hist(vec![0.0]), hist(vec![2.0])]).unwrap();
        assert_eq!(avg.values, vec![1.0]);
        assert_relative_eq!(avg.std_errors[0], 1.0);
    }

    #[test]
    fn mismatched_binning_rejected() {
        let mut other = hist(vec![1.0]);
        other.bin_width = 0.2;
        assert!(matches!(replica_average(&[hist(vec![1.0]), other]), Err(Error::Schema(_))));
        let mut later = hist(vec![1.0]);
        later.snapshot_time = 2.0;
        assert!(replica_average(&[hist(vec![1.0]), later]).is_err());
        assert!(replica_average(&[]).is_err());
    }

    #[test]
    fn ragged_histograms_are_padded() {
        let avg = replica_average(&[hist(vec![1.0]), hist(vec![1.0, 4.0])]).unwrap();
        assert_eq!(avg.values, vec![1.0, 2.0]);
    }

    #[test]
    fn standard_error_scales_with_replica_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut se_at = |n: usize| {
            let hs: Vec<_> = (0..n).map(|_| hist((0..400).map(|_| rng.random::<f64>() * 2.0).collect())).collect();
            let avg = replica_average(&hs).unwrap();
            avg.std_errors.iter().sum::<f64>() / avg.len() as f64
        };
        let se100 = se_at(100);
        // uniform on [0, 2): σ = 2/√12
        let expected = 2.0 / 12f64.sqrt() / 10.0;
        assert!((se100 / expected - 1.0).abs() < 0.2);
        let se25 = se_at(25);
        assert!((se25 / se100 / 2.0 - 1.0).abs() < 0.2);
    }

    proptest! {
        #[test]
        fn merge_is_order_independent(vals in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 1..8), 1..6)) {
            let hs: Vec<_> = vals.iter().cloned().map(hist).collect();
            let mut rev = hs.clone();
            rev.reverse();
            let (a, b) = (replica_average(&hs).unwrap(), replica_average(&rev).unwrap());
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn peak_not_below_raw_max_minus_window_variation(ys in prop::collection::vec(0.0f64..5.0, 5..40)) {
            prop_assume!(ys.iter().any(|&y| y > 0.0));
            let curve: Vec<(f64, f64)> = ys.iter().enumerate().map(|(k, &y)| (k as f64, y)).collect();
            let p = find_peak_xy(&curve).unwrap();
            let raw_max = ys.iter().copied().fold(0.0, f64::max);
            let spread = ys.iter().copied().fold(0.0, f64::max) - ys.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!(p.y >= raw_max - spread - 1e-12);
        }
    }
}
