//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_INTERVALS: usize = 4000;

/// One 15-point Kronrod estimate with the embedded 7-point Gauss error.
fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// `∫_a^b f` to within `max(abs_tol, rel_tol·|result|)` by global bisection
/// of the worst interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (value, err) = kronrod(&f, a, b);
    let mut intervals = vec![(a, b, value, err)];
    let mut total = value;
    let mut total_err = err;
    while total_err > abs_tol.max(rel_tol * total.abs()) && intervals.len() < MAX_INTERVALS {
        let (worst, _) = intervals.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty");
        let (lo, hi, v, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            intervals.push((lo, hi, v, 0.0));
            continue;
        }
        let (v1, e1) = kronrod(&f, lo, mid);
        let (v2, e2) = kronrod(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
        total = intervals.iter().map(|i| i.2).sum();
        total_err = intervals.iter().map(|i| i.3).sum();
    }
    total
}

/// Integral over consecutive break points, each piece adapted separately.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> f64 {
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    breaks.windows(2).map(|w| integrate(&f, w[0], w[1], abs_tol / pieces, rel_tol)).sum()
}

/// `0, 1, 2, 4, …` up to and including `t`, plus any extra interior points.
pub fn geometric_breaks(t: f64, extra: &[f64]) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut b = 1.0;
    while b < t {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.extend(extra.iter().copied().filter(|&e| e > 0.0 && e < t));
    breaks.push(t);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x.powi(6) - 3.0 * x, 0.0, 2.0, 1e-14, 1e-14);
        assert_relative_eq!(v, 128.0 / 7.0 - 6.0, max_relative = 1e-14);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let v = integrate(|x: f64| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-13, 1e-13);
        assert!(v.abs() < 1e-12);
        let v = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12);
        assert_relative_eq!(v, 2.0 * 100.0 * (100.0f64).atan(), max_relative = 1e-11);
    }

    #[test]
    fn breaks_cover_interval() {
        let b = geometric_breaks(10.0, &[3.0, 30.0]);
        assert_eq!(b, vec![0.0, 1.0, 2.0, 3.0, 4.0, 8.0, 10.0]);
    }
}
