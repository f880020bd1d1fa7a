//! Random sequential adsorption of shrinking disks on a periodic square.
//!
//! Lengths are in units of `D(∞)` and times in units of `τ = 1/(R·D(∞)²)`.
//! Attempt `k` happens at `t_k = k/L²`. Centers are indexed in a static
//! uniform grid whose cells are at least `D(0)` wide, so overlap tests only
//! visit the 3×3 block around the arriving disk.

use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::histogram::{DistributionHistogram, HistogramKind, Normalization};
use crate::replicas::ReplicaRng;
use crate::schedules::SizeSchedule;
pub use crate::sim1d::Attempt;

pub type Point = [f64; 2];

/// Uniform cell grid over the periodic square.
#[derive(Clone, Debug)]
struct CellGrid {
    per_side: usize,
    cell_size: f64,
    cells: Vec<Vec<u32>>,
}

impl CellGrid {
    fn new(box_side: f64, min_cell: f64) -> Self {
        let per_side = ((box_side / min_cell).floor() as usize).max(1);
        Self { per_side, cell_size: box_side / per_side as f64, cells: vec![Vec::new(); per_side * per_side] }
    }

    fn coords(&self, p: Point) -> (usize, usize) {
        let cx = ((p[0] / self.cell_size) as usize).min(self.per_side - 1);
        let cy = ((p[1] / self.cell_size) as usize).min(self.per_side - 1);
        (cx, cy)
    }

    fn index_of(&self, p: Point) -> usize {
        let (cx, cy) = self.coords(p);
        cy * self.per_side + cx
    }

    /// Distinct cells within `rings` cells of the one holding `p`.
    fn block(&self, p: Point, rings: usize, out: &mut Vec<usize>) {
        out.clear();
        let n = self.per_side as isize;
        let (cx, cy) = self.coords(p);
        let r = rings as isize;
        if 2 * r + 1 >= n {
            out.extend(0..self.cells.len());
            return;
        }
        for dy in -r..=r {
            let y = (cy as isize + dy).rem_euclid(n) as usize;
            for dx in -r..=r {
                let x = (cx as isize + dx).rem_euclid(n) as usize;
                out.push(y * self.per_side + x);
            }
        }
    }

    fn rings_for(&self, radius: f64) -> usize {
        (radius / self.cell_size).ceil() as usize
    }
}

/// Disks deposited on a periodic square `[0, L)²`.
#[derive(Clone, Debug)]
pub struct PlaneDeposit {
    schedule: SizeSchedule,
    box_side: f64,
    centers: Vec<Point>,
    grid: CellGrid,
    current_time: f64,
}

impl PlaneDeposit {
    /// Empty square of side `box_side` (in units of `D(∞)`).
    pub fn new(schedule: SizeSchedule, box_side: f64) -> Result<Self> {
        if !(box_side.is_finite() && box_side > 0.0) {
            return Err(Error::Config(format!("box side must be positive, got {box_side}")));
        }
        let grid = CellGrid::new(box_side, schedule.reduced_size(0.0));
        Ok(Self { schedule, box_side, centers: Vec::new(), grid, current_time: 0.0 })
    }

    pub fn schedule(&self) -> &SizeSchedule {
        &self.schedule
    }

    pub fn box_side(&self) -> f64 {
        self.box_side
    }

    pub fn current_time(&self) -> f64 {
        self.current_time
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Side of one index cell; fixed at construction.
    pub fn cell_size(&self) -> f64 {
        self.grid.cell_size
    }

    /// `D(t)/D(∞)` at the current time.
    pub fn diameter(&self) -> f64 {
        self.schedule.reduced_size(self.current_time)
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if t.is_nan() || t < self.current_time {
            return Err(domain(format!("cannot move clock from {} back to {t}", self.current_time)));
        }
        self.current_time = t;
        Ok(())
    }

    /// Minimum-image separation vector `a − b`.
    pub fn displacement(&self, a: Point, b: Point) -> Point {
        min_image(self.box_side, a, b)
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        let d = self.displacement(a, b);
        d[0].hypot(d[1])
    }

    fn check_inside(&self, p: Point) -> Result<()> {
        let inside = |v: f64| (0.0..self.box_side).contains(&v);
        if inside(p[0]) && inside(p[1]) {
            Ok(())
        } else {
            Err(domain(format!("point {p:?} outside [0, {})²", self.box_side)))
        }
    }

    /// Tries to deposit a disk centered at `position` at time `t`.
    ///
    /// Accepted iff every center in the surrounding 3×3 cell block lies at a
    /// minimum-image distance of at least `D(t)`.
    pub fn attempt(&mut self, position: Point, t: f64) -> Result<Attempt> {
        self.check_inside(position)?;
        self.advance_to(t)?;
        let d = self.schedule.reduced_size(t);
        let d2 = d * d;
        let mut block = Vec::with_capacity(9);
        self.grid.block(position, 1, &mut block);
        for &cell in &block {
            for &j in &self.grid.cells[cell] {
                let v = self.displacement(position, self.centers[j as usize]);
                if v[0] * v[0] + v[1] * v[1] < d2 {
                    return Ok(Attempt::Rejected);
                }
            }
        }
        let id = self.centers.len() as u32;
        self.centers.push(position);
        let cell = self.grid.index_of(position);
        self.grid.cells[cell].push(id);
        Ok(Attempt::Accepted)
    }

    /// Indices of centers within `radius` of `p` (inclusive), via the grid.
    pub fn neighbors_within(&self, p: Point, radius: f64) -> Vec<usize> {
        let mut block = Vec::new();
        self.grid.block(p, self.grid.rings_for(radius), &mut block);
        let r2 = radius * radius;
        let mut out: Vec<usize> = block
            .iter()
            .flat_map(|&c| self.grid.cells[c].iter().map(|&j| j as usize))
            .filter(|&j| {
                let v = self.displacement(p, self.centers[j]);
                v[0] * v[0] + v[1] * v[1] <= r2
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Same as [`neighbors_within`](Self::neighbors_within) by full scan.
    pub fn neighbors_within_bruteforce(&self, p: Point, radius: f64) -> Vec<usize> {
        let r2 = radius * radius;
        (0..self.centers.len())
            .filter(|&j| {
                let v = self.displacement(p, self.centers[j]);
                v[0] * v[0] + v[1] * v[1] <= r2
            })
            .collect()
    }

    /// Every center sits in the cell its position maps to, exactly once.
    pub fn index_is_consistent(&self) -> bool {
        let mut seen = vec![0u8; self.centers.len()];
        for (cell, members) in self.grid.cells.iter().enumerate() {
            for &j in members {
                let j = j as usize;
                if j >= seen.len() || self.grid.index_of(self.centers[j]) != cell {
                    return false;
                }
                seen[j] += 1;
            }
        }
        seen.iter().all(|&s| s == 1)
    }

    /// O(N²) audit of the hard-core constraint at the current diameter.
    pub fn is_overlap_free_bruteforce(&self) -> bool {
        let d = self.diameter();
        let d2 = d * d;
        for i in 0..self.centers.len() {
            for j in (i + 1)..self.centers.len() {
                let v = self.displacement(self.centers[i], self.centers[j]);
                if v[0] * v[0] + v[1] * v[1] < d2 {
                    return false;
                }
            }
        }
        true
    }

    /// Number density `N/L²`.
    pub fn number_density(&self) -> f64 {
        self.centers.len() as f64 / (self.box_side * self.box_side)
    }

    /// Area fraction `(N/L²)·π·D(t)²/4`.
    pub fn coverage(&self) -> f64 {
        let d = self.diameter();
        self.number_density() * std::f64::consts::PI * d * d / 4.0
    }

    /// Pair correlation histogram on `[0, r_max)` with bin width `dr`; see
    /// [`pair_correlation_of`].
    pub fn pair_correlation(&self, r_max: f64, dr: f64) -> Result<DistributionHistogram> {
        pair_correlation_of(&self.centers, self.box_side, self.current_time, r_max, dr)
    }
}

fn min_image(box_side: f64, a: Point, b: Point) -> Point {
    let half = 0.5 * box_side;
    let wrap = |mut d: f64| {
        if d > half {
            d -= box_side;
        } else if d < -half {
            d += box_side;
        }
        d
    };
    [wrap(a[0] - b[0]), wrap(a[1] - b[1])]
}

/// Pair correlation of arbitrary points in the periodic square `[0, L)²`.
///
/// Bin `k` holds `N_k / (N · 2π r_mid dr · ρ)` where `N_k` counts ordered
/// pairs. The periodic box needs no edge correction.
pub fn pair_correlation_of(
    centers: &[Point],
    box_side: f64,
    time: f64,
    r_max: f64,
    dr: f64,
) -> Result<DistributionHistogram> {
    if !(dr.is_finite() && dr > 0.0) {
        return Err(domain(format!("dr must be positive, got {dr}")));
    }
    if !(r_max > 0.0 && r_max <= 0.5 * box_side) {
        return Err(domain(format!("r_max must lie in (0, L/2 = {}], got {r_max}", 0.5 * box_side)));
    }
    if centers.iter().flatten().any(|v| !(0.0..box_side).contains(v)) {
        return Err(domain(format!("points must lie in [0, {box_side})²")));
    }
    let bins = (r_max / dr - 1e-9).ceil() as usize;
    let mut grid = CellGrid::new(box_side, r_max);
    for (i, &p) in centers.iter().enumerate() {
        let cell = grid.index_of(p);
        grid.cells[cell].push(i as u32);
    }
    let counts = pair_counts(&grid, centers, box_side, r_max, dr, bins);
    let n = centers.len() as f64;
    let rho = n / (box_side * box_side);
    let values = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            if c == 0 {
                return 0.0;
            }
            let r_mid = (k as f64 + 0.5) * dr;
            c as f64 / (n * 2.0 * std::f64::consts::PI * r_mid * dr * rho)
        })
        .collect();
    Ok(DistributionHistogram::new(
        HistogramKind::PairCorrelation,
        dr,
        time,
        values,
        Normalization { box_measure: box_side * box_side, replicas: 1, density: rho },
    ))
}

fn pair_counts(grid: &CellGrid, centers: &[Point], box_side: f64, r_max: f64, dr: f64, bins: usize) -> Vec<u64> {
    let r2max = r_max * r_max;
    centers
        .par_iter()
        .enumerate()
        .fold(
            || (vec![0u64; bins], Vec::new()),
            |(mut counts, mut block), (i, &p)| {
                grid.block(p, 1, &mut block);
                for &cell in &block {
                    for &j in &grid.cells[cell] {
                        if j as usize == i {
                            continue;
                        }
                        let v = min_image(box_side, p, centers[j as usize]);
                        let r2 = v[0] * v[0] + v[1] * v[1];
                        if r2 < r2max {
                            let k = (r2.sqrt() / dr) as usize;
                            if k < bins {
                                counts[k] += 1;
                            }
                        }
                    }
                }
                (counts, block)
            },
        )
        .map(|(counts, _)| counts)
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Number of attempts made in `[0, t]` on a square of side `box_side`.
pub fn attempts_until(box_side: f64, t: f64) -> u64 {
    (box_side * box_side * t + 1e-9).floor() as u64
}

/// Runs one replica from an empty square, calling `on_snapshot` at each
/// snapshot time (sorted ascending).
pub fn run_with<F>(
    schedule: SizeSchedule,
    box_side: f64,
    rng: &mut ReplicaRng,
    snapshot_times: &[f64],
    mut on_snapshot: F,
) -> Result<()>
where
    F: FnMut(&PlaneDeposit),
{
    crate::sim1d::check_snapshots(snapshot_times)?;
    let mut deposit = PlaneDeposit::new(schedule, box_side)?;
    let area = box_side * box_side;
    let mut k: u64 = 0;
    for &t in snapshot_times {
        let target = attempts_until(box_side, t);
        while k < target {
            k += 1;
            let clamp = |v: f64| if v >= box_side { 0.0 } else { v };
            let p = [clamp(rng.random::<f64>() * box_side), clamp(rng.random::<f64>() * box_side)];
            deposit.attempt(p, k as f64 / area)?;
        }
        deposit.advance_to(t)?;
        on_snapshot(&deposit);
    }
    Ok(())
}

/// Runs one replica seeded with `seed`, returning a copy at each snapshot.
pub fn run(schedule: SizeSchedule, box_side: f64, seed: u64, snapshot_times: &[f64]) -> Result<Vec<PlaneDeposit>> {
    let mut rng = ReplicaRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(snapshot_times.len());
    run_with(schedule, box_side, &mut rng, snapshot_times, |d| out.push(d.clone()))?;
    Ok(out)
}
