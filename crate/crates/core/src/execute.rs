//! Runs a [`RunConfig`] and writes its artifacts.
//!
//! Every file is first written to a staging directory inside the output
//! directory and moved into place only when the whole run succeeds. CSV files
//! start with `# key=value` lines followed by comma-separated rows with nine
//! significant digits; identical config and seed give identical bytes.
//!
//! Curves are written as bin averages. Peaks of the Monte Carlo engines come
//! from those histograms; the solvers report the peak of the pointwise curve.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{find_peak, log_fit, LogFit, PeakSeries, ReplicaAccumulator, SeriesSource};
use crate::config::{figure_plan, Figure, Mode, RunConfig};
use crate::error::{Error, Result};
use crate::exact1d::ExactSolver;
use crate::histogram::DistributionHistogram;
use crate::kinetics1d::KineticState;
use crate::replicas::fold_replicas;
use crate::schedules::SizeSchedule;
use crate::{sim1d, sim2d};

/// `(t, samples)` with samples `(x, y, stderr)`.
type Curve = (f64, Vec<(f64, f64, f64)>);

/// Replicas simulated per parallel batch.
const CHUNK: usize = 64;

pub const PROGRAM: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Summary written to `manifest.json`.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub program: String,
    pub version: String,
    pub mode: Mode,
    pub figure: Option<Figure>,
    pub seed: u64,
    pub threads: Option<usize>,
    /// SHA-256 of the canonical config JSON.
    pub config_sha256: String,
    pub config: RunConfig,
    pub wall_time_seconds: f64,
    pub files: Vec<FileEntry>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Validates `config`, runs its [`RunConfig::effective`] form on a pool of `config.threads` workers, and
/// writes its files plus `manifest.json` into `config.out_dir`.
pub fn execute(config: &RunConfig) -> Result<Manifest> {
    config.validate()?;
    let config = &config.effective();
    let started = Instant::now();
    let out = &config.out_dir;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let staging = tempfile::Builder::new().prefix(".staging-").tempdir_in(out).map_err(io_err(out))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut written = pool.install(|| run_mode(config, staging.path()))?;
    written.sort();
    written.dedup();

    let mut files = Vec::with_capacity(written.len());
    for rel in &written {
        let src = staging.path().join(rel);
        let bytes = fs::read(&src).map_err(io_err(&src))?;
        files.push(FileEntry {
            path: rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
    }
    let manifest = Manifest {
        program: PROGRAM.into(),
        version: VERSION.into(),
        mode: config.mode,
        figure: config.figure,
        seed: config.seed,
        threads: config.threads,
        config_sha256: sha256_hex(config.to_json().as_bytes()),
        config: config.clone(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        files,
    };
    let manifest_path = staging.path().join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;

    let mut moved: Vec<PathBuf> = Vec::new();
    let result = written.iter().chain(std::iter::once(&PathBuf::from("manifest.json"))).try_for_each(|rel| {
        let dest = out.join(rel);
        if let Some(parent) = dest.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let src = staging.path().join(rel);
        fs::rename(&src, &dest).map_err(io_err(&dest))?;
        moved.push(dest);
        Ok(())
    });
    if let Err(e) = result {
        for p in moved {
            let _ = fs::remove_file(p);
        }
        return Err(e);
    }
    Ok(manifest)
}

fn run_mode(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    match config.mode {
        Mode::Sim1d => run_sim1d(config, dir),
        Mode::Sim2d => run_sim2d(config, dir),
        Mode::Kinetics => run_kinetics(config, dir),
        Mode::Exact => run_exact(config, dir),
        Mode::Analyze => run_analyze(config, dir),
        Mode::Figure => run_figure(config, dir),
    }
}

/// Formats with nine significant digits.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    format!("{v:.8e}")
}

struct Csv {
    header: Vec<(String, String)>,
    columns: &'static str,
    rows: Vec<Vec<f64>>,
}

impl Csv {
    fn new(header: Vec<(String, String)>, columns: &'static str) -> Self {
        Self { header, columns, rows: Vec::new() }
    }

    fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.header.push((key.into(), value.to_string()));
        self
    }

    fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        let mut text = String::new();
        for (k, v) in &self.header {
            text.push_str(&format!("# {k}={v}\n"));
        }
        text.push_str(&format!("# columns={}\n", self.columns));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let mut f = fs::File::create(&path).map_err(io_err(&path))?;
        f.write_all(text.as_bytes()).map_err(io_err(&path))?;
        Ok(PathBuf::from(name))
    }
}

fn base_header(config: &RunConfig, schedule: &SizeSchedule) -> Vec<(String, String)> {
    let mut h = vec![
        ("program".to_string(), PROGRAM.to_string()),
        ("version".to_string(), VERSION.to_string()),
        ("mode".to_string(), config.mode.name().to_string()),
    ];
    for part in schedule.describe().split(' ') {
        if let Some((k, v)) = part.split_once('=') {
            h.push((format!("schedule.{k}"), v.to_string()));
        }
    }
    h.push(("tau".into(), schedule.time_scale().to_string()));
    h.push(("seed".into(), config.seed.to_string()));
    h
}

fn snapshot_name(prefix: &str, t: f64) -> String {
    format!("{prefix}_t{t}.csv")
}

fn curve_csv(header: Vec<(String, String)>, h: &DistributionHistogram, axis: &'static str) -> Csv {
    let mut csv = Csv::new(header, axis)
        .with("t", h.snapshot_time)
        .with("bin_width", h.bin_width)
        .with("replicas", h.normalization.replicas)
        .with("density", format_number(h.normalization.density));
    csv.rows = h.points().into_iter().map(|(x, y, e)| vec![x, y, e]).collect();
    csv
}

/// Peak of every curve; snapshots without a peak are skipped.
fn peaks_csv(header: Vec<(String, String)>, source: SeriesSource, curves: &[Curve]) -> Csv {
    let mut csv = Csv::new(header, "t,x,y,stderr,boundary").with("source", source_name(source));
    for (t, curve) in curves {
        if let Ok(p) = find_peak(curve) {
            csv.rows.push(vec![*t, p.x, p.y, p.error, if p.boundary { 1.0 } else { 0.0 }]);
        }
    }
    csv
}

fn histogram_curves(curves: &[DistributionHistogram]) -> Vec<Curve> {
    curves.iter().map(|h| (h.snapshot_time, h.points())).collect()
}

fn pointwise(curve: Vec<(f64, f64)>) -> Vec<(f64, f64, f64)> {
    curve.into_iter().map(|(x, y)| (x, y, 0.0)).collect()
}

fn source_name(source: SeriesSource) -> &'static str {
    match source {
        SeriesSource::Sim1d => "sim1d",
        SeriesSource::Sim2d => "sim2d",
        SeriesSource::Kinetics => "kinetics",
        SeriesSource::Exact => "exact",
    }
}

fn mean_and_error(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

fn run_sim1d(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let schedule = config.schedule()?;
    let length = config.box_size_or_default();
    let replicas = config.replicas_or_default();
    let snaps = &config.snapshots;
    let width = config.histogram.bin_width;
    let mut accs = vec![ReplicaAccumulator::new(); snaps.len()];
    let mut density = vec![(0.0, 0.0); snaps.len()];
    let mut failure = None;
    fold_replicas(
        config.seed,
        replicas,
        CHUNK,
        |_, rng| -> Result<Vec<(DistributionHistogram, f64)>> {
            let mut out = Vec::with_capacity(snaps.len());
            let mut err = None;
            sim1d::run_with(schedule, length, rng, snaps, |d| match d.gap_histogram(width) {
                Ok(h) => out.push((h, d.density())),
                Err(e) => err = Some(e),
            })?;
            err.map_or(Ok(out), Err)
        },
        |_, r| match r {
            Ok(snapshots) => {
                for (k, (h, n)) in snapshots.into_iter().enumerate() {
                    if let Err(e) = accs[k].push(&h) {
                        failure.get_or_insert(e);
                    }
                    density[k].0 += n;
                    density[k].1 += n * n;
                }
            }
            Err(e) => {
                failure.get_or_insert(e);
            }
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let header = base_header(config, &schedule);
    let header = || {
        let mut h = header.clone();
        h.push(("box_length".into(), length.to_string()));
        h
    };
    let mut files = Vec::new();
    let mut curves = Vec::new();
    for acc in &accs {
        let h = acc.finish()?;
        files.push(curve_csv(header(), &h, "x,G,stderr").write(dir, &snapshot_name("gaps", h.snapshot_time))?);
        curves.push(h);
    }
    let mut dens = Csv::new(header(), "t,n,stderr").with("replicas", replicas);
    for (k, &t) in snaps.iter().enumerate() {
        let (m, e) = mean_and_error(density[k].0, density[k].1, replicas);
        dens.rows.push(vec![t, m, e]);
    }
    files.push(dens.write(dir, "density.csv")?);
    files.push(peaks_csv(header(), SeriesSource::Sim1d, &histogram_curves(&curves)).write(dir, "peaks.csv")?);
    log::info!("sim1d: {replicas} replicas of L = {length} done");
    Ok(files)
}

fn run_sim2d(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let schedule = config.schedule()?;
    let side = config.box_size_or_default();
    let replicas = config.replicas_or_default();
    let snaps = &config.snapshots;
    let (r_max, dr) = (config.histogram.r_max, config.histogram.dr);
    let mut accs = vec![ReplicaAccumulator::new(); snaps.len()];
    let mut coverage = vec![[0.0; 4]; snaps.len()];
    let mut failure = None;
    fold_replicas(
        config.seed,
        replicas,
        CHUNK,
        |_, rng| -> Result<Vec<(DistributionHistogram, f64, f64)>> {
            let mut out = Vec::with_capacity(snaps.len());
            let mut err = None;
            sim2d::run_with(schedule, side, rng, snaps, |d| match d.pair_correlation(r_max, dr) {
                Ok(h) => out.push((h, d.coverage(), d.number_density())),
                Err(e) => err = Some(e),
            })?;
            err.map_or(Ok(out), Err)
        },
        |_, r| match r {
            Ok(snapshots) => {
                for (k, (h, c, rho)) in snapshots.into_iter().enumerate() {
                    if let Err(e) = accs[k].push(&h) {
                        failure.get_or_insert(e);
                    }
                    coverage[k][0] += c;
                    coverage[k][1] += c * c;
                    coverage[k][2] += rho;
                    coverage[k][3] += rho * rho;
                }
            }
            Err(e) => {
                failure.get_or_insert(e);
            }
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let base = base_header(config, &schedule);
    let header = || {
        let mut h = base.clone();
        h.push(("box_side".into(), side.to_string()));
        h
    };
    let mut files = Vec::new();
    let mut curves = Vec::new();
    for acc in &accs {
        let h = acc.finish()?;
        files.push(curve_csv(header(), &h, "r,P2,stderr").write(dir, &snapshot_name("pair", h.snapshot_time))?);
        curves.push(h);
    }
    let mut cov = Csv::new(header(), "t,coverage,stderr,density,density_stderr").with("replicas", replicas);
    for (k, &t) in snaps.iter().enumerate() {
        let (c, ce) = mean_and_error(coverage[k][0], coverage[k][1], replicas);
        let (n, ne) = mean_and_error(coverage[k][2], coverage[k][3], replicas);
        cov.rows.push(vec![t, c, ce, n, ne]);
    }
    files.push(cov.write(dir, "coverage.csv")?);
    files.push(peaks_csv(header(), SeriesSource::Sim2d, &histogram_curves(&curves)).write(dir, "peaks.csv")?);
    log::info!("sim2d: {replicas} replicas of L = {side} done");
    Ok(files)
}

fn curve_bins(config: &RunConfig) -> usize {
    (config.solver.x_max / config.histogram.bin_width - 1e-9).ceil() as usize
}

fn solver_histogram(config: &RunConfig, t: f64, values: Vec<f64>, density: f64) -> DistributionHistogram {
    DistributionHistogram::new(
        crate::histogram::HistogramKind::GapDensity,
        config.histogram.bin_width,
        t,
        values,
        crate::histogram::Normalization { box_measure: f64::INFINITY, replicas: 1, density },
    )
}

fn run_kinetics(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let schedule = config.schedule()?;
    let mut state = KineticState::bootstrap(schedule, config.solver.t0, config.solver.dx)?;
    let bins = curve_bins(config);
    let header = || {
        let mut h = base_header(config, &schedule);
        h.push(("dx".into(), config.solver.dx.to_string()));
        h.push(("t0".into(), config.solver.t0.to_string()));
        h
    };
    let mut files = Vec::new();
    let mut curves = Vec::new();
    let mut diag = Csv::new(header(), "t,n,residual,total_shift,contact");
    for &t in &config.snapshots {
        state.advance_to(t)?;
        let d = state.diagnostics();
        log::info!("kinetics: t = {t}, n = {:.6}, residual = {:.2e}", d.density, d.conservation_residual);
        diag.rows.push(vec![t, d.density, d.conservation_residual, d.total_shift, state.contact_value()]);
        let h = solver_histogram(config, t, state.binned(config.histogram.bin_width, bins), d.density);
        files.push(curve_csv(header(), &h, "x,G,stderr").write(dir, &snapshot_name("gaps", t))?);
        curves.push((t, pointwise(state.gap_curve())));
    }
    files.push(diag.write(dir, "diagnostics.csv")?);
    files.push(peaks_csv(header(), SeriesSource::Kinetics, &curves).write(dir, "peaks.csv")?);
    Ok(files)
}

fn run_exact(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let schedule = config.schedule()?;
    let solver = ExactSolver::default();
    let bins = curve_bins(config);
    let header = || base_header(config, &schedule);
    let mut files = Vec::new();
    let mut curves = Vec::new();
    let mut cov = Csv::new(header(), "t,coverage,contact");
    for &t in &config.snapshots {
        let n = solver.density(t);
        cov.rows.push(vec![t, solver.coverage(t), solver.contact_value(t)]);
        let h = solver_histogram(config, t, solver.binned(t, config.histogram.bin_width, bins), n);
        files.push(curve_csv(header(), &h, "x,G,stderr").write(dir, &snapshot_name("gaps", t))?);
        curves.push((t, pointwise(solver.curve(t, config.solver.dx, config.solver.x_max))));
    }
    files.push(cov.write(dir, "coverage.csv")?);
    files.push(peaks_csv(header(), SeriesSource::Exact, &curves).write(dir, "peaks.csv")?);
    Ok(files)
}

/// Reads a `peaks.csv` written by any engine.
pub fn read_peaks(path: &Path) -> Result<PeakSeries> {
    let path = if path.is_dir() { path.join("peaks.csv") } else { path.to_path_buf() };
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut source = None;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if let Some(meta) = line.strip_prefix("# ") {
            if let Some(v) = meta.strip_prefix("source=") {
                source = Some(
                    serde_json::from_value::<SeriesSource>(serde_json::Value::String(v.into()))
                        .map_err(|_| Error::Parse(format!("{}: unknown source `{v}`", path.display())))?,
                );
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        if cells.len() < 4 {
            return Err(Error::Parse(format!("{}:{}: expected t,x,y,stderr", path.display(), lineno + 1)));
        }
        rows.push((cells[0], cells[2], cells[3]));
    }
    let source = source.ok_or_else(|| Error::Parse(format!("{}: missing `# source=` line", path.display())))?;
    PeakSeries::from_points(source, rows)
}

fn write_fit(dir: &Path, name: &str, fit: &LogFit) -> Result<PathBuf> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(fit).expect("fit serializes") + "\n";
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(PathBuf::from(name))
}

fn run_analyze(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let input = config.analysis.input.as_ref().expect("validated");
    let series = read_peaks(input)?;
    let fit = log_fit(&series, config.analysis.t_min)?;
    log::info!("analyze: slope = {:.4} ± {:.4} over {} points", fit.slope, fit.slope_error, fit.n_points);
    Ok(vec![write_fit(dir, "fit.json", &fit)?])
}

fn run_figure(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let figure = config.figure.expect("validated");
    let plan = figure_plan(figure, config.seed, config.desk_scale);
    let mut files = Vec::new();
    for (sub, part) in &plan.parts {
        let mut part = part.clone();
        part.threads = config.threads;
        let subdir = dir.join(sub);
        fs::create_dir_all(&subdir).map_err(io_err(&subdir))?;
        log::info!("{}: running part `{sub}` ({})", figure.name(), part.mode.name());
        for f in run_mode(&part, &subdir)? {
            files.push(Path::new(sub).join(f));
        }
    }
    for fit in &plan.fits {
        let series = read_peaks(&dir.join(&fit.part))?;
        let result = log_fit(&series, fit.t_min)?;
        log::info!("{}: {} slope = {:.4} ± {:.4}", figure.name(), fit.name, result.slope, result.slope_error);
        files.push(write_fit(dir, &format!("fit_{}.json", fit.name), &result)?);
    }
    let plan_path = dir.join("plan.json");
    fs::write(&plan_path, serde_json::to_string_pretty(&plan).expect("plan serializes") + "\n")
        .map_err(io_err(&plan_path))?;
    files.push(PathBuf::from("plan.json"));
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1.00000000e0");
        assert_eq!(format_number(-0.000123456789123), "-1.23456789e-4");
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
