//! Command line entry points.
//!
//! Every subcommand writes one data file (CSV except `timescales`, which is
//! JSON) plus `<out>.manifest.json` describing the run: resolved
//! configuration, seed, version, wall-clock bounds, output list, parameters,
//! and summary results. The manifest is written even when the run fails, and
//! an earlier manifest can be passed back through `--config` to repeat a run.
//!
//! Exit codes: 0 on success with all built-in checks passing, 1 on errors,
//! 2 when the run finished but a check failed.

use crate::analytic::{
    ansatz_factor, factor_avg, factor_floor, purity_avg, tau_scales, DeltaTilde, FactorKind,
    Purity,
};
use crate::ensembles::{
    sample_gue, sample_state, semicircle_cdf, semicircle_density, semicircle_radius,
    EnsembleConfig, HermitianObservable, Measure,
};
use crate::error::{Error, Result};
use crate::montecarlo::{decoherence_factor, estimate, superfidelity};
use crate::rng::{derive_seed, domain, substream};
use crate::sbs::{hoeffding_experiment, micro_evolve, micro_offdiag_norm};
use crate::sysavg::{system_average_curve, CurveRequest, QuadratureSpec};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(
    name = "vnm",
    version,
    about = "Random-matrix environment decoherence and broadcast-structure toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectrum-averaged macrofraction factor over a g t grid.
    Curve(CurveArgs),
    /// Monte Carlo cross-check of the closed-form averages.
    McVerify(McVerifyArgs),
    /// Gaussian-regime timescales of a configuration.
    Timescales(TimescalesArgs),
    /// Pointwise dominance scan of the single-exponential envelope.
    AnsatzCheck(AnsatzCheckArgs),
    /// Concentration of the broadcast-bound proxy over realizations.
    Concentration(ConcentrationArgs),
    /// Exact small-system evolution against the realized coherence bound.
    MicroCheck(MicroCheckArgs),
    /// Pooled eigenvalue histogram against the limiting semicircle.
    Semicircle(SemicircleArgs),
}

/// Flags shared by all subcommands; unset values fall back to the config
/// file and then to built-in defaults.
#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// JSON config file: either flat ensemble fields or an earlier manifest.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Environment copy dimension.
    #[arg(long)]
    d: Option<usize>,
    /// System (pointer) dimension.
    #[arg(long)]
    ds: Option<usize>,
    /// Environment GUE weight parameter.
    #[arg(long)]
    eta_e: Option<f64>,
    /// System GUE weight parameter.
    #[arg(long)]
    eta_s: Option<f64>,
    /// Unobserved environment copies.
    #[arg(long)]
    n_uno: Option<usize>,
    /// Copies per macrofraction.
    #[arg(long)]
    n_mac: Option<usize>,
    /// Number of macrofractions.
    #[arg(long)]
    m: Option<usize>,
    /// State measure: hs or bures.
    #[arg(long)]
    measure: Option<String>,
    /// Master seed for all random draws.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses the default pool.
    #[arg(long)]
    workers: Option<usize>,
    /// Output file path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Factor kind: gamma or superfid.
    #[arg(long, default_value = "gamma")]
    kind: String,
    /// Copy count exponent; defaults to n_uno for gamma, n_mac for superfid.
    #[arg(long)]
    power: Option<u32>,
    /// Largest g t value.
    #[arg(long, default_value_t = 20.0)]
    t_max: f64,
    /// Grid points including both endpoints.
    #[arg(long, default_value_t = 201)]
    grid: usize,
}

#[derive(Args, Debug)]
struct McVerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Quantity to verify: purity, gamma, or superfid.
    #[arg(long, default_value = "gamma")]
    quantity: String,
    /// Monte Carlo samples per grid row.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Largest scaled gap-time value.
    #[arg(long, default_value_t = 4.0)]
    t_max: f64,
    /// Grid points including both endpoints.
    #[arg(long, default_value_t = 6)]
    grid: usize,
}

#[derive(Args, Debug)]
struct TimescalesArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct AnsatzCheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest dimension scanned (from 2).
    #[arg(long, default_value_t = 20)]
    d_max: usize,
    /// Scaled gap-time step.
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    /// Largest scaled gap-time value.
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
}

#[derive(Args, Debug)]
struct ConcentrationArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Evolution time; defaults to the fidelity timescale tau_fid.
    #[arg(long)]
    t: Option<f64>,
    /// Realizations drawn.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Comma-separated deviation thresholds.
    #[arg(long, default_value = "0.1,0.25,0.5,0.75")]
    deltas: String,
}

#[derive(Args, Debug)]
struct MicroCheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest g t value.
    #[arg(long, default_value_t = 4.0)]
    t_max: f64,
    /// Grid points including both endpoints.
    #[arg(long, default_value_t = 9)]
    grid: usize,
}

#[derive(Args, Debug)]
struct SemicircleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Independent spectra pooled into the histogram.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Histogram bins.
    #[arg(long, default_value_t = 60)]
    bins: usize,
}

/// Run descriptor written next to every output file.
#[derive(Serialize, Deserialize, Debug)]
struct RunManifest {
    command: String,
    config: EnsembleConfig,
    seed: u64,
    version: String,
    started_unix: u64,
    finished_unix: u64,
    outputs: Vec<String>,
    params: Value,
    results: Value,
}

/// Flat config file: any subset of the ensemble fields.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    d: Option<usize>,
    d_s: Option<usize>,
    eta_e: Option<f64>,
    eta_s: Option<f64>,
    n_uno: Option<usize>,
    n_mac: Option<usize>,
    m: Option<usize>,
    measure: Option<Measure>,
    master_seed: Option<u64>,
}

/// Built-in fallbacks; commands may override the copy counts.
#[derive(Clone, Copy)]
struct ConfigDefaults {
    n_uno: usize,
    m: usize,
    n_mac: usize,
}

const STANDARD_DEFAULTS: ConfigDefaults = ConfigDefaults {
    n_uno: 1,
    m: 1,
    n_mac: 1,
};

/// Precedence: built-in defaults, then the config file, then flags.
fn resolve_config(common: &CommonArgs, defaults: ConfigDefaults) -> Result<EnsembleConfig> {
    let mut d = 2usize;
    let mut d_s = 2usize;
    let mut eta_e = 1.0f64;
    let mut eta_s = 1.0f64;
    let mut n_uno = defaults.n_uno;
    let mut m = defaults.m;
    let mut n_mac = defaults.n_mac;
    let mut measure = Measure::Bures;
    let mut master_seed = 1u64;

    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)?;
        if let Ok(manifest) = serde_json::from_str::<RunManifest>(&text) {
            let c = manifest.config;
            d = c.d;
            d_s = c.d_s;
            eta_e = c.eta_e;
            eta_s = c.eta_s;
            n_uno = c.n_uno;
            m = c.m;
            n_mac = c.n_mac;
            measure = c.measure;
            master_seed = c.master_seed;
        } else {
            let part: PartialConfig = serde_json::from_str(&text)?;
            if let Some(v) = part.d {
                d = v;
            }
            if let Some(v) = part.d_s {
                d_s = v;
            }
            if let Some(v) = part.eta_e {
                eta_e = v;
            }
            if let Some(v) = part.eta_s {
                eta_s = v;
            }
            if let Some(v) = part.n_uno {
                n_uno = v;
            }
            if let Some(v) = part.m {
                m = v;
            }
            if let Some(v) = part.n_mac {
                n_mac = v;
            }
            if let Some(v) = part.measure {
                measure = v;
            }
            if let Some(v) = part.master_seed {
                master_seed = v;
            }
        }
    }

    if let Some(v) = common.d {
        d = v;
    }
    if let Some(v) = common.ds {
        d_s = v;
    }
    if let Some(v) = common.eta_e {
        eta_e = v;
    }
    if let Some(v) = common.eta_s {
        eta_s = v;
    }
    if let Some(v) = common.n_uno {
        n_uno = v;
    }
    if let Some(v) = common.m {
        m = v;
    }
    if let Some(v) = common.n_mac {
        n_mac = v;
    }
    if let Some(v) = &common.measure {
        measure = Measure::from_str(v)?;
    }
    if let Some(v) = common.seed {
        master_seed = v;
    }

    let n_obs = m * n_mac;
    let config = EnsembleConfig {
        d,
        d_s,
        eta_e,
        eta_s,
        n: n_uno + n_obs,
        n_uno,
        n_obs,
        m,
        n_mac,
        measure,
        master_seed,
    };
    config.validate()?;
    Ok(config)
}

fn fe(x: f64) -> String {
    format!("{x:.16e}")
}

/// Evenly spaced grid over [0, top] including both endpoints.
fn linspace(top: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::Parameter("grid needs at least one point".into()));
    }
    if !top.is_finite() || top < 0.0 {
        return Err(Error::Parameter(format!(
            "grid endpoint must be finite and nonnegative, got {top}"
        )));
    }
    if points == 1 {
        return Ok(vec![0.0]);
    }
    Ok((0..points)
        .map(|i| top * i as f64 / (points - 1) as f64)
        .collect())
}

fn parse_deltas(spec: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for piece in spec.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let v: f64 = piece
            .parse()
            .map_err(|_| Error::Parameter(format!("bad deviation value {piece:?}")))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Parameter("no deviation thresholds given".into()));
    }
    Ok(out)
}

/// Text data file: comment lines, one header, value rows.
struct DataFile {
    lines: Vec<String>,
}

impl DataFile {
    fn new(config: &EnsembleConfig) -> Result<Self> {
        let json = serde_json::to_string(config)?;
        Ok(DataFile {
            lines: vec![format!("# config {json}")],
        })
    }

    fn comment(&mut self, text: String) {
        self.lines.push(format!("# {text}"));
    }

    fn header(&mut self, columns: &str) {
        self.lines.push(columns.to_string());
    }

    fn row(&mut self, cells: &[String]) {
        self.lines.push(cells.join(","));
    }

    fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.lines.join("\n") + "\n")?;
        Ok(())
    }
}

fn parse_kind(name: &str) -> Result<FactorKind> {
    match name {
        "gamma" => Ok(FactorKind::Decoherence),
        "superfid" => Ok(FactorKind::Superfidelity),
        other => Err(Error::Parameter(format!(
            "unknown factor kind {other:?}; expected gamma or superfid"
        ))),
    }
}

fn in_pool<T: Send>(workers: usize, body: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        body()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        pool.install(body)
    }
}

fn cmd_curve(args: &CurveArgs, config: &EnsembleConfig, out: &Path) -> Result<(i32, Value)> {
    let kind = parse_kind(&args.kind)?;
    let power = args.power.unwrap_or(match kind {
        FactorKind::Decoherence => config.n_uno as u32,
        FactorKind::Superfidelity => config.n_mac as u32,
    });
    let grid = linspace(args.t_max, args.grid)?;
    let request = CurveRequest {
        config: config.clone(),
        kind,
        power,
        g_t_grid: grid,
        quadrature: QuadratureSpec::default(),
    };
    let workers = args.common.workers.unwrap_or(0);
    let curve = in_pool(workers, || system_average_curve(&request))?;
    let purity = Purity::measure_average(config.measure, config.d)?;
    let floor = factor_floor(kind, config.d, purity)?.powi(power as i32);
    let mut file = DataFile::new(config)?;
    file.header("g_t,value,floor");
    for (gt, v) in curve.g_t.iter().zip(&curve.values) {
        file.row(&[fe(*gt), fe(*v), fe(floor)]);
    }
    file.write(out)?;
    let results = json!({
        "kind": args.kind,
        "power": power,
        "first_value": curve.values.first(),
        "last_value": curve.values.last(),
        "floor_power": floor,
    });
    Ok((0, results))
}

fn cmd_mc_verify(args: &McVerifyArgs, config: &EnsembleConfig, out: &Path) -> Result<(i32, Value)> {
    if !matches!(args.quantity.as_str(), "purity" | "gamma" | "superfid") {
        return Err(Error::Parameter(format!(
            "unknown quantity {:?}; expected purity, gamma, or superfid",
            args.quantity
        )));
    }
    let workers = args.common.workers.unwrap_or(0);
    let grid = linspace(args.t_max, args.grid)?;
    let purity = Purity::measure_average(config.measure, config.d)?;
    let mut file = DataFile::new(config)?;
    file.header("delta,analytic,mc_mean,mc_stderr,z");
    let mut worst_z = 0.0f64;
    for (row, &delta) in grid.iter().enumerate() {
        let row_seed = derive_seed(config.master_seed, row as u64);
        let dt = DeltaTilde::new(delta)?;
        let (analytic, est) = match args.quantity.as_str() {
            "purity" => {
                let analytic = purity_avg(config.measure, config.d)?;
                let (d, measure) = (config.d, config.measure);
                let est = estimate(
                    move |rng| sample_state(d, measure, rng).expect("sampler").purity(),
                    args.samples,
                    row_seed,
                    workers,
                )?;
                (analytic, est)
            }
            name => {
                let kind = parse_kind(if name == "gamma" { "gamma" } else { "superfid" })?;
                let analytic = factor_avg(kind, config.d, purity, dt)?;
                // Unit pointer gap; the evolution time that realizes the
                // requested scaled value is delta * sqrt(eta_E).
                let t = delta * config.eta_e.sqrt();
                let (d, eta_e, measure) = (config.d, config.eta_e, config.measure);
                let est = estimate(
                    move |rng| {
                        let b = sample_gue(d, eta_e, rng).expect("sampler");
                        let rho = sample_state(d, measure, rng).expect("sampler");
                        match kind {
                            FactorKind::Decoherence => decoherence_factor(&b, &rho, 1.0, t),
                            FactorKind::Superfidelity => superfidelity(&b, &rho, 1.0, t),
                        }
                    },
                    args.samples,
                    row_seed,
                    workers,
                )?;
                (analytic, est)
            }
        };
        // Zero spread happens only when the sampled quantity is an exact
        // identity; then agreement is judged at rounding scale instead.
        let diff = est.mean - analytic;
        let z = if est.stderr > 0.0 {
            diff / est.stderr
        } else if diff.abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY * diff.signum()
        };
        worst_z = if z.abs() > worst_z.abs() { z } else { worst_z };
        file.row(&[fe(delta), fe(analytic), fe(est.mean), fe(est.stderr), fe(z)]);
    }
    file.write(out)?;
    let ok = worst_z.abs() <= 4.0;
    let results = json!({
        "quantity": args.quantity,
        "samples": args.samples,
        "worst_z": worst_z,
        "within_four_sigma": ok,
    });
    Ok((if ok { 0 } else { 2 }, results))
}

fn cmd_timescales(config: &EnsembleConfig, out: &Path) -> Result<(i32, Value)> {
    let tau = tau_scales(config)?;
    let payload = json!({
        "tau_dec": tau.tau_dec,
        "tau_fid": tau.tau_fid,
        "ratio": tau.ratio(),
        "tau_pair_formula_constants": {
            "sqrt_eta_e": tau.sqrt_eta_e(),
            "sqrt_d_plus_one": tau.sqrt_d_plus_one(),
            "coefficient": tau.pair_coefficient(),
        },
    });
    std::fs::write(out, serde_json::to_string_pretty(&payload)? + "\n")?;
    Ok((0, payload))
}

fn cmd_ansatz_check(args: &AnsatzCheckArgs, config: &EnsembleConfig, out: &Path) -> Result<(i32, Value)> {
    if args.d_max < 2 {
        return Err(Error::Parameter("dimension scan needs d_max >= 2".into()));
    }
    if !(args.grid_step > 0.0 && args.grid_step.is_finite()) || args.t_max <= 0.0 {
        return Err(Error::Parameter("scan grid must be positive".into()));
    }
    let steps = (args.t_max / args.grid_step).ceil() as usize + 1;
    let mut file = DataFile::new(config)?;
    file.header("d,max_gamma_minus_ansatz,max_superfid_minus_ansatz");
    let mut worst = f64::NEG_INFINITY;
    for d in 2..=args.d_max {
        let purity = Purity::bures_average(d)?;
        let mut max_gap = [f64::NEG_INFINITY; 2];
        for i in 0..steps {
            let dt = DeltaTilde::new((i as f64 * args.grid_step).min(args.t_max))?;
            for (slot, kind) in [FactorKind::Decoherence, FactorKind::Superfidelity]
                .into_iter()
                .enumerate()
            {
                let exact = factor_avg(kind, d, purity, dt)?;
                let envelope = ansatz_factor(kind, d, purity, dt)?;
                max_gap[slot] = max_gap[slot].max(exact - envelope);
            }
        }
        worst = worst.max(max_gap[0]).max(max_gap[1]);
        file.row(&[d.to_string(), fe(max_gap[0]), fe(max_gap[1])]);
    }
    file.write(out)?;
    let ok = worst <= 1e-12;
    let results = json!({
        "d_max": args.d_max,
        "worst_exceedance": worst,
        "envelope_dominates": ok,
    });
    Ok((if ok { 0 } else { 2 }, results))
}

fn cmd_concentration(args: &ConcentrationArgs, config: &EnsembleConfig, out: &Path) -> Result<(i32, Value)> {
    let t = match args.t {
        Some(v) => v,
        None => tau_scales(config)?.tau_fid,
    };
    let deltas = parse_deltas(&args.deltas)?;
    let workers = args.common.workers.unwrap_or(0);
    let rows = hoeffding_experiment(config, t, args.samples, &deltas, workers)?;
    let mut file = DataFile::new(config)?;
    file.comment(format!("t {}", fe(t)));
    file.header("delta,empirical_prob,bound");
    let mut ok = true;
    for row in &rows {
        ok &= row.empirical_prob <= row.bound + 1e-12;
        file.row(&[fe(row.delta), fe(row.empirical_prob), fe(row.bound)]);
    }
    file.write(out)?;
    let results = json!({
        "t": t,
        "samples": args.samples,
        "bound_holds": ok,
    });
    Ok((if ok { 0 } else { 2 }, results))
}

fn cmd_micro_check(args: &MicroCheckArgs, config: &EnsembleConfig, out: &Path) -> Result<(i32, Value)> {
    let grid = linspace(args.t_max, args.grid)?;
    let mut rng = substream(config.master_seed, domain::CLI, 0);
    // One fixed realization: pointer values from a GUE(d_S) draw, system
    // state in that pointer basis, one (B, rho) pair per environment copy.
    let pointer = sample_gue(config.d_s, config.eta_s, &mut rng)?;
    let a_obs = HermitianObservable::from_diagonal(
        pointer
            .eigenvalues()
            .as_slice()
            .ok_or_else(|| Error::Internal("eigenvalues not contiguous".into()))?,
    )?;
    let rho_s = sample_state(config.d_s, config.measure, &mut rng)?;
    let mut bs = Vec::with_capacity(config.n);
    let mut envs = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        bs.push(sample_gue(config.d, config.eta_e, &mut rng)?);
        envs.push(sample_state(config.d, config.measure, &mut rng)?);
    }
    let g = config.g();
    let values: Vec<f64> = (0..config.d_s)
        .map(|i| a_obs.matrix()[(i, i)].re)
        .collect();
    let mut file = DataFile::new(config)?;
    file.header("g_t,offdiag_norm,coherence_bound");
    let mut ok = true;
    let mut worst_excess = f64::NEG_INFINITY;
    for &gt in &grid {
        let t = gt / g;
        let state = micro_evolve(&a_obs, &bs, &rho_s, &envs, t, config.n_uno)?;
        let norm = micro_offdiag_norm(&state)?;
        let mut bound = 0.0;
        for a in 0..config.d_s {
            for ap in a + 1..config.d_s {
                let gap = values[a] - values[ap];
                let mut gamma = 1.0;
                for k in 0..config.n_uno {
                    gamma *= decoherence_factor(&bs[k], &envs[k], gap, t);
                }
                bound += rho_s.matrix()[(a, ap)].norm() * gamma.sqrt();
            }
        }
        ok &= norm <= bound + 1e-10;
        worst_excess = worst_excess.max(norm - bound);
        file.row(&[fe(gt), fe(norm), fe(bound)]);
    }
    file.write(out)?;
    let results = json!({
        "grid_points": grid.len(),
        "worst_excess": worst_excess,
        "bound_holds": ok,
    });
    Ok((if ok { 0 } else { 2 }, results))
}

fn cmd_semicircle(args: &SemicircleArgs, config: &EnsembleConfig, out: &Path) -> Result<(i32, Value)> {
    if args.samples == 0 || args.bins == 0 {
        return Err(Error::Parameter("need at least one sample and one bin".into()));
    }
    let radius = semicircle_radius(config.d, config.eta_e)?;
    let mut pooled = Vec::with_capacity(args.samples * config.d);
    for i in 0..args.samples {
        let mut rng = substream(config.master_seed, domain::CLI, i as u64);
        let spec = sample_gue(config.d, config.eta_e, &mut rng)?;
        pooled.extend(spec.eigenvalues().iter().copied());
    }
    pooled.sort_by(f64::total_cmp);
    let n = pooled.len() as f64;
    let mut ks = 0.0f64;
    for (i, &x) in pooled.iter().enumerate() {
        let f = semicircle_cdf(x, radius);
        ks = ks.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
    }
    let lo = -1.15 * radius;
    let hi = 1.15 * radius;
    let width = (hi - lo) / args.bins as f64;
    let mut counts = vec![0u64; args.bins];
    for &x in &pooled {
        if x >= lo && x < hi {
            counts[((x - lo) / width) as usize] += 1;
        }
    }
    let mut file = DataFile::new(config)?;
    file.comment(format!("radius {}", fe(radius)));
    file.comment(format!("ks_statistic {}", fe(ks)));
    file.header("bin_left,bin_right,count,empirical_density,semicircle_density");
    for (b, &count) in counts.iter().enumerate() {
        let left = lo + b as f64 * width;
        let right = left + width;
        let empirical = count as f64 / (n * width);
        let model = semicircle_density(0.5 * (left + right), radius);
        file.row(&[
            fe(left),
            fe(right),
            count.to_string(),
            fe(empirical),
            fe(model),
        ]);
    }
    file.write(out)?;
    let ok = ks < 0.05;
    let results = json!({
        "samples": args.samples,
        "pooled_eigenvalues": pooled.len(),
        "radius": radius,
        "ks_statistic": ks,
        "ks_below_threshold": ok,
    });
    Ok((if ok { 0 } else { 2 }, results))
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn default_out(command: &Command) -> PathBuf {
    PathBuf::from(match command {
        Command::Curve(_) => "curve.csv",
        Command::McVerify(_) => "mc_verify.csv",
        Command::Timescales(_) => "timescales.json",
        Command::AnsatzCheck(_) => "ansatz_check.csv",
        Command::Concentration(_) => "concentration.csv",
        Command::MicroCheck(_) => "micro_check.csv",
        Command::Semicircle(_) => "semicircle.csv",
    })
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Curve(_) => "curve",
        Command::McVerify(_) => "mc-verify",
        Command::Timescales(_) => "timescales",
        Command::AnsatzCheck(_) => "ansatz-check",
        Command::Concentration(_) => "concentration",
        Command::MicroCheck(_) => "micro-check",
        Command::Semicircle(_) => "semicircle",
    }
}

fn common_of(command: &Command) -> &CommonArgs {
    match command {
        Command::Curve(a) => &a.common,
        Command::McVerify(a) => &a.common,
        Command::Timescales(a) => &a.common,
        Command::AnsatzCheck(a) => &a.common,
        Command::Concentration(a) => &a.common,
        Command::MicroCheck(a) => &a.common,
        Command::Semicircle(a) => &a.common,
    }
}

fn config_defaults(command: &Command) -> ConfigDefaults {
    match command {
        // The exact reference evolution keeps two observed copies by default.
        Command::MicroCheck(_) => ConfigDefaults {
            n_uno: 1,
            m: 1,
            n_mac: 2,
        },
        _ => STANDARD_DEFAULTS,
    }
}

fn params_json(command: &Command) -> Value {
    match command {
        Command::Curve(a) => json!({
            "kind": a.kind, "power": a.power, "t_max": a.t_max, "grid": a.grid,
        }),
        Command::McVerify(a) => json!({
            "quantity": a.quantity, "samples": a.samples, "t_max": a.t_max, "grid": a.grid,
        }),
        Command::Timescales(_) => json!({}),
        Command::AnsatzCheck(a) => json!({
            "d_max": a.d_max, "grid_step": a.grid_step, "t_max": a.t_max,
        }),
        Command::Concentration(a) => json!({
            "t": a.t, "samples": a.samples, "deltas": a.deltas,
        }),
        Command::MicroCheck(a) => json!({
            "t_max": a.t_max, "grid": a.grid,
        }),
        Command::Semicircle(a) => json!({
            "samples": a.samples, "bins": a.bins,
        }),
    }
}

/// Parse arguments, run the subcommand, write the manifest, and return the
/// process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Clap renders its own help/usage text.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let command = cli.command;
    let started = unix_now();
    let out = common_of(&command)
        .out
        .clone()
        .unwrap_or_else(|| default_out(&command));

    let config = match resolve_config(common_of(&command), config_defaults(&command)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    let outcome = match &command {
        Command::Curve(a) => cmd_curve(a, &config, &out),
        Command::McVerify(a) => cmd_mc_verify(a, &config, &out),
        Command::Timescales(_) => cmd_timescales(&config, &out),
        Command::AnsatzCheck(a) => cmd_ansatz_check(a, &config, &out),
        Command::Concentration(a) => cmd_concentration(a, &config, &out),
        Command::MicroCheck(a) => cmd_micro_check(a, &config, &out),
        Command::Semicircle(a) => cmd_semicircle(a, &config, &out),
    };

    let (code, results) = match outcome {
        Ok((code, results)) => (code, results),
        Err(e) => {
            eprintln!("error: {e}");
            (1, json!({ "error": e.to_string() }))
        }
    };

    let manifest = RunManifest {
        command: command_name(&command).to_string(),
        config: config.clone(),
        seed: config.master_seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: started,
        finished_unix: unix_now(),
        outputs: if out.exists() {
            vec![out.display().to_string()]
        } else {
            Vec::new()
        },
        params: params_json(&command),
        results,
    };
    let manifest_path = PathBuf::from(format!("{}.manifest.json", out.display()));
    match serde_json::to_string_pretty(&manifest) {
        Ok(text) => {
            if let Err(e) = std::fs::write(&manifest_path, text + "\n") {
                eprintln!("error: could not write manifest: {e}");
                return 1;
            }
        }
        Err(e) => {
            eprintln!("error: could not encode manifest: {e}");
            return 1;
        }
    }
    code
}
