//! SNR sweeps: a flat key-value config format, row computation across all
//! bounds, and CSV/JSON artifact emission. Everything here is concrete
//! `f64`; values are canonicalized to 9 significant digits so that CSV
//! round-trips are exact.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds_upper::{default_mu_grid, default_r_grid, upper_bound_cu, upper_bound_cu_tilde};
use crate::error::{Error, Result};
use crate::model::ChannelParams;
use crate::quad::{solve_input_params_with, InputSolveOptions};
use crate::rate::{estimate_rate, InputLaw, RateEstimate, RateOptions};
use crate::refs::{c_awgn, c_lapidoth};
use crate::special::derive_seed;

/// Which optional bounds a sweep computes (the AWGN and high-SNR references
/// are always present).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    CU,
    CUTilde,
    LbM2,
    LbM3,
}

impl BoundKind {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "c_u" => Ok(Self::CU),
            "c_u_tilde" => Ok(Self::CUTilde),
            "lb_m2" => Ok(Self::LbM2),
            "lb_m3" => Ok(Self::LbM3),
            other => Err(Error::InvalidConfig(format!(
                "unknown bound '{other}' (expected c_u, c_u_tilde, lb_m2, lb_m3)"
            ))),
        }
    }
}

/// One sweep section of a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub name: String,
    pub snr_db: Vec<f64>,
    pub sigma_delta_sq: f64,
    pub es: f64,
    pub bounds: Vec<BoundKind>,
    pub particles: usize,
    pub uses: usize,
    pub entropy_samples: usize,
    /// Monte-Carlo budget of the M=3 input-density solver.
    pub input_mc_samples: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            name: "sweep".into(),
            snr_db: Vec::new(),
            sigma_delta_sq: f64::NAN,
            es: 1.0,
            bounds: vec![
                BoundKind::CU,
                BoundKind::CUTilde,
                BoundKind::LbM2,
                BoundKind::LbM3,
            ],
            particles: 10_000,
            uses: 1000,
            entropy_samples: 100_000,
            input_mc_samples: 10_000_000,
            seed: 0,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::InvalidConfig("snr_db grid is empty".into()));
        }
        if !(self.sigma_delta_sq > 0.0) {
            return Err(Error::InvalidConfig(
                "sigma_delta_sq must be set and positive".into(),
            ));
        }
        if !(self.es > 0.0) {
            return Err(Error::InvalidConfig("es must be positive".into()));
        }
        if self.particles < 1000 || self.uses < 100 {
            return Err(Error::InvalidConfig(
                "particles must be >= 1000 and uses >= 100".into(),
            ));
        }
        Ok(())
    }
}

/// Parse a flat key-value config file: one `[sweep]` section per sweep,
/// `key = value` lines, `#` comments. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<Vec<SweepConfig>> {
    let mut sweeps: Vec<SweepConfig> = Vec::new();
    let mut current: Option<SweepConfig> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::InvalidConfig(format!("line {}: {msg}", lineno + 1));
        if line == "[sweep]" {
            if let Some(c) = current.take() {
                c.validate()?;
                sweeps.push(c);
            }
            current = Some(SweepConfig::default());
            continue;
        }
        if line.starts_with('[') {
            return Err(err(format!("unknown section '{line}'")));
        }
        let Some(cfg) = current.as_mut() else {
            return Err(err("key outside of a [sweep] section".into()));
        };
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(format!("expected 'key = value', got '{line}'")));
        };
        let key = key.trim();
        let value = value.trim();
        let parse_f64 = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("line {}: bad number '{v}'", lineno + 1)))
        };
        let parse_usize = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("line {}: bad integer '{v}'", lineno + 1)))
        };
        match key {
            "name" => cfg.name = value.to_string(),
            "snr_db" => {
                cfg.snr_db = value
                    .split(',')
                    .map(|v| parse_f64(v.trim()))
                    .collect::<Result<_>>()?;
            }
            "sigma_delta_sq" => cfg.sigma_delta_sq = parse_f64(value)?,
            "es" => cfg.es = parse_f64(value)?,
            "bounds" => {
                cfg.bounds = value
                    .split(',')
                    .map(|v| BoundKind::parse(v.trim()))
                    .collect::<Result<_>>()?;
            }
            "particles" => cfg.particles = parse_usize(value)?,
            "uses" => cfg.uses = parse_usize(value)?,
            "entropy_samples" => cfg.entropy_samples = parse_usize(value)?,
            "input_mc_samples" => cfg.input_mc_samples = parse_usize(value)?,
            "seed" => {
                cfg.seed = value.parse::<u64>().map_err(|_| {
                    Error::InvalidConfig(format!("line {}: bad seed '{value}'", lineno + 1))
                })?;
            }
            other => return Err(err(format!("unknown key '{other}'"))),
        }
    }
    if let Some(c) = current.take() {
        c.validate()?;
        sweeps.push(c);
    }
    if sweeps.is_empty() {
        return Err(Error::InvalidConfig("no [sweep] section found".into()));
    }
    Ok(sweeps)
}

/// Round to 9 significant decimal digits (the CSV precision), so stored
/// values and their CSV round-trips compare equal.
pub fn canon9(x: f64) -> f64 {
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// One SNR grid point with every bound/reference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub c_awgn: f64,
    pub c_lapidoth: f64,
    pub c_u: Option<f64>,
    pub c_u_tilde: Option<f64>,
    pub lb_m2: Option<LowerBoundCell>,
    pub lb_m3: Option<LowerBoundCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCell {
    pub bits: f64,
    pub std_err: f64,
}

pub const CSV_HEADER: &str =
    "snr_db,c_awgn,c_lapidoth,c_u,c_u_tilde,lb_m2,lb_m2_stderr,lb_m3,lb_m3_stderr";

fn push_cell(out: &mut String, v: Option<f64>) {
    if let Some(x) = v {
        let _ = write!(out, "{x:.8e}");
    }
}

/// Serialize rows as CSV (values at 9 significant digits, absent cells
/// empty, header mandatory).
pub fn emit_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [
            Some(r.snr_db),
            Some(r.c_awgn),
            Some(r.c_lapidoth),
            r.c_u,
            r.c_u_tilde,
            r.lb_m2.map(|l| l.bits),
            r.lb_m2.map(|l| l.std_err),
            r.lb_m3.map(|l| l.bits),
            r.lb_m3.map(|l| l.std_err),
        ];
        for (i, c) in cells.into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            push_cell(&mut out, c);
        }
        out.push('\n');
    }
    out
}

/// Parse CSV produced by [`emit_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty CSV".into()))?;
    if header.trim() != CSV_HEADER {
        return Err(Error::InvalidInput(format!(
            "unexpected CSV header '{header}'"
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 9 {
            return Err(Error::InvalidInput(format!(
                "line {}: expected 9 cells, got {}",
                lineno + 2,
                cells.len()
            )));
        }
        let opt = |s: &str| -> Result<Option<f64>> {
            let s = s.trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .map(Some)
                .map_err(|_| Error::InvalidInput(format!("line {}: bad number '{s}'", lineno + 2)))
        };
        let req = |s: &str, what: &str| -> Result<f64> {
            opt(s)?.ok_or_else(|| {
                Error::InvalidInput(format!("line {}: missing {what}", lineno + 2))
            })
        };
        let pair = |a: &str, b: &str| -> Result<Option<LowerBoundCell>> {
            match (opt(a)?, opt(b)?) {
                (Some(bits), Some(std_err)) => Ok(Some(LowerBoundCell { bits, std_err })),
                (None, None) => Ok(None),
                _ => Err(Error::InvalidInput(format!(
                    "line {}: lower-bound value and stderr must appear together",
                    lineno + 2
                ))),
            }
        };
        rows.push(SweepRow {
            snr_db: req(cells[0], "snr_db")?,
            c_awgn: req(cells[1], "c_awgn")?,
            c_lapidoth: req(cells[2], "c_lapidoth")?,
            c_u: opt(cells[3])?,
            c_u_tilde: opt(cells[4])?,
            lb_m2: pair(cells[5], cells[6])?,
            lb_m3: pair(cells[7], cells[8])?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Row computation and provenance
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SolvedAux {
    pub mu: f64,
    pub alpha_u: f64,
    pub beta_u: f64,
    pub residuals: (f64, f64),
    pub iterations: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolvedDist {
    pub m: usize,
    pub alpha_l: f64,
    pub beta_l: f64,
    pub residuals: (f64, f64),
    pub iterations: u32,
    pub mc_seed: Option<u64>,
    pub mc_samples: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateDiag {
    pub bits_per_use: f64,
    pub std_err: f64,
    pub n_uses: usize,
    pub n_particles: usize,
    pub input_label: String,
    pub collapse_count: usize,
    pub unreliable: bool,
    pub min_uncond_ess: f64,
}

impl From<&RateEstimate<f64>> for RateDiag {
    fn from(r: &RateEstimate<f64>) -> Self {
        Self {
            bits_per_use: r.bits_per_use,
            std_err: r.std_err,
            n_uses: r.n_uses,
            n_particles: r.n_particles,
            input_label: r.input_label.clone(),
            collapse_count: r.collapse_count,
            unreliable: r.unreliable,
            min_uncond_ess: r.min_uncond_ess,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RowProvenance {
    pub snr_db: f64,
    pub sigma_w_sq: f64,
    pub seeds: RowSeeds,
    pub aux: Option<SolvedAux>,
    pub argmin_mu: Option<f64>,
    pub argmax_r: Option<f64>,
    pub dist_m2: Option<SolvedDist>,
    pub dist_m3: Option<SolvedDist>,
    pub lb_m2: Option<RateDiag>,
    pub lb_m3: Option<RateDiag>,
    pub errors: Vec<String>,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RowSeeds {
    pub upper: u64,
    pub lb_m2: u64,
    pub lb_m3: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepProvenance {
    pub config: SweepConfig,
    pub mu_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub rows: Vec<RowProvenance>,
    pub total_wall_clock_s: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub provenance: SweepProvenance,
}

fn compute_row(cfg: &SweepConfig, index: usize, snr_db: f64) -> (SweepRow, RowProvenance) {
    let start = Instant::now();
    let seeds = RowSeeds {
        upper: derive_seed(cfg.seed, index as u64 * 16 + 1),
        lb_m2: derive_seed(cfg.seed, index as u64 * 16 + 2),
        lb_m3: derive_seed(cfg.seed, index as u64 * 16 + 3),
    };
    let mut errors = Vec::new();
    let params = ChannelParams::from_snr_db(snr_db, cfg.sigma_delta_sq, cfg.es)
        .expect("validated config");

    let c_awgn_v = c_awgn(&params);
    let c_lap = c_lapidoth(&params).expect("sigma_delta_sq > 0 validated");

    let mut row = SweepRow {
        snr_db: canon9(snr_db),
        c_awgn: canon9(c_awgn_v),
        c_lapidoth: canon9(c_lap),
        c_u: None,
        c_u_tilde: None,
        lb_m2: None,
        lb_m3: None,
    };
    let mut aux = None;
    let mut argmin_mu = None;
    let mut argmax_r = None;
    let mut dist_m2 = None;
    let mut dist_m3 = None;
    let mut lb_m2_diag = None;
    let mut lb_m3_diag = None;

    if cfg.bounds.contains(&BoundKind::CUTilde) {
        match upper_bound_cu_tilde(&params) {
            Ok(v) => row.c_u_tilde = Some(canon9(v)),
            Err(e) => errors.push(format!("c_u_tilde: {e}")),
        }
    }
    if cfg.bounds.contains(&BoundKind::CU) {
        let mu_grid = default_mu_grid(cfg.es);
        let r_grid = default_r_grid(cfg.es);
        match upper_bound_cu(&params, &mu_grid, &r_grid, cfg.entropy_samples, seeds.upper) {
            Ok(res) => {
                row.c_u = Some(canon9(res.c_u));
                if row.c_u_tilde.is_none() {
                    row.c_u_tilde = Some(canon9(res.c_u_tilde));
                }
                aux = Some(SolvedAux {
                    mu: res.aux.mu,
                    alpha_u: res.aux.alpha_u,
                    beta_u: res.aux.beta_u,
                    residuals: res.aux.residuals,
                    iterations: res.aux.iterations,
                });
                argmin_mu = Some(res.argmin_mu);
                argmax_r = Some(res.argmax_r);
            }
            Err(e) => errors.push(format!("c_u: {e}")),
        }
    }

    let mut lower = |m: usize, seed: u64| -> (Option<SolvedDist>, Option<LowerBoundCell>, Option<RateDiag>) {
        let opts = InputSolveOptions {
            mc_samples: cfg.input_mc_samples,
            ..InputSolveOptions::default()
        };
        let dist = match solve_input_params_with(&params, m, &opts) {
            Ok(d) => d,
            Err(e) => {
                errors.push(format!("lb_m{m} solve: {e}"));
                return (None, None, None);
            }
        };
        let solved = SolvedDist {
            m,
            alpha_l: dist.alpha_l,
            beta_l: dist.beta_l,
            residuals: dist.residuals,
            iterations: dist.iterations,
            mc_seed: dist.mc_seed,
            mc_samples: dist.mc_samples,
        };
        match estimate_rate(
            &params,
            &InputLaw::Block(dist),
            cfg.uses,
            cfg.particles,
            seed,
            &RateOptions::default(),
        ) {
            Ok(est) => {
                let cell = LowerBoundCell {
                    bits: canon9(est.bits_per_use),
                    std_err: canon9(est.std_err),
                };
                (Some(solved), Some(cell), Some(RateDiag::from(&est)))
            }
            Err(e) => {
                errors.push(format!("lb_m{m} rate: {e}"));
                (Some(solved), None, None)
            }
        }
    };

    if cfg.bounds.contains(&BoundKind::LbM2) {
        let (d, cell, diag) = lower(2, seeds.lb_m2);
        dist_m2 = d;
        row.lb_m2 = cell;
        lb_m2_diag = diag;
    }
    if cfg.bounds.contains(&BoundKind::LbM3) {
        let (d, cell, diag) = lower(3, seeds.lb_m3);
        dist_m3 = d;
        row.lb_m3 = cell;
        lb_m3_diag = diag;
    }

    let prov = RowProvenance {
        snr_db,
        sigma_w_sq: params.sigma_w_sq(),
        seeds,
        aux,
        argmin_mu,
        argmax_r,
        dist_m2,
        dist_m3,
        lb_m2: lb_m2_diag,
        lb_m3: lb_m3_diag,
        errors,
        wall_clock_s: start.elapsed().as_secs_f64(),
    };
    (row, prov)
}

/// Run one sweep: one row per SNR point (rows are independent jobs; output
/// is ordered by SNR regardless of completion order).
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let mut order: Vec<(usize, f64)> = cfg.snr_db.iter().copied().enumerate().collect();
    order.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    let mut computed: Vec<(usize, SweepRow, RowProvenance)> = order
        .par_iter()
        .map(|&(index, snr)| {
            let (row, prov) = compute_row(cfg, index, snr);
            (index, row, prov)
        })
        .collect();
    computed.sort_by(|a, b| a.1.snr_db.partial_cmp(&b.1.snr_db).unwrap());

    let rows: Vec<SweepRow> = computed.iter().map(|(_, r, _)| *r).collect();
    let row_prov: Vec<RowProvenance> = computed.into_iter().map(|(_, _, p)| p).collect();

    Ok(SweepOutcome {
        rows,
        provenance: SweepProvenance {
            config: cfg.clone(),
            mu_grid: default_mu_grid(cfg.es),
            r_grid: default_r_grid(cfg.es),
            rows: row_prov,
            total_wall_clock_s: start.elapsed().as_secs_f64(),
        },
    })
}

/// Write `<prefix><name>.csv` and `<prefix><name>.json`.
pub fn write_artifacts(outcome: &SweepOutcome, out_prefix: &Path) -> Result<(PathBuf, PathBuf)> {
    let name = &outcome.provenance.config.name;
    let base = match out_prefix.file_name() {
        Some(stem) => {
            let mut s = stem.to_string_lossy().into_owned();
            s.push_str(name);
            out_prefix.with_file_name(s)
        }
        None => out_prefix.join(name),
    };
    let csv_path = base.with_extension("csv");
    let json_path = base.with_extension("json");
    if let Some(dir) = csv_path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(&csv_path, emit_csv(&outcome.rows))?;
    let json = serde_json::to_string_pretty(&outcome.provenance)
        .map_err(|e| Error::NumericalFailure(format!("provenance serialization: {e}")))?;
    std::fs::write(&json_path, json)?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Real;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const FULL: &str = "
# detail grid
[sweep]
name = demo
snr_db = 0, 10, 20
sigma_delta_sq = 1e-3
es = 1.0
bounds = c_u_tilde
particles = 2000
uses = 200
entropy_samples = 20000
input_mc_samples = 100000
seed = 5
";

    #[test]
    fn config_parses_and_validates() {
        let cfgs = parse_config(FULL).unwrap();
        assert_eq!(cfgs.len(), 1);
        let c = &cfgs[0];
        assert_eq!(c.name, "demo");
        assert_eq!(c.snr_db, vec![0.0, 10.0, 20.0]);
        assert_eq!(c.bounds, vec![BoundKind::CUTilde]);
        assert_eq!(c.particles, 2000);

        assert!(matches!(
            parse_config("[sweep]\nsigma_delta_sq = 1e-3\n"),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            parse_config("[sweep]\nsnr_db = 0\n"),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            parse_config("[sweep]\nsnr_db = 0\nsigma_delta_sq = 1e-3\nwhatever = 3\n"),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            parse_config("snr_db = 0\n"),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(parse_config(""), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut rows = Vec::new();
        for i in 0..50 {
            let mut v = |scale: f64| canon9((f64::unit_uniform(&mut rng) - 0.3) * scale);
            let c_awgn = v(10.0);
            let c_lapidoth = v(1e-4);
            let c_u = if i % 3 != 0 { Some(v(5.0)) } else { None };
            let c_u_tilde = Some(v(17.0));
            let lb_m2 = if i % 2 == 0 {
                Some(LowerBoundCell {
                    bits: v(4.0),
                    std_err: v(0.01).abs(),
                })
            } else {
                None
            };
            rows.push(SweepRow {
                snr_db: canon9(i as f64),
                c_awgn,
                c_lapidoth,
                c_u,
                c_u_tilde,
                lb_m2,
                lb_m3: None,
            });
        }
        let text = emit_csv(&rows);
        assert!(text.starts_with(CSV_HEADER));
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed, rows);
        // absent cells stay absent
        assert!(text.lines().nth(1).unwrap().ends_with(",,"));
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("bad,header\n").is_err());
        let text = format!("{CSV_HEADER}\n1,2,3\n");
        assert!(parse_csv(&text).is_err());
        // stderr without value
        let text = format!("{CSV_HEADER}\n0,1,2,,,3.5,,,\n");
        assert!(parse_csv(&text).is_err());
    }

    #[test]
    fn tiny_sweep_produces_ordered_rows() {
        let cfg = SweepConfig {
            name: "tiny".into(),
            snr_db: vec![20.0, 0.0, 10.0],
            sigma_delta_sq: 1e-3,
            bounds: vec![BoundKind::CUTilde],
            ..SweepConfig::default()
        };
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.rows.len(), 3);
        let snrs: Vec<f64> = out.rows.iter().map(|r| r.snr_db).collect();
        assert_eq!(snrs, vec![0.0, 10.0, 20.0]);
        // c_awgn strictly increasing in SNR
        assert!(out.rows.windows(2).all(|w| w[1].c_awgn > w[0].c_awgn));
        for r in &out.rows {
            assert!(r.c_u_tilde.is_some());
            assert!(r.c_u.is_none());
            assert!(r.lb_m2.is_none());
        }
        assert!(out.provenance.rows.iter().all(|p| p.errors.is_empty()));
        assert!(out.provenance.total_wall_clock_s > 0.0);
    }

    #[test]
    fn small_innovation_tracks_awgn_capacity() {
        // with sigma_delta_sq = 1e-4 the closed-form upper bound stays within
        // half a bit of the AWGN capacity up to 20 dB
        let cfg = SweepConfig {
            name: "lowpn".into(),
            snr_db: vec![0.0, 10.0, 20.0],
            sigma_delta_sq: 1e-4,
            bounds: vec![BoundKind::CUTilde],
            ..SweepConfig::default()
        };
        let out = run_sweep(&cfg).unwrap();
        for r in &out.rows {
            let cu = r.c_u_tilde.unwrap();
            assert!(
                (cu - r.c_awgn).abs() < 0.5,
                "snr {}: c_u_tilde {} vs c_awgn {}",
                r.snr_db,
                cu,
                r.c_awgn
            );
        }
    }
}
