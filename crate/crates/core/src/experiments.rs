//! Scenario runners and report emission: the dispersion audit, the growth-rate
//! fit and the instability table over a list of `k`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{self, eval_p, quartic_coefficients, SpectrumReport, SymbolPoint};
use crate::error::{Error, Result};
use crate::linear::{build_unstable_mode, choose_m, LkInverse, TimeGrid, Trajectory, UnstableMode};
use crate::nonlinear::{
    e1_norm, fit_sinh_rate, norm_trace, picard_solve, write_norm_trace, DirectIntegrator, IterationRecord,
    PicardConfig, SinhFit,
};
use crate::spectral::{l2_norm, StateU};

pub const SCHEMA_VERSION: u32 = 1;

/// Relative Picard/direct disagreement above which a row is flagged.
pub const CROSSCHECK_TOL: f64 = 1e-3;

/// Fixed float formatting for CSV output (17 significant digits).
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Perturbation size as a function of `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaRule {
    /// `δ = k^{−(2s+2)}`.
    Power,
    Explicit(f64),
}

impl DeltaRule {
    pub fn delta(&self, k: u64, s: u32) -> f64 {
        match *self {
            DeltaRule::Power => (k as f64).powi(-(2 * s as i32 + 2)),
            DeltaRule::Explicit(d) => d,
        }
    }
}

mod ratio_repr {
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<i64>, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(n) => Ok(Ratio::from_integer(n)),
            Repr::Text(t) => t
                .trim()
                .parse::<Ratio<i64>>()
                .map_err(|e| serde::de::Error::custom(format!("bad rational {t:?}: {e}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub k_list: Vec<u64>,
    /// Period ratio `Z`; `m` ranges over `ℕ/Z`. Written `"p/q"` or as an integer.
    #[serde(with = "ratio_repr")]
    pub z: Ratio<i64>,
    /// Background amplitude `Ē` as `[re, im]`.
    pub e_bar: Complex64,
    pub s: u32,
    pub c0: f64,
    pub delta_rule: DeltaRule,
    /// Fourier truncation `P`.
    pub truncation: usize,
    /// Time step `h = dt_factor / k`.
    pub dt_factor: f64,
    pub output_dir: PathBuf,
    /// `‖e‖ + ‖n‖` beyond which the direct integrator stops.
    pub norm_ceiling: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Perturbation size of the nonlinear growth-rate run.
    pub growth_delta: f64,
    /// Enables slower redundant cross-checks.
    pub oracle: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k_list: vec![32, 64, 128],
            z: Ratio::from_integer(1),
            e_bar: Complex64::new(1.0, 0.0),
            s: 1,
            c0: 0.05,
            delta_rule: DeltaRule::Power,
            truncation: 4,
            dt_factor: 0.005,
            output_dir: PathBuf::from("out"),
            norm_ceiling: 1e6,
            picard_tol: 1e-8,
            picard_max_iter: 50,
            growth_delta: 1e-10,
            oracle: false,
        }
    }
}

impl ExperimentConfig {
    /// Reads a JSON or TOML file (chosen by extension, JSON otherwise).
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let cfg: ExperimentConfig = if path.extension().is_some_and(|x| x == "toml") {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        Ok(cfg)
    }

    /// Checks ranges; does not look at `k₀` (see [`ExperimentConfig::validate_k`]).
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k_list.is_empty() {
            return bad("k_list is empty".into());
        }
        if self.k_list.contains(&0) {
            return bad("k must be positive".into());
        }
        if self.z <= Ratio::from_integer(0) {
            return bad(format!("Z = {} must be positive", self.z));
        }
        if self.s < 1 {
            return bad("s must be at least 1".into());
        }
        if !(self.c0 > 0.0 && self.c0 < 1.0) {
            return bad(format!("c0 = {} outside (0, 1)", self.c0));
        }
        if let DeltaRule::Explicit(d) = self.delta_rule {
            if !(d > 0.0 && d <= 1.0) {
                return bad(format!("explicit δ = {d} outside (0, 1]"));
            }
        }
        if self.truncation < 2 {
            return bad("truncation must be at least 2".into());
        }
        if !(self.dt_factor > 0.0) || !(self.norm_ceiling > 0.0) || !(self.picard_tol > 0.0) {
            return bad("dt_factor, norm_ceiling and picard_tol must be positive".into());
        }
        if !(self.growth_delta > 0.0 && self.growth_delta <= 1.0) {
            return bad(format!("growth_delta = {} outside (0, 1]", self.growth_delta));
        }
        if !self.e_bar.re.is_finite() || !self.e_bar.im.is_finite() {
            return bad("Ē must be finite".into());
        }
        Ok(())
    }

    /// Every `k` must be at or above the smallest `k` with an unstable
    /// first-harmonic spectrum.
    pub fn validate_k(&self) -> Result<u64> {
        let kmax = *self.k_list.iter().max().expect("validated non-empty");
        let k0 = dispersion::find_k0(self.e_bar, self.z, kmax)
            .ok_or_else(|| Error::Config(format!("no unstable k ≤ {kmax} for Ē = {}", self.e_bar)))?;
        if let Some(k) = self.k_list.iter().find(|&&k| k < k0) {
            return Err(Error::Config(format!("k = {k} is below the instability threshold k0 = {k0}")));
        }
        Ok(k0)
    }

    pub fn dt(&self, k: u64) -> f64 {
        self.dt_factor / k as f64
    }
}

/// Generic report envelope.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report<R> {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub rows: Vec<R>,
    pub warnings: Vec<String>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    linear_fit(&pts).map(|(_, b)| b)
}

/// `(a, b)` minimising `Σ (y − a − b x)²`.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    if sxx == 0.0 {
        return None;
    }
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditRow {
    pub k: u64,
    pub m: String,
    pub spectrum: Option<SpectrumReport>,
    /// Largest `|P(λ_j)|` relative to the sum of the quartic's term sizes.
    pub root_residual: Option<f64>,
    /// Largest distance between the matrix eigenvalues and the companion
    /// roots, relative to `|λ|` (only with `oracle`).
    pub companion_mismatch: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DispersionAudit {
    #[serde(flatten)]
    pub report: Report<AuditRow>,
    /// Slope of `ln σ` against `ln k`.
    pub sigma_slope: Option<f64>,
    /// Slope of `ln |λ₁|` against `ln k`.
    pub lambda1_slope: Option<f64>,
}

fn quartic_residual(rep: &SpectrumReport) -> f64 {
    let zeta = -rep.m;
    let xi = rep.k as f64;
    let e2 = rep.e_bar.norm_sqr();
    let c = quartic_coefficients(zeta, xi, e2);
    rep.lambdas
        .iter()
        .map(|&l| {
            let scale = l.norm().powi(4) + c[3].abs() * l.norm().powi(3) + c[2].abs() * l.norm_sqr()
                + c[1].abs() * l.norm()
                + c[0].abs();
            eval_p(&SymbolPoint::new(l, zeta, xi, e2)).norm() / scale
        })
        .fold(0.0, f64::max)
}

fn companion_mismatch(rep: &SpectrumReport) -> Result<f64> {
    let roots = dispersion::tau_roots(-rep.m, rep.k as f64, rep.e_bar.norm_sqr())?;
    Ok(rep
        .lambdas
        .iter()
        .map(|l| roots.iter().map(|r| (r - l).norm() / l.norm().max(1.0)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

pub fn run_dispersion_audit(cfg: &ExperimentConfig) -> Result<DispersionAudit> {
    cfg.validate()?;
    let rows: Vec<AuditRow> = cfg
        .k_list
        .par_iter()
        .map(|&k| {
            let m = choose_m(k, cfg.z);
            match dispersion::spectrum_for(k, cfg.e_bar, cfg.z) {
                Ok(rep) => {
                    let mismatch = if cfg.oracle { companion_mismatch(&rep).ok() } else { None };
                    AuditRow {
                        k,
                        m: m.m.to_string(),
                        root_residual: Some(quartic_residual(&rep)),
                        companion_mismatch: mismatch,
                        spectrum: Some(rep),
                        error: None,
                    }
                }
                Err(e) => AuditRow {
                    k,
                    m: m.m.to_string(),
                    spectrum: None,
                    root_residual: None,
                    companion_mismatch: None,
                    error: Some(if cfg.e_bar.norm() == 0.0 {
                        format!("Jordan degeneracy at Ē = 0 ({e})")
                    } else {
                        e.to_string()
                    }),
                },
            }
        })
        .collect();
    let ok: Vec<&SpectrumReport> = rows.iter().filter_map(|r| r.spectrum.as_ref()).collect();
    let ks: Vec<f64> = ok.iter().map(|r| r.k as f64).collect();
    let sigma_slope = loglog_slope(&ks, &ok.iter().map(|r| r.sigma).collect::<Vec<_>>());
    let lambda1_slope = loglog_slope(&ks, &ok.iter().map(|r| r.lambdas[0].norm()).collect::<Vec<_>>());
    let mut warnings: Vec<String> = ok
        .iter()
        .flat_map(|r| r.warnings.iter().map(move |w| format!("k = {}: {w}", r.k)))
        .collect();
    warnings.extend(rows.iter().filter_map(|r| r.error.as_ref().map(|e| format!("k = {}: {e}", r.k))));
    Ok(DispersionAudit {
        report: Report {
            schema_version: SCHEMA_VERSION,
            config: cfg.clone(),
            rows,
            warnings,
        },
        sigma_slope,
        lambda1_slope,
    })
}

/// Growth rate of `‖n(t)‖_{L²}` fitted by `A sinh(γt)` on `t ∈ [1/σ, 3/σ]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthFit {
    pub k: u64,
    pub e_bar: Complex64,
    pub sigma: f64,
    pub window: (f64, f64),
    /// Fit of the exact unstable mode.
    pub linear: SinhFit,
    /// Fit of the full evolution from `δ Uᵃ(0)`.
    pub nonlinear: Option<SinhFit>,
    pub delta: f64,
    /// Time at which the norm ceiling was crossed, if it was.
    pub blowup_time: Option<f64>,
}

impl GrowthFit {
    pub fn linear_ratio(&self) -> f64 {
        self.linear.gamma / self.sigma
    }

    pub fn nonlinear_ratio(&self) -> Option<f64> {
        self.nonlinear.map(|f| f.gamma / self.sigma)
    }
}

/// Samples within `[t0, t1]` of `(t, ‖n(t)‖_{L²} / scale)`.
fn window_samples(traj: &Trajectory, t0: f64, t1: f64, scale: f64) -> (Vec<f64>, Vec<f64>) {
    traj.states
        .iter()
        .filter(|s| s.t >= t0 - 1e-12 && s.t <= t1 + 1e-12)
        .map(|s| (s.t, l2_norm(&s.n) / scale))
        .unzip()
}

pub fn run_growth_fit(cfg: &ExperimentConfig, k: u64, e_bar: Complex64) -> Result<GrowthFit> {
    cfg.validate()?;
    let mode = build_unstable_mode(k, e_bar, cfg.z)?;
    let sigma = mode.sigma();
    let (t0, t1) = (1.0 / sigma, 3.0 / sigma);
    let grid = TimeGrid::with_max_step(t1, cfg.dt(k));
    let ua = mode.trajectory(grid, cfg.truncation);
    let (lo, hi) = (0.1 * sigma, 10.0 * sigma);
    let (t, y) = window_samples(&ua, t0, t1, 1.0);
    let linear = fit_sinh_rate(&t, &y, lo, hi).ok_or(Error::NonFinite("linear growth fit"))?;

    let delta = cfg.growth_delta;
    let state0 = ua.states[0].scale(delta);
    let run = DirectIntegrator::for_spectrum(mode.spectrum(), cfg.truncation, grid.dt).run(
        &state0,
        grid.steps,
        cfg.norm_ceiling,
    )?;
    let blowup_time = run.blowup.map(|b| b.time);
    // a blow-up shrinks the window to what was actually integrated
    let end = blowup_time.map_or(t1, |b| b.min(t1));
    let (t, y) = window_samples(&run.trajectory, t0, end, delta);
    let nonlinear = fit_sinh_rate(&t, &y, lo, hi);
    Ok(GrowthFit {
        k,
        e_bar,
        sigma,
        window: (t0, end),
        linear,
        nonlinear,
        delta,
        blowup_time,
    })
}

/// `T` with `δ k^{−1/4} e^{σT} = c₀`.
pub fn theorem_time(delta: f64, k: u64, sigma: f64, c0: f64) -> f64 {
    (c0.ln() - delta.ln() + 0.25 * (k as f64).ln()) / sigma
}

/// `meas 𝕋 = (2πZ)(2π)` for the torus of periods `2πZ` in `z` and `2π` in `x`.
pub fn torus_measure(z: Ratio<i64>) -> f64 {
    let zf = *z.numer() as f64 / *z.denom() as f64;
    4.0 * std::f64::consts::PI * std::f64::consts::PI * zf
}

/// `H^s(𝕋)` norm of `(e, n, ∂t n)` at one time after `θ = kx − mz`: harmonic
/// `p` sits at frequency `(−mp, kp)`.
pub fn physical_hs_norm(state: &StateU, k: u64, m: f64, s: u32, z: Ratio<i64>) -> f64 {
    let kf = k as f64;
    let sum: f64 = [&state.e, &state.n, &state.n_t]
        .iter()
        .flat_map(|f| f.modes())
        .map(|(p, c)| {
            let pf = p as f64;
            (1.0 + m * m * pf * pf + kf * kf * pf * pf).powi(s as i32) * c.norm_sqr()
        })
        .sum();
    (torus_measure(z) * sum).sqrt()
}

/// `L²(𝕋)` norm of a field of `θ = kx − mz`: `√(meas 𝕋 / 2π) ‖v‖_{L²(0,2π)}`.
pub fn physical_l2_norm(v: &crate::spectral::FourierField, z: Ratio<i64>) -> f64 {
    (torus_measure(z) / (2.0 * std::f64::consts::PI)).sqrt() * l2_norm(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Verified,
    Unverified,
    Failed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremRow {
    pub k: u64,
    pub m: String,
    pub sigma: f64,
    pub delta: f64,
    pub t_k: f64,
    /// `δ k^{−1/4} e^{σT_k}`.
    pub smallness: f64,
    /// `H^s(𝕋)` norm of the Cauchy data.
    pub initial_hs: f64,
    /// `‖n(T_k)‖_{L²(𝕋)}`.
    pub terminal_l2_n: f64,
    pub amplification: f64,
    /// `E¹(δ(Uᵃ + u) − U_direct) / E¹(δ(Uᵃ + u))`.
    pub crosscheck: f64,
    /// Same distance measured against `δ E¹(u)`.
    pub crosscheck_perturbation: f64,
    /// `E¹(u)` of the Picard correction.
    pub correction_e1: f64,
    pub picard_iterations: usize,
    pub steps: usize,
    /// Change of the terminal norm under a halved step (only with `oracle`).
    pub refinement_change: Option<f64>,
    pub status: RowStatus,
    pub error: Option<String>,
    #[serde(skip)]
    pub picard_log: Vec<IterationRecord>,
}

impl TheoremRow {
    fn failed(k: u64, e: Error) -> Self {
        TheoremRow {
            k,
            m: String::new(),
            sigma: f64::NAN,
            delta: f64::NAN,
            t_k: f64::NAN,
            smallness: f64::NAN,
            initial_hs: f64::NAN,
            terminal_l2_n: f64::NAN,
            amplification: f64::NAN,
            crosscheck: f64::NAN,
            crosscheck_perturbation: f64::NAN,
            correction_e1: f64::NAN,
            picard_iterations: 0,
            steps: 0,
            refinement_change: None,
            status: RowStatus::Failed,
            error: Some(e.to_string()),
            picard_log: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremReport {
    #[serde(flatten)]
    pub report: Report<TheoremRow>,
    /// `(a, b)` of `‖n(T_k)‖ ≈ a + b k^{1/4}`.
    pub quarter_power_fit: Option<(f64, f64)>,
}

impl TheoremReport {
    pub fn all_verified(&self) -> bool {
        self.report.rows.iter().all(|r| r.status == RowStatus::Verified)
    }
}

/// Everything one `k` of the instability table produces.
pub struct TheoremRun {
    pub row: TheoremRow,
    pub mode: UnstableMode,
    pub ua: Trajectory,
    pub u: Trajectory,
    pub direct: Trajectory,
}

/// Builds `Uᵃ`, solves for the correction `u`, integrates the full system
/// from `δUᵃ(0)` and compares.
pub fn theorem_run(cfg: &ExperimentConfig, k: u64) -> Result<TheoremRun> {
    let mode = build_unstable_mode(k, cfg.e_bar, cfg.z)?;
    let sigma = mode.sigma();
    let spectrum = mode.spectrum();
    let delta = cfg.delta_rule.delta(k, cfg.s);
    let t_k = theorem_time(delta, k, sigma, cfg.c0);
    if !(t_k > 0.0) {
        return Err(Error::Config(format!("T_k = {t_k} is not positive for k = {k}")));
    }
    let grid = TimeGrid::with_max_step(t_k, cfg.dt(k));
    let ua = mode.trajectory(grid, cfg.truncation);
    let lk = LkInverse::new(spectrum, cfg.truncation)?;
    let pc = PicardConfig {
        delta,
        tol: cfg.picard_tol,
        max_iter: cfg.picard_max_iter,
        c0: cfg.c0,
        s: cfg.s as f64,
    };
    let picard = picard_solve(&lk, &ua, sigma, &pc)?;
    let total = ua.add(&picard.u)?.scale(delta);

    let integrator = DirectIntegrator::for_spectrum(spectrum, cfg.truncation, grid.dt);
    let run = integrator.run(&total.states[0], grid.steps, cfg.norm_ceiling)?;
    if let Some(b) = run.blowup {
        return Err(Error::BlowupDetected {
            time: b.time,
            norm: b.norm,
            ceiling: b.ceiling,
        });
    }
    let direct = run.trajectory;
    let s = cfg.s as f64;
    let diff = total.sub(&direct)?;
    let d1 = e1_norm(&diff, k, s, sigma);
    let total_e1 = e1_norm(&total, k, s, sigma);
    let u_e1 = e1_norm(&picard.u, k, s, sigma);
    let crosscheck = d1 / total_e1;
    let crosscheck_perturbation = d1 / (delta * u_e1);

    let initial_hs = physical_hs_norm(&total.states[0], k, spectrum.m, cfg.s, cfg.z);
    let terminal_l2_n = physical_l2_norm(&total.last().n, cfg.z);

    let refinement_change = if cfg.oracle {
        let fine = DirectIntegrator::for_spectrum(spectrum, cfg.truncation, 0.5 * grid.dt);
        let r = fine.run(&total.states[0], 2 * grid.steps, cfg.norm_ceiling)?;
        let t = physical_l2_norm(&r.trajectory.last().n, cfg.z);
        Some((t - physical_l2_norm(&direct.last().n, cfg.z)).abs() / t)
    } else {
        None
    };

    let status = if crosscheck <= CROSSCHECK_TOL {
        RowStatus::Verified
    } else {
        RowStatus::Unverified
    };
    let row = TheoremRow {
        k,
        m: choose_m(k, cfg.z).m.to_string(),
        sigma,
        delta,
        t_k,
        smallness: picard.smallness,
        initial_hs,
        terminal_l2_n,
        amplification: terminal_l2_n / initial_hs,
        crosscheck,
        crosscheck_perturbation,
        correction_e1: u_e1,
        picard_iterations: picard.log.len(),
        steps: grid.steps,
        refinement_change,
        status,
        error: None,
        picard_log: picard.log,
    };
    Ok(TheoremRun {
        row,
        mode,
        ua,
        u: picard.u,
        direct,
    })
}

pub fn run_theorem(cfg: &ExperimentConfig) -> Result<TheoremReport> {
    cfg.validate()?;
    cfg.validate_k()?;
    let rows: Vec<TheoremRow> = cfg
        .k_list
        .par_iter()
        .map(|&k| match theorem_run(cfg, k) {
            Ok(run) => run.row,
            Err(e) => TheoremRow::failed(k, e),
        })
        .collect();
    let mut warnings = Vec::new();
    for r in &rows {
        match r.status {
            RowStatus::Verified => {}
            RowStatus::Unverified => warnings.push(format!(
                "k = {}: UNVERIFIED, solver disagreement {:.3e} > {CROSSCHECK_TOL:e}",
                r.k, r.crosscheck
            )),
            RowStatus::Failed => warnings.push(format!("k = {}: {}", r.k, r.error.as_deref().unwrap_or("failed"))),
        }
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.status != RowStatus::Failed)
        .map(|r| ((r.k as f64).powf(0.25), r.terminal_l2_n))
        .collect();
    Ok(TheoremReport {
        report: Report {
            schema_version: SCHEMA_VERSION,
            config: cfg.clone(),
            rows,
            warnings,
        },
        quarter_power_fit: linear_fit(&pts),
    })
}

/// Single-`k` run with its norm trace and Picard log.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub row: TheoremRow,
    pub picard_log: Vec<IterationRecord>,
    pub growth: Option<SinhFit>,
}

pub fn run_solve(cfg: &ExperimentConfig, k: u64) -> Result<(SolveReport, Vec<crate::nonlinear::NormTraceRow>)> {
    cfg.validate()?;
    let run = theorem_run(cfg, k)?;
    let sigma = run.row.sigma;
    let total = run.ua.add(&run.u)?.scale(run.row.delta);
    let (t, y): (Vec<f64>, Vec<f64>) = total.states.iter().map(|s| (s.t, l2_norm(&s.n))).unzip();
    let growth = fit_sinh_rate(&t, &y, 0.1 * sigma, 10.0 * sigma);
    let trace = norm_trace(&total, k, cfg.s as f64, sigma, growth.as_ref());
    Ok((
        SolveReport {
            picard_log: run.row.picard_log.clone(),
            row: run.row,
            growth,
        },
        trace,
    ))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Writes pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

const THEOREM_COLUMNS: [&str; 12] = [
    "k",
    "sigma",
    "delta",
    "t_k",
    "smallness",
    "initial_hs",
    "terminal_l2_n",
    "amplification",
    "crosscheck",
    "picard_iterations",
    "status",
    "error",
];

/// Instability table as CSV (header only when there are no rows).
pub fn write_theorem_csv<W: Write>(rows: &[TheoremRow], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wr.write_record(THEOREM_COLUMNS)?;
    for r in rows {
        let status = match r.status {
            RowStatus::Verified => "verified",
            RowStatus::Unverified => "UNVERIFIED",
            RowStatus::Failed => "failed",
        };
        wr.write_record([
            r.k.to_string(),
            fmt_float(r.sigma),
            fmt_float(r.delta),
            fmt_float(r.t_k),
            fmt_float(r.smallness),
            fmt_float(r.initial_hs),
            fmt_float(r.terminal_l2_n),
            fmt_float(r.amplification),
            fmt_float(r.crosscheck),
            r.picard_iterations.to_string(),
            status.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    wr.flush().map_err(io_err(Path::new("<csv>")))?;
    Ok(())
}

/// Files produced by [`emit`].
#[derive(Clone, Debug)]
pub enum Artifact<'a> {
    Dispersion(&'a DispersionAudit),
    Growth(&'a Report<GrowthFit>),
    Theorem(&'a TheoremReport),
    Solve(&'a SolveReport, &'a [crate::nonlinear::NormTraceRow]),
}

/// Writes an artifact under `dir` with fixed file names; returns the paths.
pub fn emit(dir: &Path, artifact: &Artifact) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut out = Vec::new();
    match artifact {
        Artifact::Dispersion(a) => {
            let p = dir.join("dispersion.json");
            write_json(&p, a)?;
            out.push(p);
        }
        Artifact::Growth(g) => {
            let p = dir.join("growth.json");
            write_json(&p, g)?;
            out.push(p);
        }
        Artifact::Theorem(t) => {
            let p = dir.join("theorem.json");
            write_json(&p, t)?;
            out.push(p);
            let p = dir.join("theorem.csv");
            let f = fs::File::create(&p).map_err(io_err(&p))?;
            write_theorem_csv(&t.report.rows, f)?;
            out.push(p);
        }
        Artifact::Solve(r, trace) => {
            let p = dir.join(format!("solve_k{}.json", r.row.k));
            write_json(&p, r)?;
            out.push(p);
            let p = dir.join(format!("solve_k{}_trace.csv", r.row.k));
            let f = fs::File::create(&p).map_err(io_err(&p))?;
            write_norm_trace(trace, f)?;
            out.push(p);
        }
    }
    Ok(out)
}
