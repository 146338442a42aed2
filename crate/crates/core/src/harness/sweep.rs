use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracing::info;

use crate::eigen::{lowest_eigenpairs_with, EigenOptions};
use crate::error::{Error, Result};
use crate::fem::assemble;
use crate::geometry::ConvexPolygon;
use crate::harness::rate::{fit_rate, RateFit};
use crate::mesh::{build_mesh, default_spec, ArtificialBc, TruncationSpec};
use crate::model::{bracket, merged_spectrum, SpectrumKind};

/// Environment variable capping the sweep worker pool.
pub const THREADS_ENV: &str = "ROBIN_SPECTRA_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcMode {
    Both,
    DirichletOnly,
    NeumannOnly,
}

impl BcMode {
    pub fn conditions(self) -> &'static [ArtificialBc] {
        match self {
            BcMode::Both => &[ArtificialBc::Dirichlet, ArtificialBc::Neumann],
            BcMode::DirichletOnly => &[ArtificialBc::Dirichlet],
            BcMode::NeumannOnly => &[ArtificialBc::Neumann],
        }
    }
}

/// Fields replacing the corresponding entries of the default truncation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecOverrides {
    pub offset: Option<f64>,
    pub boundary_cell: Option<f64>,
    pub interior_cell: Option<f64>,
    pub grading_ratio: Option<f64>,
    pub grading_levels: Option<u32>,
}

impl SpecOverrides {
    pub fn apply(&self, mut spec: TruncationSpec) -> TruncationSpec {
        if let Some(v) = self.offset {
            spec.offset = v;
        }
        if let Some(v) = self.boundary_cell {
            spec.boundary_cell = v;
        }
        if let Some(v) = self.interior_cell {
            spec.interior_cell = v;
        }
        if let Some(v) = self.grading_ratio {
            spec.grading_ratio = v;
        }
        if let Some(v) = self.grading_levels {
            spec.grading_levels = v;
        }
        spec
    }
}

fn default_levels() -> u32 {
    2
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub polygon: ConvexPolygon,
    pub alphas: Vec<f64>,
    pub m_max: usize,
    #[serde(default)]
    pub overrides: SpecOverrides,
    /// Mesh levels per alpha; level `k` is the base mesh refined `k` times.
    #[serde(default = "default_levels")]
    pub levels: u32,
    pub bc_mode: BcMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl SweepConfig {
    pub fn new(polygon: ConvexPolygon, alphas: Vec<f64>, m_max: usize) -> Self {
        Self {
            polygon,
            alphas,
            m_max,
            overrides: SpecOverrides::default(),
            levels: default_levels(),
            bc_mode: BcMode::Both,
            seed: 0,
            tol: default_tol(),
        }
    }

    /// Rejects configurations outside the regime where the brackets hold.
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::InvalidInput("empty alpha list".into()));
        }
        if let Some(&a) = self.alphas.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::NonPositiveAlpha(a));
        }
        if self.alphas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("alpha list must be strictly increasing".into()));
        }
        if self.m_max == 0 {
            return Err(Error::InvalidInput("m_max must be at least 1".into()));
        }
        if self.levels == 0 {
            return Err(Error::InvalidInput("at least one mesh level is needed".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("solver tolerance must be positive, got {}", self.tol)));
        }
        let b = bracket(&self.polygon, self.alphas[0], self.m_max)?;
        if !b.valid {
            return Err(Error::BracketInvalid {
                m: self.m_max,
                mu: b.mu_dirichlet,
                alpha_sq: self.alphas[0] * self.alphas[0],
            });
        }
        for &a in &self.alphas {
            self.spec_for(a)?.validate(&self.polygon)?;
        }
        Ok(())
    }

    pub fn spec_for(&self, alpha: f64) -> Result<TruncationSpec> {
        Ok(self.overrides.apply(default_spec(&self.polygon, alpha, self.m_max)?))
    }
}

/// One mesh/assemble/solve job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub alpha: f64,
    pub bc: ArtificialBc,
    pub level: u32,
    pub nodes: usize,
    pub unknowns: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub restarts: usize,
    pub shift: f64,
}

/// Mesh the truncated exterior, refine `level` times, assemble and solve.
pub fn solve_level(
    polygon: &ConvexPolygon,
    alpha: f64,
    count: usize,
    spec: &TruncationSpec,
    bc: ArtificialBc,
    level: u32,
    opts: &EigenOptions,
) -> Result<SolveRecord> {
    let mut mesh = build_mesh(polygon, &TruncationSpec { artificial_bc: bc, ..*spec })?;
    for _ in 0..level {
        mesh = mesh.refine();
    }
    let form = assemble(&mesh, alpha, bc)?;
    let opts = EigenOptions {
        block_size: polygon.vertex_count(),
        ..opts.clone()
    };
    let r = lowest_eigenpairs_with(&form, count, &opts)?;
    info!(alpha, bc = bc.as_str(), level, unknowns = form.dim(), restarts = r.restarts, "solved");
    Ok(SolveRecord {
        alpha,
        bc,
        level,
        nodes: mesh.node_count(),
        unknowns: form.dim(),
        eigenvalues: r.eigenvalues,
        residuals: r.residuals,
        iterations: r.iterations,
        restarts: r.restarts,
        shift: r.shift,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub m: usize,
    /// Finest-level eigenvalue with the artificial Dirichlet condition.
    pub e_dir: Option<f64>,
    pub e_neu: Option<f64>,
    /// Midpoint of the truncation enclosure (or the single available value).
    pub e_mid: f64,
    pub enclosure_width: f64,
    pub lower: f64,
    pub upper: f64,
    pub mu_neumann: f64,
    pub mu_dirichlet: f64,
    /// `mu^D_m - (e_mid + alpha^2)`.
    pub remainder: f64,
    /// Two-level Richardson estimate plus the enclosure half-width.
    pub eps_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub records: Vec<SweepRecord>,
    pub solves: Vec<SolveRecord>,
    /// Slope of `log r_1` against `log alpha`, when enough remainders are positive.
    pub fit: Option<RateFit>,
    pub fit_error: Option<String>,
    /// `(alpha, number of computed eigenvalues below -tol)`; capped at `m_max`.
    pub bound_states: Vec<(f64, usize)>,
}

/// Worker count from [`THREADS_ENV`], else rayon's default.
pub fn worker_count() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &alpha in &cfg.alphas {
        for &bc in cfg.bc_mode.conditions() {
            for level in 0..cfg.levels {
                jobs.push((alpha, bc, level));
            }
        }
    }
    let opts = EigenOptions {
        tol: cfg.tol,
        seed: cfg.seed,
        ..EigenOptions::default()
    };
    let run = || -> Result<Vec<SolveRecord>> {
        jobs.par_iter()
            .map(|&(alpha, bc, level)| {
                let spec = cfg.spec_for(alpha)?;
                solve_level(&cfg.polygon, alpha, cfg.m_max, &spec, bc, level, &opts)
            })
            .collect()
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    let solves = pool.install(run)?;
    Ok(collect_report(cfg, solves))
}

fn collect_report(cfg: &SweepConfig, solves: Vec<SolveRecord>) -> SweepReport {
    let mu_d = merged_spectrum(&cfg.polygon, SpectrumKind::Dirichlet, cfg.m_max).values();
    let mu_n = merged_spectrum(&cfg.polygon, SpectrumKind::Neumann, cfg.m_max).values();
    let finest = cfg.levels - 1;
    let find = |alpha: f64, bc: ArtificialBc, level: u32| {
        solves
            .iter()
            .find(|s| s.alpha == alpha && s.bc == bc && s.level == level)
    };
    let mut records = Vec::new();
    let mut bound_states = Vec::new();
    for &alpha in &cfg.alphas {
        let a2 = alpha * alpha;
        let value = |bc, level, m: usize| find(alpha, bc, level).map(|s| s.eigenvalues[m]);
        let mid = |level, m| {
            let d = value(ArtificialBc::Dirichlet, level, m);
            let n = value(ArtificialBc::Neumann, level, m);
            match (d, n) {
                (Some(d), Some(n)) => (0.5 * (d + n), 0.5 * (d - n).abs()),
                (Some(x), None) | (None, Some(x)) => (x, 0.0),
                (None, None) => unreachable!("every alpha has at least one solve"),
            }
        };
        let mut below = 0;
        for m in 0..cfg.m_max {
            let (e_mid, half_gap) = mid(finest, m);
            let richardson = if finest > 0 {
                // p = 1: |E_h - E_{h/2}| / (2^p - 1)
                (mid(finest - 1, m).0 - e_mid).abs()
            } else {
                0.0
            };
            if e_mid < -cfg.tol {
                below += 1;
            }
            let e_dir = value(ArtificialBc::Dirichlet, finest, m);
            let e_neu = value(ArtificialBc::Neumann, finest, m);
            records.push(SweepRecord {
                alpha,
                m: m + 1,
                e_dir,
                e_neu,
                e_mid,
                enclosure_width: 2.0 * half_gap,
                lower: -a2 + mu_n[m],
                upper: -a2 + mu_d[m],
                mu_neumann: mu_n[m],
                mu_dirichlet: mu_d[m],
                remainder: mu_d[m] - (e_mid + a2),
                eps_h: richardson + half_gap,
            });
        }
        bound_states.push((alpha, below));
    }
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.m == 1)
        .map(|r| (r.alpha, r.remainder))
        .collect();
    let (fit, fit_error) = match fit_rate(&points) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SweepReport {
        config: cfg.clone(),
        records,
        solves,
        fit,
        fit_error,
        bound_states,
    }
}

/// Slack applied by [`check_brackets`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolPolicy {
    /// Slack on the lower (Neumann) side.
    pub solver_tol: f64,
    /// Whether the upper check adds the record's `eps_h`.
    pub use_eps_h: bool,
}

impl Default for TolPolicy {
    fn default() -> Self {
        Self {
            solver_tol: 1e-6,
            use_eps_h: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketCheck {
    pub alpha: f64,
    pub m: usize,
    /// Smallest computed value minus the lower bracket; must be `>= -solver_tol`.
    pub lower_margin: f64,
    /// Upper bracket plus slack minus the midpoint value; must be `>= 0`.
    pub upper_margin: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl BracketCheck {
    pub fn passed(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// Checks `-alpha^2 + mu^N_m - tol <= E_m` on the lowest computed value and
/// `E_m <= -alpha^2 + mu^D_m + eps_h` on the midpoint.
pub fn check_brackets(report: &SweepReport, policy: TolPolicy) -> Vec<BracketCheck> {
    report
        .records
        .iter()
        .map(|r| {
            let lowest = [r.e_dir, r.e_neu, Some(r.e_mid)]
                .into_iter()
                .flatten()
                .fold(f64::INFINITY, f64::min);
            let lower_margin = lowest - r.lower;
            let slack = if policy.use_eps_h { r.eps_h } else { 0.0 };
            let upper_margin = r.upper + slack - r.e_mid;
            BracketCheck {
                alpha: r.alpha,
                m: r.m,
                lower_margin,
                upper_margin,
                lower_ok: lower_margin >= -policy.solver_tol,
                upper_ok: upper_margin >= 0.0,
            }
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

impl SweepReport {
    /// Columns `alpha,m,E_dir,E_neu,lower,upper,remainder,eps_h`, full
    /// round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,m,E_dir,E_neu,lower,upper,remainder,eps_h\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{:?},{},{},{},{:?},{:?},{:?},{:?}",
                r.alpha,
                r.m,
                opt(r.e_dir),
                opt(r.e_neu),
                r.lower,
                r.upper,
                r.remainder,
                r.eps_h
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `r_m` for one index, in alpha order.
    pub fn remainders(&self, m: usize) -> Vec<(f64, f64, f64)> {
        self.records
            .iter()
            .filter(|r| r.m == m)
            .map(|r| (r.alpha, r.remainder, r.eps_h))
            .collect()
    }

    /// Log-log plot of the positive `r_1` values with the fitted line.
    pub fn remainder_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .remainders(1)
            .into_iter()
            .filter(|p| p.1 > 0.0)
            .map(|p| (p.0.ln(), p.1.ln()))
            .collect();
        let (w, h, pad) = (480.0, 360.0, 48.0);
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
        );
        if pts.is_empty() {
            out.push_str("<text x=\"20\" y=\"40\">no positive remainders</text>\n</svg>\n");
            return out;
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let (dx, dy) = ((x1 - x0).max(1e-3), (y1 - y0).max(1e-3));
        let (x0, x1, y0, y1) = (x0 - 0.05 * dx, x1 + 0.05 * dx, y0 - 0.1 * dy, y1 + 0.1 * dy);
        let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
        let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
        let _ = writeln!(
            out,
            "<line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
             <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"12\">log alpha</text>\n\
             <text x=\"4\" y=\"{}\" font-size=\"12\">log r_1</text>",
            h - pad,
            w - pad,
            h - pad,
            h - pad,
            w / 2.0,
            h - 12.0,
            pad - 8.0
        );
        for &(x, y) in &pts {
            let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"black\"/>", px(x), py(y));
        }
        if let Some(f) = &self.fit {
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"steelblue\"/>\n\
                 <text x=\"{}\" y=\"20\" font-size=\"12\">slope {:.3}</text>",
                px(x0),
                py(f.intercept + f.slope * x0),
                px(x1),
                py(f.intercept + f.slope * x1),
                w - 140.0,
                f.slope
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_report() -> SweepReport {
        let mut cfg = SweepConfig::new(ConvexPolygon::equilateral(1.0), vec![4.0, 6.0, 8.0], 1);
        cfg.levels = 2;
        let mut solves = Vec::new();
        for (i, &alpha) in cfg.alphas.iter().enumerate() {
            for bc in [ArtificialBc::Dirichlet, ArtificialBc::Neumann] {
                for level in 0..2 {
                    let e = -alpha * alpha + 9.0 - i as f64 - 0.01 * level as f64;
                    solves.push(SolveRecord {
                        alpha,
                        bc,
                        level,
                        nodes: 0,
                        unknowns: 0,
                        eigenvalues: vec![e],
                        residuals: vec![0.0],
                        iterations: 0,
                        restarts: 0,
                        shift: -alpha * alpha - 1.0,
                    });
                }
            }
        }
        collect_report(&cfg, solves)
    }

    #[test]
    fn report_fields() {
        let r = fake_report();
        assert_eq!(r.records.len(), 3);
        let first = &r.records[0];
        assert_eq!(first.e_mid, -16.0 + 9.0 - 0.01);
        assert!((first.eps_h - 0.01).abs() < 1e-12);
        assert_eq!(first.enclosure_width, 0.0);
        assert!((first.remainder - (std::f64::consts::PI.powi(2) - 8.99)).abs() < 1e-12);
        assert!(r.fit.is_some());
        assert_eq!(r.bound_states, vec![(4.0, 1), (6.0, 1), (8.0, 1)]);
        assert!(check_brackets(&r, TolPolicy::default()).iter().all(BracketCheck::passed));
        let csv = r.to_csv();
        assert!(csv.starts_with("alpha,m,E_dir,E_neu,lower,upper,remainder,eps_h\n4.0,1,"));
        assert_eq!(csv.lines().count(), 4);
        assert!(r.remainder_svg().contains("<circle"));
    }

    #[test]
    fn injected_fault_flags_lower_bound() {
        let mut r = fake_report();
        r.records[0].e_neu = Some(-16.5);
        let checks = check_brackets(&r, TolPolicy::default());
        assert!(!checks[0].lower_ok);
        assert!(checks[1].passed());
    }

    #[test]
    fn config_validation() {
        let tri = ConvexPolygon::equilateral(1.0);
        assert!(SweepConfig::new(tri.clone(), vec![4.0, 6.0], 3).validate().is_ok());
        assert!(matches!(
            SweepConfig::new(tri.clone(), vec![3.0, 6.0], 1).validate(),
            Err(Error::BracketInvalid { .. })
        ));
        assert!(SweepConfig::new(tri.clone(), vec![6.0, 4.0], 1).validate().is_err());
        assert!(SweepConfig::new(tri.clone(), vec![], 1).validate().is_err());
        assert!(SweepConfig::new(tri, vec![4.0], 0).validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = SweepConfig::new(ConvexPolygon::unit_square(), vec![10.0], 4);
        let back: SweepConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        let min: SweepConfig = serde_json::from_str(
            r#"{"polygon":{"vertices":[[0,0],[1,0],[0,1]]},"alphas":[5.0],"m_max":1,"bc_mode":"both"}"#,
        )
        .unwrap();
        assert_eq!(min.levels, 2);
    }
}
