//! Sweeps of β over measurement position and defect strength, convergence
//! studies, figure presets, and CSV/JSON persistence.

use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::types::{DefectKind, DefectSpec, GaussianTest, GridSpec, DEFAULT_SUPPORT_FACTOR};

pub const CSV_HEADER: &str = "defect,strength,conserved,x0,sigma,n,p_cutoff,beta,residual,wall_s";
pub const DEFAULT_X0_POINTS: usize = 81;

/// One defect family swept over `strengths × x0_values`.
///
/// A strength of exactly 0 is evaluated as the free defect, which lets
/// landscapes pass through the interaction-free line. For the free family
/// every strength must be 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPlan {
    pub family: DefectKind,
    pub conserved: bool,
    pub strengths: Vec<f64>,
    pub x0_values: Vec<f64>,
    pub sigma: f64,
    pub support_factor: f64,
    pub grid: GridSpec,
}

/// `count` uniform points on `[a, b]`, endpoints included.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![a],
        _ => (0..count)
            .map(|i| if i + 1 == count { b } else { a + (b - a) * i as f64 / (count - 1) as f64 })
            .collect(),
    }
}

/// Default measurement window: `[-2, 2]` for δ, `[-1, 1]` otherwise.
pub fn default_x0_interval(family: DefectKind) -> (f64, f64) {
    match family {
        DefectKind::Delta => (-2.0, 2.0),
        _ => (-1.0, 1.0),
    }
}

pub fn default_x0_values(family: DefectKind) -> Vec<f64> {
    let (a, b) = default_x0_interval(family);
    linspace(a, b, DEFAULT_X0_POINTS)
}

impl SweepPlan {
    /// Plan with σ = 0.1, default support and, if `x0_values` is `None`, the
    /// family's default 81-point window.
    pub fn new(
        family: DefectKind,
        conserved: bool,
        strengths: Vec<f64>,
        x0_values: Option<Vec<f64>>,
        grid: GridSpec,
    ) -> Result<Self> {
        let plan = SweepPlan {
            family,
            conserved,
            strengths,
            x0_values: x0_values.unwrap_or_else(|| default_x0_values(family)),
            sigma: 0.1,
            support_factor: DEFAULT_SUPPORT_FACTOR,
            grid,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strengths.is_empty() {
            return Err(Error::Config("sweep needs at least one strength".into()));
        }
        if self.x0_values.is_empty() {
            return Err(Error::Config("sweep needs at least one x0".into()));
        }
        if let Some(x) = self.x0_values.iter().find(|x| !x.is_finite()) {
            return Err(Error::Config(format!("x0 must be finite, got {x}")));
        }
        GaussianTest::with_support_factor(0.0, self.sigma, self.support_factor)?;
        GridSpec::new(self.grid.n(), self.grid.p_cutoff())?;
        for &s in &self.strengths {
            self.defect_for(s)?;
        }
        Ok(())
    }

    fn defect_for(&self, strength: f64) -> Result<DefectSpec> {
        match self.family {
            DefectKind::Free if strength == 0.0 && !self.conserved => Ok(DefectSpec::free()),
            DefectKind::Free if self.conserved => {
                Err(Error::Config("the conserved flag applies only to the jump defect".into()))
            }
            DefectKind::Free => Err(Error::Config(format!("free sweep takes strength 0, got {strength}"))),
            _ if strength == 0.0 => Ok(DefectSpec::free()),
            kind => DefectSpec::new(kind, Some(strength), self.conserved),
        }
    }

    /// Sweep points in row order: ascending strength, then ascending x0.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut s = self.strengths.clone();
        let mut x = self.x0_values.clone();
        s.sort_by(f64::total_cmp);
        x.sort_by(f64::total_cmp);
        s.iter().flat_map(|&a| x.iter().map(move |&b| (a, b))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub defect: DefectKind,
    pub strength: f64,
    pub conserved: bool,
    pub x0: f64,
    pub sigma: f64,
    pub n: usize,
    pub p_cutoff: f64,
    pub beta: f64,
    pub residual: f64,
    pub wall_s: f64,
    /// Set on failed points, whose `beta` and `residual` are NaN.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepOptions {
    pub exec: Execution,
    /// When false, `wall_s` is written as 0 so that output files are
    /// byte-reproducible.
    pub record_timing: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { exec: Execution::Parallel, record_timing: true }
    }
}

fn evaluate(plan: &SweepPlan, strength: f64, x0: f64, opts: &SweepOptions) -> SweepRow {
    let start = Instant::now();
    let outcome = plan.defect_for(strength).and_then(|defect| {
        let test = GaussianTest::with_support_factor(x0, plan.sigma, plan.support_factor)?;
        // Sweep points are the parallel unit; each point runs serially.
        let r = crate::backflow_constant(&defect, &test, &plan.grid, Execution::Serial)?;
        Ok((defect, r))
    });
    let wall_s = if opts.record_timing { start.elapsed().as_secs_f64() } else { 0.0 };
    let (defect, beta, residual, error) = match outcome {
        Ok((d, r)) => (d.kind(), r.beta, r.residual_norm, None),
        Err(e) => (plan.family, f64::NAN, f64::NAN, Some(e.to_string())),
    };
    SweepRow {
        defect,
        strength,
        conserved: plan.conserved && defect == DefectKind::Jump,
        x0,
        sigma: plan.sigma,
        n: plan.grid.n(),
        p_cutoff: plan.grid.p_cutoff(),
        beta,
        residual,
        wall_s,
        error,
    }
}

/// One row per `(strength, x0)`, ordered by strength then x0. A failing
/// point yields a NaN row with an error note; only an invalid plan is an error.
pub fn run_sweep(plan: &SweepPlan, exec: Execution) -> Result<Vec<SweepRow>> {
    run_sweep_with(plan, &SweepOptions { exec, ..SweepOptions::default() })
}

pub fn run_sweep_with(plan: &SweepPlan, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    run_plans(std::slice::from_ref(plan), opts)
}

/// Rows of several plans, concatenated in plan order.
pub fn run_plans(plans: &[SweepPlan], opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    for p in plans {
        p.validate()?;
    }
    let jobs: Vec<(usize, f64, f64)> = plans
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.points().into_iter().map(move |(s, x)| (i, s, x)))
        .collect();
    Ok(opts.exec.map_indices(jobs.len(), |j| {
        let (i, s, x) = jobs[j];
        evaluate(&plans[i], s, x, opts)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceEntry {
    pub n: usize,
    pub p_cutoff: f64,
    pub beta: f64,
    pub residual: f64,
}

/// β on every `(n, p_cutoff)` pair, n-major.
pub fn convergence_study(
    defect: &DefectSpec,
    test: &GaussianTest,
    n_values: &[usize],
    p_values: &[f64],
    exec: Execution,
) -> Result<Vec<ConvergenceEntry>> {
    if n_values.is_empty() || p_values.is_empty() {
        return Err(Error::Config("convergence study needs nonempty n and p lists".into()));
    }
    let mut out = Vec::with_capacity(n_values.len() * p_values.len());
    for &n in n_values {
        for &p in p_values {
            let grid = GridSpec::new(n, p)?;
            let r = crate::backflow_constant(defect, test, &grid, exec)?;
            out.push(ConvergenceEntry { n, p_cutoff: p, beta: r.beta, residual: r.residual_norm });
        }
    }
    Ok(out)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let fields = [
            r.defect.as_str().to_string(),
            num(r.strength),
            r.conserved.to_string(),
            num(r.x0),
            num(r.sigma),
            r.n.to_string(),
            num(r.p_cutoff),
            num(r.beta),
            num(r.residual),
            num(r.wall_s),
        ];
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

/// JSON array mirroring the CSV columns; NaN becomes `null`.
pub fn to_json(rows: &[SweepRow]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows)?;
    s.push('\n');
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Echo of what produced a result file.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub preset: Option<String>,
    pub plans: Vec<SweepPlan>,
    pub version: String,
    pub started_unix_s: u64,
    pub rows: usize,
    pub failed_rows: usize,
    pub output: PathBuf,
}

impl RunManifest {
    pub fn new(preset: Option<&str>, plans: &[SweepPlan], started: SystemTime, rows: &[SweepRow], output: &Path) -> Self {
        RunManifest {
            preset: preset.map(str::to_string),
            plans: plans.to_vec(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_s: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            rows: rows.len(),
            failed_rows: rows.iter().filter(|r| r.failed()).count(),
            output: output.to_path_buf(),
        }
    }
}

/// `<out>.manifest.json` next to the result file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Writes `contents` via a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Writes the rows and the manifest beside them.
pub fn write_results(path: &Path, format: OutputFormat, rows: &[SweepRow], manifest: &RunManifest) -> Result<()> {
    let body = match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => to_json(rows)?,
    };
    write_atomic(path, body.as_bytes())?;
    let mut m = serde_json::to_string_pretty(manifest)?;
    m.push('\n');
    write_atomic(&manifest_path(path), m.as_bytes())
}

/// A named sweep reproducing one paper figure.
#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub figure: &'static str,
    kind: PresetKind,
}

#[derive(Clone, Copy, Debug)]
enum PresetKind {
    /// δ curves for `±|λ|` of each listed magnitude (negative values taken as given).
    DeltaCurves(&'static [f64]),
    /// Jump curves for `±α`, non-conserved and conserved.
    JumpCurves(f64),
    DeltaLandscape(f64),
    JumpLandscape { max_alpha: f64, conserved: bool },
}

const LANDSCAPE_STRENGTHS: usize = 41;

pub const PRESETS: &[Preset] = &[
    Preset { name: "delta-fig2a", figure: "Fig. 2(a): δ defect, λ = ±0.5", kind: PresetKind::DeltaCurves(&[0.5]) },
    Preset { name: "delta-fig2b", figure: "Fig. 2(b): δ defect, λ = ±1", kind: PresetKind::DeltaCurves(&[1.0]) },
    Preset { name: "delta-fig3a", figure: "Fig. 3(a): δ defect, λ = ±5", kind: PresetKind::DeltaCurves(&[5.0]) },
    Preset { name: "delta-fig3b", figure: "Fig. 3(b): δ defect, λ = ±10", kind: PresetKind::DeltaCurves(&[10.0]) },
    Preset {
        name: "delta-peak",
        figure: "§6.2 peak exploration: δ defect, λ ∈ {-0.4, -0.5, -0.6}, reduced grid",
        kind: PresetKind::DeltaCurves(&[-0.4, -0.5, -0.6]),
    },
    Preset { name: "jump-fig4a", figure: "Fig. 4(a): jump, α = ±0.1, both currents", kind: PresetKind::JumpCurves(0.1) },
    Preset { name: "jump-fig4b", figure: "Fig. 4(b): jump, α = ±0.2, both currents", kind: PresetKind::JumpCurves(0.2) },
    Preset { name: "jump-fig5a", figure: "Fig. 5(a): jump, α = ±1, both currents", kind: PresetKind::JumpCurves(1.0) },
    Preset { name: "jump-fig5b", figure: "Fig. 5(b): jump, α = ±4, both currents", kind: PresetKind::JumpCurves(4.0) },
    Preset { name: "jump-fig6a", figure: "Fig. 6(a): jump, α = ±9, both currents", kind: PresetKind::JumpCurves(9.0) },
    Preset { name: "jump-fig6b", figure: "Fig. 6(b): jump, α = ±10, both currents", kind: PresetKind::JumpCurves(10.0) },
    Preset { name: "jump-fig7a", figure: "Fig. 7(a): jump, α = ±20, both currents", kind: PresetKind::JumpCurves(20.0) },
    Preset { name: "jump-fig7b", figure: "Fig. 7(b): jump, α = ±50, both currents", kind: PresetKind::JumpCurves(50.0) },
    Preset { name: "jump-fig8a", figure: "Fig. 8(a): jump, α = ±200, both currents", kind: PresetKind::JumpCurves(200.0) },
    Preset { name: "jump-fig8b", figure: "Fig. 8(b): jump, α = ±1000, both currents", kind: PresetKind::JumpCurves(1000.0) },
    Preset {
        name: "landscape-fig9",
        figure: "Fig. 9: δ landscape, λ ∈ [-10, 10] × x0 ∈ [-2, 2]",
        kind: PresetKind::DeltaLandscape(10.0),
    },
    Preset {
        name: "landscape-fig10",
        figure: "Fig. 10: jump landscape, non-conserved, α ∈ [-50, 50] × x0 ∈ [-1, 1]",
        kind: PresetKind::JumpLandscape { max_alpha: 50.0, conserved: false },
    },
    Preset {
        name: "landscape-fig11",
        figure: "Fig. 11: jump landscape, non-conserved, α ∈ [-5, 5] × x0 ∈ [-1, 1]",
        kind: PresetKind::JumpLandscape { max_alpha: 5.0, conserved: false },
    },
    Preset {
        name: "landscape-fig12",
        figure: "Fig. 12: jump landscape, conserved, α ∈ [-50, 50] × x0 ∈ [-1, 1]",
        kind: PresetKind::JumpLandscape { max_alpha: 50.0, conserved: true },
    },
    Preset {
        name: "landscape-fig13",
        figure: "Fig. 13: jump landscape, conserved, α ∈ [-5, 5] × x0 ∈ [-1, 1]",
        kind: PresetKind::JumpLandscape { max_alpha: 5.0, conserved: true },
    },
];

pub fn preset(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        Error::Config(format!("unknown preset `{name}`; available: {}", names.join(", ")))
    })
}

impl Preset {
    pub fn is_landscape(&self) -> bool {
        matches!(self.kind, PresetKind::DeltaLandscape(_) | PresetKind::JumpLandscape { .. })
    }

    /// Default grid: the paper grid for curves, the reduced grid for
    /// landscapes and the peak exploration unless `full_resolution`.
    pub fn default_grid(&self, full_resolution: bool) -> GridSpec {
        let reduced = self.is_landscape() || self.name == "delta-peak";
        if reduced && !full_resolution {
            GridSpec::reduced()
        } else {
            GridSpec::paper()
        }
    }

    pub fn plans(&self, grid: GridSpec) -> Vec<SweepPlan> {
        let plan = |family, conserved, strengths: Vec<f64>| SweepPlan {
            family,
            conserved,
            x0_values: default_x0_values(family),
            strengths,
            sigma: 0.1,
            support_factor: DEFAULT_SUPPORT_FACTOR,
            grid,
        };
        match self.kind {
            PresetKind::DeltaCurves(mags) if mags.iter().all(|m| *m > 0.0) => {
                vec![plan(DefectKind::Delta, false, mags.iter().flat_map(|&m| [-m, m]).collect())]
            }
            PresetKind::DeltaCurves(values) => vec![plan(DefectKind::Delta, false, values.to_vec())],
            PresetKind::JumpCurves(a) => vec![
                plan(DefectKind::Jump, false, vec![-a, a]),
                plan(DefectKind::Jump, true, vec![-a, a]),
            ],
            PresetKind::DeltaLandscape(m) => vec![plan(DefectKind::Delta, false, linspace(-m, m, LANDSCAPE_STRENGTHS))],
            PresetKind::JumpLandscape { max_alpha, conserved } => {
                vec![plan(DefectKind::Jump, conserved, linspace(-max_alpha, max_alpha, LANDSCAPE_STRENGTHS))]
            }
        }
    }
}
