//! Scenario configuration: JSON schema, dimension checks and conversion
//! into engine objects.

use std::fmt;

use gbdt_core::canonical::{validate_system, HamiltonianSpec, Sampled, ValidationOptions, Violation};
use gbdt_core::closed_form::DiagonalGbdt;
use gbdt_core::matrix::{c, from_row_major, CMatrix, C64};
use gbdt_core::{CanonicalSystem, GbdtParams};
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

/// A complex number, `[re, im]` or a bare real.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Cx {
    Pair([f64; 2]),
    Real(f64),
}

impl Cx {
    pub fn value(self) -> C64 {
        match self {
            Cx::Pair([re, im]) => c(re, im),
            Cx::Real(re) => c(re, 0.0),
        }
    }
}

/// Matrix as a list of rows.
pub type MatrixJson = Vec<Vec<Cx>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub system: SystemConfig,
    #[serde(default)]
    pub gbdt: Option<GbdtConfig>,
    #[serde(default)]
    pub tasks: Vec<TaskConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub m: usize,
    #[serde(rename = "J")]
    pub j: MatrixJson,
    pub interval: [f64; 2],
    pub xi: f64,
    pub hamiltonian: HamiltonianConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianConfig {
    /// `H = beta* beta` with constant `beta` (`k x m`).
    ConstantBeta(MatrixJson),
    /// `H = beta* beta`, `beta` sampled on `x`.
    BetaGrid { x: Vec<f64>, values: Vec<MatrixJson> },
    /// `H` sampled on `x`.
    HGrid { x: Vec<f64>, values: Vec<MatrixJson> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbdtConfig {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(rename = "B", default)]
    pub b: Option<MatrixJson>,
    #[serde(rename = "S0", default)]
    pub s0: Option<MatrixJson>,
    #[serde(rename = "Pi0", default)]
    pub pi0: Option<MatrixJson>,
    /// Shorthand `B = diag(b)`, with `g, h` determining `Pi(0)` and `S(0)`.
    #[serde(default)]
    pub diagonal: Option<DiagonalConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalConfig {
    pub b: Vec<Cx>,
    pub g: Vec<Cx>,
    pub h: Vec<Cx>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub ode: f64,
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ode: 1e-10, psd: 1e-10 }
    }
}

fn grid_points() -> usize {
    21
}
fn charfn_n() -> Vec<usize> {
    vec![256, 512, 1024]
}
fn probe_n() -> Vec<usize> {
    vec![64, 128, 256]
}
fn eta0() -> f64 {
    0.05
}
fn levels() -> usize {
    6
}
fn band() -> f64 {
    0.05
}
fn default_z() -> Vec<Cx> {
    vec![Cx::Pair([0.0, 2.0])]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskConfig {
    Validate {},
    Evolve {
        #[serde(default = "grid_points")]
        grid_points: usize,
    },
    Transform {
        #[serde(default = "grid_points")]
        grid_points: usize,
        #[serde(default = "default_z")]
        z: Vec<Cx>,
    },
    Charfn {
        #[serde(default = "charfn_n")]
        n: Vec<usize>,
        #[serde(default = "default_z")]
        z: Vec<Cx>,
    },
    RhJump {
        #[serde(default)]
        x: Option<f64>,
        s: Vec<f64>,
        #[serde(default = "eta0")]
        eta0: f64,
        #[serde(default = "levels")]
        levels: usize,
    },
    ExampleN1 {
        #[serde(default = "grid_points")]
        grid_points: usize,
        #[serde(default = "default_z")]
        z: Vec<Cx>,
    },
    Probe {
        #[serde(default = "probe_n")]
        n: Vec<usize>,
        #[serde(default = "band")]
        band: f64,
    },
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TaskConfig::Validate {} => "validate",
            TaskConfig::Evolve { .. } => "evolve",
            TaskConfig::Transform { .. } => "transform",
            TaskConfig::Charfn { .. } => "charfn",
            TaskConfig::RhJump { .. } => "rh-jump",
            TaskConfig::ExampleN1 { .. } => "example-n1",
            TaskConfig::Probe { .. } => "probe",
        }
    }
}

/// A malformed configuration, anchored at a line of the source.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: String,
    pub line: usize,
    pub column: usize,
    /// Dotted path of the offending block, e.g. `system.J`.
    pub block: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}: {}", self.file, self.line, self.column, self.block, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Line and column (1-based) of the value of the key path `path`, found
/// by scanning for each `"key":` in turn.
pub fn locate(src: &str, path: &[&str]) -> Option<(usize, usize)> {
    let mut pos = 0;
    for key in path {
        let pat = format!("\"{key}\"");
        let mut from = pos;
        loop {
            let i = src[from..].find(&pat)? + from;
            let after = src[i + pat.len()..].trim_start();
            if after.starts_with(':') {
                pos = i;
                break;
            }
            from = i + pat.len();
        }
    }
    let line = src[..pos].matches('\n').count() + 1;
    let column = pos - src[..pos].rfind('\n').map_or(0, |i| i + 1) + 1;
    Some((line, column))
}

/// Scenario resolved into engine objects.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub system: CanonicalSystem,
    pub params: Option<GbdtParams>,
    pub diagonal: Option<DiagonalGbdt>,
    pub tasks: Vec<TaskConfig>,
    pub tolerances: Tolerances,
    pub output_dir: Option<String>,
}

struct Ctx<'a> {
    file: &'a str,
    src: &'a str,
}

impl Ctx<'_> {
    fn err(&self, path: &[&str], message: impl Into<String>) -> ConfigError {
        // anchor at the deepest key that can be found
        let (line, column) = (1..=path.len()).rev().find_map(|k| locate(self.src, &path[..k])).unwrap_or((1, 1));
        ConfigError { file: self.file.to_string(), line, column, block: path.join("."), message: message.into() }
    }

    fn matrix(&self, path: &[&str], m: &MatrixJson, shape: Option<(usize, usize)>) -> Result<CMatrix, ConfigError> {
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || m.iter().any(|r| r.len() != cols) {
            return Err(self.err(path, "matrix must be a non-empty list of rows of equal length"));
        }
        if let Some((r, k)) = shape {
            if (rows, cols) != (r, k) {
                return Err(self.err(path, format!("expected a {r}x{k} matrix, found {rows}x{cols}")));
            }
        }
        let entries: Vec<C64> = m.iter().flatten().map(|x| x.value()).collect();
        from_row_major(rows, cols, &entries).map_err(|e| self.err(path, e.to_string()))
    }

    fn vector(&self, path: &[&str], v: &[Cx], n: usize) -> Result<Vec<C64>, ConfigError> {
        if v.len() != n {
            return Err(self.err(path, format!("expected {n} entries, found {}", v.len())));
        }
        let out: Vec<C64> = v.iter().map(|x| x.value()).collect();
        if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(self.err(path, "entries must be finite"));
        }
        Ok(out)
    }
}

fn violation_block(v: &Violation) -> &'static [&'static str] {
    match v {
        Violation::BadInterval { .. } => &["system", "interval"],
        Violation::XiOutside { .. } => &["system", "xi"],
        Violation::JNotHermitian { .. } | Violation::JNotInvolution { .. } => &["system", "J"],
        _ => &["system", "hamiltonian"],
    }
}

/// Parses and dimension-checks a scenario; nothing is computed beyond the
/// structural checks on `J`, `H` and the parameter shapes.
pub fn parse(file: &str, src: &str) -> Result<Scenario, ConfigError> {
    let ctx = Ctx { file, src };
    let cfg: ScenarioConfig = serde_json::from_str(src).map_err(|e| ConfigError {
        file: file.to_string(),
        line: e.line().max(1),
        column: e.column().max(1),
        block: "config".into(),
        message: e.to_string(),
    })?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(ctx.err(
            &["schema_version"],
            format!("unsupported schema version {} (expected {SCHEMA_VERSION})", cfg.schema_version),
        ));
    }
    let tol = cfg.tolerances;
    if !(tol.ode > 0.0 && tol.ode < 1e-2 && tol.psd >= 0.0) {
        return Err(ctx.err(&["tolerances"], "ode must lie in (0, 1e-2) and psd must be non-negative"));
    }
    let sys_cfg = &cfg.system;
    let m = sys_cfg.m;
    if m == 0 {
        return Err(ctx.err(&["system", "m"], "m must be positive"));
    }
    let j = ctx.matrix(&["system", "J"], &sys_cfg.j, Some((m, m)))?;
    let [a, b] = sys_cfg.interval;
    let hpath = ["system", "hamiltonian"];
    let spec = match &sys_cfg.hamiltonian {
        HamiltonianConfig::ConstantBeta(beta) => {
            let beta = ctx.matrix(&["system", "hamiltonian", "constant_beta"], beta, None)?;
            if beta.ncols() != m {
                return Err(ctx.err(&["system", "hamiltonian", "constant_beta"], format!("beta must have m = {m} columns")));
            }
            HamiltonianSpec::constant_beta(beta, a, b).map_err(|e| ctx.err(&hpath, e.to_string()))?
        }
        HamiltonianConfig::BetaGrid { x, values } | HamiltonianConfig::HGrid { x, values } => {
            let factored = matches!(sys_cfg.hamiltonian, HamiltonianConfig::BetaGrid { .. });
            let key = if factored { "beta_grid" } else { "h_grid" };
            let vpath = ["system", "hamiltonian", key, "values"];
            if x.len() != values.len() {
                return Err(ctx.err(&vpath, format!("{} samples for {} grid points", values.len(), x.len())));
            }
            let mut mats = Vec::with_capacity(values.len());
            let mut k = None;
            for v in values {
                let mat = ctx.matrix(&vpath, v, if factored { k.map(|k| (k, m)) } else { Some((m, m)) })?;
                if factored && mat.ncols() != m {
                    return Err(ctx.err(&vpath, format!("beta samples must have m = {m} columns")));
                }
                k = Some(mat.nrows());
                mats.push(mat);
            }
            let sampled = Sampled::new(x.clone(), mats).map_err(|e| ctx.err(&hpath, e.to_string()))?;
            if factored {
                HamiltonianSpec::Factored(sampled)
            } else {
                HamiltonianSpec::Grid(sampled)
            }
        }
    };
    let system = CanonicalSystem::new(j, (a, b), sys_cfg.xi, spec).map_err(|e| ctx.err(&["system"], e.to_string()))?;
    let opts = ValidationOptions { psd_tol: tol.psd, ..ValidationOptions::default() };
    if let Some(v) = validate_system(&system, &opts).first() {
        return Err(ctx.err(violation_block(v), v.to_string()));
    }

    let (params, diagonal) = match &cfg.gbdt {
        None => (None, None),
        Some(g) => resolve_gbdt(&ctx, g, &system)?,
    };
    for (i, t) in cfg.tasks.iter().enumerate() {
        check_task(&ctx, i, t, &system)?;
    }
    Ok(Scenario {
        name: cfg.name.unwrap_or_else(|| "scenario".into()),
        system,
        params,
        diagonal,
        tasks: cfg.tasks,
        tolerances: tol,
        output_dir: cfg.output_dir,
    })
}

fn resolve_gbdt(
    ctx: &Ctx<'_>,
    g: &GbdtConfig,
    sys: &CanonicalSystem,
) -> Result<(Option<GbdtParams>, Option<DiagonalGbdt>), ConfigError> {
    let m = sys.m();
    if let Some(d) = &g.diagonal {
        if g.b.is_some() || g.s0.is_some() || g.pi0.is_some() {
            return Err(ctx.err(&["gbdt"], "give either the diagonal shorthand or B, S0, Pi0, not both"));
        }
        if m != 2 {
            return Err(ctx.err(&["gbdt", "diagonal"], "the diagonal shorthand is defined for m = 2"));
        }
        let n = g.n.unwrap_or(d.b.len());
        let bv = ctx.vector(&["gbdt", "diagonal", "b"], &d.b, n)?;
        let gv = ctx.vector(&["gbdt", "diagonal", "g"], &d.g, n)?;
        let hv = ctx.vector(&["gbdt", "diagonal", "h"], &d.h, n)?;
        if sys.xi() != 0.0 {
            return Err(ctx.err(&["gbdt", "diagonal"], "the diagonal shorthand is anchored at the base point 0"));
        }
        let dg = DiagonalGbdt::new(bv, gv, hv).map_err(|e| ctx.err(&["gbdt", "diagonal"], e.to_string()))?;
        let params = dg.params().map_err(|e| ctx.err(&["gbdt", "diagonal"], e.to_string()))?;
        return Ok((Some(params), Some(dg)));
    }
    let (Some(b), Some(s0), Some(pi0)) = (&g.b, &g.s0, &g.pi0) else {
        return Err(ctx.err(&["gbdt"], "B, S0 and Pi0 are required (or the diagonal shorthand)"));
    };
    let b = ctx.matrix(&["gbdt", "B"], b, None)?;
    let n = g.n.unwrap_or(b.nrows());
    if b.shape() != (n, n) {
        return Err(ctx.err(&["gbdt", "B"], format!("expected a {n}x{n} matrix, found {}x{}", b.nrows(), b.ncols())));
    }
    let s0 = ctx.matrix(&["gbdt", "S0"], s0, Some((n, n)))?;
    let pi0 = ctx.matrix(&["gbdt", "Pi0"], pi0, Some((n, m)))?;
    Ok((Some(GbdtParams { b, s0, pi0, xi: sys.xi() }), None))
}

fn check_task(ctx: &Ctx<'_>, i: usize, t: &TaskConfig, sys: &CanonicalSystem) -> Result<(), ConfigError> {
    let idx = format!("{i}");
    let path = ["tasks", idx.as_str()];
    let bad = |msg: String| ConfigError { block: format!("tasks[{i}] ({})", t.name()), ..ctx.err(&path[..1], msg) };
    let (a, b) = sys.interval();
    match t {
        TaskConfig::Evolve { grid_points } | TaskConfig::Transform { grid_points, .. } | TaskConfig::ExampleN1 { grid_points, .. }
            if *grid_points < 2 =>
        {
            Err(bad("grid_points must be at least 2".into()))
        }
        TaskConfig::Charfn { n, .. } | TaskConfig::Probe { n, .. } if n.is_empty() || n.contains(&0) => {
            Err(bad("n must be a non-empty list of positive node counts".into()))
        }
        TaskConfig::RhJump { x, s, levels, eta0 } => {
            let x = x.unwrap_or(b);
            if !(a..=b).contains(&x) {
                Err(bad(format!("x = {x} outside [{a}, {b}]")))
            } else if s.is_empty() || *levels < 2 || !(*eta0 > 0.0) {
                Err(bad("need at least one s, levels >= 2 and eta0 > 0".into()))
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
  "schema_version": 1,
  "system": {
    "m": 2,
    "J": [[0, 1], [1, 0]],
    "interval": [0, 1],
    "xi": 0,
    "hamiltonian": { "constant_beta": [[1, [0, 1]]] }
  },
  "gbdt": { "diagonal": { "b": [[0, 1]], "g": [1], "h": [0] } },
  "tasks": [{ "task": "validate" }, { "task": "evolve", "grid_points": 5 }]
}"#;

    #[test]
    fn parses_the_shorthand() {
        let s = parse("good.json", GOOD).unwrap();
        assert_eq!(s.tasks.len(), 2);
        assert_eq!(s.params.unwrap().n(), 1);
        assert!(s.diagonal.is_some());
    }

    #[test]
    fn non_involutive_j_names_the_block() {
        let src = GOOD.replace(r#""J": [[0, 1], [1, 0]]"#, r#""J": [[0, 2], [2, 0]]"#);
        let e = parse("bad.json", &src).unwrap_err();
        assert_eq!(e.block, "system.J");
        assert_eq!(e.line, 5);
        assert!(e.to_string().starts_with("bad.json:5:5: system.J:"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let src = GOOD.replace(r#""xi": 0,"#, r#""xi": 0, "zeta": 1,"#);
        let e = parse("bad.json", &src).unwrap_err();
        assert!(e.message.contains("zeta"), "{e}");
        let src = GOOD.replace(r#"{ "task": "validate" }"#, r#"{ "task": "validate", "extra": 1 }"#);
        assert!(parse("bad.json", &src).is_err());
    }

    #[test]
    fn dimension_errors() {
        let src = GOOD.replace(r#""J": [[0, 1], [1, 0]]"#, r#""J": [[0, 1, 0], [1, 0, 0]]"#);
        assert_eq!(parse("bad.json", &src).unwrap_err().block, "system.J");
        let src = GOOD.replace(r#""g": [1]"#, r#""g": [1, 2]"#);
        assert_eq!(parse("bad.json", &src).unwrap_err().block, "gbdt.diagonal.g");
        let src = GOOD.replace(r#""grid_points": 5"#, r#""grid_points": 1"#);
        assert!(parse("bad.json", &src).unwrap_err().block.starts_with("tasks[1]"));
    }

    #[test]
    fn locate_finds_nested_keys() {
        assert_eq!(locate(GOOD, &["system", "J"]), Some((5, 5)));
        assert_eq!(locate(GOOD, &["gbdt"]), Some((10, 3)));
        assert_eq!(locate(GOOD, &["nothing"]), None);
    }
}
