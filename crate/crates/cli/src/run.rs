//! Task execution.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use gbdt_core::canonical::{
    boundary_values, j_monotonicity_defect, kernel_bound, kernel_bound_of, BoundaryOptions, HamiltonianSpec,
};
use gbdt_core::closed_form::{n1_closed_forms, transformed_w_explicit_n1, Example51};
use gbdt_core::gbdt::{
    direct_transformed_solution, evolve, positivity_report, transfer, transformed_boundary_values,
    transformed_fundamental, transformed_hamiltonian, validate_params, ParamOptions,
};
use gbdt_core::matrix::{frobenius, identity, min_hermitian_eig, norm2, re, CMatrix, C64};
use gbdt_core::triangular::{
    char_fn, char_fn_via_solution, discretize, similarity_probe, transform_model, transform_model_unitary,
    TriangularModel,
};
use gbdt_core::{GbdtParams, GbdtTrajectory};
use thiserror::Error;

use crate::config::{parse, ConfigError, Cx, Scenario, TaskConfig, SCHEMA_VERSION};
use crate::output::{write_matrix_series, write_results, write_table, Check, Key, Results, TaskReport};

/// Bound on the agreement of engine outputs with closed forms in the
/// `example-n1` task.
pub const CLOSED_FORM_BOUND: f64 = 1e-8;
/// Bound on `W~` from the representation vs direct integration.
pub const REPRESENTATION_BOUND: f64 = 1e-6;
/// Bound on jump errors after extrapolation.
pub const JUMP_BOUND: f64 = 1e-3;
/// Relative bound on discretized characteristic functions.
pub const CHARFN_BOUND: f64 = 1e-2;
/// Trajectory samples used when a task needs `w0` along the whole interval.
const MODEL_GRID_POINTS: usize = 201;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub results: Results,
    pub out_dir: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.results.all_pass {
            0
        } else {
            1
        }
    }
}

/// Parses `path`, runs every task and writes the reports. The output
/// directory is `out`, else the config's `output_dir` (relative to the
/// config file), else `out` next to the config.
pub fn run_file(path: &Path, out: Option<&Path>, tol: Option<f64>) -> Result<RunOutcome, RunError> {
    let io_err = |p: &Path| {
        let path = p.display().to_string();
        move |source| RunError::Io { path, source }
    };
    let src = fs::read_to_string(path).map_err(io_err(path))?;
    let mut sc = parse(&path.display().to_string(), &src)?;
    if let Some(t) = tol {
        if !(t > 0.0 && t < 1e-2) {
            return Err(ConfigError {
                file: path.display().to_string(),
                line: 1,
                column: 1,
                block: "--tol".into(),
                message: format!("tolerance {t} outside (0, 1e-2)"),
            }
            .into());
        }
        sc.tolerances.ode = t;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let out_dir = match (out, &sc.output_dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(d)) => base.join(d),
        (None, None) => base.join("out"),
    };
    fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
    let results = run_scenario(&sc, &out_dir).map_err(io_err(&out_dir))?;
    Ok(RunOutcome { results, out_dir })
}

/// Runs the tasks in order; numerical failures are recorded per task.
pub fn run_scenario(sc: &Scenario, dir: &Path) -> io::Result<Results> {
    let runner = Runner { sc, dir, tol: sc.tolerances.ode };
    let mut tasks = Vec::with_capacity(sc.tasks.len());
    for (i, t) in sc.tasks.iter().enumerate() {
        let prefix = format!("{:02}_{}", i + 1, t.name());
        let report = match runner.task(t, &prefix) {
            Ok((checks, files)) => TaskReport { task: t.name().into(), status: "ok".into(), error: None, checks, files },
            Err(Failure::Io(e)) => return Err(e),
            Err(Failure::Numeric(msg)) => TaskReport {
                task: t.name().into(),
                status: "error".into(),
                error: Some(msg),
                checks: Vec::new(),
                files: Vec::new(),
            },
        };
        tasks.push(report);
    }
    let all_pass = tasks.iter().all(TaskReport::passed);
    let results = Results { schema_version: SCHEMA_VERSION, scenario: sc.name.clone(), ode_tol: runner.tol, tasks, all_pass };
    write_results(dir, &results)?;
    Ok(results)
}

enum Failure {
    Io(io::Error),
    Numeric(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<gbdt_core::Error> for Failure {
    fn from(e: gbdt_core::Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}

type TaskOut = Result<(Vec<Check>, Vec<String>), Failure>;

fn fail<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Numeric(msg.into()))
}

fn uniform(a: f64, b: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| if i + 1 == points { b } else { a + (b - a) * i as f64 / (points - 1) as f64 }).collect()
}

fn zs(z: &[Cx]) -> Vec<C64> {
    z.iter().map(|c| c.value()).collect()
}

struct Runner<'a> {
    sc: &'a Scenario,
    dir: &'a Path,
    tol: f64,
}

impl Runner<'_> {
    fn task(&self, t: &TaskConfig, prefix: &str) -> TaskOut {
        match t {
            TaskConfig::Validate {} => self.validate(),
            TaskConfig::Evolve { grid_points } => self.evolve(*grid_points, prefix),
            TaskConfig::Transform { grid_points, z } => self.transform(*grid_points, &zs(z), prefix),
            TaskConfig::Charfn { n, z } => self.charfn(n, &zs(z), prefix),
            TaskConfig::RhJump { x, s, eta0, levels } => self.rh_jump(*x, s, *eta0, *levels, prefix),
            TaskConfig::ExampleN1 { grid_points, z } => self.example_n1(*grid_points, &zs(z), prefix),
            TaskConfig::Probe { n, band } => self.probe(n, *band, prefix),
        }
    }

    fn params(&self) -> Result<&GbdtParams, Failure> {
        let Some(p) = &self.sc.params else { return fail("this task needs a gbdt block") };
        if let Some(v) = validate_params(p, &self.sc.system, &ParamOptions::default()).first() {
            return fail(format!("invalid GBDT parameters: {v}"));
        }
        Ok(p)
    }

    fn trajectory(&self, points: usize) -> Result<GbdtTrajectory, Failure> {
        let (a, b) = self.sc.system.interval();
        Ok(evolve(self.params()?, &self.sc.system, &uniform(a, b, points), self.tol)?)
    }

    fn validate(&self) -> TaskOut {
        let sys = &self.sc.system;
        let mut checks = vec![Check::le("system.structural_violations", 0.0, 0.0)];
        if let Some(p) = &self.sc.params {
            let opts = ParamOptions::default();
            let (a, b) = sys.interval();
            let violations = validate_params(p, sys, &opts);
            let residual = p.identity_residual(sys.j()).unwrap_or(f64::INFINITY);
            checks.push(Check::le("gbdt.identity_residual", residual, opts.identity_tol * p.identity_scale()));
            let herm = frobenius(&(&p.s0 - p.s0.adjoint()));
            checks.push(Check::le("gbdt.s0_hermitian_defect", herm, opts.hermitian_tol * (1.0 + frobenius(&p.s0))));
            let dist = gbdt_core::gbdt::spectrum_distance(p, a, b)?;
            checks.push(Check::gt("gbdt.spectrum_distance", dist, opts.spectrum_margin * (b - a)));
            checks.push(Check::le("gbdt.violations", violations.len() as f64, 0.0));
        }
        Ok((checks, Vec::new()))
    }

    fn evolve(&self, points: usize, prefix: &str) -> TaskOut {
        let traj = self.trajectory(points)?;
        let tol = self.tol;
        let mut checks = vec![Check::le("identity_residual", traj.identity_residual, 10.0 * tol)];
        let rep = positivity_report(&traj)?;
        checks.push(Check::ge("q_increment_min_eig", rep.q_increment_min_eig, -10.0 * tol));
        if min_hermitian_eig(&traj.params.s0) > 0.0 {
            checks.push(Check::gt("s_min_eig", rep.min_eig_s, 0.0));
            checks.push(Check::ge("inverse_bound_min_eig", rep.inverse_bound_min_eig, -10.0 * tol));
            checks.push(Check::le("norm_bound_excess", rep.norm_bound_excess, 10.0 * tol));
        }
        let x = &traj.grid;
        let pick = |f: fn(&gbdt_core::gbdt::GbdtState) -> CMatrix| traj.states.iter().map(f).collect::<Vec<_>>();
        let mut files = Vec::new();
        files.push(write_matrix_series(self.dir, &format!("{prefix}_S.csv"), Key::X(x), &pick(|s| s.s.clone()), &[])?);
        files.push(write_matrix_series(self.dir, &format!("{prefix}_Pi.csv"), Key::X(x), &pick(|s| s.pi.clone()), &[])?);
        files.push(write_matrix_series(self.dir, &format!("{prefix}_K.csv"), Key::X(x), &pick(|s| s.k.clone()), &[])?);
        files.push(write_matrix_series(self.dir, &format!("{prefix}_Q.csv"), Key::X(x), &traj.q(), &[])?);
        let j = traj.j();
        let rows: Vec<Vec<f64>> =
            traj.states.iter().map(|s| vec![s.x, s.identity_residual(j), min_hermitian_eig(&s.s)]).collect();
        files.push(write_table(self.dir, &format!("{prefix}_residuals.csv"), &["x", "identity_residual", "s_min_eig"], &rows)?);
        Ok((checks, files))
    }

    fn transform(&self, points: usize, z: &[C64], prefix: &str) -> TaskOut {
        let traj = self.trajectory(points)?;
        let sys = &self.sc.system;
        let j = traj.j();
        let tol = self.tol;
        let mut checks = Vec::new();
        let mut files = Vec::new();
        let ht = transformed_hamiltonian(&traj)?;
        let h_samples: Vec<CMatrix> = traj.grid.iter().map(|&x| ht.eval(x)).collect();
        let scale = h_samples.iter().map(norm2).fold(1.0, f64::max);
        let min_eig = h_samples.iter().map(min_hermitian_eig).fold(f64::INFINITY, f64::min);
        checks.push(Check::ge("h_tilde_min_eig", min_eig, -self.sc.tolerances.psd * scale));
        files.push(write_matrix_series(self.dir, &format!("{prefix}_Htilde.csv"), Key::X(&traj.grid), &h_samples, &[])?);
        if let (HamiltonianSpec::Factored(bt), Some(beta)) = (&ht, sys.hamiltonian().beta()) {
            files.push(write_matrix_series(self.dir, &format!("{prefix}_beta_tilde.csv"), Key::X(&traj.grid), bt.samples(), &[])?);
            let degenerate = beta.samples().iter().all(|b| frobenius(&(b * j * b.adjoint())) <= 1e-14 * (1.0 + norm2(b).powi(2)));
            if degenerate {
                let defect = bt.samples().iter().map(|b| frobenius(&(b * j * b.adjoint()))).fold(0.0, f64::max);
                checks.push(Check::le("beta_tilde_degeneracy", defect, 1e-9));
                let kb = kernel_bound(sys)?;
                if kb.is_finite() {
                    let kt = kernel_bound_of(bt, j, gbdt_core::canonical::DEGENERACY_TOL);
                    checks.push(Check::lt("beta_tilde_kernel_bound", kt.sup_bound, f64::INFINITY));
                }
            }
        }
        let mut w0_j = 0.0_f64;
        let mut w0_inv = 0.0_f64;
        for &x in &traj.grid {
            let e = transfer(&traj, x, z.first().copied().unwrap_or(C64::new(0.0, 2.0)))?;
            w0_j = w0_j.max(e.w0_j_defect / e.cond_s);
            w0_inv = w0_inv.max(e.w0_inverse_defect / e.cond_s);
        }
        checks.push(Check::le("w0_j_unitarity_per_cond", w0_j, 1e-9));
        checks.push(Check::le("w0_inverse_formula_per_cond", w0_inv, 1e-9));
        let mut ends = Vec::new();
        let mut diffs = Vec::new();
        for (k, &zk) in z.iter().enumerate() {
            let f = transformed_fundamental(&traj, zk, &traj.grid, tol)?;
            let d = direct_transformed_solution(&traj, zk, &traj.grid, tol)?;
            let diff = f.values.iter().zip(&d.values).map(|(a, b)| frobenius(&(a - b))).fold(0.0, f64::max);
            checks.push(Check::le(format!("z{}.representation_vs_direct", k + 1), diff, REPRESENTATION_BOUND));
            let mut jd = 0.0_f64;
            for &x in &traj.grid {
                let e = transfer(&traj, x, zk)?;
                jd = jd.max(e.j_defect / e.cond_s);
            }
            checks.push(Check::le(format!("z{}.wa_j_property_per_cond", k + 1), jd, 1e-9));
            if zk.im > 0.0 {
                checks.push(Check::le(format!("z{}.j_monotonicity", k + 1), j_monotonicity_defect(&f, j), 1e-8));
            }
            ends.push(f.last().clone());
            diffs.push(diff);
        }
        files.push(write_matrix_series(
            self.dir,
            &format!("{prefix}_Wtilde_end.csv"),
            Key::Z(z),
            &ends,
            &[("err_direct", diffs)],
        )?);
        Ok((checks, files))
    }

    fn model(&self) -> Result<TriangularModel, Failure> {
        Ok(TriangularModel::from_system(&self.sc.system)?)
    }

    fn charfn(&self, ns: &[usize], z: &[C64], prefix: &str) -> TaskOut {
        let model = self.model()?;
        let (a, b) = (model.a, model.b);
        let nmax = *ns.iter().max().expect("validated non-empty");
        let mut checks = Vec::new();
        let mut files = Vec::new();
        let ops: Vec<_> = ns.iter().map(|&n| discretize(&model, n)).collect::<Result<_, _>>()?;
        let op_max = discretize(&model, nmax)?;
        let mut values = Vec::new();
        let mut rel_errs = Vec::new();
        let mut table = Vec::new();
        for (k, &zk) in z.iter().enumerate() {
            let exact = char_fn_via_solution(&model, zk, self.tol)?.value;
            let errs: Vec<f64> = ops
                .iter()
                .map(|op| Ok(frobenius(&(char_fn(op, zk)?.value - &exact)) / frobenius(&exact)))
                .collect::<Result<_, gbdt_core::Error>>()?;
            for (n, e) in ns.iter().zip(&errs) {
                table.push(vec![zk.re, zk.im, *n as f64, *e]);
            }
            let w = char_fn(&op_max, zk)?.value;
            let err = frobenius(&(&w - &exact)) / frobenius(&exact);
            checks.push(Check::le(format!("z{}.relative_error_n{nmax}", k + 1), err, CHARFN_BOUND));
            let far = self.sc.system.distance_to_interval(zk) >= 0.1 * (b - a);
            if far && errs.len() > 1 {
                let worst = errs.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
                checks.push(Check::lt(format!("z{}.error_change_under_refinement", k + 1), worst, 0.0));
            }
            values.push(w);
            rel_errs.push(err);
        }
        files.push(write_matrix_series(self.dir, &format!("{prefix}.csv"), Key::Z(z), &values, &[("rel_err", rel_errs)])?);
        files.push(write_table(self.dir, &format!("{prefix}_refinement.csv"), &["re_z", "im_z", "n", "rel_err"], &table)?);
        if self.sc.params.is_some() {
            let traj = self.trajectory(MODEL_GRID_POINTS)?;
            let tm = transform_model(&model, &traj)?;
            let op_t = discretize(&tm, nmax)?;
            let mut tvals = Vec::new();
            let mut terrs = Vec::new();
            for (k, &zk) in z.iter().enumerate() {
                let wt = char_fn(&op_t, zk)?.value;
                let va = transfer(&traj, a, zk)?;
                let va_inv = va.v_inverse(&transfer(&traj, a, zk.conj())?, traj.j());
                let predicted = transfer(&traj, b, zk)?.v * char_fn(&op_max, zk)?.value * va_inv;
                let err = frobenius(&(&wt - predicted));
                checks.push(Check::le(format!("z{}.transformed_relation_n{nmax}", k + 1), err, CHARFN_BOUND));
                tvals.push(wt);
                terrs.push(err);
            }
            files.push(write_matrix_series(self.dir, &format!("{prefix}_tilde.csv"), Key::Z(z), &tvals, &[("err_relation", terrs)])?);
        }
        Ok((checks, files))
    }

    /// `I + 2 pi J H` for constant degenerate `beta` (where it is the jump).
    fn expected_jump(&self) -> Option<CMatrix> {
        let sys = &self.sc.system;
        let beta = sys.hamiltonian().beta()?;
        let first = &beta.samples()[0];
        let constant = beta.samples().iter().all(|b| b == first);
        let j = sys.j();
        let degenerate = frobenius(&(first * j * first.adjoint())) <= 1e-14 * (1.0 + norm2(first).powi(2));
        (constant && degenerate)
            .then(|| identity(sys.m()) + j * first.adjoint() * first * re(2.0 * std::f64::consts::PI))
    }

    fn rh_jump(&self, x: Option<f64>, s: &[f64], eta0: f64, levels: usize, prefix: &str) -> TaskOut {
        let sys = &self.sc.system;
        let x = x.unwrap_or(sys.interval().1);
        let opts = BoundaryOptions { tol: self.tol.min(1e-12), ..BoundaryOptions::default() };
        let expected = self.expected_jump();
        let (mut jumps, mut errs, mut extrap, mut vnorm) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut checks = Vec::new();
        let mut files = Vec::new();
        for (k, &sk) in s.iter().enumerate() {
            let r = boundary_values(sys, x, sk, eta0, levels, &opts)?;
            if r.divergent {
                return fail(format!("extrapolation diverges at s = {sk} (x = {x})"));
            }
            if let Some(e) = &expected {
                let err = frobenius(&(&r.jump - e));
                checks.push(Check::le(format!("s{}.jump_minus_R2", k + 1), err, JUMP_BOUND));
                errs.push(err);
            }
            extrap.push(r.extrapolation_error);
            vnorm.push(norm2(&r.v));
            jumps.push(r.jump);
        }
        let vmax = vnorm.iter().copied().fold(0.0, f64::max);
        match &expected {
            Some(e) => {
                let exact = norm2(&(e - identity(sys.m())));
                checks.push(Check::le("max_norm_V", vmax, 1.01 * exact));
            }
            None => checks.push(Check::lt("max_norm_V", vmax, f64::INFINITY)),
        }
        let mut extra = vec![("extrapolation_error", extrap), ("norm_V", vnorm)];
        if expected.is_some() {
            extra.insert(0, ("err_R2", errs));
        }
        files.push(write_matrix_series(self.dir, &format!("{prefix}.csv"), Key::Named("s", s), &jumps, &extra)?);
        if self.sc.params.is_some() {
            let traj = self.trajectory(MODEL_GRID_POINTS)?;
            let margin = ParamOptions::default().spectrum_margin * (sys.interval().1 - sys.interval().0);
            let mut tj = Vec::new();
            let (mut conj, mut route) = (Vec::new(), Vec::new());
            for (k, &sk) in s.iter().enumerate() {
                let r = transformed_boundary_values(&traj, x, sk, eta0, levels, &opts, margin)?;
                let budget = (r.formula.extrapolation_error + r.direct.extrapolation_error).max(REPRESENTATION_BOUND);
                checks.push(Check::le(format!("s{}.tilde_jump_conjugation", k + 1), r.jump_conjugation_defect, JUMP_BOUND));
                checks.push(Check::le(format!("s{}.tilde_routes_agree", k + 1), r.route_difference, budget));
                conj.push(r.jump_conjugation_defect);
                route.push(r.route_difference);
                tj.push(r.formula.jump);
            }
            files.push(write_matrix_series(
                self.dir,
                &format!("{prefix}_tilde.csv"),
                Key::Named("s", s),
                &tj,
                &[("err_conjugation", conj), ("route_difference", route)],
            )?);
        }
        Ok((checks, files))
    }

    fn example_n1(&self, points: usize, z: &[C64], prefix: &str) -> TaskOut {
        let sys = &self.sc.system;
        let Some(d) = &self.sc.diagonal else { return fail("example-n1 needs the diagonal gbdt shorthand") };
        if d.n() != 1 {
            return fail(format!("example-n1 needs n = 1, found n = {}", d.n()));
        }
        let (a, b) = sys.interval();
        let is_51 = a == 0.0
            && sys.xi() == 0.0
            && frobenius(&(sys.j() - Example51::j())) == 0.0
            && *sys.hamiltonian() == HamiltonianSpec::constant_beta(Example51::beta(), a, b)?;
        if !is_51 {
            return fail("example-n1 needs the rank-one constant system on [0, b] with beta = [1, i]");
        }
        let (bb, g, h) = (d.b[0], d.g[0], d.h[0]);
        let traj = self.trajectory(points)?;
        let mut rows = Vec::new();
        let mut files = Vec::new();
        let mut worst = [0.0_f64; 6];
        for (k, &zk) in z.iter().enumerate() {
            let wt = transformed_fundamental(&traj, zk, &traj.grid, self.tol)?;
            for (i, st) in traj.states.iter().enumerate() {
                let x = st.x;
                let f = n1_closed_forms(bb, g, h, x, zk)?;
                let e = transfer(&traj, x, zk)?;
                let beta_t = Example51::beta() * &e.w0;
                let wt_closed = transformed_w_explicit_n1(bb, g, h, x, zk, b)?;
                let errs = [
                    (st.s[(0, 0)] - f.s).norm(),
                    frobenius(&(&beta_t - &f.beta_tilde)),
                    frobenius(&(&e.w0 - &f.w0)),
                    frobenius(&(&e.wa - &f.wa)),
                    frobenius(&(&e.v - &f.v)),
                    frobenius(&(&wt.values[i] - &wt_closed)),
                ];
                for (w, e) in worst.iter_mut().zip(errs) {
                    *w = w.max(e);
                }
                let mut row = vec![x, zk.re, zk.im];
                row.extend(errs);
                rows.push(row);
            }
            files.push(write_matrix_series(self.dir, &format!("{prefix}_Wtilde_z{}.csv", k + 1), Key::X(&traj.grid), &wt.values, &[])?);
        }
        let names = ["err_S", "err_beta_tilde", "err_w0", "err_wa", "err_v", "err_Wtilde"];
        let checks = names.iter().zip(worst).map(|(n, w)| Check::le(format!("max_{n}"), w, CLOSED_FORM_BOUND)).collect();
        let mut header = vec!["x", "re_z", "im_z"];
        header.extend(names);
        files.push(write_table(self.dir, &format!("{prefix}_residuals.csv"), &header, &rows)?);
        Ok((checks, files))
    }

    fn probe(&self, ns: &[usize], band: f64, prefix: &str) -> TaskOut {
        let model = self.model()?;
        let mut checks = Vec::new();
        let mut rows = Vec::new();
        let mut ims = Vec::new();
        for &n in ns {
            let r = similarity_probe(&model, n, band)?;
            if let Some(dc) = r.dense_check {
                checks.push(Check::le(format!("n{n}.dense_eigenvalue_check"), dc, 1e-8));
            }
            ims.push(r.max_abs_im);
            rows.push(vec![n as f64, r.max_abs_im, r.fraction_in_band]);
        }
        let nmax_pos = (0..ns.len()).max_by_key(|&i| ns[i]).expect("non-empty");
        checks.push(Check::le(format!("n{}.max_abs_im", ns[nmax_pos]), ims[nmax_pos], band));
        let mut order: Vec<usize> = (0..ns.len()).collect();
        order.sort_by_key(|&i| ns[i]);
        if order.len() > 1 {
            let worst = order.windows(2).map(|w| ims[w[1]] - ims[w[0]]).fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::lt("max_abs_im_change_under_refinement", worst, 0.0));
        }
        let mut header = vec!["n", "max_abs_im", "fraction_in_band"];
        if self.sc.params.is_some() {
            let traj = self.trajectory(MODEL_GRID_POINTS)?;
            let unitarity = traj
                .grid
                .iter()
                .map(|&x| traj.w0_at(x).map(|w| frobenius(&(&w * w.adjoint() - identity(w.nrows())))))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            checks.push(Check::le("w0_unitarity", unitarity, 1e-8));
            let tm = transform_model_unitary(&model, &traj)?;
            for (i, &n) in ns.iter().enumerate() {
                let r = similarity_probe(&tm, n, band)?;
                rows[i].extend([r.max_abs_im, r.fraction_in_band]);
                if i == nmax_pos {
                    checks.push(Check::le(format!("n{n}.tilde_max_abs_im"), r.max_abs_im, band));
                }
            }
            header.extend(["tilde_max_abs_im", "tilde_fraction_in_band"]);
        }
        let files = vec![write_table(self.dir, &format!("{prefix}.csv"), &header, &rows)?];
        Ok((checks, files))
    }
}
