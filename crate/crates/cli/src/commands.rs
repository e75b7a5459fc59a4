use crate::config::{Family, RunConfig};
use crate::output::{csv_row, emit, num, print_stdout, to_json, write_file};
use crate::CliError;
use qesmms_core::conformal::{duality_map, four_equivalences_check, ScaleTuple};
use qesmms_core::families::{
    ber_flat_background_check, bohm_bryant_solve, bryant_asymptotics_check, cigar_solve, lpp_solve, BohmOptions, LppOptions, LppSolution,
};
use qesmms_core::qe::mu_limit_table;
use qesmms_core::smms::pole_limit;
use qesmms_core::variational::{energy, weighted_volume};
use qesmms_core::{qe_verify, Density, Descriptor, DimParam, Geometry, QEReport, QeOptions, RadialSmms, Trajectory};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::path::Path;

/// Names of the checks that failed; empty on success.
pub type Failures = Vec<String>;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_descriptor(path: &Path) -> Result<RadialSmms, CliError> {
    let d: Descriptor = serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(RadialSmms::from_descriptor(d)?)
}

fn mu_tolerance_ok(rep: &QEReport) -> bool {
    let scale = 1.0 + rep.mu_fit.or(rep.mu_prime_fit).map_or(0.0, f64::abs);
    rep.mu_variation <= rep.tol * scale
}

pub fn verify(c: &RunConfig) -> Result<Failures, CliError> {
    let s = load_descriptor(c.input()?)?;
    let tol = c.tol_or(1e-9)?;
    let grid = s.sample_grid(c.grid_or(100)?);
    let rep = qe_verify(&s, &grid, QeOptions::tol(tol))?;
    let mut bianchi: f64 = 0.0;
    for &r in &grid {
        bianchi = bianchi.max(s.bianchi_residual(r)?.abs());
    }
    let mut failed = Vec::new();
    if !rep.is_quasi_einstein() {
        failed.push("residual".to_string());
    }
    if !mu_tolerance_ok(&rep) {
        failed.push("characteristic_constant".to_string());
    }
    failed.extend(rep.inequality_checks.iter().filter(|k| !k.holds).map(|k| k.name.clone()));
    if !(bianchi <= tol.max(1e-9)) {
        failed.push("bianchi".to_string());
    }
    let out = json!({ "report": rep, "bianchi_residual": num(bianchi), "failed_checks": failed });
    emit(c.out.as_deref(), "qe_report.json", &to_json(&out))?;
    Ok(failed)
}

pub fn energy_cmd(c: &RunConfig) -> Result<Failures, CliError> {
    let s = load_descriptor(c.input()?)?;
    let mu = c.mu.unwrap_or(0.0);
    if !mu.is_finite() {
        return Err(CliError::Input("--mu must be finite".into()));
    }
    let w = energy(&s, mu)?;
    let vol = weighted_volume(&s)?;
    if !(w.integrable && vol.integrable) {
        return Err(CliError::NonConvergence(format!("quadrature missed its tolerance (error estimates {} and {})", w.error, vol.error)));
    }
    let out = json!({ "W": num(w.value), "Vol": num(vol.value), "error_est": num(w.error.max(vol.error)), "m": s.m(), "mu": num(mu) });
    emit(c.out.as_deref(), "energy.json", &to_json(&out))?;
    Ok(Vec::new())
}

fn trajectory_json(family: Family, traj: &Trajectory, extra: Map<String, Value>) -> Value {
    let mut obj = Map::new();
    obj.insert("family".into(), json!(family.name()));
    obj.insert("n".into(), json!(traj.n));
    obj.insert("m".into(), json!(traj.m));
    obj.insert("tol".into(), num(traj.tol));
    obj.insert("status".into(), json!(traj.status));
    obj.insert("rows".into(), json!(traj.len()));
    obj.insert("columns".into(), json!(traj.header()));
    obj.insert("max_integrability_residual".into(), num(traj.max_integrability_residual()));
    let diag: Map<String, Value> = traj.summary.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    obj.insert("diagnostics".into(), Value::Object(diag));
    obj.extend(extra);
    Value::Object(obj)
}

/// Writes `trajectory.csv` and `summary.json` to `--out`, or prints the summary.
fn emit_trajectory(c: &RunConfig, traj: &Trajectory, summary: &Value) -> Result<(), CliError> {
    if let Some(dir) = c.out.as_deref() {
        write_file(dir, "trajectory.csv", &traj.to_csv())?;
    }
    emit(c.out.as_deref(), "summary.json", &to_json(summary))
}

fn checks_json(checks: &[(&str, bool)]) -> (Value, Failures) {
    let map: Map<String, Value> = checks.iter().map(|(k, ok)| (k.to_string(), json!(ok))).collect();
    let failed = checks.iter().filter(|(_, ok)| !ok).map(|(k, _)| k.to_string()).collect();
    (Value::Object(map), failed)
}

fn constants_json(rep: &QEReport, family_mu: f64, m: DimParam) -> Map<String, Value> {
    let mut out = Map::new();
    out.insert("lambda".into(), num(rep.lambda_fit));
    if m.is_infinite() {
        out.insert("mu_prime".into(), num(rep.mu_prime_fit.unwrap_or(f64::NAN)));
    } else {
        out.insert("mu".into(), num(rep.mu_fit.unwrap_or(f64::NAN)));
    }
    out.insert("normalized_constant".into(), num(family_mu));
    out.insert("max_residual".into(), num(rep.max_residual));
    out
}

fn require_m(c: &RunConfig) -> Result<DimParam, CliError> {
    c.m.ok_or_else(|| CliError::Input("--m is required".into()))
}

const CHECK_TOL: f64 = 1e-7;

pub fn solve_cigar(c: &RunConfig) -> Result<Failures, CliError> {
    let m = require_m(c)?;
    let traj = cigar_solve(m, c.t_max_or(8.0)?, c.tol_or(1e-11)?)?;
    let s = traj.smms.as_ref().expect("cigar solutions carry their SMMS");
    let grid = s.sample_grid(c.grid_or(200)?);
    let rep = qe_verify(s, &grid, QeOptions { estimates: false, ..QeOptions::tol(CHECK_TOL) })?;
    let ber = ber_flat_background_check(s, Some(traj.mu), &grid, 1e-9)?;
    let (checks, failed) = checks_json(&[
        ("quasi_einstein", rep.is_quasi_einstein() && rep.lambda_fit.abs() <= CHECK_TOL),
        ("characteristic_constant", mu_tolerance_ok(&rep)),
        ("ber_flat_background", ber.max_residual <= CHECK_TOL && ber.sign_consistent),
        ("integrability", traj.max_integrability_residual() <= CHECK_TOL),
    ]);
    let mut extra = constants_json(&rep, traj.mu, m);
    extra.insert("t_max".into(), num(*traj.r.last().unwrap_or(&f64::NAN)));
    extra.insert("ber_flat_residual".into(), num(ber.max_residual));
    extra.insert("checks".into(), checks);
    emit_trajectory(c, &traj, &trajectory_json(Family::Cigar, &traj, extra))?;
    Ok(failed)
}

fn bohm_options(c: &RunConfig, m: DimParam) -> Result<BohmOptions, CliError> {
    let d = BohmOptions::for_m(m);
    Ok(BohmOptions { tol: c.tol_or(d.tol)?, t_span: c.t_max_or(d.t_span)?, ..d })
}

pub fn solve_bryant(c: &RunConfig) -> Result<Failures, CliError> {
    let m = c.m.unwrap_or(DimParam::PosInfinity);
    let n = c.n.unwrap_or(3);
    let traj = bohm_bryant_solve(n, m, bohm_options(c, m)?)?;
    let mut checks = vec![
        ("lyapunov_monotone", traj.kappa_violations().is_empty()),
        ("sphere_constraint", traj.max_sphere_defect() <= 1e-8),
    ];
    let mut extra = Map::new();
    extra.insert("normalized_constant".into(), num(traj.mu));
    extra.insert("kappa_violations".into(), json!(traj.kappa_violations().len()));
    extra.insert("max_sphere_defect".into(), num(traj.max_sphere_defect()));
    if m.is_infinite() {
        let asy = bryant_asymptotics_check(&traj)?;
        checks.push(("tail_exponent", (0.95..=1.05).contains(&asy.fit.exponent)));
        extra.insert("tail_exponent".into(), num(asy.fit.exponent));
        extra.insert("tail_coefficient".into(), num(asy.fit.coefficient));
        extra.insert("x_over_y2".into(), num(asy.x_over_y2));
        extra.insert("x_over_y2_limit".into(), num(asy.x_over_y2_limit));
    } else {
        let s = traj.smms.as_ref().expect("finite-m solutions carry their SMMS");
        let rep = qe_verify(s, &s.sample_grid(c.grid_or(100)?), QeOptions { estimates: false, ..QeOptions::tol(1e-6) })?;
        checks.push(("quasi_einstein", rep.is_quasi_einstein() && rep.lambda_fit.abs() <= 1e-6));
        checks.push(("characteristic_constant", rep.mu_fit.is_some_and(|u| (u - traj.mu).abs() <= 1e-6)));
        extra.extend(constants_json(&rep, traj.mu, m));
    }
    let (cj, failed) = checks_json(&checks);
    extra.insert("checks".into(), cj);
    emit_trajectory(c, &traj, &trajectory_json(Family::Bryant, &traj, extra))?;
    Ok(failed)
}

fn lpp_options(c: &RunConfig) -> Result<LppOptions, CliError> {
    let d = LppOptions::default();
    Ok(LppOptions { tol: c.tol_or(d.tol)?, seed: c.seed.unwrap_or(d.seed), ..d })
}

fn lpp_run(c: &RunConfig, m: DimParam) -> Result<LppSolution, CliError> {
    Ok(lpp_solve(c.n.unwrap_or(4), m, c.s.unwrap_or(1), c.q.unwrap_or(2), &lpp_options(c)?)?)
}

pub fn solve_lpp(c: &RunConfig) -> Result<Failures, CliError> {
    let m = require_m(c)?;
    let sol = lpp_run(c, m)?;
    let rep = qe_verify(&sol.smms, &sol.smms.grid(c.grid_or(120)?), QeOptions::tol(1e-6))?;
    let closure = sol.closure_defect()?;
    let traj = &sol.trajectory;
    let mut checks = vec![
        ("closure", closure <= 1e-6),
        ("integrability", traj.max_integrability_residual() <= 10.0 * traj.tol),
        ("quasi_einstein", rep.is_quasi_einstein()),
        ("positive_lambda", sol.lambda > 0.0),
    ];
    if let Some(k) = rep.check("scalar_lower_bound") {
        checks.push(("scalar_lower_bound", k.holds));
    }
    let (cj, failed) = checks_json(&checks);
    let mut extra = constants_json(&rep, sol.mu, m);
    extra.insert("s".into(), json!(sol.smms.s()));
    extra.insert("q".into(), json!(sol.smms.q()));
    extra.insert("l".into(), num(sol.l()));
    extra.insert("closure_defect".into(), num(closure));
    extra.insert("distinct_solutions".into(), json!(sol.distinct_solutions));
    extra.insert("checks".into(), cj);
    emit_trajectory(c, traj, &trajectory_json(Family::Lpp, traj, extra))?;
    Ok(failed)
}

/// One row of an m-sweep.
struct SweepRow {
    m: DimParam,
    lambda: f64,
    mu: f64,
    mu_prime: f64,
    max_residual: f64,
    integrability: f64,
    status: String,
}

const SWEEP_HEADER: &str = "m,lambda,mu,mu_prime,max_residual,max_integrability_residual,status";

fn sweep_row(c: &RunConfig, family: Family, m: DimParam) -> Result<SweepRow, CliError> {
    let opts = QeOptions { estimates: false, ..QeOptions::tol(1e-6) };
    let (rep, traj) = match family {
        Family::Cigar => {
            let traj = cigar_solve(m, c.t_max_or(8.0)?, c.tol_or(1e-11)?)?;
            let s = traj.smms.as_ref().expect("cigar solutions carry their SMMS");
            (qe_verify(s, &s.sample_grid(c.grid_or(200)?), opts)?, traj)
        }
        Family::Bryant => {
            let traj = bohm_bryant_solve(c.n.unwrap_or(3), m, bohm_options(c, m)?)?;
            let s = traj.smms.as_ref().expect("Böhm solutions carry their SMMS");
            (qe_verify(s, &s.sample_grid(c.grid_or(100)?), opts)?, traj)
        }
        Family::Lpp => {
            let sol = lpp_run(c, m)?;
            (qe_verify(&sol.smms, &sol.smms.grid(c.grid_or(120)?), opts)?, sol.trajectory)
        }
    };
    let (mu, mu_prime) = if m.is_infinite() { (f64::NAN, rep.mu_prime_fit.unwrap_or(f64::NAN)) } else { (rep.mu_fit.unwrap_or(f64::NAN), f64::NAN) };
    Ok(SweepRow {
        m,
        lambda: rep.lambda_fit,
        mu,
        mu_prime,
        max_residual: rep.max_residual,
        integrability: traj.max_integrability_residual(),
        status: serde_json::to_value(traj.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
    })
}

pub fn sweep_m(c: &RunConfig) -> Result<Failures, CliError> {
    let family = c.family()?;
    let ms = c.sweep_list()?;
    let rows: Vec<SweepRow> = ms.par_iter().map(|&m| sweep_row(c, family, m)).collect::<Result<_, _>>()?;
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.m.token());
        csv.push(',');
        csv.push_str(&csv_row([r.lambda, r.mu, r.mu_prime, r.max_residual, r.integrability]));
        csv.push(',');
        csv.push_str(&r.status);
        csv.push('\n');
    }
    let n = match family {
        Family::Cigar => 2,
        Family::Bryant => c.n.unwrap_or(3),
        Family::Lpp => c.n.unwrap_or(4),
    };
    let limit = match rows.iter().find(|r| r.m == DimParam::PosInfinity) {
        Some(inf) => {
            let finite: Vec<(f64, f64, f64)> = rows.iter().filter_map(|r| r.m.finite().map(|m| (m, r.lambda, r.mu))).collect();
            if finite.is_empty() {
                Value::Null
            } else {
                serde_json::to_value(mu_limit_table(n, &finite, (inf.lambda, inf.mu_prime))?).unwrap_or(Value::Null)
            }
        }
        None => Value::Null,
    };
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "m": r.m, "lambda": num(r.lambda), "mu": num(r.mu), "mu_prime": num(r.mu_prime),
                "max_residual": num(r.max_residual), "max_integrability_residual": num(r.integrability), "status": r.status,
            })
        })
        .collect();
    let doc = json!({ "family": family.name(), "n": n, "columns": SWEEP_HEADER.split(',').collect::<Vec<_>>(), "rows": json_rows, "mu_limit": limit });
    match c.out.as_deref() {
        Some(dir) => {
            write_file(dir, "sweep.csv", &csv)?;
            write_file(dir, "sweep.json", &to_json(&doc))?;
        }
        None => match c.format.as_deref().unwrap_or("csv") {
            "csv" => print_stdout(&csv)?,
            "json" => print_stdout(&to_json(&doc))?,
            f => return Err(CliError::Input(format!("unknown format {f:?}; use csv or json"))),
        },
    }
    Ok(Vec::new())
}

pub fn duality(c: &RunConfig) -> Result<Failures, CliError> {
    let path = c.input()?;
    let t: ScaleTuple = serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let d = duality_map(&t);
    let dd = duality_map(&d.tuple).tuple;
    let [lo, hi] = t.domain.unwrap_or([0.0, 1.0]);
    if !(lo < hi && hi.is_finite() && lo.is_finite()) {
        return Err(CliError::Input("the scale tuple needs a bounded domain".into()));
    }
    let k = c.grid_or(25)?;
    let grid: Vec<f64> = (1..=k).map(|i| lo + (hi - lo) * i as f64 / (k + 1) as f64).collect();
    let mut involution = dd.lambda == t.lambda && dd.mu == t.mu && dd.n == t.n && (dd.m.as_f64() - t.m.as_f64()).abs() <= 1e-12 * (1.0 + t.m.as_f64().abs());
    for &r in &grid {
        involution &= dd.u.value(r)? == t.u.value(r)? && dd.v.value(r)? == t.v.value(r)?;
    }
    let mut doc = Map::new();
    doc.insert("dual".into(), serde_json::to_value(&d.tuple).map_err(|e| CliError::Input(e.to_string()))?);
    doc.insert("self_dual_limit".into(), json!(d.self_dual_limit));
    doc.insert("involution".into(), json!(involution));
    let mut checks = vec![("involution", involution)];
    if !d.self_dual_limit {
        let mut inv: f64 = 0.0;
        for &r in &grid {
            let (a, b) = (t.residuals(r)?, d.tuple.residuals(r)?);
            let scale = 1.0 + a.max_abs();
            inv = inv.max(((a.tracefree - b.tracefree).abs().max((a.lambda - b.mu).abs()).max((a.mu - b.lambda).abs())) / scale);
        }
        let eq = four_equivalences_check(&t, &grid, c.tol_or(1e-8)?)?;
        checks.push(("residual_invariance", inv <= 1e-12));
        checks.push(("four_equivalences", eq.consistent()));
        doc.insert("invariance_residual".into(), num(inv));
        doc.insert("four_equivalences".into(), serde_json::to_value(&eq).map_err(|e| CliError::Input(e.to_string()))?);
    }
    let (cj, failed) = checks_json(&checks);
    doc.insert("checks".into(), cj);
    emit(c.out.as_deref(), "duality.json", &to_json(&Value::Object(doc)))?;
    Ok(failed)
}

const POLE_STEP: f64 = 1e-3;
const RADIAL_HEADER: &str = "r,psi,v,phi,ric_rr,ric_tan,scalar,scalar_w,lap_phi,kappa";
const LPP_HEADER: &str = "t,f,h,v,phi,ric_t,ric_fiber,ric_base,scalar,scalar_w";

fn radial_row(s: &RadialSmms, r: f64, kappa: f64) -> Result<String, CliError> {
    let psi = match s.psi() {
        Some(p) => p.value(r)?,
        None => f64::NAN,
    };
    let (v, phi) = match (s.density(), s.m()) {
        (Density::V(v), DimParam::Finite(m)) if m != 0.0 => {
            let x = v.value(r)?;
            (x, 0.0 - m * x.ln())
        }
        (Density::V(v), _) => (v.value(r)?, 0.0),
        (Density::Phi(p), _) => (f64::NAN, p.value(r)?),
    };
    let at = |f: &dyn Fn(f64) -> qesmms_core::Result<f64>| at_pole(s, r, f);
    Ok(csv_row([
        r,
        psi,
        v,
        phi,
        at(&|x| Ok(s.bakry_emery_ricci(x)?.0)),
        at(&|x| Ok(s.bakry_emery_ricci(x)?.1)),
        at(&|x| s.scalar(x)),
        at(&|x| s.weighted_scalar(x)),
        at(&|x| s.lap_phi(x)),
        kappa,
    ]))
}

/// `f(r)`, replaced by the one-sided limit at a smooth pole; NaN where the
/// quantity is undefined.
fn at_pole(s: &RadialSmms, r: f64, f: &dyn Fn(f64) -> qesmms_core::Result<f64>) -> f64 {
    let (lo, hi) = s.domain();
    let poles = s.poles();
    let limit = if poles.left && r == lo {
        pole_limit(f, lo, 1.0, POLE_STEP)
    } else if poles.right && r == hi {
        pole_limit(f, hi, -1.0, POLE_STEP)
    } else {
        f(r)
    };
    limit.unwrap_or(f64::NAN)
}

fn radial_csv(s: &RadialSmms, rows: impl IntoIterator<Item = (f64, f64)>) -> Result<String, CliError> {
    let mut out = String::from(RADIAL_HEADER);
    out.push('\n');
    for (r, kappa) in rows {
        out.push_str(&radial_row(s, r, kappa)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn export(c: &RunConfig) -> Result<Failures, CliError> {
    let csv = if c.input.is_some() {
        let s = load_descriptor(c.input()?)?;
        let grid = s.sample_grid(c.grid_or(200)?);
        radial_csv(&s, grid.into_iter().map(|r| (r, f64::NAN)))?
    } else {
        match c.family()? {
            Family::Cigar => {
                let traj = cigar_solve(require_m(c)?, c.t_max_or(8.0)?, c.tol_or(1e-11)?)?;
                let s = traj.smms.as_ref().expect("cigar solutions carry their SMMS");
                radial_csv(s, traj.r.iter().copied().zip(traj.kappa.iter().copied()))?
            }
            Family::Bryant => {
                let m = c.m.unwrap_or(DimParam::PosInfinity);
                let traj = bohm_bryant_solve(c.n.unwrap_or(3), m, bohm_options(c, m)?)?;
                let s = traj.smms.as_ref().expect("Böhm solutions carry their SMMS");
                let hi = s.domain().1;
                let rows: Vec<(f64, f64)> = traj.r.iter().copied().zip(traj.kappa.iter().copied()).filter(|&(r, _)| r <= hi).collect();
                radial_csv(s, rows)?
            }
            Family::Lpp => {
                let sol = lpp_run(c, require_m(c)?)?;
                let g = &sol.smms;
                let mut out = String::from(LPP_HEADER);
                out.push('\n');
                for t in g.grid(c.grid_or(200)?) {
                    let p = g.point(t)?;
                    let (v, phi) = match (g.density(), g.m()) {
                        (Density::V(v), DimParam::Finite(m)) => {
                            let x = v.value(t)?;
                            (x, 0.0 - m * x.ln())
                        }
                        (Density::Phi(f), _) => (f64::NAN, f.value(t)?),
                        (Density::V(v), _) => (v.value(t)?, 0.0),
                    };
                    let b = |i: usize| p.blocks.get(i).map_or(f64::NAN, |b| b.ric_w);
                    out.push_str(&csv_row([t, g.f().value(t)?, g.h().value(t)?, v, phi, b(0), b(1), b(2), p.scalar, p.scalar_w]));
                    out.push('\n');
                }
                out
            }
        }
    };
    emit(c.out.as_deref(), "curves.csv", &csv)?;
    Ok(Vec::new())
}
