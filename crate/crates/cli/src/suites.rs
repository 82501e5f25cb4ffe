//! One runner per command. Each produces report rows in a fixed order plus
//! optional structured data; cases run in parallel where there are many.

use std::time::Instant;

use fedosov_core::fedosov::{fedosov_residual, flat_section, solve_fedosov, star_product, FedosovConnection};
use fedosov_core::hilbert::{beta_operator, bt_asymptotic_slope, level_moment, verify_identities};
use fedosov_core::quantizable::make_degree1;
use fedosov_core::symmetry::{bracket_defect, two_pi_over_i, quantum_hamiltonian, quantum_moment_map};
use fedosov_core::weyl::WeylElement;
use fedosov_core::{su2_action, ChartFunction as CF, Error, GaussRat, LieAlgebraAction};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{Command, FieldSpec, Resolved};
use crate::report::{Report, Row, Status};

/// Pass/fail tolerance on the fitted log-log slope.
pub const SLOPE_TOLERANCE: f64 = 0.15;

#[derive(Default)]
struct Outcome {
    rows: Vec<Row>,
    data: Option<Value>,
}

impl Outcome {
    fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    fn error(suite: &str, case: &str, e: &Error) -> Self {
        Outcome { rows: vec![Row::new(suite, case, Status::Error, e.to_string())], data: None }
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    (t.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, elapsed_ms(t))
}

fn cf_defect(d: &CF) -> String {
    if d.is_zero() {
        "0".into()
    } else {
        d.to_expr()
    }
}

/// `"0"`, or the lowest term and how many others there are.
fn weyl_defect(e: &WeylElement) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let lines = e.debug_lines();
    let first = lines.lines().next().unwrap_or_default().to_string();
    match e.len() {
        1 => first,
        n => format!("{first} (+{} more terms)", n - 1),
    }
}

fn exact_row(suite: &str, case: impl Into<String>, defect: String, ms: f64) -> Row {
    let mut r = Row::new(suite, case, Status::from_bool(defect == "0"), defect);
    r.runtime_ms = Some(ms);
    r
}

/// Run the configured command (or, for `report`, each listed command in turn).
pub fn run(res: &Resolved) -> Result<Report, String> {
    let mut report = Report::new(res.command.name(), res.echo.clone());
    let (conn, solve_ms) = timed(|| solve_fedosov(res.geom.clone(), res.alpha.clone(), res.order));
    match conn {
        Err(e) => {
            let mut r = Row::new("fedosov", "solve", Status::Error, e.to_string());
            r.runtime_ms = Some(solve_ms);
            report.rows.push(r);
        }
        Ok(conn) => {
            let mut data = Map::new();
            for &cmd in &res.commands {
                let out = run_command(cmd, res, &conn)?;
                report.rows.extend(out.rows);
                if let Some(d) = out.data {
                    data.insert(cmd.name().into(), d);
                }
            }
            report.data = match res.command {
                Command::Report if !data.is_empty() => Some(Value::Object(data)),
                Command::Report => None,
                _ => data.into_iter().next().map(|(_, v)| v),
            };
        }
    }
    if !res.timings {
        report.strip_timings();
    }
    Ok(report)
}

fn run_command(cmd: Command, res: &Resolved, conn: &FedosovConnection) -> Result<Outcome, String> {
    Ok(match cmd {
        Command::StarProduct => star(res, conn),
        Command::FlatnessCheck => flatness(res, conn),
        Command::ClassifyDegree1 => classify(res, conn),
        Command::QuantumHamiltonian => hamiltonian(res, conn),
        Command::MomentMap => moment(res, conn),
        Command::BtVerify => bt_verify(res, conn)?,
        Command::BtAsymptotics => asymptotics(res, conn),
        Command::Report => unreachable!("report is not nested"),
    })
}

fn star(res: &Resolved, conn: &FedosovConnection) -> Outcome {
    let (f, g) = (res.f.clone().unwrap(), res.g.clone().unwrap());
    let (fg, ms) = timed(|| star_product(conn, std::slice::from_ref(&f), std::slice::from_ref(&g)));
    let fg = match fg {
        Ok(s) => s,
        Err(e) => return Outcome::error("star-product", "expansion", &e),
    };
    let mut out = Outcome::default();
    let mut data = Map::new();
    for (i, c) in fg.coeffs.iter().enumerate() {
        data.insert(format!("order_{i}"), Value::String(c.to_expr()));
    }
    out.data = Some(Value::Object(data));
    out.push(exact_row("star-product", "C0 = f*g", cf_defect(&fg.c(0).sub(&f.mul(&g))), ms));

    let (gf, ms) = timed(|| star_product(conn, std::slice::from_ref(&g), std::slice::from_ref(&f)));
    match gf {
        Ok(gf) => {
            let i_over_2pi = GaussRat::complex((0, 1), (1, 2));
            let bracket = conn.geom.poisson(&f, &g).scale(&i_over_2pi).mul_pi(-1);
            let d = fg.c(1).sub(&gf.c(1)).sub(&bracket);
            out.push(exact_row("star-product", "C1(f,g) - C1(g,f) = (i/2pi){f,g}", cf_defect(&d), ms));
        }
        Err(e) => out.push(Row::new("star-product", "C1 antisymmetry", Status::Error, e.to_string())),
    }
    out
}

fn flatness(res: &Resolved, conn: &FedosovConnection) -> Outcome {
    let mut out = Outcome::default();
    let (resid, ms) = timed(|| fedosov_residual(conn));
    out.push(exact_row("flatness", "fedosov residual", weyl_defect(&resid), ms));
    let ok = conn.i_alpha.is_type_01_forms();
    let defect = if ok { "0" } else { "(1,0) part present" };
    out.push(Row::new("flatness", "I_alpha of type (0,1)", Status::from_bool(ok), defect));
    for (name, x) in [("f", &res.f), ("g", &res.g), ("f0", &res.f0)] {
        let Some(x) = x else { continue };
        let case = format!("flat section {name} = {}", x.to_expr());
        let (s, ms) = timed(|| flat_section(conn, std::slice::from_ref(x)));
        let mut r = match s {
            Ok(_) => Row::new("flatness", case, Status::Pass, "0"),
            Err(e) => Row::new("flatness", case, Status::Error, e.to_string()),
        };
        r.runtime_ms = Some(ms);
        out.push(r);
    }
    out
}

fn classify(res: &Resolved, conn: &FedosovConnection) -> Outcome {
    let f0 = res.f0.clone().unwrap();
    let case = f0.to_expr();
    let (q, ms) = timed(|| make_degree1(conn, &f0, &res.c, res.force));
    let (mut row, data) = match q {
        Ok(q) => {
            let killing = q.killing.condition_holds;
            let degree1 = q.is_degree1();
            let verdict = if degree1 { "degree-1" } else { "not-degree-1" };
            // The theorem predicts degree one exactly for Killing potentials.
            let row = Row::new(
                "classify",
                case,
                Status::from_bool(killing == degree1),
                format!("ybar_degree={} hbar_degree={}", q.ybar_degree, q.hbar_degree),
            );
            let data = json!({
                "killing": killing,
                "ybar_degree": q.ybar_degree,
                "hbar_degree": q.hbar_degree,
                "verdict": verdict,
            });
            (row, data)
        }
        Err(e) => {
            let not_killing = matches!(e, Error::NotKilling(_));
            let data = json!({
                "killing": if not_killing { json!(false) } else { Value::Null },
                "ybar_degree": null,
                "hbar_degree": null,
                "verdict": if not_killing { "not-Killing" } else { "error" },
            });
            (Row::new("classify", case, Status::Error, e.to_string()), data)
        }
    };
    row.runtime_ms = Some(ms);
    Outcome { rows: vec![row], data: Some(data) }
}

fn hamiltonian(res: &Resolved, conn: &FedosovConnection) -> Outcome {
    let geom = &conn.geom;
    let v = match res.field.as_ref().unwrap() {
        FieldSpec::Generator(a) => match su2_action(geom) {
            Ok(act) => act.fields[*a].clone(),
            Err(e) => return Outcome::error("quantum-hamiltonian", "field", &e),
        },
        FieldSpec::Hamiltonian(h) => geom.hamiltonian_vf(h),
    };
    let (q, ms) = timed(|| quantum_hamiltonian(conn, &v));
    let q = match q {
        Ok(q) => q,
        Err(e) => {
            let mut o = Outcome::error("quantum-hamiltonian", "construct", &e);
            o.rows[0].runtime_ms = Some(ms);
            return o;
        }
    };
    let mut out = Outcome::default();
    let mut r = Row::new("quantum-hamiltonian", "construct", Status::Pass, "0");
    r.runtime_ms = Some(ms);
    out.push(r);
    let ctx = geom.ctx;
    let tests: Vec<CF> = match &res.g {
        Some(g) => vec![g.clone()],
        None => (0..geom.n()).flat_map(|i| [CF::z(ctx, i), CF::zb(ctx, i)]).collect(),
    };
    let rows: Vec<Row> = tests
        .par_iter()
        .map(|g| {
            let case = format!("bracket with {}", g.to_expr());
            let (d, ms) = timed(|| bracket_defect(conn, &q, g));
            let mut r = match d {
                Ok(d) => exact_row("quantum-hamiltonian", case, weyl_defect(&d), ms),
                Err(e) => Row::new("quantum-hamiltonian", case, Status::Error, e.to_string()),
            };
            r.runtime_ms = Some(ms);
            r
        })
        .collect();
    out.rows.extend(rows);
    let mut mu = Map::new();
    for (h, c) in q.mu_v.iter().enumerate() {
        mu.insert(format!("hbar_{h}"), Value::String(c.to_expr()));
    }
    out.data = Some(json!({ "mu_v": mu }));
    out
}

fn su2(conn: &FedosovConnection) -> Result<LieAlgebraAction, Error> {
    su2_action(&conn.geom)
}

fn moment(res: &Resolved, conn: &FedosovConnection) -> Outcome {
    let action = match su2(conn) {
        Ok(a) => a,
        Err(e) => return Outcome::error("moment-map", "action", &e),
    };
    let (m, ms) = timed(|| quantum_moment_map(conn, &action));
    let m = match m {
        Ok(m) => m,
        Err(e) => return Outcome::error("moment-map", "construct", &e),
    };
    let mut out = Outcome::default();
    for ((a, b), d) in &m.defects {
        let defect = d
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_zero())
            .map(|(h, c)| format!("hbar^{h}: {}", c.to_expr()))
            .unwrap_or_else(|| "0".into());
        out.push(exact_row("homomorphism", format!("{}/{}", action.labels[*a], action.labels[*b]), defect, ms));
    }
    let geom = &conn.geom;
    let two_pi_over_i = two_pi_over_i();
    let mut levels = Vec::new();
    for &k in &res.levels {
        let mut entry = Map::new();
        entry.insert("k".into(), json!(k));
        for a in 0..action.dim() {
            let (lm, ms) = timed(|| level_moment(geom, &action.moment[a], k));
            // Same function assembled from μ_ħ at ħ = 1/k; must be π-free to be prequantizable.
            let from_hbar = m.mu_k(a, k as u64).scale_int(k as i64).mul_scalar(&two_pi_over_i);
            let pi_free = lm.numerator().terms().all(|(mono, _)| mono.pi == 0);
            let defect = if !pi_free {
                format!("not pi-free: {}", lm.to_expr())
            } else {
                cf_defect(&lm.sub(&from_hbar))
            };
            out.push(exact_row("level-moment", format!("{} k={k}", action.labels[a]), defect, ms));
            entry.insert(action.labels[a].clone(), Value::String(lm.to_expr()));
        }
        levels.push(Value::Object(entry));
    }
    let mut mu_hbar = Map::new();
    for (a, series) in m.mu_hbar.iter().enumerate() {
        mu_hbar.insert(action.labels[a].clone(), json!(series.iter().map(|c| c.to_expr()).collect::<Vec<_>>()));
    }
    out.data = Some(json!({ "mu_hbar": mu_hbar, "levels": levels }));
    out
}

fn bt_verify(res: &Resolved, conn: &FedosovConnection) -> Result<Outcome, String> {
    let action = match su2(conn) {
        Ok(a) => a,
        Err(e) => return Ok(Outcome::error("bt-verify", "action", &e)),
    };
    let mut out = Outcome::default();
    let mut exported = Vec::new();
    for &suite in &res.suites {
        // One batch per level, levels in parallel, merged back in level order.
        let batches: Vec<(Result<Vec<_>, Error>, f64)> = res
            .levels
            .par_iter()
            .map(|&k| timed(|| verify_identities(conn, &action, suite, &[k])))
            .collect();
        for (batch, ms) in batches {
            match batch {
                Err(e) => out.push(Row::new(suite.name(), "all", Status::Error, e.to_string())),
                Ok(rows) => {
                    for r in rows {
                        let status = match &r.defect {
                            Err(_) => Status::Error,
                            Ok(m) => Status::from_bool(m.is_zero()),
                        };
                        let case = format!("{} k={}", r.case, r.k);
                        if let Ok(m) = &r.defect {
                            exported.push(json!({
                                "suite": suite.name(), "case": r.case, "k": r.k, "defect": m.entry_strings(),
                            }));
                        }
                        let mut row = Row::new(suite.name(), case, status, r.defect_string());
                        row.runtime_ms = Some(ms);
                        out.push(row);
                    }
                }
            }
        }
    }
    if let Some(path) = &res.echo.export_matrices {
        let mut beta = Vec::new();
        for &k in &res.levels {
            for a in 0..action.dim() {
                let xi: Vec<GaussRat> =
                    (0..action.dim()).map(|d| if d == a { GaussRat::one() } else { GaussRat::zero() }).collect();
                let entry = match beta_operator(&conn.geom, &action, &xi, k) {
                    Ok(m) => json!({ "generator": action.labels[a], "k": k, "matrix": m.entry_strings() }),
                    Err(e) => json!({ "generator": action.labels[a], "k": k, "error": e.to_string() }),
                };
                beta.push(entry);
            }
        }
        let doc = json!({ "beta": beta, "defects": exported });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
        std::fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(out)
}

fn asymptotics(res: &Resolved, conn: &FedosovConnection) -> Outcome {
    let (f, g) = (res.f.clone().unwrap(), res.g.clone().unwrap());
    let order = res.asymptotic_order;
    let (a, ms) = timed(|| bt_asymptotic_slope(conn, &f, &g, &res.levels, order));
    let a = match a {
        Ok(a) => a,
        Err(e) => return Outcome::error("asymptotics", "fit", &e),
    };
    let mut out = Outcome::default();
    for (k, e) in a.levels.iter().zip(&a.errors) {
        out.push(Row::new("asymptotics", format!("k={k}"), Status::Pass, format!("{e:.6e}")));
    }
    let target = -(order as f64 + 1.0);
    let mut row = match a.slope {
        Some(s) => Row::new(
            "asymptotics",
            "slope",
            Status::from_bool((s - target).abs() <= SLOPE_TOLERANCE),
            format!("{s:.4} (target {target}, tolerance {SLOPE_TOLERANCE})"),
        ),
        None => Row::new("asymptotics", "slope", Status::Pass, "errors vanish exactly"),
    };
    row.runtime_ms = Some(ms);
    out.push(row);
    out.data = Some(json!({
        "levels": a.levels,
        "errors": a.errors,
        "slope": a.slope,
        "target": target,
        "tolerance": SLOPE_TOLERANCE,
    }));
    out
}
