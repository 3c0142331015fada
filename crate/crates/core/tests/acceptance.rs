//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use argyris_qg::analysis::{run_study, ErrorRecord, ErrorTable};
use argyris_qg::argyris::{interpolate, reference_basis, ArgyrisTransform, FemField, Space};
use argyris_qg::assembly::{apply_constraints, Assembler, BoundaryMode, FreeIndex, SparseMatrix};
use argyris_qg::problems::{Model, ModelKind, ProblemSpec};
use argyris_qg::quadrature::{integrate, triangle_rule};
use argyris_qg::solver::NewtonOptions;
use common::*;
use rand::Rng;

const H_STUDY: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];
const H_FINE: [f64; 5] = [0.5, 0.25, 0.125, 0.0625, 0.03125];

type Check = fn() -> Result<Outcome, String>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn within_factor(value: f64, target: f64, factor: f64) -> bool {
    value <= target * factor && value >= target / factor
}

fn study(
    kind: ModelKind,
    solution: &str,
    eps_s: Option<f64>,
    hs: &[f64],
) -> Result<ErrorTable, String> {
    let mut model = Model::with_defaults(kind);
    if let (Model::Stommel { eps_s: e }, Some(v)) = (&mut model, eps_s) {
        *e = v;
    }
    let problem = ProblemSpec::new(model, solution).map_err(|e| e.to_string())?;
    let table = run_study(&problem, hs).map_err(|e| e.to_string())?;
    if !table.all_solved() {
        return Err(format!("{solution}: a mesh failed to solve"));
    }
    Ok(table)
}

fn record(table: &ErrorTable, h: f64) -> Result<&ErrorRecord, String> {
    table
        .record_at(h)
        .ok_or_else(|| format!("no record at h = {h}"))
}

fn final_rates(table: &ErrorTable) -> Result<[f64; 3], String> {
    let r = table
        .last()
        .and_then(|r| r.rates)
        .ok_or("missing final rates")?;
    match r {
        [Some(a), Some(b), Some(c)] => Ok([a, b, c]),
        _ => Err("undefined final rate".into()),
    }
}

fn rates_match(table: &ErrorTable, target: [f64; 3], tol: f64) -> Result<(bool, [f64; 3]), String> {
    let r = final_rates(table)?;
    Ok(((0..3).all(|k| within(r[k], target[k], tol)), r))
}

fn timed(limit: Duration, f: impl FnOnce() -> Result<Outcome, String>) -> Outcome {
    let start = Instant::now();
    let mut o = f().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
    let elapsed = start.elapsed();
    if elapsed > limit {
        o.pass = false;
    }
    o.detail = format!(
        "{} [{:.2} s, limit {} s]",
        o.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    o
}

fn criterion_1() -> Result<Outcome, String> {
    let cases = [
        (1.0, 1.0, 0.5, 70),
        (1.0, 1.0, 1.0 / 32.0, 9670),
        (3.0, 1.0, 0.5, 170),
        (3.0, 1.0, 1.0 / 32.0, 28550),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (lx, ly, h, expected) in cases {
        let n = space(lx, ly, h, BoundaryMode::Clamped).n_dofs();
        pass &= n == expected && dof_count_oracle(lx, ly, h) == expected;
        parts.push(format!("{n}/{expected}"));
    }
    Ok(outcome(pass, format!("dofs {}", parts.join(" "))))
}

fn criterion_2() -> Result<Outcome, String> {
    let t = study(ModelKind::Biharmonic, "biharmonic-square", None, &H_STUDY)?;
    let (rates_ok, r) = rates_match(&t, [6.434, 5.294, 4.192], 0.3)?;
    let e2 = record(&t, 0.0625)?.errors.e2;
    let pass = rates_ok && within_factor(e2, 2.473e-6, 3.0);
    Ok(outcome(
        pass,
        format!(
            "rates {:.3} {:.3} {:.3}, e2(1/16) = {e2:.4e}",
            r[0], r[1], r[2]
        ),
    ))
}

fn criterion_3() -> Result<Outcome, String> {
    let t = study(ModelKind::Stommel, "stommel-vallis", Some(1.0), &H_FINE)?;
    let (rates_ok, r) = rates_match(&t, [6.035, 5.023, 4.018], 0.25)?;
    let e0 = record(&t, 0.0625)?.errors.e0;
    let pass = rates_ok && within_factor(e0, 7.079e-11, 5.0);
    Ok(outcome(
        pass,
        format!(
            "rates {:.3} {:.3} {:.3}, e0(1/16) = {e0:.4e}",
            r[0], r[1], r[2]
        ),
    ))
}

fn criterion_4() -> Result<Outcome, String> {
    let t = study(ModelKind::StommelMunk, "cascon-sin", None, &H_FINE)?;
    let (rates_ok, r) = rates_match(&t, [6.091, 5.056, 4.024], 0.25)?;
    let e0 = record(&t, 0.125)?.errors.e0;
    let pass = rates_ok && within_factor(e0, 3.437e-7, 3.0);
    Ok(outcome(
        pass,
        format!(
            "rates {:.3} {:.3} {:.3}, e0(1/8) = {e0:.4e}",
            r[0], r[1], r[2]
        ),
    ))
}

fn criterion_5() -> Result<Outcome, String> {
    let t = study(ModelKind::Qge, "cascon-sin", None, &H_FINE)?;
    let mut newton_ok = true;
    let mut its = Vec::new();
    for &h in &H_FINE {
        let report = record(&t, h)?
            .newton
            .as_ref()
            .ok_or("missing Newton report")?;
        let res = report.final_residual().unwrap_or(f64::INFINITY);
        newton_ok &= report.converged && report.iterations() <= 10 && res <= 1e-8;
        its.push(format!("{}:{res:.1e}", report.iterations()));
    }
    let (rates_ok, r) = rates_match(&t, [6.108, 5.061, 4.024], 0.25)?;
    let e0 = record(&t, 0.125)?.errors.e0;
    let pass = newton_ok && rates_ok && within_factor(e0, 3.597e-7, 3.0);
    Ok(outcome(
        pass,
        format!(
            "newton (its:residual) {}, rates {:.3} {:.3} {:.3}, e0(1/8) = {e0:.4e}",
            its.join(" "),
            r[0],
            r[1],
            r[2]
        ),
    ))
}

fn criterion_6() -> Result<Outcome, String> {
    let cases = [
        ("1a", ModelKind::Stommel, "stommel-vallis"),
        ("2", ModelKind::Stommel, "stommel-myers"),
        ("4", ModelKind::StommelMunk, "cascon-exp"),
        ("6", ModelKind::Qge, "cascon-exp"),
    ];
    let floor = [5.4, 4.4, 3.4];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, kind, id) in cases {
        let t = study(kind, id, None, &H_FINE)?;
        let seqs: Vec<Vec<f64>> = (0..3)
            .map(|k| {
                t.rows
                    .iter()
                    .filter_map(|r| r.record().and_then(|r| r.rates).and_then(|r| r[k]))
                    .collect()
            })
            .collect();
        let increasing = seqs
            .iter()
            .all(|s| s.len() == H_FINE.len() - 1 && s.windows(2).all(|w| w[1] > w[0]));
        let fin = final_rates(&t)?;
        let above = (0..3).all(|k| fin[k] >= floor[k]);
        pass &= increasing && above;
        parts.push(format!("{name}: {:.2} {:.2} {:.2}", fin[0], fin[1], fin[2]));
    }
    Ok(outcome(pass, format!("finest rates {}", parts.join("; "))))
}

/// Functional `k` of the physical element applied to basis derivatives at
/// the matching node.
fn delta_defect(tr: &ArgyrisTransform, coords: [[f64; 2]; 3]) -> Result<f64, String> {
    let reference = reference_basis();
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        let b = tr
            .eval_basis(reference, coords[a])
            .map_err(|e| e.to_string())?;
        for c in 0..6 {
            for (i, d) in b.iter().enumerate() {
                let expected = if i == 6 * a + c { 1.0 } else { 0.0 };
                worst = worst.max((d[c] - expected).abs());
            }
        }
    }
    for k in 0..3 {
        let n = tr.normals()[k];
        let m = [
            0.5 * (coords[k][0] + coords[(k + 1) % 3][0]),
            0.5 * (coords[k][1] + coords[(k + 1) % 3][1]),
        ];
        let b = tr.eval_basis(reference, m).map_err(|e| e.to_string())?;
        for (i, d) in b.iter().enumerate() {
            let expected = if i == 18 + k { 1.0 } else { 0.0 };
            worst = worst.max((n[0] * d[1] + n[1] * d[2] - expected).abs());
        }
    }
    Ok(worst)
}

fn element_delta() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for (lx, ly, h) in [(1.0, 1.0, 0.25), (3.0, 1.0, 0.5)] {
        let s = space(lx, ly, h, BoundaryMode::Free);
        for t in 0..s.mesh().n_triangles() {
            worst = worst.max(delta_defect(s.transform(t), s.mesh().triangle_coords(t))?);
        }
    }
    // a general triangle with arbitrarily signed unit edge normals
    let coords: [[f64; 2]; 3] = [[0.1, 0.2], [0.9, 0.35], [0.3, 1.1]];
    let normals: [[f64; 2]; 3] = std::array::from_fn(|k| {
        let (p, q) = (coords[k], coords[(k + 1) % 3]);
        let (tx, ty) = (q[0] - p[0], q[1] - p[1]);
        let l = tx.hypot(ty);
        let s = if k == 1 { -1.0 } else { 1.0 };
        [s * ty / l, -s * tx / l]
    });
    let tr =
        ArgyrisTransform::new(reference_basis(), coords, normals, 0).map_err(|e| e.to_string())?;
    Ok(worst.max(delta_defect(&tr, coords)?))
}

fn edge_neighbours(space: &Space) -> HashMap<usize, Vec<usize>> {
    let mut map: HashMap<usize, Vec<usize>> = HashMap::new();
    for t in 0..space.mesh().n_triangles() {
        for e in space.mesh().triangle_edges(t) {
            map.entry(e).or_default().push(t);
        }
    }
    map
}

/// Largest jump of value and gradient across interior edges for random
/// coefficients, relative to the local magnitude.
fn c1_jump() -> Result<f64, String> {
    let mut rng = rng(7);
    let mut worst: f64 = 0.0;
    for (lx, ly, h) in [(1.0, 1.0, 0.25), (3.0, 1.0, 0.5)] {
        let s = space(lx, ly, h, BoundaryMode::Free);
        let coeffs: Vec<f64> = (0..s.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let field = FemField::new(&s, coeffs).map_err(|e| e.to_string())?;
        for (e, ts) in edge_neighbours(&s) {
            if ts.len() != 2 {
                continue;
            }
            let [a, b] = s.mesh().edges()[e].vertices;
            let (pa, pb) = (s.mesh().vertices()[a], s.mesh().vertices()[b]);
            for s_ in [0.13, 0.5, 0.77] {
                let (x, y) = (pa[0] + s_ * (pb[0] - pa[0]), pa[1] + s_ * (pb[1] - pa[1]));
                let u = field.eval_on(ts[0], x, y).map_err(|e| e.to_string())?;
                let v = field.eval_on(ts[1], x, y).map_err(|e| e.to_string())?;
                for c in 0..3 {
                    worst = worst.max((u[c] - v[c]).abs() / u[c].abs().max(1.0));
                }
            }
        }
    }
    Ok(worst)
}

fn p5_reproduction() -> Result<f64, String> {
    let mut rng = rng(11);
    let mut worst: f64 = 0.0;
    for (lx, ly, h) in [(1.0, 1.0, 0.25), (3.0, 1.0, 0.5)] {
        let s = space(lx, ly, h, BoundaryMode::Free);
        let poly = Polynomial::random(5, &mut rng);
        let field = interpolate(&s, &|x, y| poly.derivs(x, y));
        for _ in 0..200 {
            let (x, y) = (rng.gen_range(0.0..lx), rng.gen_range(0.0..ly));
            let got = field.eval(x, y).map_err(|e| e.to_string())?;
            let want = poly.derivs(x, y);
            for c in 0..6 {
                worst = worst.max((got[c] - want[c]).abs() / want[c].abs().max(1.0));
            }
        }
    }
    Ok(worst)
}

/// `|u - I_h u|_{H^2}` of the smooth oracle on the unit square.
fn h2_interpolation_error(h: f64) -> Result<f64, String> {
    let s = space(1.0, 1.0, h, BoundaryMode::Free);
    let field = interpolate(&s, &smooth_oracle);
    let rule = triangle_rule(12).map_err(|e| e.to_string())?;
    let mut sum = 0.0;
    for t in 0..s.mesh().n_triangles() {
        sum += integrate(&rule, s.transform(t).geometry(), |x, y| {
            let d = field
                .eval_on(t, x, y)
                .expect("quadrature point inside its triangle");
            let e = smooth_oracle(x, y);
            let (a, b, c) = (d[3] - e[3], d[4] - e[4], d[5] - e[5]);
            a * a + 2.0 * b * b + c * c
        });
    }
    Ok(sum.sqrt())
}

fn quadrature_defect() -> Result<f64, String> {
    let rule = triangle_rule(12).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for p in 0..=12u32 {
        for q in 0..=12 - p {
            let got = rule.integrate_reference(|x, y| x.powi(p as i32) * y.powi(q as i32));
            worst = worst.max((got - reference_monomial_integral(p, q)).abs());
        }
    }
    Ok(worst)
}

fn criterion_7() -> Result<Outcome, String> {
    let delta = element_delta()?;
    let jump = c1_jump()?;
    let p5 = p5_reproduction()?;
    let (e8, e16) = (
        h2_interpolation_error(0.125)?,
        h2_interpolation_error(0.0625)?,
    );
    let h2 = order(e8, e16, 0.125, 0.0625);
    let quad = quadrature_defect()?;
    let pass = delta <= 1e-8 && jump <= 1e-8 && p5 <= 1e-8 && within(h2, 4.0, 0.4) && quad <= 1e-12;
    Ok(outcome(
        pass,
        format!("delta {delta:.1e}, C1 jump {jump:.1e}, P5 {p5:.1e}, H2 order {h2:.3}, quadrature {quad:.1e}"),
    ))
}

fn frobenius(a: &SparseMatrix) -> f64 {
    a.values().iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn quad_form(a: &SparseMatrix, x: &[f64]) -> f64 {
    dot(x, &a.matvec(x))
}

/// Number of non-positive pivots of a dense symmetric LDL^T factorization.
fn non_positive_pivots(a: &SparseMatrix) -> usize {
    let n = a.nrows();
    let mut m = vec![vec![0.0; n]; n];
    for r in 0..n {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            m[r][c] = v;
        }
    }
    let mut count = 0;
    for k in 0..n {
        let p = m[k][k];
        if p <= 0.0 {
            count += 1;
            continue;
        }
        for i in k + 1..n {
            let l = m[i][k] / p;
            if l != 0.0 {
                for j in k + 1..n {
                    m[i][j] -= l * m[k][j];
                }
            }
        }
    }
    count
}

fn criterion_8() -> Result<Outcome, String> {
    let s = space(1.0, 1.0, 0.25, BoundaryMode::Clamped);
    let asm = Assembler::with_degree(&s, 12).map_err(|e| e.to_string())?;
    let b = asm.transport();
    let b_norm = frobenius(&b);
    let mut rng = rng(5);
    let (mut tri, mut skew): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let chi = random_free_vector(&s, &mut rng);
        let zeta = random_free_vector(&s, &mut rng);
        let n_chi = asm.trilinear_residual(&chi);
        let k_zeta = asm.trilinear_jacobian(&zeta);
        // chi^T K(zeta) chi = a1(chi, zeta, chi) + a1(zeta, chi, chi), and
        // a1(chi, zeta, chi) = -zeta^T N(chi) by skew-symmetry
        let a1_zcc = quad_form(&k_zeta, &chi) + dot(&zeta, &n_chi);
        let scale = frobenius(&k_zeta) * dot(&chi, &chi) + norm(&zeta) * norm(&n_chi);
        tri = tri.max(a1_zcc.abs() / scale);
        tri = tri.max(dot(&chi, &n_chi).abs() / (norm(&chi) * norm(&n_chi)));
        let bt = quad_form(&b, &chi) + dot(&chi, &b.transpose().matvec(&chi));
        skew = skew.max(bt.abs() / (b_norm * dot(&chi, &chi)));
    }
    let a0 = asm.biharmonic();
    let zero = vec![0.0; s.n_dofs()];
    let reduced = apply_constraints(&a0, &zero, s.dofmap()).map_err(|e| e.to_string())?;
    let negative = non_positive_pivots(&reduced.matrix);
    let symmetric = reduced.matrix.asymmetry() <= 1e-12 * reduced.matrix.max_abs();
    let pass = tri <= 1e-9 && skew <= 1e-9 && negative == 0 && symmetric;
    Ok(outcome(
        pass,
        format!(
            "a1 skew {tri:.1e}, B skew {skew:.1e}, A0 dim {} with {negative} non-positive pivots",
            reduced.matrix.nrows()
        ),
    ))
}

fn criterion_9() -> Result<Outcome, String> {
    let s = space(3.0, 1.0, 0.5, BoundaryMode::Clamped);
    let asm = Assembler::with_degree(&s, 12).map_err(|e| e.to_string())?;
    let index = FreeIndex::new(s.dofmap());
    let mut rng = rng(9);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let psi = random_free_vector(&s, &mut rng);
        let dir = random_free_vector(&s, &mut rng);
        let eps = 1e-3;
        let plus: Vec<f64> = psi.iter().zip(&dir).map(|(p, d)| p + eps * d).collect();
        let minus: Vec<f64> = psi.iter().zip(&dir).map(|(p, d)| p - eps * d).collect();
        let (np, nm) = (
            asm.trilinear_residual(&plus),
            asm.trilinear_residual(&minus),
        );
        let fd: Vec<f64> = np
            .iter()
            .zip(&nm)
            .map(|(a, b)| (a - b) / (2.0 * eps))
            .collect();
        let kd = asm.trilinear_jacobian(&psi).matvec(&dir);
        let diff: Vec<f64> = index.free().iter().map(|&i| fd[i] - kd[i]).collect();
        worst = worst.max(norm(&diff) / norm(&index.restrict(&kd)));
    }
    Ok(outcome(
        worst <= 1e-6,
        format!("relative directional-derivative mismatch {worst:.1e}"),
    ))
}

/// Dimension, entry count and half-bandwidth read back from a
/// MatrixMarket file.
fn read_matrix_market(text: &str) -> Result<(usize, usize, usize), String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('%'));
    let header: Vec<usize> = lines
        .next()
        .ok_or("empty file")?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| format!("bad header token {t}")))
        .collect::<Result<_, _>>()?;
    let mut count = 0;
    let mut band = 0;
    for l in lines {
        let mut it = l.split_whitespace();
        let r: usize = it.next().and_then(|t| t.parse().ok()).ok_or("bad row")?;
        let c: usize = it.next().and_then(|t| t.parse().ok()).ok_or("bad column")?;
        band = band.max(r.abs_diff(c));
        count += 1;
    }
    if header.len() != 3 || header[2] != count || header[0] != header[1] {
        return Err("inconsistent MatrixMarket header".into());
    }
    Ok((header[0], count, band))
}

fn criterion_10() -> Result<Outcome, String> {
    let problem =
        ProblemSpec::new(Model::Biharmonic, "biharmonic-square").map_err(|e| e.to_string())?;
    let s = space(1.0, 1.0, 0.125, problem.boundary);
    let asm = Assembler::with_degree(&s, problem.quad_degree).map_err(|e| e.to_string())?;
    let a = problem.linear_operator(&asm).map_err(|e| e.to_string())?;
    let zero = vec![0.0; s.n_dofs()];
    let reduced = apply_constraints(&a, &zero, s.dofmap()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("biharmonic.mtx");
    reduced
        .matrix
        .write_matrix_market(&path)
        .map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let (dim, nnz, band) = read_matrix_market(&text)?;
    let pass = nnz > 0 && (band as f64) < dim as f64 / 4.0;
    Ok(outcome(
        pass,
        format!(
            "dimension {dim}, nnz {nnz}, half-bandwidth {band} (< {:.1})",
            dim as f64 / 4.0
        ),
    ))
}

fn main() {
    // the default solver settings are part of the reference configuration
    assert_eq!(
        NewtonOptions::default(),
        NewtonOptions {
            tol_res: 1e-8,
            tol_inc: 1e-8,
            max_it: 10
        }
    );
    let criteria: [(&str, u64, Check); 10] = [
        ("DOF counts", 1, criterion_1),
        ("biharmonic study", 30, criterion_2),
        ("Stommel eps_S = 1", 120, criterion_3),
        ("Stommel-Munk sin^2", 300, criterion_4),
        ("QGE sin^2", 600, criterion_5),
        ("boundary-layer rate pattern", 600, criterion_6),
        ("element properties", 10, criterion_7),
        ("stability identities", 10, criterion_8),
        ("Newton Jacobian", 10, criterion_9),
        ("bandwidth", 5, criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let o = timed(Duration::from_secs(limit), f);
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
