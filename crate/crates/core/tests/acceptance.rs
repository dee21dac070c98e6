//! One PASS/FAIL line per acceptance criterion row; exits non-zero on any
//! FAIL.

use std::process::ExitCode;
use std::time::Instant;

use fyk_core::bubble::{trace_bubble, Bubble, BubbleParams};
use fyk_core::moments::{
    a_closed_form, chain, chain_orders, combined_integrals, combined_integrals_direct, combined_targets,
    compute_integrals, compute_moments, ratio_targets, verify_recurrences, IntegralMethod, MomentKind,
};
use fyk_core::pohozaev::{
    assemble_fhat, coefficient, coefficient_scan, limit_value_reference, pohozaev_p, pohozaev_pprime,
    power_field_pprime, BubbleField, PowerField,
};
use fyk_core::solver::{
    extension_study, green_asymptotics, rayleigh_lambda1, solve_linearized, LINEARIZED_EPS_HAT, LINEARIZED_EXTENT,
    LINEARIZED_RESOLUTION,
};
use fyk_core::specfun::constants;
use fyk_core::tensor::SymmetricTensor;
use fyk_core::{ProblemIndex, Result};

const INDEX_SET: [(u32, f64); 4] = [(3, 0.5), (5, 0.5), (5, 0.7), (7, 0.25)];

#[derive(Default)]
struct Board {
    pass: usize,
    fail: usize,
}

impl Board {
    fn row(&mut self, criterion: u32, what: &str, ok: bool, detail: String) {
        if ok {
            self.pass += 1;
        } else {
            self.fail += 1;
        }
        println!("{} [{criterion:>2}] {what}: {detail}", if ok { "PASS" } else { "FAIL" });
    }

    /// A row whose computation may fail outright; the error is the detail.
    fn try_row(&mut self, criterion: u32, what: &str, r: Result<(bool, String)>) {
        match r {
            Ok((ok, d)) => self.row(criterion, what, ok, d),
            Err(e) => self.row(criterion, what, false, format!("error: {e}")),
        }
    }
}

fn idx(n: u32, g: f64) -> ProblemIndex {
    ProblemIndex::new(n, g).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn max_rel(got: &[f64], want: &[f64]) -> f64 {
    got.iter().zip(want).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max)
}

fn integral_ratios(b: &mut Board) {
    for (n, g) in INDEX_SET {
        for (method, tol) in [(IntegralMethod::BesselMoments, 1e-6), (IntegralMethod::Direct2d, 1e-4)] {
            let i = idx(n, g);
            let r = compute_integrals(i, method).map(|set| {
                let e = max_rel(&set.ratios(), &ratio_targets(i));
                (e <= tol, format!("max rel {e:.2e} <= {tol:e}"))
            });
            b.try_row(1, &format!("({n}, {g}) {method:?} ratios I_k/C0"), r);
        }
    }
}

fn combined(b: &mut Board) {
    for (n, g) in INDEX_SET {
        let i = idx(n, g);
        let r = compute_integrals(i, IntegralMethod::BesselMoments).map(|set| {
            let got: Vec<f64> = combined_integrals(i, &set).iter().map(|v| v / set.c0).collect();
            let e = max_rel(&got, &combined_targets(g));
            (e <= 1e-6, format!("ratios {got:.8?}, max rel {e:.2e} <= 1e-6"))
        });
        b.try_row(2, &format!("({n}, {g}) combined integrals / C0"), r);
        let r = compute_integrals(i, IntegralMethod::BesselMoments).and_then(|set| {
            let direct = combined_integrals_direct(i)?;
            let e = max_rel(&direct, &combined_integrals(i, &set));
            Ok((e <= 1e-4, format!("assembled vs direct quadrature, max rel {e:.2e} <= 1e-4")))
        });
        b.try_row(2, &format!("({n}, {g}) combined assemblies agree"), r);
    }
}

fn recurrences(b: &mut Board) {
    let cases: [(u32, f64, &[i32]); 5] =
        [(5, 0.5, &[2]), (5, 0.7, &[2]), (7, 0.25, &[2, 4]), (8, 0.35, &[2, 4]), (4, 0.5, &[2])];
    for (n, g, betas) in cases {
        let i = idx(n, g);
        let recs = chain(&[1, 3, 5], betas);
        let r = compute_moments(i, &chain_orders(&recs), 1e-13).and_then(|t| {
            let checks = verify_recurrences(&t, &recs)?;
            let e = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
            Ok((e <= 1e-7, format!("{} relations, max rel {e:.2e} <= 1e-7", checks.len())))
        });
        b.try_row(3, &format!("({n}, {g}) alpha in 1,3,5 beta in {betas:?} recurrences"), r);
    }
    let r = compute_moments(idx(5, 0.5), &[(MomentKind::A, 1), (MomentKind::A, 3)], 1e-13).map(|t| {
        let (a1, a3) = (t.get(MomentKind::A, 1).unwrap(), t.get(MomentKind::A, 3).unwrap());
        let e = rel(a1, 0.5).max(rel(a3, 0.25));
        (e <= 1e-12, format!("A_1 = {a1:.15}, A_3 = {a3:.15}, max rel {e:.1e}"))
    });
    b.try_row(3, "gamma = 0.5 closed forms A_1 = 1/2, A_3 = 1/4", r);
    let e = rel(a_closed_form(0.5, 1), 0.5).max(rel(a_closed_form(0.5, 3), 0.25));
    b.row(3, "gamma = 0.5 Mellin closed forms", e <= 1e-13, format!("max rel {e:.1e}"));
}

fn coefficient_sweep(b: &mut Board) {
    let r = coefficient_scan(3, 30, 1000).map(|s| {
        (
            s.pass(),
            format!(
                "{} rows, {} mismatches, {} boundary rows, {} out-of-domain rows excluded",
                s.rows.len(),
                s.mismatches.len(),
                s.boundary.len(),
                s.excluded_mismatches
            ),
        )
    });
    b.try_row(4, "sign(c) == dimension gate over n in 3..30, gamma step 1e-3", r);
    let r = coefficient_scan(3, 30, 1000).and_then(|s| {
        let c = coefficient(5, 0.5)?;
        let only = s.boundary.len() == 1 && s.boundary[0].n == 5 && (s.boundary[0].gamma - 0.5).abs() < 1e-12;
        Ok((only && c.numerator.abs() < 1e-12, format!("|numerator(5, 0.5)| = {:.1e}", c.numerator.abs())))
    });
    b.try_row(4, "boundary zero at (5, 0.5)", r);
}

fn coefficient_assembly(b: &mut Board) {
    for (n, g) in [(4, 0.8), (5, 0.6), (6, 0.5), (7, 0.2), (8, 0.35)] {
        let i = idx(n, g);
        let r = compute_integrals(i, IntegralMethod::BesselMoments).and_then(|set| {
            let f = assemble_fhat(i, combined_integrals(i, &set), set.c0);
            let c = coefficient(n, g)?.c_value;
            let e = rel(f, c);
            Ok((e <= 1e-6, format!("assembled {f:.12}, closed form {c:.12}, rel {e:.1e}")))
        });
        b.try_row(5, &format!("({n}, {g}) assembled coefficient"), r);
    }
}

fn pohozaev(b: &mut Board) {
    let i = idx(3, 0.5);
    let field = BubbleField::new(i).unwrap();
    for r in [0.5, 1.0, 2.0] {
        let res = pohozaev_p(i, &field, r, i.critical_exponent(), &|_| 1.0, 0.0).map(|rep| {
            let e = rep.total.abs() / rep.scale;
            (e <= 1e-4, format!("|P| = {:.2e}, scale {:.3}, ratio {e:.1e} <= 1e-4", rep.total.abs(), rep.scale))
        });
        b.try_row(6, &format!("(3, 0.5) Pohozaev identity at r = {r}"), res);
    }
    let power = PowerField {
        c1: 1.0,
        c2: 1.0,
        m: i.decay(),
    };
    let derived = power_field_pprime(i, 1.0, 1.0);
    let reference = limit_value_reference(i, 1.0);
    for r in [0.5, 1.0, 2.0] {
        let res = pohozaev_pprime(i, &power, r).map(|v| {
            let e = rel(v, reference);
            (e <= 0.01, format!("P' = {v:.6}, reference {reference:.6} (-pi^2), rel {e:.3}"))
        });
        b.try_row(6, &format!("(3, 0.5) limit value vs stated reference, r = {r}"), res);
        let res = pohozaev_pprime(i, &power, r).map(|v| {
            let e = rel(v, derived);
            (e <= 0.01, format!("P' = {v:.6}, derived {derived:.6} (-2 pi^2), rel {e:.1e}"))
        });
        b.try_row(6, &format!("(3, 0.5) limit value vs derived closed form, r = {r}"), res);
    }
}

fn green(b: &mut Board) {
    let i = idx(3, 0.5);
    let t = Instant::now();
    let r = green_asymptotics(i, 4.0, 0.05, 128);
    let secs = t.elapsed().as_secs_f64();
    let g = constants(i).green;
    match r {
        Ok(fit) => {
            let es = rel(fit.slope, -i.decay());
            b.row(7, "(3, 0.5) Green decay exponent", es <= 0.02, format!("{:.4} vs -2, rel {es:.1e} <= 2e-2", fit.slope));
            let ec = rel(fit.constant, g);
            b.row(
                7,
                "(3, 0.5) Green constant",
                ec <= 0.05,
                format!("{:.5} vs 1/(2 pi^2) = {g:.5}, rel {ec:.1e} <= 5e-2", fit.constant),
            );
            b.row(7, "(3, 0.5) Green runtime", secs <= 120.0, format!("{secs:.1} s <= 120 s"));
        }
        Err(e) => b.row(7, "(3, 0.5) Green fit", false, format!("error: {e}")),
    }
}

fn eigen_scaling(b: &mut Board) {
    let i = idx(3, 0.5);
    let r = [0.5, 1.0, 2.0]
        .iter()
        .map(|&r| rayleigh_lambda1(i, r, 32).map(|l| l.lambda * r * r))
        .collect::<Result<Vec<f64>>>()
        .map(|v| {
            let e = v.iter().map(|x| rel(*x, v[0])).fold(0.0, f64::max);
            (e <= 1e-3, format!("lambda R^2 = {v:.6?}, max rel {e:.1e} <= 1e-3"))
        });
    b.try_row(8, "(3, 0.5) lambda_1(R) R^2 over R in 0.5, 1, 2", r);
}

fn extension(b: &mut Board) {
    let i = idx(3, 0.5);
    match extension_study(i, 4.0, 32, 4) {
        Ok(st) => {
            let min = st.orders.iter().copied().fold(f64::INFINITY, f64::min);
            b.row(
                9,
                "(3, 0.5) extension order over refinement pairs",
                st.orders.len() >= 2 && min >= 1.5,
                format!(
                    "errors {}, orders {:.3?}, min {min:.3} >= 1.5",
                    st.errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" "),
                    st.orders
                ),
            );
            b.row(
                9,
                "(3, 0.5) discrete Neumann trace / w^p, |xbar| <= 3",
                st.neumann_ratio_error <= 1e-3,
                format!("max |ratio - 1| = {:.1e} <= 1e-3", st.neumann_ratio_error),
            );
        }
        Err(e) => b.row(9, "(3, 0.5) extension study", false, format!("error: {e}")),
    }
    let bubble = Bubble::new(i).unwrap();
    let p = BubbleParams::standard(3);
    let e = (0..=30)
        .map(|k| {
            let xb = [0.1 * k as f64, 0.0, 0.0];
            let lhs = bubble.neumann_trace(&p, &xb).unwrap();
            let w = trace_bubble(i, &p, &xb).unwrap();
            (lhs / w.powf(i.critical_exponent()) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    b.row(9, "(3, 0.5) Bessel-route Neumann trace / w^p, |xbar| <= 3", e <= 1e-3, format!("max |ratio - 1| = {e:.1e}"));
}

fn linearized(b: &mut Board) {
    let i = idx(3, 0.25);
    let (eps, ext, res) = (LINEARIZED_EPS_HAT, LINEARIZED_EXTENT, LINEARIZED_RESOLUTION);
    let p1 = SymmetricTensor::diag(&[1.0, -1.0, 0.0]);
    let p2 = SymmetricTensor::from_rows(&[vec![0.0, 0.5, 0.0], vec![0.5, 1.0, 0.0], vec![0.0, 0.0, -1.0]]).unwrap();
    let mut sum = SymmetricTensor::zeros(3);
    for r in 0..3 {
        for c in 0..=r {
            sum.set(r, c, p1.get(r, c) - 2.0 * p2.get(r, c));
        }
    }
    let solve = |p: &SymmetricTensor, ext: f64, res: usize| solve_linearized(i, p, eps, ext, res);
    match solve(&SymmetricTensor::zeros(3), ext, res) {
        Ok(z) => b.row(10, "Psi(pi = 0) == 0", z.profile.max_abs() == 0.0, format!("max |psi| = {:e}", z.profile.max_abs())),
        Err(e) => b.row(10, "Psi(pi = 0) == 0", false, format!("error: {e}")),
    }
    let (u1, u2, us) = match (solve(&p1, ext, res), solve(&p2, ext, res), solve(&sum, ext, res)) {
        (Ok(a), Ok(c), Ok(s)) => (a, c, s),
        _ => {
            b.row(10, "linearised solves", false, "solver error".into());
            return;
        }
    };
    let mut gap = 0.0f64;
    let mut size = 0.0f64;
    for k in 0..24 {
        let t = k as f64 * 0.37;
        let xb = [t.cos() * 0.4 * k as f64 / 3.0, t.sin(), 0.3 * (k % 5) as f64];
        for y in [0.0, 0.25, 1.0, 3.0] {
            let want = u1.value(&xb, y) - 2.0 * u2.value(&xb, y);
            gap = gap.max((us.value(&xb, y) - want).abs());
            size = size.max(want.abs());
        }
    }
    b.row(
        10,
        "linearity Psi(p1 - 2 p2) = Psi(p1) - 2 Psi(p2)",
        gap <= 1e-8 * size,
        format!("max gap {gap:.1e}, scale {size:.3e}"),
    );
    for (name, u) in [("diag(1,-1,0)", &u1), ("p2", &u2), ("p1 - 2 p2", &us)] {
        let d = u.diagnostics;
        b.row(
            10,
            &format!("orthogonality, pi = {name}"),
            d.orth_energy <= 1e-3 && d.orth_trace <= 1e-3,
            format!("energy {:.1e}, trace {:.1e} <= 1e-3", d.orth_energy, d.orth_trace),
        );
    }
    b.row(
        10,
        "pinning Psi(0) = 0",
        u1.diagnostics.value_at_origin == 0.0,
        format!("Psi(0) = {:e}, |grad Psi(0)| estimate {:.2e}", u1.diagnostics.value_at_origin, u1.diagnostics.grad_at_origin),
    );
    match solve(&p1, 24.0, 192) {
        Ok(wide) => {
            let (a, c) = (u1.diagnostics.envelope, wide.diagnostics.envelope);
            let e = rel(c, a);
            b.row(
                10,
                "decay envelope bounded and stable under truncation",
                a.is_finite() && e <= 0.05,
                format!("L = {ext}: {a:.4}, L = 24: {c:.4}, rel change {e:.1e} <= 5e-2"),
            );
        }
        Err(e) => b.row(10, "decay envelope", false, format!("error: {e}")),
    }
}

fn main() -> ExitCode {
    let mut b = Board::default();
    let t = Instant::now();
    integral_ratios(&mut b);
    combined(&mut b);
    recurrences(&mut b);
    coefficient_sweep(&mut b);
    coefficient_assembly(&mut b);
    pohozaev(&mut b);
    green(&mut b);
    eigen_scaling(&mut b);
    extension(&mut b);
    linearized(&mut b);
    println!(
        "acceptance: {} passed, {} failed ({:.0} s)",
        b.pass,
        b.fail,
        t.elapsed().as_secs_f64()
    );
    if b.fail == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
