use fyk_core::moments::{
    combined_integrals, combined_targets, compute_integrals, ratio_targets, IntegralMethod,
};
use fyk_core::pohozaev::{
    coefficient_scan, limit_value_reference, pohozaev_p, pohozaev_pprime, power_field_pprime, BubbleField,
    PowerField,
};
use fyk_core::solver::{
    extension_study, green_fit, rayleigh_lambda1, solve_green, solve_linearized, GridFunction, WeightedGrid,
    LINEARIZED_EPS_HAT, LINEARIZED_EXTENT, LINEARIZED_RESOLUTION,
};
use fyk_core::specfun::constants as index_constants;
use fyk_core::tensor::SymmetricTensor;
use fyk_core::ProblemIndex;

use crate::config::parse_list;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Report, Table};
use crate::{IndexArgs, Settings, SolveKind};

fn index(s: &Settings, ix: &IndexArgs, dn: Option<u32>, dg: Option<f64>) -> CliResult<ProblemIndex> {
    let n = match dn {
        Some(d) => s.config.get_or("n", ix.n, d)?,
        None => s.config.require("n", ix.n)?,
    };
    let g = match dg {
        Some(d) => s.config.get_or("gamma", ix.gamma, d)?,
        None => s.config.require("gamma", ix.gamma)?,
    };
    Ok(ProblemIndex::new(n, g)?)
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn grid_table(name: &str, title: &str, grid: &WeightedGrid, f: &GridFunction) -> Table {
    let mut t = Table::new(name, title, &["r", "y", "value"]);
    t.bulk = true;
    for i in 0..=grid.nr() {
        for j in 0..=grid.ny() {
            t.push(vec![grid.r(i).into(), grid.y(j).into(), f.get(i, j).into()]);
        }
    }
    t
}

pub fn constants(s: &Settings, ix: &IndexArgs) -> CliResult<Report> {
    let idx = index(s, ix, None, None)?;
    let c = index_constants(idx);
    let mut r = Report::new("constants");
    let mut t = Table::new(
        "constants",
        "normalising constants",
        &["n", "gamma", "alpha", "kappa", "green_const", "sphere_area"],
    );
    t.push(vec![
        idx.n().into(),
        idx.gamma().into(),
        c.alpha.into(),
        c.kappa.into(),
        c.green.into(),
        c.sphere_area.into(),
    ]);
    r.tables.push(t);
    Ok(r)
}


pub fn integrals(s: &Settings, ix: &IndexArgs, method: Option<String>) -> CliResult<Report> {
    let idx = index(s, ix, None, None)?;
    let method = match s.config.get_or("method", method, "bessel_moments".to_string())?.as_str() {
        "bessel_moments" => IntegralMethod::BesselMoments,
        "direct_2d" => IntegralMethod::Direct2d,
        other => return Err(CliError::Usage(format!("unknown method {other:?}"))),
    };
    let tol = s.tol.unwrap_or(match method {
        IntegralMethod::BesselMoments => 1e-6,
        IntegralMethod::Direct2d => 1e-4,
    });
    if !idx.integrals_converge() {
        return Err(CliError::Usage(format!(
            "the integrals diverge unless n > 2 + 2 gamma (n = {}, gamma = {})",
            idx.n(),
            idx.gamma()
        )));
    }
    let set = compute_integrals(idx, method)?;
    let mut r = Report::new("integrals");
    let mut t = Table::new(
        "ratios",
        "bubble integral ratios I_k / C0",
        &["k", "computed_ratio", "closed_form", "abs_residual", "rel_residual"],
    );
    for (k, (got, want)) in set.ratios().iter().zip(ratio_targets(idx)).enumerate() {
        let e = rel(*got, want);
        t.push(vec![(k + 1).into(), (*got).into(), want.into(), (got - want).abs().into(), e.into()]);
        r.check(e <= tol, format!("I_{} ratio off by {e:e}", k + 1));
    }
    r.tables.push(t);
    let mut t = Table::new(
        "combined",
        "combined integrals over C0",
        &["j", "computed", "closed_form", "rel_residual"],
    );
    let combined = combined_integrals(idx, &set);
    for (j, (got, want)) in combined.iter().zip(combined_targets(idx.gamma())).enumerate() {
        let got = got / set.c0;
        let e = rel(got, want);
        t.push(vec![(j + 1).into(), got.into(), want.into(), e.into()]);
        r.check(e <= tol, format!("combined integral {} off by {e:e}", j + 1));
    }
    r.tables.push(t);
    let mut t = Table::new("normaliser", "C0 and error estimate", &["c0", "abs_error"]);
    t.push(vec![set.c0.into(), set.error.into()]);
    r.tables.push(t);
    Ok(r)
}

pub fn coeff_scan(
    s: &Settings,
    n_min: Option<u32>,
    n_max: Option<u32>,
    gamma_step: Option<f64>,
) -> CliResult<Report> {
    let lo = s.config.get_or("n_min", n_min, 3u32)?;
    let hi = s.config.get_or("n_max", n_max, 30u32)?;
    let step = s.config.get_or("gamma_step", gamma_step, 1e-3)?;
    if !(3 <= lo && lo <= hi && hi <= 64) {
        return Err(CliError::Usage("n range must satisfy 3 <= n-min <= n-max <= 64".into()));
    }
    let steps = (1.0 / step).round();
    if !(step > 0.0 && step <= 0.5) || (steps * step - 1.0).abs() > 1e-9 {
        return Err(CliError::Usage("gamma-step must be 1/k for an integer k >= 2".into()));
    }
    let scan = coefficient_scan(lo, hi, steps as u32)?;
    let mut r = Report::new("coeff_scan");
    let mut t = Table::new(
        "rows",
        "energy coefficient against the dimension gate",
        &["n", "gamma", "numerator", "c_value", "positive", "gate", "in_domain", "boundary"],
    );
    for c in &scan.rows {
        t.push(vec![
            c.n.into(),
            c.gamma.into(),
            c.numerator.into(),
            c.c_value.into(),
            c.positive.into(),
            c.gate.into(),
            c.in_domain.into(),
            c.boundary.into(),
        ]);
    }
    r.tables.push(t);
    let boundary: Vec<String> = scan.boundary.iter().map(|b| format!("({} {})", b.n, b.gamma)).collect();
    let mut v = Table::new(
        "verdict",
        "sign equivalence verdict",
        &["rows", "mismatches", "boundary_points", "excluded_mismatches", "verdict"],
    );
    v.push(vec![
        scan.rows.len().into(),
        scan.mismatches.len().into(),
        boundary.join(" ").into(),
        scan.excluded_mismatches.into(),
        Cell::from(if scan.pass() { "PASS" } else { "FAIL" }),
    ]);
    r.tables.push(v);
    r.check(scan.pass(), format!("{} sign/gate mismatches", scan.mismatches.len()));
    Ok(r)
}

pub fn pohozaev(s: &Settings, ix: &IndexArgs, radii: Option<String>) -> CliResult<Report> {
    let idx = index(s, ix, Some(3), Some(0.5))?;
    let radii = parse_list(&s.config.get_or("radii", radii, "0.5,1,2".to_string())?)?;
    if radii.iter().any(|&r| !(r > 0.0)) {
        return Err(CliError::Usage("radii must be positive".into()));
    }
    let tol = s.tol.unwrap_or(1e-4);
    let field = BubbleField::new(idx)?;
    let p = idx.critical_exponent();
    let mut r = Report::new("pohozaev");
    let mut t = Table::new(
        "identity",
        "Pohozaev functional of the unit bubble",
        &["r", "surface_term", "boundary_term", "total", "scale", "rel_total", "quad_error"],
    );
    for &rad in &radii {
        let rep = pohozaev_p(idx, &field, rad, p, &|_| 1.0, 0.0)?;
        let e = rep.total.abs() / rep.scale;
        t.push(vec![
            rad.into(),
            rep.surface_term.into(),
            rep.boundary_term.into(),
            rep.total.into(),
            rep.scale.into(),
            e.into(),
            rep.error.into(),
        ]);
        r.check(e <= tol, format!("identity residual {e:e} at r = {rad}"));
    }
    r.tables.push(t);
    let power = PowerField {
        c1: 1.0,
        c2: 1.0,
        m: idx.decay(),
    };
    let derived = power_field_pprime(idx, 1.0, 1.0);
    let reference = limit_value_reference(idx, 1.0);
    let mut t = Table::new(
        "limit",
        "half-sphere term for U = |x|^-(n-2gamma) + 1",
        &["r", "computed", "closed_form", "rel_to_closed_form", "reference", "rel_to_reference"],
    );
    for &rad in &radii {
        let got = pohozaev_pprime(idx, &power, rad)?;
        let e = rel(got, derived);
        t.push(vec![
            rad.into(),
            got.into(),
            derived.into(),
            e.into(),
            reference.into(),
            rel(got, reference).into(),
        ]);
        r.check(e <= 1e-2, format!("limit value off by {e:e} at r = {rad}"));
    }
    r.tables.push(t);
    Ok(r)
}

fn parse_pi(spec: &str) -> CliResult<SymmetricTensor> {
    let bad = || CliError::Usage(format!("cannot parse tensor {spec:?}; use diag(a,b,..) or rows(a,b;c,d)"));
    let (free, body) = match spec.trim().strip_prefix("tracefree:") {
        Some(b) => (true, b.trim()),
        None => (false, spec.trim()),
    };
    let inner = |p: &str| body.strip_prefix(p).and_then(|b| b.strip_suffix(')'));
    let t = if let Some(d) = inner("diag(") {
        SymmetricTensor::diag(&parse_list(d)?)
    } else if let Some(rows) = inner("rows(") {
        let rows: Vec<Vec<f64>> = rows.split(';').map(parse_list).collect::<CliResult<_>>()?;
        SymmetricTensor::from_rows(&rows)?
    } else {
        return Err(bad());
    };
    Ok(if free { t.trace_free_part() } else { t })
}

pub fn solve(s: &Settings, kind: SolveKind) -> CliResult<Report> {
    match kind {
        SolveKind::Extension {
            index: ix,
            extent,
            coarse,
            levels,
        } => {
            let idx = index(s, &ix, Some(3), Some(0.5))?;
            let extent = s.config.get_or("extent", extent, 4.0)?;
            let coarse = s.config.get_or("coarse", coarse, 32usize)?;
            let levels = s.config.get_or("levels", levels, 4usize)?;
            let tol = s.tol.unwrap_or(1e-3);
            let st = extension_study(idx, extent, coarse, levels)?;
            let mut r = Report::new("solve_extension");
            let mut t = Table::new(
                "levels",
                "extension error against the Fourier-Bessel bubble",
                &["h", "max_error", "order"],
            );
            for (k, (h, e)) in st.steps.iter().zip(&st.errors).enumerate() {
                let order = if k == 0 { f64::NAN } else { st.orders[k - 1] };
                t.push(vec![(*h).into(), (*e).into(), order.into()]);
            }
            r.tables.push(t);
            let min_order = st.orders.iter().copied().fold(f64::INFINITY, f64::min);
            let mut t = Table::new("summary", "extension summary", &["min_order", "neumann_ratio_error"]);
            t.push(vec![min_order.into(), st.neumann_ratio_error.into()]);
            r.tables.push(t);
            r.check(min_order >= 1.5, format!("empirical order {min_order:.3} below 1.5"));
            r.check(
                st.neumann_ratio_error <= tol,
                format!("Neumann ratio error {:e}", st.neumann_ratio_error),
            );
            r.tables.push(grid_table("grid", "finest extension solution", &st.grid, &st.solution));
            Ok(r)
        }
        SolveKind::Green {
            index: ix,
            radius,
            width,
            resolution,
        } => {
            let idx = index(s, &ix, Some(3), Some(0.5))?;
            let radius = s.config.get_or("radius", radius, 4.0)?;
            let width = s.config.get_or("width", width, 0.05)?;
            let res = s.config.get_or("resolution", resolution, 128usize)?;
            let tol = s.tol.unwrap_or(0.02);
            let (grid, u) = solve_green(idx, radius, width, res, 1.0)?;
            let fit = green_fit(idx, width, &grid, &u)?;
            let g = index_constants(idx).green;
            let m = idx.decay();
            let slope_err = rel(fit.slope, -m);
            let const_err = rel(fit.constant, g);
            let mut r = Report::new("solve_green");
            let mut t = Table::new(
                "summary",
                "Green function fit A r^slope + B on the trace",
                &[
                    "slope",
                    "expected_slope",
                    "slope_rel_error",
                    "constant",
                    "green_const",
                    "constant_rel_error",
                    "offset",
                    "misfit",
                    "samples",
                ],
            );
            t.push(vec![
                fit.slope.into(),
                (-m).into(),
                slope_err.into(),
                fit.constant.into(),
                g.into(),
                const_err.into(),
                fit.offset.into(),
                fit.misfit.into(),
                fit.samples.into(),
            ]);
            r.tables.push(t);
            r.check(slope_err <= tol, format!("slope off by {slope_err:e}"));
            r.check(const_err <= 0.05, format!("constant off by {const_err:e}"));
            r.tables.push(grid_table("grid", "Green function", &grid, &u));
            Ok(r)
        }
        SolveKind::Lambda1 {
            index: ix,
            radii,
            resolution,
        } => {
            let idx = index(s, &ix, Some(3), Some(0.5))?;
            let radii = parse_list(&s.config.get_or("radii", radii, "0.5,1,2".to_string())?)?;
            let res = s.config.get_or("resolution", resolution, 32usize)?;
            let tol = s.tol.unwrap_or(1e-3);
            let mut r = Report::new("solve_lambda1");
            let mut t = Table::new(
                "eigenvalues",
                "first eigenvalue of the weighted Rayleigh quotient",
                &["radius", "lambda1", "lambda1_r2", "iterations"],
            );
            let mut scaled = Vec::new();
            for &rad in &radii {
                let l = rayleigh_lambda1(idx, rad, res)?;
                scaled.push(l.lambda * rad * rad);
                t.push(vec![rad.into(), l.lambda.into(), (l.lambda * rad * rad).into(), l.iterations.into()]);
                r.check(l.lambda > 0.0, format!("non-positive eigenvalue at R = {rad}"));
            }
            r.tables.push(t);
            let base = scaled.first().copied().unwrap_or(f64::NAN);
            let resid = scaled.iter().map(|v| rel(*v, base)).fold(0.0, f64::max);
            let mut t = Table::new("summary", "scaling law residual", &["max_rel_residual"]);
            t.push(vec![resid.into()]);
            r.tables.push(t);
            r.check(resid <= tol, format!("scaling residual {resid:e}"));
            Ok(r)
        }
        SolveKind::Linearized {
            index: ix,
            pi,
            eps_hat,
            extent,
            resolution,
        } => {
            let pi = parse_pi(&s.config.get_or("pi", pi, "tracefree:diag(1,-1,0)".to_string())?)?;
            let dim = pi.dim() as u32;
            let idx = index(s, &ix, Some(dim), Some(0.25))?;
            if idx.n() != dim {
                return Err(CliError::Usage(format!("pi is {dim} x {dim} but n = {}", idx.n())));
            }
            let eps = s.config.get_or("eps_hat", eps_hat, LINEARIZED_EPS_HAT)?;
            let extent = s.config.get_or("extent", extent, LINEARIZED_EXTENT)?;
            let res = s.config.get_or("resolution", resolution, LINEARIZED_RESOLUTION)?;
            let tol = s.tol.unwrap_or(1e-3);
            let sol = solve_linearized(idx, &pi, eps, extent, res)?;
            let d = sol.diagnostics;
            let mut r = Report::new("solve_linearized");
            let mut t = Table::new(
                "summary",
                "linearised correction diagnostics",
                &[
                    "orth_energy",
                    "orth_trace",
                    "value_at_origin",
                    "grad_at_origin",
                    "envelope",
                    "energy",
                    "iterations",
                    "relative_residual",
                ],
            );
            t.push(vec![
                d.orth_energy.into(),
                d.orth_trace.into(),
                d.value_at_origin.into(),
                d.grad_at_origin.into(),
                d.envelope.into(),
                d.energy.into(),
                sol.stats.iterations.into(),
                sol.stats.relative_residual.into(),
            ]);
            r.tables.push(t);
            r.check(d.orth_energy <= tol, format!("energy orthogonality {:e}", d.orth_energy));
            r.check(d.orth_trace <= tol, format!("trace orthogonality {:e}", d.orth_trace));
            r.tables.push(grid_table("profile", "meridian profile psi", &sol.grid, &sol.profile));
            Ok(r)
        }
    }
}
