//! Finite-volume solvers for `-div(x_N^{1-2 gamma} grad U)` on meridian half
//! boxes and half balls: extension problems, the first Dirichlet eigenvalue,
//! the Green function of the trace operator and the linearised correction
//! driven by a trace-free second fundamental form.

mod grid;
mod operator;
mod pcg;

pub use grid::{GridFunction, WeightedGrid};
pub use operator::FvOperator;
pub use pcg::{pcg, SolveStats};

use crate::bubble::{trace_bubble, Bubble, BubbleParams, HalfSpacePoint};
use crate::error::{Error, Result};
use crate::specfun::{constants, sphere_area, ProblemIndex};
use crate::tensor::SymmetricTensor;

/// Relative residual for the linear solves.
pub const SOLVE_TOL: f64 = 1e-11;

/// Defaults for the linearised problem: cutoff scale, box size and
/// intervals per axis (step 1/8).
pub const LINEARIZED_EPS_HAT: f64 = 0.25;
pub const LINEARIZED_EXTENT: f64 = 16.0;
pub const LINEARIZED_RESOLUTION: usize = 128;

/// Cell averages of `-div(y^a grad U)` for an axially symmetric `U` sampled
/// on `grid`, at interior nodes (`0 < y < y_max`, `r < r_max`); other nodes
/// are `NaN`.
pub fn apply_operator(grid: &WeightedGrid, field: &GridFunction) -> Result<GridFunction> {
    field.check_shape(grid)?;
    let op = FvOperator::new(*grid, 0)?;
    let mut out = grid.zeros();
    op.apply_all(&field.data, &mut out.data);
    let (nr, ny) = (grid.nr(), grid.ny());
    for i in 0..=nr {
        for j in 0..=ny {
            let k = grid.at(i, j);
            if j == 0 || j == ny || i == nr {
                out.data[k] = f64::NAN;
            } else {
                out.data[k] /= op.radial[i] * grid.hy();
            }
        }
    }
    Ok(out)
}

/// Exact flat values of `-div(y^a grad .)` on `|x|^{-mu}` and on
/// `y^{2 gamma} |x|^{-(mu + 2 gamma)}`.
pub fn barrier_values(idx: ProblemIndex, mu: f64, x: &HalfSpacePoint) -> Result<[f64; 2]> {
    let rho = x.radial().hypot(x.y());
    if rho == 0.0 {
        return Err(Error::domain("barrier values are singular at the origin"));
    }
    let g = idx.gamma();
    let m = idx.decay();
    let ya = x.y().powf(idx.weight_exponent());
    let first = ya * mu * (m - mu) * rho.powf(-(mu + 2.0));
    let second = ya * (mu + 2.0 * g) * (idx.nf() - mu) * rho.powf(-(mu + 2.0)) * (x.y() / rho).powf(2.0 * g);
    Ok([first, second])
}

/// Weighted-harmonic extension of `trace` into the half box, with `far`
/// prescribing values on `r = r_max` and `y = y_max`.
pub fn solve_extension(
    grid: &WeightedGrid,
    trace: impl Fn(f64) -> f64,
    far: impl Fn(f64, f64) -> f64,
) -> Result<(GridFunction, SolveStats)> {
    let mut op = FvOperator::new(*grid, 0)?;
    op.fix_trace();
    op.fix_far_faces();
    let mut u = grid.zeros();
    for i in 0..=grid.nr() {
        for j in 0..=grid.ny() {
            let k = grid.at(i, j);
            if j == 0 {
                u.data[k] = trace(grid.r(i));
            } else if op.is_fixed(k) {
                u.data[k] = far(grid.r(i), grid.y(j));
            }
        }
    }
    let b = vec![0.0; grid.len()];
    let st = op.solve(&b, &mut u, SOLVE_TOL)?;
    Ok((u, st))
}

/// Refinement study of the bubble extension on `[0, extent]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionStudy {
    pub steps: Vec<f64>,
    /// Max error against the Fourier-Bessel extension over the nodes of the
    /// coarsest grid, which every refinement contains.
    pub errors: Vec<f64>,
    /// `log2(e_k / e_{k+1})` for consecutive refinements.
    pub orders: Vec<f64>,
    /// Max over trace nodes with `|xbar| <= 3` of `|kappa flux / w^p - 1|` on
    /// the finest grid.
    pub neumann_ratio_error: f64,
    /// Finest grid and its solution.
    pub grid: WeightedGrid,
    pub solution: GridFunction,
}

pub fn extension_study(idx: ProblemIndex, extent: f64, coarse: usize, levels: usize) -> Result<ExtensionStudy> {
    if levels < 2 {
        return Err(Error::domain("a refinement study needs at least two grids"));
    }
    let bubble = Bubble::new(idx)?;
    let kappa = constants(idx).kappa;
    let p = idx.critical_exponent();
    let unit = BubbleParams::standard(idx.n());
    let mut xbar = vec![0.0; idx.n() as usize];
    let mut trace = |r: f64| {
        xbar[0] = r;
        trace_bubble(idx, &unit, &xbar)
    };
    let base = WeightedGrid::new(idx, extent, extent, coarse, coarse)?;
    let exact = base.sample(|r, y| if y == 0.0 { f64::NAN } else { bubble.value(r, y) });
    let mut grid = base;
    let mut steps = Vec::new();
    let mut errors = Vec::new();
    let mut neumann = f64::NAN;
    let mut finest = base.zeros();
    for level in 0..levels {
        let w: Vec<f64> = (0..=grid.nr()).map(|i| trace(grid.r(i))).collect::<Result<_>>()?;
        let hr = grid.hr();
        let (u, _) = solve_extension(&grid, |r| w[(r / hr).round() as usize], |r, y| bubble.value(r, y))?;
        let stride = 1usize << level;
        let mut err = 0.0f64;
        for i in 0..=coarse {
            for j in 1..=coarse {
                err = err.max((u.get(i * stride, j * stride) - exact.get(i, j)).abs());
            }
        }
        steps.push(grid.hr());
        errors.push(err);
        if level + 1 == levels {
            let op = FvOperator::new(grid, 0)?;
            let flux = op.trace_fluxes(&u);
            neumann = (0..=grid.nr())
                .filter(|&i| grid.r(i) <= 3.0)
                .map(|i| (kappa * flux[i] / w[i].powf(p) - 1.0).abs())
                .fold(0.0, f64::max);
            finest = u;
            break;
        }
        grid = grid.refined();
    }
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(ExtensionStudy {
        steps,
        errors,
        orders,
        neumann_ratio_error: neumann,
        grid,
        solution: finest,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda1 {
    pub radius: f64,
    pub lambda: f64,
    pub iterations: usize,
}

/// Smallest eigenvalue of `int y^a |grad U|^2 / int y^a U^2` over fields
/// vanishing on the half sphere `|x| = radius`, free on the trace face.
/// `resolution` is the number of intervals per radius on each axis.
pub fn rayleigh_lambda1(idx: ProblemIndex, radius: f64, resolution: usize) -> Result<Lambda1> {
    if !(radius > 0.0) {
        return Err(Error::domain("radius must be positive"));
    }
    let grid = WeightedGrid::new(idx, radius, radius, resolution, resolution)?;
    let mut op = FvOperator::new(grid, 0)?;
    op.cut_half_ball(radius);
    let len = grid.len();
    let free: Vec<bool> = (0..len).map(|k| !op.is_fixed(k)).collect();
    let mut u: Vec<f64> = (0..len)
        .map(|k| {
            let (i, j) = (k / (grid.ny() + 1), k % (grid.ny() + 1));
            if free[k] {
                1.0 - (grid.r(i).hypot(grid.y(j)) / radius).powi(2)
            } else {
                0.0
            }
        })
        .collect();
    let rayleigh = |u: &[f64]| {
        let num = op.energy(u);
        let den: f64 = u.iter().zip(&op.mass).map(|(v, m)| v * v * m).sum();
        num / den
    };
    let mut lambda = rayleigh(&u);
    for it in 1..=200 {
        let b: Vec<f64> = (0..len).map(|k| if free[k] { op.mass[k] * u[k] } else { 0.0 }).collect();
        let (next, _) = op.solve_homogeneous(&b, 1e-12)?;
        let norm = next.data.iter().zip(&op.mass).map(|(v, m)| v * v * m).sum::<f64>().sqrt();
        u = next.data.iter().map(|v| v / norm).collect();
        let l = rayleigh(&u);
        if (l - lambda).abs() <= 1e-12 * l {
            return Ok(Lambda1 {
                radius,
                lambda: l,
                iterations: it,
            });
        }
        lambda = l;
    }
    Err(Error::numeric("rayleigh_lambda1", format!("inverse iteration stalled at {lambda:e}")))
}

/// Fit of `G(r, 0) = A r^{-s} + B` on a trace annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenFit {
    /// `-s`.
    pub slope: f64,
    /// `A`.
    pub constant: f64,
    /// `B`, absorbing the Dirichlet truncation.
    pub offset: f64,
    /// Max relative misfit over the annulus.
    pub misfit: f64,
    pub samples: usize,
}

/// Green function of the trace operator on the half ball of radius `radius`
/// (zero on the half sphere) with a smooth bump of width `width` and total
/// mass `mass` as boundary source. Returns the grid and the solution.
pub fn solve_green(
    idx: ProblemIndex,
    radius: f64,
    width: f64,
    resolution: usize,
    mass: f64,
) -> Result<(WeightedGrid, GridFunction)> {
    if !(width > 0.0 && width < radius) {
        return Err(Error::domain("mollifier width must lie in (0, radius)"));
    }
    let grid = WeightedGrid::new(idx, radius, radius, resolution, resolution)?;
    let mut op = FvOperator::new(grid, 0)?;
    op.cut_half_ball(radius);
    let kappa = constants(idx).kappa;
    let area = sphere_area(idx.n());
    let bump = |r: f64| {
        let s = r / width;
        if s < 1.0 {
            (-1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    };
    // discrete mass sum_i |S| R_i f_i = mass
    let total: f64 = (0..=grid.nr()).map(|i| area * op.radial[i] * bump(grid.r(i))).sum();
    if total == 0.0 {
        return Err(Error::domain("mollifier narrower than the grid step"));
    }
    let mut b = vec![0.0; grid.len()];
    for i in 0..=grid.nr() {
        let k = grid.at(i, 0);
        if !op.is_fixed(k) {
            b[k] = op.radial[i] * mass * bump(grid.r(i)) / total / kappa;
        }
    }
    let (u, _) = op.solve_homogeneous(&b, SOLVE_TOL)?;
    Ok((grid, u))
}

/// Decay exponent and constant of the Green function from the trace values
/// on `[4 width, radius / 4]`.
pub fn green_asymptotics(idx: ProblemIndex, radius: f64, width: f64, resolution: usize) -> Result<GreenFit> {
    check_green(idx, radius, width)?;
    let (grid, u) = solve_green(idx, radius, width, resolution, 1.0)?;
    green_fit(idx, width, &grid, &u)
}

fn check_green(idx: ProblemIndex, radius: f64, width: f64) -> Result<()> {
    if idx.nf() < 2.0 + 2.0 * idx.gamma() {
        return Err(Error::domain("Green asymptotics need n >= 2 + 2 gamma"));
    }
    let (lo, hi) = (4.0 * width, radius / 4.0);
    if !(lo < hi) {
        return Err(Error::domain(format!("fit annulus [{lo}, {hi}] is empty")));
    }
    Ok(())
}

/// Fit of a solution from [`solve_green`] on a grid spanning the half ball.
pub fn green_fit(idx: ProblemIndex, width: f64, grid: &WeightedGrid, u: &GridFunction) -> Result<GreenFit> {
    u.check_shape(grid)?;
    let radius = grid.r_max();
    check_green(idx, radius, width)?;
    let (lo, hi) = (4.0 * width, radius / 4.0);
    let pts: Vec<(f64, f64)> = (0..=grid.nr())
        .map(|i| (grid.r(i), u.get(i, 0)))
        .filter(|&(r, _)| r >= lo && r <= hi)
        .collect();
    if pts.len() < 8 {
        return Err(Error::domain(format!("only {} grid nodes in the fit annulus", pts.len())));
    }
    Ok(fit_power_offset(&pts, idx.decay()))
}

/// Relative least squares for `A r^{-s} + B`; linear in `(A, B)` for fixed
/// `s`, golden section in `s` on `[s0/2, 3 s0/2]`.
fn fit_power_offset(pts: &[(f64, f64)], s0: f64) -> GreenFit {
    let solve_ab = |s: f64| -> (f64, f64, f64) {
        // minimise sum ((A r^-s + B - g) / g)^2
        let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(r, g) in pts {
            let x1 = r.powf(-s) / g;
            let x2 = 1.0 / g;
            s11 += x1 * x1;
            s12 += x1 * x2;
            s22 += x2 * x2;
            t1 += x1;
            t2 += x2;
        }
        let det = s11 * s22 - s12 * s12;
        let a = (t1 * s22 - t2 * s12) / det;
        let b = (s11 * t2 - s12 * t1) / det;
        let res: f64 = pts.iter().map(|&(r, g)| ((a * r.powf(-s) + b - g) / g).powi(2)).sum();
        (a, b, res)
    };
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.5 * s0, 1.5 * s0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (solve_ab(x1).2, solve_ab(x2).2);
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = solve_ab(x1).2;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = solve_ab(x2).2;
        }
        if hi - lo < 1e-12 * s0 {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    let (a, b, _) = solve_ab(s);
    let misfit = pts
        .iter()
        .map(|&(r, g)| ((a * r.powf(-s) + b - g) / g).abs())
        .fold(0.0, f64::max);
    GreenFit {
        slope: -s,
        constant: a,
        offset: b,
        misfit,
        samples: pts.len(),
    }
}

/// Smooth cutoff, 1 on `[0, 1]` and 0 on `[2, inf)`.
pub fn cutoff(t: f64) -> f64 {
    let f = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let (p, q) = (f(2.0 - t), f(t - 1.0));
    p / (p + q)
}

/// Linearised correction `Psi = (xhat^T pi xhat) psi(r, y)`.
#[derive(Debug, Clone)]
pub struct LinearizedSolution {
    pub grid: WeightedGrid,
    pub pi: SymmetricTensor,
    pub eps_hat: f64,
    /// Meridian profile `psi`.
    pub profile: GridFunction,
    pub stats: SolveStats,
    pub diagnostics: LinearizedDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedDiagnostics {
    /// `|int y^a grad Psi . grad W|` over the product of the energy norms.
    pub orth_energy: f64,
    /// `|int w^p Psi|` over the product of the trace `L^2` norms.
    pub orth_trace: f64,
    /// `Psi(0)`; the profile vanishes on the axis.
    pub value_at_origin: f64,
    /// One-sided estimate of `|grad_xbar Psi(0)|`, first order in the step.
    pub grad_at_origin: f64,
    /// `sup |Psi| (1 + |x|^{n-2g-1}) / (eps_hat |pi|_inf)` over the grid.
    pub envelope: f64,
    /// Weighted Dirichlet energy of `Psi`.
    pub energy: f64,
}

impl LinearizedSolution {
    /// `Psi` at a point, bilinear in the profile.
    pub fn value(&self, xbar: &[f64], y: f64) -> f64 {
        let r = xbar.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return 0.0;
        }
        let xhat: Vec<f64> = xbar.iter().map(|v| v / r).collect();
        self.pi.quad(&xhat) * bilinear(&self.grid, &self.profile, r, y)
    }
}

fn bilinear(grid: &WeightedGrid, f: &GridFunction, r: f64, y: f64) -> f64 {
    if r > grid.r_max() || y > grid.y_max() {
        return 0.0;
    }
    let (sr, sy) = (r / grid.hr(), y / grid.hy());
    let i = (sr.floor() as usize).min(grid.nr() - 1);
    let j = (sy.floor() as usize).min(grid.ny() - 1);
    let (tr, ty) = (sr - i as f64, sy - j as f64);
    (1.0 - tr) * (1.0 - ty) * f.get(i, j)
        + tr * (1.0 - ty) * f.get(i + 1, j)
        + (1.0 - tr) * ty * f.get(i, j + 1)
        + tr * ty * f.get(i + 1, j + 1)
}

/// Solve `-div(y^a grad Psi) = y^a 2 eps_hat y chi(eps_hat |x|) pi_ij d_ij W`
/// with `-kappa lim y^a d_y Psi = p w^{p-1} Psi` on the trace and zero data on
/// the far faces of `[0, extent]^2`. For trace-free `pi` the source is a
/// degree-2 harmonic times a meridian function, so one `l = 2` solve gives
/// `Psi`. That mode is orthogonal to `Z^0, ..., Z^n` and vanishes to second
/// order at the origin, so the projection onto the kernel has zero
/// coefficients.
pub fn solve_linearized(
    idx: ProblemIndex,
    pi: &SymmetricTensor,
    eps_hat: f64,
    extent: f64,
    resolution: usize,
) -> Result<LinearizedSolution> {
    if pi.dim() != idx.n() as usize {
        return Err(Error::domain(format!("tensor dimension {} does not match n = {}", pi.dim(), idx.n())));
    }
    if !pi.is_trace_free() {
        return Err(Error::domain("second fundamental form must be trace free"));
    }
    if !idx.integrals_converge() {
        return Err(Error::domain("linearised problem needs n > 2 + 2 gamma"));
    }
    if !(eps_hat > 0.0) {
        return Err(Error::domain("eps_hat must be positive"));
    }
    let grid = WeightedGrid::new(idx, extent, extent, resolution, resolution)?;
    let bubble = Bubble::new(idx)?;
    let kappa = constants(idx).kappa;
    let p = idx.critical_exponent();
    let a = idx.weight_exponent();
    let unit = BubbleParams::standard(idx.n());
    let mut xbar = vec![0.0; idx.n() as usize];
    let trace: Vec<f64> = (0..=grid.nr())
        .map(|i| {
            xbar[0] = grid.r(i);
            trace_bubble(idx, &unit, &xbar)
        })
        .collect::<Result<_>>()?;
    let hr = grid.hr();
    let w = |r: f64| trace[(r / hr).round() as usize];
    let mut op = FvOperator::new(grid, 2)?;
    op.fix_far_faces();
    op.add_trace_robin(|r| -p * w(r).powf(p - 1.0) / kappa);

    let hy = grid.hy();
    let scale = pi.max_abs();
    let mut b = vec![0.0; grid.len()];
    if scale > 0.0 {
        for i in 0..=grid.nr() {
            for j in 0..=grid.ny() {
                let k = grid.at(i, j);
                if op.is_fixed(k) {
                    continue;
                }
                let (lo, hi) = WeightedGrid::dual(j, hy, grid.ny());
                let m1 = (hi.powf(a + 2.0) - lo.powf(a + 2.0)) / (a + 2.0);
                let m2 = (hi.powf(a + 3.0) - lo.powf(a + 3.0)) / (a + 3.0);
                let yc = m2 / m1;
                let r = grid.r(i);
                let chi = cutoff(eps_hat * r.hypot(grid.y(j)));
                if chi == 0.0 {
                    continue;
                }
                b[k] = 2.0 * eps_hat * chi * bubble.traceless_hessian(r, yc) * op.radial[i] * m1;
            }
        }
    }
    let (profile, stats) = op.solve_homogeneous(&b, SOLVE_TOL)?;

    // angular factors over S^{n-1}
    let n = idx.nf();
    let area = sphere_area(idx.n());
    let s_y = pi.trace() * area / n;
    let s_yy = area * (2.0 * pi.square().trace() + pi.trace().powi(2)) / (n * (n + 2.0));

    let e_psi = s_yy * op.energy(&profile.data);
    let op0 = FvOperator::new(grid, 0)?;
    let wg = grid.sample(|r, y| if y == 0.0 { w(r) } else { bubble.value(r, y) });
    let mut aw = vec![0.0; grid.len()];
    op0.apply_all(&wg.data, &mut aw);
    let e_w = area * wg.data.iter().zip(&aw).map(|(u, v)| u * v).sum::<f64>();
    let cross: f64 = profile.data.iter().zip(&aw).map(|(u, v)| u * v).sum();
    let norm = |x: f64| if x > 0.0 { x } else { f64::INFINITY };
    let orth_energy = (s_y * cross).abs() / norm((e_psi * e_w).sqrt());

    let (mut tw, mut tww, mut tpp) = (0.0, 0.0, 0.0);
    for i in 0..=grid.nr() {
        let wp = w(grid.r(i)).powf(p);
        let ps = profile.get(i, 0);
        tw += op.radial[i] * wp * ps;
        tww += op.radial[i] * wp * wp;
        tpp += op.radial[i] * ps * ps;
    }
    let orth_trace = (s_y * tw).abs() / norm((area * tww * s_yy * tpp).sqrt());

    let ymax = pi.norm_sq().sqrt();
    let m1 = idx.decay() - 1.0;
    let mut env = 0.0f64;
    for i in 0..=grid.nr() {
        for j in 0..=grid.ny() {
            let rho = grid.r(i).hypot(grid.y(j));
            env = env.max(profile.get(i, j).abs() * ymax * (1.0 + rho.powf(m1)));
        }
    }
    let envelope = if scale > 0.0 { env / (eps_hat * scale) } else { 0.0 };
    let grad_at_origin = profile.get(1, 0).abs() * ymax / grid.hr();

    Ok(LinearizedSolution {
        grid,
        pi: pi.clone(),
        eps_hat,
        profile,
        stats,
        diagnostics: LinearizedDiagnostics {
            orth_energy,
            orth_trace,
            value_at_origin: 0.0,
            grad_at_origin,
            envelope,
            energy: e_psi,
        },
    })
}

#[cfg(test)]
mod tests;
