//! Local Pohozaev functional on half balls, the energy coefficient of the
//! second-fundamental-form expansion and the dimension gate.

use crate::bubble::{trace_bubble, Bubble, BubbleParams};
use crate::error::{Error, Result};
use crate::quad::tanh_sinh_rule;
use crate::specfun::{beta_fn, constants, sphere_area, ProblemIndex};

/// An axially symmetric function on the closed upper half space, sampled in
/// meridian coordinates `(r, y) = (|xbar|, x_N)`.
pub trait HalfBallField: Sync {
    /// `(U, dU/dr, dU/dy)` at `y > 0`.
    fn jet(&self, r: f64, y: f64) -> [f64; 3];
    /// `x_N^{1-2 gamma} dU/dy`; override when `U_y` is singular at the face.
    fn weighted_flux(&self, r: f64, y: f64, a: f64) -> f64 {
        y.powf(a) * self.jet(r, y)[2]
    }
    /// Trace `u` at `|xbar| = r`.
    fn trace(&self, r: f64) -> f64;
    /// Radius of the sampled half ball.
    fn max_radius(&self) -> f64 {
        f64::INFINITY
    }
}

/// The unit bubble extension `W_{1,0}`.
pub struct BubbleField {
    bubble: Bubble,
}

impl BubbleField {
    pub fn new(idx: ProblemIndex) -> Result<Self> {
        Ok(Self { bubble: Bubble::new(idx)? })
    }
}

impl HalfBallField for BubbleField {
    fn jet(&self, r: f64, y: f64) -> [f64; 3] {
        let j = self.bubble.jet(r, y);
        [j.w, j.w_r, j.w_y]
    }

    fn trace(&self, r: f64) -> f64 {
        let idx = self.bubble.index();
        let mut x = vec![0.0; idx.n() as usize];
        x[0] = r;
        trace_bubble(idx, &BubbleParams::standard(idx.n()), &x).unwrap_or(f64::NAN)
    }
}

/// `U = c1 |x|^{-m} + c2`.
pub struct PowerField {
    pub c1: f64,
    pub c2: f64,
    pub m: f64,
}

impl HalfBallField for PowerField {
    fn jet(&self, r: f64, y: f64) -> [f64; 3] {
        let rho2 = r * r + y * y;
        let p = rho2.powf(-0.5 * self.m);
        let d = -self.m * self.c1 * p / rho2;
        [self.c1 * p + self.c2, d * r, d * y]
    }

    fn trace(&self, r: f64) -> f64 {
        self.c1 * r.powf(-self.m) + self.c2
    }
}

/// `U = c`.
pub struct ConstantField(pub f64);

impl HalfBallField for ConstantField {
    fn jet(&self, _r: f64, _y: f64) -> [f64; 3] {
        [self.0, 0.0, 0.0]
    }

    fn trace(&self, _r: f64) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PohozaevReport {
    pub r: f64,
    /// Weighted half-sphere integral, before the factor `kappa`.
    pub surface_term: f64,
    /// `r/(p+1) oint_{|xbar|=r} f^{-delta} u^{p+1}`.
    pub boundary_term: f64,
    pub total: f64,
    /// `kappa oint x_N^{1-2g} (|t1|+|t2|+|t3|) + |boundary_term|`, a scale for
    /// judging cancellation in `total`.
    pub scale: f64,
    /// Gap between the rule and its half-resolution version.
    pub error: f64,
}

/// `int_{upper half sphere of radius r} x_N^{1-2 gamma} d sigma`.
pub fn half_sphere_weight_integral(idx: ProblemIndex, r: f64) -> f64 {
    let g = idx.gamma();
    r.powf(idx.nf() + 1.0 - 2.0 * g) * sphere_area(idx.n()) * 0.5 * beta_fn(1.0 - g, 0.5 * idx.nf())
}

const SPHERE_STEP: f64 = 1.0 / 32.0;

fn check_radius(field: &dyn HalfBallField, r: f64) -> Result<()> {
    if !(r > 0.0 && r <= field.max_radius()) {
        return Err(Error::domain(format!(
            "radius {r} outside the sampled half ball (0, {}]",
            field.max_radius()
        )));
    }
    Ok(())
}

/// Polar-angle product rule on the half sphere; returns the weighted integral
/// of the three surface terms and of their absolute values, at steps `h` and
/// `2h`.
fn surface_parts(idx: ProblemIndex, field: &dyn HalfBallField, r: f64, h: f64) -> (f64, f64) {
    let n = idx.nf();
    let a = idx.weight_exponent();
    let half_m = 0.5 * idx.decay();
    let mut total = 0.0;
    let mut abs = 0.0;
    for (theta, w) in tanh_sinh_rule(0.0, std::f64::consts::FRAC_PI_2, h) {
        let (c, s) = (theta.cos(), theta.sin());
        let meas = c.powf(n - 1.0);
        if meas == 0.0 {
            continue;
        }
        let (x, y) = (r * c, r * s);
        let [u, ur, _] = field.jet(x, y);
        let ya = y.powf(a);
        // weighted y-derivative stays finite at the face
        let flux = field.weighted_flux(x, y, a);
        let uy = field.jet(x, y)[2];
        let d_rho_w = ya * c * ur + s * flux;
        let d_rho = c * ur + s * uy;
        let t1 = half_m * u * d_rho_w;
        let t2 = -0.5 * r * (ya * ur * ur + flux * uy);
        let t3 = r * d_rho_w * d_rho;
        total += w * meas * (t1 + t2 + t3);
        abs += w * meas * (t1.abs() + t2.abs() + t3.abs());
    }
    let f = r.powf(n) * sphere_area(idx.n());
    (f * total, f * abs)
}

/// Local Pohozaev functional: `kappa` times the weighted half-sphere integral
/// of `(m/2) U d_rho U - (rho/2)|grad U|^2 + rho (d_rho U)^2`, plus
/// `r/(p+1) oint f^{-delta} u^{p+1}` over the boundary sphere `|xbar| = r`.
pub fn pohozaev_p(
    idx: ProblemIndex,
    field: &dyn HalfBallField,
    r: f64,
    p: f64,
    f: &dyn Fn(f64) -> f64,
    delta: f64,
) -> Result<PohozaevReport> {
    check_radius(field, r)?;
    let kappa = constants(idx).kappa;
    let (surface, abs) = surface_parts(idx, field, r, SPHERE_STEP);
    let (coarse, _) = surface_parts(idx, field, r, 2.0 * SPHERE_STEP);
    let u = field.trace(r);
    let boundary = r / (p + 1.0) * sphere_area(idx.n()) * r.powf(idx.nf() - 1.0) * f(r).powf(-delta) * u.powf(p + 1.0);
    if !(surface.is_finite() && boundary.is_finite()) {
        return Err(Error::numeric("pohozaev_p", format!("non-finite terms at r = {r}")));
    }
    Ok(PohozaevReport {
        r,
        surface_term: surface,
        boundary_term: boundary,
        total: kappa * surface + boundary,
        scale: kappa * abs + boundary.abs(),
        error: kappa * (surface - coarse).abs(),
    })
}

/// The `kappa` half-sphere part of the Pohozaev functional alone.
pub fn pohozaev_pprime(idx: ProblemIndex, field: &dyn HalfBallField, r: f64) -> Result<f64> {
    check_radius(field, r)?;
    let (surface, _) = surface_parts(idx, field, r, SPHERE_STEP);
    if !surface.is_finite() {
        return Err(Error::numeric("pohozaev_pprime", format!("non-finite surface term at r = {r}")));
    }
    Ok(constants(idx).kappa * surface)
}

/// Exact half-sphere part for `U = c1 |x|^{-m} + c2`: the `c1^2` terms cancel
/// and `-kappa c1 c2 (m^2/2) oint_{unit} x_N^{1-2g}` remains, for every `r`.
pub fn power_field_pprime(idx: ProblemIndex, c1: f64, c2: f64) -> f64 {
    let m = idx.decay();
    -constants(idx).kappa * c1 * c2 * 0.5 * m * m * half_sphere_weight_integral(idx, 1.0)
}

/// Reference value `-kappa c1^2 ((n-2g)/2) oint_{unit} x_N^{1-2g}`.
pub fn limit_value_reference(idx: ProblemIndex, c1: f64) -> f64 {
    -constants(idx).kappa * c1 * c1 * 0.5 * idx.decay() * half_sphere_weight_integral(idx, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientReport {
    pub n: u32,
    pub gamma: f64,
    /// Numerator `3n^2 + n(16g^2 - 22) + 20(1 - g^2)`.
    pub numerator: f64,
    pub c_value: f64,
    pub positive: bool,
    pub gate: bool,
    /// `n > 2 + 2 gamma`, where the bubble integrals and hence the
    /// coefficient are finite.
    pub in_domain: bool,
    /// `|numerator| < 1e-12`.
    pub boundary: bool,
}

pub fn coefficient_numerator(n: f64, g: f64) -> f64 {
    3.0 * n * n + n * (16.0 * g * g - 22.0) + 20.0 * (1.0 - g * g)
}

/// Smallest admissible dimension for a given order.
pub fn gate_min_dimension(gamma: f64) -> u32 {
    if gamma <= (1.0f64 / 19.0).sqrt() {
        7
    } else if gamma <= 0.5 {
        6
    } else if gamma <= (5.0f64 / 11.0).sqrt() {
        5
    } else {
        4
    }
}

pub fn dimension_gate(n: u32, gamma: f64) -> bool {
    n >= gate_min_dimension(gamma)
}

/// Closed-form energy coefficient `c = numerator / (8 n (n-1)(1-g^2))`.
pub fn coefficient(n: u32, gamma: f64) -> Result<CoefficientReport> {
    if n < 3 || !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!("coefficient needs n >= 3 and 0 < gamma < 1 (n = {n}, gamma = {gamma})")));
    }
    let nf = n as f64;
    let num = coefficient_numerator(nf, gamma);
    let c = num / (8.0 * nf * (nf - 1.0) * (1.0 - gamma * gamma));
    Ok(CoefficientReport {
        n,
        gamma,
        numerator: num,
        c_value: c,
        positive: c > 0.0,
        gate: dimension_gate(n, gamma),
        in_domain: nf > 2.0 + 2.0 * gamma,
        boundary: num.abs() < 1e-12,
    })
}

/// Energy coefficient from the three combined integrals
/// `(int y^{3-2g} lap W Z0, int y^{2-2g} W_y Z0, int y^{1-2g} W Z0)`,
/// normalised by `kappa C0`.
pub fn assemble_fhat(idx: ProblemIndex, combined: [f64; 3], c0: f64) -> f64 {
    let n = idx.nf();
    let [first, second, third] = combined;
    let f0 = -idx.decay() / (4.0 * (n - 1.0)) * third;
    let f1 = (4.0 * n - 5.0) / (2.0 * n * (n - 1.0)) * first;
    let f2 = second / (2.0 * (n - 1.0));
    (f0 - (f1 + f2)) / c0
}

/// `e^2 C1 - e^{2+eta} r^{2-eta} C2 - e^{n-2g} r^{-n+2g+1} C3 - e^n r^n C4 / (e^{2n} + r^{2n})`.
pub fn local_sign_bound(idx: ProblemIndex, eps_hat: f64, r: f64, cs: [f64; 4], eta: f64) -> Result<f64> {
    if !(eps_hat > 0.0 && r > 0.0 && eta > 0.0) {
        return Err(Error::domain("eps_hat, r and eta must be positive"));
    }
    let n = idx.nf();
    let m = idx.decay();
    let e = eps_hat;
    Ok(e * e * cs[0]
        - e.powf(2.0 + eta) * r.powf(2.0 - eta) * cs[1]
        - e.powf(m) * r.powf(1.0 - m) * cs[2]
        - e.powf(n) * r.powf(n) * cs[3] / (e.powf(2.0 * n) + r.powf(2.0 * n)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientScan {
    pub rows: Vec<CoefficientReport>,
    /// In-domain, non-boundary rows where sign and gate disagree.
    pub mismatches: Vec<CoefficientReport>,
    pub boundary: Vec<CoefficientReport>,
    /// Rows outside `n > 2 + 2 gamma` where sign and gate disagree.
    pub excluded_mismatches: usize,
}

impl CoefficientScan {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Sweep `n` in `n_range` and `gamma = k / steps`, `k = 1..steps-1`.
pub fn coefficient_scan(n_lo: u32, n_hi: u32, steps: u32) -> Result<CoefficientScan> {
    if n_lo < 3 || n_hi < n_lo || steps < 2 {
        return Err(Error::domain("scan needs 3 <= n_lo <= n_hi and at least two gamma steps"));
    }
    let mut rows = Vec::new();
    for n in n_lo..=n_hi {
        for k in 1..steps {
            rows.push(coefficient(n, k as f64 / steps as f64)?);
        }
    }
    let boundary: Vec<_> = rows.iter().filter(|r| r.boundary).copied().collect();
    let disagree = |r: &&CoefficientReport| !r.boundary && r.positive != r.gate;
    let mismatches: Vec<_> = rows.iter().filter(disagree).filter(|r| r.in_domain).copied().collect();
    let excluded_mismatches = rows.iter().filter(disagree).filter(|r| !r.in_domain).count();
    Ok(CoefficientScan {
        rows,
        mismatches,
        boundary,
        excluded_mismatches,
    })
}
