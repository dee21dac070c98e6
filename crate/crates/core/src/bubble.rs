//! The standard bubble `w_{lambda,sigma}` on `R^n` and its weighted-harmonic
//! extension `W` to `R^{n+1}_+`.
//!
//! The extension is evaluated by inverting the Fourier transform
//! `W^(xi, y) = w^(|xi|) phi(|xi| y)` radially, with the unitary convention so
//! that Parseval carries no constant. For `|x| > 1` the standard extension is
//! evaluated through its Kelvin invariance `W(x) = |x|^{-(n-2 gamma)} W(x/|x|^2)`,
//! which keeps every Hankel integral at `|x| <= 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{gauss_kronrod, tanh_sinh_rule, GaussLegendre};
use crate::specfun::{constants, gamma_fn, profile_norm, sphere_area, Constants, ProblemIndex, Profile, ScaledJTriple};

/// Concentration `lambda > 0` and centre `sigma` in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleParams {
    lambda: f64,
    sigma: Vec<f64>,
}

impl BubbleParams {
    pub fn new(lambda: f64, sigma: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("lambda = {lambda} must be positive")));
        }
        if sigma.iter().any(|s| !s.is_finite()) {
            return Err(Error::domain("sigma must be finite"));
        }
        Ok(BubbleParams { lambda, sigma })
    }

    /// `lambda = 1`, `sigma = 0`.
    pub fn standard(n: u32) -> Self {
        BubbleParams {
            lambda: 1.0,
            sigma: vec![0.0; n as usize],
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Distance of `xbar` from the centre, in units of `lambda`.
    fn scaled_radius(&self, xbar: &[f64]) -> f64 {
        xbar.iter()
            .zip(&self.sigma)
            .map(|(x, s)| (x - s) * (x - s))
            .sum::<f64>()
            .sqrt()
            / self.lambda
    }
}

/// A point `(xbar, x_N)` of the closed half space.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpacePoint {
    xbar: Vec<f64>,
    y: f64,
}

impl HalfSpacePoint {
    pub fn new(xbar: Vec<f64>, y: f64) -> Result<Self> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::domain(format!("x_N = {y} must be non-negative")));
        }
        if xbar.iter().any(|s| !s.is_finite()) {
            return Err(Error::domain("xbar must be finite"));
        }
        Ok(HalfSpacePoint { xbar, y })
    }

    pub fn xbar(&self) -> &[f64] {
        &self.xbar
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn radial(&self) -> f64 {
        self.xbar.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionRoute {
    FourierBessel,
    PoissonKernel,
}

/// Value and derivatives up to order two of the standard extension in the
/// meridian coordinates `(r, y) = (|xbar|, x_N)`. `lap` is the Laplacian in
/// `xbar`, `w_rr + (n-1) w_r / r`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub w: f64,
    pub w_r: f64,
    pub w_y: f64,
    pub w_rr: f64,
    pub w_ry: f64,
    pub w_yy: f64,
    pub lap: f64,
}

fn check_dims(idx: ProblemIndex, len: usize, what: &str) -> Result<()> {
    if len != idx.n() as usize {
        return Err(Error::domain(format!(
            "{what} has dimension {len}, expected n = {}",
            idx.n()
        )));
    }
    Ok(())
}

/// `w_{lambda,sigma}(xbar) = alpha (lambda / (lambda^2 + |xbar - sigma|^2))^{(n - 2 gamma)/2}`.
pub fn trace_bubble(idx: ProblemIndex, p: &BubbleParams, xbar: &[f64]) -> Result<f64> {
    check_dims(idx, xbar.len(), "xbar")?;
    check_dims(idx, p.sigma.len(), "sigma")?;
    let alpha = constants(idx).alpha;
    let l = p.lambda;
    let d2: f64 = xbar.iter().zip(&p.sigma).map(|(x, s)| (x - s) * (x - s)).sum();
    Ok(alpha * (l / (l * l + d2)).powf(idx.decay() / 2.0))
}

#[derive(Debug, Clone, Copy)]
struct HankelNode {
    k: f64,
    s: f64,
}

/// Cutoff on the Hankel variable beyond which `w^(k) phi(k y)` is below
/// roughly `e^{-72}` of its peak.
const K_CUT: f64 = 72.0;

/// Evaluator of the standard bubble extension for one problem index.
#[derive(Debug, Clone)]
pub struct Bubble {
    idx: ProblemIndex,
    consts: Constants,
    profile: Profile,
    d2: f64,
    nodes: Vec<HankelNode>,
    jtab: ScaledJTriple,
}

impl Bubble {
    pub fn new(idx: ProblemIndex) -> Result<Self> {
        if idx.n() < 2 {
            return Err(Error::domain("the radial extension needs n >= 2"));
        }
        let profile = Profile::new(idx.gamma())?;
        let consts = constants(idx);
        let nu = (idx.nf() - 2.0) / 2.0;
        let jtab = ScaledJTriple::new(nu);
        let mut nodes: Vec<HankelNode> = tanh_sinh_rule(0.0, 2.0, 1.0 / 8.0)
            .into_iter()
            .map(|(k, w)| HankelNode { k, s: w })
            .collect();
        let gl = GaussLegendre::cached(16);
        let mut a = 2.0;
        while a < K_CUT {
            let b = a + 6.0;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push(HankelNode {
                    k: 0.5 * (a + b) + 3.0 * x,
                    s: 3.0 * w,
                });
            }
            a = b;
        }
        let mut bubble = Bubble {
            idx,
            consts,
            profile,
            d2: 1.0,
            nodes,
            jtab,
        };
        let n1 = idx.nf() - 1.0;
        // k^{n-1} w^(k) as one power: k^{-2 gamma} alone overflows near 0
        let norm = profile_norm(idx.gamma());
        let e = n1 - 2.0 * idx.gamma();
        let weights: Vec<f64> = bubble
            .nodes
            .iter()
            .map(|nd| nd.k.powf(e) * bubble.profile.eval(nd.k).0 / norm)
            .collect();
        for (node, w) in bubble.nodes.iter_mut().zip(weights) {
            node.s *= w;
        }
        // Calibrate d2 so that W(0, 0) = w(0) = alpha.
        let raw: f64 = bubble.nodes.iter().map(|nd| nd.s).sum::<f64>() * bubble.jtab.eval(0.0).l0;
        let scale = consts.alpha / raw;
        bubble.d2 = scale;
        for node in &mut bubble.nodes {
            node.s *= scale;
        }
        Ok(bubble)
    }

    pub fn index(&self) -> ProblemIndex {
        self.idx
    }

    pub fn constants(&self) -> Constants {
        self.consts
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Calibrated Fourier normalisation `d2`.
    pub fn d2(&self) -> f64 {
        self.d2
    }

    /// Closed form of `d2` for the unitary transform:
    /// `alpha 2^{1-s} / Gamma(s)`, `s = (n - 2 gamma)/2`.
    pub fn d2_closed_form(idx: ProblemIndex) -> f64 {
        let s = idx.decay() / 2.0;
        constants(idx).alpha * 2f64.powf(1.0 - s) / gamma_fn(s)
    }

    /// Fourier profile `w^(k) = d2 k^{-gamma} K_gamma(k)`.
    pub fn hat_w(&self, k: f64) -> f64 {
        let g = self.idx.gamma();
        let (phi, _) = self.profile.eval(k);
        self.d2 / profile_norm(g) * k.powf(-2.0 * g) * phi
    }

    /// `w^'(k) = -d2 k^{-gamma} K_{gamma+1}(k)`.
    pub fn hat_w_deriv(&self, k: f64) -> f64 {
        let g = self.idx.gamma();
        let (phi, dphi) = self.profile.eval(k);
        self.d2 / profile_norm(g) * k.powf(-2.0 * g) * (dphi - 2.0 * g * phi / k)
    }

    fn k_limit(y: f64) -> f64 {
        K_CUT / (1.0 + y)
    }

    /// Standard extension only (no derivatives) at `|x| <= 1`.
    fn inner_value(&self, r: f64, y: f64) -> f64 {
        let kmax = Self::k_limit(y);
        let mut w = 0.0;
        for nd in self.nodes.iter().take_while(|nd| nd.k <= kmax) {
            let phi = if y == 0.0 { 1.0 } else { self.profile.eval(nd.k * y).0 };
            w += nd.s * phi * self.jtab.eval(nd.k * r).l0;
        }
        w
    }

    /// Full jet at `|x| <= 1`, `y > 0`.
    fn inner_jet(&self, r: f64, y: f64) -> Jet {
        let n = self.idx.nf();
        let a = self.idx.weight_exponent();
        let kmax = Self::k_limit(y);
        let (mut w, mut wy, mut wyy, mut a1, mut b1, mut lap) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for nd in self.nodes.iter().take_while(|nd| nd.k <= kmax) {
            let k = nd.k;
            let t = k * y;
            // k y underflows for the innermost nodes; their derivative terms
            // k phi'(k y), k^2 phi''(k y) vanish in the limit.
            let (phi, dphi) = if t == 0.0 { (1.0, 0.0) } else { self.profile.eval(t) };
            let ddphi = if a == 0.0 || t == 0.0 { phi } else { phi - a * dphi / t };
            let j = self.jtab.eval(k * r);
            let k2 = k * k;
            w += nd.s * phi * j.l0;
            wy += nd.s * k * dphi * j.l0;
            wyy += nd.s * k2 * ddphi * j.l0;
            a1 += nd.s * k2 * phi * j.l1;
            b1 += nd.s * k2 * k * dphi * j.l1;
            lap += nd.s * k2 * phi * j.l0;
        }
        Jet {
            w,
            w_r: -r * a1,
            w_y: wy,
            w_rr: -lap + (n - 1.0) * a1,
            w_ry: -r * b1,
            w_yy: wyy,
            lap: -lap,
        }
    }

    /// `W_rr - W_r / r` of the standard extension at `|x| <= 1`.
    fn inner_traceless_hessian(&self, r: f64, y: f64) -> f64 {
        let kmax = Self::k_limit(y);
        let mut acc = 0.0;
        for nd in self.nodes.iter().take_while(|nd| nd.k <= kmax) {
            let phi = if y == 0.0 { 1.0 } else { self.profile.eval(nd.k * y).0 };
            let k2 = nd.k * nd.k;
            acc += nd.s * k2 * k2 * phi * self.jtab.eval(nd.k * r).l2;
        }
        r * r * acc
    }

    /// Standard extension `W_{1,0}` at meridian coordinates `(r, y)`.
    pub fn value(&self, r: f64, y: f64) -> f64 {
        let rho2 = r * r + y * y;
        if rho2 <= 1.0 {
            self.inner_value(r, y)
        } else {
            rho2.powf(-self.idx.decay() / 2.0) * self.inner_value(r / rho2, y / rho2)
        }
    }

    /// Jet of the standard extension at `(r, y)`, `y > 0`.
    pub fn jet(&self, r: f64, y: f64) -> Jet {
        let rho2 = r * r + y * y;
        if rho2 <= 1.0 {
            self.inner_jet(r, y)
        } else {
            let star = self.inner_jet(r / rho2, y / rho2);
            kelvin_jet(&star, r, y, self.idx.decay(), self.idx.nf())
        }
    }

    /// Jets at `(r, y)` and at its Kelvin image `(r, y)/(r^2 + y^2)`, both
    /// from a single Hankel evaluation at the point inside the unit ball.
    pub fn jet_pair(&self, r: f64, y: f64) -> (Jet, Jet) {
        let rho2 = r * r + y * y;
        let inner = self.jet(r, y);
        let outer = kelvin_jet(&inner, r / rho2, y / rho2, self.idx.decay(), self.idx.nf());
        (inner, outer)
    }

    /// `W_rr - W_r / r`, the coefficient of the trace-free part of the
    /// `xbar` Hessian of the standard extension.
    pub fn traceless_hessian(&self, r: f64, y: f64) -> f64 {
        let rho2 = r * r + y * y;
        if rho2 <= 1.0 {
            self.inner_traceless_hessian(r, y)
        } else {
            let j = self.jet(r, y);
            if r == 0.0 {
                return 0.0;
            }
            j.w_rr - j.w_r / r
        }
    }

    fn poisson_value(&self, r: f64, y: f64) -> Result<f64> {
        let n = self.idx.nf();
        let g = self.idx.gamma();
        let alpha = self.consts.alpha;
        let m = self.idx.decay();
        if y == 0.0 {
            return Ok(alpha * (1.0 + r * r).powf(-m / 2.0));
        }
        let pconst = gamma_fn((n + 2.0 * g) / 2.0) / (PI.powf(n / 2.0) * gamma_fn(g));
        let expo = (n + 2.0 * g) / 2.0;
        let y2g = y.powf(2.0 * g);
        let inner = |rho: f64| -> f64 {
            let f = |th: f64| {
                let d = r * r + rho * rho - 2.0 * r * rho * th.cos() + y * y;
                th.sin().powf(n - 2.0) * d.powf(-expo)
            };
            let mut total = 0.0;
            // Split off the peak at theta = 0 when rho is close to r.
            let cut = (4.0 * y / r.max(1e-300)).min(PI);
            for (lo, hi) in [(0.0, cut), (cut, PI)] {
                if hi > lo {
                    total += gauss_kronrod(f, lo, hi, 0.0, 1e-12).map(|e| e.value).unwrap_or(f64::NAN);
                }
            }
            alpha * (1.0 + rho * rho).powf(-m / 2.0) * rho.powf(n - 1.0) * total
        };
        let rho0 = r + 4.0 * y + 1.0;
        let mut total = 0.0;
        let breaks = [0.0, (r - 4.0 * y).max(0.0), r, r + 4.0 * y, rho0];
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                total += gauss_kronrod(inner, w[0], w[1], 0.0, 1e-11)?.value;
            }
        }
        total += gauss_kronrod(
            |u: f64| if u == 0.0 { 0.0 } else { inner(rho0 / u) * rho0 / (u * u) },
            0.0,
            1.0,
            0.0,
            1e-11,
        )?
        .value;
        if !total.is_finite() {
            return Err(Error::numeric("poisson extension", "inner integral failed"));
        }
        Ok(pconst * sphere_area(self.idx.n() - 1) * y2g * total)
    }

    /// `W_{lambda,sigma}(x)` along the requested route.
    pub fn extension(&self, p: &BubbleParams, x: &HalfSpacePoint, route: ExtensionRoute) -> Result<f64> {
        check_dims(self.idx, x.xbar.len(), "xbar")?;
        check_dims(self.idx, p.sigma.len(), "sigma")?;
        let l = p.lambda;
        let r = p.scaled_radius(&x.xbar);
        let y = x.y / l;
        let scale = l.powf(-self.idx.decay() / 2.0);
        let v = match route {
            ExtensionRoute::FourierBessel => self.value(r, y),
            ExtensionRoute::PoissonKernel => self.poisson_value(r, y)?,
        };
        Ok(scale * v)
    }

    /// `-kappa lim_{x_N -> 0} x_N^{1-2gamma} d_N W_{lambda,sigma}` by Richardson
    /// extrapolation of the difference quotient
    /// `2 gamma h^{-2 gamma} (W(h) - W(0))`.
    pub fn neumann_trace(&self, p: &BubbleParams, xbar: &[f64]) -> Result<f64> {
        check_dims(self.idx, xbar.len(), "xbar")?;
        check_dims(self.idx, p.sigma.len(), "sigma")?;
        let g = self.idx.gamma();
        let r = p.scaled_radius(xbar);
        let base = self.value(r, 0.0);
        let h0 = 0.04;
        let q: Vec<f64> = (0..4)
            .map(|i| {
                let h = h0 / 2f64.powi(i);
                2.0 * g * h.powf(-2.0 * g) * (self.value(r, h) - base)
            })
            .collect();
        let limit = richardson(&q, &[2.0 - 2.0 * g, 2.0, 4.0 - 2.0 * g]);
        let scale = p.lambda.powf(-(self.idx.nf() + 2.0 * g) / 2.0);
        let out = -self.consts.kappa * limit * scale;
        if !out.is_finite() {
            return Err(Error::numeric("neumann_trace", "extrapolation produced a non-finite value"));
        }
        Ok(out)
    }

    /// Jacobi field `Z^j` at `x` by central differences of the extension in
    /// `(lambda, sigma)`: `Z^0 = -d_lambda W`, `Z^i = -d_{sigma_i} W`.
    pub fn jacobi_field(&self, j: usize, x: &HalfSpacePoint) -> Result<f64> {
        let n = self.idx.n() as usize;
        if j > n {
            return Err(Error::domain(format!("Jacobi index {j} exceeds n = {n}")));
        }
        check_dims(self.idx, x.xbar.len(), "xbar")?;
        let h = 1e-4;
        let eval = |p: BubbleParams| self.extension(&p, x, ExtensionRoute::FourierBessel);
        let (plus, minus) = if j == 0 {
            (
                BubbleParams::new(1.0 + h, vec![0.0; n])?,
                BubbleParams::new(1.0 - h, vec![0.0; n])?,
            )
        } else {
            let mut sp = vec![0.0; n];
            let mut sm = vec![0.0; n];
            sp[j - 1] = h;
            sm[j - 1] = -h;
            (BubbleParams::new(1.0, sp)?, BubbleParams::new(1.0, sm)?)
        };
        Ok(-(eval(plus)? - eval(minus)?) / (2.0 * h))
    }

    /// Jacobi field from the analytic jet: `Z^0 = x . grad W + (n-2gamma)/2 W`,
    /// `Z^i = d_i W`.
    pub fn jacobi_field_exact(&self, j: usize, x: &HalfSpacePoint) -> Result<f64> {
        let n = self.idx.n() as usize;
        if j > n {
            return Err(Error::domain(format!("Jacobi index {j} exceeds n = {n}")));
        }
        check_dims(self.idx, x.xbar.len(), "xbar")?;
        let r = x.radial();
        if x.y == 0.0 {
            return Err(Error::domain("exact Jacobi fields are evaluated off the boundary"));
        }
        let jet = self.jet(r, x.y);
        Ok(if j == 0 {
            r * jet.w_r + x.y * jet.w_y + 0.5 * self.idx.decay() * jet.w
        } else if r == 0.0 {
            0.0
        } else {
            jet.w_r * x.xbar[j - 1] / r
        })
    }
}

/// Jet of `|P|^{-m} W(P / |P|^2)` at `P = (r, y)` from the jet of `W` at the
/// image point. The map is an involution, so it also runs backwards.
pub(crate) fn kelvin_jet(star: &Jet, r: f64, y: f64, m: f64, n: f64) -> Jet {
    let p = [r, y];
    let rho2 = r * r + y * y;
    let inv = 1.0 / rho2;
    // DT = (I - 2 P P^T / rho^2) / rho^2
    let dt = |i: usize, j: usize| {
        let d = if i == j { 1.0 } else { 0.0 };
        (d - 2.0 * p[i] * p[j] * inv) * inv
    };
    let g = [star.w_r, star.w_y];
    let h = [[star.w_rr, star.w_ry], [star.w_ry, star.w_yy]];
    // Gradient and Hessian of W o T.
    let mut grad = [0.0; 2];
    for i in 0..2 {
        for k in 0..2 {
            grad[i] += dt(k, i) * g[k];
        }
    }
    let mut hess = [[0.0; 2]; 2];
    let inv2 = inv * inv;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    s += dt(k, i) * h[k][l] * dt(l, j);
                }
            }
            for k in 0..2 {
                let dik = if i == k { 1.0 } else { 0.0 };
                let djk = if j == k { 1.0 } else { 0.0 };
                let dij = if i == j { 1.0 } else { 0.0 };
                let hk = -2.0 * (djk * p[i] + dik * p[j] + dij * p[k]) * inv2
                    + 8.0 * p[i] * p[j] * p[k] * inv2 * inv;
                s += g[k] * hk;
            }
            hess[i][j] = s;
        }
    }
    // f = rho^{-m}
    let f = rho2.powf(-m / 2.0);
    let df = [-m * f * inv * p[0], -m * f * inv * p[1]];
    let mut hf = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let dij = if i == j { 1.0 } else { 0.0 };
            hf[i][j] = -m * f * inv * dij + m * (m + 2.0) * f * inv2 * p[i] * p[j];
        }
    }
    let w = f * star.w;
    let vr = f * grad[0] + star.w * df[0];
    let vy = f * grad[1] + star.w * df[1];
    let second = |i: usize, j: usize| {
        f * hess[i][j] + df[i] * grad[j] + grad[i] * df[j] + star.w * hf[i][j]
    };
    let w_rr = second(0, 0);
    let lap = if r > 0.0 { w_rr + (n - 1.0) * vr / r } else { n * w_rr };
    Jet {
        w,
        w_r: vr,
        w_y: vy,
        w_rr,
        w_ry: second(0, 1),
        w_yy: second(1, 1),
        lap,
    }
}

/// Richardson extrapolation of `q_i = Q(h / 2^i)` with known error exponents.
fn richardson(q: &[f64], exponents: &[f64]) -> f64 {
    let mut col = q.to_vec();
    for &e in exponents.iter().take(q.len() - 1) {
        let f = 2f64.powf(e);
        col = col.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
    }
    col[0]
}

pub fn extension(
    idx: ProblemIndex,
    p: &BubbleParams,
    x: &HalfSpacePoint,
    route: ExtensionRoute,
) -> Result<f64> {
    Bubble::new(idx)?.extension(p, x, route)
}

pub fn neumann_trace(idx: ProblemIndex, p: &BubbleParams, xbar: &[f64]) -> Result<f64> {
    Bubble::new(idx)?.neumann_trace(p, xbar)
}

pub fn jacobi_field(idx: ProblemIndex, j: usize, x: &HalfSpacePoint) -> Result<f64> {
    Bubble::new(idx)?.jacobi_field(j, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(n: u32, g: f64) -> ProblemIndex {
        ProblemIndex::new(n, g).unwrap()
    }

    fn pt(xbar: Vec<f64>, y: f64) -> HalfSpacePoint {
        HalfSpacePoint::new(xbar, y).unwrap()
    }

    /// Harmonic extension for gamma = 1/2: alpha ((1+y)^2 + r^2)^{-(n-1)/2}.
    fn half_exact(n: u32, r: f64, y: f64) -> f64 {
        let a = constants(idx(n, 0.5)).alpha;
        a * ((1.0 + y) * (1.0 + y) + r * r).powf(-(n as f64 - 1.0) / 2.0)
    }

    #[test]
    fn trace_bubble_examples() {
        let i = idx(3, 0.5);
        let p = BubbleParams::standard(3);
        assert!((trace_bubble(i, &p, &[0.0; 3]).unwrap() - 2.0).abs() < 1e-14);
        assert!((trace_bubble(i, &p, &[1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_bubble(i, &p, &[0.0; 2]).is_err());
        assert!(BubbleParams::new(0.0, vec![0.0; 3]).is_err());
        assert!(HalfSpacePoint::new(vec![0.0; 3], -0.1).is_err());
    }

    #[test]
    fn calibrated_normalisation_matches_closed_form() {
        for &(n, g) in &[(3, 0.5), (4, 0.3), (5, 0.7), (7, 0.25)] {
            let b = Bubble::new(idx(n, g)).unwrap();
            let want = Bubble::d2_closed_form(idx(n, g));
            assert!((b.d2() - want).abs() < 1e-11 * want, "({n},{g}): {} vs {want}", b.d2());
        }
    }

    #[test]
    fn extension_matches_harmonic_closed_form() {
        for n in [3, 4, 6] {
            let b = Bubble::new(idx(n, 0.5)).unwrap();
            for &(r, y) in &[(0.0, 0.0), (0.0, 1.0), (0.5, 0.2), (1.3, 0.7), (4.0, 2.5), (30.0, 0.01)] {
                let got = b.value(r, y);
                let want = half_exact(n, r, y);
                assert!((got - want).abs() < 1e-11 * want, "n {n} ({r},{y}): {got} vs {want}");
            }
        }
        let b = Bubble::new(idx(3, 0.5)).unwrap();
        let w = b.extension(&BubbleParams::standard(3), &pt(vec![0.0; 3], 1.0), ExtensionRoute::FourierBessel);
        assert!((w.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn jet_matches_harmonic_closed_form() {
        let b = Bubble::new(idx(3, 0.5)).unwrap();
        for &(r, y) in &[(0.3, 0.4), (0.9, 0.1), (2.0, 1.5), (0.2, 6.0)] {
            let j = b.jet(r, y);
            let d = (1.0 + y) * (1.0 + y) + r * r;
            let w = 2.0 / d;
            let wr = -4.0 * r / (d * d);
            let wy = -4.0 * (1.0 + y) / (d * d);
            let wrr = -4.0 / (d * d) + 16.0 * r * r / (d * d * d);
            let wry = 16.0 * r * (1.0 + y) / (d * d * d);
            let wyy = -4.0 / (d * d) + 16.0 * (1.0 + y) * (1.0 + y) / (d * d * d);
            for (got, want) in [(j.w, w), (j.w_r, wr), (j.w_y, wy), (j.w_rr, wrr), (j.w_ry, wry), (j.w_yy, wyy)] {
                assert!((got - want).abs() < 1e-10 * w.abs(), "({r},{y}): {got} vs {want}");
            }
            assert!((j.lap - (wrr + 2.0 * wr / r)).abs() < 1e-10);
        }
    }

    #[test]
    fn kelvin_jet_is_an_involution() {
        let b = Bubble::new(idx(5, 0.3)).unwrap();
        let (r, y) = (0.4, 0.3);
        let j = b.jet(r, y);
        let rho2 = r * r + y * y;
        let out = kelvin_jet(&j, r / rho2, y / rho2, 5.0 - 0.6, 5.0);
        let back = kelvin_jet(&out, r, y, 5.0 - 0.6, 5.0);
        for (a, c) in [(j.w, back.w), (j.w_r, back.w_r), (j.w_yy, back.w_yy), (j.w_ry, back.w_ry)] {
            assert!((a - c).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn routes_agree_off_boundary() {
        let b = Bubble::new(idx(4, 0.3)).unwrap();
        let p = BubbleParams::standard(4);
        for &(r, y) in &[(0.0, 0.1), (1.0, 0.1), (2.5, 1.0), (5.0, 5.0)] {
            let x = pt(vec![r, 0.0, 0.0, 0.0], y);
            let a = b.extension(&p, &x, ExtensionRoute::FourierBessel).unwrap();
            let c = b.extension(&p, &x, ExtensionRoute::PoissonKernel).unwrap();
            assert!((a - c).abs() < 1e-7 * a, "({r},{y}): {a} vs {c}");
        }
    }

    #[test]
    fn scaling_and_translation() {
        let i = idx(3, 0.4);
        let b = Bubble::new(i).unwrap();
        let p = BubbleParams::new(2.0, vec![1.0, -1.0, 0.5]).unwrap();
        let x = pt(vec![1.0, -1.0, 0.5], 0.0);
        let w = b.extension(&p, &x, ExtensionRoute::FourierBessel).unwrap();
        let t = trace_bubble(i, &p, x.xbar()).unwrap();
        assert!((w - t).abs() < 1e-12 * t);
    }

    #[test]
    fn neumann_trace_closed_form() {
        let b = Bubble::new(idx(3, 0.5)).unwrap();
        let p = BubbleParams::standard(3);
        let v = b.neumann_trace(&p, &[0.0; 3]).unwrap();
        assert!((v - 4.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn jacobi_difference_matches_jet() {
        let b = Bubble::new(idx(4, 0.6)).unwrap();
        let x = pt(vec![0.3, -0.2, 0.5, 0.1], 0.4);
        for j in 0..=4 {
            let fd = b.jacobi_field(j, &x).unwrap();
            let ex = b.jacobi_field_exact(j, &x).unwrap();
            assert!((fd - ex).abs() < 1e-7, "Z^{j}: {fd} vs {ex}");
        }
        assert!(b.jacobi_field(5, &x).is_err());
    }
}
