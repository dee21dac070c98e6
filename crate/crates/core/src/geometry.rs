//! Fermi-coordinate jets of the compactified metric at a boundary point, the
//! normalised gauge, the Gauss-Codazzi scalar and the characteristics of the
//! first-order equation extending a boundary conformal factor.

use crate::bubble::HalfSpacePoint;
use crate::error::{Error, Result};
use crate::specfun::ProblemIndex;
use crate::tensor::SymmetricTensor;

/// Algebraic curvature tensor `R_{ikjl}` on `R^n`: antisymmetric in `(i, k)`
/// and in `(j, l)`, symmetric under pair exchange. Ricci is `R_ij = R_ikjk`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    entries: Vec<f64>,
}

impl CurvatureTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n.pow(4)],
        }
    }

    /// Entries `f(i, k, j, l)`; the index symmetries are checked.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Result<Self> {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let at = t.at(i, k, j, l);
                        t.entries[at] = f(i, k, j, l);
                    }
                }
            }
        }
        t.check()?;
        Ok(t)
    }

    fn at(&self, i: usize, k: usize, j: usize, l: usize) -> usize {
        ((i * self.n + k) * self.n + j) * self.n + l
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, k: usize, j: usize, l: usize) -> f64 {
        self.entries[self.at(i, k, j, l)]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn check(&self) -> Result<()> {
        let n = self.n;
        let tol = 1e-12 * self.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let v = self.get(i, k, j, l);
                        if (v + self.get(k, i, j, l)).abs() > tol
                            || (v + self.get(i, k, l, j)).abs() > tol
                            || (v - self.get(j, l, i, k)).abs() > tol
                        {
                            return Err(Error::domain(format!(
                                "curvature tensor breaks index symmetry at ({i}, {k}, {j}, {l})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn ricci(&self) -> SymmetricTensor {
        let n = self.n;
        let mut r = SymmetricTensor::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                r.set(i, j, (0..n).map(|k| self.get(i, k, j, k)).sum());
            }
        }
        r
    }

    /// Kulkarni-Nomizu product `a (.) b`.
    pub fn kulkarni_nomizu(a: &SymmetricTensor, b: &SymmetricTensor) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::domain("Kulkarni-Nomizu factors differ in dimension"));
        }
        Self::from_fn(a.dim(), |i, k, j, l| {
            a.get(i, j) * b.get(k, l) + a.get(k, l) * b.get(i, j) - a.get(i, l) * b.get(k, j) - a.get(k, j) * b.get(i, l)
        })
    }

    /// Trace-free (Weyl) part; identically zero for `n <= 3`.
    pub fn weyl_part(&self) -> Self {
        let n = self.n;
        if n <= 3 {
            return Self::zeros(n);
        }
        let ric = self.ricci();
        let s = ric.trace();
        let nf = n as f64;
        let mut schouten = ric.clone();
        for i in 0..n {
            for j in 0..=i {
                let d = if i == j { s / (2.0 * (nf - 1.0)) } else { 0.0 };
                schouten.set(i, j, (ric.get(i, j) - d) / (nf - 2.0));
            }
        }
        let id = SymmetricTensor::diag(&vec![1.0; n]);
        let pg = Self::kulkarni_nomizu(&schouten, &id).expect("same dimension");
        Self {
            n,
            entries: self.entries.iter().zip(&pg.entries).map(|(r, p)| r - p).collect(),
        }
    }
}

/// Second-order Fermi-coordinate data of the compactified metric at a
/// boundary point: `pi`, the boundary Riemann tensor, `R_iNjN`, and
/// `d_N d_k g^{ij}`. The mean curvature `H = tr(pi)/n`, the boundary Ricci
/// tensor and `R_NN = tr(R_iNjN)` are derived, so they are always consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricJet {
    pi: SymmetricTensor,
    riem_h: CurvatureTensor,
    ricci_h: SymmetricTensor,
    r_ini: SymmetricTensor,
    /// `g^{ij}_{,Nk}` at `(i, j, k)`, symmetric in `(i, j)`.
    g_nk: Vec<f64>,
    h_grad: Vec<f64>,
}

impl MetricJet {
    pub fn new(pi: SymmetricTensor, riem_h: CurvatureTensor, r_ini: SymmetricTensor, g_nk: Vec<f64>) -> Result<Self> {
        let n = pi.dim();
        if riem_h.dim() != n || r_ini.dim() != n {
            return Err(Error::domain("jet components differ in dimension"));
        }
        if g_nk.len() != n * n * n {
            return Err(Error::domain(format!("g_Nk needs {} entries, got {}", n * n * n, g_nk.len())));
        }
        let scale = g_nk.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                for k in 0..n {
                    if (g_nk[(i * n + j) * n + k] - g_nk[(j * n + i) * n + k]).abs() > 1e-12 * scale {
                        return Err(Error::domain(format!("g_Nk not symmetric in (i, j) at ({i}, {j}, {k})")));
                    }
                }
            }
        }
        let ricci_h = riem_h.ricci();
        Ok(Self {
            pi,
            riem_h,
            ricci_h,
            r_ini,
            g_nk,
            h_grad: vec![0.0; n],
        })
    }

    /// The flat half space.
    pub fn flat(n: usize) -> Self {
        Self::new(
            SymmetricTensor::zeros(n),
            CurvatureTensor::zeros(n),
            SymmetricTensor::zeros(n),
            vec![0.0; n * n * n],
        )
        .expect("consistent zero jet")
    }

    /// Supply `H_{,i}`, zero by default.
    pub fn with_mean_curvature_gradient(mut self, h_grad: Vec<f64>) -> Result<Self> {
        if h_grad.len() != self.dim() {
            return Err(Error::domain("H gradient has the wrong dimension"));
        }
        self.h_grad = h_grad;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.pi.dim()
    }

    pub fn mean_curvature(&self) -> f64 {
        self.pi.trace() / self.dim() as f64
    }

    pub fn pi(&self) -> &SymmetricTensor {
        &self.pi
    }

    pub fn ricci_h(&self) -> &SymmetricTensor {
        &self.ricci_h
    }

    pub fn riem_h(&self) -> &CurvatureTensor {
        &self.riem_h
    }

    pub fn r_ini(&self) -> &SymmetricTensor {
        &self.r_ini
    }

    pub fn r_nn(&self) -> f64 {
        self.r_ini.trace()
    }

    /// `||pi||^2` in the normal coordinates of the base point.
    pub fn pi_norm_sq(&self) -> f64 {
        self.pi.norm_sq()
    }

    pub fn g_nk(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim();
        self.g_nk[(i * n + j) * n + k]
    }

    fn split<'a>(&self, x: &'a HalfSpacePoint) -> Result<(&'a [f64], f64)> {
        if x.xbar().len() != self.dim() {
            return Err(Error::domain(format!(
                "point has {} tangential coordinates, jet has {}",
                x.xbar().len(),
                self.dim()
            )));
        }
        Ok((x.xbar(), x.y()))
    }
}

/// Jet in the gauge with vanishing boundary Ricci tensor and mean curvature
/// at the base point and `R_NN = (1 - 2n) ||pi||^2 / (2 (n - 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedJet(MetricJet);

impl NormalizedJet {
    pub fn new(jet: MetricJet) -> Result<Self> {
        let n = jet.dim() as f64;
        let p2 = jet.pi_norm_sq();
        let scale = 1.0 + p2 + jet.riem_h.max_abs() + jet.r_ini.max_abs();
        let tol = 1e-12 * scale;
        if jet.ricci_h.max_abs() > tol {
            return Err(Error::domain("normalised jet needs a vanishing boundary Ricci tensor"));
        }
        if jet.pi.trace().abs() > tol {
            return Err(Error::domain("normalised jet needs H = 0"));
        }
        if jet.dim() < 2 {
            return Err(Error::domain("normalised jet needs n >= 2"));
        }
        let want = (1.0 - 2.0 * n) / (2.0 * (n - 1.0)) * p2;
        if (jet.r_nn() - want).abs() > tol {
            return Err(Error::domain(format!("R_NN = {} but the gauge requires {want}", jet.r_nn())));
        }
        Ok(Self(jet))
    }

    pub fn jet(&self) -> &MetricJet {
        &self.0
    }
}

/// Second-order expansion of `sqrt(det g)` at `x`.
pub fn sqrt_det_expansion(jet: &MetricJet, x: &HalfSpacePoint) -> Result<f64> {
    let (xb, y) = jet.split(x)?;
    let n = jet.dim();
    let nf = n as f64;
    let h = jet.mean_curvature();
    let hx: f64 = xb.iter().zip(&jet.h_grad).map(|(a, b)| a * b).sum();
    Ok(1.0 - nf * h * y + 0.5 * (nf * nf * h * h - jet.pi_norm_sq() - jet.r_nn()) * y * y
        - nf * hx * y
        - jet.ricci_h.quad(xb) / 6.0)
}

/// Second-order expansion of the tangential inverse metric `g^{ij}` at `x`.
pub fn inverse_metric_expansion(jet: &MetricJet, x: &HalfSpacePoint) -> Result<SymmetricTensor> {
    let (xb, y) = jet.split(x)?;
    Ok(inverse_metric_at(jet, xb, y))
}

fn inverse_metric_at(jet: &MetricJet, xb: &[f64], y: f64) -> SymmetricTensor {
    let n = jet.dim();
    let pi2 = jet.pi.square();
    let mut g = SymmetricTensor::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut v = if i == j { 1.0 } else { 0.0 };
            v += 2.0 * jet.pi.get(i, j) * y;
            let mut curv = 0.0;
            for k in 0..n {
                for l in 0..n {
                    curv += jet.riem_h.get(i, k, j, l) * xb[k] * xb[l];
                }
            }
            v += curv / 3.0;
            v += y * (0..n).map(|k| jet.g_nk(i, j, k) * xb[k]).sum::<f64>();
            v += (3.0 * pi2.get(i, j) + jet.r_ini.get(i, j)) * y * y;
            g.set(i, j, v);
        }
    }
    g
}

/// `d_m g^{ij}` for `m < n` (tangential) and `m = n` (normal).
fn inverse_metric_derivative(jet: &MetricJet, xb: &[f64], y: f64, m: usize) -> SymmetricTensor {
    let n = jet.dim();
    let mut d = SymmetricTensor::zeros(n);
    if m < n {
        for i in 0..n {
            for j in 0..=i {
                let mut v = 0.0;
                for l in 0..n {
                    v += (jet.riem_h.get(i, m, j, l) + jet.riem_h.get(i, l, j, m)) * xb[l];
                }
                d.set(i, j, v / 3.0 + jet.g_nk(i, j, m) * y);
            }
        }
    } else {
        let pi2 = jet.pi.square();
        for i in 0..n {
            for j in 0..=i {
                let gk: f64 = (0..n).map(|k| jet.g_nk(i, j, k) * xb[k]).sum();
                d.set(i, j, 2.0 * jet.pi.get(i, j) + gk + 2.0 * (3.0 * pi2.get(i, j) + jet.r_ini.get(i, j)) * y);
            }
        }
    }
    d
}

/// Scalar curvature of the compactified metric at the base point from the
/// Gauss equation, `2 R_NN + ||pi||^2 + R[h] - (tr pi)^2`.
pub fn gauss_codazzi_scalar(jet: &NormalizedJet) -> f64 {
    let j = jet.jet();
    2.0 * j.r_nn() + j.pi_norm_sq() + j.ricci_h.trace() - j.pi.trace().powi(2)
}

/// Tangential inverse metric along the characteristics.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryMetric {
    Flat,
    /// Second-order Fermi expansion of a sampled metric.
    Jet(MetricJet),
}

impl BoundaryMetric {
    fn inverse(&self, n: usize, xb: &[f64], y: f64) -> SymmetricTensor {
        match self {
            Self::Flat => SymmetricTensor::diag(&vec![1.0; n]),
            Self::Jet(j) => inverse_metric_at(j, xb, y),
        }
    }

    fn derivative(&self, xb: &[f64], y: f64, m: usize) -> Option<SymmetricTensor> {
        match self {
            Self::Flat => None,
            Self::Jet(j) => Some(inverse_metric_derivative(j, xb, y, m)),
        }
    }
}

/// One characteristic curve, sampled on a uniform grid in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Characteristic {
    pub s: Vec<f64>,
    pub p: Vec<Vec<f64>>,
    pub z: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub sup_p: f64,
    pub sup_p_dot: f64,
    /// Spectral norm of `d p / d xbar0` by central differences.
    pub sup_grad_p: f64,
    /// Max of `|p_N + (x_N/2)(g^{ij} p_i p_j + p_N^2)|` along the curve.
    pub hamiltonian: f64,
    pub steps: usize,
}

/// Samples per characteristic.
pub const CHARACTERISTIC_SAMPLES: usize = 64;
const ODE_TOL: f64 = 1e-10;

/// Characteristic of `d_N f + (x_N/2)(g^{ij} d_i f d_j f + (d_N f)^2) = 0`
/// through `(xbar0, 0)` with `f = -K |xbar|^2` on the boundary, on
/// `s in [0, 2r]`.
pub fn eikonal_characteristics(
    idx: ProblemIndex,
    k: f64,
    xbar0: &[f64],
    r: f64,
    metric: &BoundaryMetric,
) -> Result<Characteristic> {
    let n = idx.n() as usize;
    if xbar0.len() != n {
        return Err(Error::domain(format!("xbar0 has {} entries, expected {n}", xbar0.len())));
    }
    if let BoundaryMetric::Jet(j) = metric {
        if j.dim() != n {
            return Err(Error::domain("metric jet dimension differs from n"));
        }
    }
    if !(k > 0.0 && r > 0.0 && r < k.powi(-2)) {
        return Err(Error::domain("need K > 0 and 0 < r < K^-2"));
    }
    let norm0 = xbar0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm0 > 2.0 * r * (1.0 + 1e-12) {
        return Err(Error::domain("|xbar0| must not exceed 2r"));
    }
    let sys = System { n, metric };
    let base = sys.integrate(k, xbar0, 2.0 * r)?;

    // d p / d xbar0 by central differences on the common sample grid
    let delta = 1e-6 * r.max(norm0);
    let mut jac = vec![vec![vec![0.0; n]; n + 1]; base.s.len()];
    for c in 0..n {
        let mut lo = xbar0.to_vec();
        let mut hi = xbar0.to_vec();
        lo[c] -= delta;
        hi[c] += delta;
        let (a, b) = (sys.integrate(k, &lo, 2.0 * r)?, sys.integrate(k, &hi, 2.0 * r)?);
        for (t, row) in jac.iter_mut().enumerate() {
            for q in 0..=n {
                row[q][c] = (b.p[t][q] - a.p[t][q]) / (2.0 * delta);
            }
        }
    }
    let sup_grad_p = jac.iter().map(|m| spectral_norm(m)).fold(0.0, f64::max);
    Ok(Characteristic { sup_grad_p, ..base })
}

struct System<'a> {
    n: usize,
    metric: &'a BoundaryMetric,
}

impl System<'_> {
    /// State `(p_1..p_N, z, x_1..x_N)`.
    fn rhs(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        let nn = n + 1;
        let (p, x) = (&u[..nn], &u[nn + 1..]);
        let (xb, y) = (&x[..n], x[n]);
        let g = self.metric.inverse(n, xb, y);
        let gp: Vec<f64> = (0..n).map(|i| (0..n).map(|j| g.get(i, j) * p[j]).sum()).collect();
        let q: f64 = (0..n).map(|i| gp[i] * p[i]).sum();
        let pn = p[n];
        for m in 0..nn {
            let dq = self.metric.derivative(xb, y, m).map_or(0.0, |d| d.quad(&p[..n]));
            out[m] = -0.5 * y * dq;
        }
        out[n] -= 0.5 * (q + pn * pn);
        out[nn] = y * q + pn * (1.0 + y * pn);
        for i in 0..n {
            out[nn + 1 + i] = y * gp[i];
        }
        out[nn + 1 + n] = 1.0 + y * pn;
    }

    fn hamiltonian(&self, u: &[f64]) -> f64 {
        let n = self.n;
        let nn = n + 1;
        let (p, x) = (&u[..nn], &u[nn + 1..]);
        let g = self.metric.inverse(n, &x[..n], x[n]);
        p[n] + 0.5 * x[n] * (g.quad(&p[..n]) + p[n] * p[n])
    }

    fn integrate(&self, k: f64, xbar0: &[f64], s_end: f64) -> Result<Characteristic> {
        let n = self.n;
        let nn = n + 1;
        let dim = 2 * nn + 1;
        let mut u = vec![0.0; dim];
        for i in 0..n {
            u[i] = -2.0 * k * xbar0[i];
            u[nn + 1 + i] = xbar0[i];
        }
        u[nn] = -k * xbar0.iter().map(|v| v * v).sum::<f64>();
        let mut out = Characteristic {
            s: vec![0.0],
            p: vec![u[..nn].to_vec()],
            z: vec![u[nn]],
            x: vec![u[nn + 1..].to_vec()],
            sup_p: 0.0,
            sup_p_dot: 0.0,
            sup_grad_p: 0.0,
            hamiltonian: self.hamiltonian(&u).abs(),
            steps: 0,
        };
        let mut du = vec![0.0; dim];
        let record = |u: &[f64], out: &mut Characteristic, du: &mut [f64]| {
            self.rhs(u, du);
            out.sup_p = out.sup_p.max(norm(&u[..nn]));
            out.sup_p_dot = out.sup_p_dot.max(norm(&du[..nn]));
            out.hamiltonian = out.hamiltonian.max(self.hamiltonian(u).abs());
        };
        record(&u, &mut out, &mut du);
        let mut s = 0.0;
        let mut h = s_end / CHARACTERISTIC_SAMPLES as f64;
        for t in 1..=CHARACTERISTIC_SAMPLES {
            let target = s_end * t as f64 / CHARACTERISTIC_SAMPLES as f64;
            let (steps, h_next) = dopri5(|v, o| self.rhs(v, o), &mut u, s, target, h, ODE_TOL)?;
            out.steps += steps;
            h = h_next;
            s = target;
            out.s.push(s);
            out.p.push(u[..nn].to_vec());
            out.z.push(u[nn]);
            out.x.push(u[nn + 1..].to_vec());
            record(&u, &mut out, &mut du);
        }
        Ok(out)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Largest singular value by power iteration on `J^T J`.
fn spectral_norm(j: &[Vec<f64>]) -> f64 {
    let cols = j.first().map_or(0, |r| r.len());
    let mut v = vec![1.0 / (cols as f64).sqrt(); cols];
    let mut sigma2 = 0.0;
    for _ in 0..500 {
        let jv: Vec<f64> = j.iter().map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let w: Vec<f64> = (0..cols).map(|c| j.iter().zip(&jv).map(|(r, x)| r[c] * x).sum()).collect();
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw;
        v = w.iter().map(|a| a / nw).collect();
        if (next - sigma2).abs() <= 1e-14 * next {
            sigma2 = next;
            break;
        }
        sigma2 = next;
    }
    sigma2.sqrt()
}

/// Dormand-Prince 5(4) from `t0` to `t1`, mixed absolute/relative error
/// control. Returns the number of accepted steps and the next step size.
fn dopri5(
    f: impl Fn(&[f64], &mut [f64]),
    u: &mut [f64],
    t0: f64,
    t1: f64,
    h0: f64,
    tol: f64,
) -> Result<(usize, f64)> {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let dim = u.len();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut t = t0;
    let mut h = h0.min(t1 - t0);
    let mut steps = 0;
    let mut h_keep = h0;
    while t1 - t > 1e-15 * t1.abs().max(1.0) {
        let last = h >= t1 - t;
        if last {
            h = t1 - t;
        }
        if h < 1e-14 * (t1 - t0).abs().max(f64::MIN_POSITIVE) {
            return Err(Error::numeric("dopri5", format!("step size underflow at s = {t:e}")));
        }
        for st in 0..7 {
            for d in 0..dim {
                tmp[d] = u[d] + h * (0..st).map(|q| A[st][q] * k[q][d]).sum::<f64>();
            }
            f(&tmp, &mut k[st]);
        }
        let mut err = 0.0f64;
        for d in 0..dim {
            let y5 = u[d] + h * (0..7).map(|q| B5[q] * k[q][d]).sum::<f64>();
            let y4 = u[d] + h * (0..7).map(|q| B4[q] * k[q][d]).sum::<f64>();
            let sc = tol + tol * u[d].abs().max(y5.abs());
            err = err.max((y5 - y4).abs() / sc);
            tmp[d] = y5;
        }
        if !err.is_finite() {
            return Err(Error::numeric("dopri5", format!("non-finite state at s = {t:e}")));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            u.copy_from_slice(&tmp);
            t += h;
            steps += 1;
            if !last {
                h_keep = h * factor;
            }
            h *= factor;
        } else {
            h *= factor.min(1.0);
        }
    }
    Ok((steps, h_keep))
}
