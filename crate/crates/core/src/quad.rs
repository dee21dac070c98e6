//! Quadrature rules: Gauss-Legendre, adaptive Gauss-Kronrod (7/15) and the
//! double-exponential tanh-sinh / exp-sinh rules for integrands with
//! algebraic endpoint singularities.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared rule of the given size, built once per process.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("quadrature cache poisoned");
        map.entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
            .clone()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let d = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + d * x))
            .sum::<f64>()
            * d
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let d = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = d * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * d, ((k - g) * d).abs())
}

/// Globally adaptive Gauss-Kronrod 7/15 on a finite interval.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    const MAX_INTERVALS: usize = 4000;
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let (v, e) = kronrod15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::numeric(
                "gauss_kronrod",
                format!("no convergence on [{a}, {b}]: estimate {total:e}, error {err:e}"),
            ));
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty partition");
        let (lo, hi, pv, pe) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod15(&mut f, lo, mid);
        let (v2, e2) = kronrod15(&mut f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    if !total.is_finite() {
        return Err(Error::numeric("gauss_kronrod", "non-finite integrand"));
    }
    // Resum to shed accumulated update error.
    let value = parts.iter().map(|p| p.2).sum();
    let error = parts.iter().map(|p| p.3).sum();
    Ok(Estimate { value, error })
}

/// Smallest offset from a finite endpoint at which double-exponential rules
/// sample the integrand.
const DE_MIN_OFFSET: f64 = 1e-200;
const DE_MAX_LEVEL: u32 = 12;

/// Tanh-sinh rule on `[a, b]`, refined by halving the step until successive
/// levels agree to `rel_tol`.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<Estimate> {
    let d = 0.5 * (b - a);
    let mut sum = FRAC_PI_2 * f(a + d);
    let mut h = 1.0;
    let mut prev = f64::NAN;
    let mut level = 0;
    loop {
        let step: f64 = if level == 0 { 1.0 } else { h };
        let start = if level == 0 { step } else { h };
        let mut t = start;
        loop {
            let u = FRAC_PI_2 * t.sinh();
            let e = (-2.0 * u).exp();
            let q = 2.0 * e / (1.0 + e);
            let off = d * q;
            if off < DE_MIN_OFFSET * d.abs().max(1.0) || off == 0.0 {
                break;
            }
            let w = FRAC_PI_2 * t.cosh() * q * (2.0 - q);
            let xl = a + off;
            let xr = b - off;
            let mut contrib = 0.0;
            if xl > a {
                contrib += f(xl);
            }
            if xr < b {
                contrib += f(xr);
            }
            sum += w * contrib;
            t += if level == 0 { step } else { 2.0 * h };
        }
        let value = sum * h * d;
        if !value.is_finite() {
            return Err(Error::numeric("tanh_sinh", "non-finite integrand"));
        }
        if level >= 3 {
            let err = (value - prev).abs();
            if err <= rel_tol * value.abs() || err == 0.0 {
                return Ok(Estimate { value, error: err });
            }
        }
        if level == DE_MAX_LEVEL {
            return Err(Error::numeric(
                "tanh_sinh",
                format!("no convergence: {value:e} vs {prev:e}"),
            ));
        }
        prev = value;
        level += 1;
        h *= 0.5;
    }
}

/// Exp-sinh rule on `[a, inf)` for integrands that decay at infinity and may
/// be singular at `a`.
pub fn exp_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, rel_tol: f64) -> Result<Estimate> {
    let mut sum = 0.0;
    let mut h = 1.0;
    let mut prev = f64::NAN;
    let mut level = 0;
    let eval = |t: f64, f: &mut F| -> Option<f64> {
        let u = FRAC_PI_2 * t.sinh();
        if u > 700.0 {
            return None;
        }
        let off = u.exp();
        if off < DE_MIN_OFFSET {
            return None;
        }
        let x = a + off;
        if x == a {
            return None;
        }
        Some(FRAC_PI_2 * t.cosh() * off * f(x))
    };
    loop {
        let (first, stride) = if level == 0 { (0.0, 1.0) } else { (h, 2.0 * h) };
        if level == 0 {
            sum += eval(0.0, &mut f).unwrap_or(0.0);
        }
        for sign in [1.0, -1.0] {
            let mut t = if level == 0 { stride } else { first };
            let mut zeros = 0;
            while let Some(v) = eval(sign * t, &mut f) {
                sum += v;
                zeros = if v == 0.0 { zeros + 1 } else { 0 };
                if zeros > 4 {
                    break;
                }
                t += stride;
            }
        }
        let value = sum * h;
        if !value.is_finite() {
            return Err(Error::numeric("exp_sinh", "non-finite integrand"));
        }
        if level >= 3 {
            let err = (value - prev).abs();
            if err <= rel_tol * value.abs() || err == 0.0 {
                return Ok(Estimate { value, error: err });
            }
        }
        if level == DE_MAX_LEVEL {
            return Err(Error::numeric(
                "exp_sinh",
                format!("no convergence: {value:e} vs {prev:e}"),
            ));
        }
        prev = value;
        level += 1;
        h *= 0.5;
    }
}

/// Fixed tanh-sinh nodes and weights on `[a, b]` at step `h`. Weights include
/// the step, so `sum w_i f(x_i)` approximates the integral.
pub fn tanh_sinh_rule(a: f64, b: f64, h: f64) -> Vec<(f64, f64)> {
    let d = 0.5 * (b - a);
    let mut out = vec![(a + d, h * d * FRAC_PI_2)];
    let mut t = h;
    loop {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u).exp();
        let q = 2.0 * e / (1.0 + e);
        let off = d * q;
        if off < DE_MIN_OFFSET * d.abs().max(1.0) || a + off == a {
            break;
        }
        let w = h * d * FRAC_PI_2 * t.cosh() * q * (2.0 - q);
        out.push((a + off, w));
        out.push((b - off, w));
        t += h;
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}
