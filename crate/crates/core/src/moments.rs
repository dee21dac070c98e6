//! Weighted Fourier-Bessel moments of the bubble, the nine bubble integrals
//! `I_1..I_9`, the constant `C0` and the three combined integrals against the
//! dilation field `Z^0`.
//!
//! Moments (with `w^ = c t^{-2 gamma} phi`, `c = d2/d1`):
//!
//! ```text
//! A_a   = int t^{a-2g} phi^2        B_b   = int t^{n-1-b+2g} w^^2
//! A'_a  = int t^{a-2g} phi phi'     B'_b  = int t^{n-1-b+2g} w^ w^'
//! A''_a = int t^{a-2g} phi'^2       B''_b = int t^{n-1-b+2g} w^'^2
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::bubble::{kelvin_jet, Bubble, Jet};
use crate::error::{Error, Result};
use crate::quad::exp_sinh;
use crate::specfun::{gamma_fn, profile_norm, sphere_area, ProblemIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MomentKind {
    A,
    APrime,
    ADoublePrime,
    B,
    BPrime,
    BDoublePrime,
}

impl MomentKind {
    pub fn label(self) -> &'static str {
        match self {
            MomentKind::A => "A",
            MomentKind::APrime => "A'",
            MomentKind::ADoublePrime => "A''",
            MomentKind::B => "B",
            MomentKind::BPrime => "B'",
            MomentKind::BDoublePrime => "B''",
        }
    }

    /// Exponent `e` with integrand `~ t^e` at the origin.
    fn origin_exponent(self, idx: ProblemIndex, order: i32) -> f64 {
        let g = idx.gamma();
        let n = idx.nf();
        let o = order as f64;
        match self {
            MomentKind::A => o - 2.0 * g,
            MomentKind::APrime => o - 1.0,
            MomentKind::ADoublePrime => o + 2.0 * g - 2.0,
            MomentKind::B => n - 1.0 - o - 2.0 * g,
            MomentKind::BPrime => n - 2.0 - o - 2.0 * g,
            MomentKind::BDoublePrime => n - 3.0 - o - 2.0 * g,
        }
    }
}

/// Moments keyed by kind and integer order.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    idx: ProblemIndex,
    entries: BTreeMap<(MomentKind, i32), f64>,
}

impl MomentTable {
    pub fn index(&self) -> ProblemIndex {
        self.idx
    }

    pub fn get(&self, kind: MomentKind, order: i32) -> Option<f64> {
        self.entries.get(&(kind, order)).copied()
    }

    fn need(&self, kind: MomentKind, order: i32) -> Result<f64> {
        self.get(kind, order).ok_or_else(|| {
            Error::domain(format!("moment {}_{order} missing from table", kind.label()))
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (MomentKind, i32, f64)> + '_ {
        self.entries.iter().map(|(&(k, o), &v)| (k, o, v))
    }
}

/// Moments by double-exponential quadrature on `(0, inf)` at relative
/// tolerance `tol`.
pub fn compute_moments(idx: ProblemIndex, orders: &[(MomentKind, i32)], tol: f64) -> Result<MomentTable> {
    let bubble = Bubble::new(idx)?;
    compute_moments_with(&bubble, orders, tol)
}

/// `ln 1e-300`.
const LN_T_FLOOR: f64 = -690.7755278982137;

fn compute_moments_with(bubble: &Bubble, orders: &[(MomentKind, i32)], tol: f64) -> Result<MomentTable> {
    let idx = bubble.index();
    for &(kind, order) in orders {
        if kind.origin_exponent(idx, order) <= -1.0 {
            return Err(Error::domain(format!(
                "moment {}_{order} diverges at the origin for n = {}, gamma = {}",
                kind.label(),
                idx.n(),
                idx.gamma()
            )));
        }
    }
    let g = idx.gamma();
    let n = idx.nf();
    let c = bubble.d2() / profile_norm(g);
    let profile = bubble.profile();
    let values: Vec<Result<f64>> = orders
        .par_iter()
        .map(|&(kind, order)| {
            // One power of t times factors bounded at the origin: t phi' ~ t^{2g}.
            let o = order as f64;
            let e = match kind {
                MomentKind::A => o - 2.0 * g,
                MomentKind::APrime => o - 2.0 * g - 1.0,
                MomentKind::ADoublePrime => o - 2.0 * g - 2.0,
                MomentKind::B => n - 1.0 - o - 2.0 * g,
                MomentKind::BPrime => n - 2.0 - o - 2.0 * g,
                MomentKind::BDoublePrime => n - 3.0 - o - 2.0 * g,
            };
            let (sign, scale) = match kind {
                MomentKind::A | MomentKind::ADoublePrime => (1.0, 1.0),
                MomentKind::APrime => (-1.0, 1.0),
                MomentKind::B | MomentKind::BDoublePrime => (1.0, c * c),
                MomentKind::BPrime => (-1.0, c * c),
            };
            // Log of |integrand| as a function of ln t: phi > 0, t phi' < 0,
            // and t^e alone may overflow. Below t = 1e-300 the profile is
            // continued by its leading terms phi ~ 1, -t phi' ~ t^{2g}.
            let log_f = |lnt: f64| {
                if lnt > 700.0 {
                    // phi ~ e^{-t}
                    return f64::NEG_INFINITY;
                }
                let lc = lnt.max(LN_T_FLOOR);
                let t = lc.exp();
                let (phi, dphi) = profile.eval(t);
                let lt = e * lnt;
                let lp = phi.ln();
                let ld = (-t * dphi).ln() + 2.0 * g * (lnt - lc);
                let lw = (2.0 * g * phi - t * dphi).ln();
                match kind {
                    MomentKind::A | MomentKind::B => lt + 2.0 * lp,
                    MomentKind::APrime => lt + lp + ld,
                    MomentKind::ADoublePrime => lt + 2.0 * ld,
                    MomentKind::BPrime => lt + lp + lw,
                    MomentKind::BDoublePrime => lt + 2.0 * lw,
                }
            };
            // t = u^q flattens a near non-integrable t^p at the origin, which
            // the double-exponential rule would otherwise truncate.
            let p = kind.origin_exponent(idx, order);
            let q = if p < 0.0 { 1.0 / (p + 1.0) } else { 1.0 };
            let fu = |u: f64| {
                let lu = u.ln();
                sign * scale * q * (log_f(q * lu) + (q - 1.0) * lu).exp()
            };
            Ok(exp_sinh(fu, 0.0, tol)?.value)
        })
        .collect();
    let mut entries = BTreeMap::new();
    for (&key, v) in orders.iter().zip(values) {
        entries.insert(key, v?);
    }
    Ok(MomentTable { idx, entries })
}

/// `int_0^inf t^{mu-1} K_nu(t)^2 dt` for `mu > 2|nu|`.
fn bessel_square_mellin(mu: f64, nu: f64) -> f64 {
    PI.sqrt() * gamma_fn(mu / 2.0 + nu) * gamma_fn(mu / 2.0 - nu) * gamma_fn(mu / 2.0)
        / (4.0 * gamma_fn((mu + 1.0) / 2.0))
}

/// Closed form of `A_a` from the Mellin transform of `K_gamma^2`.
pub fn a_closed_form(gamma: f64, alpha: i32) -> f64 {
    let d1 = profile_norm(gamma);
    d1 * d1 * bessel_square_mellin(alpha as f64 + 1.0, gamma)
}

/// Closed form of `B_b` for a given normalisation `d2`.
pub fn b_closed_form(idx: ProblemIndex, d2: f64, beta: i32) -> f64 {
    d2 * d2 * bessel_square_mellin(idx.nf() - beta as f64, idx.gamma())
}

/// One instance of a three-term moment recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recurrence {
    /// `A_a = ((a+2)/(a+1)) [((a+1)/2)^2 - g^2]^{-1} A_{a+2}`
    AShift(i32),
    /// `A'_{a+1} = -((a+1)/2 - g) A_a`
    APrime(i32),
    /// `A''_a = ((a+1)/2 - g) / ((a-1)/2 + g) A_a`
    ADoublePrime(i32),
    /// `B'_{b-1} = -(n + 2g - b)/2 B_b`
    BPrime(i32),
    /// `B_{b-2} = (n - 2g - b)/(n + 2g - b + 2) B''_{b-2}`
    BDoublePrime(i32),
    /// `B_b = 4 (n-b+1) / ((n-b)(n+2g-b)(n-2g-b)) B_{b-2}`
    BShift(i32),
}

impl Recurrence {
    pub fn name(&self) -> String {
        match self {
            Recurrence::AShift(a) => format!("A_{a} from A_{}", a + 2),
            Recurrence::APrime(a) => format!("A'_{} from A_{a}", a + 1),
            Recurrence::ADoublePrime(a) => format!("A''_{a} from A_{a}"),
            Recurrence::BPrime(b) => format!("B'_{} from B_{b}", b - 1),
            Recurrence::BDoublePrime(b) => format!("B_{} from B''_{}", b - 2, b - 2),
            Recurrence::BShift(b) => format!("B_{b} from B_{}", b - 2),
        }
    }

    /// Moments the instance links.
    pub fn needs(&self) -> Vec<(MomentKind, i32)> {
        use MomentKind::*;
        match *self {
            Recurrence::AShift(a) => vec![(A, a), (A, a + 2)],
            Recurrence::APrime(a) => vec![(APrime, a + 1), (A, a)],
            Recurrence::ADoublePrime(a) => vec![(ADoublePrime, a), (A, a)],
            Recurrence::BPrime(b) => vec![(BPrime, b - 1), (B, b)],
            Recurrence::BDoublePrime(b) => vec![(B, b - 2), (BDoublePrime, b - 2)],
            Recurrence::BShift(b) => vec![(B, b), (B, b - 2)],
        }
    }

    fn sides(&self, t: &MomentTable) -> Result<(f64, f64)> {
        use MomentKind::*;
        let g = t.idx.gamma();
        let n = t.idx.nf();
        Ok(match *self {
            Recurrence::AShift(a) => {
                let af = a as f64;
                let h = (af + 1.0) / 2.0;
                (t.need(A, a)?, (af + 2.0) / (af + 1.0) / (h * h - g * g) * t.need(A, a + 2)?)
            }
            Recurrence::APrime(a) => {
                let af = a as f64;
                (t.need(APrime, a + 1)?, -((af + 1.0) / 2.0 - g) * t.need(A, a)?)
            }
            Recurrence::ADoublePrime(a) => {
                let af = a as f64;
                (
                    t.need(ADoublePrime, a)?,
                    ((af + 1.0) / 2.0 - g) / ((af - 1.0) / 2.0 + g) * t.need(A, a)?,
                )
            }
            Recurrence::BPrime(b) => {
                let bf = b as f64;
                (t.need(BPrime, b - 1)?, -0.5 * (n + 2.0 * g - bf) * t.need(B, b)?)
            }
            Recurrence::BDoublePrime(b) => {
                let bf = b as f64;
                (
                    t.need(B, b - 2)?,
                    (n - 2.0 * g - bf) / (n + 2.0 * g - bf + 2.0) * t.need(BDoublePrime, b - 2)?,
                )
            }
            Recurrence::BShift(b) => {
                let bf = b as f64;
                (
                    t.need(B, b)?,
                    4.0 * (n - bf + 1.0) / ((n - bf) * (n + 2.0 * g - bf) * (n - 2.0 * g - bf))
                        * t.need(B, b - 2)?,
                )
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// The recurrence instances of the A-chain at `alphas` and the B-chain at
/// `betas`, with the moment orders they require.
pub fn chain(alphas: &[i32], betas: &[i32]) -> Vec<Recurrence> {
    let mut out = Vec::new();
    for &a in alphas {
        out.push(Recurrence::AShift(a));
        out.push(Recurrence::APrime(a));
        out.push(Recurrence::ADoublePrime(a));
    }
    for &b in betas {
        out.push(Recurrence::BPrime(b));
        out.push(Recurrence::BDoublePrime(b));
        out.push(Recurrence::BShift(b));
    }
    out
}

pub fn chain_orders(recs: &[Recurrence]) -> Vec<(MomentKind, i32)> {
    let mut v: Vec<_> = recs.iter().flat_map(|r| r.needs()).collect();
    v.sort();
    v.dedup();
    v
}

/// Relative residual `|LHS - RHS| / |LHS|` of each recurrence instance.
pub fn verify_recurrences(table: &MomentTable, recs: &[Recurrence]) -> Result<Vec<RecurrenceCheck>> {
    recs.iter()
        .map(|r| {
            let (lhs, rhs) = r.sides(table)?;
            Ok(RecurrenceCheck {
                name: r.name(),
                lhs,
                rhs,
                residual: (lhs - rhs).abs() / lhs.abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralMethod {
    BesselMoments,
    Direct2d,
}

/// `I_1..I_9` with the constant `C0 = |S^{n-1}| A_3 B_2`.
///
/// ```text
/// I1 = int y^a W^2              I4 = int y^{a+1} r W_r W_y     I7 = int y^{a+2} W_y^2
/// I2 = int y^a r W W_r          I5 = int y^{a+2} W lap W       I8 = int y^{a+2} r W_r W_rr
/// I3 = int y^{a+1} W W_y        I6 = int y^{a+2} W_r^2         I9 = int y^{a+3} W_y lap W
/// ```
///
/// with `a = 1 - 2 gamma`, `r = |xbar|`, `y = x_N` and `lap` the Laplacian
/// in `xbar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralSet {
    pub method: IntegralMethod,
    pub i: [f64; 9],
    pub c0: f64,
    /// Absolute error estimate common to all nine entries. For the direct
    /// route it covers the outer quadrature, not the Hankel jet evaluation.
    pub error: f64,
}

impl IntegralSet {
    pub fn ratios(&self) -> [f64; 9] {
        self.i.map(|v| v / self.c0)
    }
}

/// Closed-form ratios `I_k / C0`.
pub fn ratio_targets(idx: ProblemIndex) -> [f64; 9] {
    let g = idx.gamma();
    let n = idx.nf();
    let s = 1.0 - g * g;
    [
        3.0 / (2.0 * s),
        -3.0 * n / (4.0 * s),
        -3.0 / (2.0 * (1.0 + g)),
        (3.0 * n - 2.0 * (1.0 + g)) / (4.0 * (1.0 + g)),
        -1.0,
        1.0,
        (2.0 - g) / (1.0 + g),
        -n / 2.0,
        2.0 - g,
    ]
}

/// Closed-form ratios of the combined integrals to `C0`.
pub fn combined_targets(gamma: f64) -> [f64; 3] {
    [1.0, 3.0 / (2.0 * (1.0 + gamma)), -3.0 / (2.0 * (1.0 - gamma * gamma))]
}

fn require_convergence(idx: ProblemIndex) -> Result<()> {
    if !idx.integrals_converge() {
        return Err(Error::domain(format!(
            "bubble integrals diverge unless n > 2 + 2 gamma (n = {}, gamma = {})",
            idx.n(),
            idx.gamma()
        )));
    }
    Ok(())
}

pub fn compute_integrals(idx: ProblemIndex, method: IntegralMethod) -> Result<IntegralSet> {
    require_convergence(idx)?;
    let bubble = Bubble::new(idx)?;
    match method {
        IntegralMethod::BesselMoments => integrals_from_moments(&bubble),
        IntegralMethod::Direct2d => Ok(direct_2d(&bubble)?.0),
    }
}

fn integrals_from_moments(bubble: &Bubble) -> Result<IntegralSet> {
    use MomentKind::*;
    let idx = bubble.index();
    let orders = [(A, 1), (A, 3), (APrime, 2), (APrime, 4), (ADoublePrime, 3), (B, 2), (BPrime, 1)];
    let t = compute_moments_with(bubble, &orders, 1e-13)?;
    let s = sphere_area(idx.n());
    let n = idx.nf();
    let (a1, a3) = (t.need(A, 1)?, t.need(A, 3)?);
    let (ap2, ap4) = (t.need(APrime, 2)?, t.need(APrime, 4)?);
    let app3 = t.need(ADoublePrime, 3)?;
    let (b2, bp1) = (t.need(B, 2)?, t.need(BPrime, 1)?);
    let c0 = s * a3 * b2;
    let i = [
        s * a1 * b2,
        -s * (n * a1 * b2 + a1 * bp1 + ap2 * b2),
        s * ap2 * b2,
        -s * (n * ap2 * b2 + ap2 * bp1 + app3 * b2),
        -s * a3 * b2,
        c0,
        s * app3 * b2,
        -0.5 * n * c0,
        -s * ap4 * b2,
    ];
    Ok(IntegralSet {
        method: IntegralMethod::BesselMoments,
        i,
        c0,
        error: 1e-11 * c0,
    })
}

/// Combined integrals assembled from `I_1..I_9`:
/// `int y^{a+2} lap W Z^0`, `int y^{a+1} W_y Z^0`, `int y^a W Z^0`.
pub fn combined_integrals(idx: ProblemIndex, set: &IntegralSet) -> [f64; 3] {
    let h = idx.decay() / 2.0;
    let n = idx.nf();
    let i = &set.i;
    [
        i[7] + (n - 1.0) * i[5] + i[8] + h * i[4],
        i[3] + i[6] + h * i[2],
        i[1] + i[2] + h * i[0],
    ]
}

/// Combined integrals by direct quadrature of the `Z^0`-weighted integrands.
pub fn combined_integrals_direct(idx: ProblemIndex) -> Result<[f64; 3]> {
    require_convergence(idx)?;
    let bubble = Bubble::new(idx)?;
    Ok(direct_2d(&bubble)?.1)
}

/// Twelve integrands (nine `I_k` then three combined) at one meridian point,
/// without the measure.
fn integrands(jet: &Jet, r: f64, y: f64, a: f64, half_m: f64) -> [f64; 12] {
    let ya = y.powf(a);
    let (y1, y2, y3) = (ya * y, ya * y * y, ya * y * y * y);
    let z0 = r * jet.w_r + y * jet.w_y + half_m * jet.w;
    [
        ya * jet.w * jet.w,
        ya * r * jet.w * jet.w_r,
        y1 * jet.w * jet.w_y,
        y1 * r * jet.w_r * jet.w_y,
        y2 * jet.w * jet.lap,
        y2 * jet.w_r * jet.w_r,
        y2 * jet.w_y * jet.w_y,
        y2 * r * jet.w_r * jet.w_rr,
        y3 * jet.w_y * jet.lap,
        y2 * jet.lap * z0,
        y1 * jet.w_y * z0,
        ya * jet.w * z0,
    ]
}

/// Step of the trapezoid rule in `u = ln |x|`.
const DIRECT_STEP: f64 = 0.125;
/// Relative size of the neglected radial tails.
const DIRECT_TAIL: f64 = 1e-12;

/// Polar quadrature over the meridian quarter plane: trapezoid in
/// `u = ln rho`, tanh-sinh in the polar angle. Points with `rho > 1` reuse the
/// Hankel evaluation at the Kelvin image. The error bar combines the squared
/// relative gap to the half-resolution rule with the power-law tail bound.
fn direct_2d(bubble: &Bubble) -> Result<(IntegralSet, [f64; 3])> {
    let idx = bubble.index();
    let n = idx.nf();
    let g = idx.gamma();
    let a = idx.weight_exponent();
    let m = idx.decay();
    let s_area = sphere_area(idx.n());
    // All integrands are homogeneous: rho^{n+1} |F| ~ rho^{n+2-2g} at 0 and
    // rho^{-(n-2-2g)} at infinity (envelopes of W and its derivatives).
    let e_small = n + 2.0 - 2.0 * g;
    let e_large = n - 2.0 - 2.0 * g;
    let span = (-DIRECT_TAIL.ln()) / e_small.min(e_large);
    let kmax = (span / DIRECT_STEP).ceil() as i64;
    let thetas = theta_rule();
    let radii: Vec<i64> = (0..=kmax).collect();
    // One row per inner radius; each row holds (inner, outer) contributions
    // on the fine and coarse rules.
    let rows: Vec<[[f64; 12]; 4]> = radii
        .par_iter()
        .map(|&k| {
            let rho = (-(k as f64) * DIRECT_STEP).exp();
            let mut acc = [[0.0; 12]; 4];
            for th in &thetas {
                let (c, s) = (th.theta.cos(), th.theta.sin());
                let (r, y) = (rho * c, rho * s);
                let jet = bubble.jet(r, y);
                let f_in = integrands(&jet, r, y, a, 0.5 * m);
                let meas_in = rho.powf(n + 1.0) * c.powf(n - 1.0);
                let (ro, yo) = (c / rho, s / rho);
                let out = kelvin_jet(&jet, ro, yo, m, n);
                let f_out = integrands(&out, ro, yo, a, 0.5 * m);
                let meas_out = rho.powf(-(n + 1.0)) * c.powf(n - 1.0);
                for q in 0..12 {
                    acc[0][q] += th.fine * meas_in * f_in[q];
                    acc[1][q] += th.fine * meas_out * f_out[q];
                    acc[2][q] += th.coarse * meas_in * f_in[q];
                    acc[3][q] += th.coarse * meas_out * f_out[q];
                }
            }
            acc
        })
        .collect();
    let mut fine = [0.0; 12];
    let mut coarse = [0.0; 12];
    let mut edge = [0.0f64; 12];
    for (&k, row) in radii.iter().zip(&rows) {
        // u = -k h (inner) and u = +k h (outer); the origin row is shared.
        for q in 0..12 {
            let both_f = if k == 0 { row[0][q] } else { row[0][q] + row[1][q] };
            let both_c = if k == 0 { row[2][q] } else { row[2][q] + row[3][q] };
            fine[q] += DIRECT_STEP * both_f;
            if k % 2 == 0 {
                coarse[q] += 2.0 * DIRECT_STEP * both_c;
            }
            if k == kmax {
                edge[q] = (row[0][q].abs() / e_small).max(row[1][q].abs() / e_large);
            }
        }
    }
    let mut i = [0.0; 9];
    let mut comb = [0.0; 3];
    let mut err = 0.0f64;
    for q in 0..12 {
        let v = s_area * fine[q];
        // Halving the step roughly doubles the digits of both rules.
        let d = (fine[q] - coarse[q]).abs();
        let e = s_area * (d * d / fine[q].abs().max(f64::MIN_POSITIVE) + edge[q]);
        err = err.max(e);
        if q < 9 {
            i[q] = v;
        } else {
            comb[q - 9] = v;
        }
    }
    let c0 = i[5];
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::numeric("direct_2d", format!("non-positive C0 estimate {c0:e}")));
    }
    if err > 1e-5 * c0 {
        return Err(Error::numeric(
            "direct_2d",
            format!("quadrature error bar {err:e} exceeds 1e-5 of C0 = {c0:e}"),
        ));
    }
    // C0 from the direct route is I6, which equals |S^{n-1}| A_3 B_2 exactly.
    Ok((
        IntegralSet {
            method: IntegralMethod::Direct2d,
            i,
            c0,
            error: err,
        },
        comb,
    ))
}

struct ThetaNode {
    theta: f64,
    fine: f64,
    coarse: f64,
}

/// Tanh-sinh nodes on `[0, pi/2]` at step 1/8, with weights of the step-1/4
/// rule on the even nodes for the error estimate. Nodes closer than 1e-13 to
/// an end are dropped; the integrands are bounded there.
fn theta_rule() -> Vec<ThetaNode> {
    let h = 1.0 / 8.0;
    let d = PI / 4.0;
    let mut out = vec![ThetaNode {
        theta: d,
        fine: h * d * std::f64::consts::FRAC_PI_2,
        coarse: 2.0 * h * d * std::f64::consts::FRAC_PI_2,
    }];
    let mut j = 1;
    loop {
        let t = j as f64 * h;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u).exp();
        let q = 2.0 * e / (1.0 + e);
        let off = d * q;
        if off < 1e-13 {
            break;
        }
        let w = d * std::f64::consts::FRAC_PI_2 * t.cosh() * q * (2.0 - q);
        let coarse = if j % 2 == 0 { 2.0 * h * w } else { 0.0 };
        out.push(ThetaNode { theta: off, fine: h * w, coarse });
        out.push(ThetaNode {
            theta: 2.0 * d - off,
            fine: h * w,
            coarse,
        });
        j += 1;
    }
    out
}
