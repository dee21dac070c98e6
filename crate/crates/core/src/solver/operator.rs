use rayon::prelude::*;

use super::grid::{GridFunction, WeightedGrid};
use super::pcg::{pcg, SolveStats};
use crate::error::{Error, Result};

/// Finite-volume form of `-div(x_N^{1-2g} grad U)` for `U = Y_l(xhat) u(r, y)`
/// with `Y_l` a degree-`l` spherical harmonic on `S^{n-1}`, per unit solid
/// angle. Each node owns its dual cell; faces in `r` carry the exact
/// `int y^a` over the cell height, faces in `y` the exact harmonic mean
/// `1 / int y^{-a}`, which makes `y^{2 gamma}` discretely exact.
///
/// `(A u)_k = diag_k u_k + sum_faces c (u_k - u_nbr)`.
#[derive(Debug, Clone)]
pub struct FvOperator {
    pub(crate) grid: WeightedGrid,
    /// Coupling across the face between `(i, j)` and `(i+1, j)`.
    pub(crate) ce: Vec<f64>,
    /// Coupling across the face between `(i, j)` and `(i, j+1)`.
    pub(crate) cn: Vec<f64>,
    /// Zero-order part: angular term, Robin trace term, cut-face Dirichlet.
    pub(crate) diag: Vec<f64>,
    /// `int r^{n-1} y^a` over each dual cell.
    pub(crate) mass: Vec<f64>,
    /// `int r^{n-1}` over each dual `r` interval, per node index `i`.
    pub(crate) radial: Vec<f64>,
    /// Nodes with prescribed values.
    pub(crate) fixed: Vec<bool>,
}

fn pow_integral(lo: f64, hi: f64, e: f64) -> f64 {
    // int_lo^hi x^e dx for e > -1
    (hi.powf(e + 1.0) - lo.powf(e + 1.0)) / (e + 1.0)
}

impl FvOperator {
    pub fn new(grid: WeightedGrid, l: u32) -> Result<Self> {
        let idx = grid.index();
        let n = idx.nf();
        let a = grid.weight_exponent();
        let g2 = 2.0 * idx.gamma();
        if l > 0 && idx.n() < 3 {
            return Err(Error::domain("angular modes need n >= 3"));
        }
        let (nr, ny) = (grid.nr(), grid.ny());
        let (hr, hy) = (grid.hr(), grid.hy());
        let len = grid.len();
        let mut ce = vec![0.0; len];
        let mut cn = vec![0.0; len];
        let mut diag = vec![0.0; len];
        let mut mass = vec![0.0; len];
        let ang = (l * (l + idx.n() - 2)) as f64;
        let radial: Vec<f64> = (0..=nr)
            .map(|i| {
                let (lo, hi) = WeightedGrid::dual(i, hr, nr);
                pow_integral(lo, hi, n - 1.0)
            })
            .collect();
        let heights: Vec<f64> = (0..=ny)
            .map(|j| {
                let (lo, hi) = WeightedGrid::dual(j, hy, ny);
                pow_integral(lo, hi, a)
            })
            .collect();
        for i in 0..=nr {
            let (rlo, rhi) = WeightedGrid::dual(i, hr, nr);
            let ri = radial[i];
            let q = if ang > 0.0 { pow_integral(rlo, rhi, n - 3.0) } else { 0.0 };
            for j in 0..=ny {
                let k = grid.at(i, j);
                if i < nr {
                    ce[k] = ((i as f64 + 0.5) * hr).powf(n - 1.0) * heights[j] / hr;
                }
                if j < ny {
                    let (y0, y1) = (grid.y(j), grid.y(j + 1));
                    cn[k] = ri * g2 / (y1.powf(g2) - y0.powf(g2));
                }
                diag[k] = ang * q * heights[j];
                mass[k] = ri * heights[j];
            }
        }
        let mut fixed = vec![false; len];
        if l > 0 {
            for j in 0..=ny {
                fixed[grid.at(0, j)] = true;
            }
        }
        Ok(Self {
            grid,
            ce,
            cn,
            diag,
            mass,
            radial,
            fixed,
        })
    }

    pub fn grid(&self) -> &WeightedGrid {
        &self.grid
    }

    /// Prescribe values on the far faces `r = r_max` and `y = y_max`.
    pub fn fix_far_faces(&mut self) {
        let g = self.grid;
        for i in 0..=g.nr() {
            self.fixed[g.at(i, g.ny())] = true;
        }
        for j in 0..=g.ny() {
            self.fixed[g.at(g.nr(), j)] = true;
        }
    }

    pub fn fix_trace(&mut self) {
        let g = self.grid;
        for i in 0..=g.nr() {
            self.fixed[g.at(i, 0)] = true;
        }
    }

    /// Zero Dirichlet data on the half sphere `|x| = radius`: nodes with
    /// `|x| >= radius` are fixed, faces crossing the sphere are shortened to
    /// the crossing point (Shortley-Weller), which only changes diagonals.
    pub fn cut_half_ball(&mut self, radius: f64) {
        let g = self.grid;
        let (hr, hy) = (g.hr(), g.hy());
        let inside = |i: usize, j: usize| g.r(i).hypot(g.y(j)) < radius;
        for i in 0..=g.nr() {
            for j in 0..=g.ny() {
                let k = g.at(i, j);
                if !inside(i, j) {
                    self.fixed[k] = true;
                    continue;
                }
                let (r, y) = (g.r(i), g.y(j));
                if i < g.nr() && !inside(i + 1, j) {
                    let d = ((radius * radius - y * y).sqrt() - r).clamp(1e-3 * hr, hr);
                    self.diag[k] += self.ce[k] * hr / d;
                    self.ce[k] = 0.0;
                }
                if j < g.ny() && !inside(i, j + 1) {
                    let d = ((radius * radius - r * r).sqrt() - y).clamp(1e-3 * hy, hy);
                    self.diag[k] += self.cn[k] * hy / d;
                    self.cn[k] = 0.0;
                }
                if i == g.nr() || j == g.ny() {
                    self.fixed[k] = true;
                }
            }
        }
    }

    /// Add `-c_i R_i / kappa`-type Robin terms on trace nodes:
    /// `diag += coeff(r) * int r^{n-1}` over the dual interval.
    pub fn add_trace_robin(&mut self, coeff: impl Fn(f64) -> f64) {
        let g = self.grid;
        for i in 0..=g.nr() {
            let k = g.at(i, 0);
            self.diag[k] += coeff(g.r(i)) * self.radial[i];
        }
    }

    /// `int r^{n-1} y^a` over each dual cell.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn is_fixed(&self, k: usize) -> bool {
        self.fixed[k]
    }

    /// Full operator on all nodes, using neighbour values as given.
    pub fn apply_all(&self, u: &[f64], out: &mut [f64]) {
        let g = self.grid;
        let (nr, ny) = (g.nr(), g.ny());
        let stride = ny + 1;
        out.par_chunks_mut(stride).enumerate().for_each(|(i, row)| {
            for j in 0..=ny {
                let k = i * stride + j;
                let uk = u[k];
                let mut s = self.diag[k] * uk;
                if i < nr {
                    s += self.ce[k] * (uk - u[k + stride]);
                }
                if i > 0 {
                    s += self.ce[k - stride] * (uk - u[k - stride]);
                }
                if j < ny {
                    s += self.cn[k] * (uk - u[k + 1]);
                }
                if j > 0 {
                    s += self.cn[k - 1] * (uk - u[k - 1]);
                }
                row[j] = s;
            }
        });
    }

    /// Operator restricted to free nodes; fixed entries of `u` are treated
    /// as zero and fixed rows of the output are zero.
    fn apply_free(&self, u: &[f64], out: &mut [f64]) {
        self.apply_all(u, out);
        for (k, o) in out.iter_mut().enumerate() {
            if self.fixed[k] {
                *o = 0.0;
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let g = self.grid;
        let (nr, ny) = (g.nr(), g.ny());
        let stride = ny + 1;
        (0..g.len())
            .map(|k| {
                if self.fixed[k] {
                    return 0.0;
                }
                let (i, j) = (k / stride, k % stride);
                let mut d = self.diag[k];
                if i < nr {
                    d += self.ce[k];
                }
                if i > 0 {
                    d += self.ce[k - stride];
                }
                if j < ny {
                    d += self.cn[k];
                }
                if j > 0 {
                    d += self.cn[k - 1];
                }
                d
            })
            .collect()
    }

    /// Solve `A u = b` on free nodes with `u` holding the prescribed values
    /// on fixed nodes (and an initial guess elsewhere).
    pub fn solve(&self, b: &[f64], u: &mut GridFunction, rel_tol: f64) -> Result<SolveStats> {
        u.check_shape(&self.grid)?;
        let len = self.grid.len();
        let mut au = vec![0.0; len];
        self.apply_all(&u.data, &mut au);
        let rhs: Vec<f64> = (0..len)
            .map(|k| if self.fixed[k] { 0.0 } else { b[k] - au[k] })
            .collect();
        let mut delta = vec![0.0; len];
        let diag = self.diagonal();
        let max_iter = 20 * (self.grid.nr() + self.grid.ny()) * 10 + 1000;
        let st = pcg(|x, y| self.apply_free(x, y), &diag, &rhs, &mut delta, rel_tol, max_iter)?;
        for (v, d) in u.data.iter_mut().zip(&delta) {
            *v += d;
        }
        Ok(st)
    }

    /// Solve with zero data on fixed nodes.
    pub fn solve_homogeneous(&self, b: &[f64], rel_tol: f64) -> Result<(GridFunction, SolveStats)> {
        let mut u = self.grid.zeros();
        let st = self.solve(b, &mut u, rel_tol)?;
        Ok((u, st))
    }

    /// Flux balance of each trace node over `int r^{n-1}` of its dual
    /// interval: for a weighted-harmonic field this is the discrete
    /// `-lim y^a dU/dy`.
    pub fn trace_fluxes(&self, u: &GridFunction) -> Vec<f64> {
        let g = self.grid;
        let mut out = vec![0.0; g.len()];
        self.apply_all(&u.data, &mut out);
        (0..=g.nr()).map(|i| out[g.at(i, 0)] / self.radial[i]).collect()
    }

    /// `u^T A u` over all faces plus zero-order terms: discrete weighted
    /// Dirichlet energy per unit solid angle.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let mut au = vec![0.0; u.len()];
        self.apply_all(u, &mut au);
        u.iter().zip(&au).map(|(a, b)| a * b).sum()
    }
}
