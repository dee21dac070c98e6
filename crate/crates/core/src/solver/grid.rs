use crate::error::{Error, Result};
use crate::specfun::ProblemIndex;

/// Uniform node grid on the meridian half box `[0, r_max] x [0, y_max]`,
/// `r = |xbar|`, `y = x_N`. Nodes on `y = 0` carry the trace; the axis
/// `r = 0` is a symmetry line with no flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedGrid {
    idx: ProblemIndex,
    r_max: f64,
    y_max: f64,
    nr: usize,
    ny: usize,
}

impl WeightedGrid {
    /// `nr`, `ny` are interval counts (nodes per axis minus one).
    pub fn new(idx: ProblemIndex, r_max: f64, y_max: f64, nr: usize, ny: usize) -> Result<Self> {
        if !(r_max > 0.0 && y_max > 0.0) {
            return Err(Error::domain("grid extents must be positive"));
        }
        if nr < 8 || ny < 8 {
            return Err(Error::domain("grid needs at least 8 intervals per axis"));
        }
        Ok(Self { idx, r_max, y_max, nr, ny })
    }

    pub fn index(&self) -> ProblemIndex {
        self.idx
    }

    pub fn weight_exponent(&self) -> f64 {
        self.idx.weight_exponent()
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn hr(&self) -> f64 {
        self.r_max / self.nr as f64
    }

    pub fn hy(&self) -> f64 {
        self.y_max / self.ny as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.hr()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    pub fn len(&self) -> usize {
        (self.nr + 1) * (self.ny + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn at(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 1) + j
    }

    pub fn zeros(&self) -> GridFunction {
        GridFunction {
            nr: self.nr,
            ny: self.ny,
            data: vec![0.0; self.len()],
        }
    }

    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        let mut g = self.zeros();
        for i in 0..=self.nr {
            for j in 0..=self.ny {
                g.data[self.at(i, j)] = f(self.r(i), self.y(j));
            }
        }
        g
    }

    /// Same extents, every interval halved.
    pub fn refined(&self) -> Self {
        Self {
            nr: 2 * self.nr,
            ny: 2 * self.ny,
            ..*self
        }
    }

    /// Dual-cell interval `[lo, hi]` of node `k` on an axis of step `h` and
    /// `count` intervals.
    pub(crate) fn dual(k: usize, h: f64, count: usize) -> (f64, f64) {
        let x = k as f64 * h;
        let lo = if k == 0 { 0.0 } else { x - 0.5 * h };
        let hi = if k == count { x } else { x + 0.5 * h };
        (lo, hi)
    }
}

/// Node values of a grid, row-major in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nr: usize,
    ny: usize,
    pub data: Vec<f64>,
}

impl GridFunction {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.ny + 1) + j]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nr, self.ny)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn check_shape(&self, grid: &WeightedGrid) -> Result<()> {
        if (self.nr, self.ny) != (grid.nr(), grid.ny()) {
            return Err(Error::domain(format!(
                "grid function shape {:?} does not match grid ({}, {})",
                (self.nr, self.ny),
                grid.nr(),
                grid.ny()
            )));
        }
        Ok(())
    }
}
