use super::*;
use crate::specfun::constants;
use std::f64::consts::PI;

fn idx(n: u32, g: f64) -> ProblemIndex {
    ProblemIndex::new(n, g).unwrap()
}

fn interior_max(grid: &WeightedGrid, f: &GridFunction, keep: impl Fn(f64, f64) -> bool) -> f64 {
    let mut m = 0.0f64;
    for i in 0..=grid.nr() {
        for j in 0..=grid.ny() {
            let v = f.get(i, j);
            if v.is_finite() && keep(grid.r(i), grid.y(j)) {
                m = m.max(v.abs());
            }
        }
    }
    m
}

#[test]
fn constants_and_y_power_are_discretely_harmonic() {
    for (n, g) in [(3, 0.5), (4, 0.3), (6, 0.8)] {
        let ix = idx(n, g);
        let grid = WeightedGrid::new(ix, 2.0, 2.0, 16, 16).unwrap();
        let one = grid.sample(|_, _| 1.0);
        let res = apply_operator(&grid, &one).unwrap();
        assert!(res.max_abs() < 1e-12, "constant residual {}", res.max_abs());
        let yp = grid.sample(|_, y| y.powf(2.0 * g));
        let res = apply_operator(&grid, &yp).unwrap();
        assert!(res.max_abs() < 1e-11, "y^2g residual {}", res.max_abs());
    }
}

#[test]
fn operator_residual_on_fundamental_solution_decreases() {
    for (n, g) in [(3, 0.5), (4, 0.3)] {
        let ix = idx(n, g);
        let m = ix.decay();
        let mut errs = Vec::new();
        let mut grid = WeightedGrid::new(ix, 3.0, 3.0, 24, 24).unwrap();
        for _ in 0..3 {
            let f = grid.sample(|r, y| r.hypot(y).max(1e-300).powf(-m));
            let res = apply_operator(&grid, &f).unwrap();
            errs.push(interior_max(&grid, &res, |r, y| r.hypot(y) >= 1.0 && y >= 0.5));
            grid = grid.refined();
        }
        for w in errs.windows(2) {
            assert!(w[0] / w[1] > 3.5, "{errs:?}");
        }
    }
}

#[test]
fn shape_mismatch_is_rejected() {
    let ix = idx(3, 0.5);
    let a = WeightedGrid::new(ix, 1.0, 1.0, 8, 8).unwrap();
    let b = WeightedGrid::new(ix, 1.0, 1.0, 16, 8).unwrap();
    assert!(apply_operator(&a, &b.zeros()).is_err());
}

#[test]
fn barrier_values_match_examples() {
    let ix = idx(5, 0.3);
    let x = HalfSpacePoint::new(vec![0.3, -0.2, 0.1, 0.4, 0.0], 0.7).unwrap();
    let m = ix.decay();
    assert_eq!(barrier_values(ix, m, &x).unwrap()[0], 0.0);
    assert_eq!(barrier_values(ix, 0.0, &x).unwrap()[0], 0.0);
    assert_eq!(barrier_values(ix, 5.0, &x).unwrap()[1], 0.0);
    let origin = HalfSpacePoint::new(vec![0.0; 5], 0.0).unwrap();
    assert!(barrier_values(ix, 1.0, &origin).is_err());
}

#[test]
fn barrier_values_agree_with_discrete_operator() {
    let ix = idx(4, 0.3);
    let g = ix.gamma();
    let mu = 1.3;
    let mut grid = WeightedGrid::new(ix, 3.0, 3.0, 48, 48).unwrap();
    let mut errs = Vec::new();
    for _ in 0..2 {
        let f1 = grid.sample(|r, y| r.hypot(y).max(1e-300).powf(-mu));
        let f2 = grid.sample(|r, y| y.powf(2.0 * g) * r.hypot(y).max(1e-300).powf(-(mu + 2.0 * g)));
        let (r1, r2) = (apply_operator(&grid, &f1).unwrap(), apply_operator(&grid, &f2).unwrap());
        let mut e = 0.0f64;
        for i in 0..=grid.nr() {
            for j in 0..=grid.ny() {
                let (r, y) = (grid.r(i), grid.y(j));
                if r.hypot(y) < 1.0 || y < 0.5 || !r1.get(i, j).is_finite() {
                    continue;
                }
                let x = HalfSpacePoint::new(vec![r, 0.0, 0.0, 0.0], y).unwrap();
                let want = barrier_values(ix, mu, &x).unwrap();
                e = e.max((r1.get(i, j) - want[0]).abs() / want[0].abs());
                e = e.max((r2.get(i, j) - want[1]).abs() / want[1].abs());
            }
        }
        errs.push(e);
        grid = grid.refined();
    }
    assert!(errs[1] < 1e-2 && errs[0] / errs[1] > 3.5, "{errs:?}");
}

#[test]
fn extension_of_constant_is_constant() {
    let grid = WeightedGrid::new(idx(4, 0.3), 2.0, 2.0, 16, 16).unwrap();
    let (u, _) = solve_extension(&grid, |_| 1.0, |_, _| 1.0).unwrap();
    assert!(u.data.iter().all(|v| (v - 1.0).abs() < 1e-8));
}

#[test]
fn extension_converges_to_bubble() {
    let st = extension_study(idx(3, 0.5), 4.0, 16, 3).unwrap();
    assert!(st.errors[2] < 2e-3, "{st:?}");
    assert!(st.orders.iter().all(|&p| p >= 1.5), "{st:?}");
    assert!(st.neumann_ratio_error < 0.05, "{st:?}");
}

#[test]
fn lambda1_matches_four_ball_value() {
    // gamma = 1/2, n = 3: the even reflection is the Dirichlet Laplacian
    // on the unit ball of R^4, whose first eigenvalue is j_{1,1}^2.
    let j11 = 3.831_705_970_207_512_f64;
    let l = rayleigh_lambda1(idx(3, 0.5), 1.0, 64).unwrap();
    assert!((l.lambda / (j11 * j11) - 1.0).abs() < 5e-3, "{l:?}");
}

#[test]
fn lambda1_scaling_law() {
    let ix = idx(4, 0.3);
    let vals: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&r| rayleigh_lambda1(ix, r, 24).unwrap().lambda * r * r)
        .collect();
    for v in &vals {
        assert!(*v > 0.0);
        assert!((v / vals[1] - 1.0).abs() < 1e-3, "{vals:?}");
    }
    assert!(rayleigh_lambda1(ix, 0.0, 24).is_err());
}

#[test]
fn green_function_decay() {
    let ix = idx(3, 0.5);
    let fit = green_asymptotics(ix, 4.0, 0.05, 128).unwrap();
    assert!((fit.slope + 2.0).abs() < 0.04, "{fit:?}");
    let g = constants(ix).green;
    assert!((g - 1.0 / (2.0 * PI * PI)).abs() < 1e-14);
    assert!((fit.constant / g - 1.0).abs() < 0.05, "{fit:?}");
}

#[test]
fn green_is_linear_in_mass() {
    let ix = idx(4, 0.3);
    let (_, a) = solve_green(ix, 2.0, 0.2, 32, 1.0).unwrap();
    let (_, b) = solve_green(ix, 2.0, 0.2, 32, 0.5).unwrap();
    for (x, y) in a.data.iter().zip(&b.data) {
        assert!((0.5 * x - y).abs() <= 1e-9 * a.max_abs());
    }
    assert!(green_asymptotics(ix, 1.0, 0.2, 32).is_err());
}

#[test]
fn cutoff_shape() {
    assert_eq!(cutoff(0.5), 1.0);
    assert_eq!(cutoff(1.0), 1.0);
    assert_eq!(cutoff(2.0), 0.0);
    assert_eq!(cutoff(3.0), 0.0);
    assert!((cutoff(1.5) - 0.5).abs() < 1e-15);
}

#[test]
fn linearized_zero_and_linear() {
    let ix = idx(4, 0.3);
    let zero = SymmetricTensor::zeros(4);
    let s = solve_linearized(ix, &zero, 0.25, 8.0, 32).unwrap();
    assert_eq!(s.profile.max_abs(), 0.0);
    let pi = SymmetricTensor::diag(&[1.0, -1.0, 0.0, 0.0]);
    let a = solve_linearized(ix, &pi, 0.25, 8.0, 32).unwrap();
    let b = solve_linearized(ix, &pi.scaled(3.0), 0.25, 8.0, 32).unwrap();
    let x = [0.4, 0.1, -0.2, 0.3];
    assert!((3.0 * a.value(&x, 0.2) - b.value(&x, 0.2)).abs() < 1e-8 * b.value(&x, 0.2).abs());
    assert_eq!(a.value(&[0.0; 4], 0.0), 0.0);
    assert!(a.diagnostics.orth_energy < 1e-3, "{:?}", a.diagnostics);
    assert!(a.diagnostics.orth_trace < 1e-3, "{:?}", a.diagnostics);
    assert!(a.diagnostics.envelope.is_finite() && a.diagnostics.envelope > 0.0);
}

#[test]
fn linearized_rejects_bad_input() {
    let ix = idx(4, 0.3);
    assert!(solve_linearized(ix, &SymmetricTensor::diag(&[1.0, 0.0, 0.0, 0.0]), 0.25, 8.0, 32).is_err());
    assert!(solve_linearized(ix, &SymmetricTensor::zeros(3), 0.25, 8.0, 32).is_err());
    assert!(solve_linearized(idx(3, 0.5), &SymmetricTensor::zeros(3), 0.25, 8.0, 32).is_err());
}
