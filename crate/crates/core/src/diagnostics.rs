//! Norms, error metrics, convergence orders and front tracking.
//!
//! All norms carry physical cell weights, so values are comparable between
//! grids mapped onto different physical boxes. Sums are pairwise with a
//! fixed split, which keeps every result bit-reproducible.

use crate::error::{invalid, Result};
use crate::spectral::Field;

/// Pairwise (cascade) summation with a fixed recursion tree.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `sum_j w_j (a_j - b_j)^2` style reductions go through here.
fn weighted_square_sum<I: Iterator<Item = f64>>(terms: I) -> f64 {
    let squares: Vec<f64> = terms.collect();
    pairwise_sum(&squares)
}

/// Discrete L2 norm `(dx^d sum_j |u_j|^2)^(1/2)`.
pub fn l2_norm(u: &Field) -> f64 {
    let s = weighted_square_sum(u.values().iter().map(|v| v * v));
    (u.grid().cell_volume() * s).sqrt()
}

pub fn l2_error(a: &Field, b: &Field) -> Result<f64> {
    a.check_same_grid(b)?;
    let s = weighted_square_sum(a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)));
    Ok((a.grid().cell_volume() * s).sqrt())
}

pub fn linf_error(a: &Field, b: &Field) -> Result<f64> {
    a.check_same_grid(b)?;
    Ok(a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

/// `[int rho0 (|V_eps - V|^2 + |W_eps - W|^2) dx]^(1/2)` by the rectangle rule.
pub fn relative_entropy(v_eps: &Field, w_eps: &Field, v_lim: &Field, w_lim: &Field, rho0: &Field) -> Result<f64> {
    for f in [w_eps, v_lim, w_lim, rho0] {
        v_eps.check_same_grid(f)?;
    }
    if let Some((j, r)) = rho0.values().iter().enumerate().find(|(_, r)| !(**r >= 0.0)) {
        return Err(invalid(format!("density is negative ({r}) at node {j}")));
    }
    let terms = (0..v_eps.len()).map(|j| {
        let dv = v_eps.values()[j] - v_lim.values()[j];
        let dw = w_eps.values()[j] - w_lim.values()[j];
        rho0.values()[j] * (dv * dv + dw * dw)
    });
    let s = weighted_square_sum(terms);
    Ok((v_eps.grid().cell_volume() * s).sqrt())
}

/// Distance between two fields.
#[derive(Debug, Clone)]
pub enum ErrorMetric {
    L2Grid,
    LInfGrid,
    /// Density-weighted L2 distance.
    RelativeEntropyWeighted(Field),
}

impl ErrorMetric {
    pub fn distance(&self, a: &Field, b: &Field) -> Result<f64> {
        match self {
            ErrorMetric::L2Grid => l2_error(a, b),
            ErrorMetric::LInfGrid => linf_error(a, b),
            ErrorMetric::RelativeEntropyWeighted(rho0) => {
                let zero = Field::zeros(a.grid().clone());
                relative_entropy(a, &zero, b, &zero, rho0)
            }
        }
    }
}

/// `order_i = ln(e_{i-1} / e_i) / ln(p_{i-1} / p_i)` for consecutive rows.
/// The result has one entry fewer than the input.
pub fn observed_order(rows: &[(f64, f64)]) -> Result<Vec<f64>> {
    for (i, &(p, e)) in rows.iter().enumerate() {
        if !(p > 0.0 && p.is_finite()) {
            return Err(invalid(format!("parameter at row {i} must be positive, got {p}")));
        }
        if !(e > 0.0 && e.is_finite()) {
            return Err(invalid(format!("error at row {i} must be positive, got {e}")));
        }
        if i > 0 && !(p < rows[i - 1].0) {
            return Err(invalid("parameters must be strictly decreasing"));
        }
    }
    Ok(rows
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid("slope fit needs at least two (x, y) pairs of equal length"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(invalid("slope fit needs positive finite data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).map(|(slope, _)| slope)
}

/// Least-squares line `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid("line fit needs at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("line fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Rightmost crossing of `level` in a 1D field, linearly interpolated
/// between nodes. `None` if the field never reaches the level.
pub fn front_position(u: &Field, level: f64) -> Option<f64> {
    let grid = u.grid();
    if grid.dim() != 1 {
        return None;
    }
    let v = u.values();
    let h = grid.spacing();
    (0..v.len() - 1).rev().find_map(|i| {
        let (a, b) = (v[i], v[i + 1]);
        if a >= level && b < level {
            let frac = (a - level) / (a - b);
            Some(grid.axis_coordinate(i) + frac * h)
        } else {
            None
        }
    })
}

/// Front speed from tracked positions: slope of a least-squares line.
pub fn wave_speed(times: &[f64], positions: &[f64]) -> Option<f64> {
    linear_fit(times, positions).ok().map(|(s, _)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn field(grid: &Arc<Grid>, v: Vec<f64>) -> Field {
        Field::new(grid.clone(), v).unwrap()
    }

    #[test]
    fn l2_of_constant_difference() {
        let g = Grid::new(1, 32).unwrap();
        let a = Field::constant(g.clone(), 1.5);
        let b = Field::constant(g.clone(), 0.25);
        assert_eq!(l2_error(&a, &a).unwrap(), 0.0);
        assert!((l2_error(&a, &b).unwrap() - 1.25 * (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn l2_matches_naive_sum() {
        let g = Grid::with_domain(2, 16, -15.0, 15.0).unwrap();
        let a = Field::from_fn(g.clone(), |x| (x[0] * 0.3).sin() + x[1] * 0.01);
        let b = Field::from_fn(g.clone(), |x| (x[1] * 0.7).cos());
        let mut s = 0.0;
        for (x, y) in a.values().iter().zip(b.values()) {
            s += (x - y) * (x - y);
        }
        let naive = (s * (30.0f64 / 16.0).powi(2)).sqrt();
        assert!((l2_error(&a, &b).unwrap() - naive).abs() < 1e-13 * naive);
    }

    #[test]
    fn entropy_edge_cases() {
        let g = Grid::with_domain(1, 100, -5.0, 5.0).unwrap();
        let v = Field::from_fn(g.clone(), |x| x[0].sin());
        let w = Field::from_fn(g.clone(), |x| x[0].cos());
        let one = Field::constant(g.clone(), 1.0);
        let zero = Field::zeros(g.clone());
        assert_eq!(relative_entropy(&v, &w, &v, &w, &one).unwrap(), 0.0);
        assert_eq!(relative_entropy(&v, &w, &zero, &zero, &zero).unwrap(), 0.0);
        // V differs by c on the nodes of [-1, 1)
        let c = 0.3;
        let shifted = Field::from_fn(g.clone(), |x| {
            x[0].sin() + if (-1.0..1.0).contains(&(x[0] + 1e-12)) { c } else { 0.0 }
        });
        let d = relative_entropy(&shifted, &w, &v, &w, &one).unwrap();
        assert!((d - c * 2.0f64.sqrt()).abs() < 1e-12, "{d}");
        let neg = Field::constant(g.clone(), -1.0);
        assert!(relative_entropy(&v, &w, &v, &w, &neg).is_err());
    }

    #[test]
    fn orders() {
        let o = observed_order(&[(0.2, 4.0), (0.1, 2.0), (0.05, 0.5)]).unwrap();
        assert!((o[0] - 1.0).abs() < 1e-15);
        assert!((o[1] - 2.0).abs() < 1e-15);
        let table = observed_order(&[(1e-2, 5.47e-5), (5e-3, 2.73e-5)]).unwrap();
        assert!((table[0] - 1.0).abs() < 0.01);
        assert!(observed_order(&[(0.1, 1.0), (0.2, 0.5)]).is_err());
        assert!(observed_order(&[(0.2, 1.0), (0.1, 0.0)]).is_err());
    }

    #[test]
    fn slope_fit() {
        let x = [0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(4)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn front_tracking() {
        let g = Grid::with_domain(1, 200, -10.0, 10.0).unwrap();
        let times = [0.0, 1.0, 2.0, 3.0];
        let pos: Vec<f64> = times
            .iter()
            .map(|t| {
                let c = 2.0 + 1.5 * t;
                let u = Field::from_fn(g.clone(), |x| 1.0 / (1.0 + ((x[0] - c) * 4.0).exp()));
                front_position(&u, 0.5).unwrap()
            })
            .collect();
        for (p, t) in pos.iter().zip(times) {
            assert!((p - (2.0 + 1.5 * t)).abs() < 1e-2);
        }
        assert!((wave_speed(&times, &pos).unwrap() - 1.5).abs() < 1e-2);
        assert_eq!(front_position(&Field::zeros(g), 0.5), None);
    }

    fn random_triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        let v = || prop::collection::vec(-10.0f64..10.0, 32);
        (v(), v(), v())
    }

    proptest! {
        #[test]
        fn metric_symmetry_and_triangle((a, b, c) in random_triple()) {
            let g = Grid::with_domain(1, 32, -1.0, 1.0).unwrap();
            let (a, b, c) = (field(&g, a), field(&g, b), field(&g, c));
            prop_assert_eq!(l2_error(&a, &b).unwrap(), l2_error(&b, &a).unwrap());
            let ab = l2_error(&a, &b).unwrap();
            let bc = l2_error(&b, &c).unwrap();
            let ac = l2_error(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!(linf_error(&a, &c).unwrap() <= linf_error(&a, &b).unwrap() + linf_error(&b, &c).unwrap() + 1e-12);
        }

        #[test]
        fn order_is_scale_invariant(
            errs in prop::collection::vec(1e-8f64..1.0, 4),
            scale in 1e-3f64..1e3,
        ) {
            let rows: Vec<(f64, f64)> = errs.iter().enumerate().map(|(i, e)| (0.1 / 2f64.powi(i as i32), *e)).collect();
            let scaled: Vec<(f64, f64)> = rows.iter().map(|(p, e)| (*p, e * scale)).collect();
            let a = observed_order(&rows).unwrap();
            let b = observed_order(&scaled).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()) / (2f64.ln()));
            }
        }
    }
}
