//! Uniform grids on an interval (a, b) and on a radial domain [0, R] ⊂ ℝ^d,
//! together with trapezoidal quadrature.
//!
//! Radial grids carry the surface measure of the unit sphere, so that
//! `integrate` over [0, R] reproduces volume integrals over the ball B_R for
//! d ≥ 2. For d = 1 the radial grid represents the half-line [0, R] with a
//! symmetry (Neumann) condition at the origin, and integrals are taken over
//! [0, R] only.

use crate::error::Error;
use std::sync::Arc;

/// Potential values at or above this sentinel act as a hard wall (+∞).
pub const CLAMP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    Interval { a: f64, b: f64 },
    Radial { radius: f64, dim: u32 },
}

/// Uniform 1D discretization with quadrature and stiffness weights.
///
/// `quad` are the trapezoidal node weights (zero at the origin node of a
/// radial grid with d ≥ 2, where the volume element r^{d-1} vanishes).
/// `inner` agrees with `quad` except at that origin node, where it carries
/// the small positive mass that makes the discrete operator exactly
/// self-adjoint; it is the inner product used by the eigensolver and the
/// descent methods. `edge` holds the midpoint weights of the gradient
/// quadrature, one per grid edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    kind: GridKind,
    n: usize,
    h: f64,
    nodes: Vec<f64>,
    quad: Vec<f64>,
    inner: Vec<f64>,
    edge: Vec<f64>,
}

/// Surface area of the unit sphere in ℝ^d (2π^{d/2} / Γ(d/2)) for d ≥ 2;
/// 1 for d = 1, where the radial grid covers [0, R] once.
fn sphere_factor(d: u32) -> f64 {
    if d == 1 {
        return 1.0;
    }
    let half = f64::from(d) / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half(d)
}

/// Γ(d/2) for integer d ≥ 1.
fn gamma_half(d: u32) -> f64 {
    if d % 2 == 0 {
        // Γ(k) = (k-1)!
        let k = d / 2;
        (1..k).map(|i| i as f64).product()
    } else {
        // Γ(k + 1/2) = (2k)! √π / (4^k k!)
        let k = (d - 1) / 2;
        let mut v = std::f64::consts::PI.sqrt();
        for i in 1..=k {
            v *= (i as f64) - 0.5;
        }
        v
    }
}

pub fn make_interval(a: f64, b: f64, n: usize) -> Result<Arc<Grid>, Error> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidDomain(format!("need a < b, got [{a}, {b}]")));
    }
    if n < 3 {
        return Err(Error::InvalidDomain(format!("need n >= 3, got {n}")));
    }
    let h = (b - a) / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
    let mut quad = vec![h; n];
    quad[0] = h / 2.0;
    quad[n - 1] = h / 2.0;
    let edge = vec![h; n - 1];
    Ok(Arc::new(Grid {
        kind: GridKind::Interval { a, b },
        n,
        h,
        nodes,
        inner: quad.clone(),
        quad,
        edge,
    }))
}

pub fn make_radial(radius: f64, dim: u32, n: usize) -> Result<Arc<Grid>, Error> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::InvalidDomain(format!("need R > 0, got {radius}")));
    }
    if dim < 1 {
        return Err(Error::InvalidDomain("need d >= 1".into()));
    }
    if n < 3 {
        return Err(Error::InvalidDomain(format!("need n >= 3, got {n}")));
    }
    let h = radius / (n - 1) as f64;
    let s = sphere_factor(dim);
    let e = (dim - 1) as i32;
    let nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let mut quad: Vec<f64> = nodes.iter().map(|&r| s * h * r.powi(e)).collect();
    quad[0] *= 0.5; // trapezoid end (already 0 when d >= 2)
    quad[n - 1] *= 0.5;
    let mut inner = quad.clone();
    if dim >= 2 {
        // symmetrizer mass at the origin row; see operators::assemble
        inner[0] = s * h * (h / 2.0).powi(e) / (2.0 * f64::from(dim));
    }
    let edge: Vec<f64> = (0..n - 1)
        .map(|i| s * h * ((i as f64 + 0.5) * h).powi(e))
        .collect();
    Ok(Arc::new(Grid {
        kind: GridKind::Radial { radius, dim },
        n,
        h,
        nodes,
        quad,
        inner,
        edge,
    }))
}

impl Grid {
    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad
    }

    pub fn inner_weights(&self) -> &[f64] {
        &self.inner
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge
    }

    pub fn dim(&self) -> u32 {
        match self.kind {
            GridKind::Interval { .. } => 1,
            GridKind::Radial { dim, .. } => dim,
        }
    }

    /// Range of node indices that are degrees of freedom under the Dirichlet
    /// condition: both endpoints are pinned on an interval, only r = R on a
    /// radial grid.
    pub fn dof_range(&self) -> std::ops::Range<usize> {
        match self.kind {
            GridKind::Interval { .. } => 1..self.n - 1,
            GridKind::Radial { .. } => 0..self.n - 1,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.kind, GridKind::Radial { .. })
    }

    pub fn same_layout(&self, other: &Grid) -> bool {
        self.kind == other.kind && self.n == other.n
    }
}

/// Nodal real-valued function on a grid.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Field {
        Field {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.n()],
        }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Field {
        Field {
            grid: Arc::clone(grid),
            values: vec![c; grid.n()],
        }
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: &Arc<Grid>, mut f: F) -> Field {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Field {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Field, Error> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite field value".into()));
        }
        Ok(Field {
            grid: Arc::clone(grid),
            values,
        })
    }

    /// Discrete delta of unit mass at node `i`: f_i = 1/w_i, so that
    /// `integrate(f * u) = u(x_i)` exactly.
    pub fn delta_at(grid: &Arc<Grid>, i: usize) -> Result<Field, Error> {
        let w = grid.quad_weights()[i];
        if w <= 0.0 {
            return Err(Error::InvalidParameter(
                "delta node has zero quadrature weight".into(),
            ));
        }
        let mut f = Field::zeros(grid);
        f.values[i] = 1.0 / w;
        Ok(f)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn zero_boundary(&mut self) {
        let n = self.values.len();
        self.values[n - 1] = 0.0;
        if !self.grid.is_radial() {
            self.values[0] = 0.0;
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn axpy(&mut self, alpha: f64, other: &Field) {
        for (a, b) in self.values.iter_mut().zip(other.values.iter()) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in self.values.iter_mut() {
            *v *= alpha;
        }
    }
}

/// Trapezoidal quadrature of a field over its domain.
pub fn integrate(g: &Field) -> f64 {
    g.grid()
        .quad_weights()
        .iter()
        .zip(g.values())
        .map(|(w, v)| w * v)
        .sum()
}

/// Quadrature of the product of two fields (grid L² pairing).
pub fn inner_quad(a: &Field, b: &Field) -> f64 {
    a.grid()
        .quad_weights()
        .iter()
        .zip(a.values().iter().zip(b.values()))
        .map(|(w, (x, y))| w * x * y)
        .sum()
}

/// L² norm under the quadrature weights.
pub fn norm_l2(a: &Field) -> f64 {
    inner_quad(a, a).max(0.0).sqrt()
}

pub fn check_same_grid(a: &Field, b: &Field) -> Result<(), Error> {
    if a.grid().same_layout(b.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interval_nodes_and_spacing() {
        let g = make_interval(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.h(), 0.5);
        let expect = [-1.0, -0.5, 0.0, 0.5, 1.0];
        for (i, &x) in expect.iter().enumerate() {
            assert!((g.node(i) - x).abs() < 1e-15);
        }
        let g = make_interval(0.0, 1.0, 3).unwrap();
        assert_eq!(g.h(), 0.5);
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(matches!(
            make_interval(1.0, 0.0, 5),
            Err(Error::InvalidDomain(_))
        ));
        assert!(make_interval(0.0, 1.0, 2).is_err());
        assert!(make_radial(-1.0, 1, 5).is_err());
        assert!(make_radial(1.0, 0, 5).is_err());
    }

    #[test]
    fn quadrature_weights_sum_to_volume() {
        // interval |Ω|
        let g = make_interval(0.0, 1.0, 11).unwrap();
        let one = Field::constant(&g, 1.0);
        assert!((integrate(&one) - 1.0).abs() < 1e-12);

        // half-line convention for d = 1
        let g = make_radial(1.0, 1, 101).unwrap();
        let one = Field::constant(&g, 1.0);
        assert!((integrate(&one) - 1.0).abs() < 1e-12);

        // |B_1| in d = 3
        let g = make_radial(1.0, 3, 201).unwrap();
        let one = Field::constant(&g, 1.0);
        let ball = 4.0 * std::f64::consts::PI / 3.0;
        assert!((integrate(&one) - ball).abs() < 1e-4);

        // |B_2| in d = 2
        let g = make_radial(2.0, 2, 201).unwrap();
        let one = Field::constant(&g, 1.0);
        assert!((integrate(&one) - 4.0 * std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn integrate_polynomials() {
        let g = make_interval(0.0, 1.0, 1001).unwrap();
        let x = Field::from_fn(&g, |x| x);
        assert!((integrate(&x) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn delta_pairs_to_point_value() {
        let g = make_interval(-1.0, 1.0, 401).unwrap();
        let mid = g.n() / 2;
        assert_eq!(g.node(mid), 0.0);
        let delta = Field::delta_at(&g, mid).unwrap();
        let u = Field::from_fn(&g, |x| 1.0 - x * x);
        assert!((inner_quad(&delta, &u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_is_second_order() {
        // trapezoid error drops by ~4 per halving on smooth integrands
        let exact = (1.0f64.sin() - 0.0) * 1.0; // ∫ cos = sin(1)
        let err = |n: usize| {
            let g = make_interval(0.0, 1.0, n).unwrap();
            let f = Field::from_fn(&g, |x| x.cos());
            (integrate(&f) - 1.0f64.sin()).abs()
        };
        let _ = exact;
        let e1 = err(101);
        let e2 = err(201);
        let ratio = e1 / e2;
        assert!(
            (3.0..5.0).contains(&ratio),
            "expected O(h^2), got ratio {ratio}"
        );
    }

    #[test]
    fn radial_origin_weight() {
        let g = make_radial(1.0, 3, 11).unwrap();
        assert_eq!(g.quad_weights()[0], 0.0);
        assert!(g.inner_weights()[0] > 0.0);
        let g1 = make_radial(1.0, 1, 11).unwrap();
        assert!(g1.quad_weights()[0] > 0.0);
        assert_eq!(g1.quad_weights()[0], g1.inner_weights()[0]);
    }

    proptest! {
        #[test]
        fn integrate_is_linear(alpha in -5.0f64..5.0, beta in -5.0f64..5.0, seed in 0u64..1000) {
            let g = make_interval(0.0, 2.0, 64).unwrap();
            let f1 = Field::from_fn(&g, |x| (seed as f64 + x).sin());
            let f2 = Field::from_fn(&g, |x| (x * 3.0).cos());
            let mut combo = f1.clone();
            combo.scale(alpha);
            combo.axpy(beta, &f2);
            let lhs = integrate(&combo);
            let rhs = alpha * integrate(&f1) + beta * integrate(&f2);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs())));
        }
    }
}
