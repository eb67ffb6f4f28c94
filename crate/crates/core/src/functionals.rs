//! Auxiliary functionals whose minimizers encode optimal potentials.
//!
//! Energy objectives (f present):
//!
//!   J_p(u)    = ½∫|∇u|² + ½ (∫|u|^{2p/(p-1)})^{(p-1)/p} − ∫fu        (p > 1)
//!   J_1(u)    = ½∫|∇u|² + ½ ‖u‖_∞²                − ∫fu
//!   J_-p(u)   = ½∫|∇u|² + ½ (∫|u|^{2p/(p+1)})^{(p+1)/p} − ∫fu        (p > 0)
//!   G_α(u)    = ½∫|∇u|² + (1/2α)(S ln S − ∫u² ln u²)  − ∫fu,  S = ∫u²
//!
//! Eigenvalue objectives (constrained to ∫u² = 1):
//!
//!   Λ_-p(u)   = ∫|∇u|² + m^{-1/p} (∫|u|^{2p/(p+1)})^{(p+1)/p}
//!   Λ_α(u)    = ∫|∇u|² + (1/α)(S ln S − ∫u² ln u²)
//!
//! `m` is the constraint budget (1 unless stated otherwise). High L^m norms
//! are evaluated in max-factored form so the p → 1 continuation stays in
//! range, and the singular term of the inverse-constraint kinds is smoothed
//! by |u|² → u² + ε².

use crate::error::Error;
use crate::grid::{check_same_grid, inner_quad, Field};
use crate::operators::apply_operator;

/// Constraint family with its parameter; the budget is normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintSpec {
    /// ∫ V^p ≤ 1, p > 0 (p = 1 routes through the sup-norm functional).
    Lp { p: f64 },
    /// ∫ V^{−p} ≤ 1, p > 0; the potential may take the wall value +∞.
    InverseLp { p: f64 },
    /// ∫ e^{−αV} ≤ 1, α > 0.
    Exponential { alpha: f64 },
}

impl ConstraintSpec {
    pub fn validate(&self) -> Result<(), Error> {
        let ok = match self {
            ConstraintSpec::Lp { p } => *p > 0.0 && p.is_finite(),
            ConstraintSpec::InverseLp { p } => *p > 0.0 && p.is_finite(),
            ConstraintSpec::Exponential { alpha } => *alpha > 0.0 && alpha.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "constraint parameter must be positive and finite: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone)]
pub enum FunctionalKind {
    Jp { p: f64, f: Field },
    J1 { f: Field },
    JInvP { p: f64, f: Field, epsilon: f64 },
    Lambda1InvP { p: f64, epsilon: f64, budget: f64 },
    Lambda1Exp { alpha: f64 },
    EnergyExp { alpha: f64, f: Field },
}

impl FunctionalKind {
    pub fn source(&self) -> Option<&Field> {
        match self {
            FunctionalKind::Jp { f, .. }
            | FunctionalKind::J1 { f }
            | FunctionalKind::JInvP { f, .. }
            | FunctionalKind::EnergyExp { f, .. } => Some(f),
            _ => None,
        }
    }

    /// Eigenvalue objectives live on the L² sphere.
    pub fn is_spherical(&self) -> bool {
        matches!(
            self,
            FunctionalKind::Lambda1InvP { .. } | FunctionalKind::Lambda1Exp { .. }
        )
    }

    pub fn validate(&self) -> Result<(), Error> {
        match self {
            FunctionalKind::Jp { p, .. } => {
                if !(*p > 1.0) {
                    return Err(Error::InvalidParameter(format!("Jp needs p > 1, got {p}")));
                }
            }
            FunctionalKind::JInvP { p, epsilon, .. } => {
                if !(*p > 0.0) || *epsilon < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "JInvP needs p > 0 and ε ≥ 0, got p = {p}, ε = {epsilon}"
                    )));
                }
            }
            FunctionalKind::Lambda1InvP { p, epsilon, budget } => {
                if !(*p > 0.0) || *epsilon < 0.0 || !(*budget > 0.0) {
                    return Err(Error::InvalidParameter(
                        "Lambda1InvP needs p > 0, ε ≥ 0, budget > 0".into(),
                    ));
                }
            }
            FunctionalKind::Lambda1Exp { alpha } | FunctionalKind::EnergyExp { alpha, .. } => {
                if !(*alpha > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "exponential constraint needs α > 0, got {alpha}"
                    )));
                }
            }
            FunctionalKind::J1 { .. } => {}
        }
        Ok(())
    }
}

/// ∫|∇u|² by the midpoint (edge) quadrature matched to the operator stencil.
pub fn dirichlet_quad(u: &Field) -> f64 {
    let grid = u.grid();
    let h = grid.h();
    let v = u.values();
    grid.edge_weights()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let d = (v[i + 1] - v[i]) / h;
            c * d * d
        })
        .sum()
}

/// ln ‖u‖_{L^m} computed in max-factored form; None when u ≡ 0.
pub fn ln_lm_norm(u: &Field, m: f64) -> Option<f64> {
    let peak = u.max_abs();
    if peak == 0.0 {
        return None;
    }
    let lnp = peak.ln();
    let t: f64 = u
        .grid()
        .quad_weights()
        .iter()
        .zip(u.values())
        .map(|(w, &v)| {
            if v == 0.0 {
                0.0
            } else {
                w * (m * (v.abs().ln() - lnp)).exp()
            }
        })
        .sum();
    Some(lnp + t.ln() / m)
}

/// (|x| / N)^e with ln N given; 0 at x = 0 (e > 0 assumed).
fn ratio_pow(x: f64, ln_n: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (e * (x.abs().ln() - ln_n)).exp()
    }
}

/// ∫ (u² + ε²)^{p/(p+1)}.
fn smoothed_mass(u: &Field, p: f64, epsilon: f64) -> f64 {
    let q = p / (p + 1.0);
    let e2 = epsilon * epsilon;
    u.grid()
        .quad_weights()
        .iter()
        .zip(u.values())
        .map(|(w, &v)| w * (v * v + e2).powf(q))
        .sum()
}

/// S ln S − ∫ u² ln u², the potential term of the exponential family (× α).
fn entropy_term(u: &Field) -> f64 {
    let s = inner_quad(u, u);
    if s <= 0.0 {
        return 0.0;
    }
    let int_ulnu: f64 = u
        .grid()
        .quad_weights()
        .iter()
        .zip(u.values())
        .map(|(w, &v)| {
            let v2 = v * v;
            if v2 > 0.0 {
                w * v2 * v2.ln()
            } else {
                0.0
            }
        })
        .sum();
    s * s.ln() - int_ulnu
}

pub fn eval(kind: &FunctionalKind, u: &Field) -> Result<f64, Error> {
    kind.validate()?;
    if let Some(f) = kind.source() {
        check_same_grid(f, u)?;
    }
    let val = match kind {
        FunctionalKind::Jp { p, f } => {
            let m = 2.0 * p / (p - 1.0);
            let n2 = match ln_lm_norm(u, m) {
                Some(ln_n) => (2.0 * ln_n).exp(),
                None => 0.0,
            };
            0.5 * dirichlet_quad(u) + 0.5 * n2 - inner_quad(f, u)
        }
        FunctionalKind::J1 { f } => {
            let m = u.max_abs();
            0.5 * dirichlet_quad(u) + 0.5 * m * m - inner_quad(f, u)
        }
        FunctionalKind::JInvP { p, f, epsilon } => {
            let b = smoothed_mass(u, *p, *epsilon);
            0.5 * dirichlet_quad(u) + 0.5 * b.powf((p + 1.0) / p) - inner_quad(f, u)
        }
        FunctionalKind::Lambda1InvP { p, epsilon, budget } => {
            let b = smoothed_mass(u, *p, *epsilon);
            let coeff = budget.powf(-1.0 / p);
            dirichlet_quad(u) + coeff * b.powf((p + 1.0) / p)
        }
        FunctionalKind::Lambda1Exp { alpha } => dirichlet_quad(u) + entropy_term(u) / alpha,
        FunctionalKind::EnergyExp { alpha, f } => {
            0.5 * dirichlet_quad(u) + 0.5 * entropy_term(u) / alpha - inner_quad(f, u)
        }
    };
    Ok(val)
}

/// Nodal (Riesz) gradient of the discrete functional: the Euler–Lagrange
/// operator evaluated at u, vanishing at pinned boundary nodes. Pairing it
/// against a perturbation with the `inner_weights` reproduces the directional
/// derivative of `eval` exactly.
pub fn gradient(kind: &FunctionalKind, u: &Field) -> Result<Field, Error> {
    kind.validate()?;
    if let Some(f) = kind.source() {
        check_same_grid(f, u)?;
    }
    let grid = u.grid();
    let zero_v = Field::zeros(grid);
    let lap = apply_operator(&zero_v, u)?; // −Δu at the dofs
    let quad = grid.quad_weights();
    let win = grid.inner_weights();
    let uv = u.values();
    let mut g = Field::zeros(grid);

    // mass-type terms carry w_i/w̃_i: equal to 1 except at the origin node of
    // a radial grid with d ≥ 2, whose quadrature weight vanishes
    let ratio = |i: usize| quad[i] / win[i];

    match kind {
        FunctionalKind::Jp { p, f } => {
            let m = 2.0 * p / (p - 1.0);
            let ln_n = ln_lm_norm(u, m);
            for i in grid.dof_range() {
                let pot = match ln_n {
                    Some(ln_n) => ratio_pow(uv[i], ln_n, m - 2.0),
                    None => 0.0,
                };
                g.values_mut()[i] = lap.values()[i] + (pot * uv[i] - f.values()[i]) * ratio(i);
            }
        }
        FunctionalKind::J1 { f } => {
            for i in grid.dof_range() {
                g.values_mut()[i] = lap.values()[i] - f.values()[i] * ratio(i);
            }
            // ∂(½‖u‖_∞²) concentrates at the (first) argmax node
            let m = u.max_abs();
            if m > 0.0 {
                let imax = uv
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                    .map(|(i, _)| i)
                    .unwrap();
                if grid.dof_range().contains(&imax) {
                    g.values_mut()[imax] += m * uv[imax].signum() / win[imax];
                }
            }
        }
        FunctionalKind::JInvP { p, f, epsilon } => {
            let b = smoothed_mass(u, *p, *epsilon);
            let c = b.powf(1.0 / p);
            let e2 = epsilon * epsilon;
            let ex = -1.0 / (p + 1.0);
            for i in grid.dof_range() {
                let pot = c * (uv[i] * uv[i] + e2).powf(ex);
                g.values_mut()[i] = lap.values()[i] + (pot * uv[i] - f.values()[i]) * ratio(i);
            }
        }
        FunctionalKind::Lambda1InvP { p, epsilon, budget } => {
            let b = smoothed_mass(u, *p, *epsilon);
            let coeff = budget.powf(-1.0 / p);
            let c = coeff * b.powf(1.0 / p);
            let e2 = epsilon * epsilon;
            let ex = -1.0 / (p + 1.0);
            for i in grid.dof_range() {
                let pot = c * (uv[i] * uv[i] + e2).powf(ex);
                g.values_mut()[i] = 2.0 * (lap.values()[i] + pot * uv[i] * ratio(i));
            }
        }
        FunctionalKind::Lambda1Exp { alpha } => {
            let s = inner_quad(u, u);
            let ln_s = if s > 0.0 { s.ln() } else { 0.0 };
            for i in grid.dof_range() {
                let v = uv[i];
                let pot = if v == 0.0 {
                    0.0
                } else {
                    v * (ln_s - (v * v).ln()) / alpha
                };
                g.values_mut()[i] = 2.0 * (lap.values()[i] + pot * ratio(i));
            }
        }
        FunctionalKind::EnergyExp { alpha, f } => {
            let s = inner_quad(u, u);
            let ln_s = if s > 0.0 { s.ln() } else { 0.0 };
            for i in grid.dof_range() {
                let v = uv[i];
                let pot = if v == 0.0 {
                    0.0
                } else {
                    v * (ln_s - (v * v).ln()) / alpha
                };
                g.values_mut()[i] = lap.values()[i] + (pot - f.values()[i]) * ratio(i);
            }
        }
    }
    Ok(g)
}

/// Nonnegative diagonal estimate of the curvature of the non-Laplacian part
/// of the functional at u. Descent methods fold it into their preconditioner;
/// the inverse-constraint kinds are stiff on the |u| ≲ ε layer at the support
/// edge and are unusable without it.
pub fn curvature(kind: &FunctionalKind, u: &Field) -> Result<Field, Error> {
    kind.validate()?;
    let grid = u.grid();
    let quad = grid.quad_weights();
    let win = grid.inner_weights();
    let uv = u.values();
    let mut w = Field::zeros(grid);
    let cap = 1e10;
    match kind {
        FunctionalKind::Jp { p, .. } => {
            let m = 2.0 * p / (p - 1.0);
            if let Some(ln_n) = ln_lm_norm(u, m) {
                for i in grid.dof_range() {
                    let c = (m - 1.0) * ratio_pow(uv[i], ln_n, m - 2.0);
                    w.values_mut()[i] = c.min(cap) * quad[i] / win[i];
                }
            }
        }
        FunctionalKind::J1 { .. } => {}
        FunctionalKind::JInvP { p, epsilon, .. }
        | FunctionalKind::Lambda1InvP { p, epsilon, .. } => {
            let scale = match kind {
                FunctionalKind::Lambda1InvP { budget, .. } => 2.0 * budget.powf(-1.0 / p),
                _ => 1.0,
            };
            let b = smoothed_mass(u, *p, *epsilon);
            let c = scale * b.powf(1.0 / p);
            let e2 = epsilon * epsilon;
            for i in grid.dof_range() {
                let s = uv[i] * uv[i] + e2;
                if s == 0.0 {
                    w.values_mut()[i] = cap * quad[i] / win[i];
                    continue;
                }
                let curv =
                    c * s.powf(-1.0 / (p + 1.0)) * (1.0 - 2.0 / (p + 1.0) * uv[i] * uv[i] / s);
                w.values_mut()[i] = curv.clamp(0.0, cap) * quad[i] / win[i];
            }
        }
        FunctionalKind::Lambda1Exp { alpha } | FunctionalKind::EnergyExp { alpha, .. } => {
            let scale = match kind {
                FunctionalKind::Lambda1Exp { .. } => 2.0,
                _ => 1.0,
            };
            let s = inner_quad(u, u);
            if s > 0.0 {
                let ln_s = s.ln();
                let floor = (1e-8 * u.max_abs()).powi(2).max(f64::MIN_POSITIVE);
                for i in grid.dof_range() {
                    let v2 = (uv[i] * uv[i]).max(floor);
                    let curv = scale * (ln_s - v2.ln() - 2.0) / alpha;
                    w.values_mut()[i] = curv.clamp(0.0, cap) * quad[i] / win[i];
                }
            }
        }
    }
    Ok(w)
}

/// Admissible integrability exponents q for the source term of the
/// inverse-constraint energy problem on ℝ^d. `q` may be +∞.
pub fn check_admissible_q(p: f64, d: u32, q: f64) -> bool {
    if !(p > 0.0) || d < 1 || !(q >= 1.0) {
        return false;
    }
    let upper = if p > 1.0 {
        2.0 * p / (p - 1.0)
    } else {
        f64::INFINITY
    };
    match d {
        1 => q >= 1.0 && q <= upper,
        2 => q > 1.0 && q <= upper,
        _ => {
            let lower = 2.0 * f64::from(d) / (f64::from(d) + 2.0);
            q >= lower && q <= upper
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_interval, make_radial, Field};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn tent(grid: &std::sync::Arc<crate::grid::Grid>, height: f64) -> Field {
        Field::from_fn(grid, move |x| height * (1.0 - x.abs()).max(0.0))
    }

    #[test]
    fn j1_value_of_delta_tent() {
        // J_1 of the tent of height M with a unit point mass at 0 is
        // (3/2)M² − M; at M = 1/3 this is the minimum −1/6
        let g = make_interval(-1.0, 1.0, 401).unwrap();
        let mid = g.n() / 2;
        let f = Field::delta_at(&g, mid).unwrap();
        let kind = FunctionalKind::J1 { f };
        let u = tent(&g, 1.0 / 3.0);
        let v = eval(&kind, &u).unwrap();
        assert!((v - (-1.0 / 6.0)).abs() < 1e-12, "J1 = {v}");
        // and the closed form at other heights
        let u = tent(&g, 0.2);
        let v = eval(&kind, &u).unwrap();
        assert!((v - (1.5 * 0.04 - 0.2)).abs() < 1e-12);
    }

    #[test]
    fn jp_vanishes_at_zero() {
        let g = make_interval(0.0, 1.0, 101).unwrap();
        let f = Field::constant(&g, 1.0);
        for p in [1.5, 2.0, 4.0] {
            let kind = FunctionalKind::Jp { p, f: f.clone() };
            assert_eq!(eval(&kind, &Field::zeros(&g)).unwrap(), 0.0);
        }
    }

    #[test]
    fn jinvp_sine_closed_form() {
        let g = make_interval(0.0, 1.0, 2001).unwrap();
        let u = Field::from_fn(&g, |x| (PI * x).sin());
        let kind = FunctionalKind::JInvP {
            p: 1.0,
            f: Field::zeros(&g),
            epsilon: 0.0,
        };
        let expect = PI * PI / 4.0 + 0.5 * (2.0 / PI) * (2.0 / PI);
        let v = eval(&kind, &u).unwrap();
        assert!((v - expect).abs() < 1e-4, "{v} vs {expect}");
    }

    #[test]
    fn gradient_at_zero_is_minus_source() {
        let g = make_interval(0.0, 1.0, 101).unwrap();
        let f = Field::from_fn(&g, |x| 1.0 + x);
        let kind = FunctionalKind::Jp { p: 2.0, f: f.clone() };
        let grad = gradient(&kind, &Field::zeros(&g)).unwrap();
        for i in g.dof_range() {
            assert!((grad.values()[i] + f.values()[i]).abs() < 1e-14);
        }
    }

    fn random_dirichlet(grid: &std::sync::Arc<crate::grid::Grid>, rng: &mut ChaCha8Rng) -> Field {
        let mut u = Field::from_fn(grid, |_| 0.0);
        for i in grid.dof_range() {
            u.values_mut()[i] = rng.gen_range(-1.0..1.0);
        }
        u
    }

    /// ⟨∇J, δ⟩ against a central difference of eval, 20 directions per kind.
    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for grid in [
            make_interval(0.0, 1.0, 31).unwrap(),
            make_radial(2.0, 3, 31).unwrap(),
        ] {
            let f = Field::from_fn(&grid, |x| (1.5 * x).cos());
            let kinds = vec![
                FunctionalKind::Jp { p: 2.0, f: f.clone() },
                FunctionalKind::Jp { p: 1.2, f: f.clone() },
                FunctionalKind::J1 { f: f.clone() },
                FunctionalKind::JInvP { p: 2.0, f: f.clone(), epsilon: 1e-3 },
                FunctionalKind::JInvP { p: 1.0, f: f.clone(), epsilon: 1e-2 },
                FunctionalKind::Lambda1InvP { p: 1.0, epsilon: 1e-3, budget: 1.0 },
                FunctionalKind::Lambda1Exp { alpha: 1.0 },
                FunctionalKind::EnergyExp { alpha: 0.5, f: f.clone() },
            ];
            for kind in &kinds {
                let u = random_dirichlet(&grid, &mut rng);
                let g = gradient(kind, &u).unwrap();
                let j0 = eval(kind, &u).unwrap();
                for _ in 0..20 {
                    let delta = random_dirichlet(&grid, &mut rng);
                    let t = 1e-5;
                    let mut up = u.clone();
                    up.axpy(t, &delta);
                    let mut um = u.clone();
                    um.axpy(-t, &delta);
                    let fd = (eval(kind, &up).unwrap() - eval(kind, &um).unwrap()) / (2.0 * t);
                    let pairing: f64 = grid
                        .inner_weights()
                        .iter()
                        .zip(g.values().iter().zip(delta.values()))
                        .map(|(w, (a, b))| w * a * b)
                        .sum();
                    assert!(
                        (pairing - fd).abs() <= 1e-5 * (1.0 + j0.abs()),
                        "kind {kind:?}: pairing {pairing} vs fd {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn convex_kinds_satisfy_midpoint_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = make_interval(0.0, 1.0, 41).unwrap();
        let f = Field::from_fn(&g, |x| x);
        let kinds = vec![
            FunctionalKind::Jp { p: 2.0, f: f.clone() },
            FunctionalKind::J1 { f: f.clone() },
            FunctionalKind::JInvP { p: 1.0, f: f.clone(), epsilon: 1e-3 },
            FunctionalKind::JInvP { p: 2.0, f: f.clone(), epsilon: 1e-3 },
        ];
        for kind in &kinds {
            for _ in 0..20 {
                let u = random_dirichlet(&g, &mut rng);
                let v = random_dirichlet(&g, &mut rng);
                let mut mid = u.clone();
                mid.axpy(1.0, &v);
                mid.scale(0.5);
                let lhs = eval(kind, &mid).unwrap();
                let rhs = 0.5 * eval(kind, &u).unwrap() + 0.5 * eval(kind, &v).unwrap();
                assert!(lhs <= rhs + 1e-10 * (1.0 + rhs.abs()), "{kind:?}");
            }
        }
    }

    #[test]
    fn jp_tends_to_j1_pointwise() {
        let g = make_interval(-1.0, 1.0, 201).unwrap();
        let f = Field::from_fn(&g, |x| (2.0 * x).cos());
        let u = Field::from_fn(&g, |x| (PI * x).sin() * (1.0 - x * x));
        let j1 = eval(&FunctionalKind::J1 { f: f.clone() }, &u).unwrap();
        let mut prev_gap = f64::INFINITY;
        for k in [1, 3, 5, 8, 11] {
            let p = 1.0 + 0.5f64.powi(k);
            let jp = eval(&FunctionalKind::Jp { p, f: f.clone() }, &u).unwrap();
            let gap = (jp - j1).abs();
            assert!(gap <= prev_gap + 1e-12);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-3 * (1.0 + j1.abs()), "gap {prev_gap}");
    }

    #[test]
    fn eval_even_in_u_without_source() {
        let g = make_interval(0.0, 1.0, 51).unwrap();
        let z = Field::zeros(&g);
        let u = Field::from_fn(&g, |x| (3.0 * x).sin() * x * (1.0 - x));
        let neg = u.map(|v| -v);
        for kind in [
            FunctionalKind::Jp { p: 2.0, f: z.clone() },
            FunctionalKind::J1 { f: z.clone() },
            FunctionalKind::JInvP { p: 1.5, f: z.clone(), epsilon: 1e-4 },
            FunctionalKind::Lambda1Exp { alpha: 2.0 },
        ] {
            let a = eval(&kind, &u).unwrap();
            let b = eval(&kind, &neg).unwrap();
            assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn admissible_q_table() {
        // q = 2 always admissible
        for p in [0.5, 1.0, 2.0, 7.0] {
            for d in [1, 2, 3, 5] {
                assert!(check_admissible_q(p, d, 2.0), "p={p} d={d}");
            }
        }
        // endpoint 2d/(d+2) included for d ≥ 3
        assert!(check_admissible_q(2.0, 3, 1.2));
        assert!(!check_admissible_q(2.0, 3, 1.1));
        // d = 1, p > 1 needs q ≤ 2p/(p−1)
        assert!(!check_admissible_q(2.0, 1, 5.0));
        assert!(check_admissible_q(2.0, 1, 4.0));
        assert!(check_admissible_q(2.0, 1, 1.0));
        // p ≤ 1 admits q = ∞
        assert!(check_admissible_q(1.0, 1, f64::INFINITY));
        assert!(check_admissible_q(0.5, 3, f64::INFINITY));
        assert!(!check_admissible_q(2.0, 3, f64::INFINITY));
        // d = 2 excludes q = 1
        assert!(!check_admissible_q(0.5, 2, 1.0));
        assert!(check_admissible_q(0.5, 2, 1.0 + 1e-9));
    }
}
