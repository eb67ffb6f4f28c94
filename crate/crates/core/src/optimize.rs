//! Minimization engines for the auxiliary functionals.
//!
//! All smooth kinds are minimized by gradient descent with Armijo
//! backtracking, preconditioned by one (−Δ + 1)⁻¹ solve per iteration so the
//! step count stays bounded as the grid is refined. Eigenvalue kinds run the
//! same scheme projected to the L² sphere. The sup-norm functional J₁ is
//! reached by the p → 1 continuation over J_p, after which an active-set pass
//! solves the limiting problem
//!
//!   min ½∫|∇u|² + ½M² − ∫fu,   −M ≤ u ≤ M,
//!
//! exactly: the continuation supplies the contact-set guess, the quadratic
//! subproblems are tridiagonal solves, and the Karush–Kuhn–Tucker multipliers
//! on the contact set are exactly the nodal masses of the optimal L¹
//! potential.

use crate::error::Error;
use crate::functionals::{eval, gradient, FunctionalKind};
use crate::grid::{check_same_grid, inner_quad, integrate, Field, Grid};
use crate::operators::{apply_operator, assemble};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// stop when ‖∇J‖ ≤ grad_tol · (1 + |J|)
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    /// p (or ε) continuation schedule; strictly monotone when nonempty
    pub continuation: Vec<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 100_000,
            grad_tol: 1e-8,
            armijo_c: 1e-4,
            backtrack: 0.5,
            continuation: Vec::new(),
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter("grad_tol must be > 0".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidParameter("backtrack factor in (0,1)".into()));
        }
        let inc = self.continuation.windows(2).all(|w| w[1] > w[0]);
        let dec = self.continuation.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return Err(Error::InvalidParameter(
                "continuation schedule must be strictly monotone".into(),
            ));
        }
        Ok(())
    }

    /// Default p-schedule for the sup-norm continuation: 2, 1.5, …, 1 + 2⁻¹⁰.
    pub fn default_p_schedule() -> Vec<f64> {
        (0..=10).map(|k| 1.0 + 0.5f64.powi(k)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub u: Field,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn inner_w(grid: &Grid, a: &Field, b: &Field) -> f64 {
    grid.inner_weights()
        .iter()
        .zip(a.values().iter().zip(b.values()))
        .map(|(w, (x, y))| w * x * y)
        .sum()
}

/// Apply the approximate inverse Hessian (−Δ + 1 + W − σvvᵀ)⁻¹: W is the
/// diagonal curvature of the potential term, and for J_p the concave outer
/// power contributes the negative rank-one −σvvᵀ, folded in by the
/// Sherman–Morrison identity. Without the rank-one term the diagonal
/// overestimates the curvature along v and leaves one arbitrarily slow mode.
fn precondition(kind: &FunctionalKind, u: &Field, g: &Field) -> Result<Field, Error> {
    let grid = u.grid();
    let w = crate::functionals::curvature(kind, u)?;
    let shifted: Vec<f64> = w.values().iter().map(|v| v + 1.0).collect();
    let sys = assemble(grid, &shifted);
    let dofs = grid.dof_range();
    let apply_inv = |rhs: &Field| -> Result<Field, Error> {
        let mut s = sys.clone();
        s.rhs = dofs.clone().map(|i| rhs.values()[i]).collect();
        let x = s.solve()?; // positive definite by construction
        let mut out = Field::zeros(grid);
        for (k, i) in dofs.clone().enumerate() {
            out.values_mut()[i] = x[k];
        }
        Ok(out)
    };
    let mut x = apply_inv(g)?;
    if let FunctionalKind::Jp { p, .. } = kind {
        let m = 2.0 * p / (p - 1.0);
        if let Some(ln_n) = crate::functionals::ln_lm_norm(u, m) {
            let quad = grid.quad_weights();
            let win = grid.inner_weights();
            let mut v = Field::zeros(grid);
            for i in grid.dof_range() {
                let ui = u.values()[i];
                if ui != 0.0 {
                    let pot = ((m - 2.0) * (ui.abs().ln() - ln_n)).exp();
                    v.values_mut()[i] = pot * ui * quad[i] / win[i];
                }
            }
            let sigma = (m - 2.0) * (-2.0 * ln_n).exp();
            let dinv_v = apply_inv(&v)?;
            let denom = 1.0 - sigma * inner_w(grid, &v, &dinv_v);
            if denom > 0.05 {
                let coeff = sigma * inner_w(grid, &v, &x) / denom;
                x.axpy(coeff, &dinv_v);
            }
        }
    }
    Ok(x)
}

/// Preconditioned descent with Armijo backtracking for the smooth kinds.
pub fn minimize(kind: &FunctionalKind, u0: &Field, opts: &SolverOptions) -> Result<MinimizeResult, Error> {
    kind.validate()?;
    opts.validate()?;
    if kind.is_spherical() {
        return Err(Error::InvalidParameter(
            "eigenvalue kinds are constrained; use minimize_on_sphere".into(),
        ));
    }
    if let Some(f) = kind.source() {
        check_same_grid(f, u0)?;
    }
    let grid = Arc::clone(u0.grid());
    let mut u = u0.clone();
    u.zero_boundary();
    let mut value = eval(kind, &u)?;
    let mut step = 1.0f64;
    let mut grad_norm = f64::INFINITY;

    for iter in 0..opts.max_iter {
        let g = gradient(kind, &u)?;
        grad_norm = inner_w(&grid, &g, &g).sqrt();
        if grad_norm <= opts.grad_tol * (1.0 + value.abs()) {
            return Ok(MinimizeResult {
                u,
                value,
                grad_norm,
                iterations: iter,
                converged: true,
            });
        }
        let mut dir = precondition(kind, &u, &g)?;
        dir.scale(-1.0);
        let slope = inner_w(&grid, &g, &dir);
        if slope >= 0.0 {
            break; // cannot happen for an SPD preconditioner; bail out safely
        }
        let noise = 8.0 * f64::EPSILON * (1.0 + value.abs());
        // probe at the natural preconditioned scale and fit a parabola along
        // dir; for the smooth kinds this lands on the one-dimensional
        // minimizer (the Cauchy step). A tiny remembered step signals a stiff
        // stage; resume from it directly instead of re-probing from 1.
        let mut t = if step < 1.0 / 64.0 {
            (step * 4.0).min(1.0)
        } else {
            let t_probe = 1.0;
            let mut probe = u.clone();
            probe.axpy(t_probe, &dir);
            let j_probe = eval(kind, &probe)?;
            let quad_coef = j_probe - value - slope * t_probe;
            if quad_coef > noise {
                (-slope / (2.0 * quad_coef)).clamp(1.0 / 64.0, 4.0)
            } else {
                2.0
            }
        };
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand = u.clone();
            cand.axpy(t, &dir);
            let cval = eval(kind, &cand)?;
            if cval <= value + opts.armijo_c * t * slope {
                u = cand;
                value = cval;
                accepted = true;
                step = t;
                break;
            }
            if opts.armijo_c * t * (-slope) <= noise {
                // the decrease test is below the rounding floor of eval;
                // certify progress by residual contraction instead
                let gc = gradient(kind, &cand)?;
                let gnc = inner_w(&grid, &gc, &gc).sqrt();
                if gnc <= 0.9 * grad_norm {
                    u = cand;
                    value = cval.min(value);
                    accepted = true;
                    step = t;
                    break;
                }
            }
            t *= opts.backtrack;
        }
        if !accepted {
            break;
        }
    }
    let converged = grad_norm <= opts.grad_tol * (1.0 + value.abs());
    Ok(MinimizeResult {
        u,
        value,
        grad_norm,
        iterations: opts.max_iter,
        converged,
    })
}

fn normalize_sphere(u: &mut Field) -> Result<(), Error> {
    let s = integrate(&u.map(|v| v * v));
    if !(s > 0.0) {
        return Err(Error::ZeroMinimizer);
    }
    u.scale(1.0 / s.sqrt());
    Ok(())
}

struct SphereResid {
    r: Field,
    norm: f64,
}

/// Lagrange stationarity residual ∇J − μ·2u (constraint ∫u² = 1).
fn sphere_residual(kind: &FunctionalKind, u: &Field) -> Result<SphereResid, Error> {
    let grid = u.grid();
    let g = gradient(kind, u)?;
    let quad = grid.quad_weights();
    let win = grid.inner_weights();
    let mut cvec = Field::zeros(grid);
    for i in grid.dof_range() {
        cvec.values_mut()[i] = 2.0 * u.values()[i] * quad[i] / win[i];
    }
    let cc = inner_w(grid, &cvec, &cvec);
    let mu = if cc > 0.0 {
        inner_w(grid, &g, &cvec) / cc
    } else {
        0.0
    };
    let mut r = g;
    r.axpy(-mu, &cvec);
    let norm = inner_w(grid, &r, &r).sqrt();
    Ok(SphereResid { r, norm })
}

/// Projected preconditioned descent on the sphere ∫u² = 1.
pub fn minimize_on_sphere(
    kind: &FunctionalKind,
    u0: &Field,
    opts: &SolverOptions,
) -> Result<MinimizeResult, Error> {
    kind.validate()?;
    opts.validate()?;
    if !kind.is_spherical() {
        return Err(Error::InvalidParameter(
            "minimize_on_sphere expects an eigenvalue kind".into(),
        ));
    }
    let grid = Arc::clone(u0.grid());
    let mut u = u0.clone();
    u.zero_boundary();
    normalize_sphere(&mut u)?;
    let mut value = eval(kind, &u)?;
    let mut step = 1.0f64;
    let mut resid = f64::INFINITY;

    for iter in 0..opts.max_iter {
        let sr = sphere_residual(kind, &u)?;
        let r = sr.r;
        resid = sr.norm;
        if resid <= opts.grad_tol * (1.0 + value.abs()) {
            return Ok(MinimizeResult {
                u,
                value,
                grad_norm: resid,
                iterations: iter,
                converged: true,
            });
        }
        let mut dir = precondition(kind, &u, &r)?;
        dir.scale(-1.0);
        // keep the step tangent so the retraction stays first-order exact
        let ud = inner_quad(&u, &dir);
        dir.axpy(-ud, &u);
        let slope = inner_w(&grid, &r, &dir);
        if slope >= 0.0 {
            break;
        }
        let noise = 8.0 * f64::EPSILON * (1.0 + value.abs());
        let mut t = if step < 1.0 / 64.0 {
            (step * 4.0).min(1.0)
        } else {
            let mut probe = u.clone();
            probe.axpy(1.0, &dir);
            let mut t = 2.0;
            if normalize_sphere(&mut probe).is_ok() {
                let j_probe = eval(kind, &probe)?;
                let quad_coef = j_probe - value - slope;
                if quad_coef > noise {
                    t = (-slope / (2.0 * quad_coef)).clamp(1.0 / 64.0, 4.0);
                }
            }
            t
        };
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand = u.clone();
            cand.axpy(t, &dir);
            if normalize_sphere(&mut cand).is_ok() {
                let cval = eval(kind, &cand)?;
                if cval <= value + opts.armijo_c * t * slope {
                    u = cand;
                    value = cval;
                    accepted = true;
                    step = t;
                    break;
                }
                if opts.armijo_c * t * (-slope) <= noise {
                    let rc = sphere_residual(kind, &cand)?;
                    if rc.norm <= 0.9 * resid {
                        u = cand;
                        value = cval.min(value);
                        accepted = true;
                        step = t;
                        break;
                    }
                }
            }
            t *= opts.backtrack;
        }
        if !accepted {
            break;
        }
    }
    let converged = resid <= opts.grad_tol * (1.0 + value.abs());
    Ok(MinimizeResult {
        u,
        value,
        grad_norm: resid,
        iterations: opts.max_iter,
        converged,
    })
}

/// Result of the sup-norm solve: the exact discrete minimizer of J₁ together
/// with its contact sets and the continuation trace.
#[derive(Debug, Clone)]
pub struct SupNormResult {
    pub u: Field,
    pub sup_value: f64,
    pub value: f64,
    pub contact_pos: Vec<usize>,
    pub contact_neg: Vec<usize>,
    /// multipliers ξ_i ≥ 0 on the contact nodes, Σξ = M
    pub contact_masses: Vec<f64>,
    pub continuation: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Contact-set extraction threshold κ; plateaus are resolved to O(h) by the
/// continuation, and exactly by the active-set pass.
pub fn contact_kappa(h: f64, m: f64) -> f64 {
    (10.0 * h * m).max(1e-3 * m)
}

pub fn extract_contact_sets(u: &Field, kappa: f64) -> (Vec<usize>, Vec<usize>) {
    let m = u.max_abs();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for i in u.grid().dof_range() {
        let v = u.values()[i];
        if v >= m - kappa {
            pos.push(i);
        } else if -v >= m - kappa {
            neg.push(i);
        }
    }
    (pos, neg)
}

/// Minimize J₁ by the p → 1 continuation, then solve the limit problem
/// exactly with an active-set pass on the contact constraints.
pub fn minimize_sup_norm(f: &Field, opts: &SolverOptions) -> Result<SupNormResult, Error> {
    opts.validate()?;
    let grid = Arc::clone(f.grid());
    let schedule = if opts.continuation.is_empty() {
        SolverOptions::default_p_schedule()
    } else {
        opts.continuation.clone()
    };
    // stages only warm-start each other and seed the contact sets; the
    // active-set pass below solves the limit problem exactly
    let stage_opts = SolverOptions {
        max_iter: (opts.max_iter / 100).clamp(200, 800),
        grad_tol: opts.grad_tol.max(1e-6),
        ..opts.clone()
    };
    let adaptive = opts.continuation.is_empty();
    let mut u = Field::zeros(&grid);
    let mut trace = Vec::with_capacity(schedule.len());
    for &p in &schedule {
        if !(p > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "continuation exponent must stay above 1, got {p}"
            )));
        }
        let kind = FunctionalKind::Jp { p, f: f.clone() };
        let res = minimize(&kind, &u, &stage_opts)?;
        u = res.u;
        trace.push((p, u.max_abs()));
    }
    if adaptive {
        // deepen the default schedule until M settles to 1e-3 relative
        let mut k = schedule.len() as i32 - 1;
        while k < 24 {
            let len = trace.len();
            let (_, m1) = trace[len - 1];
            let (_, m2) = trace[len - 2];
            if (m1 - m2).abs() <= 1e-3 * m1.abs() || m1 == 0.0 {
                break;
            }
            k += 1;
            let p = 1.0 + 0.5f64.powi(k);
            let kind = FunctionalKind::Jp { p, f: f.clone() };
            let res = minimize(&kind, &u, &stage_opts)?;
            u = res.u;
            trace.push((p, u.max_abs()));
        }
    }

    let m_cont = u.max_abs();
    if m_cont == 0.0 {
        // f ≡ 0 (or balanced to machine zero): the minimizer is u = 0
        return Ok(SupNormResult {
            u,
            sup_value: 0.0,
            value: 0.0,
            contact_pos: Vec::new(),
            contact_neg: Vec::new(),
            contact_masses: Vec::new(),
            continuation: trace,
            converged: true,
        });
    }

    let kappa = contact_kappa(grid.h(), m_cont);
    let (mut pos, mut neg) = extract_contact_sets(&u, kappa);
    let polished = active_set_polish(&grid, f, &mut pos, &mut neg)?;
    let (u, m, masses, converged) = polished;
    let value = eval(&FunctionalKind::J1 { f: f.clone() }, &u)?;
    Ok(SupNormResult {
        u,
        sup_value: m,
        value,
        contact_pos: pos,
        contact_neg: neg,
        contact_masses: masses,
        continuation: trace,
        converged,
    })
}

/// Solve min ½a(u,u) + ½M² − (f,u) subject to −M ≤ u ≤ M by active sets.
/// Returns the minimizer, M, and the contact multipliers.
#[allow(clippy::type_complexity)]
fn active_set_polish(
    grid: &Arc<Grid>,
    f: &Field,
    pos: &mut Vec<usize>,
    neg: &mut Vec<usize>,
) -> Result<(Field, f64, Vec<f64>, bool), Error> {
    let quad = grid.quad_weights();
    let win = grid.inner_weights();
    let n = grid.n();
    let mut sigma = vec![0.0f64; n]; // ±1 on the active set

    let solve_pinned = |sigma: &[f64], m: f64, rhs_src: Option<&Field>| -> Result<Field, Error> {
        // free rows: pointwise EL (−Δu)_i = f_i · w_i/w̃_i; active rows pinned
        // pinned rows become identity; free rows keep their couplings, so a
        // pinned value enters its neighbours through the solve itself
        let zeros = vec![0.0; n];
        let mut sys = assemble(grid, &zeros);
        let dofs = grid.dof_range();
        sys.rhs = vec![0.0; dofs.len()];
        for (k, i) in dofs.clone().enumerate() {
            if sigma[i] != 0.0 {
                sys.diag[k] = 1.0;
                sys.sub[k] = 0.0;
                sys.sup[k] = 0.0;
                sys.rhs[k] = sigma[i] * m;
            } else {
                sys.rhs[k] = rhs_src.map_or(0.0, |f| f.values()[i] * quad[i] / win[i]);
            }
        }
        let x = sys.solve()?;
        let mut u = Field::zeros(grid);
        for (k, i) in dofs.enumerate() {
            u.values_mut()[i] = x[k];
        }
        Ok(u)
    };

    let mut converged = false;
    let mut u = Field::zeros(grid);
    let mut m = 0.0;
    let mut xi: Vec<f64> = Vec::new();

    for _pass in 0..600 {
        for s in sigma.iter_mut() {
            *s = 0.0;
        }
        for &i in pos.iter() {
            sigma[i] = 1.0;
        }
        for &i in neg.iter() {
            sigma[i] = -1.0;
        }
        if pos.is_empty() && neg.is_empty() {
            return Err(Error::DegenerateContactSet);
        }

        // u = u0 + M u1, then the scalar stationarity in M
        let u0 = solve_pinned(&sigma, 0.0, Some(f))?;
        let mut u1 = solve_pinned(&sigma, 1.0, None)?;
        // raw obstacle force ξ_i(M) = σ_i (w f − K u)_i on the active set
        let force = |uu: &Field, with_f: bool| -> Vec<f64> {
            let zero_v = Field::zeros(grid);
            let a = apply_operator(&zero_v, uu).unwrap();
            pos.iter()
                .map(|&i| (i, 1.0))
                .chain(neg.iter().map(|&i| (i, -1.0)))
                .map(|(i, s)| {
                    let fw = if with_f { f.values()[i] * quad[i] } else { 0.0 };
                    s * (fw - win[i] * a.values()[i])
                })
                .collect()
        };
        let xi0 = force(&u0, true);
        let xi1 = force(&u1, false);
        let sum0: f64 = xi0.iter().sum();
        let sum1: f64 = xi1.iter().sum();
        // M = Σξ(M) = Σξ0 + M Σξ1  ⇒  M (1 − Σξ1) = Σξ0
        let denom = 1.0 - sum1;
        if denom <= 0.0 {
            return Err(Error::DegenerateContactSet);
        }
        m = sum0 / denom;
        if !(m > 0.0) {
            return Err(Error::DegenerateContactSet);
        }
        u1.scale(m);
        u = u0;
        u.axpy(1.0, &u1);
        for &i in pos.iter() {
            u.values_mut()[i] = m;
        }
        for &i in neg.iter() {
            u.values_mut()[i] = -m;
        }
        xi = xi0
            .iter()
            .zip(&xi1)
            .map(|(a, b)| a + m * b)
            .collect();

        // KKT checks
        let tol = 1e-12 * (1.0 + m);
        let mut worst_dual = (0usize, 0.0f64, true); // (list index, ξ, in pos?)
        let mut have_dual = false;
        for (k, &x) in xi.iter().enumerate() {
            if x < -tol && (!have_dual || x < worst_dual.1) {
                let in_pos = k < pos.len();
                worst_dual = (k, x, in_pos);
                have_dual = true;
            }
        }
        if have_dual {
            let (k, _, in_pos) = worst_dual;
            if in_pos {
                pos.remove(k);
            } else {
                neg.remove(k - pos.len());
            }
            continue;
        }
        let mut worst_primal: Option<(usize, f64)> = None;
        for i in grid.dof_range() {
            if sigma[i] != 0.0 {
                continue;
            }
            let excess = u.values()[i].abs() - m;
            if excess > tol && worst_primal.map_or(true, |(_, e)| excess > e) {
                worst_primal = Some((i, excess));
            }
        }
        if let Some((i, _)) = worst_primal {
            if u.values()[i] > 0.0 {
                pos.push(i);
                pos.sort_unstable();
            } else {
                neg.push(i);
                neg.sort_unstable();
            }
            continue;
        }
        converged = true;
        break;
    }

    Ok((u, m, xi, converged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_interval, make_radial};
    use crate::operators::solve_linear;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_source_gives_zero_minimizer() {
        let g = make_interval(0.0, 1.0, 101).unwrap();
        let z = Field::zeros(&g);
        for kind in [
            FunctionalKind::Jp { p: 2.0, f: z.clone() },
            FunctionalKind::JInvP { p: 1.0, f: z.clone(), epsilon: 1e-4 },
            FunctionalKind::EnergyExp { alpha: 1.0, f: z.clone() },
        ] {
            let res = minimize(&kind, &z, &SolverOptions::default()).unwrap();
            assert!(res.converged);
            assert!(res.u.max_abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_matches_direct_solve() {
        // EnergyExp with a huge α is the plain Dirichlet quadratic up to a
        // O(1/α) perturbation; descent must land on the direct solve
        let g = make_interval(0.0, 1.0, 201).unwrap();
        let f = Field::from_fn(&g, |x| (2.0 * x).sin() + 1.2);
        let kind = FunctionalKind::EnergyExp {
            alpha: 1e9,
            f: f.clone(),
        };
        let res = minimize(&kind, &Field::zeros(&g), &SolverOptions::default()).unwrap();
        assert!(res.converged);
        let direct = solve_linear(&Field::zeros(&g), &f).unwrap();
        let mut diff = res.u.clone();
        diff.axpy(-1.0, &direct);
        let rel = crate::grid::norm_l2(&diff) / crate::grid::norm_l2(&direct);
        assert!(rel < 1e-8, "relative gap {rel}");
    }

    #[test]
    fn descent_is_monotone_and_start_independent() {
        let g = make_interval(0.0, 1.0, 201).unwrap();
        let f = Field::constant(&g, 1.0);
        let kind = FunctionalKind::Jp { p: 2.0, f: f.clone() };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut vals = Vec::new();
        for _ in 0..2 {
            let mut u0 = Field::zeros(&g);
            for i in g.dof_range() {
                u0.values_mut()[i] = rng.gen_range(-0.3..0.3);
            }
            let res = minimize(&kind, &u0, &SolverOptions::default()).unwrap();
            assert!(res.converged, "grad_norm {}", res.grad_norm);
            vals.push(res.value);
        }
        assert!(
            (vals[0] - vals[1]).abs() <= 1e-6 * (1.0 + vals[0].abs()),
            "{vals:?}"
        );
    }

    #[test]
    fn sphere_reduces_to_dirichlet_eigenfunction() {
        // with the constraint coefficient disabled the objective is the
        // Rayleigh quotient; the minimum is λ₁ = π²
        let g = make_interval(0.0, 1.0, 501).unwrap();
        let kind = FunctionalKind::Lambda1InvP {
            p: 1.0,
            epsilon: 0.0,
            budget: f64::INFINITY,
        };
        let u0 = Field::from_fn(&g, |x| x * (1.0 - x));
        let res = minimize_on_sphere(&kind, &u0, &SolverOptions::default()).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!(res.converged);
        assert!((res.value - pi2).abs() / pi2 < 1e-3, "λ₁ = {}", res.value);
        let s = integrate(&res.u.map(|v| v * v));
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_delta_tent() {
        let g = make_interval(-1.0, 1.0, 401).unwrap();
        let mid = g.n() / 2;
        let f = Field::delta_at(&g, mid).unwrap();
        let res = minimize_sup_norm(&f, &SolverOptions::default()).unwrap();
        assert!(res.converged);
        assert!((res.sup_value - 1.0 / 3.0).abs() < 1e-9, "M = {}", res.sup_value);
        assert_eq!(res.contact_pos, vec![mid]);
        assert!(res.contact_neg.is_empty());
        assert!((res.value - (-1.0 / 6.0)).abs() < 1e-9, "J1 = {}", res.value);
        // piecewise-linear profile
        let quarter = mid / 2;
        let expect = (1.0 / 3.0) * (1.0 - g.node(quarter).abs());
        assert!((res.u.values()[quarter] - expect).abs() < 1e-9);
        // and M stable across the last continuation steps
        let k = res.continuation.len();
        let (_, m1) = res.continuation[k - 1];
        let (_, m2) = res.continuation[k - 2];
        assert!((m1 - m2).abs() <= 1e-3 * m1.abs());
    }

    #[test]
    fn sup_norm_constant_source_plateau() {
        // closed form on (0,1) with f = 1: plateau of width M around 1/2,
        // M = 5 − 2√6, matched by the smooth parabolic arcs
        let g = make_interval(0.0, 1.0, 2001).unwrap();
        let f = Field::constant(&g, 1.0);
        let res = minimize_sup_norm(&f, &SolverOptions::default()).unwrap();
        assert!(res.converged);
        let m_exact = 5.0 - 2.0 * 6.0f64.sqrt();
        assert!(
            (res.sup_value - m_exact).abs() < 2.0 * g.h(),
            "M = {} vs {m_exact}",
            res.sup_value
        );
        assert!(res.contact_neg.is_empty());
        // contact measure ≈ M
        let measure: f64 = res.contact_pos.iter().map(|&i| g.quad_weights()[i]).sum();
        assert!((measure - m_exact).abs() < 4.0 * g.h(), "|ω+| = {measure}");
        // Σξ = M exactly at the KKT point
        let mass: f64 = res.contact_masses.iter().sum();
        assert!((mass - res.sup_value).abs() < 1e-10);
    }

    #[test]
    fn sup_norm_nonpositive_source() {
        let g = make_interval(0.0, 1.0, 801).unwrap();
        let f = Field::constant(&g, -1.0);
        let res = minimize_sup_norm(&f, &SolverOptions::default()).unwrap();
        assert!(res.converged);
        assert!(res.contact_pos.is_empty());
        assert!(!res.contact_neg.is_empty());
        for &v in res.u.values() {
            assert!(v <= 1e-12);
        }
    }

    #[test]
    fn sup_norm_zero_source() {
        let g = make_interval(0.0, 1.0, 101).unwrap();
        let f = Field::zeros(&g);
        let res = minimize_sup_norm(&f, &SolverOptions::default()).unwrap();
        assert_eq!(res.sup_value, 0.0);
        assert!(res.contact_pos.is_empty() && res.contact_neg.is_empty());
    }

    #[test]
    fn sphere_feasibility_after_every_projection() {
        let g = make_radial(6.0, 1, 301).unwrap();
        let kind = FunctionalKind::Lambda1InvP {
            p: 1.0,
            epsilon: 1e-4,
            budget: 1.0,
        };
        let u0 = Field::from_fn(&g, |r| (1.0 - r / 6.0).max(0.0));
        let res = minimize_on_sphere(&kind, &u0, &SolverOptions::default()).unwrap();
        let s = integrate(&res.u.map(|v| v * v));
        assert!((s - 1.0).abs() <= 1e-12);
        assert!(res.converged);
    }

    #[test]
    fn continuation_trace_monotone_in_p() {
        let g = make_interval(0.0, 1.0, 401).unwrap();
        let f = Field::constant(&g, 1.0);
        let res = minimize_sup_norm(&f, &SolverOptions::default()).unwrap();
        for w in res.continuation.windows(2) {
            let (p_hi, m_hi) = w[0];
            let (p_lo, m_lo) = w[1];
            assert!(p_hi > p_lo);
            // M(p) decreases towards M(1) along the schedule, up to slack
            assert!(m_lo <= m_hi + 1e-3 * m_hi.abs(), "{w:?}");
        }
    }
}
