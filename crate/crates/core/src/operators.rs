//! Discrete Schrödinger operators −Δ + V on interval and radial grids.
//!
//! The Laplacian is the conservative three-point scheme: on an interval the
//! classical (−u_{i-1} + 2u_i − u_{i+1})/h², on a radial grid the flux form
//!
//!   −[r_{i+1/2}^{d-1}(u_{i+1}−u_i) − r_{i-1/2}^{d-1}(u_i−u_{i-1})] / (h² r_i^{d-1}),
//!
//! which is second order for −u'' − (d−1)u'/r and exactly self-adjoint in the
//! grid inner product. The origin row uses the symmetrized operator
//! 2d·(u_0−u_1)/h², valid for every d ≥ 1 (u'(0) = 0 plus L'Hôpital on the
//! first-order term). With the origin mass carried by `Grid::inner_weights`
//! the whole matrix remains exactly symmetrizable, which the eigensolver's
//! deflation relies on.
//!
//! Potential values at or above [`CLAMP`](crate::grid::CLAMP) act as hard
//! walls: the solution is pushed to ~1e-12 there, which is the discrete
//! surrogate for a +∞ (capacitary) constraint.

use crate::error::Error;
use crate::grid::{check_same_grid, inner_quad, integrate, Field, Grid};

/// Tridiagonal system over the Dirichlet degrees of freedom.
#[derive(Debug, Clone)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    /// Thomas algorithm. Consumes the system, returns the solution vector.
    pub fn solve(mut self) -> Result<Vec<f64>, Error> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot == 0.0 {
            return Err(Error::SingularSystem { row: 0, pivot });
        }
        c[0] = self.sup[0] / pivot;
        x[0] = self.rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.sub[i] * c[i - 1];
            if pivot == 0.0 {
                return Err(Error::SingularSystem { row: i, pivot });
            }
            if i < n - 1 {
                c[i] = self.sup[i] / pivot;
            }
            x[i] = (self.rhs[i] - self.sub[i] * x[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            x[i] = x[i] - c[i] * x[i + 1];
        }
        self.rhs.clear();
        Ok(x)
    }
}

/// Row coefficients of −Δ + V over the dof range of `grid`.
///
/// Row i couples to i−1 and i+1 through −c_{i∓1/2}/(h²·w̃_i); couplings that
/// would reach a pinned boundary node are dropped (Dirichlet).
pub fn assemble(grid: &Grid, potential: &[f64]) -> TridiagonalSystem {
    let h = grid.h();
    let edge = grid.edge_weights();
    let win = grid.inner_weights();
    let dofs = grid.dof_range();
    let ndof = dofs.len();
    let lo = dofs.start;
    let mut sub = vec![0.0; ndof];
    let mut diag = vec![0.0; ndof];
    let mut sup = vec![0.0; ndof];
    for k in 0..ndof {
        let i = lo + k;
        let mut d = 0.0;
        if i > 0 {
            let coupling = edge[i - 1] / (h * h * win[i]);
            d += coupling;
            if i - 1 >= lo {
                sub[k] = -coupling;
            }
        }
        if i + 1 < grid.n() {
            let coupling = edge[i] / (h * h * win[i]);
            d += coupling;
            if i + 1 < lo + ndof {
                sup[k] = -coupling;
            }
        }
        diag[k] = d + potential[i];
    }
    TridiagonalSystem {
        sub,
        diag,
        sup,
        rhs: Vec::new(),
    }
}

/// Pointwise action of −Δ + V on `u`. Pinned boundary nodes map to zero.
pub fn apply_operator(potential: &Field, u: &Field) -> Result<Field, Error> {
    check_same_grid(potential, u)?;
    let grid = u.grid();
    let h = grid.h();
    let edge = grid.edge_weights();
    let win = grid.inner_weights();
    let uv = u.values();
    let vv = potential.values();
    let mut out = Field::zeros(grid);
    for i in grid.dof_range() {
        let mut acc = vv[i] * uv[i];
        if i > 0 {
            acc += edge[i - 1] / (h * h * win[i]) * (uv[i] - uv[i - 1]);
        }
        if i + 1 < grid.n() {
            acc += edge[i] / (h * h * win[i]) * (uv[i] - uv[i + 1]);
        }
        out.values_mut()[i] = acc;
    }
    Ok(out)
}

fn check_nonnegative(potential: &Field) -> Result<(), Error> {
    for (i, &v) in potential.values().iter().enumerate() {
        if v < 0.0 {
            return Err(Error::NegativePotential { node: i, value: v });
        }
    }
    Ok(())
}

/// Direct solve of (−Δ + V) u = f with Dirichlet conditions, V ≥ 0.
pub fn solve_linear(potential: &Field, f: &Field) -> Result<Field, Error> {
    check_same_grid(potential, f)?;
    check_nonnegative(potential)?;
    let grid = f.grid();
    let mut sys = assemble(grid, potential.values());
    let dofs = grid.dof_range();
    sys.rhs = dofs.clone().map(|i| f.values()[i]).collect();
    let x = sys.solve()?;
    let mut u = Field::zeros(grid);
    for (k, i) in dofs.enumerate() {
        u.values_mut()[i] = x[k];
    }
    Ok(u)
}

/// Dirichlet energy E_f(V) = −½ ∫ f u_V.
pub fn energy_of_potential(potential: &Field, f: &Field) -> Result<f64, Error> {
    let u = solve_linear(potential, f)?;
    Ok(-0.5 * inner_quad(f, &u))
}

/// Torsion function w_V: solution of (−Δ + V) w = 1.
pub fn torsion(potential: &Field) -> Result<Field, Error> {
    let one = Field::constant(potential.grid(), 1.0);
    solve_linear(potential, &one)
}

/// First k Dirichlet eigenpairs of −Δ + V.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<Field>,
}

pub const EIG_TOL: f64 = 1e-8;
pub const EIG_MAX_ITER: usize = 10_000;

struct DofSpace {
    lo: usize,
    weights: Vec<f64>,
}

impl DofSpace {
    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }

    fn norm(&self, a: &[f64]) -> f64 {
        self.dot(a, a).max(0.0).sqrt()
    }
}

fn matvec(sys: &TridiagonalSystem, x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let mut v = sys.diag[i] * x[i];
        if i > 0 {
            v += sys.sub[i] * x[i - 1];
        }
        if i + 1 < n {
            v += sys.sup[i] * x[i + 1];
        }
        out[i] = v;
    }
}

/// Shifted inverse iteration with deflation against already-converged
/// eigenvectors, in the symmetrizing grid inner product.
pub fn eigenpairs(potential: &Field, k: usize) -> Result<Spectrum, Error> {
    if k == 0 {
        return Err(Error::InvalidParameter("need k >= 1".into()));
    }
    check_nonnegative(potential)?;
    let grid = potential.grid();
    let sys = assemble(grid, potential.values());
    let dofs = grid.dof_range();
    let ndof = dofs.len();
    if k > ndof {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds the {ndof} degrees of freedom"
        )));
    }
    let space = DofSpace {
        lo: dofs.start,
        weights: dofs.map(|i| grid.inner_weights()[i]).collect(),
    };

    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut work = vec![0.0; ndof];

    for j in 0..k {
        // deterministic start with broad overlap; mode shape biases toward
        // the j-th eigenvector on simple domains
        let mut x: Vec<f64> = (0..ndof)
            .map(|i| {
                let t = (i + 1) as f64 / (ndof + 1) as f64;
                ((j + 1) as f64 * std::f64::consts::PI * t).sin() + 1e-3 * (t * 37.0).cos()
            })
            .collect();
        orthogonalize(&space, &mut x, &vectors);
        let nrm = space.norm(&x);
        if nrm == 0.0 {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
        for v in x.iter_mut() {
            *v /= nrm;
        }

        let mut shift = 0.0;
        let mut rho = 0.0;
        let mut converged = false;
        let mut resid = f64::INFINITY;
        for iter in 0..EIG_MAX_ITER {
            let mut shifted = sys.clone();
            if shift != 0.0 {
                for d in shifted.diag.iter_mut() {
                    *d -= shift;
                }
            }
            shifted.rhs = x.clone();
            let y = match shifted.solve() {
                Ok(y) => y,
                Err(_) => {
                    // shift landed on an eigenvalue; nudge and retry
                    shift *= 1.0 + 1e-12;
                    shift += 1e-300;
                    continue;
                }
            };
            x = y;
            orthogonalize(&space, &mut x, &vectors);
            let nrm = space.norm(&x);
            if !nrm.is_finite() || nrm == 0.0 {
                return Err(Error::NoConvergence {
                    iterations: iter,
                    residual: resid,
                });
            }
            for v in x.iter_mut() {
                *v /= nrm;
            }
            matvec(&sys, &x, &mut work);
            rho = space.dot(&x, &work);
            let mut r2 = 0.0;
            for (i, w) in space.weights.iter().enumerate() {
                let r = work[i] - rho * x[i];
                r2 += w * r * r;
            }
            resid = r2.sqrt() / rho.abs().max(f64::MIN_POSITIVE);
            if resid <= EIG_TOL {
                converged = true;
                break;
            }
            // Rayleigh shift once the iterate is in the right basin
            if resid < 1e-2 {
                shift = rho;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                iterations: EIG_MAX_ITER,
                residual: resid,
            });
        }

        vectors.push(x.clone());
        values.push(rho);
    }

    // sort ascending; deflation can deliver a cluster out of order
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenfunctions = Vec::with_capacity(k);
    for &j in &order {
        eigenvalues.push(values[j]);
        let mut f = Field::zeros(grid);
        for (i, &v) in vectors[j].iter().enumerate() {
            f.values_mut()[i + space.lo] = v;
        }
        // normalize ∫ u² = 1 under the quadrature weights, fix the sign
        let s = integrate(&f.map(|v| v * v)).sqrt();
        if s > 0.0 {
            let peak = f
                .values()
                .iter()
                .cloned()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap_or(1.0);
            let sign = if peak < 0.0 { -1.0 } else { 1.0 };
            f.scale(sign / s);
        }
        eigenfunctions.push(f);
    }

    Ok(Spectrum {
        eigenvalues,
        eigenfunctions,
    })
}

fn orthogonalize(space: &DofSpace, x: &mut [f64], basis: &[Vec<f64>]) {
    for v in basis {
        let c = space.dot(x, v);
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi -= c * vi;
        }
    }
}

/// λ₁ of −Δ + V, discarding the eigenfunction.
pub fn lambda1(potential: &Field) -> Result<f64, Error> {
    Ok(eigenpairs(potential, 1)?.eigenvalues[0])
}

/// Clamp a potential field into [0, CLAMP], mapping +∞ to the wall value.
pub fn clamp_potential(v: &Field) -> Field {
    v.map(|x| {
        if x.is_nan() {
            0.0
        } else {
            x.clamp(0.0, crate::grid::CLAMP)
        }
    })
}
