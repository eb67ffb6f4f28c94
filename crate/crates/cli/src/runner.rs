//! Execute one experiment config: solve, re-solve at h/2 (and at 2R for
//! radial support stability), and assemble the artifacts.

use crate::config::{canonical_text, ExperimentConfig, OutputKind, SCHEMA_VERSION};
use crate::profile::profile_csv;
use crate::record::{RefinementRecord, ResultRecord, SupportRecord};
use potopt_core::analysis::support_stability;
use potopt_core::grid::inner_quad;
use potopt_core::{solve, Error, Field, Objective, ProblemSpec, SolveResult};
use std::collections::BTreeMap;
use std::time::Instant;

pub struct RunOutput {
    pub record: ResultRecord,
    pub csv: Option<String>,
    pub summary: String,
    pub converged: bool,
    pub solve: SolveResult,
}

fn interp_onto(fine: &std::sync::Arc<potopt_core::Grid>, coarse: &Field) -> Field {
    let cg = coarse.grid();
    let n = cg.n();
    Field::from_fn(fine, |x| {
        let t = (x - cg.node(0)) / cg.h();
        let i = (t.floor() as usize).min(n - 2);
        let frac = (t - i as f64).clamp(0.0, 1.0);
        coarse.values()[i] * (1.0 - frac) + coarse.values()[i + 1] * frac
    })
}

/// Prescribed-potential evaluation: solve (−Δ+V)u = f and report E_f(V).
fn run_prescribed(cfg: &ExperimentConfig, values: &[f64]) -> Result<(SolveResult, f64), Error> {
    let grid = cfg.problem.domain.build()?;
    let f = cfg.problem.source.build(&grid)?;
    let v = Field::from_values(&grid, values.to_vec())?;
    let u = potopt_core::solve_linear(&v, &f)?;
    let energy = -0.5 * inner_quad(&f, &u);
    // refined pair by piecewise-linear interpolation of V
    let fine_grid = cfg.problem.domain.refined().build()?;
    let f2 = cfg.problem.source.build(&fine_grid)?;
    let v2 = interp_onto(&fine_grid, &v);
    let u2 = potopt_core::solve_linear(&v2, &f2)?;
    let energy2 = -0.5 * inner_quad(&f2, &u2);
    let mask = v.values().iter().map(|&x| x < potopt_core::CLAMP).collect();
    let res = SolveResult {
        u,
        objective_value: energy,
        duality_gap: None,
        constraint_residual: 0.0,
        el_residual: None,
        support: None,
        multiplier: 0.0,
        converged: true,
        contact_degenerate: false,
        recovered: potopt_core::recover::RecoveredPotential {
            potential: v,
            finite_mask: mask,
            multiplier: 0.0,
            contact_pos: None,
            contact_neg: None,
            sup_value: None,
            constraint_residual: 0.0,
        },
    };
    Ok((res, energy2))
}

pub fn run_config(cfg: &ExperimentConfig) -> Result<RunOutput, Error> {
    let t0 = Instant::now();
    let mut extras = BTreeMap::new();

    let (result, value_fine) = if let Some(values) = &cfg.potential_values {
        run_prescribed(cfg, values)?
    } else {
        let out = solve(&cfg.problem)?;
        let refined = ProblemSpec {
            domain: cfg.problem.domain.refined(),
            ..cfg.problem.clone()
        };
        let fine = solve(&refined)?;
        (out, fine.objective_value)
    };

    // support stability through an R-doubled rerun at the same spacing
    let support = match (&result.support, cfg.potential_values.is_none()) {
        (Some(_), true) => {
            let doubled_spec = ProblemSpec {
                domain: cfg.problem.domain.doubled(),
                ..cfg.problem.clone()
            };
            let doubled = solve(&doubled_spec)?;
            let combined = support_stability(&result.u, &doubled.u, None)?;
            Some(SupportRecord {
                support_radius: combined.support_radius,
                truncation_radius: combined.truncation_radius,
                stable: combined.stable,
                decay_slope: combined.decay_slope,
            })
        }
        _ => None,
    };

    if let Some(m) = result.recovered.sup_value {
        extras.insert("sup_norm".into(), m);
        if let (Some(pos), Some(neg)) = (&result.recovered.contact_pos, &result.recovered.contact_neg)
        {
            extras.insert("contact_nodes".into(), (pos.len() + neg.len()) as f64);
            let grid = result.u.grid();
            let far = pos
                .iter()
                .chain(neg.iter())
                .map(|&i| grid.node(i).abs())
                .fold(0.0f64, f64::max);
            extras.insert("contact_max_abs_coord".into(), far);
        }
    }
    if cfg.problem.objective != Objective::Energy {
        extras.insert("lambda".into(), result.objective_value);
    }

    let grid = cfg.problem.domain.build()?;
    let h = grid.h();
    let record = ResultRecord {
        schema_version: SCHEMA_VERSION,
        config_echo: canonical_text(cfg),
        converged: result.converged,
        objective_value: result.objective_value,
        constraint_residual: result.constraint_residual,
        duality_gap: result.duality_gap,
        el_residual: result.el_residual,
        multiplier: result.multiplier,
        support,
        refinement: Some(RefinementRecord {
            h,
            value_h: result.objective_value,
            h_half: h / 2.0,
            value_h_half: value_fine,
        }),
        wall_time_s: t0.elapsed().as_secs_f64(),
        extras,
    };
    record.validate_finite().map_err(Error::InvalidParameter)?;

    let f = cfg.problem.source.build(result.u.grid())?;
    let csv = if cfg.outputs.contains(&OutputKind::Csv) {
        Some(profile_csv(
            &result.u,
            &result.recovered.potential,
            &result.recovered.finite_mask,
            &f,
        ))
    } else {
        None
    };

    let summary = summarize(&record);
    Ok(RunOutput {
        converged: record.converged,
        record,
        csv,
        summary,
        solve: result,
    })
}

pub fn summarize(rec: &ResultRecord) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "objective = {:.10e}  (converged: {})\n",
        rec.objective_value, rec.converged
    ));
    s.push_str(&format!(
        "constraint residual = {:.3e}\n",
        rec.constraint_residual
    ));
    if let Some(g) = rec.duality_gap {
        s.push_str(&format!("duality gap = {g:.3e}\n"));
    }
    if let Some(r) = rec.el_residual {
        s.push_str(&format!("optimality-system closure = {r:.3e}\n"));
    }
    if let Some(sup) = &rec.support {
        s.push_str(&format!(
            "support radius = {:.6} of {:.6} (stable under doubling: {})\n",
            sup.support_radius, sup.truncation_radius, sup.stable
        ));
        if let Some(d) = sup.decay_slope {
            s.push_str(&format!("tail slope (log-log) = {d:.4}\n"));
        }
    }
    if let Some(r) = &rec.refinement {
        s.push_str(&format!(
            "refinement: J(h={:.3e}) = {:.10e}, J(h/2) = {:.10e}\n",
            r.h, r.value_h, r.value_h_half
        ));
    }
    for (k, v) in &rec.extras {
        s.push_str(&format!("{k} = {v:.10}\n"));
    }
    s
}
