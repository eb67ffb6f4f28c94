//! Built-in named experiments, pinned so each headline check is a single
//! command.

use crate::config::{parse_config, ExperimentConfig};
use crate::record::ResultRecord;
use crate::runner::{run_config, summarize, RunOutput};
use potopt_core::analysis::{
    counterexample_energy, diagonal_bump_sharpness, lambda2_two_ball, ode_decay_check,
};
use potopt_core::Error;

pub const RECIPE_NAMES: &[&str] = &["examdelta", "figure1", "figure2", "counterexample", "twoball"];

const EXAMDELTA: &str = "\
schema = 1
problem.objective = energy
problem.constraint.family = lp
problem.constraint.p = 1
problem.domain.kind = interval
problem.domain.a = -1
problem.domain.b = 1
problem.domain.nodes = 1601
problem.f = delta0
outputs = csv,json,summary
";

const FIGURE1: &str = "\
schema = 1
problem.objective = energy
problem.constraint.family = lp
problem.constraint.p = 2
problem.domain.kind = radial
problem.domain.radius = 8
problem.domain.dimension = 3
problem.domain.nodes = 2001
problem.f = ball1
outputs = csv,json,summary
";

const FIGURE2: &str = "\
schema = 1
problem.objective = energy
problem.constraint.family = inverse_lp
problem.constraint.p = 2
problem.domain.kind = radial
problem.domain.radius = 8
problem.domain.dimension = 1
problem.domain.nodes = 2001
problem.f = ball1
outputs = csv,json,summary
";

const TWOBALL: &str = "\
schema = 1
problem.objective = lambda2
problem.constraint.family = inverse_lp
problem.constraint.p = 1
problem.domain.kind = interval
problem.domain.a = -16
problem.domain.b = 16
problem.domain.nodes = 3201
problem.f = none
outputs = csv,json,summary
";

pub struct RecipeOutput {
    pub files: Vec<(String, String)>,
    pub summary: String,
    pub converged: bool,
}

pub fn recipe_config(name: &str) -> Option<&'static str> {
    match name {
        "examdelta" => Some(EXAMDELTA),
        "figure1" => Some(FIGURE1),
        "figure2" => Some(FIGURE2),
        "twoball" => Some(TWOBALL),
        _ => None,
    }
}

fn emit(name: &str, out: &RunOutput) -> Vec<(String, String)> {
    let mut files = Vec::new();
    files.push((
        format!("{name}__result.json"),
        serde_json::to_string_pretty(&out.record).expect("record serializes") + "\n",
    ));
    if let Some(csv) = &out.csv {
        files.push((format!("{name}__profile.csv"), csv.clone()));
    }
    files.push((format!("{name}__summary.txt"), out.summary.clone()));
    files
}

pub fn run_recipe(name: &str) -> Result<RecipeOutput, Error> {
    match name {
        "examdelta" | "figure1" | "twoball" => {
            let cfg = parse(recipe_config(name).unwrap())?;
            let mut out = run_config(&cfg)?;
            if name == "twoball" {
                augment_twoball(&mut out.record)?;
                out.summary = summarize(&out.record);
            }
            Ok(RecipeOutput {
                files: emit(name, &out),
                summary: out.summary.clone(),
                converged: out.converged,
            })
        }
        "figure2" => {
            let cfg = parse(FIGURE2)?;
            let mut out = run_config(&cfg)?;
            // tail inequality diagnostic outside supp f = B₁
            let chk = ode_decay_check(&out.solve.u, 2.0, 1, 1.0, None);
            out.record
                .extras
                .insert("ode_decay_fraction".into(), chk.fraction);
            out.record
                .extras
                .insert("ode_decay_pass".into(), f64::from(u8::from(chk.pass)));
            out.summary = summarize(&out.record);
            Ok(RecipeOutput {
                files: emit(name, &out),
                summary: out.summary.clone(),
                converged: out.converged,
            })
        }
        "counterexample" => run_counterexample(),
        other => Err(Error::InvalidParameter(format!(
            "unknown recipe `{other}`; available: {}",
            RECIPE_NAMES.join(", ")
        ))),
    }
}

fn parse(text: &str) -> Result<ExperimentConfig, Error> {
    parse_config(text).map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn augment_twoball(record: &mut ResultRecord) -> Result<(), Error> {
    let rep = lambda2_two_ball(1.0, 1)?;
    record.extras.insert("lambda1_pair".into(), rep.lambda1);
    record.extras.insert("lambda2_pair".into(), rep.lambda2);
    record
        .extras
        .insert("lambda1_single_half_budget".into(), rep.lambda_single);
    record.extras.insert("separation".into(), rep.separation);
    Ok(())
}

fn run_counterexample() -> Result<RecipeOutput, Error> {
    let mut csv = String::from("cells,sharpness,bump_energy,wall_energy,limit_energy\n");
    let mut summary = String::new();
    let mut rows = Vec::new();
    for n in [2usize, 4, 8, 16] {
        let j = diagonal_bump_sharpness(n);
        let rep = counterexample_energy(n, j)?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            rep.cells, rep.sharpness, rep.bump_energy, rep.wall_energy, rep.limit_energy
        ));
        summary.push_str(&format!(
            "n = {:2}, j = {:5}: E1(bumps) = {:+.6e}, E(walls) = {:+.6e}, -1/(24n^2) = {:+.6e}\n",
            rep.cells, rep.sharpness, rep.bump_energy, rep.wall_energy, rep.limit_energy
        ));
        rows.push(rep);
    }
    summary.push_str("the wall energies track -1/(24 n^2) and the diagonal bump energies vanish\n");
    let json = serde_json::json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "experiment": "counterexample",
        "constraint_exponent": potopt_core::analysis::COUNTEREXAMPLE_P,
        "rows": rows.iter().map(|r| serde_json::json!({
            "cells": r.cells,
            "sharpness": r.sharpness,
            "bump_energy": r.bump_energy,
            "wall_energy": r.wall_energy,
            "limit_energy": r.limit_energy,
            "grid_nodes": r.grid_nodes,
        })).collect::<Vec<_>>(),
    });
    Ok(RecipeOutput {
        files: vec![
            (
                "counterexample__result.json".into(),
                serde_json::to_string_pretty(&json).expect("json") + "\n",
            ),
            ("counterexample__table.csv".into(), csv),
            ("counterexample__summary.txt".into(), summary.clone()),
        ],
        summary,
        converged: true,
    })
}
