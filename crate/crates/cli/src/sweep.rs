//! Parameter sweeps: one run per value, optionally in parallel, with output
//! order pinned to the value list.

use crate::config::{override_key, parse_config};
use crate::runner::{run_config, RunOutput};
use potopt_core::Error;

pub struct SweepOutput {
    pub runs: Vec<(f64, RunOutput)>,
    pub aggregate_csv: String,
    pub all_converged: bool,
}

pub fn run_sweep(
    base_text: &str,
    param: &str,
    values: &[f64],
    jobs: usize,
) -> Result<SweepOutput, Error> {
    // validate all configs before spending any solver time
    let mut configs = Vec::with_capacity(values.len());
    for &v in values {
        let text = override_key(base_text, param, v)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let cfg = parse_config(&text).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        configs.push((v, cfg));
    }

    let jobs = jobs.clamp(1, values.len().max(1));
    let mut slots: Vec<Option<Result<RunOutput, Error>>> =
        (0..configs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk_start in (0..configs.len()).step_by(jobs) {
            handles.clear();
            let chunk_end = (chunk_start + jobs).min(configs.len());
            for (offset, (_, cfg)) in configs[chunk_start..chunk_end].iter().enumerate() {
                handles.push((
                    chunk_start + offset,
                    scope.spawn(move || run_config(cfg)),
                ));
            }
            for (idx, handle) in handles.drain(..) {
                slots[idx] = Some(handle.join().expect("sweep worker"));
            }
        }
    });

    let mut runs = Vec::with_capacity(configs.len());
    let mut csv = String::from(
        "param_value,objective_value,constraint_residual,duality_gap,converged\n",
    );
    let mut all_converged = true;
    for ((v, _), slot) in configs.into_iter().zip(slots) {
        let out = slot.expect("slot filled")?;
        all_converged &= out.converged;
        let gap = out
            .record
            .duality_gap
            .map_or(String::new(), |g| format!("{g}"));
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            v, out.record.objective_value, out.record.constraint_residual, gap, out.converged
        ));
        runs.push((v, out));
    }
    Ok(SweepOutput {
        runs,
        aggregate_csv: csv,
        all_converged,
    })
}
