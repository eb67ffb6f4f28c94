//! Hierarchical key-value experiment configs.
//!
//! One `key = value` pair per line, `#` comments, dotted lowercase keys.
//! Physical parameters carry no defaults; only `solver.*` and `outputs` may
//! be omitted. Unknown and duplicate keys are rejected. Potential values
//! given inline may contain the token `inf`; such entries are clamped to the
//! hard-wall value 1e12.

use potopt_core::optimize::SolverOptions;
use potopt_core::{ConstraintSpec, DomainSpec, Objective, ProblemSpec, SourceKind, CLAMP};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Csv,
    Json,
    Summary,
}

impl OutputKind {
    fn parse(s: &str) -> Result<OutputKind, ConfigError> {
        match s {
            "csv" => Ok(OutputKind::Csv),
            "json" => Ok(OutputKind::Json),
            "summary" => Ok(OutputKind::Summary),
            other => err(format!("unknown output artifact `{other}`")),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            OutputKind::Csv => "csv",
            OutputKind::Json => "json",
            OutputKind::Summary => "summary",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    /// prescribed potential: skip optimization and evaluate E_f(V)
    pub potential_values: Option<Vec<f64>>,
    pub outputs: Vec<OutputKind>,
}

pub const SCHEMA_VERSION: u32 = 1;

const KNOWN_KEYS: &[&str] = &[
    "schema",
    "problem.objective",
    "problem.constraint.family",
    "problem.constraint.p",
    "problem.constraint.alpha",
    "problem.domain.kind",
    "problem.domain.a",
    "problem.domain.b",
    "problem.domain.radius",
    "problem.domain.dimension",
    "problem.domain.nodes",
    "problem.f",
    "problem.potential.values",
    "solver.max_iter",
    "solver.grad_tol",
    "outputs",
];

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut pairs: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(format!("line {}: expected `key = value`", lineno + 1));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return err(format!("line {}: unknown key `{key}`", lineno + 1));
        }
        if value.is_empty() {
            return err(format!("line {}: empty value for `{key}`", lineno + 1));
        }
        if pairs.insert(key.clone(), value).is_some() {
            return err(format!("line {}: duplicate key `{key}`", lineno + 1));
        }
    }

    let get = |key: &str| -> Result<&str, ConfigError> {
        pairs
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
    };
    let get_f64 = |key: &str| -> Result<f64, ConfigError> {
        let raw = get(key)?;
        let v: f64 = raw
            .parse()
            .map_err(|_| ConfigError(format!("`{key}`: not a number: `{raw}`")))?;
        if !v.is_finite() {
            return err(format!("`{key}` must be finite, got `{raw}`"));
        }
        Ok(v)
    };
    let get_usize = |key: &str| -> Result<usize, ConfigError> {
        let raw = get(key)?;
        raw.parse()
            .map_err(|_| ConfigError(format!("`{key}`: not a count: `{raw}`")))
    };

    let schema = get_usize("schema")?;
    if schema != SCHEMA_VERSION as usize {
        return err(format!("unsupported schema {schema}"));
    }

    let objective = match get("problem.objective")? {
        "energy" => Objective::Energy,
        "lambda1" => Objective::Lambda1,
        "lambda2" => Objective::Lambda2,
        other => return err(format!("unknown objective `{other}`")),
    };

    let constraint = match get("problem.constraint.family")? {
        "lp" => ConstraintSpec::Lp {
            p: get_f64("problem.constraint.p")?,
        },
        "inverse_lp" => ConstraintSpec::InverseLp {
            p: get_f64("problem.constraint.p")?,
        },
        "exponential" => ConstraintSpec::Exponential {
            alpha: get_f64("problem.constraint.alpha")?,
        },
        other => return err(format!("unknown constraint family `{other}`")),
    };
    if matches!(constraint, ConstraintSpec::Exponential { .. }) && pairs.contains_key("problem.constraint.p") {
        return err("`problem.constraint.p` does not apply to the exponential family");
    }
    if !matches!(constraint, ConstraintSpec::Exponential { .. })
        && pairs.contains_key("problem.constraint.alpha")
    {
        return err("`problem.constraint.alpha` applies only to the exponential family");
    }
    constraint
        .validate()
        .map_err(|e| ConfigError(e.to_string()))?;

    let nodes = get_usize("problem.domain.nodes")?;
    if nodes < 3 || nodes > 20_000_000 {
        return err(format!("`problem.domain.nodes` out of range: {nodes}"));
    }
    let domain = match get("problem.domain.kind")? {
        "interval" => {
            if pairs.contains_key("problem.domain.radius")
                || pairs.contains_key("problem.domain.dimension")
            {
                return err("radial keys given for an interval domain");
            }
            DomainSpec::Interval {
                a: get_f64("problem.domain.a")?,
                b: get_f64("problem.domain.b")?,
                n: nodes,
            }
        }
        "radial" => {
            if pairs.contains_key("problem.domain.a") || pairs.contains_key("problem.domain.b") {
                return err("interval keys given for a radial domain");
            }
            let dim = get_usize("problem.domain.dimension")? as u32;
            DomainSpec::Radial {
                radius: get_f64("problem.domain.radius")?,
                dim,
                n: nodes,
            }
        }
        other => return err(format!("unknown domain kind `{other}`")),
    };

    let source = match get("problem.f")? {
        "none" => SourceKind::None,
        "one" => SourceKind::One,
        "delta0" => SourceKind::DeltaOrigin,
        "ball1" => SourceKind::UnitBall,
        other => return err(format!("unknown source `{other}`")),
    };
    if objective == Objective::Energy && source == SourceKind::None {
        return err("the energy objective needs a source; set `problem.f`");
    }

    let mut solver = SolverOptions::default();
    if pairs.contains_key("solver.max_iter") {
        solver.max_iter = get_usize("solver.max_iter")?;
    }
    if pairs.contains_key("solver.grad_tol") {
        solver.grad_tol = get_f64("solver.grad_tol")?;
        if !(solver.grad_tol > 0.0) {
            return err("`solver.grad_tol` must be positive");
        }
    }

    let potential_values = match pairs.get("problem.potential.values") {
        None => None,
        Some(raw) => {
            if objective != Objective::Energy {
                return err("`problem.potential.values` applies to the energy objective only");
            }
            let vals = parse_potential_values(raw)?;
            if vals.len() != nodes {
                return err(format!(
                    "`problem.potential.values`: {} values for {} nodes",
                    vals.len(),
                    nodes
                ));
            }
            Some(vals)
        }
    };

    let outputs = match pairs.get("outputs") {
        None => vec![OutputKind::Csv, OutputKind::Json, OutputKind::Summary],
        Some(raw) => {
            let mut out = Vec::new();
            for item in raw.split(',') {
                let kind = OutputKind::parse(item.trim())?;
                if !out.contains(&kind) {
                    out.push(kind);
                }
            }
            if out.is_empty() {
                return err("`outputs` must name at least one artifact");
            }
            out
        }
    };

    Ok(ExperimentConfig {
        problem: ProblemSpec {
            domain,
            objective,
            constraint,
            source,
            solver,
        },
        potential_values,
        outputs,
    })
}

/// Potential entries: finite nonnegative reals, or `inf` for a hard wall
/// (clamped to 1e12).
pub fn parse_potential_values(raw: &str) -> Result<Vec<f64>, ConfigError> {
    let mut vals = Vec::new();
    for tok in raw.split_whitespace() {
        let v = if tok == "inf" || tok == "+inf" {
            CLAMP
        } else {
            let x: f64 = tok
                .parse()
                .map_err(|_| ConfigError(format!("bad potential value `{tok}`")))?;
            if !x.is_finite() || x < 0.0 {
                return err(format!("potential values must be ≥ 0 or `inf`, got `{tok}`"));
            }
            x.min(CLAMP)
        };
        vals.push(v);
    }
    if vals.is_empty() {
        return err("empty potential value list");
    }
    Ok(vals)
}

/// Comma-separated numeric sweep values, e.g. `1.1,1.5,2,4`.
pub fn parse_values_list(raw: &str) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    for tok in raw.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            return err("empty entry in values list");
        }
        let v: f64 = tok
            .parse()
            .map_err(|_| ConfigError(format!("bad sweep value `{tok}`")))?;
        if !v.is_finite() {
            return err(format!("sweep value must be finite: `{tok}`"));
        }
        out.push(v);
    }
    if out.is_empty() {
        return err("empty values list");
    }
    Ok(out)
}

/// Canonical serialization; `parse_config(canonical_text(c)) == c`.
pub fn canonical_text(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    s.push_str(&format!("schema = {SCHEMA_VERSION}\n"));
    s.push_str(&format!(
        "problem.objective = {}\n",
        match cfg.problem.objective {
            Objective::Energy => "energy",
            Objective::Lambda1 => "lambda1",
            Objective::Lambda2 => "lambda2",
        }
    ));
    match cfg.problem.constraint {
        ConstraintSpec::Lp { p } => {
            s.push_str("problem.constraint.family = lp\n");
            s.push_str(&format!("problem.constraint.p = {p}\n"));
        }
        ConstraintSpec::InverseLp { p } => {
            s.push_str("problem.constraint.family = inverse_lp\n");
            s.push_str(&format!("problem.constraint.p = {p}\n"));
        }
        ConstraintSpec::Exponential { alpha } => {
            s.push_str("problem.constraint.family = exponential\n");
            s.push_str(&format!("problem.constraint.alpha = {alpha}\n"));
        }
    }
    match cfg.problem.domain {
        DomainSpec::Interval { a, b, n } => {
            s.push_str("problem.domain.kind = interval\n");
            s.push_str(&format!("problem.domain.a = {a}\n"));
            s.push_str(&format!("problem.domain.b = {b}\n"));
            s.push_str(&format!("problem.domain.nodes = {n}\n"));
        }
        DomainSpec::Radial { radius, dim, n } => {
            s.push_str("problem.domain.kind = radial\n");
            s.push_str(&format!("problem.domain.radius = {radius}\n"));
            s.push_str(&format!("problem.domain.dimension = {dim}\n"));
            s.push_str(&format!("problem.domain.nodes = {n}\n"));
        }
    }
    s.push_str(&format!(
        "problem.f = {}\n",
        match cfg.problem.source {
            SourceKind::None => "none",
            SourceKind::One => "one",
            SourceKind::DeltaOrigin => "delta0",
            SourceKind::UnitBall => "ball1",
        }
    ));
    if let Some(vals) = &cfg.potential_values {
        let toks: Vec<String> = vals
            .iter()
            .map(|&v| {
                if v >= CLAMP {
                    "inf".to_string()
                } else {
                    format!("{v}")
                }
            })
            .collect();
        s.push_str(&format!("problem.potential.values = {}\n", toks.join(" ")));
    }
    s.push_str(&format!("solver.max_iter = {}\n", cfg.problem.solver.max_iter));
    s.push_str(&format!("solver.grad_tol = {}\n", cfg.problem.solver.grad_tol));
    let outs: Vec<&str> = cfg.outputs.iter().map(|o| o.name()).collect();
    s.push_str(&format!("outputs = {}\n", outs.join(",")));
    s
}

/// Override a numeric key in raw config text (for sweeps). The key must be a
/// known numeric field; it is replaced if present, appended otherwise.
pub fn override_key(text: &str, key: &str, value: f64) -> Result<String, ConfigError> {
    const NUMERIC: &[&str] = &[
        "problem.constraint.p",
        "problem.constraint.alpha",
        "problem.domain.a",
        "problem.domain.b",
        "problem.domain.radius",
        "problem.domain.dimension",
        "problem.domain.nodes",
        "solver.max_iter",
        "solver.grad_tol",
    ];
    if !NUMERIC.contains(&key) {
        return err(format!("`{key}` is not a sweepable numeric field"));
    }
    let mut lines: Vec<String> = Vec::new();
    let mut replaced = false;
    let integral = matches!(
        key,
        "problem.domain.nodes" | "problem.domain.dimension" | "solver.max_iter"
    );
    let rendered = if integral {
        if value.fract() != 0.0 || value < 0.0 {
            return err(format!("`{key}` needs a nonnegative integer, got {value}"));
        }
        format!("{}", value as u64)
    } else {
        format!("{value}")
    };
    for raw in text.lines() {
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if let Some((k, _)) = stripped.split_once('=') {
            if k.trim() == key {
                lines.push(format!("{key} = {rendered}"));
                replaced = true;
                continue;
            }
        }
        lines.push(raw.to_string());
    }
    if !replaced {
        lines.push(format!("{key} = {rendered}"));
    }
    Ok(lines.join("\n") + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
schema = 1
problem.objective = energy
problem.constraint.family = lp
problem.constraint.p = 2
problem.domain.kind = interval
problem.domain.a = 0
problem.domain.b = 1
problem.domain.nodes = 101
problem.f = one
";

    #[test]
    fn parses_minimal_config() {
        let cfg = parse_config(GOOD).unwrap();
        assert_eq!(cfg.problem.objective, Objective::Energy);
        assert_eq!(cfg.problem.constraint, ConstraintSpec::Lp { p: 2.0 });
        assert_eq!(cfg.outputs.len(), 3);
    }

    #[test]
    fn canonical_round_trip() {
        let cfg = parse_config(GOOD).unwrap();
        let echoed = canonical_text(&cfg);
        let re = parse_config(&echoed).unwrap();
        assert_eq!(cfg, re);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(parse_config("schema = 1\nbogus.key = 3\n").is_err());
        let dup = format!("{GOOD}problem.f = one\n");
        assert!(parse_config(&dup).is_err());
    }

    #[test]
    fn rejects_missing_physical_parameters() {
        let no_f = GOOD.replace("problem.f = one\n", "");
        assert!(parse_config(&no_f).is_err());
        let no_p = GOOD.replace("problem.constraint.p = 2\n", "");
        assert!(parse_config(&no_p).is_err());
    }

    #[test]
    fn solver_keys_have_defaults() {
        let cfg = parse_config(GOOD).unwrap();
        assert_eq!(cfg.problem.solver.max_iter, 100_000);
        let tuned = format!("{GOOD}solver.grad_tol = 1e-6\n");
        let cfg = parse_config(&tuned).unwrap();
        assert_eq!(cfg.problem.solver.grad_tol, 1e-6);
    }

    #[test]
    fn potential_values_with_inf_clamp() {
        let mut text = GOOD.replace("problem.domain.nodes = 101", "problem.domain.nodes = 4");
        text.push_str("problem.potential.values = 0 1.5 inf 2\n");
        let cfg = parse_config(&text).unwrap();
        let vals = cfg.potential_values.unwrap();
        assert_eq!(vals[2], CLAMP);
        assert_eq!(vals[1], 1.5);
    }

    #[test]
    fn potential_values_rejects_negative() {
        assert!(parse_potential_values("1 -2 3").is_err());
        assert!(parse_potential_values("nan").is_err());
    }

    #[test]
    fn values_list_parser() {
        assert_eq!(parse_values_list("1.1, 1.5,2").unwrap(), vec![1.1, 1.5, 2.0]);
        assert!(parse_values_list("1,,2").is_err());
        assert!(parse_values_list("inf").is_err());
    }

    #[test]
    fn override_numeric_key() {
        let out = override_key(GOOD, "problem.constraint.p", 3.0).unwrap();
        let cfg = parse_config(&out).unwrap();
        assert_eq!(cfg.problem.constraint, ConstraintSpec::Lp { p: 3.0 });
        assert!(override_key(GOOD, "problem.objective", 1.0).is_err());
    }

    #[test]
    fn radial_interval_key_mixing_rejected() {
        let mixed = GOOD.replace(
            "problem.domain.kind = interval",
            "problem.domain.kind = radial",
        );
        assert!(parse_config(&mixed).is_err());
    }
}
