//! Parameter sweeps: the cross product of swept values times seeds, one run
//! directory each, plus an aggregate CSV.
//!
//! Parameter paths are dotted field paths into the config JSON. Numeric
//! segments index lists and `*` applies to every element, so
//! `players.*.gamma` sets every player's gamma.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::report::{summarize, write_run, Summary};
use super::{fmt_f64, read_text, write_text, IoError};
use crate::engine::{derive_seed, run_game};
use crate::model::GameConfig;
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParameter {
    pub path: String,
    /// `start:stop:step`, inclusive of `stop`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Relative paths resolve against the spec file's directory.
    pub base_config: PathBuf,
    #[serde(default)]
    pub parameters: Vec<SweepParameter>,
    pub seeds: Seeds,
    pub out_dir: PathBuf,
}

/// One cell of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub values: Vec<Value>,
    pub seed: u64,
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub plan: RunPlan,
    pub result: Result<Summary, String>,
}

impl RunOutcome {
    pub fn failed(&self) -> bool {
        self.result.is_err()
    }
}

pub fn parse_range(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(format!("range {text:?} is not start:stop:step"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("range {text:?}: {e}"));
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(format!("range {text:?} needs a positive step and finite bounds"));
    }
    // snap to the precision written in the spec, so 0.1:0.3:0.1 gives 0.3
    let decimals = parts
        .iter()
        .map(|p| p.trim().split_once('.').map_or(0, |(_, frac)| frac.len()))
        .max()
        .unwrap_or(0);
    let snap = |v: f64| format!("{v:.decimals$}").parse::<f64>().unwrap_or(v);
    let mut out = Vec::new();
    let slack = step * 1e-9;
    let mut i = 0u64;
    loop {
        let v = start + step * i as f64;
        if v > stop + slack {
            break;
        }
        out.push(snap(v.min(stop.max(start))));
        i += 1;
        if i > 1_000_000 {
            return Err(format!("range {text:?} is too long"));
        }
    }
    Ok(out)
}

/// Whole numbers become JSON integers so they can land in integer fields.
fn number_value(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        Value::from(v as i64)
    } else {
        Value::from(v)
    }
}

impl SweepParameter {
    pub fn resolved_values(&self) -> Result<Vec<Value>, String> {
        match (&self.range, &self.values) {
            (Some(r), None) => Ok(parse_range(r)?.into_iter().map(number_value).collect()),
            (None, Some(v)) if !v.is_empty() => Ok(v.clone()),
            _ => Err(format!("parameter {} needs exactly one of a range or a non-empty value list", self.path)),
        }
    }
}

/// Sets every location matched by `path` to `value`. Only numeric, string and
/// boolean leaves may be overwritten.
pub fn set_path(root: &mut Value, path: &str, value: &Value) -> Result<usize, String> {
    let segments: Vec<&str> = path.split('.').collect();
    let hits = set_segments(root, &segments, value, path)?;
    if hits == 0 {
        return Err(format!("path {path} matches nothing"));
    }
    Ok(hits)
}

fn set_segments(node: &mut Value, segments: &[&str], value: &Value, path: &str) -> Result<usize, String> {
    let Some((head, rest)) = segments.split_first() else {
        return match node {
            Value::Number(_) | Value::String(_) | Value::Bool(_) => {
                *node = value.clone();
                Ok(1)
            }
            _ => Err(format!("path {path} does not end at a numeric or enum field")),
        };
    };
    match node {
        Value::Array(items) if *head == "*" => {
            let mut hits = 0;
            for item in items {
                hits += set_segments(item, rest, value, path)?;
            }
            Ok(hits)
        }
        Value::Array(items) => {
            let index: usize = head.parse().map_err(|_| format!("path {path}: {head} is not an index"))?;
            let item = items.get_mut(index).ok_or_else(|| format!("path {path}: index {index} out of range"))?;
            set_segments(item, rest, value, path)
        }
        Value::Object(map) => {
            let child = map.get_mut(*head).ok_or_else(|| format!("path {path}: no field {head}"))?;
            set_segments(child, rest, value, path)
        }
        _ => Err(format!("path {path}: cannot descend into {head}")),
    }
}

pub fn apply_parameters(base: &GameConfig, params: &[SweepParameter], values: &[Value]) -> Result<GameConfig, String> {
    let mut json = serde_json::to_value(base).map_err(|e| e.to_string())?;
    for (p, v) in params.iter().zip(values) {
        set_path(&mut json, &p.path, v)?;
    }
    serde_json::from_value(json).map_err(|e| format!("swept config no longer parses: {e}"))
}

fn compare_values(a: &Value, b: &Value) -> Ordering {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        _ => a.to_string().cmp(&b.to_string()),
    }
}

fn compare_plans(a: &(Vec<Value>, u64), b: &(Vec<Value>, u64)) -> Ordering {
    for (x, y) in a.0.iter().zip(&b.0) {
        match compare_values(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.1.cmp(&b.1)
}

/// Every run of the sweep, in lexicographic order of parameter values, then
/// seed.
pub fn plan_runs(spec: &SweepSpec, base: &GameConfig, out_dir: &Path) -> Result<Vec<RunPlan>, String> {
    let axes: Vec<Vec<Value>> = spec
        .parameters
        .iter()
        .map(SweepParameter::resolved_values)
        .collect::<Result<_, _>>()?;
    let seeds: Vec<u64> = match &spec.seeds {
        Seeds::Count(0) => return Err("at least one seed is required".into()),
        Seeds::Count(n) => (0..*n).map(|i| derive_seed(base.rng_seed, i)).collect(),
        Seeds::List(list) if list.is_empty() => return Err("at least one seed is required".into()),
        Seeds::List(list) => list.clone(),
    };
    // check every path up front
    for (p, axis) in spec.parameters.iter().zip(&axes) {
        let mut json = serde_json::to_value(base).map_err(|e| e.to_string())?;
        set_path(&mut json, &p.path, &axis[0])?;
    }
    let mut combos: Vec<Vec<Value>> = vec![Vec::new()];
    for axis in &axes {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    let mut cells: Vec<(Vec<Value>, u64)> = combos
        .into_iter()
        .flat_map(|values| seeds.iter().map(move |&s| (values.clone(), s)))
        .collect();
    cells.sort_by(compare_plans);
    Ok(cells
        .into_iter()
        .enumerate()
        .map(|(i, (values, seed))| RunPlan { values, seed, dir: out_dir.join(format!("run-{i:05}")) })
        .collect())
}

fn execute(plan: &RunPlan, spec: &SweepSpec, base: &GameConfig) -> RunOutcome {
    let result = (|| {
        let mut config = apply_parameters(base, &spec.parameters, &plan.values)?;
        config.rng_seed = plan.seed;
        let trace = run_game(&config).map_err(|e| e.to_string())?;
        write_run(&plan.dir, &trace).map_err(|e| e.to_string())?;
        Ok(summarize(&trace))
    })();
    RunOutcome { plan: plan.clone(), result }
}

fn value_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn aggregate_csv(spec: &SweepSpec, outcomes: &[RunOutcome], n_types: usize) -> Result<String, IoError> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let fail = |e: csv::Error| IoError::Format(e.to_string());
    let mut header: Vec<String> = vec!["run".into()];
    header.extend(spec.parameters.iter().map(|p| p.path.clone()));
    header.extend(["seed", "status", "error"].map(String::from));
    header.extend((0..n_types).map(|t| format!("fci_{t}")));
    header.extend(
        ["reshare_entropy", "engagement_entropy", "mean_alignment", "mean_dissent", "total_likes", "total_reshares", "mean_payoff"]
            .map(String::from),
    );
    writer.write_record(&header).map_err(fail)?;
    for outcome in outcomes {
        let mut row: Vec<String> = vec![outcome
            .plan
            .dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()];
        row.extend(outcome.plan.values.iter().map(value_cell));
        row.push(outcome.plan.seed.to_string());
        match &outcome.result {
            Ok(s) => {
                row.push("ok".into());
                row.push(String::new());
                let fm = s.final_metrics.as_ref();
                for t in 0..n_types {
                    row.push(fm.and_then(|m| m.fci.get(t)).map(|v| fmt_f64(*v)).unwrap_or_default());
                }
                let cell = |f: fn(&super::report::FinalMetrics) -> f64| fm.map(|m| fmt_f64(f(m))).unwrap_or_default();
                row.push(cell(|m| m.reshare_entropy));
                row.push(cell(|m| m.engagement_entropy));
                row.push(cell(|m| m.mean_alignment));
                row.push(cell(|m| m.mean_dissent));
                row.push(s.total_likes.to_string());
                row.push(s.total_reshares.to_string());
                let mean = if s.payoffs.is_empty() { 0.0 } else { s.payoffs.iter().sum::<f64>() / s.payoffs.len() as f64 };
                row.push(fmt_f64(mean));
            }
            Err(e) => {
                row.push("failed".into());
                row.push(e.replace('\n', " "));
                row.extend(std::iter::repeat_n(String::new(), n_types + 7));
            }
        }
        writer.write_record(&row).map_err(fail)?;
    }
    let bytes = writer.into_inner().map_err(|e| IoError::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IoError::Format(e.to_string()))
}

#[derive(Debug)]
pub struct SweepReport {
    pub outcomes: Vec<RunOutcome>,
    pub aggregate_path: PathBuf,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.failed()).count()
    }
}

pub fn load_spec(path: &Path) -> Result<SweepSpec, IoError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| IoError::parse(path, e))
}

fn resolve(base_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

/// Runs a sweep described by the spec at `spec_path`.
pub fn run_sweep(spec_path: &Path, workers: Option<usize>) -> Result<SweepReport, IoError> {
    let spec = load_spec(spec_path)?;
    let dir = spec_path.parent().unwrap_or(Path::new("."));
    run_sweep_spec(&spec, dir, workers)
}

pub fn run_sweep_spec(spec: &SweepSpec, base_dir: &Path, workers: Option<usize>) -> Result<SweepReport, IoError> {
    let config_path = resolve(base_dir, &spec.base_config);
    let base = super::load_config(&config_path)?;
    let out_dir = resolve(base_dir, &spec.out_dir);
    let plans = plan_runs(spec, &base, &out_dir).map_err(|m| IoError::Format(format!("sweep spec: {m}")))?;
    let outcomes = par::with_workers(workers, |exec: Execution| {
        par::map_indexed(&plans, exec, |_, plan| execute(plan, spec, &base))
    });
    let n_types = crate::metrics::ContentTyping::from_config(&base).len();
    let aggregate_path = out_dir.join("aggregate.csv");
    write_text(&aggregate_path, &aggregate_csv(spec, &outcomes, n_types)?)?;
    Ok(SweepReport { outcomes, aggregate_path })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn inclusive_ranges() {
        assert_eq!(parse_range("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("0:1:0.1").unwrap().len(), 11);
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert_eq!(parse_range("0.1:0.3:0.1").unwrap(), vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn integer_ranges_fit_integer_fields() {
        let base = scenarios::two_player_idealist();
        let param = SweepParameter { path: "horizon".into(), range: Some("1:3:1".into()), values: None };
        let values = param.resolved_values().unwrap();
        assert_eq!(value_cell(&values[2]), "3");
        let config = apply_parameters(&base, &[param], &values[2..]).unwrap();
        assert_eq!(config.horizon, 3);
    }

    #[test]
    fn wildcard_paths() {
        let base = scenarios::two_player_idealist();
        let params = vec![SweepParameter { path: "players.*.gamma".into(), range: None, values: Some(vec![0.25.into()]) }];
        let config = apply_parameters(&base, &params, &[0.25.into()]).unwrap();
        assert!(config.players.iter().all(|p| p.gamma == 0.25));
        let mut json = serde_json::to_value(&base).unwrap();
        assert!(set_path(&mut json, "players.0.ideal", &Value::from(1.0)).is_err());
        assert!(set_path(&mut json, "players.9.gamma", &Value::from(1.0)).is_err());
        assert_eq!(set_path(&mut json, "info_mode", &Value::from("imperfect")).unwrap(), 1);
    }

    #[test]
    fn plans_are_ordered_by_value_then_seed() {
        let base = scenarios::two_player_idealist();
        let spec = SweepSpec {
            base_config: "unused.json".into(),
            parameters: vec![SweepParameter { path: "players.*.gamma".into(), range: Some("0:1:0.5".into()), values: None }],
            seeds: Seeds::List(vec![9, 2]),
            out_dir: "out".into(),
        };
        let plans = plan_runs(&spec, &base, Path::new("out")).unwrap();
        assert_eq!(plans.len(), 6);
        let keys: Vec<(f64, u64)> = plans.iter().map(|p| (p.values[0].as_f64().unwrap(), p.seed)).collect();
        assert_eq!(keys, vec![(0.0, 2), (0.0, 9), (0.5, 2), (0.5, 9), (1.0, 2), (1.0, 9)]);
    }
}
