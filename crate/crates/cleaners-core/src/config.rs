//! Flat key-value configuration files with dotted sections.
//!
//! Grammar, line by line: blank lines and `#` comments are skipped; every
//! other line is `key = value`. Keys are lowercase dotted paths
//! (`run.cutoff`). Values are integers, floats, booleans, quoted strings,
//! or bare words. A value may also be an inline table
//! `{kind: "uniform", p: 0.02}` whose entries flatten onto the key as
//! dotted children. Duplicate keys and unknown keys are hard errors.

use std::collections::BTreeMap;

use crate::bounds::BoundParams;
use crate::shape::ShapeKind;
use crate::sim::{CleanerKind, RunConfig};
use crate::spread::SpreadPolicy;
use crate::{Error, Result};

pub const START_RULE: &str = "boundary-first";

#[derive(Clone, PartialEq, Debug)]
pub enum Value {
    Int(i128),
    Float(f64),
    Bool(bool),
    Str(String),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Float(_) => "float",
            Value::Bool(_) => "boolean",
            Value::Str(_) => "string",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, (Value, usize)>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (Value, usize)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let eq = line.find('=').ok_or(Error::ConfigParse {
                line: line_no,
                col: 1,
                msg: "expected `key = value`".to_string(),
            })?;
            let key = line[..eq].trim();
            check_key(key, line_no)?;
            let value_text = line[eq + 1..].trim();
            let value_col = raw.find(value_text).map_or(eq + 2, |i| i + 1);
            if value_text.starts_with('{') {
                let inner = value_text
                    .strip_prefix('{')
                    .and_then(|s| s.strip_suffix('}'))
                    .ok_or(Error::ConfigParse {
                        line: line_no,
                        col: value_col,
                        msg: "inline table must close with `}` on the same line".to_string(),
                    })?;
                for part in inner.split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    let colon = part.find(':').ok_or(Error::ConfigParse {
                        line: line_no,
                        col: value_col,
                        msg: format!("inline table entry {part:?} is not `name: value`"),
                    })?;
                    let sub_key = part[..colon].trim();
                    check_key(sub_key, line_no)?;
                    let sub_value = parse_scalar(part[colon + 1..].trim(), line_no, value_col)?;
                    insert_unique(
                        &mut entries,
                        format!("{key}.{sub_key}"),
                        sub_value,
                        line_no,
                        value_col,
                    )?;
                }
            } else {
                let value = parse_scalar(value_text, line_no, value_col)?;
                insert_unique(&mut entries, key.to_string(), value, line_no, value_col)?;
            }
        }
        Ok(ConfigMap { entries })
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.entries.remove(key).map(|(v, _)| v)
    }

    fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Int(i)) if (0..=u64::MAX as i128).contains(&i) => Ok(Some(i as u64)),
            Some(v) => Err(Error::ConfigValidation(format!(
                "{key} must be a nonnegative integer, got {}",
                describe(&v)
            ))),
        }
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(f)),
            Some(Value::Int(i)) => Ok(Some(i as f64)),
            Some(v) => Err(Error::ConfigValidation(format!(
                "{key} must be a number, got {}",
                describe(&v)
            ))),
        }
    }

    fn take_bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(b)),
            Some(v) => Err(Error::ConfigValidation(format!(
                "{key} must be true or false, got {}",
                describe(&v)
            ))),
        }
    }

    fn take_str(&mut self, key: &str) -> Result<Option<String>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Str(s)) => Ok(Some(s)),
            Some(v) => Err(Error::ConfigValidation(format!(
                "{key} must be a string, got {}",
                describe(&v)
            ))),
        }
    }

    fn finish(self, schema: &str) -> Result<()> {
        if let Some((key, (_, line))) = self.entries.into_iter().next() {
            return Err(Error::ConfigValidation(format!(
                "unknown key `{key}` on line {line} (not part of a {schema} config)"
            )));
        }
        Ok(())
    }
}

fn describe(v: &Value) -> String {
    match v {
        Value::Int(i) => format!("{} `{i}`", v.type_name()),
        Value::Float(f) => format!("{} `{f}`", v.type_name()),
        Value::Bool(b) => format!("{} `{b}`", v.type_name()),
        Value::Str(s) => format!("{} {s:?}", v.type_name()),
    }
}

fn check_key(key: &str, line: usize) -> Result<()> {
    let ok = !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || "._-".contains(c));
    if ok {
        Ok(())
    } else {
        Err(Error::ConfigParse {
            line,
            col: 1,
            msg: format!("invalid key {key:?}"),
        })
    }
}

fn parse_scalar(text: &str, line: usize, col: usize) -> Result<Value> {
    if text.is_empty() {
        return Err(Error::ConfigParse {
            line,
            col,
            msg: "missing value".to_string(),
        });
    }
    if let Some(stripped) = text.strip_prefix('"') {
        let inner = stripped.strip_suffix('"').filter(|s| !s.contains('"'));
        return match inner {
            Some(s) => Ok(Value::Str(s.to_string())),
            None => Err(Error::ConfigParse {
                line,
                col,
                msg: format!("malformed string literal {text}"),
            }),
        };
    }
    match text {
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        _ => {}
    }
    let numeric_lead = text.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+');
    if numeric_lead {
        if let Ok(i) = text.parse::<i128>() {
            return Ok(Value::Int(i));
        }
        if let Ok(f) = text.parse::<f64>() {
            if f.is_finite() {
                return Ok(Value::Float(f));
            }
        }
        return Err(Error::ConfigParse {
            line,
            col,
            msg: format!("malformed number {text:?}"),
        });
    }
    if text
        .chars()
        .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || "._-".contains(c))
    {
        return Ok(Value::Str(text.to_string()));
    }
    Err(Error::ConfigParse {
        line,
        col,
        msg: format!("unrecognized value {text:?}"),
    })
}

fn insert_unique(
    entries: &mut BTreeMap<String, (Value, usize)>,
    key: String,
    value: Value,
    line: usize,
    col: usize,
) -> Result<()> {
    if entries.contains_key(&key) {
        return Err(Error::ConfigParse {
            line,
            col,
            msg: format!("duplicate key `{key}`"),
        });
    }
    entries.insert(key, (value, line));
    Ok(())
}

/// Parses a simulation config, filling defaults: sweep cleaner, cutoff
/// 3000, 1000 replications, seed 0, trajectory recording off, stride 10.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let mut map = ConfigMap::parse(text)?;
    let shape = match map.take_str("shape")? {
        Some(s) => ShapeKind::parse(&s)?,
        None => return Err(Error::ConfigValidation("missing key `shape`".to_string())),
    };
    let s0 = map
        .take_u64("s0")?
        .ok_or_else(|| Error::ConfigValidation("missing key `s0`".to_string()))?;
    let k64 = map
        .take_u64("agents.k")?
        .ok_or_else(|| Error::ConfigValidation("missing key `agents.k`".to_string()))?;
    let k = u32::try_from(k64).map_err(|_| {
        Error::ConfigValidation(format!("agents.k = {k64} exceeds the supported team size"))
    })?;
    if let Some(start) = map.take_str("agents.start")? {
        if start != START_RULE {
            return Err(Error::ConfigValidation(format!(
                "agents.start must be {START_RULE:?}, got {start:?}"
            )));
        }
    }
    let cleaner = match map.take_str("cleaner")? {
        None => CleanerKind::Sweep,
        Some(s) => CleanerKind::parse(&s).ok_or_else(|| {
            Error::ConfigValidation(format!("unknown cleaner {s:?} (expected sweep or perfect)"))
        })?,
    };
    let kind = map.take_str("spread.kind")?;
    let p = map.take_f64("spread.p")?;
    let d = map.take_u64("spread.d")?;
    let policy = match (kind.as_deref(), p, d) {
        (Some("uniform") | None, Some(p), None) => SpreadPolicy::uniform(p),
        (Some("deterministic") | None, None, Some(d)) => SpreadPolicy::deterministic(d),
        (Some("uniform"), _, Some(_)) => Err(Error::ConfigValidation(
            "uniform spread does not take spread.d".to_string(),
        )),
        (Some("uniform"), None, None) => Err(Error::ConfigValidation(
            "uniform spread requires spread.p".to_string(),
        )),
        (Some("deterministic"), Some(_), _) => Err(Error::ConfigValidation(
            "deterministic spread does not take spread.p".to_string(),
        )),
        (Some("deterministic"), None, None) => Err(Error::ConfigValidation(
            "deterministic spread requires spread.d".to_string(),
        )),
        (Some(other), _, _) => Err(Error::ConfigValidation(format!(
            "unknown spread.kind {other:?} (expected uniform or deterministic)"
        ))),
        (None, Some(_), Some(_)) => Err(Error::ConfigValidation(
            "spread.p and spread.d are mutually exclusive".to_string(),
        )),
        (None, None, None) => Err(Error::ConfigValidation(
            "spread requires spread.p (uniform) or spread.d (deterministic)".to_string(),
        )),
    }
    .map_err(|e| match e {
        Error::InvalidParam {
            name,
            value,
            reason,
        } => Error::ConfigValidation(format!("spread.{name} = {value}: {reason}")),
        other => other,
    })?;
    let mut config = RunConfig::new(shape, s0, k, policy, cleaner);
    if let Some(v) = map.take_u64("run.cutoff")? {
        config.cutoff = v;
    }
    if let Some(v) = map.take_u64("run.replications")? {
        config.replications = v;
    }
    if let Some(v) = map.take_u64("run.seed")? {
        config.seed = v;
    }
    if let Some(v) = map.take_bool("run.record_trajectory")? {
        config.record_trajectory = v;
    }
    if let Some(v) = map.take_u64("run.stride")? {
        config.record_stride = v;
    }
    if let Some(v) = map.take_bool("run.early_exit")? {
        config.early_exit = v;
    }
    map.finish("simulation")?;
    config
        .validate()
        .map_err(|e| Error::ConfigValidation(e.to_string()))?;
    Ok(config)
}

/// Emits the canonical text for a simulation config; `parse_run_config`
/// reads it back to an equal value.
pub fn emit_run_config(config: &RunConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("shape = {:?}\n", config.shape.name()));
    out.push_str(&format!("s0 = {}\n", config.s0));
    out.push_str(&format!("agents.k = {}\n", config.k));
    out.push_str(&format!("agents.start = {START_RULE:?}\n"));
    out.push_str(&format!("cleaner = {:?}\n", config.cleaner.name()));
    match config.policy.variant {
        crate::spread::SpreadVariant::Uniform { p } => {
            out.push_str("spread.kind = \"uniform\"\n");
            out.push_str(&format!("spread.p = {p}\n"));
        }
        crate::spread::SpreadVariant::Deterministic { d } => {
            out.push_str("spread.kind = \"deterministic\"\n");
            out.push_str(&format!("spread.d = {d}\n"));
        }
    }
    out.push_str(&format!("run.cutoff = {}\n", config.cutoff));
    out.push_str(&format!("run.replications = {}\n", config.replications));
    out.push_str(&format!("run.seed = {}\n", config.seed));
    out.push_str(&format!(
        "run.record_trajectory = {}\n",
        config.record_trajectory
    ));
    out.push_str(&format!("run.stride = {}\n", config.record_stride));
    out.push_str(&format!("run.early_exit = {}\n", config.early_exit));
    out
}

/// Parses an analytic-bound parameter file: s0, k, p, delta, s_hat.
pub fn parse_bound_params(text: &str) -> Result<BoundParams> {
    let mut map = ConfigMap::parse(text)?;
    let need_u64 = |key: &'static str, map: &mut ConfigMap| -> Result<u64> {
        map.take_u64(key)?
            .ok_or_else(|| Error::ConfigValidation(format!("missing key `{key}`")))
    };
    let s0 = need_u64("s0", &mut map)?;
    let k = need_u64("k", &mut map)?;
    let s_hat = need_u64("s_hat", &mut map)?;
    let p = map
        .take_f64("p")?
        .ok_or_else(|| Error::ConfigValidation("missing key `p`".to_string()))?;
    let delta = map
        .take_f64("delta")?
        .ok_or_else(|| Error::ConfigValidation("missing key `delta`".to_string()))?;
    map.finish("bound")?;
    BoundParams::new(s0, k, p, delta, s_hat).map_err(|e| Error::ConfigValidation(e.to_string()))
}

/// Emits the canonical text for bound parameters.
pub fn emit_bound_params(params: &BoundParams) -> String {
    format!(
        "s0 = {}\nk = {}\np = {}\ndelta = {}\ns_hat = {}\n",
        params.s0, params.k, params.p, params.delta, params.s_hat
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let config =
            parse_run_config("shape = \"sphere\"\ns0 = 500\nagents.k = 5\nspread.p = 0.02\n")
                .unwrap();
        assert_eq!(config.shape, ShapeKind::DigitalSphere);
        assert_eq!(config.s0, 500);
        assert_eq!(config.k, 5);
        assert_eq!(config.cleaner, CleanerKind::Sweep);
        assert_eq!(config.cutoff, 3000);
        assert_eq!(config.replications, 1000);
        assert_eq!(config.seed, 0);
        assert!(!config.record_trajectory);
        assert_eq!(config.record_stride, 10);
        assert_eq!(config.policy, SpreadPolicy::uniform(0.02).unwrap());
    }

    #[test]
    fn inline_table_flattens_to_dotted_keys() {
        let inline = parse_run_config(
            "shape = square\ns0 = 100\nagents.k = 2\nspread = {kind: \"uniform\", p: 0.5}\n",
        )
        .unwrap();
        let dotted = parse_run_config(
            "shape = square\ns0 = 100\nagents.k = 2\nspread.kind = uniform\nspread.p = 0.5\n",
        )
        .unwrap();
        assert_eq!(inline, dotted);
    }

    #[test]
    fn out_of_range_probability_names_the_violation() {
        let err = parse_run_config("shape = square\ns0 = 100\nagents.k = 2\nspread.p = 1.5\n")
            .unwrap_err();
        match err {
            Error::ConfigValidation(msg) => {
                assert!(msg.contains("spread.p"), "{msg}");
                assert!(msg.contains("[0, 1]"), "{msg}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_key_reports_position() {
        let err = ConfigMap::parse("s0 = 5\n# note\ns0 = 6\n").unwrap_err();
        match err {
            Error::ConfigParse { line, col, msg } => {
                assert_eq!(line, 3);
                assert_eq!(col, 6);
                assert!(msg.contains("duplicate"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_run_config(
            "shape = square\ns0 = 100\nagents.k = 2\nspread.p = 0.1\nrun.cutof = 9\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("run.cutof"), "{err}");
    }

    #[test]
    fn malformed_lines_report_position() {
        match ConfigMap::parse("just words\n").unwrap_err() {
            Error::ConfigParse { line, msg, .. } => {
                assert_eq!(line, 1);
                assert!(msg.contains("key = value"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        match ConfigMap::parse("a = 1\nb = \"open\n").unwrap_err() {
            Error::ConfigParse { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 5);
            }
            other => panic!("{other:?}"),
        }
        assert!(ConfigMap::parse("x = 1.2.3\n").is_err());
    }

    #[test]
    fn spread_selector_conflicts_are_rejected() {
        let base = "shape = square\ns0 = 100\nagents.k = 2\n";
        for tail in [
            "spread.p = 0.1\nspread.d = 3\n",
            "spread.kind = uniform\nspread.d = 3\n",
            "spread.kind = deterministic\nspread.p = 0.1\n",
            "spread.kind = trickle\nspread.p = 0.1\n",
            "",
        ] {
            let text = format!("{base}{tail}");
            assert!(parse_run_config(&text).is_err(), "accepted: {tail:?}");
        }
    }

    #[test]
    fn bound_params_round_trip() {
        let params = BoundParams::new(20000, 150, 0.5, 0.3, 2000).unwrap();
        let text = emit_bound_params(&params);
        assert_eq!(parse_bound_params(&text).unwrap(), params);
        assert!(parse_bound_params("s0 = 10\nk = 2\np = 0.5\ndelta = 0.5\n").is_err());
    }

    fn config_strategy() -> impl Strategy<Value = RunConfig> {
        (
            prop_oneof![
                Just(ShapeKind::DigitalSphere),
                Just(ShapeKind::Square),
                Just(ShapeKind::Cross)
            ],
            1u64..5000,
            1u32..200,
            prop_oneof![
                (0.0f64..=1.0).prop_map(|p| SpreadPolicy::uniform(p).unwrap()),
                (1u64..100).prop_map(|d| SpreadPolicy::deterministic(d).unwrap()),
            ],
            prop_oneof![Just(CleanerKind::Sweep), Just(CleanerKind::Perfect)],
            1u64..10000,
            1u64..5000,
            any::<u64>(),
            any::<bool>(),
            1u64..100,
            any::<bool>(),
        )
            .prop_map(
                |(shape, s0, k, policy, cleaner, cutoff, reps, seed, record, stride, early)| {
                    let mut c = RunConfig::new(shape, s0, k, policy, cleaner);
                    c.cutoff = cutoff;
                    c.replications = reps;
                    c.seed = seed;
                    c.record_trajectory = record;
                    c.record_stride = stride;
                    c.early_exit = early;
                    c
                },
            )
    }

    proptest! {
        #[test]
        fn run_config_round_trips(config in config_strategy()) {
            let text = emit_run_config(&config);
            prop_assert_eq!(parse_run_config(&text).unwrap(), config);
        }
    }
}
