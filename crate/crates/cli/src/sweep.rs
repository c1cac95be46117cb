//! One swept parameter: `{ from, to, points }` or `{ values = [...] }` in
//! place of a plain value anywhere in the config.

use serde_json::{Map, Value};

use crate::config::{split_number, ConfigError};

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub path: Vec<String>,
    /// The axis as written, restored in the echo.
    pub spec: Value,
    pub points: Vec<Value>,
}

impl Axis {
    pub fn key(&self) -> String {
        self.path.join(".")
    }
}

fn is_axis(m: &Map<String, Value>) -> bool {
    let mut keys: Vec<&str> = m.keys().map(String::as_str).collect();
    keys.sort_unstable();
    keys == ["from", "points", "to"] || keys == ["values"]
}

fn collect(v: &Value, path: &mut Vec<String>, out: &mut Vec<(Vec<String>, Value)>) {
    if let Value::Object(m) = v {
        if is_axis(m) {
            out.push((path.clone(), v.clone()));
            return;
        }
        for (k, child) in m {
            path.push(k.clone());
            collect(child, path, out);
            path.pop();
        }
    }
}

/// Every swept parameter in the tree.
pub fn find_axes(tree: &Value) -> Vec<(Vec<String>, Value)> {
    let mut out = Vec::new();
    collect(tree, &mut Vec::new(), &mut out);
    out
}

fn linspace(key: &str, from: &Value, to: &Value, points: &Value) -> Result<Vec<Value>, ConfigError> {
    let bad = |msg: &str| ConfigError(format!("{key}: {msg}"));
    let n = points.as_u64().filter(|&n| n >= 1).ok_or_else(|| bad("points must be a positive integer"))? as usize;
    let frac = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
    match (from, to) {
        (Value::Number(a), Value::Number(b)) if a.is_i64() && b.is_i64() => {
            let (a, b) = (a.as_i64().unwrap(), b.as_i64().unwrap());
            Ok((0..n).map(|i| Value::from(a + ((b - a) as f64 * frac(i)).round() as i64)).collect())
        }
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            Ok((0..n).map(|i| Value::from(a + (b - a) * frac(i))).collect())
        }
        (Value::String(a), Value::String(b)) => {
            let (x, ua) = split_number(a).ok_or_else(|| bad("from is not a quantity"))?;
            let (y, ub) = split_number(b).ok_or_else(|| bad("to is not a quantity"))?;
            if ua != ub {
                return Err(bad(&format!("from and to use different units ({ua:?} vs {ub:?})")));
            }
            Ok((0..n).map(|i| Value::from(format!("{} {ua}", x + (y - x) * frac(i)))).collect())
        }
        _ => Err(bad("from and to must both be numbers or both quantities")),
    }
}

/// The single swept axis of a sweep config; the tree is left with the
/// axis removed.
pub fn take_axis(tree: &mut Value) -> Result<Axis, ConfigError> {
    let axes = find_axes(tree);
    let (path, spec) = match axes.as_slice() {
        [one] => one.clone(),
        [] => return Err(ConfigError("sweep: no swept parameter; give one as { from, to, points } or { values = [...] }".into())),
        many => {
            let keys: Vec<String> = many.iter().map(|(p, _)| p.join(".")).collect();
            return Err(ConfigError(format!("sweep: only one parameter may be swept, found {}", keys.join(", "))));
        }
    };
    let key = path.join(".");
    let m = spec.as_object().expect("axes are tables");
    let points = match m.get("values") {
        Some(Value::Array(v)) if !v.is_empty() => v.clone(),
        Some(_) => return Err(ConfigError(format!("{key}: values must be a non-empty list"))),
        None => linspace(&key, &m["from"], &m["to"], &m["points"])?,
    };
    remove(tree, &path);
    Ok(Axis { path, spec, points })
}

fn remove(tree: &mut Value, path: &[String]) {
    let mut node = tree;
    for k in &path[..path.len() - 1] {
        node = node.get_mut(k).expect("path from find_axes");
    }
    node.as_object_mut().expect("table").remove(&path[path.len() - 1]);
}

/// Parts of the per-point echoes that agree everywhere; where points
/// differ the original entry (if any) is kept, so defaults that depend
/// on the swept value are re-derived on every point.
pub fn common(echoes: &[Value], original: Option<&Value>) -> Option<Value> {
    let first = echoes.first()?;
    if echoes.iter().all(|e| e == first) {
        return Some(first.clone());
    }
    let maps: Option<Vec<&Map<String, Value>>> = echoes.iter().map(Value::as_object).collect();
    match maps {
        Some(maps) => {
            let mut keys: Vec<&String> = maps.iter().flat_map(|m| m.keys()).collect();
            keys.sort();
            keys.dedup();
            let mut out = Map::new();
            for k in keys {
                let children: Option<Vec<Value>> = maps.iter().map(|m| m.get(k).cloned()).collect();
                let orig = original.and_then(|o| o.get(k));
                let merged = match children {
                    Some(c) => common(&c, orig),
                    None => orig.cloned(),
                };
                if let Some(v) = merged {
                    out.insert(k.clone(), v);
                }
            }
            Some(Value::Object(out))
        }
        None => original.cloned(),
    }
}
