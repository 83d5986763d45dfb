//! JSON form of a behavior in CG coordinates:
//!
//! ```json
//! {"scenario": "3,2,2,2", "coords": ["1/2", "1/3", ...]}
//! ```
//!
//! Coordinates given as strings are read as exact rationals (`p/q` or an
//! integer); if any coordinate is a JSON number the whole vector is read
//! in floating point.

use anyhow::{bail, Context, Result};
use bellscope::{CgVector, Rational, Scenario};
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Deserialize)]
pub struct BehaviorFile {
    pub scenario: String,
    pub coords: Vec<Value>,
}

pub enum Behavior {
    Exact(CgVector<Rational>),
    Float(CgVector<f64>),
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("scenario `{text}` must be four comma-separated integers"))?;
    let [ma, mb, na, nb] = parts[..] else {
        bail!("scenario `{text}` must be four comma-separated integers mA,mB,nA,nB");
    };
    Ok(Scenario::new(ma, mb, na, nb)?)
}

pub fn parse_behavior(text: &str) -> Result<Behavior> {
    let file: BehaviorFile =
        serde_json::from_str(text).context("behavior file is not valid JSON")?;
    let s = parse_scenario(&file.scenario)?;
    if file.coords.iter().all(Value::is_string) {
        let coords = file
            .coords
            .iter()
            .map(|v| {
                let t = v.as_str().unwrap_or_default();
                t.trim()
                    .parse::<Rational>()
                    .with_context(|| format!("`{t}` is not a rational number"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Behavior::Exact(CgVector::new(s, coords)?))
    } else {
        let coords = file
            .coords
            .iter()
            .map(|v| match v {
                Value::Number(n) => n.as_f64().context("coordinate out of range"),
                Value::String(t) => {
                    let r: Rational = t
                        .trim()
                        .parse()
                        .with_context(|| format!("`{t}` is not a rational number"))?;
                    Ok(bellscope::scalar::rational_to_f64(&r))
                }
                other => bail!("coordinate {other} is neither a number nor a string"),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Behavior::Float(CgVector::new(s, coords)?))
    }
}
