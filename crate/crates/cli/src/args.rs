//! Value syntaxes shared by several subcommands.

use std::str::FromStr;

/// Largest number of points a range may expand to.
const MAX_AXIS_POINTS: usize = 1_000_000;

/// A single number, a comma-separated list, or an inclusive
/// `start:stop:step` range.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis(pub Vec<f64>);

fn number(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, step] => range(number(start)?, number(stop)?, number(step)?).map(Axis),
            [_] => s.split(',').map(number).collect::<Result<_, _>>().map(Axis),
            _ => Err(format!("`{s}` is neither a number, a list nor start:stop:step")),
        }
    }
}

/// The stop value is included when it lies a whole number of steps from
/// the start.
pub fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if step.is_nan() || step <= 0.0 || step.is_infinite() {
        return Err(format!("range step must be positive, got {step}"));
    }
    if stop < start {
        return Err(format!("range stop {stop} is below start {start}"));
    }
    let span = stop - start;
    let whole = (span / step).round();
    let exact = (span - whole * step).abs() <= 1e-12;
    let steps = if exact { whole } else { (span / step).floor() };
    let count = steps as usize + 1;
    if count > MAX_AXIS_POINTS {
        return Err(format!("range expands to {count} points, at most {MAX_AXIS_POINTS} allowed"));
    }
    Ok((0..count)
        .map(|i| if exact && i + 1 == count { stop } else { start + step * i as f64 })
        .collect())
}

/// Comma-separated numbers, one per pool.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',').map(number).collect::<Result<_, _>>().map(List)
    }
}

/// A fixed value, or `auto` to let the optimizer choose.
#[derive(Debug, Clone, PartialEq)]
pub enum OrAuto<T> {
    Auto,
    Value(T),
}

impl<T: FromStr> FromStr for OrAuto<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(OrAuto::Auto)
        } else {
            s.parse().map(OrAuto::Value).map_err(|e| format!("`{s}` is not `auto`: {e}"))
        }
    }
}

/// Infiltration share axis or `auto`.
pub type TauArg = OrAuto<Axis>;
