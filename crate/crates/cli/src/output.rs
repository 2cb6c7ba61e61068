use std::path::Path;

use serde_json::Value;

/// Rounds every fractional number in a JSON tree to 12 significant digits so
/// the JSON and CSV forms of one run carry identical values. Integers pass
/// through untouched; non-finite values have no JSON form and become null.
pub fn round_floats(value: &mut Value) {
    match value {
        Value::Number(number) => {
            if number.is_f64() {
                let rounded = round12(number.as_f64().unwrap());
                *value = serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Nearest 12-significant-digit neighbor of a float.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.11e}")
            .parse()
            .expect("formatted float parses back")
    } else {
        x
    }
}

/// 4-significant-digit rendering for the human format: plain decimal at
/// everyday magnitudes, scientific elsewhere.
pub fn sig4(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-3..4).contains(&magnitude) {
        let decimals = (3 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.3e}")
    }
}

pub fn yes_no(flag: bool) -> &'static str {
    if flag {
        "yes"
    } else {
        "no"
    }
}

/// Sends the finished report to the chosen sink.
pub fn emit(report: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, report)
            .map_err(|err| format!("cannot write {}: {err}", path.display())),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}
