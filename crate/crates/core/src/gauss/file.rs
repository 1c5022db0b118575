//! Text format for surface functions.
//!
//! ```text
//! # comment lines and blank lines are ignored
//! function <id> <count>
//! <mu_x> <mu_y> <sigma_x> <sigma_y> <rot> <sign>
//! ...                                   (exactly <count> component lines)
//! ```
//!
//! Numbers are written with the shortest decimal form that parses back to the
//! same `f64`, so a save/load cycle is lossless. `sign` is `+1` or `-1`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{GaussianComponent, SurfaceFunction, MAX_COMPONENTS};
use crate::error::{Error, Result};

const FIELDS: [&str; 6] = ["mu_x", "mu_y", "sigma_x", "sigma_y", "rot", "sign"];

pub fn write_function(f: &SurfaceFunction) -> String {
    let mut out = String::new();
    writeln!(out, "# mu_x mu_y sigma_x sigma_y rot sign").unwrap();
    writeln!(out, "function {} {}", f.id, f.components().len()).unwrap();
    for c in f.components() {
        let sign = if c.sign > 0 { "+1" } else { "-1" };
        writeln!(
            out,
            "{} {} {} {} {} {}",
            c.mu_x, c.mu_y, c.sigma_x, c.sigma_y, c.rot, sign
        )
        .unwrap();
    }
    out
}

fn parse_err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

pub fn parse_function(text: &str) -> Result<SurfaceFunction> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "function", "missing header"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 3 || head[0] != "function" {
        return Err(parse_err(hline, "function", "expected `function <id> <count>`"));
    }
    let id: u64 = head[1]
        .parse()
        .map_err(|e| parse_err(hline, "id", format!("{e}")))?;
    let count: usize = head[2]
        .parse()
        .map_err(|e| parse_err(hline, "count", format!("{e}")))?;
    if count == 0 || count > MAX_COMPONENTS {
        return Err(Error::ComponentCount(count));
    }

    let mut components = Vec::with_capacity(count);
    for (line, body) in lines {
        if components.len() == count {
            return Err(parse_err(line, "function", "more component lines than declared"));
        }
        let parts: Vec<&str> = body.split_whitespace().collect();
        if parts.len() != FIELDS.len() {
            return Err(parse_err(
                line,
                FIELDS[parts.len().min(FIELDS.len() - 1)],
                format!("expected {} fields, got {}", FIELDS.len(), parts.len()),
            ));
        }
        let mut nums = [0.0f64; 5];
        for k in 0..5 {
            nums[k] = parts[k]
                .parse()
                .map_err(|e| parse_err(line, FIELDS[k], format!("{e}")))?;
        }
        let sign: i8 = match parts[5] {
            "+1" | "1" => 1,
            "-1" => -1,
            other => return Err(parse_err(line, "sign", format!("`{other}` is not +1 or -1"))),
        };
        let c = GaussianComponent::new(nums[0], nums[1], nums[2], nums[3], nums[4], sign)
            .map_err(|e| match e {
                Error::OutOfRange { field, .. } => parse_err(line, field, e.to_string()),
                other => other,
            })?;
        components.push(c);
    }
    if components.len() != count {
        return Err(parse_err(
            hline,
            "count",
            format!("declared {count} components, found {}", components.len()),
        ));
    }
    SurfaceFunction::new(id, components)
}

pub fn save_function(f: &SurfaceFunction, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_function(f)).map_err(|e| Error::io(path, e))
}

pub fn load_function(path: impl AsRef<Path>) -> Result<SurfaceFunction> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_function(&text)
}
