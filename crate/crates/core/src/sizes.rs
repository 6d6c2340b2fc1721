//! Matrix-size lists as written on the command line.
//!
//! A list is comma separated; each item is either a single size (`512`) or
//! a range `start:end:step` where the step is `xF` (multiply by `F`) or
//! `+D` (add `D`), e.g. `128:4096:x2`. Ranges include `end` only when a
//! step lands on it. The result is sorted and deduplicated, so
//! `128:4096:x2,3072` gives the seven sizes 128 through 4096.

use crate::error::{Error, Result};

/// Upper bound on the number of sizes a single list may expand to.
pub const MAX_SIZES: usize = 4096;

pub fn parse_sizes(input: &str) -> Result<Vec<usize>> {
    let mut sizes = Vec::new();
    for item in input.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(invalid(input, "empty entry"));
        }
        if item.contains(':') {
            expand_range(input, item, &mut sizes)?;
        } else {
            sizes.push(parse_dim(input, item)?);
        }
        if sizes.len() > MAX_SIZES {
            return Err(invalid(input, &format!("expands to more than {MAX_SIZES} sizes")));
        }
    }
    sizes.sort_unstable();
    sizes.dedup();
    Ok(sizes)
}

fn expand_range(input: &str, item: &str, out: &mut Vec<usize>) -> Result<()> {
    let parts: Vec<&str> = item.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        return Err(invalid(input, &format!("range `{item}` must be start:end:step")));
    };
    let start = parse_dim(input, start)?;
    let end = parse_dim(input, end)?;
    if end < start {
        return Err(invalid(input, &format!("range `{item}` ends before it starts")));
    }
    let next: Box<dyn Fn(usize) -> Option<usize>> = if let Some(f) = step.strip_prefix('x') {
        let factor = parse_number(input, f)?;
        if factor < 2 {
            return Err(invalid(input, "multiplicative step must be at least x2"));
        }
        Box::new(move |v: usize| v.checked_mul(factor))
    } else if let Some(d) = step.strip_prefix('+') {
        let delta = parse_number(input, d)?;
        if delta == 0 {
            return Err(invalid(input, "additive step must be at least +1"));
        }
        Box::new(move |v: usize| v.checked_add(delta))
    } else {
        return Err(invalid(input, &format!("step `{step}` must look like x2 or +64")));
    };

    let mut v = start;
    loop {
        out.push(v);
        if out.len() > MAX_SIZES {
            return Err(invalid(input, &format!("expands to more than {MAX_SIZES} sizes")));
        }
        match next(v) {
            Some(n) if n <= end => v = n,
            _ => break,
        }
    }
    Ok(())
}

fn parse_number(input: &str, s: &str) -> Result<usize> {
    let s = s.trim();
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(invalid(input, &format!("`{s}` is not a number")));
    }
    s.parse()
        .map_err(|_| invalid(input, &format!("`{s}` is out of range")))
}

fn parse_dim(input: &str, s: &str) -> Result<usize> {
    match parse_number(input, s)? {
        0 => Err(invalid(input, "sizes must be >= 1")),
        n => Ok(n),
    }
}

fn invalid(input: &str, why: &str) -> Error {
    Error::InvalidConfig(format!("size list `{input}`: {why}"))
}
