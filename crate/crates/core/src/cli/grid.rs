use num_complex::Complex64;

use crate::error::{AffineError, Result};
use crate::model::{ComplexArgument, Dimensions};

fn bad(msg: impl Into<String>) -> AffineError {
    AffineError::InvalidInput(msg.into())
}

fn number(s: &str) -> Result<f64> {
    let t = s.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| bad(format!("not a finite number: {t:?}")))
}

/// Splits on commas outside parentheses.
fn split_items(s: &str) -> Result<Vec<&str>> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(bad(format!("unbalanced ')' in {s:?}")));
                }
            }
            ',' if depth == 0 => {
                items.push(&s[start..k]);
                start = k + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(bad(format!("unbalanced '(' in {s:?}")));
    }
    items.push(&s[start..]);
    Ok(items)
}

/// Values of one coordinate: `lo:hi:count` (imaginary linspace), or a comma
/// list of `y` (meaning `i y`) and `(re,im)` entries.
fn coordinate(s: &str) -> Result<Vec<Complex64>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(bad("empty u-grid coordinate"));
    }
    if !s.contains('(') && s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("range must be lo:hi:count, got {s:?}")));
        }
        let (lo, hi) = (number(parts[0])?, number(parts[1])?);
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad point count in {s:?}")))?;
        if count == 0 {
            return Err(bad("range needs at least one point"));
        }
        if count == 1 {
            return Ok(vec![Complex64::new(0.0, lo)]);
        }
        let h = (hi - lo) / (count - 1) as f64;
        return Ok((0..count)
            .map(|k| Complex64::new(0.0, if k + 1 == count { hi } else { lo + h * k as f64 }))
            .collect());
    }
    split_items(s)?
        .into_iter()
        .map(|item| {
            let item = item.trim();
            if let Some(inner) = item.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
                let parts: Vec<&str> = inner.split(',').collect();
                if parts.len() != 2 {
                    return Err(bad(format!("complex entry must be (re,im), got {item:?}")));
                }
                Ok(Complex64::new(number(parts[0])?, number(parts[1])?))
            } else {
                Ok(Complex64::new(0.0, number(item)?))
            }
        })
        .collect()
}

/// Parses a u-grid: one `;`-separated spec per coordinate, combined as a
/// Cartesian product (last coordinate varies fastest).
pub fn parse_u_grid(text: &str, dims: Dimensions) -> Result<Vec<ComplexArgument>> {
    let coords: Vec<Vec<Complex64>> = text.split(';').map(coordinate).collect::<Result<_>>()?;
    if coords.len() != dims.d() {
        return Err(AffineError::Dimension(format!(
            "u-grid has {} coordinates, model has d = {}",
            coords.len(),
            dims.d()
        )));
    }
    let mut points: Vec<Vec<Complex64>> = vec![Vec::new()];
    for values in &coords {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    points.into_iter().map(|p| ComplexArgument::new(dims, p)).collect()
}

/// Comma-separated real vector.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(number).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ranges_lists_and_pairs() {
        let d = Dimensions::new(1, 1).unwrap();
        let g = parse_u_grid("(-1,0),(-0.5, 2), 3 ; -1:1:3", d).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0].as_slice(), &[c(-1.0, 0.0), c(0.0, -1.0)]);
        assert_eq!(g[4].as_slice(), &[c(-0.5, 2.0), c(0.0, 0.0)]);
        assert_eq!(g[8].as_slice(), &[c(0.0, 3.0), c(0.0, 1.0)]);
    }

    #[test]
    fn rejects_bad_input() {
        let d = Dimensions::new(1, 0).unwrap();
        assert!(parse_u_grid("(1,0)", d).is_err());
        assert!(parse_u_grid("1;2", d).is_err());
        assert!(parse_u_grid("(1,2", d).is_err());
        assert!(parse_u_grid("0:1", d).is_err());
        assert!(parse_u_grid("abc", d).is_err());
        assert_eq!(parse_vector("1, 2.5").unwrap(), vec![1.0, 2.5]);
    }
}
