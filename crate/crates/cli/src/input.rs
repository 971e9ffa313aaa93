//! Two-column numeric input.

use hellcor::BivariateSample;

/// Why a table could not be read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Plain decimal notation only: rejects `inf`, `nan` and their spellings,
/// which `f64::from_str` would accept.
fn number(field: &str) -> Option<f64> {
    let ok = !field.is_empty()
        && field
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'));
    if !ok {
        return None;
    }
    field.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses rows of two numbers. Blank lines and `#` comments are skipped; the
/// first remaining line is treated as a header when it is not numeric.
pub fn parse_table(text: &str) -> Result<Vec<[f64; 2]>, ParseError> {
    let mut rows = Vec::new();
    let mut seen_first = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first = !seen_first;
        seen_first = true;
        let parts = fields(line);
        let values: Vec<Option<f64>> = parts.iter().map(|f| number(f)).collect();
        if first && values.iter().any(Option::is_none) {
            if parts.len() != 2 {
                return Err(ParseError {
                    line: idx + 1,
                    message: format!("expected 2 columns, found {}", parts.len()),
                });
            }
            continue;
        }
        if parts.len() != 2 {
            return Err(ParseError {
                line: idx + 1,
                message: format!("expected 2 columns, found {}", parts.len()),
            });
        }
        match (values[0], values[1]) {
            (Some(a), Some(b)) => rows.push([a, b]),
            _ => {
                let bad = parts[if values[0].is_none() { 0 } else { 1 }];
                return Err(ParseError {
                    line: idx + 1,
                    message: format!("'{bad}' is not a finite number"),
                });
            }
        }
    }
    Ok(rows)
}

pub fn read_sample(path: &std::path::Path) -> Result<BivariateSample, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let rows = parse_table(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    BivariateSample::new(rows).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_sniffed() {
        let rows = parse_table("x,y\n1,2\n3.5,-4e1\n").unwrap();
        assert_eq!(rows, vec![[1.0, 2.0], [3.5, -40.0]]);
        let rows = parse_table("1 2\n3 4\n").unwrap();
        assert_eq!(rows.len(), 2);
    }

    #[test]
    fn whitespace_and_comments() {
        let rows = parse_table("# comment\n\n  1\t2 \n3    4\n").unwrap();
        assert_eq!(rows, vec![[1.0, 2.0], [3.0, 4.0]]);
    }

    #[test]
    fn header_only_on_first_line() {
        let err = parse_table("1,2\nx,y\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn non_finite_rejected() {
        for bad in ["1,2\n1,inf\n", "1,2\nNaN,3\n", "1,2\n1,1e400\n"] {
            assert!(parse_table(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn locale_comma_is_not_a_decimal_point() {
        // "1,5 2,5" reads as three comma-separated fields
        assert!(parse_table("0,0\n1,5 2,5\n").is_err());
    }

    #[test]
    fn wrong_width() {
        let err = parse_table("1,2,3\n").unwrap_err();
        assert!(err.message.contains("found 3"), "{}", err.message);
        assert!(parse_table("a,b,c\n1,2\n").is_err());
    }
}
