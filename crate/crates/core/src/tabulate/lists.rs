//! Bracketed list values such as `[[20,25],(10,15),[30,35]]`.

use crate::error::{Error, Result};

/// Flattens a (possibly nested) bracketed list into its numbers, depth first.
///
/// `[` and `(` are interchangeable openers, but each must be closed by its own partner.
pub fn split_lists(raw: &str) -> Result<Vec<f64>> {
    let bytes = raw.as_bytes();
    let mut out = Vec::new();
    let mut pos = skip_ws(bytes, 0);
    match bytes.get(pos) {
        Some(b'[' | b'(') => {}
        _ => return Err(list_err(pos, "expected `[` or `(`")),
    }
    pos = parse_list(bytes, pos, &mut out)?;
    pos = skip_ws(bytes, pos);
    if pos != bytes.len() {
        return Err(list_err(pos, "trailing characters after list"));
    }
    Ok(out)
}

/// Renders numbers as a flat list that [`split_lists`] reads back exactly.
pub fn render_list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", items.join(","))
}

/// Renders `(low, high)` pairs as a nested list, e.g. `[[20,25],[10,15]]`.
pub fn render_pairs(pairs: &[(f64, f64)]) -> String {
    let items: Vec<String> = pairs.iter().map(|(a, b)| format!("[{a},{b}]")).collect();
    format!("[{}]", items.join(","))
}

/// Whether a text attribute looks like it is meant to be a list.
pub(crate) fn looks_like_list(raw: &str) -> bool {
    matches!(raw.trim_start().as_bytes().first(), Some(b'[' | b'('))
}

fn parse_list(bytes: &[u8], start: usize, out: &mut Vec<f64>) -> Result<usize> {
    let close = match bytes[start] {
        b'[' => b']',
        _ => b')',
    };
    let mut pos = skip_ws(bytes, start + 1);
    if bytes.get(pos) == Some(&close) {
        return Ok(pos + 1);
    }
    loop {
        pos = skip_ws(bytes, pos);
        match bytes.get(pos) {
            Some(b'[' | b'(') => pos = parse_list(bytes, pos, out)?,
            Some(_) => pos = parse_number(bytes, pos, out)?,
            None => return Err(list_err(pos, "unbalanced brackets")),
        }
        pos = skip_ws(bytes, pos);
        match bytes.get(pos) {
            Some(b',') => pos += 1,
            Some(&c) if c == close => return Ok(pos + 1),
            Some(b']' | b')') => return Err(list_err(pos, "mismatched closing bracket")),
            Some(_) => return Err(list_err(pos, "expected `,` or closing bracket")),
            None => return Err(list_err(pos, "unbalanced brackets")),
        }
    }
}

fn parse_number(bytes: &[u8], start: usize, out: &mut Vec<f64>) -> Result<usize> {
    let end = bytes[start..]
        .iter()
        .position(|c| matches!(c, b',' | b']' | b')' | b'[' | b'(') || c.is_ascii_whitespace())
        .map_or(bytes.len(), |p| start + p);
    let token = std::str::from_utf8(&bytes[start..end]).unwrap_or("");
    if token.is_empty() {
        return Err(list_err(start, "empty list item"));
    }
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => {
            out.push(v);
            Ok(end)
        }
        _ => Err(list_err(start, &format!("non-numeric token `{token}`"))),
    }
}

fn skip_ws(bytes: &[u8], mut pos: usize) -> usize {
    while bytes.get(pos).is_some_and(|c| c.is_ascii_whitespace()) {
        pos += 1;
    }
    pos
}

fn list_err(offset: usize, message: &str) -> Error {
    Error::ListParse {
        offset,
        message: message.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nested_ranges() {
        assert_eq!(
            split_lists("[[20,25],(10,15),[30,35]]").unwrap(),
            vec![20.0, 25.0, 10.0, 15.0, 30.0, 35.0]
        );
        assert_eq!(
            split_lists("[(20,25),(10,15),(30,35)]").unwrap(),
            vec![20.0, 25.0, 10.0, 15.0, 30.0, 35.0]
        );
    }

    #[test]
    fn flat_and_empty() {
        assert_eq!(split_lists("[24,12,31]").unwrap(), vec![24.0, 12.0, 31.0]);
        assert_eq!(split_lists(" [ 1.5 , -2e3 ] ").unwrap(), vec![1.5, -2000.0]);
        assert!(split_lists("[]").unwrap().is_empty());
    }

    #[test]
    fn errors_carry_offsets() {
        let cases = [
            ("[1,2", 4),
            ("[1,abc]", 3),
            ("[1,,2]", 3),
            ("[(1,2],3]", 5),
            ("[1] x", 4),
            ("1,2", 0),
            ("[inf]", 1),
        ];
        for (raw, offset) in cases {
            match split_lists(raw) {
                Err(Error::ListParse { offset: got, .. }) => assert_eq!(got, offset, "{raw}"),
                other => panic!("{raw}: expected list error, got {other:?}"),
            }
        }
    }

    proptest! {
        #[test]
        fn render_then_split_is_identity(xs in prop::collection::vec(
            prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL, 0..20)
        ) {
            prop_assert_eq!(split_lists(&render_list(&xs)).unwrap(), xs);
        }

        #[test]
        fn pairs_round_trip(pairs in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 0..8)) {
            let flat: Vec<f64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
            prop_assert_eq!(split_lists(&render_pairs(&pairs)).unwrap(), flat);
        }
    }
}
