//! Query set specs such as `0:{0};3:{1,2}`. Unlisted variables keep the
//! full alphabet.

use tvbn_core::inference::QuerySets;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad query spec at entry {entry} ({text:?}): {message}")]
pub struct SetsError {
    pub entry: usize,
    pub text: String,
    pub message: String,
}

pub fn parse_sets(spec: &str, n: usize, alphabet: usize) -> Result<QuerySets, SetsError> {
    let mut sets = QuerySets::full(n, alphabet);
    let mut seen = vec![false; n];
    let entries = spec.split(';').map(str::trim).filter(|e| !e.is_empty());
    for (entry, text) in entries.enumerate() {
        let fail = |message: String| SetsError {
            entry,
            text: text.to_string(),
            message,
        };
        let (var, body) = text
            .split_once(':')
            .ok_or_else(|| fail("expected VAR:{SYMBOLS}".into()))?;
        let var: usize = var
            .trim()
            .parse()
            .map_err(|_| fail(format!("bad variable {:?}", var.trim())))?;
        if var >= n {
            return Err(fail(format!("variable {var} out of range for {n} nodes")));
        }
        if std::mem::replace(&mut seen[var], true) {
            return Err(fail(format!("variable {var} listed twice")));
        }
        let body = body
            .trim()
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| fail("symbols must be wrapped in braces".into()))?;
        let mut symbols = Vec::new();
        for s in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let b: usize = s.parse().map_err(|_| fail(format!("bad symbol {s:?}")))?;
            if b >= alphabet {
                return Err(fail(format!(
                    "symbol {b} out of range for alphabet {alphabet}"
                )));
            }
            symbols.push(b);
        }
        sets.set(var, symbols);
    }
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_listed_sets() {
        let q = parse_sets("0:{0}; 3:{1,2}", 4, 3).unwrap();
        assert_eq!(q.allowed(0), [true, false, false]);
        assert!(q.is_full(1) && q.is_full(2));
        assert_eq!(q.allowed(3), [false, true, true]);
        assert!(parse_sets("", 2, 2).unwrap().is_full(0));
        assert_eq!(parse_sets("1:{}", 2, 2).unwrap().allowed(1), [false, false]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(parse_sets("0:{0};0:{1}", 2, 2).is_err());
        assert!(parse_sets("2:{0}", 2, 2).is_err());
        assert!(parse_sets("0:{2}", 2, 2).is_err());
        assert!(parse_sets("0:0", 2, 2).is_err());
        let err = parse_sets("0:{0};x:{1}", 2, 2).unwrap_err();
        assert_eq!(err.entry, 1);
    }
}
