//! JSON net files.
//!
//! ```json
//! {"n": 2, "alphabet": 2, "parents": [[], [0]],
//!  "cpt": [[["2/3", "1/3"]], [[0.9, 0.1], [0.5, 0.5]]]}
//! ```
//!
//! `cpt[i][r][s]` is `Pr[X_i = s | parents of i take the r-th assignment]`,
//! rows row-major over the declared parent order, everything 0-based.
//! Probabilities are JSON numbers or `"a/b"` strings and are read exactly.
//! A coupling net may carry `"pair_base": ℓ`, the size of the alphabet
//! its paired symbols are built from.

use serde_json::Value;
use tvbn_core::coupling::{CouplingNet, PairEncoding};
use tvbn_core::model::{BayesNet, ModelError, RawNet};
use tvbn_core::scalar::{format_exact, parse_exact};
use tvbn_core::Exact;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// A parsed but not yet validated net file.
#[derive(Clone, Debug, PartialEq)]
pub struct NetDocument {
    pub raw: RawNet<Exact>,
    /// Base alphabet of a serialized coupling net.
    pub pair_base: Option<usize>,
}

impl NetDocument {
    /// Validates with exact row sums.
    pub fn into_exact(self) -> Result<BayesNet<Exact>, FormatError> {
        Ok(self.raw.into_net()?)
    }

    /// Converts to floats, then validates with the float row-sum tolerance.
    pub fn into_float(self) -> Result<BayesNet<f64>, FormatError> {
        Ok(to_float_raw(&self.raw).into_net()?)
    }

    pub fn to_float_raw(&self) -> RawNet<f64> {
        to_float_raw(&self.raw)
    }
}

fn to_float_raw(raw: &RawNet<Exact>) -> RawNet<f64> {
    use tvbn_core::Scalar;
    RawNet {
        alphabet: raw.alphabet,
        parents: raw.parents.clone(),
        cpt: raw
            .cpt
            .iter()
            .map(|t| {
                t.iter()
                    .map(|r| r.iter().map(f64::from_exact).collect())
                    .collect()
            })
            .collect(),
    }
}

const KEYS: [&str; 5] = ["n", "alphabet", "parents", "cpt", "pair_base"];

/// Parses a net file without validating the net.
pub fn parse_document(text: &str) -> Result<NetDocument, FormatError> {
    let value: Value = serde_json::from_str(text).map_err(|e| FormatError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = value
        .as_object()
        .ok_or_else(|| schema("$", "expected an object"))?;
    if let Some(key) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(schema(format!("$.{key}"), "unknown field"));
    }
    let field = |key: &str| {
        obj.get(key)
            .ok_or_else(|| schema(format!("$.{key}"), "missing field"))
    };
    let n = count(field("n")?, "$.n")?;
    let alphabet = count(field("alphabet")?, "$.alphabet")?;
    let pair_base = obj
        .get("pair_base")
        .map(|v| count(v, "$.pair_base"))
        .transpose()?;
    if let Some(base) = pair_base {
        if base.checked_mul(base) != Some(alphabet) {
            return Err(schema(
                "$.pair_base",
                format!("{base}² does not equal alphabet {alphabet}"),
            ));
        }
    }

    let parents = array(field("parents")?, "$.parents")?;
    if parents.len() != n {
        return Err(schema(
            "$.parents",
            format!("expected {n} parent lists, got {}", parents.len()),
        ));
    }
    let parents = parents
        .iter()
        .enumerate()
        .map(|(i, list)| {
            let path = format!("$.parents[{i}]");
            array(list, &path)?
                .iter()
                .enumerate()
                .map(|(j, v)| count(v, &format!("{path}[{j}]")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let tables = array(field("cpt")?, "$.cpt")?;
    if tables.len() != n {
        return Err(schema(
            "$.cpt",
            format!("expected {n} tables, got {}", tables.len()),
        ));
    }
    let cpt = tables
        .iter()
        .enumerate()
        .map(|(i, table)| {
            let path = format!("$.cpt[{i}]");
            array(table, &path)?
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    let path = format!("{path}[{r}]");
                    array(row, &path)?
                        .iter()
                        .enumerate()
                        .map(|(s, v)| probability(v, &format!("{path}[{s}]")))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(NetDocument {
        raw: RawNet {
            alphabet,
            parents,
            cpt,
        },
        pair_base,
    })
}

fn count(v: &Value, path: &str) -> Result<usize, FormatError> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| schema(path, format!("expected a nonnegative integer, got {v}")))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, FormatError> {
    v.as_array()
        .ok_or_else(|| schema(path, format!("expected an array, got {v}")))
}

fn probability(v: &Value, path: &str) -> Result<Exact, FormatError> {
    let text = match v {
        Value::Number(num) => num.to_string(),
        Value::String(s) => s.clone(),
        _ => {
            return Err(schema(
                path,
                format!("expected a number or \"a/b\", got {v}"),
            ))
        }
    };
    parse_exact(&text).ok_or_else(|| schema(path, format!("cannot read {text:?} as a probability")))
}

/// Parses and validates an exact net.
pub fn parse_net(text: &str) -> Result<BayesNet<Exact>, FormatError> {
    parse_document(text)?.into_exact()
}

/// Parses a coupling net, which must carry `pair_base`.
pub fn parse_coupling(text: &str) -> Result<(BayesNet<Exact>, PairEncoding), FormatError> {
    let doc = parse_document(text)?;
    let base = doc
        .pair_base
        .ok_or_else(|| schema("$.pair_base", "missing field"))?;
    Ok((doc.into_exact()?, PairEncoding::new(base)))
}

/// Canonical compact form: fixed key order, probabilities as `"a/b"` strings
/// in lowest terms or as bare integers.
pub fn serialize_net(net: &BayesNet<Exact>) -> String {
    write_document(net, None)
}

/// Canonical form of a coupling net, including `pair_base`.
pub fn serialize_coupling(c: &CouplingNet<Exact>) -> String {
    write_document(c.net(), Some(c.encoding().base_alphabet()))
}

fn write_document(net: &BayesNet<Exact>, pair_base: Option<usize>) -> String {
    let raw = net.to_raw();
    let parents = raw
        .parents
        .iter()
        .map(|p| format!("[{}]", join(p.iter().map(usize::to_string))))
        .collect::<Vec<_>>();
    let tables = raw
        .cpt
        .iter()
        .map(|t| {
            let rows = t
                .iter()
                .map(|r| format!("[{}]", join(r.iter().map(probability_text))));
            format!("[{}]", join(rows))
        })
        .collect::<Vec<_>>();
    let base = pair_base
        .map(|b| format!(",\"pair_base\":{b}"))
        .unwrap_or_default();
    format!(
        "{{\"n\":{},\"alphabet\":{},\"parents\":[{}],\"cpt\":[{}]{base}}}\n",
        net.len(),
        net.alphabet(),
        parents.join(","),
        tables.join(",")
    )
}

fn probability_text(v: &Exact) -> String {
    let text = format_exact(v);
    if text.contains('/') {
        format!("\"{text}\"")
    } else {
        text
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(",")
}

/// `serialize_net(parse_net(text))`.
pub fn canonicalize(text: &str) -> Result<String, FormatError> {
    Ok(serialize_net(&parse_net(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tvbn_core::coupling::build_coupling;

    const FOOTNOTE_P: &str =
        r#"{"n":2,"alphabet":2,"parents":[[],[]],"cpt":[[["2/3","1/3"]],[["2/3","1/3"]]]}"#;

    #[test]
    fn one_node() {
        let net =
            parse_net(r#"{"n":1,"alphabet":2,"parents":[[]],"cpt":[[[0.25,0.75]]]}"#).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(format_exact(&net.cpt(0).row(0)[0]), "1/4");
    }

    #[test]
    fn fractions_are_exact() {
        let net = parse_net(FOOTNOTE_P).unwrap();
        assert_eq!(format_exact(&net.cpt(1).row(0)[1]), "1/3");
        assert_eq!(serialize_net(&net).trim_end(), FOOTNOTE_P);
    }

    #[test]
    fn decimals_are_read_exactly() {
        let doc = parse_document(r#"{"n":1,"alphabet":3,"parents":[[]],"cpt":[[[0.1,0.2,0.7]]]}"#)
            .unwrap();
        let row = &doc.raw.cpt[0][0];
        assert_eq!(format_exact(&row[0]), "1/10");
        assert!(doc.into_exact().is_ok());
    }

    #[test]
    fn errors_carry_locations() {
        let err = parse_document(r#"{"n":1,"alphabet":2,"parents":[[]],"cpt":[[[0.5,"x"]]]}"#)
            .unwrap_err();
        assert!(err.to_string().starts_with("$.cpt[0][0][1]:"), "{err}");
        let err = parse_document(r#"{"n":2,"alphabet":2,"parents":[[]],"cpt":[]}"#).unwrap_err();
        assert!(err.to_string().starts_with("$.parents:"), "{err}");
        let err = parse_document("{\"n\":1,\n\"alphabet\":}").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 2, .. }), "{err}");
        let err =
            parse_document(r#"{"n":1,"alphabet":2,"parents":[[]],"cpt":[[[1,0]]],"extra":1}"#)
                .unwrap_err();
        assert!(err.to_string().starts_with("$.extra:"), "{err}");
    }

    #[test]
    fn invalid_nets_are_reported() {
        let err =
            parse_net(r#"{"n":1,"alphabet":2,"parents":[[]],"cpt":[[[0.5,0.4]]]}"#).unwrap_err();
        assert!(matches!(err, FormatError::Model(ModelError::Invalid(_))));
    }

    #[test]
    fn float_mode_tolerates_rounding() {
        let text = r#"{"n":1,"alphabet":3,"parents":[[]],"cpt":[[[0.3333333333333,0.3333333333333,0.3333333333333]]]}"#;
        assert!(parse_document(text).unwrap().into_float().is_ok());
        assert!(parse_document(text).unwrap().into_exact().is_err());
    }

    #[test]
    fn coupling_round_trip() {
        let p = parse_net(FOOTNOTE_P).unwrap();
        let q = parse_net(&FOOTNOTE_P.replace("\"2/3\",\"1/3\"", "\"1/3\",\"2/3\"")).unwrap();
        let c = build_coupling(&p, &q).unwrap();
        let text = serialize_coupling(&c);
        assert!(text.contains("\"pair_base\":2"));
        let (net, enc) = parse_coupling(&text).unwrap();
        assert_eq!(&net, c.net());
        assert_eq!(enc.base_alphabet(), 2);
        assert!(parse_coupling(FOOTNOTE_P).is_err());
    }
}
