//! Text grammar for weights.
//!
//! ```text
//! const:<c>
//! pow:<a>
//! exp:<c>,<a>,<b>              c * t^a * exp(-b t)
//! pieces:[(x1,a1,c1),...]      c_i * t^a_i from x_i on, x1 = 0
//! table:<path>                 resolved by the caller-supplied loader
//! ```

use super::{WeightKind, WeightSpec};
use crate::error::{Error, Result};

type Loader<'a> = &'a dyn Fn(&str) -> Result<Vec<(f64, f64)>>;

/// Parses a weight description. `table:` specs need a `loader` that reads
/// `(t, value)` rows from the given path.
pub fn parse_spec(text: &str, loader: Option<Loader<'_>>) -> Result<WeightSpec> {
    let text = text.trim();
    let (head, body) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("'{text}': expected <kind>:<arguments>")))?;
    let kind = match head.trim() {
        "const" => WeightKind::Const(number(body)?),
        "pow" => WeightKind::Pow(number(body)?),
        "exp" => {
            let v = numbers(body)?;
            if v.len() != 3 {
                return Err(Error::Parse(format!("'{text}': exp takes c,a,b")));
            }
            WeightKind::Exp { c: v[0], a: v[1], b: v[2] }
        }
        "pieces" => WeightKind::Pieces(triples(body)?),
        "table" => {
            let path = body.trim();
            let load = loader.ok_or_else(|| Error::Parse("table: specs need a file loader".into()))?;
            WeightKind::Table { label: path.to_string(), points: load(path)? }
        }
        other => return Err(Error::Parse(format!("unknown weight kind '{other}'"))),
    };
    WeightSpec::new(kind)
}

fn number(s: &str) -> Result<f64> {
    let s = s.trim();
    match s {
        "inf" | "+inf" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|_| Error::Parse(format!("'{s}' is not a number"))),
    }
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(number).collect()
}

fn triples(body: &str) -> Result<Vec<(f64, f64, f64)>> {
    let body = body.trim();
    let inner = body
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("'{body}': expected [(x,a,c),...]")))?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("'{rest}': expected '('")))?;
        let close = open.find(')').ok_or_else(|| Error::Parse("unclosed '('".into()))?;
        let v = numbers(&open[..close])?;
        if v.len() != 3 {
            return Err(Error::Parse(format!("'({})': expected three numbers", &open[..close])));
        }
        out.push((v[0], v[1], v[2]));
        rest = open[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for s in [
            "const:1",
            "const:2.5",
            "pow:0.5",
            "exp:3,0,1",
            "exp:1,1.5,0.25",
            "pieces:[(0,0.5,1),(1,-2,1)]",
            "pieces:[(0,0,1),(0.1,1,3),(7,-3,1e-7)]",
        ] {
            let w = parse_spec(s, None).unwrap();
            assert_eq!(w.to_string(), s);
            assert_eq!(parse_spec(&w.to_string(), None).unwrap(), w);
        }
    }

    #[test]
    fn whitespace_is_tolerated() {
        let w = parse_spec(" pieces: [ (0, 0.5, 1) , (1,-2,1) ] ", None).unwrap();
        assert_eq!(w.to_string(), "pieces:[(0,0.5,1),(1,-2,1)]");
    }

    #[test]
    fn table_uses_loader() {
        let loader = |_: &str| Ok(vec![(1.0, 2.0), (10.0, 4.0)]);
        let w = parse_spec("table:w.csv", Some(&loader)).unwrap();
        assert_eq!(w.to_string(), "table:w.csv");
        assert!(parse_spec("table:w.csv", None).is_err());
    }

    #[test]
    fn bad_input() {
        for s in ["", "const", "const:x", "exp:1,2", "pieces:(0,1,1)", "pieces:[(0,1)]", "gauss:1", "pow:-1"] {
            assert!(parse_spec(s, None).is_err(), "{s}");
        }
    }
}
