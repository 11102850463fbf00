use std::io::{self, Write};

use serde::Serialize;

/// Compact JSON with every float written to 17 significant digits.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// A flat table: fixed header, string cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rows {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Rows {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }

    /// Prepends a constant column.
    pub fn with_leading(mut self, name: &str, value: &str) -> Self {
        self.header.insert(0, name.to_string());
        for r in &mut self.rows {
            r.insert(0, value.to_string());
        }
        self
    }

    pub fn write_csv<W: Write>(&self, w: W, header: bool) -> io::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        if header {
            wtr.write_record(&self.header)?;
        }
        for r in &self.rows {
            wtr.write_record(r)?;
        }
        wtr.flush()
    }

    pub fn write_table<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut width: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate() {
                width[i] = width[i].max(c.len());
            }
        }
        let line = |w: &mut W, cells: &[String]| -> io::Result<()> {
            let parts: Vec<String> = cells.iter().enumerate().map(|(i, c)| format!("{c:<0$}", width[i])).collect();
            writeln!(w, "{}", parts.join("  ").trim_end())
        };
        line(&mut w, &self.header)?;
        let rule: Vec<String> = width.iter().map(|&n| "-".repeat(n)).collect();
        line(&mut w, &rule)?;
        for r in &self.rows {
            line(&mut w, r)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(to_json(&0.1f64), "1.0000000000000001e-1");
        assert_eq!(to_json(&f64::INFINITY), "null");
        let back: f64 = serde_json::from_str(&to_json(&std::f64::consts::PI)).unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn table_alignment() {
        let mut r = Rows::new(&["k", "x"]);
        r.push(["1".to_string(), "2.5".to_string()]);
        let mut out = Vec::new();
        r.write_table(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "k  x\n-  ---\n1  2.5\n");
    }
}
