use std::io::{self, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::Formatter;

/// Compact JSON with every float written as `{:.16e}`: 17 significant
/// digits, enough for any `f64` to parse back to the same bits.
struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).expect("reports serialize to JSON");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn write_report<T: Serialize>(value: &T, path: Option<&Path>) -> io::Result<()> {
    let mut text = to_json(value);
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

pub fn read_input(path: Option<&Path>) -> io::Result<String> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_bit_exactly() {
        let xs = vec![0.1f64, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, 5e-324];
        let text = to_json(&xs);
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), xs.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert!(text.contains("3.3333333333333331e-1"));
    }
}
