use std::fmt::Write as _;

use super::model::param_count;
use super::{Activation, FcnnModel, PredictorError};

pub const MAGIC: &[u8; 4] = b"FHOP";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

/// Byte length of a flat export for the given shape.
pub fn flat_size(input_dim: usize, channels: usize) -> usize {
    HEADER_LEN + 4 * param_count(input_dim, channels)
}

/// Little-endian layout: magic, version, input_dim, channels (all `u32`
/// after the magic), then every parameter as `f32` in model order.
pub fn export_flat(model: &FcnnModel) -> Result<Vec<u8>, PredictorError> {
    if model.activation != Activation::Relu {
        return Err(PredictorError::Unsupported(format!(
            "flat format stores rectifier networks only, model uses {:?}",
            model.activation
        )));
    }
    let mut out = Vec::with_capacity(flat_size(model.input_dim(), model.channels()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.input_dim() as u32).to_le_bytes());
    out.extend_from_slice(&(model.channels() as u32).to_le_bytes());
    for p in model.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    Ok(out)
}

pub fn import_flat(bytes: &[u8]) -> Result<FcnnModel, PredictorError> {
    let bad = |m: String| Err(PredictorError::Format(m));
    if bytes.len() < HEADER_LEN {
        return bad(format!("{} bytes is shorter than the header", bytes.len()));
    }
    if &bytes[..4] != MAGIC {
        return bad("bad magic".into());
    }
    let word = |k: usize| u32::from_le_bytes(bytes[4 * k..4 * k + 4].try_into().expect("4 bytes"));
    let version = word(1);
    if version != FORMAT_VERSION {
        return bad(format!("unsupported version {version}"));
    }
    let (input_dim, channels) = (word(2) as usize, word(3) as usize);
    if input_dim == 0 || channels < 2 {
        return bad(format!("invalid shape {input_dim} x {channels}"));
    }
    let want = flat_size(input_dim, channels);
    if bytes.len() < want {
        return bad(format!("truncated: {} of {want} bytes", bytes.len()));
    }
    if bytes.len() > want {
        return bad(format!("{} trailing bytes", bytes.len() - want));
    }
    let params = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    FcnnModel::from_params(input_dim, channels, params)
}

const C_KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while",
];

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c == '_' || c.is_ascii_alphabetic())
        && chars.all(|c| c == '_' || c.is_ascii_alphanumeric())
        && !C_KEYWORDS.contains(&name)
}

/// C source embedding the flat export as a byte array, twelve bytes per
/// line, followed by a length constant.
pub fn export_c_array(model: &FcnnModel, symbol: &str) -> Result<String, PredictorError> {
    if !valid_identifier(symbol) {
        return Err(PredictorError::InvalidSymbol(symbol.into()));
    }
    let bytes = export_flat(model)?;
    let mut out = format!("const unsigned char {symbol}[] = {{\n");
    for line in bytes.chunks(12) {
        out.push(' ');
        for b in line {
            write!(out, " 0x{b:02x},").expect("string write");
        }
        out.push('\n');
    }
    writeln!(out, "}};\nconst unsigned int {symbol}_len = {};", bytes.len()).expect("string write");
    Ok(out)
}

/// Reads back the bytes of an array emitted by [`export_c_array`] and
/// checks them against the length constant.
pub fn parse_c_array(text: &str) -> Result<Vec<u8>, PredictorError> {
    let bad = |m: &str| PredictorError::Format(format!("C array: {m}"));
    let open = text.find('{').ok_or_else(|| bad("missing '{'"))?;
    let close = text[open..].find('}').ok_or_else(|| bad("missing '}'"))? + open;
    let bytes = text[open + 1..close]
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let hex = t.strip_prefix("0x").ok_or_else(|| bad("expected 0x literal"))?;
            u8::from_str_radix(hex, 16).map_err(|_| bad("bad hex byte"))
        })
        .collect::<Result<Vec<u8>, _>>()?;
    let len_decl = text[close..]
        .split("_len =")
        .nth(1)
        .ok_or_else(|| bad("missing length constant"))?;
    let declared: usize = len_decl
        .trim()
        .trim_end_matches(|c: char| c == ';' || c.is_whitespace())
        .parse()
        .map_err(|_| bad("bad length constant"))?;
    if declared != bytes.len() {
        return Err(bad(&format!("length constant {declared} but {} bytes", bytes.len())));
    }
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let m = FcnnModel::init(12, 3, 5).unwrap();
        let bytes = export_flat(&m).unwrap();
        assert_eq!(&bytes[..4], b"FHOP");
        assert_eq!(bytes.len(), flat_size(12, 3));
        let back = import_flat(&bytes).unwrap();
        assert_eq!(back.params(), m.params());
    }

    #[test]
    fn output_layer_drives_size_growth() {
        assert_eq!(flat_size(40, 9) - flat_size(40, 2), (9 - 2) * (10 + 1) * 4);
    }

    #[test]
    fn corrupt_streams_are_rejected() {
        let bytes = export_flat(&FcnnModel::init(4, 2, 0).unwrap()).unwrap();
        assert!(import_flat(&bytes[..bytes.len() - 1]).is_err());
        assert!(import_flat(&bytes[..10]).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(import_flat(&wrong).is_err());
        let mut wrong = bytes;
        wrong[4] = 9;
        assert!(import_flat(&wrong).is_err());
    }

    #[test]
    fn c_array_parses_back() {
        let m = FcnnModel::init(6, 4, 2).unwrap();
        let text = export_c_array(&m, "hopping_model").unwrap();
        assert!(text.contains("const unsigned char hopping_model[] = {"));
        assert!(text.contains("hopping_model_len"));
        assert_eq!(parse_c_array(&text).unwrap(), export_flat(&m).unwrap());
    }

    #[test]
    fn bad_symbols_are_rejected() {
        let m = FcnnModel::init(2, 2, 0).unwrap();
        for s in ["", "1model", "my-model", "int"] {
            assert!(matches!(export_c_array(&m, s), Err(PredictorError::InvalidSymbol(_))), "{s}");
        }
    }
}
