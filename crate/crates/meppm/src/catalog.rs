//! Plain-text code files and the bundled catalog.
//!
//! ```text
//! # comment
//! BIBD 13 4 1
//! 1101000001000
//! ```
//!
//! The header is `BIBD Q K LAMBDA` or `OOC L W ALPHA N`; each following line
//! is one base word, slot 0 first. Codes are verified when parsed.

use std::fmt::Write as _;
use std::path::Path;

use meppm_core::codes::{BibdCode, Codeword, OocCode, OocViolation};

use crate::error::AppError;

#[derive(Debug, Clone, PartialEq)]
pub enum CodeFile {
    Bibd(BibdCode),
    Ooc(OocCode),
}

const BUNDLED_BIBD: &[(&str, &str)] = &[
    ("13_4_1", include_str!("../catalog/bibd_13_4_1.txt")),
    ("57_8_1", include_str!("../catalog/bibd_57_8_1.txt")),
    ("101_25_6", include_str!("../catalog/bibd_101_25_6.txt")),
    ("341_85_21", include_str!("../catalog/bibd_341_85_21.txt")),
];

const BUNDLED_OOC: &[(&str, &str)] = &[
    ("13_3_1", include_str!("../catalog/ooc_13_3_1.txt")),
    ("63_7_2", include_str!("../catalog/ooc_63_7_2.txt")),
    ("101_11_3", include_str!("../catalog/ooc_101_11_3.txt")),
    ("101_25_10", include_str!("../catalog/ooc_101_25_10.txt")),
    ("341_5_1", include_str!("../catalog/ooc_341_5_1.txt")),
];

/// Names accepted by `catalog:NAME` for BIBD and OOC sources.
pub fn bundled_names() -> (Vec<&'static str>, Vec<&'static str>) {
    (
        BUNDLED_BIBD.iter().map(|(n, _)| *n).collect(),
        BUNDLED_OOC.iter().map(|(n, _)| *n).collect(),
    )
}

pub fn bundled_bibd(name: &str) -> Result<BibdCode, AppError> {
    let text = BUNDLED_BIBD
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| AppError::Config(format!("no bundled BIBD named {name:?}")))?;
    match parse_code(text)? {
        CodeFile::Bibd(code) => Ok(code),
        CodeFile::Ooc(_) => unreachable!("bundled BIBD files hold BIBD codes"),
    }
}

pub fn bundled_ooc(name: &str) -> Result<OocCode, AppError> {
    let text = BUNDLED_OOC
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| AppError::Config(format!("no bundled OOC named {name:?}")))?;
    match parse_code(text)? {
        CodeFile::Ooc(code) => Ok(code),
        CodeFile::Bibd(_) => unreachable!("bundled OOC files hold OOC codes"),
    }
}

fn malformed(line: usize, msg: impl Into<String>) -> AppError {
    AppError::Malformed {
        line,
        msg: msg.into(),
    }
}

/// Parses and verifies a code file.
pub fn parse_code(text: &str) -> Result<CodeFile, AppError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| malformed(0, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let numbers = fields[1..]
        .iter()
        .map(|f| f.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| malformed(hline, format!("non-numeric header field in {header:?}")))?;
    let mut words = Vec::new();
    for (n, line) in lines {
        let word = Codeword::parse(line).map_err(|e| malformed(n, e.to_string()))?;
        words.push((n, word));
    }
    match (fields[0], numbers.as_slice()) {
        ("BIBD", &[q, k, lambda]) => {
            let [(n, base)] = <[_; 1]>::try_from(words)
                .map_err(|w| malformed(hline, format!("BIBD file needs exactly one word, found {}", w.len())))?;
            if base.len() != q {
                return Err(malformed(n, format!("word has {} slots, header says {q}", base.len())));
            }
            let code = BibdCode::new(q, k, lambda, base).map_err(|e| malformed(n, e.to_string()))?;
            let report = code.verify();
            if let Some(v) = report.violations.first() {
                return Err(AppError::Verification(format!(
                    "({q},{k},{lambda}) BIBD: codewords {} and {} correlate {} instead of {}",
                    v.m, v.n, v.observed, v.expected
                )));
            }
            Ok(CodeFile::Bibd(code))
        }
        ("OOC", &[l, w, alpha, count]) => {
            if words.len() != count {
                return Err(malformed(
                    hline,
                    format!("header promises {count} words, found {}", words.len()),
                ));
            }
            if let Some((n, _)) = words.iter().find(|(_, c)| c.len() != l) {
                return Err(malformed(*n, format!("word length differs from {l}")));
            }
            let code = OocCode::new(l, w, alpha, words.into_iter().map(|(_, c)| c).collect())
                .map_err(|e| malformed(hline, e.to_string()))?;
            check_ooc(&code)?;
            Ok(CodeFile::Ooc(code))
        }
        _ => Err(malformed(hline, format!("unrecognised header {header:?}"))),
    }
}

pub fn check_ooc(code: &OocCode) -> Result<(), AppError> {
    let report = code.verify();
    let Some(v) = report.violations.first() else {
        return Ok(());
    };
    let (l, w, a) = (code.length(), code.weight(), code.alpha());
    let detail = match v {
        OocViolation::Shape { word, length, weight } => {
            format!("word {word} has length {length} and weight {weight}")
        }
        OocViolation::Auto { word, shift, observed } => {
            format!("word {word} autocorrelates {observed} at shift {shift}")
        }
        OocViolation::Cross { a, b, shift, observed } => {
            format!("words {a} and {b} correlate {observed} at shift {shift}")
        }
    };
    Err(AppError::Verification(format!("({l},{w},{a}) OOC: {detail}")))
}

pub fn format_code(code: &CodeFile) -> String {
    let mut out = String::new();
    match code {
        CodeFile::Bibd(c) => {
            let _ = writeln!(out, "BIBD {} {} {}", c.q(), c.k(), c.lambda());
            let _ = writeln!(out, "{}", c.base().to_bit_string());
        }
        CodeFile::Ooc(c) => {
            let _ = writeln!(out, "OOC {} {} {} {}", c.length(), c.weight(), c.alpha(), c.len());
            for w in c.words() {
                let _ = writeln!(out, "{}", w.to_bit_string());
            }
        }
    }
    out
}

pub fn load_code(path: &Path) -> Result<CodeFile, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_code(&text)
}

pub fn save_code(code: &CodeFile, path: &Path) -> Result<(), AppError> {
    std::fs::write(path, format_code(code)).map_err(|e| AppError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use meppm_core::codes::paley_difference_set;

    #[test]
    fn every_bundled_code_loads() {
        let (bibds, oocs) = bundled_names();
        for name in bibds {
            bundled_bibd(name).unwrap();
        }
        for name in oocs {
            bundled_ooc(name).unwrap();
        }
    }

    #[test]
    fn round_trip_text() {
        let code = CodeFile::Bibd(paley_difference_set(7).unwrap());
        assert_eq!(parse_code(&format_code(&code)).unwrap(), code);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(parse_code(""), Err(AppError::Malformed { .. })));
        assert!(matches!(parse_code("BIBD 7 3 1\n"), Err(AppError::Malformed { .. })));
        assert!(matches!(parse_code("BIBD 7 3 1\n0110"), Err(AppError::Malformed { .. })));
        assert!(matches!(
            parse_code("BIBD 7 3 1\n1110000\n"),
            Err(AppError::Verification(_))
        ));
        assert!(matches!(
            parse_code("OOC 13 3 1 2\n1100100000000\n1100100000000\n"),
            Err(AppError::Verification(_))
        ));
        assert!(matches!(parse_code("CODE 1 2\n1"), Err(AppError::Malformed { .. })));
    }
}
