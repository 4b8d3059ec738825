//! Decoding of Python 2.7 string literals into their runtime values.
//!
//! Byte strings decode to byte sequences, unicode strings to code points.
//! Python 2 oddities preserved here: octal escapes wrap modulo 256 in byte
//! strings, unknown escapes keep their backslash, and raw *unicode* strings
//! still process `\u`/`\U` escapes.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::PyString;
use super::lexer::{StrPrefix, StrTok};

enum Sink {
    Bytes(Vec<u8>),
    Unicode(Vec<u32>),
}

impl Sink {
    fn push_byte(&mut self, b: u8) {
        match self {
            Sink::Bytes(v) => v.push(b),
            Sink::Unicode(v) => v.push(b as u32),
        }
    }

    fn push_char(&mut self, c: char) {
        match self {
            Sink::Bytes(v) => {
                let mut buf = [0u8; 4];
                v.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
            }
            Sink::Unicode(v) => v.push(c as u32),
        }
    }

    fn push_code_point(&mut self, cp: u32) -> Result<(), String> {
        match self {
            Sink::Bytes(v) => {
                debug_assert!(cp < 256);
                v.push(cp as u8);
                Ok(())
            }
            Sink::Unicode(v) => {
                if cp > 0x10FFFF {
                    return Err("illegal Unicode character (escape out of range)".into());
                }
                v.push(cp);
                Ok(())
            }
        }
    }
}

pub(crate) fn decode_string(tok: &StrTok, future_unicode: bool) -> Result<PyString, String> {
    let unicode = match tok.prefix {
        StrPrefix::Unicode => true,
        StrPrefix::Bytes => false,
        StrPrefix::Plain => future_unicode,
    };
    let mut sink = if unicode {
        Sink::Unicode(Vec::new())
    } else {
        Sink::Bytes(Vec::new())
    };
    let mut chars = tok.body.chars().peekable();

    while let Some(c) = chars.next() {
        if c != '\\' {
            sink.push_char(c);
            continue;
        }
        let Some(&esc) = chars.peek() else {
            // scanner guarantees a character after every backslash
            sink.push_byte(b'\\');
            break;
        };
        if tok.raw {
            // raw unicode strings still decode \uXXXX and \UXXXXXXXX
            if unicode && (esc == 'u' || esc == 'U') {
                chars.next();
                let width = if esc == 'u' { 4 } else { 8 };
                let cp = take_hex(&mut chars, width)
                    .ok_or_else(|| format!("malformed \\{} escape", esc))?;
                sink.push_code_point(cp)?;
            } else {
                sink.push_byte(b'\\');
                chars.next();
                sink.push_char(esc);
            }
            continue;
        }
        chars.next();
        match esc {
            '\n' => {}
            '\\' => sink.push_byte(b'\\'),
            '\'' => sink.push_byte(b'\''),
            '"' => sink.push_byte(b'"'),
            'a' => sink.push_byte(0x07),
            'b' => sink.push_byte(0x08),
            'f' => sink.push_byte(0x0c),
            'n' => sink.push_byte(b'\n'),
            'r' => sink.push_byte(b'\r'),
            't' => sink.push_byte(b'\t'),
            'v' => sink.push_byte(0x0b),
            '0'..='7' => {
                let mut value = esc as u32 - '0' as u32;
                for _ in 0..2 {
                    match chars.peek() {
                        Some(&d @ '0'..='7') => {
                            chars.next();
                            value = value * 8 + (d as u32 - '0' as u32);
                        }
                        _ => break,
                    }
                }
                if unicode {
                    sink.push_code_point(value)?;
                } else {
                    sink.push_byte((value % 256) as u8);
                }
            }
            'x' => {
                let value =
                    take_hex(&mut chars, 2).ok_or_else(|| String::from("invalid \\x escape"))?;
                sink.push_code_point(value)?;
            }
            'u' if unicode => {
                let value =
                    take_hex(&mut chars, 4).ok_or_else(|| String::from("malformed \\u escape"))?;
                sink.push_code_point(value)?;
            }
            'U' if unicode => {
                let value =
                    take_hex(&mut chars, 8).ok_or_else(|| String::from("malformed \\U escape"))?;
                sink.push_code_point(value)?;
            }
            'N' if unicode => {
                return Err("\\N{...} named escapes are not supported".into());
            }
            other => {
                // unknown escape: Python 2 keeps the backslash
                sink.push_byte(b'\\');
                sink.push_char(other);
            }
        }
    }

    Ok(match sink {
        Sink::Bytes(v) => PyString::Bytes(v),
        Sink::Unicode(v) => PyString::Unicode(v),
    })
}

fn take_hex(chars: &mut core::iter::Peekable<core::str::Chars<'_>>, width: u32) -> Option<u32> {
    let mut value: u32 = 0;
    for _ in 0..width {
        let d = chars.peek()?.to_digit(16)?;
        chars.next();
        value = value.wrapping_mul(16).wrapping_add(d);
    }
    Some(value)
}

/// Merge adjacent string literal values the way Python 2 concatenates them:
/// the result is unicode if any piece is, and byte pieces joining a unicode
/// result must be pure ASCII.
pub(crate) fn concat_strings(pieces: Vec<PyString>) -> Result<PyString, String> {
    if pieces.iter().all(|p| matches!(p, PyString::Bytes(_))) {
        let mut out = Vec::new();
        for p in pieces {
            if let PyString::Bytes(b) = p {
                out.extend_from_slice(&b);
            }
        }
        return Ok(PyString::Bytes(out));
    }
    let mut out = Vec::new();
    for p in pieces {
        match p {
            PyString::Unicode(cps) => out.extend_from_slice(&cps),
            PyString::Bytes(b) => {
                for byte in b {
                    if byte >= 0x80 {
                        return Err(
                            "cannot concatenate non-ASCII byte string with unicode literal".into(),
                        );
                    }
                    out.push(byte as u32);
                }
            }
        }
    }
    Ok(PyString::Unicode(out))
}
