//! Tokenizer for Python 2.7 source text.
//!
//! Produces the token stream the parser consumes: logical-line NEWLINE,
//! INDENT/DEDENT from the indentation stack, and the full Python 2 lexical
//! repertoire (string prefixes, legacy octal and long literals, `<>`,
//! backticks). Comments are discarded here and never reach the tree.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_bigint::BigUint;

use super::ParseFailure;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Newline,
    Indent,
    Dedent,
    EndMarker,
    Name(String),
    Kw(Kw),
    Int(BigUint),
    Float(f64),
    Imag(f64),
    Str(StrTok),
    Op(Op),
}

/// A scanned string literal, escapes not yet decoded. `body` is the text
/// between the quotes exactly as written.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct StrTok {
    pub body: String,
    pub raw: bool,
    pub prefix: StrPrefix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StrPrefix {
    Plain,
    Unicode,
    Bytes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[rustfmt::skip]
pub(crate) enum Kw {
    And, As, Assert, Break, Class, Continue, Def, Del, Elif, Else, Except,
    Exec, Finally, For, From, Global, If, Import, In, Is, Lambda, Not, Or,
    Pass, Print, Raise, Return, Try, While, With, Yield,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[rustfmt::skip]
pub(crate) enum Op {
    LParen, RParen, LBracket, RBracket, LBrace, RBrace,
    Comma, Colon, Dot, Semi, At, Backtick, Assign,
    Plus, Minus, Star, Slash, DoubleSlash, Percent, DoubleStar,
    LShift, RShift, Amp, Pipe, Caret, Tilde,
    Lt, Gt, Le, Ge, EqEq, NotEq,
    PlusEq, MinusEq, StarEq, SlashEq, DoubleSlashEq, PercentEq,
    AmpEq, PipeEq, CaretEq, LShiftEq, RShiftEq, DoubleStarEq,
}

fn keyword(name: &str) -> Option<Kw> {
    let kw = match name {
        "and" => Kw::And,
        "as" => Kw::As,
        "assert" => Kw::Assert,
        "break" => Kw::Break,
        "class" => Kw::Class,
        "continue" => Kw::Continue,
        "def" => Kw::Def,
        "del" => Kw::Del,
        "elif" => Kw::Elif,
        "else" => Kw::Else,
        "except" => Kw::Except,
        "exec" => Kw::Exec,
        "finally" => Kw::Finally,
        "for" => Kw::For,
        "from" => Kw::From,
        "global" => Kw::Global,
        "if" => Kw::If,
        "import" => Kw::Import,
        "in" => Kw::In,
        "is" => Kw::Is,
        "lambda" => Kw::Lambda,
        "not" => Kw::Not,
        "or" => Kw::Or,
        "pass" => Kw::Pass,
        "print" => Kw::Print,
        "raise" => Kw::Raise,
        "return" => Kw::Return,
        "try" => Kw::Try,
        "while" => Kw::While,
        "with" => Kw::With,
        "yield" => Kw::Yield,
        _ => return None,
    };
    Some(kw)
}

const TABSIZE: u32 = 8;

pub(crate) struct Lexer<'a> {
    src: &'a [u8],
    path: &'a str,
    pos: usize,
    line: u32,
    paren_depth: u32,
    indents: Vec<u32>,
    at_line_start: bool,
    line_has_tokens: bool,
    out: Vec<(u32, Tok)>,
    trailing_error: Option<ParseFailure>,
}

/// Tokenize a whole file. The second return value is a deferred error for
/// EOF inside brackets: the parser usually reaches a more precise failure
/// first, but if it somehow accepts the truncated stream this error still
/// fails the file.
pub(crate) fn tokenize(
    source: &str,
    path: &str,
) -> Result<(Vec<(u32, Tok)>, Option<ParseFailure>), ParseFailure> {
    let mut lx = Lexer {
        src: source.as_bytes(),
        path,
        pos: 0,
        line: 1,
        paren_depth: 0,
        indents: Vec::new(),
        at_line_start: true,
        line_has_tokens: false,
        out: Vec::new(),
        trailing_error: None,
    };
    lx.run()?;
    Ok((lx.out, lx.trailing_error))
}

impl<'a> Lexer<'a> {
    fn fail(&self, reason: impl Into<String>) -> ParseFailure {
        ParseFailure {
            path: self.path.to_string(),
            line: self.line,
            reason: reason.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<u8> {
        self.src.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    fn emit(&mut self, line: u32, tok: Tok) {
        self.line_has_tokens = !matches!(tok, Tok::Newline);
        self.out.push((line, tok));
    }

    /// Consume one physical line break (\n, \r\n, or lone \r). Returns false
    /// if the current byte is not a line break.
    fn eat_newline(&mut self) -> bool {
        match self.peek() {
            Some(b'\n') => {
                self.pos += 1;
                self.line += 1;
                true
            }
            Some(b'\r') => {
                self.pos += 1;
                if self.peek() == Some(b'\n') {
                    self.pos += 1;
                }
                self.line += 1;
                true
            }
            _ => false,
        }
    }

    fn run(&mut self) -> Result<(), ParseFailure> {
        loop {
            if self.at_line_start && self.paren_depth == 0 {
                self.handle_indentation()?;
            }
            // intra-line whitespace
            while let Some(b) = self.peek() {
                if b == b' ' || b == b'\t' || b == b'\x0c' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            let Some(b) = self.peek() else {
                return self.finish();
            };
            match b {
                b'#' => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' || c == b'\r' {
                            break;
                        }
                        self.pos += 1;
                    }
                }
                b'\n' | b'\r' => {
                    self.eat_newline();
                    if self.paren_depth == 0 {
                        if self.line_has_tokens {
                            self.emit(self.line - 1, Tok::Newline);
                        }
                        self.at_line_start = true;
                    }
                }
                b'\\' => {
                    self.pos += 1;
                    if !self.eat_newline() {
                        return Err(
                            self.fail("unexpected character after line continuation character")
                        );
                    }
                }
                b'\0' => return Err(self.fail("source code string cannot contain null bytes")),
                b'\'' | b'"' => self.scan_string(false, StrPrefix::Plain)?,
                b'0'..=b'9' => self.scan_number()?,
                b'.' => {
                    if matches!(self.peek_at(1), Some(b'0'..=b'9')) {
                        self.scan_number()?;
                    } else {
                        self.pos += 1;
                        self.emit(self.line, Tok::Op(Op::Dot));
                    }
                }
                b'A'..=b'Z' | b'a'..=b'z' | b'_' => self.scan_name()?,
                _ => self.scan_operator()?,
            }
        }
    }

    fn finish(&mut self) -> Result<(), ParseFailure> {
        if self.paren_depth > 0 {
            self.trailing_error =
                Some(self.fail("unexpected EOF: unclosed parenthesis or bracket"));
        }
        if self.line_has_tokens {
            self.emit(self.line, Tok::Newline);
        }
        while self.indents.pop().is_some() {
            self.out.push((self.line, Tok::Dedent));
        }
        self.out.push((self.line, Tok::EndMarker));
        Ok(())
    }

    /// Measure the indentation of the next non-blank, non-comment line and
    /// emit INDENT/DEDENT tokens against the indentation stack.
    fn handle_indentation(&mut self) -> Result<(), ParseFailure> {
        let col = loop {
            let mut col: u32 = 0;
            loop {
                match self.peek() {
                    Some(b' ') => {
                        col += 1;
                        self.pos += 1;
                    }
                    Some(b'\t') => {
                        col = (col / TABSIZE + 1) * TABSIZE;
                        self.pos += 1;
                    }
                    Some(b'\x0c') => {
                        col = 0;
                        self.pos += 1;
                    }
                    _ => break,
                }
            }
            match self.peek() {
                Some(b'#') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' || c == b'\r' {
                            break;
                        }
                        self.pos += 1;
                    }
                    if !self.eat_newline() {
                        return Ok(()); // comment runs to EOF
                    }
                }
                Some(b'\n') | Some(b'\r') => {
                    self.eat_newline();
                }
                None => return Ok(()),
                _ => break col,
            }
        };
        self.at_line_start = false;
        let current = self.indents.last().copied().unwrap_or(0);
        if col > current {
            self.indents.push(col);
            self.emit(self.line, Tok::Indent);
        } else if col < current {
            while self.indents.last().copied().unwrap_or(0) > col {
                self.indents.pop();
                self.emit(self.line, Tok::Dedent);
            }
            if self.indents.last().copied().unwrap_or(0) != col {
                return Err(self.fail("unindent does not match any outer indentation level"));
            }
        }
        Ok(())
    }

    fn scan_name(&mut self) -> Result<(), ParseFailure> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || b == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        // string prefix? (r, u, b, ur, br in any case; rb/ru are not Python 2)
        if matches!(self.peek(), Some(b'\'') | Some(b'"')) {
            let (raw, prefix) = match name.to_ascii_lowercase().as_str() {
                "r" => (true, StrPrefix::Plain),
                "u" => (false, StrPrefix::Unicode),
                "b" => (false, StrPrefix::Bytes),
                "ur" => (true, StrPrefix::Unicode),
                "br" => (true, StrPrefix::Bytes),
                _ => {
                    let line = self.line;
                    self.emit(line, Tok::Name(name.to_string()));
                    return Ok(());
                }
            };
            return self.scan_string(raw, prefix);
        }
        let line = self.line;
        match keyword(name) {
            Some(kw) => self.emit(line, Tok::Kw(kw)),
            None => self.emit(line, Tok::Name(name.to_string())),
        }
        Ok(())
    }

    fn scan_string(&mut self, raw: bool, prefix: StrPrefix) -> Result<(), ParseFailure> {
        let start_line = self.line;
        let quote = self.bump().unwrap();
        let triple = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.pos += 2;
        }
        let mut body: Vec<u8> = Vec::new();
        loop {
            let Some(b) = self.peek() else {
                self.line = start_line;
                return Err(self.fail("EOF while scanning string literal"));
            };
            if b == quote {
                if !triple {
                    self.pos += 1;
                    break;
                }
                if self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                    self.pos += 3;
                    break;
                }
                body.push(b);
                self.pos += 1;
            } else if b == b'\\' {
                // keep the escape verbatim; decoding happens in the parser
                body.push(b);
                self.pos += 1;
                match self.peek() {
                    Some(b'\n') | Some(b'\r') => {
                        body.push(b'\n');
                        self.eat_newline();
                    }
                    Some(c) => {
                        body.push(c);
                        self.pos += 1;
                    }
                    None => {
                        self.line = start_line;
                        return Err(self.fail("EOF while scanning string literal"));
                    }
                }
            } else if b == b'\n' || b == b'\r' {
                if !triple {
                    return Err(self.fail("EOL while scanning string literal"));
                }
                body.push(b'\n');
                self.eat_newline();
            } else if b == b'\0' {
                return Err(self.fail("source code string cannot contain null bytes"));
            } else {
                body.push(b);
                self.pos += 1;
            }
        }
        let body = String::from_utf8(body).expect("source text is valid UTF-8");
        self.emit(start_line, Tok::Str(StrTok { body, raw, prefix }));
        Ok(())
    }

    fn scan_number(&mut self) -> Result<(), ParseFailure> {
        let line = self.line;
        let start = self.pos;

        // radix-prefixed integers
        if self.peek() == Some(b'0')
            && matches!(
                self.peek_at(1),
                Some(b'x') | Some(b'X') | Some(b'b') | Some(b'B') | Some(b'o') | Some(b'O')
            )
        {
            let radix = match self.peek_at(1).unwrap().to_ascii_lowercase() {
                b'x' => 16u32,
                b'b' => 2,
                _ => 8,
            };
            self.pos += 2;
            let digits_start = self.pos;
            while let Some(b) = self.peek() {
                let ok = match radix {
                    16 => b.is_ascii_hexdigit(),
                    8 => (b'0'..=b'7').contains(&b),
                    _ => b == b'0' || b == b'1',
                };
                if ok {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.pos == digits_start {
                return Err(self.fail("invalid number literal"));
            }
            let value = BigUint::parse_bytes(&self.src[digits_start..self.pos], radix).unwrap();
            if matches!(self.peek(), Some(b'l') | Some(b'L')) {
                self.pos += 1;
            }
            self.emit(line, Tok::Int(value));
            return Ok(());
        }

        let mut is_float = false;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            is_float = true;
            self.pos += 1;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mut ahead = 1;
            if matches!(self.peek_at(1), Some(b'+') | Some(b'-')) {
                ahead = 2;
            }
            if matches!(self.peek_at(ahead), Some(b'0'..=b'9')) {
                is_float = true;
                self.pos += ahead;
                while matches!(self.peek(), Some(b'0'..=b'9')) {
                    self.pos += 1;
                }
            } else {
                // `1e`, `1e+`, `1else`: CPython 2.7 rejects these outright
                return Err(self.fail("invalid number literal"));
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if matches!(self.peek(), Some(b'j') | Some(b'J')) {
            self.pos += 1;
            let v: f64 = text.parse().map_err(|_| self.fail("invalid number literal"))?;
            self.emit(line, Tok::Imag(v));
            return Ok(());
        }
        if is_float {
            let v: f64 = text.parse().map_err(|_| self.fail("invalid number literal"))?;
            self.emit(line, Tok::Float(v));
            return Ok(());
        }
        if matches!(self.peek(), Some(b'l') | Some(b'L')) {
            self.pos += 1;
        }
        let value = if text.len() > 1 && text.starts_with('0') {
            // legacy octal
            if text.bytes().any(|b| b == b'8' || b == b'9') {
                return Err(self.fail(format!("invalid token: {}", text)));
            }
            BigUint::parse_bytes(text.as_bytes(), 8).unwrap()
        } else {
            BigUint::parse_bytes(text.as_bytes(), 10).unwrap()
        };
        self.emit(line, Tok::Int(value));
        Ok(())
    }

    fn scan_operator(&mut self) -> Result<(), ParseFailure> {
        use Op::*;
        let line = self.line;
        let b = self.bump().unwrap();
        let next = self.peek();
        let nexter = self.peek_at(1);
        macro_rules! take {
            ($n:expr, $op:expr) => {{
                self.pos += $n;
                $op
            }};
        }
        let op = match b {
            b'(' | b'[' | b'{' => {
                self.paren_depth += 1;
                match b {
                    b'(' => LParen,
                    b'[' => LBracket,
                    _ => LBrace,
                }
            }
            b')' | b']' | b'}' => {
                self.paren_depth = self.paren_depth.saturating_sub(1);
                match b {
                    b')' => RParen,
                    b']' => RBracket,
                    _ => RBrace,
                }
            }
            b',' => Comma,
            b':' => Colon,
            b';' => Semi,
            b'@' => At,
            b'`' => Backtick,
            b'~' => Tilde,
            b'+' => match next {
                Some(b'=') => take!(1, PlusEq),
                _ => Plus,
            },
            b'-' => match next {
                Some(b'=') => take!(1, MinusEq),
                _ => Minus,
            },
            b'*' => match (next, nexter) {
                (Some(b'*'), Some(b'=')) => take!(2, DoubleStarEq),
                (Some(b'*'), _) => take!(1, DoubleStar),
                (Some(b'='), _) => take!(1, StarEq),
                _ => Star,
            },
            b'/' => match (next, nexter) {
                (Some(b'/'), Some(b'=')) => take!(2, DoubleSlashEq),
                (Some(b'/'), _) => take!(1, DoubleSlash),
                (Some(b'='), _) => take!(1, SlashEq),
                _ => Slash,
            },
            b'%' => match next {
                Some(b'=') => take!(1, PercentEq),
                _ => Percent,
            },
            b'&' => match next {
                Some(b'=') => take!(1, AmpEq),
                _ => Amp,
            },
            b'|' => match next {
                Some(b'=') => take!(1, PipeEq),
                _ => Pipe,
            },
            b'^' => match next {
                Some(b'=') => take!(1, CaretEq),
                _ => Caret,
            },
            b'<' => match (next, nexter) {
                (Some(b'<'), Some(b'=')) => take!(2, LShiftEq),
                (Some(b'<'), _) => take!(1, LShift),
                (Some(b'='), _) => take!(1, Le),
                (Some(b'>'), _) => take!(1, NotEq),
                _ => Lt,
            },
            b'>' => match (next, nexter) {
                (Some(b'>'), Some(b'=')) => take!(2, RShiftEq),
                (Some(b'>'), _) => take!(1, RShift),
                (Some(b'='), _) => take!(1, Ge),
                _ => Gt,
            },
            b'=' => match next {
                Some(b'=') => take!(1, EqEq),
                _ => Assign,
            },
            b'!' => match next {
                Some(b'=') => take!(1, NotEq),
                _ => return Err(self.fail("unexpected character '!'")),
            },
            other => {
                return Err(self.fail(format!(
                    "invalid character {:?} (byte 0x{:02x})",
                    other as char, other
                )))
            }
        };
        self.emit(line, Tok::Op(op));
        Ok(())
    }
}
