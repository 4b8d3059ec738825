//! Deterministic canonical unparsing.
//!
//! Every statement becomes exactly one output line (compound headers on
//! their own line); every operator application is fully parenthesized;
//! numeric literals are normalized; string literals are escaped so no line
//! contains a raw newline or tab. Feeding the rendered output back through
//! the parser yields a structurally identical tree.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ast::*;

/// One canonical output line: logical indentation depth plus text. The
/// depth is what the corpus serializer turns into `DCSP` markers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub indent: usize,
    pub text: String,
}

impl Line {
    pub fn new(indent: usize, text: impl Into<String>) -> Self {
        Line {
            indent,
            text: text.into(),
        }
    }
}

/// Canonical lines for a whole module.
pub fn unparse_module(module: &Module) -> Vec<Line> {
    let mut w = Writer::default();
    // in a unicode_literals module a plain quoted literal re-parses as
    // unicode, so byte strings must keep an explicit prefix there
    w.bytes_prefix = module.body.iter().any(|s| {
        matches!(
            &s.kind,
            StmtKind::ImportFrom { module: Some(m), names: ImportNames::Names(ns), level: 0 }
                if m == "__future__" && ns.iter().any(|a| a.name == "unicode_literals")
        )
    });
    w.stmts(&module.body, 0);
    w.finish()
}

/// Canonical lines for a single statement at the given indentation depth.
pub fn unparse_stmt(stmt: &Stmt, indent: usize) -> Vec<Line> {
    let mut w = Writer::default();
    w.stmt(stmt, indent);
    w.finish()
}

/// Canonical declaration lines of a function: decorators, each on its own
/// line, then the one-line `def name(params):` header.
pub fn unparse_function_decl(name: &str, params: &Params, decorators: &[Expr]) -> Vec<Line> {
    let mut w = Writer::default();
    for d in decorators {
        w.fill(0);
        w.write("@");
        w.expr(d);
    }
    w.fill(0);
    w.write("def ");
    w.write(name);
    w.write("(");
    w.params(params);
    w.write("):");
    w.finish()
}

/// Render canonical lines back to parseable source text, four spaces per
/// indentation level.
pub fn render_source(lines: &[Line]) -> String {
    let mut out = String::new();
    for line in lines {
        for _ in 0..line.indent {
            out.push_str("    ");
        }
        out.push_str(&line.text);
        out.push('\n');
    }
    out
}

#[derive(Default)]
struct Writer {
    lines: Vec<Line>,
    cur: Option<Line>,
    bytes_prefix: bool,
}

impl Writer {
    fn fill(&mut self, indent: usize) {
        if let Some(line) = self.cur.take() {
            self.lines.push(line);
        }
        self.cur = Some(Line::new(indent, ""));
    }

    fn write(&mut self, s: &str) {
        self.cur
            .as_mut()
            .expect("fill() must precede write()")
            .text
            .push_str(s);
    }

    fn finish(mut self) -> Vec<Line> {
        if let Some(line) = self.cur.take() {
            self.lines.push(line);
        }
        self.lines
    }

    fn stmts(&mut self, body: &[Stmt], indent: usize) {
        for s in body {
            self.stmt(s, indent);
        }
    }

    fn stmt(&mut self, stmt: &Stmt, indent: usize) {
        match &stmt.kind {
            StmtKind::Expr(e) => {
                self.fill(indent);
                self.expr(e);
            }
            StmtKind::Assign { targets, value } => {
                self.fill(indent);
                for t in targets {
                    self.expr(t);
                    self.write(" = ");
                }
                self.expr(value);
            }
            StmtKind::AugAssign { target, op, value } => {
                self.fill(indent);
                self.expr(target);
                self.write(" ");
                self.write(binop_str(*op));
                self.write("= ");
                self.expr(value);
            }
            StmtKind::Return(value) => {
                self.fill(indent);
                self.write("return");
                if let Some(v) = value {
                    self.write(" ");
                    self.expr(v);
                }
            }
            StmtKind::Pass => {
                self.fill(indent);
                self.write("pass");
            }
            StmtKind::Break => {
                self.fill(indent);
                self.write("break");
            }
            StmtKind::Continue => {
                self.fill(indent);
                self.write("continue");
            }
            StmtKind::Delete(targets) => {
                self.fill(indent);
                self.write("del ");
                self.comma_exprs(targets);
            }
            StmtKind::Print {
                dest,
                values,
                newline,
            } => {
                self.fill(indent);
                self.write("print");
                let mut comma = false;
                if let Some(d) = dest {
                    self.write(" >>");
                    self.expr(d);
                    comma = true;
                }
                for v in values {
                    if comma {
                        self.write(", ");
                    } else {
                        self.write(" ");
                        comma = true;
                    }
                    self.expr(v);
                }
                if !newline {
                    self.write(",");
                }
            }
            StmtKind::Global(names) => {
                self.fill(indent);
                self.write("global ");
                self.write(&names.join(", "));
            }
            StmtKind::Assert { test, msg } => {
                self.fill(indent);
                self.write("assert ");
                self.expr(test);
                if let Some(m) = msg {
                    self.write(", ");
                    self.expr(m);
                }
            }
            StmtKind::Exec {
                body,
                globals,
                locals,
            } => {
                self.fill(indent);
                self.write("exec ");
                self.expr(body);
                if let Some(g) = globals {
                    self.write(" in ");
                    self.expr(g);
                    if let Some(l) = locals {
                        self.write(", ");
                        self.expr(l);
                    }
                }
            }
            StmtKind::Raise { typ, inst, tback } => {
                self.fill(indent);
                self.write("raise");
                if let Some(t) = typ {
                    self.write(" ");
                    self.expr(t);
                    if let Some(i) = inst {
                        self.write(", ");
                        self.expr(i);
                        if let Some(tb) = tback {
                            self.write(", ");
                            self.expr(tb);
                        }
                    }
                }
            }
            StmtKind::Import(names) => {
                self.fill(indent);
                self.write("import ");
                self.aliases(names);
            }
            StmtKind::ImportFrom {
                module,
                names,
                level,
            } => {
                self.fill(indent);
                self.write("from ");
                for _ in 0..*level {
                    self.write(".");
                }
                if let Some(m) = module {
                    self.write(m);
                }
                self.write(" import ");
                match names {
                    ImportNames::Star => self.write("*"),
                    ImportNames::Names(ns) => self.aliases(ns),
                }
            }
            StmtKind::If { test, body, orelse } => {
                self.fill(indent);
                self.write("if ");
                self.expr(test);
                self.write(":");
                self.stmts(body, indent + 1);
                let mut rest = orelse;
                loop {
                    // collapse a lone nested if into elif
                    if rest.len() == 1 {
                        if let StmtKind::If { test, body, orelse } = &rest[0].kind {
                            self.fill(indent);
                            self.write("elif ");
                            self.expr(test);
                            self.write(":");
                            self.stmts(body, indent + 1);
                            rest = orelse;
                            continue;
                        }
                    }
                    break;
                }
                if !rest.is_empty() {
                    self.fill(indent);
                    self.write("else:");
                    self.stmts(rest, indent + 1);
                }
            }
            StmtKind::While { test, body, orelse } => {
                self.fill(indent);
                self.write("while ");
                self.expr(test);
                self.write(":");
                self.stmts(body, indent + 1);
                self.else_suite(orelse, indent);
            }
            StmtKind::For {
                target,
                iter,
                body,
                orelse,
            } => {
                self.fill(indent);
                self.write("for ");
                self.expr(target);
                self.write(" in ");
                self.expr(iter);
                self.write(":");
                self.stmts(body, indent + 1);
                self.else_suite(orelse, indent);
            }
            StmtKind::With {
                context,
                target,
                body,
            } => {
                self.fill(indent);
                self.write("with ");
                self.expr(context);
                if let Some(t) = target {
                    self.write(" as ");
                    self.expr(t);
                }
                self.write(":");
                self.stmts(body, indent + 1);
            }
            StmtKind::TryExcept {
                body,
                handlers,
                orelse,
            } => {
                self.fill(indent);
                self.write("try:");
                self.stmts(body, indent + 1);
                for h in handlers {
                    self.fill(indent);
                    self.write("except");
                    if let Some(t) = &h.typ {
                        self.write(" ");
                        self.expr(t);
                        if let Some(n) = &h.name {
                            self.write(" as ");
                            self.expr(n);
                        }
                    }
                    self.write(":");
                    self.stmts(&h.body, indent + 1);
                }
                self.else_suite(orelse, indent);
            }
            StmtKind::TryFinally { body, finalbody } => {
                // try/except/finally carries the except block as the sole
                // body statement; emit it flat
                if body.len() == 1 && matches!(body[0].kind, StmtKind::TryExcept { .. }) {
                    self.stmt(&body[0], indent);
                } else {
                    self.fill(indent);
                    self.write("try:");
                    self.stmts(body, indent + 1);
                }
                self.fill(indent);
                self.write("finally:");
                self.stmts(finalbody, indent + 1);
            }
            StmtKind::FunctionDef {
                name,
                params,
                body,
                decorators,
            } => {
                for d in decorators {
                    self.fill(indent);
                    self.write("@");
                    self.expr(d);
                }
                self.fill(indent);
                self.write("def ");
                self.write(name);
                self.write("(");
                self.params(params);
                self.write("):");
                self.stmts(body, indent + 1);
            }
            StmtKind::ClassDef {
                name,
                bases,
                body,
                decorators,
            } => {
                for d in decorators {
                    self.fill(indent);
                    self.write("@");
                    self.expr(d);
                }
                self.fill(indent);
                self.write("class ");
                self.write(name);
                if !bases.is_empty() {
                    self.write("(");
                    self.comma_exprs(bases);
                    self.write(")");
                }
                self.write(":");
                self.stmts(body, indent + 1);
            }
        }
    }

    fn else_suite(&mut self, orelse: &[Stmt], indent: usize) {
        if !orelse.is_empty() {
            self.fill(indent);
            self.write("else:");
            self.stmts(orelse, indent + 1);
        }
    }

    fn aliases(&mut self, names: &[Alias]) {
        for (i, a) in names.iter().enumerate() {
            if i > 0 {
                self.write(", ");
            }
            self.write(&a.name);
            if let Some(asn) = &a.asname {
                self.write(" as ");
                self.write(asn);
            }
        }
    }

    fn comma_exprs(&mut self, exprs: &[Expr]) {
        for (i, e) in exprs.iter().enumerate() {
            if i > 0 {
                self.write(", ");
            }
            self.expr(e);
        }
    }

    fn params(&mut self, params: &Params) {
        let pad = params.args.len() - params.defaults.len();
        let mut first = true;
        for (i, p) in params.args.iter().enumerate() {
            if !first {
                self.write(", ");
            }
            first = false;
            self.param(p);
            if i >= pad {
                self.write("=");
                self.expr(&params.defaults[i - pad]);
            }
        }
        if let Some(v) = &params.vararg {
            if !first {
                self.write(", ");
            }
            first = false;
            self.write("*");
            self.write(v);
        }
        if let Some(k) = &params.kwarg {
            if !first {
                self.write(", ");
            }
            self.write("**");
            self.write(k);
        }
    }

    fn param(&mut self, p: &Param) {
        match p {
            Param::Name(n) => self.write(n),
            Param::Tuple(elts) => {
                self.write("(");
                for (i, e) in elts.iter().enumerate() {
                    if i > 0 {
                        self.write(", ");
                    }
                    self.param(e);
                }
                if elts.len() == 1 {
                    self.write(",");
                }
                self.write(")");
            }
        }
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Name(n) => self.write(n),
            Expr::Num(n) => self.write(&render_number(n)),
            Expr::Str(s) => {
                let rendered = render_string(s, self.bytes_prefix);
                self.write(&rendered);
            }
            Expr::BoolOp { op, values } => {
                self.write("(");
                let sep = match op {
                    BoolOpKind::And => " and ",
                    BoolOpKind::Or => " or ",
                };
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        self.write(sep);
                    }
                    self.expr(v);
                }
                self.write(")");
            }
            Expr::BinOp { left, op, right } => {
                self.write("(");
                self.expr(left);
                self.write(" ");
                self.write(binop_str(*op));
                self.write(" ");
                self.expr(right);
                self.write(")");
            }
            Expr::UnaryOp { op, operand } => {
                self.write("(");
                match op {
                    UnaryOpKind::Not => self.write("not "),
                    UnaryOpKind::UAdd => self.write("+"),
                    UnaryOpKind::USub => self.write("-"),
                    UnaryOpKind::Invert => self.write("~"),
                }
                self.expr(operand);
                self.write(")");
            }
            Expr::Lambda { params, body } => {
                self.write("(lambda");
                if !params.is_empty() {
                    self.write(" ");
                    self.params(params);
                }
                self.write(": ");
                self.expr(body);
                self.write(")");
            }
            Expr::IfExp { test, body, orelse } => {
                self.write("(");
                self.expr(body);
                self.write(" if ");
                self.expr(test);
                self.write(" else ");
                self.expr(orelse);
                self.write(")");
            }
            Expr::Dict { keys, values } => {
                self.write("{");
                for (i, (k, v)) in keys.iter().zip(values).enumerate() {
                    if i > 0 {
                        self.write(", ");
                    }
                    self.expr(k);
                    self.write(": ");
                    self.expr(v);
                }
                self.write("}");
            }
            Expr::Set(elts) => {
                self.write("{");
                self.comma_exprs(elts);
                self.write("}");
            }
            Expr::ListComp { elt, generators } => {
                self.write("[");
                self.expr(elt);
                self.comprehensions(generators);
                self.write("]");
            }
            Expr::SetComp { elt, generators } => {
                self.write("{");
                self.expr(elt);
                self.comprehensions(generators);
                self.write("}");
            }
            Expr::DictComp {
                key,
                value,
                generators,
            } => {
                self.write("{");
                self.expr(key);
                self.write(": ");
                self.expr(value);
                self.comprehensions(generators);
                self.write("}");
            }
            Expr::GeneratorExp { elt, generators } => {
                self.write("(");
                self.expr(elt);
                self.comprehensions(generators);
                self.write(")");
            }
            Expr::Yield(value) => {
                self.write("(yield");
                if let Some(v) = value {
                    self.write(" ");
                    self.expr(v);
                }
                self.write(")");
            }
            Expr::Compare {
                left,
                ops,
                comparators,
            } => {
                self.write("(");
                self.expr(left);
                for (op, c) in ops.iter().zip(comparators) {
                    self.write(" ");
                    self.write(cmpop_str(*op));
                    self.write(" ");
                    self.expr(c);
                }
                self.write(")");
            }
            Expr::Call {
                func,
                args,
                keywords,
                star_args,
                kw_args,
            } => {
                self.expr(func);
                self.write("(");
                let mut comma = false;
                for a in args {
                    if comma {
                        self.write(", ");
                    }
                    comma = true;
                    self.expr(a);
                }
                for k in keywords {
                    if comma {
                        self.write(", ");
                    }
                    comma = true;
                    self.write(&k.name);
                    self.write("=");
                    self.expr(&k.value);
                }
                if let Some(s) = star_args {
                    if comma {
                        self.write(", ");
                    }
                    comma = true;
                    self.write("*");
                    self.expr(s);
                }
                if let Some(kw) = kw_args {
                    if comma {
                        self.write(", ");
                    }
                    self.write("**");
                    self.expr(kw);
                }
                self.write(")");
            }
            Expr::Repr(v) => {
                self.write("`");
                self.expr(v);
                self.write("`");
            }
            Expr::Attribute { value, attr } => {
                // an integer literal needs parens: `3.x` would not re-lex
                if matches!(**value, Expr::Num(Number::Int(_))) {
                    self.write("(");
                    self.expr(value);
                    self.write(")");
                } else {
                    self.expr(value);
                }
                self.write(".");
                self.write(attr);
            }
            Expr::Subscript { value, slice } => {
                self.expr(value);
                self.write("[");
                self.slice(slice);
                self.write("]");
            }
            Expr::List(elts) => {
                self.write("[");
                self.comma_exprs(elts);
                self.write("]");
            }
            Expr::Tuple(elts) => {
                self.write("(");
                self.comma_exprs(elts);
                if elts.len() == 1 {
                    self.write(",");
                }
                self.write(")");
            }
        }
    }

    fn comprehensions(&mut self, generators: &[Comprehension]) {
        for g in generators {
            self.write(" for ");
            self.expr(&g.target);
            self.write(" in ");
            self.expr(&g.iter);
            for cond in &g.ifs {
                self.write(" if ");
                self.expr(cond);
            }
        }
    }

    fn slice(&mut self, s: &Slice) {
        match s {
            Slice::Index(e) => self.expr(e),
            Slice::Ellipsis => self.write("..."),
            Slice::Range { lower, upper, step } => {
                if let Some(l) = lower {
                    self.expr(l);
                }
                self.write(":");
                if let Some(u) = upper {
                    self.expr(u);
                }
                if let Some(st) = step {
                    self.write(":");
                    self.expr(st);
                }
            }
            Slice::Extended(dims) => {
                for (i, d) in dims.iter().enumerate() {
                    if i > 0 {
                        self.write(", ");
                    }
                    self.slice(d);
                }
                // a single dimension must keep its comma to re-parse as
                // an extended slice
                if dims.len() == 1 {
                    self.write(",");
                }
            }
        }
    }
}

fn binop_str(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mult => "*",
        BinOp::Div => "/",
        BinOp::Mod => "%",
        BinOp::Pow => "**",
        BinOp::LShift => "<<",
        BinOp::RShift => ">>",
        BinOp::BitOr => "|",
        BinOp::BitXor => "^",
        BinOp::BitAnd => "&",
        BinOp::FloorDiv => "//",
    }
}

fn cmpop_str(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "==",
        CmpOp::NotEq => "!=",
        CmpOp::Lt => "<",
        CmpOp::LtE => "<=",
        CmpOp::Gt => ">",
        CmpOp::GtE => ">=",
        CmpOp::Is => "is",
        CmpOp::IsNot => "is not",
        CmpOp::In => "in",
        CmpOp::NotIn => "not in",
    }
}

fn render_number(n: &Number) -> String {
    match n {
        Number::Int(v) => v.to_string(),
        Number::Float(v) => render_float(*v),
        Number::Imaginary(v) => {
            let mut s = render_float(*v);
            if let Some(stripped) = s.strip_suffix(".0") {
                s = stripped.to_string();
            }
            s.push('j');
            s
        }
    }
}

/// Shortest round-trip float rendering with an explicit fractional part or
/// exponent, matching Python's repr: positional for decimal exponents in
/// [-4, 16), scientific otherwise.
pub(crate) fn render_float(v: f64) -> String {
    if v.is_infinite() {
        // literal overflow: re-parses to the same infinity
        return "1e400".to_string();
    }
    let sci = format!("{:e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("{:e} always has an exponent");
    let exp: i32 = exp.parse().unwrap();
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if (-4..16).contains(&exp) {
        if exp >= 0 {
            let whole = exp as usize + 1;
            if whole >= digits.len() {
                let zeros = "0".repeat(whole - digits.len());
                format!("{}{}.0", digits, zeros)
            } else {
                format!("{}.{}", &digits[..whole], &digits[whole..])
            }
        } else {
            let zeros = "0".repeat((-exp - 1) as usize);
            format!("0.{}{}", zeros, digits)
        }
    } else {
        let mantissa = if digits.len() == 1 {
            digits
        } else {
            format!("{}.{}", &digits[..1], &digits[1..])
        };
        if exp < 0 {
            format!("{}e-{:02}", mantissa, -exp)
        } else {
            format!("{}e+{:02}", mantissa, exp)
        }
    }
}

/// Escape a string literal for one-line output: always single quotes, all
/// control and non-ASCII content as backslash escapes. Runs of spaces keep
/// only their first space raw; the corpus line format collapses whitespace
/// runs, so the rest must be written as `\x20` to stay reversible.
fn render_string(s: &PyString, bytes_prefix: bool) -> String {
    match s {
        PyString::Bytes(bytes) => {
            let mut out = String::with_capacity(bytes.len() + 3);
            if bytes_prefix {
                out.push('b');
            }
            out.push('\'');
            let mut prev_space = false;
            for &b in bytes {
                escape_code_unit(&mut out, b as u32, false, &mut prev_space);
            }
            out.push('\'');
            out
        }
        PyString::Unicode(cps) => {
            let mut out = String::with_capacity(cps.len() + 3);
            out.push('u');
            out.push('\'');
            let mut prev_space = false;
            for &cp in cps {
                escape_code_unit(&mut out, cp, true, &mut prev_space);
            }
            out.push('\'');
            out
        }
    }
}

fn escape_code_unit(out: &mut String, cp: u32, unicode: bool, prev_space: &mut bool) {
    if cp == 0x20 {
        if *prev_space {
            out.push_str("\\x20");
        } else {
            out.push(' ');
        }
        *prev_space = true;
        return;
    }
    *prev_space = false;
    match cp {
        0x5c => out.push_str("\\\\"),
        0x27 => out.push_str("\\'"),
        0x0a => out.push_str("\\n"),
        0x0d => out.push_str("\\r"),
        0x09 => out.push_str("\\t"),
        0x21..=0x7e => out.push(cp as u8 as char),
        _ => {
            if cp < 0x100 {
                out.push_str(&format!("\\x{:02x}", cp));
            } else if unicode && cp < 0x10000 {
                out.push_str(&format!("\\u{:04x}", cp));
            } else {
                out.push_str(&format!("\\U{:08x}", cp));
            }
        }
    }
}
