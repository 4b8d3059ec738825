//! Recursive-descent parser for the Python 2.7 grammar.
//!
//! Follows the CPython 2.7 Grammar file rule by rule, building the tree of
//! [`super::ast`]. `__future__` imports that change the grammar
//! (`print_function`) or literal kinds (`unicode_literals`) are honored as
//! they are parsed, mirroring CPython's file-level future handling.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{tokenize, Kw, Op, Tok};
use super::strings::{concat_strings, decode_string};
use super::ParseFailure;

pub(crate) fn parse(source: &str, path: &str) -> Result<Module, ParseFailure> {
    let (toks, trailing_error) = tokenize(source, path)?;
    let mut p = Parser {
        toks: toks.clone(),
        pos: 0,
        path,
        future_print: false,
        future_unicode: false,
        module_docstring_seen: false,
        non_future_stmt_seen: false,
    };
    let mut body = p.file_input()?;
    // unicode_literals applies to the whole file in CPython, including the
    // module docstring that precedes the import; re-run with the flag
    // pre-set so that literal decodes the same way
    if p.future_unicode && p.module_docstring_seen {
        let mut p2 = Parser {
            toks,
            pos: 0,
            path,
            future_print: false,
            future_unicode: true,
            module_docstring_seen: false,
            non_future_stmt_seen: false,
        };
        body = p2.file_input()?;
    }
    if let Some(e) = trailing_error {
        return Err(e);
    }
    Ok(Module {
        body,
        source_path: path.to_string(),
    })
}

struct Parser<'a> {
    toks: Vec<(u32, Tok)>,
    pos: usize,
    path: &'a str,
    future_print: bool,
    future_unicode: bool,
    module_docstring_seen: bool,
    non_future_stmt_seen: bool,
}

const KNOWN_FUTURES: &[&str] = &[
    "nested_scopes",
    "generators",
    "division",
    "absolute_import",
    "with_statement",
    "print_function",
    "unicode_literals",
];

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn peek_at(&self, off: usize) -> &Tok {
        self.toks
            .get(self.pos + off)
            .map(|t| &t.1)
            .unwrap_or(&Tok::EndMarker)
    }

    fn line(&self) -> u32 {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, reason: impl Into<String>) -> ParseFailure {
        ParseFailure {
            path: self.path.to_string(),
            line: self.line(),
            reason: reason.into(),
        }
    }

    fn at_op(&self, op: Op) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn at_kw(&self, kw: Kw) -> bool {
        matches!(self.peek(), Tok::Kw(k) if *k == kw)
    }

    fn eat_op(&mut self, op: Op) -> bool {
        if self.at_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: Kw) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: Op, what: &str) -> Result<(), ParseFailure> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.fail(format!("expected {}", what)))
        }
    }

    fn expect_kw(&mut self, kw: Kw, what: &str) -> Result<(), ParseFailure> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.fail(format!("expected {}", what)))
        }
    }

    fn expect_name(&mut self) -> Result<String, ParseFailure> {
        match self.peek() {
            Tok::Name(_) => match self.bump() {
                Tok::Name(n) => Ok(n),
                _ => unreachable!(),
            },
            _ => Err(self.fail("expected an identifier")),
        }
    }

    fn expect_newline(&mut self) -> Result<(), ParseFailure> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::EndMarker => Ok(()),
            _ => Err(self.fail("invalid syntax (expected end of statement)")),
        }
    }

    /// Whether the current token can begin a `test` expression.
    fn at_test_start(&self) -> bool {
        match self.peek() {
            Tok::Name(_) | Tok::Int(_) | Tok::Float(_) | Tok::Imag(_) | Tok::Str(_) => true,
            Tok::Kw(Kw::Not) | Tok::Kw(Kw::Lambda) => true,
            Tok::Kw(Kw::Print) => self.future_print,
            Tok::Op(op) => matches!(
                op,
                Op::LParen
                    | Op::LBracket
                    | Op::LBrace
                    | Op::Backtick
                    | Op::Plus
                    | Op::Minus
                    | Op::Tilde
            ),
            _ => false,
        }
    }

    // ------------------------------------------------------------------
    // module and statements

    fn file_input(&mut self) -> Result<Vec<Stmt>, ParseFailure> {
        let mut body = Vec::new();
        loop {
            match self.peek() {
                Tok::EndMarker => break,
                Tok::Newline => {
                    self.bump();
                }
                _ => {
                    let stmts = self.statement()?;
                    for s in stmts {
                        self.track_future(&s)?;
                        body.push(s);
                    }
                }
            }
        }
        Ok(body)
    }

    /// Enforce the placement rule for `__future__` imports and activate the
    /// grammar-affecting flags.
    fn track_future(&mut self, stmt: &Stmt) -> Result<(), ParseFailure> {
        if let StmtKind::ImportFrom {
            module: Some(m),
            names,
            level: 0,
        } = &stmt.kind
        {
            if m == "__future__" {
                if self.non_future_stmt_seen {
                    return Err(ParseFailure {
                        path: self.path.to_string(),
                        line: stmt.line,
                        reason: "from __future__ imports must occur at the beginning of the file"
                            .into(),
                    });
                }
                let names = match names {
                    ImportNames::Star => {
                        return Err(ParseFailure {
                            path: self.path.to_string(),
                            line: stmt.line,
                            reason: "future statement does not support import *".into(),
                        })
                    }
                    ImportNames::Names(ns) => ns,
                };
                for alias in names {
                    if !KNOWN_FUTURES.contains(&alias.name.as_str()) {
                        return Err(ParseFailure {
                            path: self.path.to_string(),
                            line: stmt.line,
                            reason: format!("future feature {} is not defined", alias.name),
                        });
                    }
                    match alias.name.as_str() {
                        "print_function" => self.future_print = true,
                        "unicode_literals" => self.future_unicode = true,
                        _ => {}
                    }
                }
                return Ok(());
            }
        }
        if matches!(&stmt.kind, StmtKind::Expr(Expr::Str(_))) && !self.module_docstring_seen {
            self.module_docstring_seen = true;
        } else {
            self.non_future_stmt_seen = true;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<Vec<Stmt>, ParseFailure> {
        match self.peek() {
            Tok::Kw(Kw::If) => Ok(vec![self.if_stmt()?]),
            Tok::Kw(Kw::While) => Ok(vec![self.while_stmt()?]),
            Tok::Kw(Kw::For) => Ok(vec![self.for_stmt()?]),
            Tok::Kw(Kw::Try) => Ok(vec![self.try_stmt()?]),
            Tok::Kw(Kw::With) => Ok(vec![self.with_stmt()?]),
            Tok::Kw(Kw::Def) => Ok(vec![self.funcdef(Vec::new())?]),
            Tok::Kw(Kw::Class) => Ok(vec![self.classdef(Vec::new())?]),
            Tok::Op(Op::At) => Ok(vec![self.decorated()?]),
            _ => self.simple_stmt(),
        }
    }

    fn simple_stmt(&mut self) -> Result<Vec<Stmt>, ParseFailure> {
        let mut out = vec![self.small_stmt()?];
        while self.eat_op(Op::Semi) {
            if matches!(self.peek(), Tok::Newline | Tok::EndMarker) {
                break;
            }
            out.push(self.small_stmt()?);
        }
        self.expect_newline()?;
        Ok(out)
    }

    fn small_stmt(&mut self) -> Result<Stmt, ParseFailure> {
        let line = self.line();
        let kind = match self.peek() {
            Tok::Kw(Kw::Print) if !self.future_print => self.print_stmt()?,
            Tok::Kw(Kw::Del) => {
                self.bump();
                let (targets, _) = self.exprlist_raw()?;
                for t in &targets {
                    self.check_target(t, "delete")?;
                }
                StmtKind::Delete(targets)
            }
            Tok::Kw(Kw::Pass) => {
                self.bump();
                StmtKind::Pass
            }
            Tok::Kw(Kw::Break) => {
                self.bump();
                StmtKind::Break
            }
            Tok::Kw(Kw::Continue) => {
                self.bump();
                StmtKind::Continue
            }
            Tok::Kw(Kw::Return) => {
                self.bump();
                let value = if self.at_test_start() {
                    Some(self.testlist()?)
                } else {
                    None
                };
                StmtKind::Return(value)
            }
            Tok::Kw(Kw::Raise) => {
                self.bump();
                let mut typ = None;
                let mut inst = None;
                let mut tback = None;
                if self.at_test_start() {
                    typ = Some(self.test()?);
                    if self.eat_op(Op::Comma) {
                        inst = Some(self.test()?);
                        if self.eat_op(Op::Comma) {
                            tback = Some(self.test()?);
                        }
                    }
                }
                StmtKind::Raise { typ, inst, tback }
            }
            Tok::Kw(Kw::Yield) => StmtKind::Expr(self.yield_expr()?),
            Tok::Kw(Kw::Import) => self.import_name()?,
            Tok::Kw(Kw::From) => self.import_from()?,
            Tok::Kw(Kw::Global) => {
                self.bump();
                let mut names = vec![self.expect_name()?];
                while self.eat_op(Op::Comma) {
                    names.push(self.expect_name()?);
                }
                StmtKind::Global(names)
            }
            Tok::Kw(Kw::Exec) => {
                self.bump();
                let body = self.or_expr()?;
                let mut globals = None;
                let mut locals = None;
                if self.eat_kw(Kw::In) {
                    globals = Some(self.test()?);
                    if self.eat_op(Op::Comma) {
                        locals = Some(self.test()?);
                    }
                }
                StmtKind::Exec {
                    body,
                    globals,
                    locals,
                }
            }
            Tok::Kw(Kw::Assert) => {
                self.bump();
                let test = self.test()?;
                let msg = if self.eat_op(Op::Comma) {
                    Some(self.test()?)
                } else {
                    None
                };
                StmtKind::Assert { test, msg }
            }
            _ => self.expr_stmt()?,
        };
        Ok(Stmt { line, kind })
    }

    fn print_stmt(&mut self) -> Result<StmtKind, ParseFailure> {
        self.bump(); // print
        let mut dest = None;
        let mut values = Vec::new();
        let mut newline = true;
        if self.at_op(Op::RShift) {
            self.bump();
            dest = Some(self.test()?);
            if self.eat_op(Op::Comma) {
                values.push(self.test()?);
                while self.eat_op(Op::Comma) {
                    if !self.at_test_start() {
                        newline = false;
                        break;
                    }
                    values.push(self.test()?);
                }
            }
        } else if self.at_test_start() {
            values.push(self.test()?);
            while self.eat_op(Op::Comma) {
                if !self.at_test_start() {
                    newline = false;
                    break;
                }
                values.push(self.test()?);
            }
        }
        Ok(StmtKind::Print {
            dest,
            values,
            newline,
        })
    }

    fn expr_stmt(&mut self) -> Result<StmtKind, ParseFailure> {
        let first = self.testlist()?;
        if let Some(op) = self.aug_op() {
            self.bump();
            match &first {
                Expr::Name(_) | Expr::Attribute { .. } | Expr::Subscript { .. } => {}
                Expr::Tuple(_) | Expr::List(_) => {
                    return Err(
                        self.fail("augmented assignment to tuple or list is not possible")
                    )
                }
                _ => return Err(self.fail("illegal expression for augmented assignment")),
            }
            if let Expr::Name(n) = &first {
                if n == "None" {
                    return Err(self.fail("cannot assign to None"));
                }
            }
            let value = if self.at_kw(Kw::Yield) {
                self.yield_expr()?
            } else {
                self.testlist()?
            };
            return Ok(StmtKind::AugAssign {
                target: first,
                op,
                value,
            });
        }
        if !self.at_op(Op::Assign) {
            return Ok(StmtKind::Expr(first));
        }
        let mut chain = vec![first];
        while self.eat_op(Op::Assign) {
            if self.at_kw(Kw::Yield) {
                chain.push(self.yield_expr()?);
            } else {
                chain.push(self.testlist()?);
            }
        }
        let value = chain.pop().unwrap();
        for target in &chain {
            self.check_target(target, "assign")?;
        }
        Ok(StmtKind::Assign {
            targets: chain,
            value,
        })
    }

    fn aug_op(&self) -> Option<BinOp> {
        let op = match self.peek() {
            Tok::Op(Op::PlusEq) => BinOp::Add,
            Tok::Op(Op::MinusEq) => BinOp::Sub,
            Tok::Op(Op::StarEq) => BinOp::Mult,
            Tok::Op(Op::SlashEq) => BinOp::Div,
            Tok::Op(Op::DoubleSlashEq) => BinOp::FloorDiv,
            Tok::Op(Op::PercentEq) => BinOp::Mod,
            Tok::Op(Op::AmpEq) => BinOp::BitAnd,
            Tok::Op(Op::PipeEq) => BinOp::BitOr,
            Tok::Op(Op::CaretEq) => BinOp::BitXor,
            Tok::Op(Op::LShiftEq) => BinOp::LShift,
            Tok::Op(Op::RShiftEq) => BinOp::RShift,
            Tok::Op(Op::DoubleStarEq) => BinOp::Pow,
            _ => return None,
        };
        Some(op)
    }

    fn check_target(&self, e: &Expr, what: &str) -> Result<(), ParseFailure> {
        match e {
            Expr::Name(n) => {
                if n == "None" {
                    Err(self.fail(format!("cannot {} None", what)))
                } else {
                    Ok(())
                }
            }
            Expr::Attribute { .. } | Expr::Subscript { .. } => Ok(()),
            Expr::Tuple(elts) => {
                if elts.is_empty() {
                    return Err(self.fail(format!("can't {} to ()", what)));
                }
                elts.iter().try_for_each(|t| self.check_target(t, what))
            }
            Expr::List(elts) => elts.iter().try_for_each(|t| self.check_target(t, what)),
            _ => Err(self.fail(format!("can't {} to this expression", what))),
        }
    }

    fn import_name(&mut self) -> Result<StmtKind, ParseFailure> {
        self.bump(); // import
        let mut names = vec![self.dotted_as_name()?];
        while self.eat_op(Op::Comma) {
            names.push(self.dotted_as_name()?);
        }
        Ok(StmtKind::Import(names))
    }

    fn dotted_name(&mut self) -> Result<String, ParseFailure> {
        let mut name = self.expect_name()?;
        while self.at_op(Op::Dot) {
            self.bump();
            name.push('.');
            name.push_str(&self.expect_name()?);
        }
        Ok(name)
    }

    fn dotted_as_name(&mut self) -> Result<Alias, ParseFailure> {
        let name = self.dotted_name()?;
        let asname = if self.eat_kw(Kw::As) {
            Some(self.expect_name()?)
        } else {
            None
        };
        Ok(Alias { name, asname })
    }

    fn import_from(&mut self) -> Result<StmtKind, ParseFailure> {
        self.bump(); // from
        let mut level = 0u32;
        while self.eat_op(Op::Dot) {
            level += 1;
        }
        let module = if matches!(self.peek(), Tok::Name(_)) {
            Some(self.dotted_name()?)
        } else {
            if level == 0 {
                return Err(self.fail("expected module name after 'from'"));
            }
            None
        };
        self.expect_kw(Kw::Import, "'import'")?;
        let names = if self.eat_op(Op::Star) {
            ImportNames::Star
        } else {
            let parens = self.eat_op(Op::LParen);
            let mut names = vec![self.import_as_name()?];
            while self.eat_op(Op::Comma) {
                if parens && self.at_op(Op::RParen) {
                    break;
                }
                if !parens && matches!(self.peek(), Tok::Newline | Tok::EndMarker) {
                    return Err(self.fail("trailing comma not allowed without parentheses"));
                }
                names.push(self.import_as_name()?);
            }
            if parens {
                self.expect_op(Op::RParen, "')'")?;
            }
            ImportNames::Names(names)
        };
        Ok(StmtKind::ImportFrom {
            module,
            names,
            level,
        })
    }

    fn import_as_name(&mut self) -> Result<Alias, ParseFailure> {
        let name = self.expect_name()?;
        let asname = if self.eat_kw(Kw::As) {
            Some(self.expect_name()?)
        } else {
            None
        };
        Ok(Alias { name, asname })
    }

    // ------------------------------------------------------------------
    // compound statements

    fn if_stmt(&mut self) -> Result<Stmt, ParseFailure> {
        let line = self.line();
        self.bump(); // if / elif
        let test = self.test()?;
        self.expect_op(Op::Colon, "':'")?;
        let body = self.suite()?;
        let orelse = if self.at_kw(Kw::Elif) {
            vec![self.if_stmt()?]
        } else if self.eat_kw(Kw::Else) {
            self.expect_op(Op::Colon, "':'")?;
            self.suite()?
        } else {
            Vec::new()
        };
        Ok(Stmt {
            line,
            kind: StmtKind::If { test, body, orelse },
        })
    }

    fn while_stmt(&mut self) -> Result<Stmt, ParseFailure> {
        let line = self.line();
        self.bump();
        let test = self.test()?;
        self.expect_op(Op::Colon, "':'")?;
        let body = self.suite()?;
        let orelse = if self.eat_kw(Kw::Else) {
            self.expect_op(Op::Colon, "':'")?;
            self.suite()?
        } else {
            Vec::new()
        };
        Ok(Stmt {
            line,
            kind: StmtKind::While { test, body, orelse },
        })
    }

    fn for_stmt(&mut self) -> Result<Stmt, ParseFailure> {
        let line = self.line();
        self.bump();
        let target = self.exprlist_as_expr()?;
        self.check_target(&target, "assign")?;
        self.expect_kw(Kw::In, "'in'")?;
        let iter = self.testlist()?;
        self.expect_op(Op::Colon, "':'")?;
        let body = self.suite()?;
        let orelse = if self.eat_kw(Kw::Else) {
            self.expect_op(Op::Colon, "':'")?;
            self.suite()?
        } else {
            Vec::new()
        };
        Ok(Stmt {
            line,
            kind: StmtKind::For {
                target,
                iter,
                body,
                orelse,
            },
        })
    }

    fn try_stmt(&mut self) -> Result<Stmt, ParseFailure> {
        let line = self.line();
        self.bump();
        self.expect_op(Op::Colon, "':'")?;
        let body = self.suite()?;
        if self.eat_kw(Kw::Finally) {
            self.expect_op(Op::Colon, "':'")?;
            let finalbody = self.suite()?;
            return Ok(Stmt {
                line,
                kind: StmtKind::TryFinally { body, finalbody },
            });
        }
        let mut handlers = Vec::new();
        while self.at_kw(Kw::Except) {
            let hline = self.line();
            self.bump();
            let mut typ = None;
            let mut name = None;
            if self.at_test_start() {
                typ = Some(self.test()?);
                if self.eat_kw(Kw::As) || self.eat_op(Op::Comma) {
                    let target = self.test()?;
                    self.check_target(&target, "assign")?;
                    name = Some(target);
                }
            }
            self.expect_op(Op::Colon, "':'")?;
            let hbody = self.suite()?;
            let bare = typ.is_none();
            handlers.push(ExceptHandler {
                line: hline,
                typ,
                name,
                body: hbody,
            });
            if bare && self.at_kw(Kw::Except) {
                return Err(self.fail("default 'except:' must be last"));
            }
        }
        if handlers.is_empty() {
            return Err(self.fail("expected 'except' or 'finally' after try body"));
        }
        let orelse = if self.eat_kw(Kw::Else) {
            self.expect_op(Op::Colon, "':'")?;
            self.suite()?
        } else {
            Vec::new()
        };
        let te = Stmt {
            line,
            kind: StmtKind::TryExcept {
                body,
                handlers,
                orelse,
            },
        };
        if self.eat_kw(Kw::Finally) {
            self.expect_op(Op::Colon, "':'")?;
            let finalbody = self.suite()?;
            return Ok(Stmt {
                line,
                kind: StmtKind::TryFinally {
                    body: vec![te],
                    finalbody,
                },
            });
        }
        Ok(te)
    }

    fn with_stmt(&mut self) -> Result<Stmt, ParseFailure> {
        let line = self.line();
        self.bump();
        let mut items = Vec::new();
        loop {
            let context = self.test()?;
            let target = if self.eat_kw(Kw::As) {
                let t = self.or_expr()?;
                self.check_target(&t, "assign")?;
                Some(t)
            } else {
                None
            };
            items.push((context, target));
            if !self.eat_op(Op::Comma) {
                break;
            }
        }
        self.expect_op(Op::Colon, "':'")?;
        let mut body = self.suite()?;
        // multiple items nest, matching the CPython 2.7 tree
        while items.len() > 1 {
            let (context, target) = items.pop().unwrap();
            body = vec![Stmt {
                line,
                kind: StmtKind::With {
                    context,
                    target,
                    body,
                },
            }];
        }
        let (context, target) = items.pop().unwrap();
        Ok(Stmt {
            line,
            kind: StmtKind::With {
                context,
                target,
                body,
            },
        })
    }

    fn decorated(&mut self) -> Result<Stmt, ParseFailure> {
        let mut decorators = Vec::new();
        while self.eat_op(Op::At) {
            let name = self.dotted_name()?;
            let mut expr = dotted_to_expr(&name);
            if self.at_op(Op::LParen) {
                self.bump();
                let (args, keywords, star_args, kw_args) = self.call_args()?;
                expr = Expr::Call {
                    func: Box::new(expr),
                    args,
                    keywords,
                    star_args,
                    kw_args,
                };
            }
            self.expect_newline()?;
            while matches!(self.peek(), Tok::Newline) {
                self.bump();
            }
            decorators.push(expr);
        }
        match self.peek() {
            Tok::Kw(Kw::Def) => self.funcdef(decorators),
            Tok::Kw(Kw::Class) => self.classdef(decorators),
            _ => Err(self.fail("expected 'def' or 'class' after decorators")),
        }
    }

    fn funcdef(&mut self, decorators: Vec<Expr>) -> Result<Stmt, ParseFailure> {
        let line = self.line(); // the `def` line, independent of decorators
        self.bump();
        let name = self.expect_name()?;
        self.expect_op(Op::LParen, "'('")?;
        let params = self.varargslist(Op::RParen)?;
        self.expect_op(Op::RParen, "')'")?;
        self.expect_op(Op::Colon, "':'")?;
        let body = self.suite()?;
        Ok(Stmt {
            line,
            kind: StmtKind::FunctionDef {
                name,
                params,
                body,
                decorators,
            },
        })
    }

    fn classdef(&mut self, decorators: Vec<Expr>) -> Result<Stmt, ParseFailure> {
        let line = self.line();
        self.bump();
        let name = self.expect_name()?;
        let mut bases = Vec::new();
        if self.eat_op(Op::LParen) {
            if !self.at_op(Op::RParen) {
                bases.push(self.test()?);
                while self.eat_op(Op::Comma) {
                    if self.at_op(Op::RParen) {
                        break;
                    }
                    bases.push(self.test()?);
                }
            }
            self.expect_op(Op::RParen, "')'")?;
        }
        self.expect_op(Op::Colon, "':'")?;
        let body = self.suite()?;
        Ok(Stmt {
            line,
            kind: StmtKind::ClassDef {
                name,
                bases,
                body,
                decorators,
            },
        })
    }

    fn suite(&mut self) -> Result<Vec<Stmt>, ParseFailure> {
        if matches!(self.peek(), Tok::Newline) {
            self.bump();
            if !matches!(self.peek(), Tok::Indent) {
                return Err(self.fail("expected an indented block"));
            }
            self.bump();
            let mut body = Vec::new();
            loop {
                match self.peek() {
                    Tok::Dedent => {
                        self.bump();
                        break;
                    }
                    Tok::Newline => {
                        self.bump();
                    }
                    Tok::EndMarker => break,
                    _ => body.extend(self.statement()?),
                }
            }
            if body.is_empty() {
                return Err(self.fail("expected an indented block"));
            }
            Ok(body)
        } else {
            self.simple_stmt()
        }
    }

    // ------------------------------------------------------------------
    // parameters

    /// Parse a `varargslist`, stopping before `end` (')' for def, ':' for
    /// lambda).
    fn varargslist(&mut self, end: Op) -> Result<Params, ParseFailure> {
        let mut params = Params::default();
        let mut defaults: Vec<Option<Expr>> = Vec::new();
        loop {
            if self.at_op(end) {
                break;
            }
            if self.eat_op(Op::Star) {
                params.vararg = Some(self.expect_name()?);
                if self.eat_op(Op::Comma) {
                    self.expect_op(Op::DoubleStar, "'**'")?;
                    params.kwarg = Some(self.expect_name()?);
                }
                break;
            }
            if self.eat_op(Op::DoubleStar) {
                params.kwarg = Some(self.expect_name()?);
                break;
            }
            let p = self.fpdef()?;
            params.args.push(p);
            if self.eat_op(Op::Assign) {
                defaults.push(Some(self.test()?));
            } else {
                defaults.push(None);
            }
            if !self.eat_op(Op::Comma) {
                break;
            }
        }
        // defaults must form a suffix
        let first_default = defaults.iter().position(|d| d.is_some());
        if let Some(i) = first_default {
            if defaults[i..].iter().any(|d| d.is_none()) {
                return Err(self.fail("non-default argument follows default argument"));
            }
            params.defaults = defaults.into_iter().flatten().collect();
        }
        Ok(params)
    }

    fn fpdef(&mut self) -> Result<Param, ParseFailure> {
        if self.eat_op(Op::LParen) {
            let mut elts = vec![self.fpdef()?];
            let mut trailing_comma = false;
            while self.eat_op(Op::Comma) {
                if self.at_op(Op::RParen) {
                    trailing_comma = true;
                    break;
                }
                elts.push(self.fpdef()?);
            }
            self.expect_op(Op::RParen, "')'")?;
            if elts.len() == 1 && !trailing_comma {
                // plain parenthesized name collapses, as in CPython
                return Ok(elts.pop().unwrap());
            }
            return Ok(Param::Tuple(elts));
        }
        let name = self.expect_name()?;
        if name == "None" {
            return Err(self.fail("cannot assign to None"));
        }
        Ok(Param::Name(name))
    }

    // ------------------------------------------------------------------
    // expressions

    fn testlist(&mut self) -> Result<Expr, ParseFailure> {
        let first = self.test()?;
        if !self.at_op(Op::Comma) {
            return Ok(first);
        }
        let mut elts = vec![first];
        while self.eat_op(Op::Comma) {
            if !self.at_test_start() {
                break;
            }
            elts.push(self.test()?);
        }
        Ok(Expr::Tuple(elts))
    }

    /// `exprlist` returning the raw element list (for `del`).
    fn exprlist_raw(&mut self) -> Result<(Vec<Expr>, bool), ParseFailure> {
        let mut elts = vec![self.or_expr()?];
        let mut had_comma = false;
        while self.eat_op(Op::Comma) {
            had_comma = true;
            if !self.at_test_start() {
                break;
            }
            elts.push(self.or_expr()?);
        }
        Ok((elts, had_comma))
    }

    /// `exprlist` as a single target expression (for `for` and
    /// comprehensions): commas build a tuple.
    fn exprlist_as_expr(&mut self) -> Result<Expr, ParseFailure> {
        let (mut elts, had_comma) = self.exprlist_raw()?;
        if elts.len() == 1 && !had_comma {
            Ok(elts.pop().unwrap())
        } else {
            Ok(Expr::Tuple(elts))
        }
    }

    fn test(&mut self) -> Result<Expr, ParseFailure> {
        if self.at_kw(Kw::Lambda) {
            return self.lambdef(false);
        }
        let body = self.or_test()?;
        if self.eat_kw(Kw::If) {
            let test = self.or_test()?;
            self.expect_kw(Kw::Else, "'else'")?;
            let orelse = self.test()?;
            return Ok(Expr::IfExp {
                test: Box::new(test),
                body: Box::new(body),
                orelse: Box::new(orelse),
            });
        }
        Ok(body)
    }

    /// `old_test`: no conditional expressions (comprehension conditions).
    fn old_test(&mut self) -> Result<Expr, ParseFailure> {
        if self.at_kw(Kw::Lambda) {
            return self.lambdef(true);
        }
        self.or_test()
    }

    fn lambdef(&mut self, old: bool) -> Result<Expr, ParseFailure> {
        self.bump(); // lambda
        let params = self.varargslist(Op::Colon)?;
        self.expect_op(Op::Colon, "':'")?;
        let body = if old { self.old_test()? } else { self.test()? };
        Ok(Expr::Lambda {
            params: Box::new(params),
            body: Box::new(body),
        })
    }

    fn or_test(&mut self) -> Result<Expr, ParseFailure> {
        let first = self.and_test()?;
        if !self.at_kw(Kw::Or) {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_kw(Kw::Or) {
            values.push(self.and_test()?);
        }
        Ok(Expr::BoolOp {
            op: BoolOpKind::Or,
            values,
        })
    }

    fn and_test(&mut self) -> Result<Expr, ParseFailure> {
        let first = self.not_test()?;
        if !self.at_kw(Kw::And) {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_kw(Kw::And) {
            values.push(self.not_test()?);
        }
        Ok(Expr::BoolOp {
            op: BoolOpKind::And,
            values,
        })
    }

    fn not_test(&mut self) -> Result<Expr, ParseFailure> {
        if self.eat_kw(Kw::Not) {
            let operand = self.not_test()?;
            return Ok(Expr::UnaryOp {
                op: UnaryOpKind::Not,
                operand: Box::new(operand),
            });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ParseFailure> {
        let left = self.or_expr()?;
        let mut ops = Vec::new();
        let mut comparators = Vec::new();
        loop {
            let op = match self.peek() {
                Tok::Op(Op::Lt) => CmpOp::Lt,
                Tok::Op(Op::Gt) => CmpOp::Gt,
                Tok::Op(Op::EqEq) => CmpOp::Eq,
                Tok::Op(Op::Le) => CmpOp::LtE,
                Tok::Op(Op::Ge) => CmpOp::GtE,
                Tok::Op(Op::NotEq) => CmpOp::NotEq,
                Tok::Kw(Kw::In) => CmpOp::In,
                Tok::Kw(Kw::Is) => {
                    self.bump();
                    let op = if self.eat_kw(Kw::Not) {
                        CmpOp::IsNot
                    } else {
                        CmpOp::Is
                    };
                    ops.push(op);
                    comparators.push(self.or_expr()?);
                    continue;
                }
                Tok::Kw(Kw::Not) if matches!(self.peek_at(1), Tok::Kw(Kw::In)) => {
                    self.bump();
                    self.bump();
                    ops.push(CmpOp::NotIn);
                    comparators.push(self.or_expr()?);
                    continue;
                }
                _ => break,
            };
            self.bump();
            ops.push(op);
            comparators.push(self.or_expr()?);
        }
        if ops.is_empty() {
            return Ok(left);
        }
        Ok(Expr::Compare {
            left: Box::new(left),
            ops,
            comparators,
        })
    }

    fn binop_chain(
        &mut self,
        next: fn(&mut Self) -> Result<Expr, ParseFailure>,
        match_op: fn(&Tok) -> Option<BinOp>,
    ) -> Result<Expr, ParseFailure> {
        let mut left = next(self)?;
        while let Some(op) = match_op(self.peek()) {
            self.bump();
            let right = next(self)?;
            left = Expr::BinOp {
                left: Box::new(left),
                op,
                right: Box::new(right),
            };
        }
        Ok(left)
    }

    /// `expr` in the grammar: the bitwise-or precedence level.
    fn or_expr(&mut self) -> Result<Expr, ParseFailure> {
        self.binop_chain(Self::xor_expr, |t| match t {
            Tok::Op(Op::Pipe) => Some(BinOp::BitOr),
            _ => None,
        })
    }

    fn xor_expr(&mut self) -> Result<Expr, ParseFailure> {
        self.binop_chain(Self::and_expr, |t| match t {
            Tok::Op(Op::Caret) => Some(BinOp::BitXor),
            _ => None,
        })
    }

    fn and_expr(&mut self) -> Result<Expr, ParseFailure> {
        self.binop_chain(Self::shift_expr, |t| match t {
            Tok::Op(Op::Amp) => Some(BinOp::BitAnd),
            _ => None,
        })
    }

    fn shift_expr(&mut self) -> Result<Expr, ParseFailure> {
        self.binop_chain(Self::arith_expr, |t| match t {
            Tok::Op(Op::LShift) => Some(BinOp::LShift),
            Tok::Op(Op::RShift) => Some(BinOp::RShift),
            _ => None,
        })
    }

    fn arith_expr(&mut self) -> Result<Expr, ParseFailure> {
        self.binop_chain(Self::term, |t| match t {
            Tok::Op(Op::Plus) => Some(BinOp::Add),
            Tok::Op(Op::Minus) => Some(BinOp::Sub),
            _ => None,
        })
    }

    fn term(&mut self) -> Result<Expr, ParseFailure> {
        self.binop_chain(Self::factor, |t| match t {
            Tok::Op(Op::Star) => Some(BinOp::Mult),
            Tok::Op(Op::Slash) => Some(BinOp::Div),
            Tok::Op(Op::Percent) => Some(BinOp::Mod),
            Tok::Op(Op::DoubleSlash) => Some(BinOp::FloorDiv),
            _ => None,
        })
    }

    fn factor(&mut self) -> Result<Expr, ParseFailure> {
        let op = match self.peek() {
            Tok::Op(Op::Plus) => Some(UnaryOpKind::UAdd),
            Tok::Op(Op::Minus) => Some(UnaryOpKind::USub),
            Tok::Op(Op::Tilde) => Some(UnaryOpKind::Invert),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let operand = self.factor()?;
            return Ok(Expr::UnaryOp {
                op,
                operand: Box::new(operand),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseFailure> {
        let base = self.atom_with_trailers()?;
        if self.eat_op(Op::DoubleStar) {
            let exp = self.factor()?;
            return Ok(Expr::BinOp {
                left: Box::new(base),
                op: BinOp::Pow,
                right: Box::new(exp),
            });
        }
        Ok(base)
    }

    fn atom_with_trailers(&mut self) -> Result<Expr, ParseFailure> {
        let mut e = self.atom()?;
        loop {
            if self.eat_op(Op::LParen) {
                let (args, keywords, star_args, kw_args) = self.call_args()?;
                e = Expr::Call {
                    func: Box::new(e),
                    args,
                    keywords,
                    star_args,
                    kw_args,
                };
            } else if self.eat_op(Op::LBracket) {
                let slice = self.subscriptlist()?;
                self.expect_op(Op::RBracket, "']'")?;
                e = Expr::Subscript {
                    value: Box::new(e),
                    slice: Box::new(slice),
                };
            } else if self.at_op(Op::Dot) {
                self.bump();
                let attr = self.expect_name()?;
                e = Expr::Attribute {
                    value: Box::new(e),
                    attr,
                };
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, ParseFailure> {
        match self.peek().clone() {
            Tok::Op(Op::LParen) => {
                self.bump();
                if self.eat_op(Op::RParen) {
                    return Ok(Expr::Tuple(Vec::new()));
                }
                if self.at_kw(Kw::Yield) {
                    let y = self.yield_expr()?;
                    self.expect_op(Op::RParen, "')'")?;
                    return Ok(y);
                }
                let first = self.test()?;
                if self.at_kw(Kw::For) {
                    let generators = self.comp_for()?;
                    self.expect_op(Op::RParen, "')'")?;
                    return Ok(Expr::GeneratorExp {
                        elt: Box::new(first),
                        generators,
                    });
                }
                if self.at_op(Op::Comma) {
                    let mut elts = vec![first];
                    while self.eat_op(Op::Comma) {
                        if !self.at_test_start() {
                            break;
                        }
                        elts.push(self.test()?);
                    }
                    self.expect_op(Op::RParen, "')'")?;
                    return Ok(Expr::Tuple(elts));
                }
                self.expect_op(Op::RParen, "')'")?;
                Ok(first)
            }
            Tok::Op(Op::LBracket) => {
                self.bump();
                if self.eat_op(Op::RBracket) {
                    return Ok(Expr::List(Vec::new()));
                }
                let first = self.test()?;
                if self.at_kw(Kw::For) {
                    let generators = self.list_for()?;
                    self.expect_op(Op::RBracket, "']'")?;
                    return Ok(Expr::ListComp {
                        elt: Box::new(first),
                        generators,
                    });
                }
                let mut elts = vec![first];
                while self.eat_op(Op::Comma) {
                    if !self.at_test_start() {
                        break;
                    }
                    elts.push(self.test()?);
                }
                self.expect_op(Op::RBracket, "']'")?;
                Ok(Expr::List(elts))
            }
            Tok::Op(Op::LBrace) => {
                self.bump();
                self.dict_or_set()
            }
            Tok::Op(Op::Backtick) => {
                self.bump();
                let mut elts = vec![self.test()?];
                while self.eat_op(Op::Comma) {
                    elts.push(self.test()?);
                }
                self.expect_op(Op::Backtick, "'`'")?;
                let value = if elts.len() == 1 {
                    elts.pop().unwrap()
                } else {
                    Expr::Tuple(elts)
                };
                Ok(Expr::Repr(Box::new(value)))
            }
            Tok::Name(_) => {
                let n = self.expect_name()?;
                Ok(Expr::Name(n))
            }
            Tok::Kw(Kw::Print) if self.future_print => {
                self.bump();
                Ok(Expr::Name("print".to_string()))
            }
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Num(Number::Int(v)))
            }
            Tok::Float(v) => {
                self.bump();
                Ok(Expr::Num(Number::Float(v)))
            }
            Tok::Imag(v) => {
                self.bump();
                Ok(Expr::Num(Number::Imaginary(v)))
            }
            Tok::Str(_) => {
                let mut pieces = Vec::new();
                while let Tok::Str(st) = self.peek() {
                    let st = st.clone();
                    self.bump();
                    let decoded = decode_string(&st, self.future_unicode)
                        .map_err(|reason| self.fail(reason))?;
                    pieces.push(decoded);
                }
                let merged = concat_strings(pieces).map_err(|reason| self.fail(reason))?;
                Ok(Expr::Str(merged))
            }
            _ => Err(self.fail("invalid syntax (unexpected token)")),
        }
    }

    fn dict_or_set(&mut self) -> Result<Expr, ParseFailure> {
        if self.eat_op(Op::RBrace) {
            return Ok(Expr::Dict {
                keys: Vec::new(),
                values: Vec::new(),
            });
        }
        let first = self.test()?;
        if self.eat_op(Op::Colon) {
            let first_value = self.test()?;
            if self.at_kw(Kw::For) {
                let generators = self.comp_for()?;
                self.expect_op(Op::RBrace, "'}'")?;
                return Ok(Expr::DictComp {
                    key: Box::new(first),
                    value: Box::new(first_value),
                    generators,
                });
            }
            let mut keys = vec![first];
            let mut values = vec![first_value];
            while self.eat_op(Op::Comma) {
                if self.at_op(Op::RBrace) {
                    break;
                }
                keys.push(self.test()?);
                self.expect_op(Op::Colon, "':'")?;
                values.push(self.test()?);
            }
            self.expect_op(Op::RBrace, "'}'")?;
            return Ok(Expr::Dict { keys, values });
        }
        if self.at_kw(Kw::For) {
            let generators = self.comp_for()?;
            self.expect_op(Op::RBrace, "'}'")?;
            return Ok(Expr::SetComp {
                elt: Box::new(first),
                generators,
            });
        }
        let mut elts = vec![first];
        while self.eat_op(Op::Comma) {
            if self.at_op(Op::RBrace) {
                break;
            }
            elts.push(self.test()?);
        }
        self.expect_op(Op::RBrace, "'}'")?;
        Ok(Expr::Set(elts))
    }

    fn yield_expr(&mut self) -> Result<Expr, ParseFailure> {
        self.bump(); // yield
        if self.at_test_start() {
            let v = self.testlist()?;
            Ok(Expr::Yield(Some(Box::new(v))))
        } else {
            Ok(Expr::Yield(None))
        }
    }

    /// Generator/set/dict comprehension clauses; iterables at `or_test`
    /// level.
    fn comp_for(&mut self) -> Result<Vec<Comprehension>, ParseFailure> {
        let mut generators = Vec::new();
        while self.eat_kw(Kw::For) {
            let target = self.exprlist_as_expr()?;
            self.check_target(&target, "assign")?;
            self.expect_kw(Kw::In, "'in'")?;
            let iter = self.or_test()?;
            let mut ifs = Vec::new();
            while self.eat_kw(Kw::If) {
                ifs.push(self.old_test()?);
            }
            generators.push(Comprehension { target, iter, ifs });
        }
        Ok(generators)
    }

    /// List comprehension clauses; the iterable is a `testlist_safe`, which
    /// unlike `comp_for` admits an unparenthesized tuple.
    fn list_for(&mut self) -> Result<Vec<Comprehension>, ParseFailure> {
        let mut generators = Vec::new();
        while self.eat_kw(Kw::For) {
            let target = self.exprlist_as_expr()?;
            self.check_target(&target, "assign")?;
            self.expect_kw(Kw::In, "'in'")?;
            let iter = self.testlist_safe()?;
            let mut ifs = Vec::new();
            while self.eat_kw(Kw::If) {
                ifs.push(self.old_test()?);
            }
            generators.push(Comprehension { target, iter, ifs });
        }
        Ok(generators)
    }

    fn testlist_safe(&mut self) -> Result<Expr, ParseFailure> {
        let first = self.old_test()?;
        if !self.at_op(Op::Comma) {
            return Ok(first);
        }
        let mut elts = vec![first];
        while self.eat_op(Op::Comma) {
            if !self.at_test_start() {
                break;
            }
            elts.push(self.old_test()?);
        }
        Ok(Expr::Tuple(elts))
    }

    // ------------------------------------------------------------------
    // call arguments and subscripts

    #[allow(clippy::type_complexity)]
    fn call_args(
        &mut self,
    ) -> Result<(Vec<Expr>, Vec<Keyword>, Option<Box<Expr>>, Option<Box<Expr>>), ParseFailure>
    {
        let mut args = Vec::new();
        let mut keywords: Vec<Keyword> = Vec::new();
        let mut star_args: Option<Box<Expr>> = None;
        let mut kw_args: Option<Box<Expr>> = None;
        loop {
            if self.at_op(Op::RParen) {
                break;
            }
            if self.eat_op(Op::Star) {
                if star_args.is_some() {
                    return Err(self.fail("more than one *expression in call"));
                }
                star_args = Some(Box::new(self.test()?));
            } else if self.eat_op(Op::DoubleStar) {
                if kw_args.is_some() {
                    return Err(self.fail("more than one **expression in call"));
                }
                kw_args = Some(Box::new(self.test()?));
            } else {
                if kw_args.is_some() {
                    return Err(self.fail("arguments may not follow **expression"));
                }
                let e = self.test()?;
                if self.at_op(Op::Assign) {
                    let name = match e {
                        Expr::Name(n) => n,
                        _ => return Err(self.fail("keyword can't be an expression")),
                    };
                    self.bump();
                    let value = self.test()?;
                    keywords.push(Keyword { name, value });
                } else if self.at_kw(Kw::For) {
                    if !args.is_empty()
                        || !keywords.is_empty()
                        || star_args.is_some()
                        || kw_args.is_some()
                    {
                        return Err(self.fail(
                            "generator expression must be parenthesized if not sole argument",
                        ));
                    }
                    let generators = self.comp_for()?;
                    if !self.at_op(Op::RParen) {
                        return Err(self.fail(
                            "generator expression must be parenthesized if not sole argument",
                        ));
                    }
                    args.push(Expr::GeneratorExp {
                        elt: Box::new(e),
                        generators,
                    });
                } else {
                    if !keywords.is_empty() {
                        return Err(self.fail("non-keyword arg after keyword arg"));
                    }
                    if star_args.is_some() {
                        return Err(self.fail("only named arguments may follow *expression"));
                    }
                    args.push(e);
                }
            }
            if !self.eat_op(Op::Comma) {
                break;
            }
        }
        self.expect_op(Op::RParen, "')'")?;
        Ok((args, keywords, star_args, kw_args))
    }

    fn subscriptlist(&mut self) -> Result<Slice, ParseFailure> {
        let mut dims = vec![self.subscript()?];
        let mut had_comma = false;
        while self.eat_op(Op::Comma) {
            had_comma = true;
            if self.at_op(Op::RBracket) {
                break;
            }
            dims.push(self.subscript()?);
        }
        if dims.len() == 1 && !had_comma {
            return Ok(dims.pop().unwrap());
        }
        if dims.iter().all(|d| matches!(d, Slice::Index(_))) {
            let elts = dims
                .into_iter()
                .map(|d| match d {
                    Slice::Index(e) => e,
                    _ => unreachable!(),
                })
                .collect();
            return Ok(Slice::Index(Expr::Tuple(elts)));
        }
        Ok(Slice::Extended(dims))
    }

    fn subscript(&mut self) -> Result<Slice, ParseFailure> {
        if self.at_op(Op::Dot) && matches!(self.peek_at(1), Tok::Op(Op::Dot)) {
            self.bump();
            self.bump();
            if !self.eat_op(Op::Dot) {
                return Err(self.fail("expected '...' in subscript"));
            }
            return Ok(Slice::Ellipsis);
        }
        let lower = if self.at_op(Op::Colon) {
            None
        } else {
            Some(self.test()?)
        };
        if !self.eat_op(Op::Colon) {
            return Ok(Slice::Index(lower.unwrap()));
        }
        let upper = if self.at_op(Op::Colon) || self.at_op(Op::RBracket) || self.at_op(Op::Comma) {
            None
        } else {
            Some(self.test()?)
        };
        let step = if self.eat_op(Op::Colon) {
            if self.at_op(Op::RBracket) || self.at_op(Op::Comma) {
                None
            } else {
                Some(self.test()?)
            }
        } else {
            None
        };
        Ok(Slice::Range { lower, upper, step })
    }
}

fn dotted_to_expr(dotted: &str) -> Expr {
    let mut parts = dotted.split('.');
    let mut e = Expr::Name(parts.next().unwrap().to_string());
    for part in parts {
        e = Expr::Attribute {
            value: Box::new(e),
            attr: part.to_string(),
        };
    }
    e
}
