//! Splitting modules into function records: declaration, optional
//! docstring, and canonicalized body, with repository provenance.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::pyparse::ast::*;
use crate::pyparse::{unparse_function_decl, unparse_stmt, Line};

/// Where a file sits inside the scanned tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub owner: String,
    pub repo: String,
    pub rel_path: String,
}

/// One extracted top-level function. `decl_lines` are the canonical
/// declaration lines (decorators plus the `def` header, all at depth 0);
/// `body_lines` are the canonical body after docstring removal, at depth
/// >= 1 relative to the header. `line` is the 1-based line of the `def`
/// keyword in the original file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionRecord {
    pub owner: String,
    pub repo: String,
    pub rel_path: String,
    pub line: u32,
    pub decl_lines: Vec<Line>,
    pub docstring_raw: Option<String>,
    pub body_lines: Vec<Line>,
}

/// Result of extracting one module.
#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub records: Vec<FunctionRecord>,
    /// Functions skipped because the module enables the print-function
    /// future and the body refers to `print` as a name; such bodies do not
    /// re-parse outside their module, so they cannot be serialized
    /// reversibly.
    pub skipped_print_name: usize,
}

/// Extract every module-level function, in file order. Nested functions
/// stay inside their enclosing function's body; class bodies are not
/// descended into.
pub fn extract_functions(module: &Module, provenance: &Provenance) -> Extraction {
    let future_print = module.body.iter().any(|s| {
        matches!(
            &s.kind,
            StmtKind::ImportFrom { module: Some(m), names: ImportNames::Names(ns), level: 0 }
                if m == "__future__" && ns.iter().any(|a| a.name == "print_function")
        )
    });
    let mut out = Extraction::default();
    for stmt in &module.body {
        let StmtKind::FunctionDef {
            name,
            params,
            body,
            decorators,
        } = &stmt.kind
        else {
            continue;
        };
        if future_print && fn_uses_print(body, decorators) {
            out.skipped_print_name += 1;
            continue;
        }
        let (docstring_raw, rest) = split_docstring(body);
        let mut body_lines = Vec::new();
        for s in rest {
            body_lines.extend(unparse_stmt(s, 1));
        }
        if body_lines.is_empty() {
            // docstring-only function: keep the body parseable
            body_lines = vec![Line::new(1, "pass")];
        }
        out.records.push(FunctionRecord {
            owner: provenance.owner.clone(),
            repo: provenance.repo.clone(),
            rel_path: provenance.rel_path.clone(),
            line: stmt.line,
            decl_lines: unparse_function_decl(name, params, decorators),
            docstring_raw,
            body_lines,
        });
    }
    out
}

/// Split off a leading string-literal statement as the docstring.
fn split_docstring(body: &[Stmt]) -> (Option<String>, &[Stmt]) {
    if let Some(first) = body.first() {
        if let StmtKind::Expr(Expr::Str(s)) = &first.kind {
            return (Some(s.to_text()), &body[1..]);
        }
    }
    (None, body)
}

fn fn_uses_print(body: &[Stmt], decorators: &[Expr]) -> bool {
    decorators.iter().any(expr_uses_print) || body.iter().any(stmt_uses_print)
}

fn stmt_uses_print(s: &Stmt) -> bool {
    let exprs: Vec<&Expr> = match &s.kind {
        StmtKind::FunctionDef {
            params, decorators, ..
        } => {
            let mut v: Vec<&Expr> = params.defaults.iter().collect();
            v.extend(decorators);
            v
        }
        StmtKind::ClassDef {
            bases, decorators, ..
        } => bases.iter().chain(decorators).collect(),
        StmtKind::Return(v) => v.iter().collect(),
        StmtKind::Delete(ts) => ts.iter().collect(),
        StmtKind::Assign { targets, value } => {
            let mut v: Vec<&Expr> = targets.iter().collect();
            v.push(value);
            v
        }
        StmtKind::AugAssign { target, value, .. } => vec![target, value],
        StmtKind::Print { dest, values, .. } => dest.iter().chain(values).collect(),
        StmtKind::For { target, iter, .. } => vec![target, iter],
        StmtKind::While { test, .. } => vec![test],
        StmtKind::If { test, .. } => vec![test],
        StmtKind::With {
            context, target, ..
        } => {
            let mut v = vec![context];
            v.extend(target.iter());
            v
        }
        StmtKind::Raise { typ, inst, tback } => typ.iter().chain(inst).chain(tback).collect(),
        StmtKind::Assert { test, msg } => {
            let mut v = vec![test];
            v.extend(msg.iter());
            v
        }
        StmtKind::Exec {
            body,
            globals,
            locals,
        } => {
            let mut v = vec![body];
            v.extend(globals.iter());
            v.extend(locals.iter());
            v
        }
        StmtKind::Expr(e) => vec![e],
        StmtKind::TryExcept { handlers, .. } => handlers
            .iter()
            .flat_map(|h| h.typ.iter().chain(h.name.iter()))
            .collect(),
        _ => Vec::new(),
    };
    if exprs.into_iter().any(expr_uses_print) {
        return true;
    }
    // recurse into nested statement blocks
    let blocks: Vec<&[Stmt]> = match &s.kind {
        StmtKind::FunctionDef { body, .. } | StmtKind::ClassDef { body, .. } => vec![body],
        StmtKind::For { body, orelse, .. }
        | StmtKind::While { body, orelse, .. }
        | StmtKind::If { body, orelse, .. } => vec![body, orelse],
        StmtKind::With { body, .. } => vec![body],
        StmtKind::TryExcept {
            body,
            handlers,
            orelse,
        } => {
            let mut v = vec![&body[..], &orelse[..]];
            v.extend(handlers.iter().map(|h| &h.body[..]));
            v
        }
        StmtKind::TryFinally { body, finalbody } => vec![body, finalbody],
        _ => Vec::new(),
    };
    blocks
        .into_iter()
        .any(|b| b.iter().any(stmt_uses_print))
}

fn expr_uses_print(e: &Expr) -> bool {
    match e {
        Expr::Name(n) => n == "print",
        Expr::BoolOp { values, .. } => values.iter().any(expr_uses_print),
        Expr::BinOp { left, right, .. } => expr_uses_print(left) || expr_uses_print(right),
        Expr::UnaryOp { operand, .. } => expr_uses_print(operand),
        Expr::Lambda { params, body } => {
            params.defaults.iter().any(expr_uses_print) || expr_uses_print(body)
        }
        Expr::IfExp { test, body, orelse } => {
            expr_uses_print(test) || expr_uses_print(body) || expr_uses_print(orelse)
        }
        Expr::Dict { keys, values } => {
            keys.iter().any(expr_uses_print) || values.iter().any(expr_uses_print)
        }
        Expr::Set(elts) | Expr::List(elts) | Expr::Tuple(elts) => {
            elts.iter().any(expr_uses_print)
        }
        Expr::ListComp { elt, generators }
        | Expr::SetComp { elt, generators }
        | Expr::GeneratorExp { elt, generators } => {
            expr_uses_print(elt) || comps_use_print(generators)
        }
        Expr::DictComp {
            key,
            value,
            generators,
        } => expr_uses_print(key) || expr_uses_print(value) || comps_use_print(generators),
        Expr::Yield(v) => v.as_deref().map(expr_uses_print).unwrap_or(false),
        Expr::Compare {
            left, comparators, ..
        } => expr_uses_print(left) || comparators.iter().any(expr_uses_print),
        Expr::Call {
            func,
            args,
            keywords,
            star_args,
            kw_args,
        } => {
            expr_uses_print(func)
                || args.iter().any(expr_uses_print)
                || keywords.iter().any(|k| expr_uses_print(&k.value))
                || star_args.as_deref().map(expr_uses_print).unwrap_or(false)
                || kw_args.as_deref().map(expr_uses_print).unwrap_or(false)
        }
        Expr::Repr(v) => expr_uses_print(v),
        Expr::Attribute { value, .. } => expr_uses_print(value),
        Expr::Subscript { value, slice } => expr_uses_print(value) || slice_uses_print(slice),
        Expr::Num(_) | Expr::Str(_) => false,
    }
}

fn comps_use_print(generators: &[Comprehension]) -> bool {
    generators.iter().any(|g| {
        expr_uses_print(&g.target) || expr_uses_print(&g.iter) || g.ifs.iter().any(expr_uses_print)
    })
}

fn slice_uses_print(s: &Slice) -> bool {
    match s {
        Slice::Index(e) => expr_uses_print(e),
        Slice::Range { lower, upper, step } => lower
            .iter()
            .chain(upper.iter())
            .chain(step.iter())
            .any(expr_uses_print),
        Slice::Ellipsis => false,
        Slice::Extended(dims) => dims.iter().any(slice_uses_print),
    }
}
