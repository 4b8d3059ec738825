//! Syntax tree for Python 2.7 modules.
//!
//! The tree is the unit of structural comparison for round-trip checks, so
//! equality deliberately ignores provenance: statement line numbers and the
//! module's source path do not participate in `==`.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use num_bigint::BigUint;

/// A parsed module: the statement list plus where it came from.
#[derive(Debug, Clone)]
pub struct Module {
    pub body: Vec<Stmt>,
    pub source_path: String,
}

impl PartialEq for Module {
    fn eq(&self, other: &Self) -> bool {
        self.body == other.body
    }
}
impl Eq for Module {}

/// A statement together with the 1-based line of its first token in the
/// original source. The line is provenance, not structure.
#[derive(Debug, Clone)]
pub struct Stmt {
    pub line: u32,
    pub kind: StmtKind,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}
impl Eq for Stmt {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    FunctionDef {
        name: String,
        params: Params,
        body: Vec<Stmt>,
        decorators: Vec<Expr>,
    },
    ClassDef {
        name: String,
        bases: Vec<Expr>,
        body: Vec<Stmt>,
        decorators: Vec<Expr>,
    },
    Return(Option<Expr>),
    Delete(Vec<Expr>),
    Assign {
        targets: Vec<Expr>,
        value: Expr,
    },
    AugAssign {
        target: Expr,
        op: BinOp,
        value: Expr,
    },
    /// The Python 2 `print` statement; `dest` is the `>>stream` form and
    /// `newline` is false when the statement ends with a trailing comma.
    Print {
        dest: Option<Expr>,
        values: Vec<Expr>,
        newline: bool,
    },
    For {
        target: Expr,
        iter: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    While {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    If {
        test: Expr,
        body: Vec<Stmt>,
        orelse: Vec<Stmt>,
    },
    /// One `with` item; `with a, b:` parses as nested `With` statements.
    With {
        context: Expr,
        target: Option<Expr>,
        body: Vec<Stmt>,
    },
    Raise {
        typ: Option<Expr>,
        inst: Option<Expr>,
        tback: Option<Expr>,
    },
    TryExcept {
        body: Vec<Stmt>,
        handlers: Vec<ExceptHandler>,
        orelse: Vec<Stmt>,
    },
    /// `try/finally`; a `try/except/finally` nests a `TryExcept` as the
    /// sole body statement.
    TryFinally {
        body: Vec<Stmt>,
        finalbody: Vec<Stmt>,
    },
    Assert {
        test: Expr,
        msg: Option<Expr>,
    },
    Import(Vec<Alias>),
    ImportFrom {
        module: Option<String>,
        names: ImportNames,
        level: u32,
    },
    Exec {
        body: Expr,
        globals: Option<Expr>,
        locals: Option<Expr>,
    },
    Global(Vec<String>),
    Expr(Expr),
    Pass,
    Break,
    Continue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImportNames {
    Star,
    Names(Vec<Alias>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alias {
    pub name: String,
    pub asname: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ExceptHandler {
    pub line: u32,
    pub typ: Option<Expr>,
    pub name: Option<Expr>,
    pub body: Vec<Stmt>,
}

impl PartialEq for ExceptHandler {
    fn eq(&self, other: &Self) -> bool {
        self.typ == other.typ && self.name == other.name && self.body == other.body
    }
}
impl Eq for ExceptHandler {}

/// Formal parameter list of a `def` or `lambda`. `defaults` aligns with the
/// trailing elements of `args`, as in the CPython AST.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Params {
    pub args: Vec<Param>,
    pub defaults: Vec<Expr>,
    pub vararg: Option<String>,
    pub kwarg: Option<String>,
}

impl Params {
    pub fn is_empty(&self) -> bool {
        self.args.is_empty() && self.vararg.is_none() && self.kwarg.is_none()
    }
}

/// A single formal parameter: a name or a Python 2 tuple pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Param {
    Name(String),
    Tuple(Vec<Param>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    BoolOp {
        op: BoolOpKind,
        values: Vec<Expr>,
    },
    BinOp {
        left: Box<Expr>,
        op: BinOp,
        right: Box<Expr>,
    },
    UnaryOp {
        op: UnaryOpKind,
        operand: Box<Expr>,
    },
    Lambda {
        params: Box<Params>,
        body: Box<Expr>,
    },
    IfExp {
        test: Box<Expr>,
        body: Box<Expr>,
        orelse: Box<Expr>,
    },
    Dict {
        keys: Vec<Expr>,
        values: Vec<Expr>,
    },
    Set(Vec<Expr>),
    ListComp {
        elt: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    SetComp {
        elt: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    DictComp {
        key: Box<Expr>,
        value: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    GeneratorExp {
        elt: Box<Expr>,
        generators: Vec<Comprehension>,
    },
    Yield(Option<Box<Expr>>),
    Compare {
        left: Box<Expr>,
        ops: Vec<CmpOp>,
        comparators: Vec<Expr>,
    },
    Call {
        func: Box<Expr>,
        args: Vec<Expr>,
        keywords: Vec<Keyword>,
        star_args: Option<Box<Expr>>,
        kw_args: Option<Box<Expr>>,
    },
    /// Backtick repr expression.
    Repr(Box<Expr>),
    Num(Number),
    Str(PyString),
    Attribute {
        value: Box<Expr>,
        attr: String,
    },
    Subscript {
        value: Box<Expr>,
        slice: Box<Slice>,
    },
    Name(String),
    List(Vec<Expr>),
    Tuple(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keyword {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comprehension {
    pub target: Expr,
    pub iter: Expr,
    pub ifs: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slice {
    Index(Expr),
    Range {
        lower: Option<Expr>,
        upper: Option<Expr>,
        step: Option<Expr>,
    },
    Ellipsis,
    /// Multi-dimensional subscript where at least one dimension is a range
    /// or ellipsis; dimensions are never themselves `Extended`.
    Extended(Vec<Slice>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOpKind {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mult,
    Div,
    Mod,
    Pow,
    LShift,
    RShift,
    BitOr,
    BitXor,
    BitAnd,
    FloorDiv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOpKind {
    Invert,
    Not,
    UAdd,
    USub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    NotEq,
    Lt,
    LtE,
    Gt,
    GtE,
    Is,
    IsNot,
    In,
    NotIn,
}

/// Normalized numeric literal value. Integers are arbitrary precision with
/// the int/long distinction erased; floats and imaginaries are IEEE doubles.
#[derive(Debug, Clone)]
pub enum Number {
    Int(BigUint),
    Float(f64),
    Imaginary(f64),
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a == b,
            // bit comparison: literals never produce NaN or negative zero
            (Number::Float(a), Number::Float(b)) => a.to_bits() == b.to_bits(),
            (Number::Imaginary(a), Number::Imaginary(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}
impl Eq for Number {}

/// String literal value. Plain (byte) strings hold the decoded byte
/// sequence; unicode strings hold code points, which unlike `char` may
/// include lone surrogates written with `\u` escapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PyString {
    Bytes(Vec<u8>),
    Unicode(Vec<u32>),
}

impl PyString {
    /// Best-effort text view, for docstring extraction. Byte strings are
    /// decoded as UTF-8 and unicode code points as chars; anything invalid
    /// becomes U+FFFD.
    pub fn to_text(&self) -> String {
        match self {
            PyString::Bytes(b) => {
                let mut out = String::new();
                let mut rest = &b[..];
                while !rest.is_empty() {
                    match core::str::from_utf8(rest) {
                        Ok(s) => {
                            out.push_str(s);
                            break;
                        }
                        Err(e) => {
                            let (valid, after) = rest.split_at(e.valid_up_to());
                            out.push_str(core::str::from_utf8(valid).unwrap());
                            out.push('\u{FFFD}');
                            let skip = e.error_len().unwrap_or(after.len());
                            rest = &after[skip..];
                        }
                    }
                }
                out
            }
            PyString::Unicode(cps) => cps
                .iter()
                .map(|&cp| char::from_u32(cp).unwrap_or('\u{FFFD}'))
                .collect(),
        }
    }
}
