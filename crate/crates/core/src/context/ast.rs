//! Syntax tree for the MJ corpus language.

use serde::{Deserialize, Serialize};

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub struct ClassUnit {
    pub javadoc: Option<String>,
    pub modifiers: Vec<String>,
    pub name: String,
    pub extends: Option<String>,
    pub fields: Vec<Field>,
    pub methods: Vec<MethodAst>,
    pub pos: Pos,
}

/// Equality ignores source positions.
impl PartialEq for ClassUnit {
    fn eq(&self, o: &Self) -> bool {
        self.javadoc == o.javadoc
            && self.modifiers == o.modifiers
            && self.name == o.name
            && self.extends == o.extends
            && self.fields == o.fields
            && self.methods == o.methods
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub modifiers: Vec<String>,
    pub ty: String,
    pub name: String,
    pub init: Option<Expr>,
}

/// A formal parameter. `None` stands for the `?` placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub is_final: bool,
    pub ty: Option<String>,
    pub name: Option<String>,
}

#[derive(Debug, Clone)]
pub struct MethodAst {
    pub javadoc: Option<String>,
    pub modifiers: Vec<String>,
    pub return_type: Option<String>,
    pub name: Option<String>,
    pub formals: Vec<Param>,
    pub throws: Vec<String>,
    pub body: MethodBody,
    pub pos: Pos,
}

/// Equality ignores source positions.
impl PartialEq for MethodAst {
    fn eq(&self, o: &Self) -> bool {
        self.javadoc == o.javadoc
            && self.modifiers == o.modifiers
            && self.return_type == o.return_type
            && self.name == o.name
            && self.formals == o.formals
            && self.throws == o.throws
            && self.body == o.body
    }
}

impl MethodAst {
    pub fn is_hole(&self) -> bool {
        matches!(self.body, MethodBody::Hole)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodBody {
    /// The `__CODE_SEARCH__` marker.
    Hole,
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatchBlock {
    pub ty: String,
    pub name: String,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Decl {
        ty: String,
        name: String,
        init: Option<Expr>,
    },
    Expr(Expr),
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Option<Vec<Stmt>>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Try {
        body: Vec<Stmt>,
        catches: Vec<CatchBlock>,
    },
    Return(Option<Expr>),
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Int(String),
    Float(String),
    Str(String),
    Char(String),
    Bool(bool),
    Null,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Name(String),
    This,
    Literal(Literal),
    /// `target.name(args)`, or an unqualified `name(args)`.
    Call {
        target: Option<Box<Expr>>,
        name: String,
        args: Vec<Expr>,
    },
    New {
        ty: String,
        args: Vec<Expr>,
    },
    Field {
        target: Box<Expr>,
        name: String,
    },
    Assign {
        op: String,
        target: Box<Expr>,
        value: Box<Expr>,
    },
    Binary {
        op: String,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        op: String,
        operand: Box<Expr>,
    },
    Postfix {
        op: String,
        operand: Box<Expr>,
    },
    Paren(Box<Expr>),
}
