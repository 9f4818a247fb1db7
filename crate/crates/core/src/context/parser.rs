//! Recursive-descent parser for MJ.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::error::{Error, Result};

pub const HOLE: &str = "__CODE_SEARCH__";

const MODIFIERS: &[&str] = &[
    "public",
    "private",
    "protected",
    "static",
    "final",
    "abstract",
    "synchronized",
    "transient",
    "volatile",
    "native",
];

const RESERVED: &[&str] = &[
    "class", "if", "else", "while", "try", "catch", "return", "new", "this", "null", "true",
    "false", "throws", "extends", "import", "package",
];

const BINARY_LEVELS: &[&[&str]] = &[
    &["||"],
    &["&&"],
    &["==", "!="],
    &["<", ">", "<=", ">="],
    &["+", "-"],
    &["*", "/", "%"],
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%="];

/// Parses a whole source file into its classes. `import` and `package`
/// lines are accepted and discarded.
pub fn parse_source(text: &str) -> Result<Vec<ClassUnit>> {
    let mut p = Parser::new(text)?;
    let mut classes = Vec::new();
    while !p.at_eof() {
        if p.eat_ident("import") || p.eat_ident("package") {
            while !p.eat_punct(";") {
                if p.at_eof() {
                    return Err(p.error("expected `;`"));
                }
                p.i += 1;
            }
            continue;
        }
        classes.push(p.class()?);
    }
    Ok(classes)
}

/// Parses a single method declaration, optionally preceded by javadoc.
pub fn parse_method(text: &str) -> Result<MethodAst> {
    let mut p = Parser::new(text)?;
    let javadoc = p.javadoc();
    let modifiers = p.modifiers();
    let pos = p.pos();
    let ret = p.type_or_hole()?;
    let name = p.name_or_hole()?;
    let m = p.method_rest(javadoc, modifiers, ret, name, pos)?;
    if !p.at_eof() {
        return Err(p.error("trailing input after method"));
    }
    Ok(m)
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Self {
            toks: tokenize(text)?,
            i: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn error(&self, msg: &str) -> Error {
        let pos = self.pos();
        let found = match self.peek() {
            Tok::Ident(s) | Tok::Int(s) | Tok::Float(s) => format!("`{s}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Char(_) => "char literal".into(),
            Tok::Javadoc(_) => "javadoc comment".into(),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".into(),
        };
        Error::parse(pos.line, pos.col, format!("{msg}, found {found}"))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{p}`")))
        }
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(q) if q == s)
    }

    fn eat_ident(&mut self, s: &str) -> bool {
        if self.is_ident(s) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) && s != HOLE => {
                let s = s.clone();
                self.i += 1;
                Ok(s)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    fn javadoc(&mut self) -> Option<String> {
        let mut doc = None;
        while let Tok::Javadoc(s) = self.peek() {
            doc = Some(s.clone());
            self.i += 1;
        }
        doc
    }

    fn modifiers(&mut self) -> Vec<String> {
        let mut out = Vec::new();
        while let Tok::Ident(s) = self.peek() {
            if !MODIFIERS.contains(&s.as_str()) {
                break;
            }
            out.push(s.clone());
            self.i += 1;
        }
        out
    }

    /// `Name(.Name)*([])*`, or `None` without consuming anything.
    fn try_type(&mut self) -> Option<String> {
        let start = self.i;
        let mut s = match self.ident() {
            Ok(s) => s,
            Err(_) => return None,
        };
        while self.is_punct(".") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.i += 1;
            match self.ident() {
                Ok(part) => {
                    s.push('.');
                    s.push_str(&part);
                }
                Err(_) => {
                    self.i = start;
                    return None;
                }
            }
        }
        while self.is_punct("[") && matches!(self.peek_at(1), Tok::Punct("]")) {
            self.i += 2;
            s.push_str("[]");
        }
        Some(s)
    }

    fn ty(&mut self) -> Result<String> {
        self.try_type().ok_or_else(|| self.error("expected type"))
    }

    fn type_or_hole(&mut self) -> Result<Option<String>> {
        if self.eat_punct("?") {
            Ok(None)
        } else {
            self.ty().map(Some)
        }
    }

    fn name_or_hole(&mut self) -> Result<Option<String>> {
        if self.eat_punct("?") {
            Ok(None)
        } else {
            self.ident().map(Some)
        }
    }

    fn class(&mut self) -> Result<ClassUnit> {
        let javadoc = self.javadoc();
        let modifiers = self.modifiers();
        let pos = self.pos();
        if !self.eat_ident("class") {
            return Err(self.error("expected `class`"));
        }
        let name = self.ident()?;
        let extends = if self.eat_ident("extends") {
            Some(self.ty()?)
        } else {
            None
        };
        self.expect_punct("{")?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        while !self.eat_punct("}") {
            if self.at_eof() {
                return Err(self.error(&format!("expected `}}` closing class `{name}`")));
            }
            let doc = self.javadoc();
            if self.eat_punct("}") {
                break;
            }
            let mods = self.modifiers();
            let mpos = self.pos();
            let ret = self.type_or_hole()?;
            let mname = self.name_or_hole()?;
            if self.is_punct("(") {
                methods.push(self.method_rest(doc, mods, ret, mname, mpos)?);
            } else {
                let (Some(ty), Some(fname)) = (ret, mname) else {
                    return Err(Error::parse(
                        mpos.line,
                        mpos.col,
                        "field declarations need a type and a name",
                    ));
                };
                let init = if self.eat_punct("=") {
                    Some(self.expr()?)
                } else {
                    None
                };
                self.expect_punct(";")?;
                fields.push(Field {
                    modifiers: mods,
                    ty,
                    name: fname,
                    init,
                });
            }
        }
        Ok(ClassUnit {
            javadoc,
            modifiers,
            name,
            extends,
            fields,
            methods,
            pos,
        })
    }

    fn method_rest(
        &mut self,
        javadoc: Option<String>,
        modifiers: Vec<String>,
        return_type: Option<String>,
        name: Option<String>,
        pos: Pos,
    ) -> Result<MethodAst> {
        self.expect_punct("(")?;
        let mut formals = Vec::new();
        if !self.eat_punct(")") {
            loop {
                let is_final = self.eat_ident("final");
                let ty = self.type_or_hole()?;
                let pname = self.name_or_hole()?;
                formals.push(Param {
                    is_final,
                    ty,
                    name: pname,
                });
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        let mut throws = Vec::new();
        if self.eat_ident("throws") {
            loop {
                throws.push(self.ty()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct("{")?;
        let body = if self.is_ident(HOLE) {
            self.i += 1;
            self.eat_punct(";");
            if !self.eat_punct("}") {
                return Err(self.error(&format!(
                    "`{HOLE}` must be the only statement in a method body"
                )));
            }
            MethodBody::Hole
        } else {
            MethodBody::Block(self.block_rest()?)
        };
        Ok(MethodAst {
            javadoc,
            modifiers,
            return_type,
            name,
            formals,
            throws,
            body,
            pos,
        })
    }

    /// Statements up to and including the closing `}`.
    fn block_rest(&mut self) -> Result<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            if self.eat_punct("}") {
                return Ok(out);
            }
            if self.at_eof() {
                return Err(self.error("expected `}`"));
            }
            if self.is_ident(HOLE) {
                return Err(self.error(&format!(
                    "`{HOLE}` must be the only statement in a method body"
                )));
            }
            if self.eat_punct(";") {
                continue;
            }
            out.push(self.stmt()?);
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>> {
        self.expect_punct("{")?;
        self.block_rest()
    }

    /// A block, or a single statement standing in for one.
    fn branch(&mut self) -> Result<Vec<Stmt>> {
        if self.eat_punct("{") {
            self.block_rest()
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn paren_expr(&mut self) -> Result<Expr> {
        self.expect_punct("(")?;
        let e = self.expr()?;
        self.expect_punct(")")?;
        Ok(e)
    }

    fn stmt(&mut self) -> Result<Stmt> {
        if self.eat_punct("{") {
            return Ok(Stmt::Block(self.block_rest()?));
        }
        if self.eat_ident("if") {
            let cond = self.paren_expr()?;
            let then_branch = self.branch()?;
            let else_branch = if self.eat_ident("else") {
                Some(self.branch()?)
            } else {
                None
            };
            return Ok(Stmt::If {
                cond,
                then_branch,
                else_branch,
            });
        }
        if self.eat_ident("while") {
            let cond = self.paren_expr()?;
            let body = self.branch()?;
            return Ok(Stmt::While { cond, body });
        }
        if self.eat_ident("try") {
            let body = self.block()?;
            let mut catches = Vec::new();
            while self.eat_ident("catch") {
                self.expect_punct("(")?;
                let ty = self.ty()?;
                let name = self.ident()?;
                self.expect_punct(")")?;
                catches.push(CatchBlock {
                    ty,
                    name,
                    body: self.block()?,
                });
            }
            if catches.is_empty() {
                return Err(self.error("expected `catch`"));
            }
            return Ok(Stmt::Try { body, catches });
        }
        if self.eat_ident("return") {
            let value = if self.is_punct(";") {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect_punct(";")?;
            return Ok(Stmt::Return(value));
        }
        let start = self.i;
        if let Some(ty) = self.try_type() {
            if let Tok::Ident(_) = self.peek() {
                if matches!(self.peek_at(1), Tok::Punct("=") | Tok::Punct(";")) {
                    let name = self.ident()?;
                    let init = if self.eat_punct("=") {
                        Some(self.expr()?)
                    } else {
                        None
                    };
                    self.expect_punct(";")?;
                    return Ok(Stmt::Decl { ty, name, init });
                }
            }
            self.i = start;
        }
        let e = self.expr()?;
        self.expect_punct(";")?;
        Ok(Stmt::Expr(e))
    }

    fn expr(&mut self) -> Result<Expr> {
        let lhs = self.binary(0)?;
        if let Tok::Punct(op) = self.peek() {
            if ASSIGN_OPS.contains(op) {
                let op = op.to_string();
                if !matches!(lhs, Expr::Name(_) | Expr::Field { .. }) {
                    return Err(self.error("invalid assignment target"));
                }
                self.i += 1;
                let value = self.expr()?;
                return Ok(Expr::Assign {
                    op,
                    target: Box::new(lhs),
                    value: Box::new(value),
                });
            }
        }
        Ok(lhs)
    }

    fn binary(&mut self, level: usize) -> Result<Expr> {
        if level == BINARY_LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        while let Tok::Punct(op) = self.peek() {
            if !BINARY_LEVELS[level].contains(op) {
                break;
            }
            let op = op.to_string();
            self.i += 1;
            let rhs = self.binary(level + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        for op in ["!", "-", "+", "++", "--"] {
            if self.eat_punct(op) {
                return Ok(Expr::Unary {
                    op: op.into(),
                    operand: Box::new(self.unary()?),
                });
            }
        }
        self.postfix()
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if self.eat_punct(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_punct(")") {
                return Ok(args);
            }
            self.expect_punct(",")?;
        }
    }

    fn postfix(&mut self) -> Result<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.eat_punct(".") {
                let name = self.ident()?;
                e = if self.is_punct("(") {
                    Expr::Call {
                        target: Some(Box::new(e)),
                        name,
                        args: self.args()?,
                    }
                } else {
                    Expr::Field {
                        target: Box::new(e),
                        name,
                    }
                };
            } else if self.is_punct("++") || self.is_punct("--") {
                let Tok::Punct(op) = self.peek() else {
                    unreachable!()
                };
                let op = op.to_string();
                self.i += 1;
                e = Expr::Postfix {
                    op,
                    operand: Box::new(e),
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let tok = self.peek().clone();
        let lit = |l| Ok(Expr::Literal(l));
        match tok {
            Tok::Int(s) => {
                self.i += 1;
                lit(Literal::Int(s))
            }
            Tok::Float(s) => {
                self.i += 1;
                lit(Literal::Float(s))
            }
            Tok::Str(s) => {
                self.i += 1;
                lit(Literal::Str(s))
            }
            Tok::Char(s) => {
                self.i += 1;
                lit(Literal::Char(s))
            }
            Tok::Punct("(") => {
                self.i += 1;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(Expr::Paren(Box::new(e)))
            }
            Tok::Ident(s) => match s.as_str() {
                "this" => {
                    self.i += 1;
                    Ok(Expr::This)
                }
                "null" => {
                    self.i += 1;
                    lit(Literal::Null)
                }
                "true" | "false" => {
                    self.i += 1;
                    lit(Literal::Bool(s == "true"))
                }
                "new" => {
                    self.i += 1;
                    let ty = self.ty()?;
                    let args = self.args()?;
                    Ok(Expr::New { ty, args })
                }
                _ => {
                    let name = self.ident()?;
                    if self.is_punct("(") {
                        Ok(Expr::Call {
                            target: None,
                            name,
                            args: self.args()?,
                        })
                    } else {
                        Ok(Expr::Name(name))
                    }
                }
            },
            _ => Err(self.error("expected expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_class() {
        let cs = parse_source("class A {}").unwrap();
        assert_eq!(cs.len(), 1);
        assert!(cs[0].methods.is_empty());
    }

    #[test]
    fn unbalanced_brace_reports_line() {
        let err = parse_source("class A {\n  void f() {\n    x();\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = parse_source("class A {\n  void f() {\n    x();\n  }}\n}\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");
    }

    #[test]
    fn hole_must_be_alone() {
        assert!(parse_source("class A { void f() { __CODE_SEARCH__ } }").is_ok());
        assert!(parse_source("class A { void f() { __CODE_SEARCH__; } }").is_ok());
        assert!(parse_source("class A { void f() { x(); __CODE_SEARCH__; } }").is_err());
    }

    #[test]
    fn declarations_vs_expressions() {
        let m = parse_method("void f(byte[] b) { int[] a = g(); x = 1; a.b.c(); java.io.File f; }")
            .unwrap();
        let MethodBody::Block(stmts) = &m.body else {
            panic!()
        };
        assert!(matches!(&stmts[0], Stmt::Decl { ty, .. } if ty == "int[]"));
        assert!(matches!(&stmts[1], Stmt::Expr(Expr::Assign { .. })));
        assert!(matches!(&stmts[2], Stmt::Expr(Expr::Call { .. })));
        assert!(matches!(&stmts[3], Stmt::Decl { ty, .. } if ty == "java.io.File"));
        assert_eq!(m.formals[0].ty.as_deref(), Some("byte[]"));
    }

    #[test]
    fn placeholders() {
        let m = parse_method("public JFrame ?(? a) { __CODE_SEARCH__; }").unwrap();
        assert_eq!(m.return_type.as_deref(), Some("JFrame"));
        assert_eq!(m.name, None);
        assert_eq!(m.formals[0].ty, None);
        assert_eq!(m.formals[0].name.as_deref(), Some("a"));
        assert!(m.is_hole());
    }
}
