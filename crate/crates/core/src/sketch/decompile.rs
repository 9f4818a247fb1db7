//! Method body → sketch abstraction.

use std::collections::HashMap;

use super::{CallExpr, CatchClause, SketchAst, SketchStmt, UNKNOWN_TYPE};
use crate::context::ast::{ClassUnit, Expr, Literal, MethodAst, MethodBody, Stmt};

/// Abstracts a method to its sketch: API calls (in evaluation order), their
/// types, and control shape. Variables, literals and arithmetic are dropped.
///
/// `class` supplies field types and the receiver type of unqualified calls;
/// without it both fall back to [`UNKNOWN_TYPE`].
pub fn decompile(method: &MethodAst, class: Option<&ClassUnit>) -> SketchAst {
    let mut env = Env {
        vars: HashMap::new(),
        this_type: class.map_or(UNKNOWN_TYPE, |c| c.name.as_str()).to_string(),
    };
    if let Some(c) = class {
        for f in &c.fields {
            env.vars.insert(f.name.clone(), f.ty.clone());
        }
    }
    for p in &method.formals {
        if let Some(name) = &p.name {
            env.vars.insert(
                name.clone(),
                p.ty.clone().unwrap_or_else(|| UNKNOWN_TYPE.into()),
            );
        }
    }
    let body = match &method.body {
        MethodBody::Hole => SketchStmt::Skip,
        MethodBody::Block(stmts) => env.block(stmts),
    };
    SketchAst {
        ret_type: method
            .return_type
            .clone()
            .unwrap_or_else(|| UNKNOWN_TYPE.into()),
        formal_param_types: method
            .formals
            .iter()
            .map(|p| p.ty.clone().unwrap_or_else(|| UNKNOWN_TYPE.into()))
            .collect(),
        body,
    }
}

struct Env {
    vars: HashMap<String, String>,
    this_type: String,
}

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

impl Env {
    fn block(&mut self, stmts: &[Stmt]) -> SketchStmt {
        SketchStmt::seq(stmts.iter().map(|s| self.stmt(s)).collect::<Vec<_>>())
    }

    fn calls_of(&mut self, e: &Expr) -> Vec<CallExpr> {
        let mut out = Vec::new();
        self.expr(e, &mut out);
        out
    }

    fn as_seq(calls: Vec<CallExpr>) -> SketchStmt {
        SketchStmt::seq(calls.into_iter().map(SketchStmt::Call))
    }

    fn stmt(&mut self, s: &Stmt) -> SketchStmt {
        match s {
            Stmt::Decl { ty, name, init } => {
                let calls = init.as_ref().map(|e| self.calls_of(e)).unwrap_or_default();
                self.vars.insert(name.clone(), ty.clone());
                Self::as_seq(calls)
            }
            Stmt::Expr(e) => {
                let calls = self.calls_of(e);
                Self::as_seq(calls)
            }
            Stmt::Return(e) => {
                let calls = e.as_ref().map(|e| self.calls_of(e)).unwrap_or_default();
                Self::as_seq(calls)
            }
            Stmt::Block(b) => self.block(b),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => SketchStmt::If {
                cond: self.calls_of(cond),
                then_branch: Box::new(self.block(then_branch)),
                else_branch: Box::new(
                    else_branch
                        .as_ref()
                        .map_or(SketchStmt::Skip, |b| self.block(b)),
                ),
            },
            Stmt::While { cond, body } => SketchStmt::While {
                cond: self.calls_of(cond),
                body: Box::new(self.block(body)),
            },
            Stmt::Try { body, catches } => {
                let body = self.block(body);
                let catches = catches
                    .iter()
                    .map(|c| {
                        self.vars.insert(c.name.clone(), c.ty.clone());
                        CatchClause {
                            exception_type: c.ty.clone(),
                            body: self.block(&c.body),
                        }
                    })
                    .collect();
                SketchStmt::Try {
                    body: Box::new(body),
                    catches,
                }
            }
        }
    }

    /// Appends the calls made while evaluating `e` and returns its static type.
    fn expr(&mut self, e: &Expr, out: &mut Vec<CallExpr>) -> String {
        match e {
            Expr::Name(n) => match self.vars.get(n) {
                Some(t) => t.clone(),
                None if starts_upper(n) => n.clone(),
                None => UNKNOWN_TYPE.into(),
            },
            Expr::This => self.this_type.clone(),
            Expr::Literal(l) => match l {
                Literal::Int(s) if s.ends_with(['l', 'L']) => "long".into(),
                Literal::Int(_) => "int".into(),
                Literal::Float(s) if s.ends_with(['f', 'F']) => "float".into(),
                Literal::Float(_) => "double".into(),
                Literal::Str(_) => "String".into(),
                Literal::Char(_) => "char".into(),
                Literal::Bool(_) => "boolean".into(),
                Literal::Null => UNKNOWN_TYPE.into(),
            },
            Expr::Call { target, name, args } => {
                let recv = match target {
                    Some(t) => self.expr(t, out),
                    None => self.this_type.clone(),
                };
                let arg_types = args.iter().map(|a| self.expr(a, out)).collect();
                out.push(CallExpr::new(recv, name.clone(), arg_types));
                UNKNOWN_TYPE.into()
            }
            Expr::New { ty, args } => {
                let arg_types = args.iter().map(|a| self.expr(a, out)).collect();
                let simple = ty.rsplit('.').next().unwrap_or(ty);
                out.push(CallExpr::new(ty.clone(), simple, arg_types));
                ty.clone()
            }
            Expr::Field { target, .. } => {
                self.expr(target, out);
                UNKNOWN_TYPE.into()
            }
            Expr::Assign { target, value, .. } => {
                self.expr(value, out);
                self.expr(target, out)
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.expr(lhs, out);
                let r = self.expr(rhs, out);
                match op.as_str() {
                    "==" | "!=" | "<" | ">" | "<=" | ">=" | "&&" | "||" => "boolean".into(),
                    "+" if l == "String" || r == "String" => "String".into(),
                    _ => l,
                }
            }
            Expr::Unary { op, operand } => {
                let t = self.expr(operand, out);
                if op == "!" {
                    "boolean".into()
                } else {
                    t
                }
            }
            Expr::Postfix { operand, .. } => self.expr(operand, out),
            Expr::Paren(inner) => self.expr(inner, out),
        }
    }
}
