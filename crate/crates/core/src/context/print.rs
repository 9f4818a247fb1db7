//! Canonical pretty-printer for MJ. Output re-parses to the same tree.

use std::fmt::Write;

use super::ast::*;
use super::parser::HOLE;

const INDENT: &str = "  ";

pub fn print_source(classes: &[ClassUnit]) -> String {
    let mut out = String::new();
    for (i, c) in classes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_class_into(c, &mut out);
    }
    out
}

pub fn print_class(c: &ClassUnit) -> String {
    let mut out = String::new();
    print_class_into(c, &mut out);
    out
}

/// A method at top level, javadoc included.
pub fn print_method(m: &MethodAst) -> String {
    let mut out = String::new();
    method(m, 0, &mut out);
    out
}

fn pad(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn javadoc(doc: &Option<String>, depth: usize, out: &mut String) {
    let Some(doc) = doc else { return };
    pad(depth, out);
    out.push_str("/**\n");
    for l in doc.lines() {
        pad(depth, out);
        out.push_str(" * ");
        out.push_str(l);
        out.push('\n');
    }
    pad(depth, out);
    out.push_str(" */\n");
}

fn modifiers(mods: &[String], out: &mut String) {
    for m in mods {
        out.push_str(m);
        out.push(' ');
    }
}

fn opt(s: &Option<String>) -> &str {
    s.as_deref().unwrap_or("?")
}

fn print_class_into(c: &ClassUnit, out: &mut String) {
    javadoc(&c.javadoc, 0, out);
    modifiers(&c.modifiers, out);
    let _ = write!(out, "class {}", c.name);
    if let Some(e) = &c.extends {
        let _ = write!(out, " extends {e}");
    }
    out.push_str(" {\n");
    for f in &c.fields {
        pad(1, out);
        modifiers(&f.modifiers, out);
        let _ = write!(out, "{} {}", f.ty, f.name);
        if let Some(init) = &f.init {
            out.push_str(" = ");
            expr(init, out);
        }
        out.push_str(";\n");
    }
    for (i, m) in c.methods.iter().enumerate() {
        if i > 0 || !c.fields.is_empty() {
            out.push('\n');
        }
        method(m, 1, out);
    }
    out.push_str("}\n");
}

fn method(m: &MethodAst, depth: usize, out: &mut String) {
    javadoc(&m.javadoc, depth, out);
    pad(depth, out);
    modifiers(&m.modifiers, out);
    let _ = write!(out, "{} {}(", opt(&m.return_type), opt(&m.name));
    for (i, p) in m.formals.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if p.is_final {
            out.push_str("final ");
        }
        let _ = write!(out, "{} {}", opt(&p.ty), opt(&p.name));
    }
    out.push(')');
    if !m.throws.is_empty() {
        let _ = write!(out, " throws {}", m.throws.join(", "));
    }
    match &m.body {
        MethodBody::Hole => {
            out.push_str(" {\n");
            pad(depth + 1, out);
            out.push_str(HOLE);
            out.push_str(";\n");
            pad(depth, out);
            out.push_str("}\n");
        }
        MethodBody::Block(stmts) => {
            out.push(' ');
            block(stmts, depth, out);
            out.push('\n');
        }
    }
}

/// `{ ... }` with the closing brace at `depth`, no trailing newline.
fn block(stmts: &[Stmt], depth: usize, out: &mut String) {
    out.push_str("{\n");
    for s in stmts {
        stmt(s, depth + 1, out);
    }
    pad(depth, out);
    out.push('}');
}

fn stmt(s: &Stmt, depth: usize, out: &mut String) {
    pad(depth, out);
    match s {
        Stmt::Decl { ty, name, init } => {
            let _ = write!(out, "{ty} {name}");
            if let Some(e) = init {
                out.push_str(" = ");
                expr(e, out);
            }
            out.push(';');
        }
        Stmt::Expr(e) => {
            expr(e, out);
            out.push(';');
        }
        Stmt::Return(e) => {
            out.push_str("return");
            if let Some(e) = e {
                out.push(' ');
                expr(e, out);
            }
            out.push(';');
        }
        Stmt::Block(b) => block(b, depth, out),
        Stmt::If {
            cond,
            then_branch,
            else_branch,
        } => if_chain(cond, then_branch, else_branch, depth, out),
        Stmt::While { cond, body } => {
            out.push_str("while (");
            expr(cond, out);
            out.push_str(") ");
            block(body, depth, out);
        }
        Stmt::Try { body, catches } => {
            out.push_str("try ");
            block(body, depth, out);
            for c in catches {
                let _ = write!(out, " catch ({} {}) ", c.ty, c.name);
                block(&c.body, depth, out);
            }
        }
    }
    out.push('\n');
}

fn if_chain(
    cond: &Expr,
    then_branch: &[Stmt],
    else_branch: &Option<Vec<Stmt>>,
    depth: usize,
    out: &mut String,
) {
    out.push_str("if (");
    expr(cond, out);
    out.push_str(") ");
    block(then_branch, depth, out);
    match else_branch.as_deref() {
        None => {}
        Some(
            [Stmt::If {
                cond,
                then_branch,
                else_branch,
            }],
        ) => {
            out.push_str(" else ");
            if_chain(cond, then_branch, else_branch, depth, out);
        }
        Some(b) => {
            out.push_str(" else ");
            block(b, depth, out);
        }
    }
}

pub(crate) fn expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Name(n) => out.push_str(n),
        Expr::This => out.push_str("this"),
        Expr::Literal(l) => match l {
            Literal::Int(s) | Literal::Float(s) => out.push_str(s),
            Literal::Str(s) => {
                let _ = write!(out, "\"{s}\"");
            }
            Literal::Char(s) => {
                let _ = write!(out, "'{s}'");
            }
            Literal::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Literal::Null => out.push_str("null"),
        },
        Expr::Call { target, name, args } => {
            if let Some(t) = target {
                expr(t, out);
                out.push('.');
            }
            out.push_str(name);
            arg_list(args, out);
        }
        Expr::New { ty, args } => {
            let _ = write!(out, "new {ty}");
            arg_list(args, out);
        }
        Expr::Field { target, name } => {
            expr(target, out);
            out.push('.');
            out.push_str(name);
        }
        Expr::Assign { op, target, value } => {
            expr(target, out);
            let _ = write!(out, " {op} ");
            expr(value, out);
        }
        Expr::Binary { op, lhs, rhs } => {
            expr(lhs, out);
            let _ = write!(out, " {op} ");
            expr(rhs, out);
        }
        Expr::Unary { op, operand } => {
            out.push_str(op);
            // Keep `- -x` from lexing as `--x`.
            if matches!(**operand, Expr::Unary { .. }) {
                out.push(' ');
            }
            expr(operand, out);
        }
        Expr::Postfix { op, operand } => {
            expr(operand, out);
            out.push_str(op);
        }
        Expr::Paren(inner) => {
            out.push('(');
            expr(inner, out);
            out.push(')');
        }
    }
}

fn arg_list(args: &[Expr], out: &mut String) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        expr(a, out);
    }
    out.push(')');
}
