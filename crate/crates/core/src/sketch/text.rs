//! Line-oriented text form of sketches.
//!
//! One statement per line, two spaces of indentation per nesting level:
//!
//! ```text
//! ret void
//! fp (File)
//! FileReader.FileReader (File)
//! BufferedReader.BufferedReader (FileReader)
//! while
//!   BufferedReader.readLine ()
//! do
//!   skip
//! ```

use super::{CallExpr, CatchClause, SketchAst, SketchStmt};
use crate::error::{Error, Result};

const INDENT: &str = "  ";

pub fn serialize_sketch(s: &SketchAst) -> String {
    let mut out = String::new();
    out.push_str("ret ");
    out.push_str(&s.ret_type);
    out.push('\n');
    out.push_str("fp (");
    out.push_str(&s.formal_param_types.join(", "));
    out.push_str(")\n");
    write_stmt(&s.body, 0, &mut out);
    out
}

/// Only the body lines, as in a decompilation listing.
pub fn serialize_body(body: &SketchStmt) -> String {
    let mut out = String::new();
    write_stmt(body, 0, &mut out);
    out
}

fn line(depth: usize, text: &str, out: &mut String) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push_str(text);
    out.push('\n');
}

fn write_stmt(s: &SketchStmt, depth: usize, out: &mut String) {
    match s {
        SketchStmt::Skip => line(depth, "skip", out),
        SketchStmt::Call(c) => line(depth, &c.to_string(), out),
        SketchStmt::Seq(items) => items.iter().for_each(|i| write_stmt(i, depth, out)),
        SketchStmt::If {
            cond,
            then_branch,
            else_branch,
        } => {
            line(depth, "if", out);
            cond.iter()
                .for_each(|c| line(depth + 1, &c.to_string(), out));
            line(depth, "then", out);
            write_stmt(then_branch, depth + 1, out);
            line(depth, "else", out);
            write_stmt(else_branch, depth + 1, out);
        }
        SketchStmt::While { cond, body } => {
            line(depth, "while", out);
            cond.iter()
                .for_each(|c| line(depth + 1, &c.to_string(), out));
            line(depth, "do", out);
            write_stmt(body, depth + 1, out);
        }
        SketchStmt::Try { body, catches } => {
            line(depth, "try", out);
            write_stmt(body, depth + 1, out);
            for c in catches {
                line(depth, &format!("catch ({})", c.exception_type), out);
                write_stmt(&c.body, depth + 1, out);
            }
        }
    }
}

struct Line<'a> {
    number: usize,
    depth: usize,
    text: &'a str,
}

struct Parser<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    last_line: usize,
}

pub fn parse_sketch(text: &str) -> Result<SketchAst> {
    let mut p = Parser::new(text)?;
    let ret = p.expect_header("ret ")?;
    let ret_type = ret.trim().to_string();
    if ret_type.is_empty() {
        return Err(Error::parse(p.last_line, 5, "empty return type"));
    }
    let fp = p.expect_header("fp ")?;
    let formal_param_types = parse_type_list(fp.trim(), p.last_line, 4)?;
    let body = p.block(0)?;
    if let Some(l) = p.peek() {
        return Err(Error::parse(
            l.number,
            l.depth * 2 + 1,
            format!("unexpected line `{}`", l.text),
        ));
    }
    Ok(SketchAst {
        ret_type,
        formal_param_types,
        body,
    })
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self> {
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let number = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let stripped = raw.trim_start_matches(' ');
            let spaces = raw.len() - stripped.len();
            if stripped.starts_with('\t') {
                return Err(Error::parse(
                    number,
                    spaces + 1,
                    "tabs are not allowed for indentation",
                ));
            }
            if spaces % INDENT.len() != 0 {
                return Err(Error::parse(
                    number,
                    1,
                    "indentation must be a multiple of two spaces",
                ));
            }
            lines.push(Line {
                number,
                depth: spaces / INDENT.len(),
                text: stripped.trim_end(),
            });
        }
        Ok(Self {
            lines,
            pos: 0,
            last_line: 1,
        })
    }

    fn peek(&self) -> Option<&Line<'a>> {
        self.lines.get(self.pos)
    }

    fn next(&mut self) -> Option<&Line<'a>> {
        let l = self.lines.get(self.pos)?;
        self.pos += 1;
        self.last_line = l.number;
        Some(l)
    }

    fn expect_header(&mut self, prefix: &str) -> Result<&'a str> {
        let last = self.last_line;
        let l = self
            .next()
            .ok_or_else(|| Error::parse(last, 1, format!("missing `{}` header", prefix.trim())))?;
        if l.depth != 0 {
            return Err(Error::parse(
                l.number,
                1,
                "header lines must not be indented",
            ));
        }
        l.text.strip_prefix(prefix).ok_or_else(|| {
            Error::parse(l.number, 1, format!("expected `{}` header", prefix.trim()))
        })
    }

    fn expect_keyword(&mut self, depth: usize, kw: &str) -> Result<()> {
        let last = self.last_line;
        match self.next() {
            Some(l) if l.depth == depth && l.text == kw => Ok(()),
            Some(l) => Err(Error::parse(
                l.number,
                l.depth * 2 + 1,
                format!("expected `{kw}`, found `{}`", l.text),
            )),
            None => Err(Error::parse(
                last + 1,
                1,
                format!("expected `{kw}`, found end of input"),
            )),
        }
    }

    /// Statements at exactly `depth` until a dedent or a clause keyword.
    fn block(&mut self, depth: usize) -> Result<SketchStmt> {
        let mut items = Vec::new();
        while let Some(l) = self.peek() {
            if l.depth < depth || (l.depth == depth && is_clause_keyword(l.text)) {
                break;
            }
            if l.depth > depth {
                return Err(Error::parse(l.number, 1, "unexpected indentation"));
            }
            items.push(self.statement(depth)?);
        }
        if items.is_empty() {
            let (number, col) = self
                .peek()
                .map(|l| (l.number, l.depth * 2 + 1))
                .unwrap_or((self.last_line + 1, 1));
            return Err(Error::parse(
                number,
                col,
                "expected at least one statement (use `skip` for an empty block)",
            ));
        }
        Ok(SketchStmt::seq(items))
    }

    fn conditions(&mut self, depth: usize) -> Result<Vec<CallExpr>> {
        let mut cond = Vec::new();
        while let Some(l) = self.peek() {
            if l.depth != depth + 1 {
                break;
            }
            let (number, text) = (l.number, l.text);
            self.next();
            cond.push(parse_call(text, number, (depth + 1) * 2 + 1)?);
        }
        Ok(cond)
    }

    fn statement(&mut self, depth: usize) -> Result<SketchStmt> {
        let l = self.next().expect("caller peeked");
        let (number, text) = (l.number, l.text);
        match text {
            "skip" => Ok(SketchStmt::Skip),
            "if" => {
                let cond = self.conditions(depth)?;
                self.expect_keyword(depth, "then")?;
                let then_branch = self.block(depth + 1)?;
                self.expect_keyword(depth, "else")?;
                let else_branch = self.block(depth + 1)?;
                Ok(SketchStmt::If {
                    cond,
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                })
            }
            "while" => {
                let cond = self.conditions(depth)?;
                self.expect_keyword(depth, "do")?;
                let body = self.block(depth + 1)?;
                Ok(SketchStmt::While {
                    cond,
                    body: Box::new(body),
                })
            }
            "try" => {
                let body = self.block(depth + 1)?;
                let mut catches = Vec::new();
                while let Some(l) = self.peek() {
                    if l.depth != depth || !l.text.starts_with("catch") {
                        break;
                    }
                    let (cnum, ctext) = (l.number, l.text);
                    self.next();
                    let ty = ctext
                        .strip_prefix("catch")
                        .map(str::trim)
                        .and_then(|r| r.strip_prefix('('))
                        .and_then(|r| r.strip_suffix(')'))
                        .map(str::trim)
                        .filter(|t| !t.is_empty())
                        .ok_or_else(|| {
                            Error::parse(
                                cnum,
                                depth * 2 + 1,
                                "malformed catch clause, expected `catch (Type)`",
                            )
                        })?;
                    let cbody = self.block(depth + 1)?;
                    catches.push(CatchClause {
                        exception_type: ty.to_string(),
                        body: cbody,
                    });
                }
                Ok(SketchStmt::Try {
                    body: Box::new(body),
                    catches,
                })
            }
            _ => Ok(SketchStmt::Call(parse_call(text, number, depth * 2 + 1)?)),
        }
    }
}

fn is_clause_keyword(text: &str) -> bool {
    matches!(text, "then" | "else" | "do")
        || text.starts_with("catch ")
        || text.starts_with("catch(")
}

fn parse_type_list(text: &str, line: usize, col: usize) -> Result<Vec<String>> {
    let inner = text
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::parse(line, col, "expected a parenthesized type list"))?
        .trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|t| {
            let t = t.trim();
            if t.is_empty() || t.contains(char::is_whitespace) {
                Err(Error::parse(line, col, format!("invalid type `{t}`")))
            } else {
                Ok(t.to_string())
            }
        })
        .collect()
}

fn parse_call(text: &str, line: usize, col: usize) -> Result<CallExpr> {
    let open = text.find('(').ok_or_else(|| {
        Error::parse(
            line,
            col,
            format!("expected a call `Type.method (args)`, found `{text}`"),
        )
    })?;
    let head = text[..open].trim();
    let dot = head
        .rfind('.')
        .ok_or_else(|| Error::parse(line, col, format!("call `{head}` has no receiver type")))?;
    let (recv, name) = (&head[..dot], &head[dot + 1..]);
    if recv.is_empty()
        || name.is_empty()
        || recv.contains(char::is_whitespace)
        || name.contains(char::is_whitespace)
    {
        return Err(Error::parse(
            line,
            col,
            format!("malformed call head `{head}`"),
        ));
    }
    let args = parse_type_list(text[open..].trim(), line, col + open)?;
    Ok(CallExpr::new(recv, name, args))
}
