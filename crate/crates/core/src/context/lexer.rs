use super::ast::Pos;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(String),
    Float(String),
    Str(String),
    Char(String),
    /// Cleaned text of a `/** ... */` comment.
    Javadoc(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

// Longest first so that maximal munch works with a linear scan.
const PUNCTS: &[&str] = &[
    "+=", "-=", "*=", "/=", "%=", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "{", "}", "(",
    ")", "[", "]", ";", ",", ".", "=", "<", ">", "+", "-", "*", "/", "%", "!", "?", ":", "&", "|",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia()?;
        let pos = lx.pos();
        let Some(c) = lx.peek(0) else {
            out.push(Token { tok: Tok::Eof, pos });
            return Ok(out);
        };
        let tok = if c == '/'
            && lx.peek(1) == Some('*')
            && lx.peek(2) == Some('*')
            && lx.peek(3) != Some('/')
        {
            lx.javadoc(pos)?
        } else if c.is_alphabetic() || c == '_' || c == '$' {
            let s = lx.take_while(|c| c.is_alphanumeric() || c == '_' || c == '$');
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            lx.number()
        } else if c == '"' {
            Tok::Str(lx.quoted('"', pos)?)
        } else if c == '\'' {
            Tok::Char(lx.quoted('\'', pos)?)
        } else {
            let p = PUNCTS
                .iter()
                .find(|p| p.chars().enumerate().all(|(k, pc)| lx.peek(k) == Some(pc)))
                .ok_or_else(|| {
                    Error::parse(pos.line, pos.col, format!("unexpected character `{c}`"))
                })?;
            for _ in 0..p.len() {
                lx.bump();
            }
            Tok::Punct(p)
        };
        out.push(Token { tok, pos });
    }
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek(0).filter(|&c| f(c)) {
            s.push(c);
            self.bump();
        }
        s
    }

    fn skip_trivia(&mut self) -> Result<()> {
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while self.peek(0).is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                // Plain block comments; `/**` starts a javadoc token unless it is `/**/`.
                (Some('/'), Some('*'))
                    if self.peek(2) != Some('*') || self.peek(3) == Some('/') =>
                {
                    let start = self.pos();
                    self.bump();
                    self.bump();
                    self.block_comment_end(start)?;
                }
                _ => return Ok(()),
            }
        }
    }

    fn block_comment_end(&mut self, start: Pos) -> Result<String> {
        let mut body = String::new();
        loop {
            match self.bump() {
                None => return Err(Error::parse(start.line, start.col, "unterminated comment")),
                Some('*') if self.peek(0) == Some('/') => {
                    self.bump();
                    return Ok(body);
                }
                Some(c) => body.push(c),
            }
        }
    }

    fn javadoc(&mut self, start: Pos) -> Result<Tok> {
        for _ in 0..3 {
            self.bump();
        }
        let raw = self.block_comment_end(start)?;
        let lines: Vec<&str> = raw
            .lines()
            .map(|l| {
                let t = l.trim();
                t.strip_prefix('*').map(str::trim).unwrap_or(t)
            })
            .filter(|l| !l.is_empty())
            .collect();
        Ok(Tok::Javadoc(lines.join("\n")))
    }

    fn number(&mut self) -> Tok {
        let mut s = self.take_while(|c| c.is_ascii_digit());
        let mut float = false;
        if self.peek(0) == Some('.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            s.push('.');
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
            float = true;
        }
        if let Some(c) = self
            .peek(0)
            .filter(|c| matches!(c, 'L' | 'l' | 'f' | 'F' | 'd' | 'D'))
        {
            self.bump();
            s.push(c);
            float |= matches!(c, 'f' | 'F' | 'd' | 'D');
        }
        if float {
            Tok::Float(s)
        } else {
            Tok::Int(s)
        }
    }

    /// Returns the literal body with escapes kept verbatim.
    fn quoted(&mut self, q: char, start: Pos) -> Result<String> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(Error::parse(start.line, start.col, "unterminated literal"))
                }
                Some('\\') => {
                    s.push('\\');
                    match self.bump() {
                        Some(c) => s.push(c),
                        None => {
                            return Err(Error::parse(start.line, start.col, "unterminated literal"))
                        }
                    }
                }
                Some(c) if c == q => return Ok(s),
                Some(c) => s.push(c),
            }
        }
    }
}
