//! Evidence extraction from a class around a target method.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{ClassUnit, Expr, MethodBody, Stmt};
use crate::error::{Error, Result};
use crate::sketch::{
    api_calls, decompile, extract_api_sequences, CallExpr, DEFAULT_SEQUENCE_LIMIT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceType {
    ClassName,
    ClassTypes,
    SurroundingReturnTypes,
    SurroundingFormals,
    SurroundingApiSequences,
    SurroundingMethodNames,
    MethodName,
    Javadoc,
    ApiCalls,
    ApiSequences,
    ReturnType,
    FormalParams,
    Types,
    Keywords,
}

impl EvidenceType {
    pub const COUNT: usize = 14;

    pub const ALL: [EvidenceType; Self::COUNT] = [
        EvidenceType::ClassName,
        EvidenceType::ClassTypes,
        EvidenceType::SurroundingReturnTypes,
        EvidenceType::SurroundingFormals,
        EvidenceType::SurroundingApiSequences,
        EvidenceType::SurroundingMethodNames,
        EvidenceType::MethodName,
        EvidenceType::Javadoc,
        EvidenceType::ApiCalls,
        EvidenceType::ApiSequences,
        EvidenceType::ReturnType,
        EvidenceType::FormalParams,
        EvidenceType::Types,
        EvidenceType::Keywords,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        match self {
            EvidenceType::ClassName => "class_name",
            EvidenceType::ClassTypes => "class_types",
            EvidenceType::SurroundingReturnTypes => "surrounding_return_types",
            EvidenceType::SurroundingFormals => "surrounding_formals",
            EvidenceType::SurroundingApiSequences => "surrounding_api_sequences",
            EvidenceType::SurroundingMethodNames => "surrounding_method_names",
            EvidenceType::MethodName => "method_name",
            EvidenceType::Javadoc => "javadoc",
            EvidenceType::ApiCalls => "api_calls",
            EvidenceType::ApiSequences => "api_sequences",
            EvidenceType::ReturnType => "return_type",
            EvidenceType::FormalParams => "formal_params",
            EvidenceType::Types => "types",
            EvidenceType::Keywords => "keywords",
        }
    }

    /// Types read from the target method's body; empty when the body is a hole.
    pub fn is_body_derived(self) -> bool {
        matches!(
            self,
            EvidenceType::ApiCalls
                | EvidenceType::ApiSequences
                | EvidenceType::Types
                | EvidenceType::Keywords
        )
    }
}

impl fmt::Display for EvidenceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Evidence instances grouped by type. Every type is always present (possibly
/// with no instances) and no instance is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    from = "BTreeMap<EvidenceType, Vec<Vec<String>>>",
    into = "BTreeMap<EvidenceType, Vec<Vec<String>>>"
)]
pub struct ContextBundle {
    evidences: [Vec<Vec<String>>; EvidenceType::COUNT],
}

impl Default for ContextBundle {
    fn default() -> Self {
        Self {
            evidences: std::array::from_fn(|_| Vec::new()),
        }
    }
}

impl From<BTreeMap<EvidenceType, Vec<Vec<String>>>> for ContextBundle {
    fn from(map: BTreeMap<EvidenceType, Vec<Vec<String>>>) -> Self {
        let mut b = ContextBundle::default();
        for (ty, instances) in map {
            for inst in instances {
                b.push(ty, inst);
            }
        }
        b
    }
}

impl From<ContextBundle> for BTreeMap<EvidenceType, Vec<Vec<String>>> {
    fn from(b: ContextBundle) -> Self {
        EvidenceType::ALL.into_iter().zip(b.evidences).collect()
    }
}

impl ContextBundle {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one instance. Empty tokens are removed and an instance left with
    /// no tokens is dropped.
    pub fn push(&mut self, ty: EvidenceType, instance: Vec<String>) {
        let inst: Vec<String> = instance.into_iter().filter(|t| !t.is_empty()).collect();
        if !inst.is_empty() {
            self.evidences[ty.index()].push(inst);
        }
    }

    pub fn get(&self, ty: EvidenceType) -> &[Vec<String>] {
        &self.evidences[ty.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (EvidenceType, &[Vec<String>])> {
        EvidenceType::ALL
            .into_iter()
            .zip(self.evidences.iter().map(Vec::as_slice))
    }

    pub fn instance_count(&self) -> usize {
        self.evidences.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.instance_count() == 0
    }
}

/// Splits an identifier at lower→upper and letter↔digit boundaries, at
/// underscores and other separators, and before the last capital of an
/// acronym run (`HTTPServer` → `http server`). Output is lowercased.
pub fn split_camel_case(ident: &str) -> Vec<String> {
    let chars: Vec<char> = ident.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphanumeric() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            continue;
        }
        if let Some(&p) = cur.chars().last().as_ref() {
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            let boundary = (p.is_lowercase() && c.is_uppercase())
                || (p.is_ascii_digit() != c.is_ascii_digit())
                || (p.is_uppercase() && c.is_uppercase() && next_lower);
            if boundary {
                out.push(std::mem::take(&mut cur));
            }
        }
        cur.push(c);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out.into_iter().map(|s| s.to_lowercase()).collect()
}

/// Words of a javadoc comment, lowercased, with `@tag` words removed.
pub fn javadoc_tokens(doc: &str) -> Vec<String> {
    doc.split_whitespace()
        .filter(|w| !w.starts_with('@'))
        .flat_map(|w| w.split(|c: char| !c.is_alphanumeric()))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Index of the single method whose body is the search hole.
pub fn find_hole(unit: &ClassUnit) -> Result<usize> {
    let holes: Vec<usize> = unit
        .methods
        .iter()
        .enumerate()
        .filter(|(_, m)| m.is_hole())
        .map(|(i, _)| i)
        .collect();
    match holes.as_slice() {
        [i] => Ok(*i),
        _ => Err(Error::AmbiguousQuery(holes.len())),
    }
}

fn call_tokens(seq: &[CallExpr]) -> Vec<String> {
    seq.iter().map(CallExpr::token).collect()
}

fn formal_instance(ty: &Option<String>, name: &Option<String>) -> Vec<String> {
    let mut inst: Vec<String> = ty.iter().cloned().collect();
    if let Some(n) = name {
        inst.extend(split_camel_case(n));
    }
    inst
}

/// Builds the evidence bundle for `unit.methods[target]`. Other methods of the
/// class contribute the surrounding-method evidence. If the target body is a
/// hole, the body-derived types stay empty.
pub fn extract_context(unit: &ClassUnit, target: usize) -> Result<ContextBundle> {
    let m = unit.methods.get(target).ok_or(Error::TargetOutOfRange {
        index: target,
        len: unit.methods.len(),
    })?;
    let mut b = ContextBundle::new();
    b.push(EvidenceType::ClassName, split_camel_case(&unit.name));
    for f in &unit.fields {
        b.push(EvidenceType::ClassTypes, vec![f.ty.clone()]);
    }
    for (i, other) in unit.methods.iter().enumerate() {
        if i == target {
            continue;
        }
        if let Some(rt) = &other.return_type {
            b.push(EvidenceType::SurroundingReturnTypes, vec![rt.clone()]);
        }
        for p in &other.formals {
            b.push(
                EvidenceType::SurroundingFormals,
                formal_instance(&p.ty, &p.name),
            );
        }
        if !other.is_hole() {
            let sk = decompile(other, Some(unit));
            for seq in extract_api_sequences(&sk, DEFAULT_SEQUENCE_LIMIT) {
                b.push(EvidenceType::SurroundingApiSequences, call_tokens(&seq));
            }
        }
        if let Some(n) = &other.name {
            b.push(EvidenceType::SurroundingMethodNames, split_camel_case(n));
        }
    }

    if let Some(n) = &m.name {
        b.push(EvidenceType::MethodName, split_camel_case(n));
    }
    if let Some(doc) = &m.javadoc {
        b.push(EvidenceType::Javadoc, javadoc_tokens(doc));
    }
    if let MethodBody::Block(stmts) = &m.body {
        let sk = decompile(m, Some(unit));
        b.push(
            EvidenceType::ApiCalls,
            api_calls(&sk).iter().map(CallExpr::token).collect(),
        );
        for seq in extract_api_sequences(&sk, DEFAULT_SEQUENCE_LIMIT) {
            b.push(EvidenceType::ApiSequences, call_tokens(&seq));
        }
        let mut kw = BodyWords::default();
        kw.stmts(stmts);
        b.push(EvidenceType::Types, kw.types.into_iter().collect());
        b.push(EvidenceType::Keywords, kw.keywords);
    }
    if let Some(rt) = &m.return_type {
        b.push(EvidenceType::ReturnType, vec![rt.clone()]);
    }
    for p in &m.formals {
        b.push(EvidenceType::FormalParams, formal_instance(&p.ty, &p.name));
    }
    Ok(b)
}

/// Evidence as a query would see it: the target body is treated as a hole.
pub fn extract_query_context(unit: &ClassUnit, target: usize) -> Result<ContextBundle> {
    let m = unit.methods.get(target).ok_or(Error::TargetOutOfRange {
        index: target,
        len: unit.methods.len(),
    })?;
    if m.is_hole() {
        return extract_context(unit, target);
    }
    let mut masked = unit.clone();
    masked.methods[target].body = MethodBody::Hole;
    extract_context(&masked, target)
}

/// Types and non-call identifiers of a method body.
#[derive(Default)]
struct BodyWords {
    types: BTreeSet<String>,
    keywords: Vec<String>,
    seen: BTreeSet<String>,
}

impl BodyWords {
    fn word(&mut self, ident: &str) {
        for w in split_camel_case(ident) {
            if self.seen.insert(w.clone()) {
                self.keywords.push(w);
            }
        }
    }

    fn stmts(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Decl { ty, name, init } => {
                self.types.insert(ty.clone());
                self.word(name);
                if let Some(e) = init {
                    self.expr(e);
                }
            }
            Stmt::Expr(e) | Stmt::Return(Some(e)) => self.expr(e),
            Stmt::Return(None) => {}
            Stmt::Block(b) => self.stmts(b),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.expr(cond);
                self.stmts(then_branch);
                if let Some(e) = else_branch {
                    self.stmts(e);
                }
            }
            Stmt::While { cond, body } => {
                self.expr(cond);
                self.stmts(body);
            }
            Stmt::Try { body, catches } => {
                self.stmts(body);
                for c in catches {
                    self.types.insert(c.ty.clone());
                    self.word(&c.name);
                    self.stmts(&c.body);
                }
            }
        }
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Name(n) => self.word(n),
            Expr::This | Expr::Literal(_) => {}
            Expr::Call { target, args, .. } => {
                if let Some(t) = target {
                    self.expr(t);
                }
                args.iter().for_each(|a| self.expr(a));
            }
            Expr::New { ty, args } => {
                self.types.insert(ty.clone());
                args.iter().for_each(|a| self.expr(a));
            }
            Expr::Field { target, name } => {
                self.expr(target);
                self.word(name);
            }
            Expr::Assign { target, value, .. } => {
                self.expr(target);
                self.expr(value);
            }
            Expr::Binary { lhs, rhs, .. } => {
                self.expr(lhs);
                self.expr(rhs);
            }
            Expr::Unary { operand, .. } | Expr::Postfix { operand, .. } | Expr::Paren(operand) => {
                self.expr(operand)
            }
        }
    }
}
