use std::collections::{BTreeSet, HashMap};

use crate::sketch::UNKNOWN_TOKEN;

/// Token ↔ id map. Id 0 is reserved for the unknown token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Default for Vocab {
    fn default() -> Self {
        Self::from_sorted(Vec::new())
    }
}

impl Vocab {
    /// Builds a vocabulary from observed tokens; ids follow sorted order.
    pub fn build<'a>(observed: impl IntoIterator<Item = &'a str>) -> Self {
        let set: BTreeSet<&str> = observed
            .into_iter()
            .filter(|t| *t != UNKNOWN_TOKEN)
            .collect();
        Self::from_sorted(set.into_iter().map(String::from).collect())
    }

    fn from_sorted(rest: Vec<String>) -> Self {
        let mut tokens = Vec::with_capacity(rest.len() + 1);
        tokens.push(UNKNOWN_TOKEN.to_string());
        tokens.extend(rest);
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self { tokens, index }
    }

    /// Restores a vocabulary from its full token list (unknown token first).
    pub fn from_tokens(tokens: Vec<String>) -> Option<Self> {
        if tokens.first().map(String::as_str) != Some(UNKNOWN_TOKEN) {
            return None;
        }
        let index: HashMap<String, u32> = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        if index.len() != tokens.len() {
            return None;
        }
        Some(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Id of `token`, or 0 when unseen.
    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}
