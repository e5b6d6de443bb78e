use std::collections::BTreeMap;

use super::{DecodeError, Result};
use crate::atomizer::{AtomDocId, AtomId, Index};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Node {
    children: BTreeMap<AtomId, u32>,
    /// Indices into `PrefixTrie::doc_keys`, ascending.
    docs: Vec<u32>,
}

/// Prefix trie over docids. Every node records the documents whose docid
/// passes through it; the root covers all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixTrie {
    m: usize,
    nodes: Vec<Node>,
    doc_keys: Vec<String>,
}

impl PrefixTrie {
    pub fn build(docids: &BTreeMap<String, AtomDocId>) -> Result<Self> {
        let m = docids.values().next().ok_or(DecodeError::EmptyIndex)?.atoms.len();
        let mut trie = Self {
            m,
            nodes: vec![Node::default()],
            doc_keys: Vec::with_capacity(docids.len()),
        };
        // BTreeMap iteration keeps every node's doc list sorted by key.
        for (key, docid) in docids {
            if docid.atoms.len() != m {
                return Err(DecodeError::LengthMismatch {
                    doc_key: key.clone(),
                    expected: m,
                    actual: docid.atoms.len(),
                });
            }
            let doc = trie.doc_keys.len() as u32;
            trie.doc_keys.push(key.clone());
            let mut node = 0usize;
            trie.nodes[0].docs.push(doc);
            for &atom in &docid.atoms {
                let next = match trie.nodes[node].children.get(&atom) {
                    Some(&n) => n as usize,
                    None => {
                        let n = trie.nodes.len();
                        trie.nodes.push(Node::default());
                        trie.nodes[node].children.insert(atom, n as u32);
                        n
                    }
                };
                trie.nodes[next].docs.push(doc);
                node = next;
            }
        }
        Ok(trie)
    }

    pub fn from_index(index: &Index) -> Result<Self> {
        Self::build(index.docids())
    }

    /// Docid length.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn document_count(&self) -> usize {
        self.doc_keys.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn find(&self, prefix: &[AtomId]) -> Option<usize> {
        let mut node = 0usize;
        for atom in prefix {
            node = *self.nodes[node].children.get(atom)? as usize;
        }
        Some(node)
    }

    pub fn contains_prefix(&self, prefix: &[AtomId]) -> bool {
        self.find(prefix).is_some()
    }

    /// Atoms that may follow `prefix`, ascending. `None` if the prefix is
    /// not in the trie.
    pub fn children(&self, prefix: &[AtomId]) -> Option<Vec<AtomId>> {
        self.find(prefix).map(|n| self.nodes[n].children.keys().copied().collect())
    }

    /// The constrained candidate set for the next decoding step.
    pub fn candidate_atoms(&self, prefix: &[AtomId]) -> Result<Vec<AtomId>> {
        if prefix.len() >= self.m {
            return Err(DecodeError::CompletePrefix(prefix.len()));
        }
        let node = self.find(prefix).ok_or_else(|| DecodeError::UnreachablePrefix(prefix.to_vec()))?;
        Ok(self.nodes[node].children.keys().copied().collect())
    }

    /// Documents whose docid starts with `prefix`, ascending by key.
    pub fn documents_under(&self, prefix: &[AtomId]) -> Option<Vec<&str>> {
        self.find(prefix)
            .map(|n| self.nodes[n].docs.iter().map(|&d| self.doc_keys[d as usize].as_str()).collect())
    }

    /// Documents carrying exactly this docid; empty unless `atoms` is complete.
    pub fn resolve(&self, atoms: &[AtomId]) -> Vec<String> {
        if atoms.len() != self.m {
            return Vec::new();
        }
        self.documents_under(atoms)
            .map(|d| d.into_iter().map(str::to_string).collect())
            .unwrap_or_default()
    }

    pub fn is_docid(&self, atoms: &[AtomId]) -> bool {
        atoms.len() == self.m && self.find(atoms).is_some()
    }

    /// Every distinct docid in lexicographic order.
    pub fn sequences(&self) -> Vec<Vec<AtomId>> {
        let mut out = Vec::new();
        let mut path = Vec::with_capacity(self.m);
        self.walk(0, &mut path, &mut out);
        out
    }

    pub fn distinct_docids(&self) -> usize {
        self.count_leaves(0)
    }

    fn count_leaves(&self, node: usize) -> usize {
        let n = &self.nodes[node];
        if n.children.is_empty() {
            1
        } else {
            n.children.values().map(|&c| self.count_leaves(c as usize)).sum()
        }
    }

    fn walk(&self, node: usize, path: &mut Vec<AtomId>, out: &mut Vec<Vec<AtomId>>) {
        if path.len() == self.m {
            out.push(path.clone());
            return;
        }
        for (&atom, &child) in &self.nodes[node].children {
            path.push(atom);
            self.walk(child as usize, path, out);
            path.pop();
        }
    }
}
