//! Fixtures and from-scratch oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use atomdoc::atomizer::{AtomDocId, AtomId, AtomVocabulary};
use atomdoc::corpus::{EmbeddingMap, KeywordRecord};
use atomdoc::decoder::{PrefixTrie, TableScorer};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn docid_map(seqs: &[Vec<u32>]) -> BTreeMap<String, AtomDocId> {
    seqs.iter()
        .enumerate()
        .map(|(i, s)| {
            let key = format!("d{i:05}");
            (key.clone(), AtomDocId { doc_key: key, atoms: s.iter().map(|&a| AtomId(a)).collect() })
        })
        .collect()
}

/// `n` documents with length-`m` docids over atoms `0..c`, duplicates allowed.
pub fn random_docids(rng: &mut ChaCha8Rng, n: usize, m: usize, c: u32) -> BTreeMap<String, AtomDocId> {
    let seqs: Vec<Vec<u32>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(0..c)).collect()).collect();
    docid_map(&seqs)
}

/// Every proper prefix (lengths 0..m) of every docid.
pub fn all_prefixes(docids: &BTreeMap<String, AtomDocId>) -> BTreeSet<Vec<AtomId>> {
    let mut out = BTreeSet::new();
    for d in docids.values() {
        for len in 0..d.atoms.len() {
            out.insert(d.atoms[..len].to_vec());
        }
    }
    out
}

/// Next atoms after `prefix`, by a linear scan of the raw docid list.
pub fn brute_children(docids: &BTreeMap<String, AtomDocId>, prefix: &[AtomId]) -> Vec<AtomId> {
    let set: BTreeSet<AtomId> = docids
        .values()
        .filter(|d| d.atoms.len() > prefix.len() && d.atoms[..prefix.len()] == *prefix)
        .map(|d| d.atoms[prefix.len()])
        .collect();
    set.into_iter().collect()
}

/// Scores for every (prefix, child) pair of the trie. Roughly one score in
/// `zero_every` is zero; with `ties`, scores come from a small integer set.
pub fn random_table(rng: &mut ChaCha8Rng, trie: &PrefixTrie, docids: &BTreeMap<String, AtomDocId>, zero_every: u32, ties: bool) -> TableScorer<f64> {
    let mut table = TableScorer::new(1.0);
    for prefix in all_prefixes(docids) {
        for child in trie.children(&prefix).unwrap() {
            let s = if zero_every > 0 && rng.gen_range(0..zero_every) == 0 {
                0.0
            } else if ties {
                rng.gen_range(1..4) as f64
            } else {
                rng.gen_range(0.01..10.0)
            };
            table.set(&prefix, child, s);
        }
    }
    table
}

pub fn naive_cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}

/// Keywords by descending frequency, ties by codepoint order.
pub fn frequency_order(records: &[KeywordRecord]) -> Vec<String> {
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for r in records {
        for k in &r.keywords {
            *freq.entry(k).or_default() += 1;
        }
    }
    let mut out: Vec<(&str, usize)> = freq.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.chars().cmp(b.0.chars())));
    out.into_iter().map(|(k, _)| k.to_string()).collect()
}

/// Independent replay of the leader pass: returns (center, members) per atom
/// in founding order.
pub fn replay_leader(order: &[String], emb: &EmbeddingMap<f64>, theta: f64) -> Vec<(String, Vec<String>)> {
    let mut atoms: Vec<(String, Vec<String>)> = Vec::new();
    for k in order {
        let v = emb.get(k).unwrap();
        let mut best: Option<(usize, f64)> = None;
        for (i, (center, _)) in atoms.iter().enumerate() {
            let s = naive_cosine(v, emb.get(center).unwrap());
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        match best {
            Some((i, s)) if s >= theta => atoms[i].1.push(k.clone()),
            _ => atoms.push((k.clone(), vec![k.clone()])),
        }
    }
    atoms
}

/// Checks the threshold guarantee of a built vocabulary: every non-center
/// member is within `theta` of its center, no center founded before the
/// member was placed is strictly closer (or equally close with a lower id),
/// and the whole vocabulary equals an independent replay. Returns the number
/// of non-center members checked.
pub fn check_threshold_guarantee(
    vocab: &AtomVocabulary,
    records: &[KeywordRecord],
    emb: &EmbeddingMap<f64>,
    theta: f64,
) -> Result<usize, String> {
    let order = frequency_order(records);
    let position: HashMap<&str, usize> = order.iter().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
    let mut checked = 0;
    for atom in vocab.atoms() {
        let center = emb.get(&atom.center_keyword).ok_or("center without embedding")?;
        for k in &atom.members {
            if *k == atom.center_keyword {
                continue;
            }
            checked += 1;
            let v = emb.get(k).ok_or("member without embedding")?;
            let own = naive_cosine(v, center);
            if own < theta - 1e-9 {
                return Err(format!("{k:?} has cosine {own} < {theta} to center {:?}", atom.center_keyword));
            }
            for other in vocab.atoms() {
                if other.atom_id == atom.atom_id || position[other.center_keyword.as_str()] > position[k.as_str()] {
                    continue;
                }
                let s = naive_cosine(v, emb.get(&other.center_keyword).unwrap());
                if s > own + 1e-12 || (s == own && other.atom_id < atom.atom_id) {
                    return Err(format!("{k:?} is closer to earlier center {:?} ({s} vs {own})", other.center_keyword));
                }
            }
        }
    }
    let replay = replay_leader(&order, emb, theta);
    let built: Vec<(String, Vec<String>)> =
        vocab.atoms().iter().map(|a| (a.center_keyword.clone(), a.members.clone())).collect();
    if replay != built {
        return Err("vocabulary differs from the independent replay".into());
    }
    Ok(checked)
}
