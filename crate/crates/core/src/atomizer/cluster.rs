//! Single-pass leader clustering.
//!
//! Keywords are visited in [`GlobalKeywordSet`] order. Each keyword joins the
//! existing center with the highest cosine if that cosine is at least the
//! threshold (ties go to the lowest atom id); otherwise it founds a new atom
//! and becomes its center. Only keyword-vs-center similarities are computed.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::docid::AtomId;
use super::keywords::GlobalKeywordSet;
use super::similarity::{cosine_with_norms, norm};
use super::{AtomizerError, Result};
use crate::corpus::EmbeddingMap;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub atom_id: AtomId,
    #[serde(rename = "center")]
    pub center_keyword: String,
    /// Center first, then members in assignment order.
    pub members: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AtomVocabulary {
    atoms: Vec<Atom>,
    theta: f64,
    atom_of: HashMap<String, AtomId>,
}

impl PartialEq for AtomVocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && self.theta.to_bits() == other.theta.to_bits()
    }
}

impl AtomVocabulary {
    /// Rebuild from a stored atom table, checking that ids are contiguous,
    /// centers are members and member lists are disjoint.
    pub fn from_atoms(atoms: Vec<Atom>, theta: f64) -> Result<Self> {
        let mut atom_of = HashMap::new();
        for (i, atom) in atoms.iter().enumerate() {
            if atom.atom_id.index() != i {
                return Err(AtomizerError::Inconsistent(format!("atom ids are not contiguous at position {i}")));
            }
            if !atom.members.contains(&atom.center_keyword) {
                return Err(AtomizerError::Inconsistent(format!("center of atom {i} is not a member")));
            }
            for m in &atom.members {
                if atom_of.insert(m.clone(), atom.atom_id).is_some() {
                    return Err(AtomizerError::Inconsistent(format!("keyword {m:?} belongs to more than one atom")));
                }
            }
        }
        Ok(Self { atoms, theta, atom_of })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, id: AtomId) -> Option<&Atom> {
        self.atoms.get(id.index())
    }

    /// Number of atoms, C.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Number of clustered keywords, n.
    pub fn keyword_count(&self) -> usize {
        self.atom_of.len()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn atom_of(&self, keyword: &str) -> Option<AtomId> {
        self.atom_of.get(keyword).copied()
    }
}

pub fn cluster_keywords<T: Scalar>(gks: &GlobalKeywordSet, emb: &EmbeddingMap<T>, theta: T) -> Result<AtomVocabulary> {
    if !(theta.is_finite() && theta >= T::zero()) {
        return Err(AtomizerError::InvalidTheta(theta.to_f64_lossy()));
    }
    let mut atoms: Vec<Atom> = Vec::new();
    let mut centers: Vec<(&[T], T)> = Vec::new();
    let mut atom_of = HashMap::with_capacity(gks.len());
    for kw in gks.keywords() {
        let v = emb.get(kw).ok_or_else(|| AtomizerError::MissingEmbedding(kw.clone()))?;
        let nv = norm(v);
        let mut best: Option<(usize, T)> = None;
        for (i, &(c, nc)) in centers.iter().enumerate() {
            let s = cosine_with_norms(v, nv, c, nc)?;
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        let id = match best {
            Some((i, s)) if s >= theta => {
                atoms[i].members.push(kw.clone());
                atoms[i].atom_id
            }
            _ => {
                if !(nv > T::zero()) {
                    return Err(AtomizerError::ZeroVector);
                }
                let id = AtomId(atoms.len() as u32);
                atoms.push(Atom {
                    atom_id: id,
                    center_keyword: kw.clone(),
                    members: vec![kw.clone()],
                });
                centers.push((v, nv));
                id
            }
        };
        atom_of.insert(kw.clone(), id);
    }
    log::debug!("clustered {} keywords into {} atoms at theta {}", gks.len(), atoms.len(), theta);
    Ok(AtomVocabulary {
        atoms,
        theta: theta.to_f64_lossy(),
        atom_of,
    })
}
