//! A finite game `((I, mu), s, N', N)` and its JSON document form.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Group, SizeBounds, TypeSpace, DEFAULT_MAX_SIZE_CAP};
use crate::surplus::SurplusTable;

#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    pub space: TypeSpace,
    pub bounds: SizeBounds,
    pub surplus: SurplusTable,
}

impl Game {
    pub fn new(space: TypeSpace, bounds: SizeBounds, surplus: SurplusTable) -> Self {
        Self {
            space,
            bounds,
            surplus,
        }
    }

    /// Same game on a different mass vector.
    pub fn with_masses(&self, masses: Vec<f64>) -> Result<Self> {
        Ok(Self {
            space: self.space.with_masses(masses)?,
            ..self.clone()
        })
    }

    pub fn from_document(doc: &GameDocument) -> Result<Self> {
        Self::from_document_with_cap(doc, DEFAULT_MAX_SIZE_CAP)
    }

    pub fn from_document_with_cap(doc: &GameDocument, size_cap: usize) -> Result<Self> {
        let space = TypeSpace::new(
            doc.types.iter().map(|t| t.label.clone()).collect(),
            doc.types.iter().map(|t| t.mass).collect(),
        )?;
        let bounds = SizeBounds::with_cap(doc.min_size, doc.max_size, size_cap)?;
        let mut surplus = SurplusTable::new();
        let mut seen = BTreeSet::new();
        for entry in &doc.surplus {
            let members = entry
                .group
                .iter()
                .map(|l| {
                    space
                        .index_of(l)
                        .ok_or_else(|| Error::InvalidSpec(format!("unknown type label `{l}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            let g = Group::new(members);
            if !bounds.contains(g.size()) {
                return Err(Error::InvalidSpec(format!(
                    "surplus group {:?} has size {} outside {}..={}",
                    entry.group,
                    g.size(),
                    bounds.min(),
                    bounds.max()
                )));
            }
            if !seen.insert(g.clone()) {
                return Err(Error::InvalidSpec(format!(
                    "surplus group {:?} is listed twice",
                    entry.group
                )));
            }
            surplus.insert(g, entry.value)?;
        }
        Ok(Self::new(space, bounds, surplus))
    }

    pub fn to_document(&self) -> GameDocument {
        GameDocument {
            types: self
                .space
                .labels()
                .iter()
                .zip(self.space.masses())
                .map(|(label, &mass)| TypeEntry {
                    label: label.clone(),
                    mass,
                })
                .collect(),
            min_size: self.bounds.min(),
            max_size: self.bounds.max(),
            surplus: self
                .surplus
                .iter()
                .map(|(g, value)| SurplusEntry {
                    group: g.labels(&self.space).into_iter().map(String::from).collect(),
                    value,
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GameDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeEntry {
    pub label: String,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurplusEntry {
    /// Member labels, in any order.
    pub group: Vec<String>,
    pub value: f64,
}

/// On-disk game specification. Unlisted groups have surplus 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameDocument {
    pub types: Vec<TypeEntry>,
    pub min_size: usize,
    pub max_size: usize,
    #[serde(default)]
    pub surplus: Vec<SurplusEntry>,
}
