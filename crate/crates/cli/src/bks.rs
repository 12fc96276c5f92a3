//! Best-known solution values keyed by instance name and salesman count.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

const EMBEDDED: &str = include_str!("../../../data/bks.csv");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BksEntry {
    pub bks: f64,
    pub optimal: bool,
}

#[derive(Debug, Deserialize)]
struct Row {
    instance: String,
    m: usize,
    bks: f64,
    #[serde(default)]
    optimal: Option<bool>,
}

#[derive(Debug, Clone, Default)]
pub struct BksRegistry {
    entries: BTreeMap<(String, usize), BksEntry>,
}

impl BksRegistry {
    /// The registry shipped with the binary.
    pub fn embedded() -> Self {
        Self::parse(EMBEDDED).expect("embedded BKS table is well formed")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading BKS file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in BKS file {}", path.display()))
    }

    /// CSV with header `instance,m,bks[,optimal,...]`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut entries = BTreeMap::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row = row.with_context(|| format!("record {}", i + 1))?;
            if !(row.bks.is_finite() && row.bks > 0.0) {
                bail!("{}-{}: BKS must be positive, got {}", row.instance, row.m, row.bks);
            }
            let key = (row.instance.clone(), row.m);
            let entry = BksEntry {
                bks: row.bks,
                optimal: row.optimal.unwrap_or(false),
            };
            if entries.insert(key, entry).is_some() {
                bail!("duplicate BKS entry {}-{}", row.instance, row.m);
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, name: &str, m: usize) -> Option<BksEntry> {
        self.entries.get(&(name.to_string(), m)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize, BksEntry)> {
        self.entries.iter().map(|((n, m), e)| (n.as_str(), *m, *e))
    }
}

/// Percentage gap of `f` over the best-known value.
pub fn gap_percent(f: f64, bks: f64) -> f64 {
    100.0 * (f - bks) / bks
}
