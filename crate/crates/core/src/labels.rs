//! Verdict and topic harmonization onto the closed veracity and domain
//! taxonomies.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::ArticleRecord;

/// Sentinel reported for records that carry no raw label at all.
pub const MISSING_LABEL: &str = "(missing)";

/// Verdict strings every table must route to [`VerdictClass::PartiallyFalse`].
pub const REQUIRED_PARTIAL_SYNONYMS: &[&str] = &[
    "partially false",
    "partially true",
    "mostly true",
    "miscaptioned",
    "misleading",
];

const SEED_TABLE: &str = include_str!("../data/mapping.toml");

/// A closed label set with stable names and indices.
pub trait Taxonomy: Copy + Eq + fmt::Debug + 'static {
    const ALL: &'static [Self];

    fn name(self) -> &'static str;

    fn index(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).expect("member of ALL")
    }

    fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == name)
    }

    fn names() -> Vec<String> {
        Self::ALL.iter().map(|c| c.name().to_string()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictClass {
    True,
    False,
    PartiallyFalse,
    Other,
}

impl Taxonomy for VerdictClass {
    const ALL: &'static [Self] = &[Self::True, Self::False, Self::PartiallyFalse, Self::Other];

    fn name(self) -> &'static str {
        match self {
            Self::True => "true",
            Self::False => "false",
            Self::PartiallyFalse => "partially_false",
            Self::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainClass {
    Health,
    Election,
    Crime,
    Climate,
    Economy,
    Education,
}

impl Taxonomy for DomainClass {
    const ALL: &'static [Self] = &[
        Self::Health,
        Self::Election,
        Self::Crime,
        Self::Climate,
        Self::Economy,
        Self::Education,
    ];

    fn name(self) -> &'static str {
        match self {
            Self::Health => "health",
            Self::Election => "election",
            Self::Crime => "crime",
            Self::Climate => "climate",
            Self::Economy => "economy",
            Self::Education => "education",
        }
    }
}

macro_rules! display_from_str {
    ($ty:ty) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::from_name(s).ok_or_else(|| format!("unknown {} {s:?}", stringify!($ty)))
            }
        }
    };
}

display_from_str!(VerdictClass);
display_from_str!(DomainClass);

/// Lowercases, drops punctuation and symbols, and collapses whitespace.
///
/// Anything that is neither alphanumeric nor whitespace is removed outright,
/// so "Half-True" becomes "halftrue".
pub fn canonicalize_label(raw: &str) -> String {
    raw.to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Result of looking a raw label up in the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized<C> {
    Mapped(C),
    /// Carries the canonical form that missed.
    Unmapped(String),
}

impl<C: Copy> Normalized<C> {
    pub fn class(&self) -> Option<C> {
        match self {
            Normalized::Mapped(c) => Some(*c),
            Normalized::Unmapped(_) => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("cannot read mapping table {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse mapping table: {0}")]
    Syntax(String),
    #[error("{section} key {key:?} is not canonical (expected {expected:?})")]
    NonCanonicalKey {
        section: &'static str,
        key: String,
        expected: String,
    },
    #[error("{section} key must not be empty")]
    EmptyKey { section: &'static str },
    #[error("verdict {0:?} must map to partially_false")]
    MissingRequiredSynonym(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    version: u64,
    #[serde(default)]
    verdicts: BTreeMap<String, VerdictClass>,
    #[serde(default)]
    domains: BTreeMap<String, DomainClass>,
}

/// Versioned dictionary from canonical label strings to classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingTable {
    version: u64,
    verdict_entries: BTreeMap<String, VerdictClass>,
    domain_entries: BTreeMap<String, DomainClass>,
}

impl MappingTable {
    /// The built-in table shipped with the crate.
    pub fn seed() -> Self {
        Self::from_toml_str(SEED_TABLE).expect("seed mapping table is valid")
    }

    pub fn new(
        version: u64,
        verdict_entries: BTreeMap<String, VerdictClass>,
        domain_entries: BTreeMap<String, DomainClass>,
    ) -> Result<Self, MappingError> {
        check_keys("verdicts", verdict_entries.keys())?;
        check_keys("domains", domain_entries.keys())?;
        for synonym in REQUIRED_PARTIAL_SYNONYMS {
            if verdict_entries.get(*synonym) != Some(&VerdictClass::PartiallyFalse) {
                return Err(MappingError::MissingRequiredSynonym(synonym.to_string()));
            }
        }
        Ok(Self {
            version,
            verdict_entries,
            domain_entries,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, MappingError> {
        let file: TableFile = toml::from_str(text).map_err(|e| MappingError::Syntax(e.to_string()))?;
        Self::new(file.version, file.verdicts, file.domains)
    }

    pub fn load(path: &Path) -> Result<Self, MappingError> {
        let text = fs::read_to_string(path).map_err(|source| MappingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let file = TableFile {
            version: self.version,
            verdicts: self.verdict_entries.clone(),
            domains: self.domain_entries.clone(),
        };
        toml::to_string(&file).expect("mapping table serializes")
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn verdict_entries(&self) -> &BTreeMap<String, VerdictClass> {
        &self.verdict_entries
    }

    pub fn domain_entries(&self) -> &BTreeMap<String, DomainClass> {
        &self.domain_entries
    }

    /// Layers `other` on top of this table; the result takes the higher version.
    pub fn extended_with(&self, other: &MappingTable) -> MappingTable {
        let mut verdicts = self.verdict_entries.clone();
        verdicts.extend(other.verdict_entries.iter().map(|(k, v)| (k.clone(), *v)));
        let mut domains = self.domain_entries.clone();
        domains.extend(other.domain_entries.iter().map(|(k, v)| (k.clone(), *v)));
        MappingTable {
            version: self.version.max(other.version),
            verdict_entries: verdicts,
            domain_entries: domains,
        }
    }
}

fn check_keys<'a>(section: &'static str, keys: impl Iterator<Item = &'a String>) -> Result<(), MappingError> {
    for key in keys {
        if key.is_empty() {
            return Err(MappingError::EmptyKey { section });
        }
        let expected = canonicalize_label(key);
        if *key != expected {
            return Err(MappingError::NonCanonicalKey {
                section,
                key: key.clone(),
                expected,
            });
        }
    }
    Ok(())
}

fn lookup<C: Copy>(entries: &BTreeMap<String, C>, raw: &str) -> Normalized<C> {
    let canonical = canonicalize_label(raw);
    match entries.get(&canonical) {
        Some(class) => Normalized::Mapped(*class),
        None => Normalized::Unmapped(canonical),
    }
}

pub fn normalize_verdict(raw: &str, table: &MappingTable) -> Normalized<VerdictClass> {
    lookup(&table.verdict_entries, raw)
}

pub fn normalize_domain(raw_topic: &str, table: &MappingTable) -> Normalized<DomainClass> {
    lookup(&table.domain_entries, raw_topic)
}

/// Distinct unmapped canonical labels with their frequencies, most frequent
/// first (ties by label).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct UnmappedReport {
    pub entries: Vec<(String, usize)>,
}

impl UnmappedReport {
    fn from_counts(counts: HashMap<String, usize>) -> Self {
        let mut entries: Vec<_> = counts.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|(_, n)| n).sum()
    }

    /// Tab-separated `label\tcount` lines under a header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("label\tcount\n");
        for (label, count) in &self.entries {
            out.push_str(&format!("{label}\t{count}\n"));
        }
        out
    }

    /// Aligned two-column table for terminals.
    pub fn to_table(&self) -> String {
        let width = self
            .entries
            .iter()
            .map(|(l, _)| l.chars().count())
            .max()
            .unwrap_or(0)
            .max("label".len());
        let mut out = format!("{:<width$}  {:>7}\n", "label", "count");
        for (label, count) in &self.entries {
            out.push_str(&format!("{label:<width$}  {count:>7}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledArticle<C> {
    pub record: ArticleRecord,
    pub label: C,
}

pub type LabeledDataset<C> = Vec<LabeledArticle<C>>;

fn merge_by<C: Copy>(
    records: &[ArticleRecord],
    field: impl Fn(&ArticleRecord) -> Option<&str>,
    normalize: impl Fn(&str) -> Normalized<C>,
) -> (LabeledDataset<C>, UnmappedReport) {
    let mut labeled = Vec::new();
    let mut unmapped: HashMap<String, usize> = HashMap::new();
    for record in records {
        let outcome = match field(record) {
            Some(raw) => normalize(raw),
            None => Normalized::Unmapped(MISSING_LABEL.to_string()),
        };
        match outcome {
            Normalized::Mapped(label) => labeled.push(LabeledArticle {
                record: record.clone(),
                label,
            }),
            Normalized::Unmapped(key) => *unmapped.entry(key).or_default() += 1,
        }
    }
    (labeled, UnmappedReport::from_counts(unmapped))
}

/// Labels every record whose raw verdict maps; the rest are tallied.
pub fn merge_corpus(records: &[ArticleRecord], table: &MappingTable) -> (LabeledDataset<VerdictClass>, UnmappedReport) {
    merge_by(
        records,
        |r| r.raw_verdict.as_deref(),
        |raw| normalize_verdict(raw, table),
    )
}

/// Same as [`merge_corpus`] over raw topics.
pub fn merge_domains(records: &[ArticleRecord], table: &MappingTable) -> (LabeledDataset<DomainClass>, UnmappedReport) {
    merge_by(records, |r| r.raw_topic.as_deref(), |raw| normalize_domain(raw, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::record_id_for;
    use proptest::prelude::*;

    fn rec(i: usize, verdict: Option<&str>) -> ArticleRecord {
        let url = format!("https://fc.example/{i}");
        ArticleRecord {
            record_id: record_id_for(&url),
            canonical_url: url,
            site_id: "fc".into(),
            title: "t".into(),
            published_at: None,
            body_text: "b".into(),
            raw_verdict: verdict.map(str::to_string),
            raw_topic: None,
        }
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonicalize_label("  Mostly TRUE! "), "mostly true");
        assert_eq!(canonicalize_label("FALSE."), "false");
        assert_eq!(canonicalize_label("Half-True"), "halftrue");
        assert_eq!(canonicalize_label("In\tdispute\n"), "in dispute");
        assert_eq!(canonicalize_label("ÉLECTION 2020 ✓"), "élection 2020");
        assert_eq!(canonicalize_label(""), "");
    }

    #[test]
    fn seed_table_lookups() {
        let t = MappingTable::seed();
        assert!(t.verdict_entries().len() >= 40);
        assert_eq!(
            normalize_verdict("Mostly True", &t),
            Normalized::Mapped(VerdictClass::PartiallyFalse)
        );
        assert_eq!(
            normalize_verdict("miscaptioned", &t),
            Normalized::Mapped(VerdictClass::PartiallyFalse)
        );
        assert_eq!(
            normalize_verdict("Pants on Fire!", &t),
            Normalized::Mapped(VerdictClass::False)
        );
        assert_eq!(
            normalize_verdict("Unproven", &t),
            Normalized::Mapped(VerdictClass::Other)
        );
        assert_eq!(
            normalize_verdict("totally bogus claim xyz", &t),
            Normalized::Unmapped("totally bogus claim xyz".into())
        );
        assert_eq!(
            normalize_domain("COVID-19", &t),
            Normalized::Mapped(DomainClass::Health)
        );
        assert_eq!(
            normalize_domain("election", &t),
            Normalized::Mapped(DomainClass::Election)
        );
        assert_eq!(
            normalize_domain("astrology", &t),
            Normalized::Unmapped("astrology".into())
        );
    }

    #[test]
    fn loader_rejects_non_canonical_keys() {
        let text = SEED_TABLE.replace("\"fake\" = \"false\"", "\"Fake!\" = \"false\"");
        match MappingTable::from_toml_str(&text) {
            Err(MappingError::NonCanonicalKey { section, key, expected }) => {
                assert_eq!(section, "verdicts");
                assert_eq!(key, "Fake!");
                assert_eq!(expected, "fake");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn loader_requires_partial_synonyms_and_known_classes() {
        let text = SEED_TABLE.replace("\"misleading\" = \"partially_false\"", "\"misleading\" = \"false\"");
        assert!(matches!(
            MappingTable::from_toml_str(&text),
            Err(MappingError::MissingRequiredSynonym(s)) if s == "misleading"
        ));
        let text = SEED_TABLE.replace("\"hoax\" = \"false\"", "\"hoax\" = \"fiction\"");
        assert!(matches!(
            MappingTable::from_toml_str(&text),
            Err(MappingError::Syntax(_))
        ));
    }

    #[test]
    fn table_round_trip() {
        let t = MappingTable::seed();
        let back = MappingTable::from_toml_str(&t.to_toml_string()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.version(), 1);
    }

    #[test]
    fn extension_overrides_and_bumps_version() {
        let base = MappingTable::seed();
        let mut v = base.verdict_entries().clone();
        v.insert("four pinocchios".into(), VerdictClass::PartiallyFalse);
        v.insert("zombie claim".into(), VerdictClass::False);
        let ext = MappingTable::new(2, v, BTreeMap::new()).unwrap();
        let merged = base.extended_with(&ext);
        assert_eq!(merged.version(), 2);
        assert_eq!(
            normalize_verdict("Zombie claim", &merged).class(),
            Some(VerdictClass::False)
        );
        assert_eq!(normalize_domain("cancer", &merged).class(), Some(DomainClass::Health));
    }

    #[test]
    fn merge_counts_unmapped() {
        let t = MappingTable::seed();
        let records = vec![
            rec(0, Some("false")),
            rec(1, Some("mostly true")),
            rec(2, Some("gibberish")),
        ];
        let (data, report) = merge_corpus(&records, &t);
        assert_eq!(data.len(), 2);
        assert_eq!(data[0].label, VerdictClass::False);
        assert_eq!(data[1].label, VerdictClass::PartiallyFalse);
        assert_eq!(report.entries, vec![("gibberish".to_string(), 1)]);

        let (data, report) = merge_corpus(&[], &t);
        assert!(data.is_empty() && report.is_empty());
    }

    #[test]
    fn merge_missing_verdict_and_ordering() {
        let t = MappingTable::seed();
        let records = vec![
            rec(0, None),
            rec(1, Some("zzz")),
            rec(2, Some("ZZZ!")),
            rec(3, Some("aaa")),
            rec(4, Some("true")),
        ];
        let (data, report) = merge_corpus(&records, &t);
        assert_eq!(data.len(), 1);
        assert_eq!(
            report.entries,
            vec![("zzz".into(), 2), ("(missing)".into(), 1), ("aaa".into(), 1)]
        );
        assert_eq!(report.to_tsv(), "label\tcount\nzzz\t2\n(missing)\t1\naaa\t1\n");
        assert!(report.to_table().starts_with("label        count\n"));
    }

    #[test]
    fn enumeration_closure() {
        let t = MappingTable::seed();
        assert_eq!(VerdictClass::ALL.len(), 4);
        assert_eq!(DomainClass::ALL.len(), 6);
        assert!(t.verdict_entries().values().all(|c| VerdictClass::ALL.contains(c)));
        assert!(t.domain_entries().values().all(|c| DomainClass::ALL.contains(c)));
        for c in VerdictClass::ALL {
            assert_eq!(c.to_string().parse::<VerdictClass>().unwrap(), *c);
            assert_eq!(VerdictClass::from_index(c.index()), Some(*c));
        }
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(s in "\\PC{0,30}") {
            let once = canonicalize_label(&s);
            prop_assert_eq!(canonicalize_label(&once), once);
        }

        #[test]
        fn verdict_lookup_ignores_case_and_punctuation(
            idx in 0usize..60,
            upper in any::<bool>(),
            pad in "[ \t!?.,]{0,3}",
        ) {
            let t = MappingTable::seed();
            let keys: Vec<&String> = t.verdict_entries().keys().collect();
            let key = keys[idx % keys.len()];
            let raw = format!("{pad}{}{pad}", if upper { key.to_uppercase() } else { key.clone() });
            prop_assert_eq!(normalize_verdict(&raw, &t), normalize_verdict(&canonicalize_label(&raw), &t));
            prop_assert_eq!(normalize_verdict(&raw, &t).class(), t.verdict_entries().get(key.as_str()).copied());
        }

        #[test]
        fn merge_conserves_records(verdicts in proptest::collection::vec(proptest::option::of("(false|true|mostly true|xyz|q+)"), 0..20)) {
            let t = MappingTable::seed();
            let records: Vec<_> = verdicts.iter().enumerate().map(|(i, v)| rec(i, v.as_deref())).collect();
            let (data, report) = merge_corpus(&records, &t);
            prop_assert_eq!(data.len() + report.total(), records.len());
        }
    }
}
