use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Rating criteria: creativity, relevance to the property, relevance to the
/// context, overall quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    C,
    R1,
    R2,
    OQ,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [Criterion::C, Criterion::R1, Criterion::R2, Criterion::OQ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::C => "C",
            Criterion::R1 => "R1",
            Criterion::R2 => "R2",
            Criterion::OQ => "OQ",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown criterion {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub item_id: String,
    pub system: String,
    pub rater_id: String,
    pub criterion: Criterion,
    pub score: u8,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScoreSheet {
    pub rows: Vec<ScoreRow>,
}

impl ScoreSheet {
    /// Validates scores (integers 1 to 5).
    pub fn new(rows: Vec<ScoreRow>) -> Result<Self, EvalError> {
        for (i, r) in rows.iter().enumerate() {
            if !(1..=5).contains(&r.score) {
                return Err(EvalError::Sheet {
                    line: i + 2,
                    message: format!("score {} outside 1..5", r.score),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn push(&mut self, item: &str, system: &str, rater: &str, criterion: Criterion, score: u8) {
        assert!((1..=5).contains(&score), "score outside 1..5");
        self.rows.push(ScoreRow {
            item_id: item.into(),
            system: system.into(),
            rater_id: rater.into(),
            criterion,
            score,
        });
    }

    /// CSV with header `item_id,system,rater_id,criterion,score`.
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self, EvalError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize::<ScoreRow>().enumerate() {
            rows.push(rec.map_err(|e| EvalError::Sheet {
                line: i + 2,
                message: e.to_string(),
            })?);
        }
        Self::new(rows)
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let f = std::fs::File::open(path).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(f)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-item (sum, count) for one system and criterion.
    fn item_totals(&self, system: &str, criterion: Criterion) -> BTreeMap<&str, (u64, u64)> {
        let mut out: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.system == system && r.criterion == criterion) {
            let e = out.entry(r.item_id.as_str()).or_default();
            e.0 += u64::from(r.score);
            e.1 += 1;
        }
        out
    }
}

/// Percentages of items on which A's mean rating beats, loses to or ties B's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pairwise {
    pub win: f64,
    pub lose: f64,
    pub tie: f64,
    pub items: usize,
}

pub fn pairwise_compare(sheet: &ScoreSheet, a: &str, b: &str, criterion: Criterion) -> Result<Pairwise, EvalError> {
    let ta = sheet.item_totals(a, criterion);
    let tb = sheet.item_totals(b, criterion);
    if ta.is_empty() {
        return Err(EvalError::NoRatings { system: a.into(), criterion });
    }
    let ka: BTreeSet<&str> = ta.keys().copied().collect();
    let kb: BTreeSet<&str> = tb.keys().copied().collect();
    let missing: Vec<String> = ka.symmetric_difference(&kb).map(|s| s.to_string()).collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingItem { missing });
    }
    let (mut win, mut lose, mut tie) = (0usize, 0usize, 0usize);
    for (item, (sa, na)) in &ta {
        let (sb, nb) = tb[item];
        // compare sa/na with sb/nb exactly
        match (sa * nb).cmp(&(sb * na)) {
            std::cmp::Ordering::Greater => win += 1,
            std::cmp::Ordering::Less => lose += 1,
            std::cmp::Ordering::Equal => tie += 1,
        }
    }
    let n = ta.len();
    let pct = |k: usize| 100.0 * k as f64 / n as f64;
    Ok(Pairwise {
        win: pct(win),
        lose: pct(lose),
        tie: pct(tie),
        items: n,
    })
}

/// Mean of all ratings per (system, criterion).
pub fn mean_scores(sheet: &ScoreSheet) -> BTreeMap<(String, Criterion), f64> {
    let mut acc: BTreeMap<(String, Criterion), (u64, u64)> = BTreeMap::new();
    for r in &sheet.rows {
        let e = acc.entry((r.system.clone(), r.criterion)).or_default();
        e.0 += u64::from(r.score);
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s as f64 / n as f64)).collect()
}

/// Krippendorff's alpha with the interval metric. Each unit lists the values
/// it received; units with fewer than two values are not pairable and are
/// ignored. `None` when there is no expected disagreement to compare against.
pub fn krippendorff_alpha(units: &[Vec<f64>]) -> Option<f64> {
    let pairable: Vec<&Vec<f64>> = units.iter().filter(|u| u.len() >= 2).collect();
    let n: usize = pairable.iter().map(|u| u.len()).sum();
    if n < 2 {
        return None;
    }
    let sq_pairs = |vals: &[f64]| -> f64 {
        let mut s = 0.0;
        for (i, x) in vals.iter().enumerate() {
            for y in &vals[i + 1..] {
                s += (x - y) * (x - y);
            }
        }
        2.0 * s
    };
    let observed: f64 = pairable
        .iter()
        .map(|u| sq_pairs(u) / (u.len() - 1) as f64)
        .sum::<f64>()
        / n as f64;
    let all: Vec<f64> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
    let expected = sq_pairs(&all) / (n * (n - 1)) as f64;
    if expected == 0.0 {
        return None;
    }
    Some(1.0 - observed / expected)
}

/// Alpha over one criterion, each (item, system) being a unit.
pub fn sheet_alpha(sheet: &ScoreSheet, criterion: Criterion) -> Option<f64> {
    let mut units: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
    for r in sheet.rows.iter().filter(|r| r.criterion == criterion) {
        units
            .entry((r.item_id.as_str(), r.system.as_str()))
            .or_default()
            .push(f64::from(r.score));
    }
    krippendorff_alpha(&units.into_values().collect::<Vec<_>>())
}
