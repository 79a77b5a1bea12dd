// SPDX-License-Identifier: Apache-2.0

//! Per-team contribution features.
//!
//! Members are ordered so that `u0` is the one with fewer added lines over
//! the whole project. For each user and each scope (the whole project plus
//! the seven commit categories) the registry holds commit, line and file
//! totals, per-commit averages, the user's share of the team total and
//! message lengths. Pair-programming counts, prior grades, at-risk flags
//! and the team selection flag follow.

use std::collections::HashMap;
use std::sync::OnceLock;

use gitteams_ml::Standardizer;
use serde::{Deserialize, Serialize};

use crate::commitcls::{CommitCategory, LabeledCommit};
use crate::error::{Error, Result};
use crate::ingest::TeamRecord;

pub const REGISTRY_VERSION: u32 = 1;

/// Grades below this mark a student as at risk.
pub const RISK_GRADE: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartScope {
    Whole,
    Part(CommitCategory),
}

impl PartScope {
    pub fn all() -> impl Iterator<Item = PartScope> {
        std::iter::once(PartScope::Whole).chain(CommitCategory::ALL.into_iter().map(PartScope::Part))
    }

    pub fn name(self) -> &'static str {
        match self {
            PartScope::Whole => "whole",
            PartScope::Part(CommitCategory::Implementation) => "implementation",
            PartScope::Part(CommitCategory::Test) => "test",
            PartScope::Part(CommitCategory::Bugfix) => "bugfix",
            PartScope::Part(CommitCategory::Documentation) => "documentation",
            PartScope::Part(CommitCategory::Style) => "style",
            PartScope::Part(CommitCategory::Merge) => "merge",
            PartScope::Part(CommitCategory::Other) => "other",
        }
    }

    pub fn contains(self, category: CommitCategory) -> bool {
        match self {
            PartScope::Whole => true,
            PartScope::Part(c) => c == category,
        }
    }
}

/// Per-user, per-scope metric names, in registry order.
pub const SCOPED_METRICS: [&str; 16] = [
    "commits",
    "additions",
    "deletions",
    "files_changed",
    "churn",
    "avg_additions",
    "avg_deletions",
    "avg_files_changed",
    "avg_churn",
    "commit_share",
    "additions_share",
    "deletions_share",
    "files_changed_share",
    "churn_share",
    "msg_len_total",
    "msg_len_avg",
];

pub const TEAM_FEATURES: [&str; 13] = [
    "u0_pair_commits",
    "u1_pair_commits",
    "team_pair_commits",
    "u0_exam1",
    "u0_project1",
    "u1_exam1",
    "u1_project1",
    "u0_risk_exam1",
    "u0_risk_project1",
    "u1_risk_exam1",
    "u1_risk_project1",
    "team_any_risk",
    "team_selected",
];

/// Ordered feature names shared by every team vector.
pub fn registry() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut names = Vec::new();
        for user in 0..2 {
            for scope in PartScope::all() {
                for metric in SCOPED_METRICS {
                    names.push(format!("u{user}_{metric}_{}", scope.name()));
                }
            }
        }
        names.extend(TEAM_FEATURES.iter().map(|s| s.to_string()));
        names
    })
}

pub fn feature_index(name: &str) -> Option<usize> {
    registry().iter().position(|n| n == name)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserOrdering {
    pub user0: String,
    pub user1: String,
}

impl UserOrdering {
    fn slot(&self, member_id: &str) -> Option<usize> {
        if member_id == self.user0 {
            Some(0)
        } else if member_id == self.user1 {
            Some(1)
        } else {
            None
        }
    }
}

/// Orders members by total added lines, then commit count, then id.
pub fn order_users(team: &TeamRecord, labeled: &[LabeledCommit]) -> UserOrdering {
    let mut stats: HashMap<&str, (u64, usize)> =
        team.members.iter().map(|m| (m.member_id.as_str(), (0, 0))).collect();
    for l in labeled {
        if let Some(s) = l.commit.author_id.as_deref().and_then(|id| stats.get_mut(id)) {
            s.0 += l.commit.additions();
            s.1 += 1;
        }
    }
    let mut ids: Vec<&str> = team.members.iter().map(|m| m.member_id.as_str()).collect();
    ids.sort_by(|a, b| stats[a].cmp(&stats[b]).then_with(|| a.cmp(b)));
    UserOrdering { user0: ids[0].to_string(), user1: ids[1].to_string() }
}

#[derive(Debug, Clone, Copy, Default)]
struct Totals {
    commits: f64,
    additions: f64,
    deletions: f64,
    files: f64,
    churn: f64,
    msg_len: f64,
}

impl Totals {
    fn add(&mut self, l: &LabeledCommit) {
        let c = &l.commit;
        self.commits += 1.0;
        self.additions += c.additions() as f64;
        self.deletions += c.deletions() as f64;
        self.files += c.files_changed() as f64;
        self.churn += c.churn() as f64;
        self.msg_len += c.message.chars().count() as f64;
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamFeatureVector {
    pub values: Vec<f64>,
}

impl TeamFeatureVector {
    pub fn names(&self) -> &'static [String] {
        registry()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.values[i])
    }
}

/// Computes the registry's features for one team.
pub fn extract_features(
    team: &TeamRecord,
    labeled: &[LabeledCommit],
    ordering: &UserOrdering,
) -> Result<TeamFeatureVector> {
    let scopes: Vec<PartScope> = PartScope::all().collect();
    // totals[user][scope]
    let mut totals = [[Totals::default(); 8]; 2];
    let mut pair = [0.0f64; 2];
    for l in labeled {
        let user = l
            .commit
            .author_id
            .as_deref()
            .and_then(|id| ordering.slot(id))
            .ok_or_else(|| Error::UnknownAuthor { sha: l.commit.sha.clone(), team: team.team_id.clone() })?;
        totals[user][0].add(l);
        let part = 1 + CommitCategory::ALL.iter().position(|&c| c == l.category).expect("known category");
        totals[user][part].add(l);
        if l.pair_programming {
            pair[user] += 1.0;
        }
    }

    // u1's share is the complement of u0's so the pair sums to exactly one.
    let share = |user: usize, s: usize, f: fn(&Totals) -> f64| {
        let total = f(&totals[0][s]) + f(&totals[1][s]);
        let first = ratio(f(&totals[0][s]), total);
        match (user, total > 0.0) {
            (_, false) => 0.0,
            (0, true) => first,
            _ => 1.0 - first,
        }
    };

    let mut values = Vec::with_capacity(registry().len());
    for user in 0..2 {
        for s in 0..scopes.len() {
            let mine = totals[user][s];
            values.extend_from_slice(&[
                mine.commits,
                mine.additions,
                mine.deletions,
                mine.files,
                mine.churn,
                ratio(mine.additions, mine.commits),
                ratio(mine.deletions, mine.commits),
                ratio(mine.files, mine.commits),
                ratio(mine.churn, mine.commits),
                share(user, s, |t| t.commits),
                share(user, s, |t| t.additions),
                share(user, s, |t| t.deletions),
                share(user, s, |t| t.files),
                share(user, s, |t| t.churn),
                mine.msg_len,
                ratio(mine.msg_len, mine.commits),
            ]);
        }
    }

    let member = |id: &str| team.members.iter().find(|m| m.member_id == id).expect("ordered member");
    let (m0, m1) = (member(&ordering.user0), member(&ordering.user1));
    let risk = |g: f64| if g < RISK_GRADE { 1.0 } else { 0.0 };
    let risks = [
        risk(m0.exam1_grade),
        risk(m0.project1_grade),
        risk(m1.exam1_grade),
        risk(m1.project1_grade),
    ];
    values.extend_from_slice(&[
        pair[0],
        pair[1],
        pair[0] + pair[1],
        m0.exam1_grade,
        m0.project1_grade,
        m1.exam1_grade,
        m1.project1_grade,
    ]);
    values.extend_from_slice(&risks);
    values.push(if risks.contains(&1.0) { 1.0 } else { 0.0 });
    values.push(if team.selected { 1.0 } else { 0.0 });

    debug_assert_eq!(values.len(), registry().len());
    Ok(TeamFeatureVector { values })
}

/// Orders the members and extracts features in one call.
pub fn team_features(team: &TeamRecord, labeled: &[LabeledCommit]) -> Result<TeamFeatureVector> {
    extract_features(team, labeled, &order_users(team, labeled))
}

/// A team with its labeled commits.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTeam {
    pub team: TeamRecord,
    pub commits: Vec<LabeledCommit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub team_ids: Vec<String>,
    pub registry: Vec<String>,
    pub registry_version: u32,
    pub raw: Vec<Vec<f64>>,
    pub standardized: Vec<Vec<f64>>,
    pub standardizer: Standardizer,
}

pub fn build_matrix(teams: &[LabeledTeam]) -> Result<FeatureMatrix> {
    let raw: Vec<Vec<f64>> = teams
        .iter()
        .map(|t| team_features(&t.team, &t.commits).map(|v| v.values))
        .collect::<Result<_>>()?;
    let standardizer = Standardizer::fit(&raw)?;
    Ok(FeatureMatrix {
        team_ids: teams.iter().map(|t| t.team.team_id.clone()).collect(),
        registry: registry().to_vec(),
        registry_version: REGISTRY_VERSION,
        standardized: standardizer.apply(&raw),
        raw,
        standardizer,
    })
}

/// Feature CSV: `team_id` followed by the registry columns.
pub fn write_features_csv<W: std::io::Write>(writer: W, team_ids: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["team_id".to_string()];
    header.extend(registry().iter().cloned());
    w.write_record(&header)?;
    for (id, row) in team_ids.iter().zip(rows) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a feature CSV, checking the header against the registry.
pub fn read_features_csv<R: std::io::Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    let expected = registry();
    if header.len() != expected.len() + 1 || header.iter().skip(1).zip(expected).any(|(a, b)| a != b) {
        return Err(Error::Parse { line: 1, message: "feature header does not match the registry".into() });
    }
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 2;
        let record = record?;
        ids.push(record[0].to_string());
        let row = record
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|e| Error::Parse { line, message: e.to_string() }))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((ids, rows))
}
