// SPDX-License-Identifier: Apache-2.0

//! Commit and roster ingestion.
//!
//! Two commit sources are supported: the text produced by
//!
//! ```text
//! git log --numstat --date=unix --pretty=format:%x01%H|%an|%ae|%at|%s
//! ```
//!
//! and a JSONL interchange file with one commit per line. Rosters are CSV
//! files with one row per team member.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileStat {
    pub path: String,
    pub additions: u64,
    pub deletions: u64,
    pub binary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub sha: String,
    /// Raw author name as recorded by git.
    pub author_key: String,
    pub author_email: Option<String>,
    /// Roster member id, once resolved.
    pub author_id: Option<String>,
    /// Repository (team) the commit belongs to, when known.
    pub team_id: Option<String>,
    pub timestamp: i64,
    pub message: String,
    pub files: Vec<FileStat>,
    pub is_merge_shape: bool,
}

impl CommitRecord {
    pub fn additions(&self) -> u64 {
        self.files.iter().map(|f| f.additions).sum()
    }

    pub fn deletions(&self) -> u64 {
        self.files.iter().map(|f| f.deletions).sum()
    }

    pub fn files_changed(&self) -> u64 {
        self.files.len() as u64
    }

    pub fn churn(&self) -> u64 {
        self.additions() + self.deletions()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterMember {
    pub member_id: String,
    pub exam1_grade: f64,
    pub project1_grade: f64,
    pub author_keys: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamRecord {
    pub team_id: String,
    pub project_id: String,
    pub members: [RosterMember; 2],
    pub selected: bool,
    pub commits: Vec<CommitRecord>,
}

fn is_sha(s: &str) -> bool {
    s.len() == 40 && s.bytes().all(|b| b.is_ascii_hexdigit())
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

// git does not record parent counts in the pretty format above; a commit
// with no numstat lines and git's own "Merge ..." subject is a merge.
fn looks_like_merge(message: &str, files: &[FileStat]) -> bool {
    files.is_empty() && message.starts_with("Merge ")
}

fn parse_header(body: &str, line: usize) -> Result<CommitRecord> {
    let fields: Vec<&str> = body.splitn(5, '|').collect();
    if fields.len() != 5 {
        return Err(parse_error(line, format!("malformed commit header '{body}'")));
    }
    let sha = fields[0].trim();
    if !is_sha(sha) {
        return Err(parse_error(line, format!("invalid sha '{sha}'")));
    }
    let timestamp: i64 = fields[3]
        .trim()
        .parse()
        .map_err(|_| parse_error(line, format!("invalid timestamp '{}'", fields[3])))?;
    if timestamp <= 0 {
        return Err(parse_error(line, format!("non-positive timestamp {timestamp}")));
    }
    let email = fields[2].trim();
    Ok(CommitRecord {
        sha: sha.to_ascii_lowercase(),
        author_key: fields[1].trim().to_string(),
        author_email: (!email.is_empty()).then(|| email.to_string()),
        author_id: None,
        team_id: None,
        timestamp,
        message: fields[4].to_string(),
        files: Vec::new(),
        is_merge_shape: false,
    })
}

fn parse_numstat(text: &str, line: usize) -> Result<FileStat> {
    let mut parts = text.splitn(3, '\t');
    let (add, del, path) = match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(d), Some(p)) if !p.is_empty() => (a, d, p),
        _ => return Err(parse_error(line, format!("malformed numstat line '{text}'"))),
    };
    if add == "-" && del == "-" {
        return Ok(FileStat { path: path.to_string(), additions: 0, deletions: 0, binary: true });
    }
    let count = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| parse_error(line, format!("invalid line count '{s}'")))
    };
    Ok(FileStat { path: path.to_string(), additions: count(add)?, deletions: count(del)?, binary: false })
}

/// Parses `git log --numstat` output in the pretty format documented at the
/// module level. Commits keep their input order.
pub fn parse_git_log(text: &str) -> Result<Vec<CommitRecord>> {
    let mut commits: Vec<CommitRecord> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if let Some(header) = raw.strip_prefix('\u{1}') {
            let commit = parse_header(header, line)?;
            if !seen.insert(commit.sha.clone()) {
                return Err(Error::DuplicateSha { sha: commit.sha, line });
            }
            commits.push(commit);
        } else if raw.trim().is_empty() {
            continue;
        } else {
            let current = commits
                .last_mut()
                .ok_or_else(|| parse_error(line, "numstat line before any commit header"))?;
            current.files.push(parse_numstat(raw, line)?);
        }
    }
    for c in &mut commits {
        c.is_merge_shape = looks_like_merge(&c.message, &c.files);
    }
    Ok(commits)
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonFile {
    path: String,
    add: u64,
    del: u64,
    #[serde(default, skip_serializing_if = "is_false")]
    binary: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonCommit {
    sha: String,
    author: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    email: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    author_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    team: Option<String>,
    ts: i64,
    msg: String,
    #[serde(default, skip_serializing_if = "is_false")]
    merge: bool,
    files: Vec<JsonFile>,
}

impl From<&CommitRecord> for JsonCommit {
    fn from(c: &CommitRecord) -> Self {
        Self {
            sha: c.sha.clone(),
            author: c.author_key.clone(),
            email: c.author_email.clone(),
            author_id: c.author_id.clone(),
            team: c.team_id.clone(),
            ts: c.timestamp,
            msg: c.message.clone(),
            merge: c.is_merge_shape,
            files: c
                .files
                .iter()
                .map(|f| JsonFile { path: f.path.clone(), add: f.additions, del: f.deletions, binary: f.binary })
                .collect(),
        }
    }
}

impl JsonCommit {
    fn into_record(self, line: usize) -> Result<CommitRecord> {
        if !is_sha(&self.sha) {
            return Err(parse_error(line, format!("invalid sha '{}'", self.sha)));
        }
        if self.ts <= 0 {
            return Err(parse_error(line, format!("non-positive timestamp {}", self.ts)));
        }
        let mut files = Vec::with_capacity(self.files.len());
        for f in self.files {
            if f.binary && (f.add != 0 || f.del != 0) {
                return Err(parse_error(line, format!("binary file '{}' with line counts", f.path)));
            }
            files.push(FileStat { path: f.path, additions: f.add, deletions: f.del, binary: f.binary });
        }
        Ok(CommitRecord {
            sha: self.sha.to_ascii_lowercase(),
            author_key: self.author,
            author_email: self.email,
            author_id: self.author_id,
            team_id: self.team,
            timestamp: self.ts,
            message: self.msg,
            files,
            is_merge_shape: self.merge,
        })
    }
}

pub fn write_commits_jsonl<W: Write>(mut out: W, commits: &[CommitRecord]) -> Result<()> {
    for c in commits {
        serde_json::to_writer(&mut out, &JsonCommit::from(c))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn commits_to_jsonl(commits: &[CommitRecord]) -> String {
    let mut buf = Vec::new();
    write_commits_jsonl(&mut buf, commits).expect("writing to memory");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Parses commit JSONL. Blank lines are skipped; a sha may appear only once
/// per team.
pub fn parse_commits_jsonl(text: &str) -> Result<Vec<CommitRecord>> {
    let mut commits = Vec::new();
    let mut seen: HashSet<(Option<String>, String)> = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let record: JsonCommit =
            serde_json::from_str(raw).map_err(|e| parse_error(line, e.to_string()))?;
        let commit = record.into_record(line)?;
        if !seen.insert((commit.team_id.clone(), commit.sha.clone())) {
            return Err(Error::DuplicateSha { sha: commit.sha, line });
        }
        commits.push(commit);
    }
    Ok(commits)
}

pub fn load_commits_jsonl(path: &Path) -> Result<Vec<CommitRecord>> {
    parse_commits_jsonl(&std::fs::read_to_string(path)?)
}

fn validate_keys(members: &[RosterMember]) -> Result<HashMap<String, &str>> {
    let mut owner: HashMap<String, &str> = HashMap::new();
    for m in members {
        for key in &m.author_keys {
            let key = key.to_lowercase();
            if let Some(prev) = owner.get(&key) {
                if *prev != m.member_id {
                    return Err(Error::AmbiguousAuthor {
                        key,
                        first: prev.to_string(),
                        second: m.member_id.clone(),
                    });
                }
            }
            owner.insert(key, &m.member_id);
        }
    }
    Ok(owner)
}

/// Sets `author_id` on every commit whose author name or email matches a
/// member's author key (case-insensitively). Returns the updated commits and
/// the number left unmatched.
pub fn resolve_authors(
    commits: &[CommitRecord],
    roster: &[RosterMember],
) -> Result<(Vec<CommitRecord>, usize)> {
    let owner = validate_keys(roster)?;
    let mut unmatched = 0;
    let mut out = Vec::with_capacity(commits.len());
    for c in commits {
        let by_name = owner.get(&c.author_key.to_lowercase()).copied();
        let by_email = c.author_email.as_ref().and_then(|e| owner.get(&e.to_lowercase()).copied());
        let id = match (by_name, by_email) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::AmbiguousAuthor {
                    key: c.author_key.clone(),
                    first: a.to_string(),
                    second: b.to_string(),
                })
            }
            (a, b) => a.or(b),
        };
        let mut resolved = c.clone();
        match id {
            Some(id) => resolved.author_id = Some(id.to_string()),
            None => {
                resolved.author_id = None;
                unmatched += 1;
            }
        }
        out.push(resolved);
    }
    Ok((out, unmatched))
}

/// One roster CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterRow {
    pub team_id: String,
    pub project_id: String,
    pub member_id: String,
    pub exam1: f64,
    pub project1: f64,
    pub selected: bool,
    /// Semicolon-separated author keys.
    pub author_keys: String,
}

impl RosterRow {
    fn member(&self, line: usize) -> Result<RosterMember> {
        for (name, grade) in [("exam1", self.exam1), ("project1", self.project1)] {
            if !(0.0..=100.0).contains(&grade) {
                return Err(parse_error(line, format!("{name} grade {grade} outside [0, 100]")));
            }
        }
        let author_keys: Vec<String> = self
            .author_keys
            .split(';')
            .map(str::trim)
            .filter(|k| !k.is_empty())
            .map(String::from)
            .collect();
        if author_keys.is_empty() {
            return Err(parse_error(line, format!("member '{}' has no author keys", self.member_id)));
        }
        Ok(RosterMember {
            member_id: self.member_id.clone(),
            exam1_grade: self.exam1,
            project1_grade: self.project1,
            author_keys,
        })
    }
}

pub fn read_roster_csv<R: Read>(reader: R) -> Result<Vec<RosterRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for (idx, record) in rdr.deserialize().enumerate() {
        let row: RosterRow = record.map_err(|e| parse_error(idx + 2, e.to_string()))?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_roster_csv<W: Write>(writer: W, rows: &[RosterRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Teams assembled from a roster plus commits tagged with their team id.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamAssembly {
    pub teams: Vec<TeamRecord>,
    /// Commits whose author matched neither member; they are left out of
    /// the team's commit list.
    pub unmatched: usize,
    /// Commits whose team id is missing or absent from the roster.
    pub orphaned: usize,
}

/// Groups roster rows into two-member teams (sorted by team id) and attaches
/// each team's commits with authors resolved.
pub fn assemble_teams(rows: &[RosterRow], commits: &[CommitRecord]) -> Result<TeamAssembly> {
    let mut grouped: BTreeMap<&str, Vec<(usize, &RosterRow)>> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        grouped.entry(row.team_id.as_str()).or_default().push((i + 2, row));
    }

    let mut by_team: HashMap<&str, Vec<CommitRecord>> = HashMap::new();
    let mut orphaned = 0;
    for c in commits {
        match c.team_id.as_deref().filter(|t| grouped.contains_key(t)) {
            Some(t) => by_team.entry(t).or_default().push(c.clone()),
            None => orphaned += 1,
        }
    }

    let mut teams = Vec::with_capacity(grouped.len());
    let mut unmatched = 0;
    for (team_id, members) in grouped {
        if members.len() != 2 {
            return Err(Error::Roster(format!(
                "team {team_id} has {} members; only pairs are supported",
                members.len()
            )));
        }
        let (l0, r0) = members[0];
        let (l1, r1) = members[1];
        if r0.project_id != r1.project_id || r0.selected != r1.selected {
            return Err(Error::Roster(format!(
                "team {team_id}: members disagree on project or selection"
            )));
        }
        if r0.member_id == r1.member_id {
            return Err(Error::Roster(format!("team {team_id}: duplicate member {}", r0.member_id)));
        }
        let pair = [r0.member(l0)?, r1.member(l1)?];
        let raw = by_team.remove(team_id).unwrap_or_default();
        let (resolved, missed) = resolve_authors(&raw, &pair)?;
        if missed > 0 {
            log::warn!("team {team_id}: {missed} commits match neither member");
        }
        unmatched += missed;
        teams.push(TeamRecord {
            team_id: team_id.to_string(),
            project_id: r0.project_id.clone(),
            members: pair,
            selected: r0.selected,
            commits: resolved.into_iter().filter(|c| c.author_id.is_some()).collect(),
        });
    }
    Ok(TeamAssembly { teams, unmatched, orphaned })
}
