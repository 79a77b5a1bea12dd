// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic corpora: two-member teams with commit streams, template
//! messages, true commit categories and intended team styles.
//!
//! Each team is drawn from its own RNG stream, so a corpus is a pure function
//! of the config. After drawing, a team is re-labeled with
//! [`oracle_label`]; a mismatch with the intended style triggers a redraw.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gitteams_ml::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::commitcls::{detect_pair_programming, write_tagged_csv, CommitCategory, LabeledCommit};
use crate::error::{Error, Result};
use crate::ingest::{write_commits_jsonl, write_roster_csv, CommitRecord, FileStat, RosterMember, RosterRow, TeamRecord};
use crate::teamfeat::LabeledTeam;
use crate::teamstyle::{oracle_label, write_styles_csv, OracleConfig, TeamStyle};
use crate::textnorm::tokenize;

const BUNDLED_TEMPLATES: [(CommitCategory, &str); 7] = [
    (CommitCategory::Implementation, include_str!("../data/templates/implementation.txt")),
    (CommitCategory::Test, include_str!("../data/templates/test.txt")),
    (CommitCategory::Bugfix, include_str!("../data/templates/bugfix.txt")),
    (CommitCategory::Documentation, include_str!("../data/templates/documentation.txt")),
    (CommitCategory::Style, include_str!("../data/templates/style.txt")),
    (CommitCategory::Merge, include_str!("../data/templates/merge.txt")),
    (CommitCategory::Other, include_str!("../data/templates/other.txt")),
];
const BUNDLED_SLOTS: &str = include_str!("../data/templates/slots.txt");

/// First commit timestamp (2015-10-01T00:00:00Z).
pub const EPOCH_START: i64 = 1_443_657_600;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub seed: u64,
    pub n_teams: usize,
    /// Collaborative, Cooperative, SoloSubmit.
    pub style_mix: [f64; 3],
    /// Inclusive range.
    pub commits_per_team: [usize; 2],
    /// Relative category weights in `CommitCategory::ALL` order.
    pub category_mix: [f64; 7],
    /// Inclusive churn range per category, `CommitCategory::ALL` order.
    /// A zero upper bound yields commits without file changes.
    pub churn: [[u64; 2]; 7],
    /// Probability that a message is perturbed.
    pub noise_rate: f64,
    /// Probability that an Implementation/Test/Bugfix message notes pair
    /// programming.
    pub pair_rate: f64,
    /// Share of a part's commits the non-owner still makes in cooperative
    /// teams, and of all commits the minor member makes in solo teams.
    pub minor_share: f64,
    pub max_retries: usize,
    /// Directory with replacement template files (same names as the bundled
    /// ones); missing files fall back to the bundled pools.
    pub templates_dir: Option<PathBuf>,
    pub oracle: OracleConfig,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            n_teams: 100,
            style_mix: [0.57, 0.29, 0.14],
            commits_per_team: [30, 80],
            category_mix: [0.33, 0.15, 0.29, 0.03, 0.04, 0.03, 0.11],
            churn: [[20, 200], [10, 120], [5, 60], [5, 60], [2, 40], [0, 0], [1, 30]],
            noise_rate: 0.1,
            pair_rate: 0.05,
            minor_share: 0.05,
            max_retries: 50,
            templates_dir: None,
            oracle: OracleConfig::default(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_teams == 0 {
            return bad("n_teams must be positive".into());
        }
        if self.style_mix.iter().any(|&w| !(w >= 0.0)) || (self.style_mix.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad(format!("style_mix {:?} must be non-negative and sum to 1", self.style_mix));
        }
        if self.category_mix.iter().any(|&w| !(w >= 0.0)) || self.category_mix.iter().sum::<f64>() <= 0.0 {
            return bad("category_mix must be non-negative with a positive sum".into());
        }
        let [lo, hi] = self.commits_per_team;
        if lo == 0 || lo > hi {
            return bad(format!("commits_per_team [{lo}, {hi}] must be a non-empty positive range"));
        }
        if let Some(r) = self.churn.iter().find(|r| r[0] > r[1]) {
            return bad(format!("churn range {r:?} is empty"));
        }
        for (name, p) in [("noise_rate", self.noise_rate), ("pair_rate", self.pair_rate), ("minor_share", self.minor_share)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if self.max_retries == 0 {
            return bad("max_retries must be positive".into());
        }
        Ok(())
    }
}

/// Message templates per category plus slot fillers for `{name}` holes.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplatePools {
    pub templates: BTreeMap<CommitCategory, Vec<String>>,
    pub slots: BTreeMap<String, Vec<String>>,
}

fn template_file(c: CommitCategory) -> &'static str {
    match c {
        CommitCategory::Implementation => "implementation.txt",
        CommitCategory::Test => "test.txt",
        CommitCategory::Bugfix => "bugfix.txt",
        CommitCategory::Documentation => "documentation.txt",
        CommitCategory::Style => "style.txt",
        CommitCategory::Merge => "merge.txt",
        CommitCategory::Other => "other.txt",
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn holes(template: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        match rest[open..].find('}') {
            Some(close) => {
                out.push(&rest[open + 1..open + close]);
                rest = &rest[open + close + 1..];
            }
            None => break,
        }
    }
    out
}

impl TemplatePools {
    pub fn bundled() -> Self {
        Self::from_texts(BUNDLED_TEMPLATES.iter().map(|&(c, t)| (c, t.to_string())), BUNDLED_SLOTS)
            .expect("bundled templates are well formed")
    }

    pub fn from_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str, fallback: &str| -> Result<String> {
            let p = dir.join(name);
            Ok(if p.exists() { fs::read_to_string(p)? } else { fallback.to_string() })
        };
        let mut texts = Vec::new();
        for (c, fallback) in BUNDLED_TEMPLATES {
            texts.push((c, read(template_file(c), fallback)?));
        }
        Self::from_texts(texts.into_iter(), &read("slots.txt", BUNDLED_SLOTS)?)
    }

    fn from_texts(texts: impl Iterator<Item = (CommitCategory, String)>, slots: &str) -> Result<Self> {
        let slots: BTreeMap<String, Vec<String>> = content_lines(slots)
            .filter_map(|l| {
                let (name, fill) = l.split_once(':')?;
                Some((name.trim().to_string(), fill.split_whitespace().map(String::from).collect()))
            })
            .collect();
        let mut templates = BTreeMap::new();
        for (c, text) in texts {
            let pool: Vec<String> = content_lines(&text).map(String::from).collect();
            if pool.is_empty() {
                return Err(Error::Config(format!("no templates for {c}")));
            }
            for t in &pool {
                if let Some(h) = holes(t).into_iter().find(|h| slots.get(*h).is_none_or(Vec::is_empty)) {
                    return Err(Error::Config(format!("template '{t}' uses unknown slot '{h}'")));
                }
            }
            templates.insert(c, pool);
        }
        Ok(Self { templates, slots })
    }

    fn fill(&self, template: &str, rng: &mut ChaCha8Rng) -> String {
        let mut out = String::with_capacity(template.len() + 16);
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            let Some(close) = rest[open..].find('}') else { break };
            out.push_str(&rest[..open]);
            let fillers = &self.slots[&rest[open + 1..open + close]];
            out.push_str(fillers.choose(rng).expect("non-empty slot"));
            rest = &rest[open + close + 1..];
        }
        out.push_str(rest);
        out
    }

    pub fn message(&self, category: CommitCategory, rng: &mut ChaCha8Rng) -> String {
        let template = self.templates[&category].choose(rng).expect("non-empty pool");
        self.fill(template, rng)
    }
}

/// Token-level perturbation: drop, swap, duplicate, recase, or punctuate.
/// It never introduces new words, so gibberish stays gibberish.
fn perturb(message: &str, rng: &mut ChaCha8Rng) -> String {
    let mut tokens: Vec<String> = message.split_whitespace().map(String::from).collect();
    if tokens.is_empty() {
        return message.to_string();
    }
    let n = tokens.len();
    match rng.gen_range(0..5) {
        0 if n > 1 => {
            tokens.remove(rng.gen_range(0..n));
        }
        1 if n > 1 => {
            let i = rng.gen_range(0..n - 1);
            tokens.swap(i, i + 1);
        }
        2 => {
            let i = rng.gen_range(0..n);
            let t = tokens[i].clone();
            tokens.insert(i, t);
        }
        3 => {
            let i = rng.gen_range(0..n);
            tokens[i] = if rng.gen_bool(0.5) { tokens[i].to_uppercase() } else { tokens[i].to_lowercase() };
        }
        _ => {
            let mark = *["!", ".", "...", "!!", " :)"].choose(rng).expect("marks");
            tokens.last_mut().expect("non-empty").push_str(mark);
        }
    }
    tokens.join(" ")
}

fn sample_weighted(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Largest-remainder apportionment of `n` items; ties go to the earlier
/// entry.
pub fn apportion(mix: &[f64], n: usize) -> Vec<usize> {
    let exact: Vec<f64> = mix.iter().map(|w| w * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..mix.len()).collect();
    order.sort_by(|&a, &b| {
        // rounded so that representation error cannot break a tie
        let frac = |i: usize| ((exact[i] - exact[i].floor()) * 1e9).round();
        frac(b).total_cmp(&frac(a)).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// `(team_id, sha, category)` in corpus order.
    pub commit_categories: Vec<(String, String, CommitCategory)>,
    pub team_styles: Vec<(String, TeamStyle)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    /// Teams with resolved authors, sorted by id.
    pub teams: Vec<TeamRecord>,
    pub roster: Vec<RosterRow>,
    pub truth: GroundTruth,
    /// True labels per team, aligned with `teams`.
    pub labeled: Vec<Vec<LabeledCommit>>,
}

impl SyntheticCorpus {
    /// All commits in team order, with authors left unresolved as a raw
    /// export would have them.
    pub fn raw_commits(&self) -> Vec<CommitRecord> {
        self.teams
            .iter()
            .flat_map(|t| t.commits.iter())
            .map(|c| CommitRecord { author_id: None, ..c.clone() })
            .collect()
    }

    pub fn labeled_teams(&self) -> Vec<LabeledTeam> {
        self.teams
            .iter()
            .zip(&self.labeled)
            .map(|(t, l)| LabeledTeam { team: t.clone(), commits: l.clone() })
            .collect()
    }

    /// `(message, category)` for every commit.
    pub fn tagged(&self) -> Vec<(String, CommitCategory)> {
        self.labeled.iter().flatten().map(|l| (l.commit.message.clone(), l.category)).collect()
    }

    pub fn commit_count(&self) -> usize {
        self.labeled.iter().map(Vec::len).sum()
    }

    /// Writes `commits.jsonl`, `roster.csv`, `truth_commits.csv`,
    /// `truth_teams.csv` and `tagged.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_commits_jsonl(fs::File::create(dir.join("commits.jsonl"))?, &self.raw_commits())?;
        write_roster_csv(fs::File::create(dir.join("roster.csv"))?, &self.roster)?;
        let mut w = csv::Writer::from_path(dir.join("truth_commits.csv"))?;
        w.write_record(["sha", "category"])?;
        for (_, sha, c) in &self.truth.commit_categories {
            w.write_record([sha.as_str(), c.name()])?;
        }
        w.flush()?;
        write_styles_csv(fs::File::create(dir.join("truth_teams.csv"))?, &self.truth.team_styles)?;
        write_tagged_csv(fs::File::create(dir.join("tagged.csv"))?, &self.tagged())?;
        Ok(())
    }
}

struct TeamDraft {
    team: TeamRecord,
    labeled: Vec<LabeledCommit>,
}

fn random_sha(rng: &mut ChaCha8Rng) -> String {
    (0..5).map(|_| format!("{:08x}", rng.gen::<u32>())).collect()
}

fn draw_churn(range: [u64; 2], rng: &mut ChaCha8Rng) -> Vec<FileStat> {
    let churn = rng.gen_range(range[0]..=range[1]);
    if churn == 0 {
        return Vec::new();
    }
    let n_files = rng.gen_range(1..=churn.min(4));
    let mut remaining = churn;
    (0..n_files)
        .map(|i| {
            let lines = if i + 1 == n_files { remaining } else { rng.gen_range(1..=remaining - (n_files - 1 - i)) };
            remaining -= lines;
            let additions = ((lines as f64) * rng.gen_range(0.5..=1.0)).round() as u64;
            FileStat {
                path: format!("src/file{}.java", rng.gen_range(0..40)),
                additions,
                deletions: lines - additions,
                binary: false,
            }
        })
        .collect()
}

const RUBRIC: [CommitCategory; 5] = crate::teamstyle::RUBRIC_PARTS;

/// Author slot (0 = member a, 1 = member b) for one commit.
fn pick_author(
    style: TeamStyle,
    category: CommitCategory,
    owner_of: &[usize; 7],
    minor: f64,
    lean: f64,
    rng: &mut ChaCha8Rng,
) -> usize {
    match style {
        TeamStyle::Collaborative => usize::from(!rng.gen_bool(lean)),
        TeamStyle::Cooperative => {
            let slot = CommitCategory::ALL.iter().position(|&c| c == category).expect("category");
            if !RUBRIC.contains(&category) {
                rng.gen_range(0..2)
            } else if rng.gen_bool(minor) {
                1 - owner_of[slot]
            } else {
                owner_of[slot]
            }
        }
        // member b submits nearly everything
        TeamStyle::SoloSubmit => usize::from(!rng.gen_bool(minor)),
    }
}

fn draw_team(
    config: &GenConfig,
    pools: &TemplatePools,
    index: usize,
    style: TeamStyle,
    rng: &mut ChaCha8Rng,
) -> TeamDraft {
    let team_id = format!("T{:03}", index + 1);
    let people: Vec<(String, String, String)> = ["a", "b"]
        .iter()
        .map(|s| {
            let name = format!("student{:03}{s}", index + 1);
            (format!("{team_id}-{s}"), name.clone(), format!("{name}@example.edu"))
        })
        .collect();
    let members: [RosterMember; 2] = std::array::from_fn(|i| RosterMember {
        member_id: people[i].0.clone(),
        exam1_grade: rng.gen_range(40..=100) as f64,
        project1_grade: rng.gen_range(40..=100) as f64,
        author_keys: vec![people[i].1.clone(), people[i].2.clone()],
    });

    // Cooperative ownership: split the rubric parts into two non-empty groups.
    let mut owner_of = [0usize; 7];
    if style == TeamStyle::Cooperative {
        let mut parts = RUBRIC.to_vec();
        parts.shuffle(rng);
        let cut = rng.gen_range(1..parts.len());
        for (i, p) in parts.iter().enumerate() {
            let slot = CommitCategory::ALL.iter().position(|c| c == p).expect("category");
            owner_of[slot] = usize::from(i >= cut);
        }
    }

    // How often member a authors a commit in a collaborative team.
    let lean = rng.gen_range(0.3..=0.7);
    let n = rng.gen_range(config.commits_per_team[0]..=config.commits_per_team[1]);
    let mut ts = EPOCH_START;
    let mut commits = Vec::with_capacity(n);
    let mut labeled = Vec::with_capacity(n);
    for _ in 0..n {
        let cat_slot = sample_weighted(&config.category_mix, rng);
        let category = CommitCategory::ALL[cat_slot];
        let author = pick_author(style, category, &owner_of, config.minor_share, lean, rng);
        let mut message = pools.message(category, rng);
        if CommitCategory::ML.contains(&category) && rng.gen_bool(config.pair_rate) {
            message.push_str(" (pair)");
        }
        if rng.gen_bool(config.noise_rate) {
            message = perturb(&message, rng);
        }
        ts += rng.gen_range(60..=7200);
        let files = draw_churn(config.churn[cat_slot], rng);
        let (_, name, email) = &people[author];
        let commit = CommitRecord {
            sha: random_sha(rng),
            author_key: if rng.gen_bool(0.2) { name.to_uppercase() } else { name.clone() },
            author_email: Some(email.clone()),
            author_id: Some(members[author].member_id.clone()),
            team_id: Some(team_id.clone()),
            timestamp: ts,
            is_merge_shape: files.is_empty() && message.starts_with("Merge "),
            message,
            files,
        };
        let pair_programming = detect_pair_programming(&tokenize(&commit.message));
        labeled.push(LabeledCommit { commit: commit.clone(), category, pair_programming });
        commits.push(commit);
    }

    TeamDraft {
        team: TeamRecord {
            team_id,
            project_id: format!("P{}", index % 4 + 1),
            members,
            selected: rng.gen_bool(0.5),
            commits,
        },
        labeled,
    }
}

/// Draws a corpus. Teams whose oracle label disagrees with their intended
/// style are redrawn up to `max_retries` times.
pub fn generate_corpus(config: &GenConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let pools = match &config.templates_dir {
        Some(dir) => TemplatePools::from_dir(dir)?,
        None => TemplatePools::bundled(),
    };

    let counts = apportion(&config.style_mix, config.n_teams);
    let mut styles: Vec<TeamStyle> = TeamStyle::ALL
        .iter()
        .zip(&counts)
        .flat_map(|(&s, &c)| std::iter::repeat_n(s, c))
        .collect();
    styles.shuffle(&mut rng::stream(config.seed, &[0]));

    let mut teams = Vec::with_capacity(config.n_teams);
    let mut labeled = Vec::with_capacity(config.n_teams);
    let mut truth = GroundTruth { commit_categories: Vec::new(), team_styles: Vec::new() };
    for (index, &style) in styles.iter().enumerate() {
        let mut accepted = None;
        for attempt in 0..config.max_retries {
            let mut rng = rng::stream(config.seed, &[1, index as u64, attempt as u64]);
            let draft = draw_team(config, &pools, index, style, &mut rng);
            match oracle_label(&draft.team, &draft.labeled, &config.oracle) {
                Ok(s) if s == style => {
                    accepted = Some(draft);
                    break;
                }
                _ => log::debug!("team {index}: attempt {attempt} missed {style}"),
            }
        }
        let draft = accepted.ok_or_else(|| {
            Error::Generation(format!(
                "team {} could not be drawn as {style} in {} attempts",
                index + 1,
                config.max_retries
            ))
        })?;
        for l in &draft.labeled {
            truth.commit_categories.push((draft.team.team_id.clone(), l.commit.sha.clone(), l.category));
        }
        truth.team_styles.push((draft.team.team_id.clone(), style));
        teams.push(draft.team);
        labeled.push(draft.labeled);
    }

    let roster = teams
        .iter()
        .flat_map(|t| {
            t.members.iter().map(move |m| RosterRow {
                team_id: t.team_id.clone(),
                project_id: t.project_id.clone(),
                member_id: m.member_id.clone(),
                exam1: m.exam1_grade,
                project1: m.project1_grade,
                selected: t.selected,
                author_keys: m.author_keys.join(";"),
            })
        })
        .collect();

    Ok(SyntheticCorpus { teams, roster, truth, labeled })
}
