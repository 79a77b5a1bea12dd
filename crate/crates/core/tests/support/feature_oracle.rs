// SPDX-License-Identifier: Apache-2.0

//! Slow reference recount of every team feature. Each feature is recomputed
//! from its name with a fresh pass over the commits, sharing no code with
//! the extractor beyond the public data types.

#![allow(dead_code)]

use gitteams_core::commitcls::{CommitCategory, LabeledCommit};
use gitteams_core::ingest::TeamRecord;

fn scope_matches(scope: &str, category: CommitCategory) -> bool {
    scope == "whole" || category.name().to_lowercase() == scope
}

fn additions(l: &LabeledCommit) -> f64 {
    l.commit.files.iter().map(|f| f.additions as f64).sum()
}

fn deletions(l: &LabeledCommit) -> f64 {
    l.commit.files.iter().map(|f| f.deletions as f64).sum()
}

fn raw_metric(base: &str, l: &LabeledCommit) -> f64 {
    match base {
        "commits" => 1.0,
        "additions" => additions(l),
        "deletions" => deletions(l),
        "files_changed" => l.commit.files.len() as f64,
        "churn" => additions(l) + deletions(l),
        "msg_len" => l.commit.message.chars().count() as f64,
        other => panic!("unknown base metric {other}"),
    }
}

/// Member ids as (user0, user1): fewer added lines first, then fewer
/// commits, then the smaller id.
pub fn oracle_ordering(team: &TeamRecord, labeled: &[LabeledCommit]) -> (String, String) {
    let key = |id: &str| {
        let mine: Vec<&LabeledCommit> =
            labeled.iter().filter(|l| l.commit.author_id.as_deref() == Some(id)).collect();
        let adds: u64 = mine.iter().flat_map(|l| l.commit.files.iter()).map(|f| f.additions).sum();
        (adds, mine.len(), id.to_string())
    };
    let a = key(&team.members[0].member_id);
    let b = key(&team.members[1].member_id);
    if a <= b {
        (a.2, b.2)
    } else {
        (b.2, a.2)
    }
}

fn sum_for(labeled: &[LabeledCommit], user: Option<&str>, scope: &str, base: &str) -> f64 {
    let mut total = 0.0;
    for l in labeled {
        let by_user = user.is_none_or(|u| l.commit.author_id.as_deref() == Some(u));
        if by_user && scope_matches(scope, l.category) {
            total += raw_metric(base, l);
        }
    }
    total
}

fn div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Value of one named feature.
pub fn oracle_feature(name: &str, team: &TeamRecord, labeled: &[LabeledCommit]) -> f64 {
    let (u0, u1) = oracle_ordering(team, labeled);
    let member = |id: &str| team.members.iter().find(|m| m.member_id == id).unwrap().clone();
    let pairs = |id: Option<&str>| {
        labeled
            .iter()
            .filter(|l| l.pair_programming && id.is_none_or(|u| l.commit.author_id.as_deref() == Some(u)))
            .count() as f64
    };
    let risk = |g: f64| if g < 60.0 { 1.0 } else { 0.0 };
    match name {
        "u0_pair_commits" => return pairs(Some(&u0)),
        "u1_pair_commits" => return pairs(Some(&u1)),
        "team_pair_commits" => return pairs(None),
        "u0_exam1" => return member(&u0).exam1_grade,
        "u0_project1" => return member(&u0).project1_grade,
        "u1_exam1" => return member(&u1).exam1_grade,
        "u1_project1" => return member(&u1).project1_grade,
        "u0_risk_exam1" => return risk(member(&u0).exam1_grade),
        "u0_risk_project1" => return risk(member(&u0).project1_grade),
        "u1_risk_exam1" => return risk(member(&u1).exam1_grade),
        "u1_risk_project1" => return risk(member(&u1).project1_grade),
        "team_any_risk" => {
            let grades = [member(&u0), member(&u1)]
                .iter()
                .flat_map(|m| [m.exam1_grade, m.project1_grade])
                .collect::<Vec<_>>();
            return if grades.iter().any(|&g| g < 60.0) { 1.0 } else { 0.0 };
        }
        "team_selected" => return if team.selected { 1.0 } else { 0.0 },
        _ => {}
    }

    let (user, rest) = name.split_at(2);
    let user = match user {
        "u0" => u0.as_str(),
        "u1" => u1.as_str(),
        _ => panic!("unparseable feature {name}"),
    };
    let rest = &rest[1..];
    let cut = rest.rfind('_').unwrap();
    let (metric, scope) = (&rest[..cut], &rest[cut + 1..]);

    if let Some(base) = metric.strip_suffix("_share") {
        let base = if base == "commit" { "commits" } else { base };
        return div(sum_for(labeled, Some(user), scope, base), sum_for(labeled, None, scope, base));
    }
    if let Some(base) = metric.strip_prefix("avg_") {
        return div(sum_for(labeled, Some(user), scope, base), sum_for(labeled, Some(user), scope, "commits"));
    }
    match metric {
        "msg_len_total" => sum_for(labeled, Some(user), scope, "msg_len"),
        "msg_len_avg" => div(sum_for(labeled, Some(user), scope, "msg_len"), sum_for(labeled, Some(user), scope, "commits")),
        base => sum_for(labeled, Some(user), scope, base),
    }
}

/// Every registry feature, in the order of `names`.
pub fn oracle_vector(names: &[String], team: &TeamRecord, labeled: &[LabeledCommit]) -> Vec<f64> {
    names.iter().map(|n| oracle_feature(n, team, labeled)).collect()
}

/// True for features that are counts or sums, which must match exactly.
pub fn is_count(name: &str) -> bool {
    !(name.contains("avg") || name.contains("share"))
}
