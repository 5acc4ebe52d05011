//! Ranking a candidate pool and proposing a team.
//!
//! A team is the top `team_size` candidates by the model's posterior for a
//! chosen target class, optionally cut at an absolute threshold. Scores are
//! model conditionals, not causal or fairness-audited judgements.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::Serialize;

use crate::classifier::{predict, NaiveBayesModel};
use crate::data::{load_pool_rows, AttributeSchema, CleaningReport, Instance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: String,
    pub instance: Instance,
}

impl Candidate {
    pub fn new(id: impl Into<String>, instance: Instance) -> Self {
        Self {
            id: id.into(),
            instance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCandidate {
    pub id: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeamRecommendation {
    /// Sorted by descending probability, ties by ascending id.
    pub members: Vec<RankedCandidate>,
    pub target_class: String,
    pub team_size: usize,
    /// Fewer members than `team_size`, because the pool was small or the
    /// threshold excluded candidates.
    pub undersized: bool,
    /// Candidates that ranked inside the team but fell below the threshold.
    pub excluded_by_threshold: usize,
    pub threshold: Option<f64>,
}

/// Load a pool CSV (leading `id` column, no class column) and reject
/// duplicate ids.
pub fn load_pool(csv_text: &str, schema: &AttributeSchema) -> Result<(Vec<Candidate>, CleaningReport)> {
    let (rows, report) = load_pool_rows(csv_text, schema)?;
    let pool: Vec<Candidate> = rows
        .into_iter()
        .map(|(id, instance)| Candidate::new(id, instance))
        .collect();
    check_unique_ids(&pool)?;
    Ok((pool, report))
}

fn check_unique_ids(pool: &[Candidate]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for c in pool {
        if c.id.is_empty() {
            return Err(Error::InvalidValue {
                attribute: "id".into(),
                message: "candidate id must be non-empty".into(),
            });
        }
        if !seen.insert(c.id.as_str()) {
            return Err(Error::DuplicateId(c.id.clone()));
        }
    }
    Ok(())
}

fn ranking_order(a: &RankedCandidate, b: &RankedCandidate) -> Ordering {
    b.probability
        .total_cmp(&a.probability)
        .then_with(|| a.id.cmp(&b.id))
}

/// Score every candidate by its posterior for `target_class`, best first.
pub fn rank_candidates(
    model: &NaiveBayesModel,
    pool: &[Candidate],
    target_class: &str,
) -> Result<Vec<RankedCandidate>> {
    let target = model
        .schema()
        .class_index(target_class)
        .ok_or_else(|| Error::UnknownClass(target_class.to_string()))?;
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    check_unique_ids(pool)?;
    let mut ranked = pool
        .iter()
        .map(|c| {
            let instance = c.instance.unlabeled();
            Ok(RankedCandidate {
                id: c.id.clone(),
                probability: predict(model, &instance)?.posterior[target],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(ranking_order);
    Ok(ranked)
}

/// Top `team_size` of [`rank_candidates`]. `target_class` defaults to the
/// first declared label. With a threshold, members scoring below it are
/// dropped even if that leaves the team undersized.
pub fn recommend_team(
    model: &NaiveBayesModel,
    pool: &[Candidate],
    team_size: usize,
    target_class: Option<&str>,
    threshold: Option<f64>,
) -> Result<TeamRecommendation> {
    if team_size == 0 {
        return Err(Error::InvalidTeamSize);
    }
    if let Some(t) = threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidThreshold(t));
        }
    }
    let target = target_class.unwrap_or(&model.schema().class_labels()[0]);
    let mut members = rank_candidates(model, pool, target)?;
    members.truncate(team_size);
    let mut excluded = 0;
    if let Some(t) = threshold {
        let before = members.len();
        members.retain(|m| m.probability >= t);
        excluded = before - members.len();
    }
    Ok(TeamRecommendation {
        undersized: members.len() < team_size,
        members,
        target_class: target.to_string(),
        team_size,
        excluded_by_threshold: excluded,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{train, TrainConfig};
    use crate::data::{load_dataset, parse_schema};
    use approx::assert_abs_diff_eq;

    fn schema() -> AttributeSchema {
        parse_schema(include_str!("../../../fixtures/ds6.schema.json")).unwrap()
    }

    fn model() -> NaiveBayesModel {
        let ds = load_dataset(include_str!("../../../fixtures/ds6.csv"), &schema(), true).unwrap();
        train(&ds, TrainConfig::default()).unwrap()
    }

    fn ds6_pool() -> Vec<Candidate> {
        load_pool(include_str!("../../../fixtures/ds6_pool.csv"), &schema())
            .unwrap()
            .0
    }

    #[test]
    fn ds6_pool_ranking() {
        let ranked = rank_candidates(&model(), &ds6_pool(), "good").unwrap();
        assert_eq!(ranked[0].id, "P1");
        assert_abs_diff_eq!(ranked[0].probability, 64.0 / 91.0, epsilon = 1e-12);
        assert_eq!(ranked[1].id, "P2");
        assert_abs_diff_eq!(ranked[1].probability, 32.0 / 113.0, epsilon = 1e-12);
    }

    #[test]
    fn ties_break_by_id() {
        let x = Instance::new().with("skill", "high");
        let pool = vec![Candidate::new("b", x.clone()), Candidate::new("a", x)];
        let ranked = rank_candidates(&model(), &pool, "good").unwrap();
        assert_eq!(ranked[0].id, "a");
        assert_eq!(ranked[0].probability, ranked[1].probability);
    }

    fn three_pool() -> Vec<Candidate> {
        // good posteriors: c1 = 16/19, c2 = 32/113, c3 = 64/91.
        vec![
            Candidate::new("c1", Instance::new().with("skill", "high").with("experience", "senior")),
            Candidate::new("c2", Instance::new().with("skill", "low").with("experience", "junior")),
            Candidate::new("c3", Instance::new().with("skill", "high").with("experience", "junior")),
        ]
    }

    #[test]
    fn top_k_and_threshold() {
        let m = model();
        let team = recommend_team(&m, &three_pool(), 2, None, None).unwrap();
        let ids: Vec<&str> = team.members.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["c1", "c3"]);
        assert_eq!(team.target_class, "good");
        assert!(!team.undersized);

        let team = recommend_team(&m, &three_pool(), 2, None, Some(0.8)).unwrap();
        assert_eq!(team.members.len(), 1);
        assert!(team.undersized);
        assert_eq!(team.excluded_by_threshold, 1);

        let team = recommend_team(&m, &three_pool(), 10, Some("poor"), None).unwrap();
        let ids: Vec<&str> = team.members.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["c2", "c3", "c1"]);
        assert!(team.undersized);
    }

    #[test]
    fn errors() {
        let m = model();
        assert_eq!(
            rank_candidates(&m, &three_pool(), "great").unwrap_err(),
            Error::UnknownClass("great".into())
        );
        assert_eq!(rank_candidates(&m, &[], "good").unwrap_err(), Error::EmptyPool);
        let mut dup = three_pool();
        dup[2].id = "c1".into();
        assert_eq!(
            recommend_team(&m, &dup, 1, None, None).unwrap_err(),
            Error::DuplicateId("c1".into())
        );
        assert_eq!(
            recommend_team(&m, &three_pool(), 0, None, None).unwrap_err(),
            Error::InvalidTeamSize
        );
        assert_eq!(
            recommend_team(&m, &three_pool(), 1, None, Some(1.5)).unwrap_err(),
            Error::InvalidThreshold(1.5)
        );
        let csv = "id,skill,experience\nA,high,junior\nA,low,junior\n";
        assert_eq!(load_pool(csv, &schema()).unwrap_err(), Error::DuplicateId("A".into()));
    }

    #[test]
    fn json_shape() {
        let team = recommend_team(&model(), &ds6_pool(), 1, None, None).unwrap();
        let text = crate::canonical::to_canonical_string(&team);
        assert_eq!(
            text,
            r#"{"excluded_by_threshold":0,"members":[{"id":"P1","probability":0.7032967032967032}],"target_class":"good","team_size":1,"threshold":null,"undersized":false}"#
        );
    }
}
