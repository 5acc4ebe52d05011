//! Naive Bayes decision support for software staffing.
//!
//! The pipeline: load and clean personnel records ([`data`]), train a
//! naive Bayes model ([`classifier`]), read it back as rules and attribute
//! rankings ([`insight`]), measure it ([`evaluation`]) and use it to rank
//! candidates and propose teams ([`staffing`]). [`synthgen`] produces data from
//! a known naive Bayes generative model. Use it to check the whole pipeline
//! against exact answers.

pub mod canonical;
pub mod classifier;
pub mod data;
mod error;
pub mod evaluation;
pub mod insight;
pub mod rng;
pub mod staffing;
pub mod synthgen;

pub use classifier::{
    deserialize, fingerprint, predict, serialize, train, GaussianParams, NaiveBayesModel,
    Prediction, TrainConfig, Trainer,
};
pub use data::{
    load_dataset, parse_schema, stratified_folds, AttributeKind, AttributeSchema, AttributeSpec,
    CleaningReport, Dataset, FoldAssignment, Instance, Value,
};
pub use error::{Error, Result};
pub use evaluation::{cross_validate, evaluate, ConfusionMatrix, EvaluationReport};
pub use insight::{
    attribute_influence, extract_rules, model_influence, what_if, InfluenceRanking, Rule,
    WhatIfResult,
};
pub use staffing::{load_pool, rank_candidates, recommend_team, Candidate, TeamRecommendation};
pub use synthgen::{bayes_optimal_accuracy, generate, random_spec, GenerativeSpec};
