//! Request handling as a pure function of a model snapshot and a request.
//!
//! Every body, success or error, is canonical JSON (sorted keys, shortest
//! round-trip reals) carrying the snapshot's `fingerprint`, so a replayed
//! request yields identical bytes while the model is unchanged.

use serde::Deserialize;
use serde_json::{json, Value as Json};
use talentbayes::canonical::canonical_value;
use talentbayes::data::{instance_from_json, value_from_json};
use talentbayes::insight::model_influence;
use talentbayes::staffing::Candidate;
use talentbayes::{
    extract_rules, fingerprint, predict, recommend_team, what_if, Error, Instance,
    NaiveBayesModel,
};

pub const API_PREFIX: &str = "/api/v1";

/// An immutable model together with its fingerprint.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedModel {
    model: NaiveBayesModel,
    fingerprint: String,
}

impl LoadedModel {
    pub fn new(model: NaiveBayesModel) -> Self {
        let fingerprint = fingerprint(&model);
        Self { model, fingerprint }
    }

    pub fn model(&self) -> &NaiveBayesModel {
        &self.model
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiResponse {
    pub status: u16,
    pub body: String,
}

impl ApiResponse {
    fn ok(snapshot: &LoadedModel, key: &str, payload: Json) -> Self {
        let mut doc = serde_json::Map::new();
        doc.insert("fingerprint".into(), Json::String(snapshot.fingerprint.clone()));
        doc.insert(key.into(), payload);
        Self {
            status: 200,
            body: canonical_value(&Json::Object(doc)),
        }
    }

    fn error(snapshot: &LoadedModel, status: u16, code: &str, message: String) -> Self {
        let doc = json!({
            "error": {"code": code, "message": message},
            "fingerprint": snapshot.fingerprint,
        });
        Self {
            status,
            body: canonical_value(&doc),
        }
    }

    fn from_error(snapshot: &LoadedModel, e: &Error) -> Self {
        Self::error(snapshot, status_of(e), e.code(), e.to_string())
    }
}

/// HTTP status for a library error: 400 for malformed or schema-violating
/// input, 422 for well-formed requests that make no sense for the model,
/// 500 for anything else.
pub fn status_of(e: &Error) -> u16 {
    match e {
        Error::MalformedInput(_)
        | Error::UnknownAttribute(_)
        | Error::KindMismatch { .. }
        | Error::InvalidValue { .. } => 400,
        Error::UnknownClass(_)
        | Error::DuplicateId(_)
        | Error::EmptyPool
        | Error::InvalidTeamSize
        | Error::InvalidThreshold(_) => 422,
        _ => 500,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictRequest {
    instance: Json,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIfRequest {
    instance: Json,
    attribute: String,
    value: Json,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolEntry {
    id: String,
    instance: Json,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecommendRequest {
    pool: Vec<PoolEntry>,
    team_size: usize,
    #[serde(default)]
    target: Option<String>,
    #[serde(default)]
    threshold: Option<f64>,
}

enum Failure {
    Body(String),
    Library(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

fn parse_body<'a, T: Deserialize<'a>>(body: &'a [u8]) -> Result<T, Failure> {
    serde_json::from_slice(body).map_err(|e| Failure::Body(e.to_string()))
}

fn to_json<T: serde::Serialize>(value: &T) -> Json {
    serde_json::to_value(value).expect("library documents serialize")
}

fn instance_of(model: &NaiveBayesModel, json: &Json) -> Result<Instance, Error> {
    Ok(instance_from_json(model.schema(), json)?.unlabeled())
}

fn run_predict(model: &NaiveBayesModel, body: &[u8]) -> Result<Json, Failure> {
    let req: PredictRequest = parse_body(body)?;
    let instance = instance_of(model, &req.instance)?;
    Ok(to_json(&predict(model, &instance)?))
}

fn run_whatif(model: &NaiveBayesModel, body: &[u8]) -> Result<Json, Failure> {
    let req: WhatIfRequest = parse_body(body)?;
    let instance = instance_of(model, &req.instance)?;
    let spec = model
        .schema()
        .attribute(&req.attribute)
        .ok_or_else(|| Error::UnknownAttribute(req.attribute.clone()))?;
    let value = value_from_json(spec, &req.value)?;
    Ok(to_json(&what_if(model, &instance, &req.attribute, value)?))
}

fn run_recommend(model: &NaiveBayesModel, body: &[u8]) -> Result<Json, Failure> {
    let req: RecommendRequest = parse_body(body)?;
    let pool = req
        .pool
        .iter()
        .map(|e| Ok(Candidate::new(e.id.clone(), instance_of(model, &e.instance)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let team = recommend_team(model, &pool, req.team_size, req.target.as_deref(), req.threshold)?;
    Ok(to_json(&team))
}

/// Schema, priors and observed vocabularies: what a client needs to build
/// input forms.
pub fn model_summary(model: &NaiveBayesModel) -> Json {
    let labels = model.schema().class_labels();
    let priors: serde_json::Map<String, Json> = labels
        .iter()
        .zip(model.priors())
        .map(|(l, p)| (l.clone(), json!(p)))
        .collect();
    let class_counts: serde_json::Map<String, Json> = labels
        .iter()
        .zip(model.class_counts())
        .map(|(l, c)| (l.clone(), json!(c)))
        .collect();
    let vocabulary: serde_json::Map<String, Json> = model
        .schema()
        .attributes()
        .iter()
        .filter_map(|a| Some((a.name.clone(), json!(model.vocabulary(&a.name)?))))
        .collect();
    json!({
        "class_counts": class_counts,
        "config": to_json(model.config()),
        "n": model.n(),
        "priors": priors,
        "schema": to_json(model.schema()),
        "vocabulary": vocabulary,
    })
}

type Handler = fn(&NaiveBayesModel, &[u8]) -> Result<Json, Failure>;

enum Route {
    Get(&'static str, fn(&NaiveBayesModel) -> Json),
    Post(&'static str, Handler),
}

fn route_of(path: &str) -> Option<Route> {
    let route = match path.strip_prefix(API_PREFIX)? {
        "/model" => Route::Get("model", model_summary),
        "/rules" => Route::Get("rules", |m| to_json(&extract_rules(m))),
        "/influence" => Route::Get("influence", |m| to_json(&model_influence(m))),
        "/predict" => Route::Post("prediction", run_predict),
        "/whatif" => Route::Post("whatif", run_whatif),
        "/recommend" => Route::Post("recommendation", run_recommend),
        _ => return None,
    };
    Some(route)
}

/// Answer one request against `snapshot`.
pub fn handle(snapshot: &LoadedModel, method: &str, path: &str, body: &[u8]) -> ApiResponse {
    if path == format!("{API_PREFIX}/health") {
        if method != "GET" {
            return method_not_allowed(snapshot, method, path);
        }
        let doc = json!({"fingerprint": snapshot.fingerprint, "status": "ok"});
        return ApiResponse {
            status: 200,
            body: canonical_value(&doc),
        };
    }
    let Some(route) = route_of(path) else {
        return ApiResponse::error(snapshot, 404, "not_found", format!("no route for {path}"));
    };
    match (route, method) {
        (Route::Get(key, f), "GET") => ApiResponse::ok(snapshot, key, f(&snapshot.model)),
        (Route::Post(key, f), "POST") => match f(&snapshot.model, body) {
            Ok(payload) => ApiResponse::ok(snapshot, key, payload),
            Err(Failure::Body(message)) => {
                ApiResponse::error(snapshot, 400, "malformed_body", message)
            }
            Err(Failure::Library(e)) => ApiResponse::from_error(snapshot, &e),
        },
        _ => method_not_allowed(snapshot, method, path),
    }
}

fn method_not_allowed(snapshot: &LoadedModel, method: &str, path: &str) -> ApiResponse {
    ApiResponse::error(
        snapshot,
        405,
        "method_not_allowed",
        format!("{method} is not supported on {path}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use talentbayes::canonical::to_canonical_string;
    use talentbayes::{load_dataset, parse_schema, train, TrainConfig};

    fn snapshot() -> LoadedModel {
        let schema = parse_schema(include_str!("../../../fixtures/ds6.schema.json")).unwrap();
        let ds = load_dataset(include_str!("../../../fixtures/ds6.csv"), &schema, true).unwrap();
        LoadedModel::new(train(&ds, TrainConfig::default()).unwrap())
    }

    fn parse(r: &ApiResponse) -> Json {
        serde_json::from_str(&r.body).unwrap()
    }

    #[test]
    fn predict_matches_library() {
        let s = snapshot();
        let r = handle(
            &s,
            "POST",
            "/api/v1/predict",
            br#"{"instance":{"skill":"high","experience":"junior"}}"#,
        );
        assert_eq!(r.status, 200);
        let doc = parse(&r);
        assert_eq!(doc["fingerprint"], s.fingerprint());
        let x = Instance::new().with("skill", "high").with("experience", "junior");
        let library = to_canonical_string(&predict(s.model(), &x).unwrap());
        assert_eq!(canonical_value(&doc["prediction"]), library);
        let good = doc["prediction"]["posterior"]["good"].as_f64().unwrap();
        assert!((good - 0.7033).abs() < 1e-4);
    }

    #[test]
    fn validation_errors() {
        let s = snapshot();
        let cases: [(&[u8], u16, &str); 5] = [
            (br#"{"instance":{"charisma":"high"}}"#, 400, "unknown_attribute"),
            (br#"{"instance":{"skill":3}}"#, 400, "kind_mismatch"),
            (br#"{"instance":"#, 400, "malformed_body"),
            (br#"{"instance":{},"extra":1}"#, 400, "malformed_body"),
            (br#"[]"#, 400, "malformed_body"),
        ];
        for (body, status, code) in cases {
            let r = handle(&s, "POST", "/api/v1/predict", body);
            assert_eq!(r.status, status, "{}", r.body);
            assert_eq!(parse(&r)["error"]["code"], code);
        }
    }

    #[test]
    fn semantic_errors_are_422() {
        let s = snapshot();
        let pool = r#"[{"id":"a","instance":{"skill":"high"}},{"id":"a","instance":{}}]"#;
        let body = format!(r#"{{"pool":{pool},"team_size":1}}"#);
        let r = handle(&s, "POST", "/api/v1/recommend", body.as_bytes());
        assert_eq!((r.status, parse(&r)["error"]["code"].clone()), (422, json!("duplicate_id")));
        let r = handle(
            &s,
            "POST",
            "/api/v1/recommend",
            br#"{"pool":[{"id":"a","instance":{}}],"team_size":1,"target":"great"}"#,
        );
        assert_eq!((r.status, parse(&r)["error"]["code"].clone()), (422, json!("unknown_class")));
        let r = handle(&s, "POST", "/api/v1/recommend", br#"{"pool":[],"team_size":1}"#);
        assert_eq!(r.status, 422);
    }

    #[test]
    fn whatif_and_recommend() {
        let s = snapshot();
        let r = handle(
            &s,
            "POST",
            "/api/v1/whatif",
            br#"{"instance":{"skill":"low","experience":"junior"},"attribute":"skill","value":"high"}"#,
        );
        assert_eq!(r.status, 200, "{}", r.body);
        let delta = parse(&r)["whatif"]["delta"]["good"].as_f64().unwrap();
        assert!((delta - 0.4201).abs() < 1e-4);

        let r = handle(
            &s,
            "POST",
            "/api/v1/recommend",
            br#"{"pool":[{"id":"P2","instance":{"skill":"low","experience":"junior"}},{"id":"P1","instance":{"skill":"high","experience":"junior"}}],"team_size":2}"#,
        );
        assert_eq!(r.status, 200);
        let doc = parse(&r);
        assert_eq!(doc["recommendation"]["members"][0]["id"], "P1");
    }

    #[test]
    fn gets_health_and_routing() {
        let s = snapshot();
        let r = handle(&s, "GET", "/api/v1/health", b"");
        assert_eq!(r.body, format!(r#"{{"fingerprint":"{}","status":"ok"}}"#, s.fingerprint()));
        let r = handle(&s, "GET", "/api/v1/rules", b"");
        let top = parse(&r)["rules"][0]["confidence"].as_f64().unwrap();
        assert!((top - 16.0 / 19.0).abs() < 1e-12);
        let r = handle(&s, "GET", "/api/v1/influence", b"");
        assert_eq!(parse(&r)["influence"][0]["attribute"], "skill");
        let r = handle(&s, "GET", "/api/v1/model", b"");
        assert_eq!(parse(&r)["model"]["priors"]["poor"].as_f64().unwrap(), 2.0 / 6.0);
        assert_eq!(handle(&s, "GET", "/api/v2/model", b"").status, 404);
        assert_eq!(handle(&s, "GET", "/nope", b"").status, 404);
        assert_eq!(handle(&s, "GET", "/api/v1/predict", b"").status, 405);
        assert_eq!(handle(&s, "POST", "/api/v1/health", b"").status, 405);
    }

    #[test]
    fn replay_is_stable() {
        let s = snapshot();
        let body = br#"{"instance":{"skill":"high"}}"#;
        let a = handle(&s, "POST", "/api/v1/predict", body);
        let b = handle(&s, "POST", "/api/v1/predict", body);
        assert_eq!(a, b);
    }
}
