//! Replays random scripts against a live server and the oracle side by side.

use std::collections::BTreeMap;

use forge_core::model::Model;
use forge_core::store::Store;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::oracle::{snake, Oracle};
use super::script::{random_script, Step};

#[derive(Debug, Default)]
pub struct Tally {
    pub steps: usize,
    /// Link requests the oracle predicted would break an upper bound.
    pub multiplicity_violations: usize,
    /// Served responses per status code.
    pub statuses: BTreeMap<u16, usize>,
}

async fn send(http: &reqwest::Client, base: &str, step: &Step) -> (u16, Value) {
    let method = reqwest::Method::from_bytes(step.method.as_bytes()).unwrap();
    let mut req = http.request(method, format!("{base}{}", step.path));
    if !step.body.is_empty() {
        req = req.header("content-type", "application/json").body(step.body.clone());
    }
    let resp = req.send().await.unwrap();
    let status = resp.status().as_u16();
    let text = resp.text().await.unwrap();
    let body = if text.is_empty() { Value::Null } else { serde_json::from_str(&text).unwrap() };
    (status, body)
}

/// Whether the oracle, in its current state, sees `step` as a link that
/// passes every other check but exceeds an upper bound.
fn predicts_violation(model: &Model, oracle: &Oracle, step: &Step) -> bool {
    let Some(assoc) = model.associations.iter().find(|a| step.path == format!("/api/assoc/{}/link", snake(&a.name))) else {
        return false;
    };
    let Ok(Value::Object(body)) = serde_json::from_slice::<Value>(&step.body) else { return false };
    let id = |role: &str| body.get(&format!("{role}_id")).and_then(Value::as_u64);
    let (Some(a), Some(b)) = (id(&assoc.end_a.role), id(&assoc.end_b.role)) else { return false };
    body.len() == 2
        && oracle.has_record(&assoc.end_a.target, a)
        && oracle.has_record(&assoc.end_b.target, b)
        && !oracle.has_link(&assoc.name, a, b)
        && oracle.exceeds_upper_bound(assoc, a, b)
}

/// Serves `model` on a fresh store and runs one seeded script of `steps`
/// requests, comparing every response with the oracle.
pub async fn run_seed(model: &Model, seed: u64, steps: usize) -> Result<Tally, String> {
    let server = forge_server::serve_api(model.clone(), Store::new(), "127.0.0.1:0".parse().unwrap())
        .await
        .map_err(|e| e.to_string())?;
    let base = format!("http://{}", server.local_addr());
    let http = reqwest::Client::new();
    let mut oracle = Oracle::new(model);
    let mut tally = Tally::default();
    let script = random_script(model, steps, &mut ChaCha8Rng::seed_from_u64(seed));
    let mut outcome = Ok(());
    for (i, step) in script.iter().enumerate() {
        let violation = predicts_violation(model, &oracle, step);
        let expected = oracle.request(step.method, &step.path, &step.body);
        let actual = send(&http, &base, step).await;
        if actual != expected {
            outcome = Err(format!(
                "seed {seed} step {i}: {} {} {}\n  served: {actual:?}\n  oracle: {expected:?}",
                step.method,
                step.path,
                String::from_utf8_lossy(&step.body)
            ));
            break;
        }
        if violation {
            tally.multiplicity_violations += 1;
            if actual.0 != 409 || actual.1["error"] != "MULTIPLICITY" {
                outcome = Err(format!("seed {seed} step {i}: bound violation answered {actual:?}"));
                break;
            }
        }
        tally.steps += 1;
        *tally.statuses.entry(actual.0).or_default() += 1;
    }
    server.shutdown().await.map_err(|e| e.to_string())?;
    outcome.map(|_| tally)
}
