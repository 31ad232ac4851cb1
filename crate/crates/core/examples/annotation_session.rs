//! Two annotators label a few entities over HTTP, then the one
//! disagreement is adjudicated and the corpus finalized.

use std::sync::{Arc, Mutex};

use serde_json::{json, Value};
use wikiner::annotation::http::{spawn_server, ServerOptions};
use wikiner::annotation::{AnnotationService, Roster};
use wikiner::corpus::EntityRecord;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gold = [("Lucknow", "LOC"), ("Mayawati", "PER"), ("Samajwadi Party", "ORG"), ("Chhath Puja", "MISC")];
    let entities = gold.iter().map(|(s, _)| EntityRecord::new(s)).collect();
    let service = AnnotationService::new(entities, Roster::new(["asha", "vikram"])?);
    let server = spawn_server(
        "127.0.0.1:0".parse()?,
        Arc::new(Mutex::new(service)),
        ServerOptions::default(),
    )?;
    let base = server.base_url();
    println!("serving on {base}");

    let agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .build()
        .new_agent();
    let get = |path: &str| -> Result<(u16, Value), ureq::Error> {
        let mut r = agent.get(format!("{base}{path}")).call()?;
        let status = r.status().as_u16();
        let body = r.body_mut().read_to_string()?;
        Ok((status, serde_json::from_str(&body).unwrap_or(Value::Null)))
    };
    let post = |path: &str, body: Value| -> Result<(u16, Value), ureq::Error> {
        let mut r = agent
            .post(format!("{base}{path}"))
            .header("content-type", "application/json")
            .send(body.to_string())?;
        let status = r.status().as_u16();
        let body = r.body_mut().read_to_string()?;
        Ok((status, serde_json::from_str(&body).unwrap_or(Value::Null)))
    };

    for annotator in ["asha", "vikram"] {
        loop {
            let (status, task) = get(&format!("/api/tasks/next?annotator={annotator}"))?;
            if status == 204 {
                break;
            }
            let surface = task["surface"].as_str().unwrap_or_default();
            let mut label = gold.iter().find(|(s, _)| *s == surface).map_or("MISC", |g| g.1);
            if annotator == "vikram" && surface == "Chhath Puja" {
                label = "ORG";
            }
            post(
                "/api/labels",
                json!({"entity_id": task["entity_id"], "annotator": annotator, "label": label}),
            )?;
        }
    }

    let (_, agreement) = get("/api/agreement")?;
    println!(
        "agreement {}% over {} entities, kappa {:.3}",
        agreement["percent_agreement"], agreement["n_labeled_by_both"], agreement["kappa"].as_f64().unwrap_or(0.0)
    );
    let (_, pending) = get("/api/disagreements")?;
    for d in pending.as_array().into_iter().flatten() {
        println!("adjudicating {} {}", d["surface"], d["labels"]);
        post("/api/adjudications", json!({"entity_id": d["entity_id"], "label": "MISC"}))?;
    }
    let (status, _) = post("/api/finalize", json!({}))?;
    let mut export = agent.get(format!("{base}/api/export?format=tsv")).call()?;
    println!("finalize -> {status}\n{}", export.body_mut().read_to_string()?);
    server.stop()?;
    Ok(())
}
