//! Scripted double-annotation session over the HTTP API.

mod common;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde_json::{json, Value};

use wikiner::annotation::http::{spawn_server, ServerOptions};
use wikiner::annotation::{AnnotationService, Roster};
use wikiner::corpus::{import_corpus, CorpusFormat, EntityRecord, NELabel};

struct Client {
    agent: ureq::Agent,
    base: String,
}

impl Client {
    fn new(base: String) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .build()
            .new_agent();
        Client { agent, base }
    }

    fn get(&self, path: &str) -> (u16, String) {
        let mut resp = self.agent.get(format!("{}{path}", self.base)).call().unwrap();
        let status = resp.status().as_u16();
        (status, resp.body_mut().read_to_string().unwrap())
    }

    fn post(&self, path: &str, body: &str) -> (u16, String) {
        let mut resp = self
            .agent
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .send(body)
            .unwrap();
        let status = resp.status().as_u16();
        (status, resp.body_mut().read_to_string().unwrap())
    }

    fn get_json(&self, path: &str) -> (u16, Value) {
        let (s, b) = self.get(path);
        (s, serde_json::from_str(&b).unwrap_or(Value::Null))
    }

    fn post_json(&self, path: &str, body: Value) -> (u16, Value) {
        let (s, b) = self.post(path, &body.to_string());
        (s, serde_json::from_str(&b).unwrap_or(Value::Null))
    }
}

fn gold() -> BTreeMap<String, NELabel> {
    import_corpus(&common::read_fixture("annotation_50.tsv"), CorpusFormat::Tsv)
        .unwrap()
        .into_iter()
        .map(|r| (r.surface.clone(), r.final_label.unwrap()))
        .collect()
}

fn other_label(l: NELabel) -> NELabel {
    NELabel::ALL[(l.index() + 1) % 4]
}

/// Labels every task the server hands out; returns (entity_id, label) in
/// the order given.
fn label_all(
    client: &Client,
    annotator: &str,
    gold: &BTreeMap<String, NELabel>,
    flip_at: Option<usize>,
) -> Vec<(String, NELabel)> {
    let mut given = Vec::new();
    loop {
        let (status, task) = client.get_json(&format!("/api/tasks/next?annotator={annotator}"));
        if status == 204 {
            break;
        }
        assert_eq!(status, 200);
        let surface = task["surface"].as_str().unwrap();
        let id = task["entity_id"].as_str().unwrap().to_string();
        let mut label = gold[surface];
        if flip_at == Some(given.len()) {
            label = other_label(label);
        }
        let (s, ack) = client.post_json(
            "/api/labels",
            json!({"entity_id": id, "annotator": annotator, "label": label.as_str()}),
        );
        assert_eq!(s, 200, "{ack}");
        assert_eq!(ack["label"], label.as_str());
        given.push((id, label));
    }
    given
}

fn kappa_oracle(pairs: &[(NELabel, NELabel)]) -> f64 {
    let n = pairs.len() as f64;
    let po = pairs.iter().filter(|(a, b)| a == b).count() as f64 / n;
    let pe: f64 = NELabel::ALL
        .iter()
        .map(|&l| {
            let a = pairs.iter().filter(|p| p.0 == l).count() as f64 / n;
            let b = pairs.iter().filter(|p| p.1 == l).count() as f64 / n;
            a * b
        })
        .sum();
    (po - pe) / (1.0 - pe)
}

#[test]
fn double_annotation_session() {
    let started = Instant::now();
    let gold = gold();
    assert_eq!(gold.len(), 50);
    let dir = tempfile::tempdir().unwrap();
    let journal = dir.path().join("annotations.jsonl");
    let entities: Vec<EntityRecord> = gold.keys().map(|s| EntityRecord::new(s)).collect();
    let roster = Roster::new(["ann1", "ann2"]).unwrap();
    let service = AnnotationService::with_journal(entities.clone(), roster.clone(), &journal).unwrap();
    let server = spawn_server(
        "127.0.0.1:0".parse().unwrap(),
        Arc::new(Mutex::new(service)),
        ServerOptions {
            corpus_dir: Some(dir.path().to_path_buf()),
        },
    )
    .unwrap();
    let client = Client::new(server.base_url());

    // agreement needs both primaries to have labeled something
    let (s, _) = client.get_json("/api/agreement");
    assert!(s == 200 || s == 409);

    let first = label_all(&client, "ann1", &gold, None);
    let second = label_all(&client, "ann2", &gold, Some(17));
    assert_eq!(first.len(), 50);
    assert_eq!(second.len(), 50);

    // brute-force agreement from what the script itself submitted
    let by_id: BTreeMap<&str, NELabel> = first.iter().map(|(i, l)| (i.as_str(), *l)).collect();
    let pairs: Vec<(NELabel, NELabel)> = second.iter().map(|(i, l)| (by_id[i.as_str()], *l)).collect();
    let agree = pairs.iter().filter(|(a, b)| a == b).count();
    let percent = 100.0 * agree as f64 / pairs.len() as f64;
    assert_eq!(percent, 98.0);

    let (s, report) = client.get_json("/api/agreement");
    assert_eq!(s, 200);
    assert_eq!(report["n_labeled_by_both"], 50);
    assert_eq!(report["n_agree"], agree);
    assert_eq!(report["percent_agreement"].as_f64().unwrap(), percent);
    assert!((report["kappa"].as_f64().unwrap() - kappa_oracle(&pairs)).abs() < 1e-12);

    let (s, progress) = client.get_json("/api/progress");
    assert_eq!(s, 200);
    assert_eq!(progress["annotators"]["ann1"]["labeled"], 50);
    assert_eq!(progress["annotators"]["ann2"]["labeled"], 50);
    assert_eq!(progress["pending_disagreements"], 1);

    let (s, pending) = client.get_json("/api/disagreements");
    assert_eq!(s, 200);
    let pending = pending.as_array().unwrap().clone();
    assert_eq!(pending.len(), 1);
    let disputed = pending[0]["entity_id"].as_str().unwrap().to_string();
    assert_eq!(disputed, second[17].0);

    let (s, err) = client.post_json("/api/finalize", json!({}));
    assert_eq!(s, 409);
    assert_eq!(err["code"], "Unresolved");
    assert_eq!(err["details"]["unresolved"], json!([disputed]));

    // adjudicating an entity both primaries agree on is a conflict
    let (s, err) = client.post_json("/api/adjudications", json!({"entity_id": first[0].0, "label": "PER"}));
    assert_eq!(s, 409, "{err}");

    let surface = pending[0]["surface"].as_str().unwrap();
    let (s, _) = client.post_json(
        "/api/adjudications",
        json!({"entity_id": disputed, "label": gold[surface].as_str()}),
    );
    assert_eq!(s, 200);
    let (_, pending) = client.get_json("/api/disagreements");
    assert!(pending.as_array().unwrap().is_empty());

    let (s, fin) = client.post_json("/api/finalize", json!({}));
    assert_eq!(s, 200, "{fin}");
    assert_eq!(fin["records"], 50);
    let written = std::fs::read_to_string(dir.path().join("corpus.tsv")).unwrap();
    assert_eq!(written, common::read_fixture("annotation_50.tsv"));

    let (s, jsonl) = client.get("/api/export?format=jsonl");
    assert_eq!(s, 200);
    assert_eq!(jsonl.lines().count(), 50);
    assert_eq!(jsonl, std::fs::read_to_string(dir.path().join("corpus.jsonl")).unwrap());

    server.stop().unwrap();

    // the journal alone reproduces the final corpus
    let replayed = AnnotationService::with_journal(entities, roster, &journal).unwrap();
    let records = replayed.finalize().unwrap();
    assert_eq!(records.len(), 50);
    assert!(records
        .iter()
        .all(|r| r.final_label == Some(gold[&r.surface])));
    assert!(started.elapsed().as_secs() < 30);
}

#[test]
fn error_responses() {
    let entities = vec![EntityRecord::new("Lucknow"), EntityRecord::new("Patna")];
    let id = entities[0].id.clone();
    let service = AnnotationService::new(entities, Roster::new(["a", "b", "observer"]).unwrap());
    let server = spawn_server(
        "127.0.0.1:0".parse().unwrap(),
        Arc::new(Mutex::new(service)),
        ServerOptions::default(),
    )
    .unwrap();
    let c = Client::new(server.base_url());

    let (s, e) = c.get_json("/api/tasks/next?annotator=nobody");
    assert_eq!(s, 404);
    assert_eq!(e["code"], "UnknownAnnotator");

    let (s, _) = c.get_json("/api/tasks/next");
    assert_eq!(s, 400);

    let (s, e) = c.post_json("/api/labels", json!({"entity_id": "0000", "annotator": "a", "label": "PER"}));
    assert_eq!(s, 404);
    assert_eq!(e["code"], "UnknownEntity");

    let (s, e) = c.post_json("/api/labels", json!({"entity_id": id, "annotator": "a", "label": "PERSON"}));
    assert_eq!(s, 422);
    assert_eq!(e["details"]["allowed"], json!(["PER", "LOC", "ORG", "MISC"]));

    let (s, e) = c.post("/api/labels", "{not json");
    assert_eq!(s, 400, "{e}");

    let (s, e) = c.get_json("/api/nowhere");
    assert_eq!(s, 404);
    assert_eq!(e["code"], "NotFound");

    // relabeling replaces; the observer does not count toward agreement
    for (ann, label) in [("a", "LOC"), ("a", "LOC"), ("b", "LOC"), ("observer", "ORG")] {
        let (s, _) = c.post_json("/api/labels", json!({"entity_id": id, "annotator": ann, "label": label}));
        assert_eq!(s, 200);
    }
    let (_, r) = c.get_json("/api/agreement");
    assert_eq!(r["n_labeled_by_both"], 1);
    assert_eq!(r["percent_agreement"].as_f64().unwrap(), 100.0);

    let (s, t) = c.get_json("/api/tasks/next?annotator=a");
    assert_eq!(s, 200);
    assert_eq!(t["surface"], "Patna");
}
