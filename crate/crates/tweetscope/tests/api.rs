use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use tweetscope::server::{router, AppState};
use tweetscope::store::SessionStore;
use tweetscope_core::annotate::{LabelSet, SampleItem, SessionEvent};

fn setup() -> (tempfile::TempDir, axum::Router) {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::new(dir.path());
    let mut items = Vec::new();
    for c in 0..2u32 {
        for j in 0..5 {
            items.push(SampleItem {
                tweet_id: format!("{}{}", c + 1, j), cluster_id: c, text: format!("متن {c} {j}")
            });
        }
    }
    store
        .create(
            SessionEvent::Create {
                session_id: "s".into(),
                annotators: vec!["ann_a".into(), "ann_b".into()],
                label_set: LabelSet::default(),
                items,
                cluster_ratios: vec![0.7, 0.3],
            },
            None,
        )
        .unwrap();
    let app = router(AppState::new(SessionStore::new(dir.path())), None);
    (dir, app)
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

/// A labeling-phase payload is either an error or the caller's own view:
/// progress, the label set and the current item, nothing else.
fn assert_blind(p: &Value) {
    let obj = p.as_object().unwrap();
    if obj.contains_key("error") {
        assert_eq!(obj.keys().collect::<Vec<_>>(), ["error", "phase"], "{p}");
        return;
    }
    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    assert_eq!(keys, ["annotator", "current", "labeled", "labels", "phase", "session_id", "total"], "{p}");
    assert_eq!(p["labels"], json!(LabelSet::default().labels()));
    if let Some(cur) = p["current"].as_object() {
        assert_eq!(cur.keys().collect::<Vec<_>>(), ["cluster_id", "text", "tweet_id"]);
    }
}

fn ids() -> Vec<String> {
    (1..=2).flat_map(|c| (0..5).map(move |j| format!("{c}{j}"))).collect()
}

#[tokio::test]
async fn full_session_over_http() {
    let (dir, app) = setup();
    let mut payloads = Vec::new();

    let (st, v) = call(&app, "GET", "/session/s/next?annotator=ann_a", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["current"]["tweet_id"], "10");
    assert_eq!((v["labeled"].as_u64(), v["total"].as_u64()), (Some(0), Some(10)));

    // two injected disagreements: tweets 12 and 23
    for id in ids() {
        let a = "opinion";
        let b = match id.as_str() {
            "12" => "satire/jokes",
            "23" => "neutral",
            _ => "opinion",
        };
        for (ann, l) in [("ann_a", a), ("ann_b", b)] {
            let (st, v) =
                call(&app, "POST", "/session/s/label", Some(json!({"annotator": ann, "tweet_id": id, "label": l})))
                    .await;
            assert_eq!(st, StatusCode::OK, "{v}");
            payloads.push(v);
        }
        let (st, v) = call(&app, "GET", "/session/s/kappa", None).await;
        assert_eq!(st, StatusCode::CONFLICT);
        payloads.push(v);
    }
    // blindness: nothing served during labeling names the other annotator's labels
    for p in &payloads {
        assert_blind(p);
    }
    let (_, v) = call(&app, "GET", "/session/s/next?annotator=ann_b", None).await;
    assert!(v["current"].is_null());
    assert_blind(&v);

    let (st, v) = call(&app, "GET", "/session/s/disagreements", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["phase"], "adjudicating");
    let queue = v["queue"].as_array().unwrap();
    assert_eq!(queue.len(), 2);
    assert_eq!(queue[0]["candidate_labels"], json!(["opinion", "satire/jokes"]));
    assert!(!v.to_string().contains("ann_"));

    let (st, v) = call(&app, "GET", "/session/s/kappa", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["n_items"], 10);
    let (st, _) = call(&app, "GET", "/session/s/estimate", None).await;
    assert_eq!(st, StatusCode::CONFLICT);

    let (st, _) =
        call(&app, "POST", "/session/s/adjudicate", Some(json!({"tweet_id": "11", "label": "opinion"}))).await;
    assert_eq!(st, StatusCode::CONFLICT);
    let (st, v) =
        call(&app, "POST", "/session/s/adjudicate", Some(json!({"tweet_id": "12", "label": "satire/jokes"}))).await;
    assert_eq!((st, v["remaining"].as_u64()), (StatusCode::OK, Some(1)));
    let (_, v) =
        call(&app, "POST", "/session/s/adjudicate", Some(json!({"tweet_id": "23", "label": "solution"}))).await;
    assert_eq!(v["phase"], "closed");

    let (st, v) = call(&app, "GET", "/session/s/estimate", None).await;
    assert_eq!(st, StatusCode::OK);
    let shares: Vec<(String, f64)> = v["per_label_share"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| (x["label"].as_str().unwrap().to_string(), x["share"].as_f64().unwrap()))
        .collect();
    let share = |l: &str| shares.iter().find(|s| s.0 == l).unwrap().1;
    assert!((share("satire/jokes") - 0.7 * 0.2).abs() < 1e-12);
    assert!((share("solution") - 0.3 * 0.2).abs() < 1e-12);
    assert!((shares.iter().map(|s| s.1).sum::<f64>() - 1.0).abs() < 1e-12);

    // a fresh server replays the log to the same state
    let again = router(AppState::new(SessionStore::new(dir.path())), None);
    let (_, v2) = call(&again, "GET", "/session/s/estimate", None).await;
    assert_eq!(v, v2);
}

#[tokio::test]
async fn errors_map_to_status_codes() {
    let (_dir, app) = setup();
    assert_eq!(call(&app, "GET", "/session/nope/next?annotator=ann_a", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, "GET", "/session/s/next?annotator=ghost", None).await.0, StatusCode::BAD_REQUEST);
    let bad_label = json!({"annotator": "ann_a", "tweet_id": "10", "label": "sports"});
    assert_eq!(call(&app, "POST", "/session/s/label", Some(bad_label)).await.0, StatusCode::BAD_REQUEST);
    let (st, v) = call(&app, "GET", "/session/s/disagreements", None).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["missing"]["ann_a"], 10);
    let (st, v) = call(&app, "GET", "/session/s", None).await;
    assert_eq!((st, v["phase"].as_str()), (StatusCode::OK, Some("labeling")));
}
