use std::f64::consts::PI;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use gbswitch_core::game::{GameMode, GameRegistry, GameState, Move, PatternSource};
use gbswitch_core::Tensor;
use gbswitch_service::router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(Arc::new(GameRegistry::new()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn create(app: &Router, body: Value) -> Value {
    let (status, game) = call(app, "POST", "/api/v1/games", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{game}");
    game
}

fn id(game: &Value) -> String {
    game["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn classic_flip_and_assist() {
    let app = app();
    let game = create(
        &app,
        json!({"mode": "classic", "pattern": {"shape": [2, 2], "kind": "sign", "entries": [1, 1, 1, 1]}}),
    )
    .await;
    assert_eq!(game["score"], 4.0);
    assert_eq!(game["shape"], json!([2, 2]));
    let id = id(&game);

    let (status, g) =
        call(&app, "POST", &format!("/api/v1/games/{id}/moves"), Some(json!({"kind": "flip", "axis": 1, "index": 1}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(g["pattern"]["entries"], json!([-1, -1, 1, 1]));
    assert_eq!(g["score"], 0.0);
    assert_eq!(g["knobs"], json!({"kind": "signs", "vectors": [[-1, 1], [1, 1]]}));
    assert_eq!(g["move_log"].as_array().unwrap().len(), 1);

    let (status, a) = call(&app, "POST", &format!("/api/v1/games/{id}/assist"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(a["best_value"], 4.0);
    assert_eq!(a["relative_gap"], 1.0);
    assert_eq!(a["exact"], true);

    let (_, g) = call(&app, "POST", &format!("/api/v1/games/{id}/reset"), None).await;
    assert_eq!(g["score"], 4.0);
    assert_eq!(g["move_log"], json!([]));
    let (_, fetched) = call(&app, "GET", &format!("/api/v1/games/{id}"), None).await;
    assert_eq!(fetched, g);
}

#[tokio::test]
async fn assist_on_optimal_classic_board() {
    let app = app();
    let game = create(
        &app,
        json!({"mode": "classic", "pattern": {"shape": [2, 2], "kind": "sign", "entries": [1, 1, 1, -1]}}),
    )
    .await;
    assert_eq!(game["score"], 2.0);
    let (_, a) = call(&app, "POST", &format!("/api/v1/games/{}/assist", id(&game)), None).await;
    assert_eq!(a["best_value"], 2.0);
    assert_eq!(a["relative_gap"], 0.0);
}

#[tokio::test]
async fn vector_session_replays_scores() {
    let app = app();
    let game = create(&app, json!({"mode": "vector", "shape": [3, 4], "seed": 7})).await;
    let again = create(&app, json!({"mode": "vector", "shape": [3, 4], "seed": 7})).await;
    assert_eq!(game["pattern"], again["pattern"]);
    let id = id(&game);

    let moves = [(2, 3, PI), (1, 2, 0.75), (2, 1, -2.0)];
    let mut scores = vec![game["score"].as_f64().unwrap()];
    let mut last = game.clone();
    for (axis, index, angle) in moves {
        let (status, g) = call(
            &app,
            "POST",
            &format!("/api/v1/games/{id}/moves"),
            Some(json!({"kind": "rotate", "axis": axis, "index": index, "angle": angle})),
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        // only the named slice changes
        let old = last["pattern"]["entries"].as_array().unwrap();
        let new = g["pattern"]["entries"].as_array().unwrap();
        for (flat, (a, b)) in old.iter().zip(new).enumerate() {
            let (r, c) = (flat / 4, flat % 4);
            let in_slice = if axis == 1 { r == index - 1 } else { c == index - 1 };
            assert_eq!(a != b, in_slice, "entry {flat} after rotating axis {axis} line {index}");
        }
        scores.push(g["score"].as_f64().unwrap());
        last = g;
    }

    let (_, snap) = call(&app, "GET", &format!("/api/v1/games/{id}/snapshot"), None).await;
    assert_eq!(snap["moves"].as_array().unwrap().len(), 3);
    let (status, restored) = call(&app, "POST", "/api/v1/snapshots", Some(snap.clone())).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(restored["pattern"], last["pattern"]);
    assert_eq!(restored["score"], last["score"]);

    // the snapshot reads as a plain tensor document
    let t: Tensor = serde_json::from_value(snap).unwrap();
    assert_eq!(serde_json::to_value(&t).unwrap(), last["pattern"]);

    let (_, a) = call(&app, "POST", &format!("/api/v1/games/{id}/assist"), None).await;
    assert!(a["best_value"].as_f64().unwrap() >= scores[3] - 1e-9);

    let (_, g) = call(&app, "POST", &format!("/api/v1/games/{id}/reset"), None).await;
    assert_eq!(g["score"].as_f64().unwrap(), scores[0]);
    assert_eq!(g["pattern"], game["pattern"]);
}

#[tokio::test]
async fn vector_extremal_assist() {
    let app = app();
    let game = create(
        &app,
        json!({"mode": "vector", "pattern": {"shape": [2, 2], "kind": "unimodular", "entries": [PI, 0.0, 0.0, 0.0]}}),
    )
    .await;
    let (_, a) = call(&app, "POST", &format!("/api/v1/games/{}/assist", id(&game)), None).await;
    assert!((a["best_value"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-6);
    assert_eq!(a["witness_plan"]["kind"], "phases");
}

#[tokio::test]
async fn error_statuses() {
    let app = app();
    let (status, e) = call(&app, "GET", "/api/v1/games/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(e["code"], "not_found");
    assert!(e["message"].is_string());

    let (status, e) = call(&app, "POST", "/api/v1/games", Some(json!({"mode": "chess"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], "parse");

    let (status, e) = call(&app, "POST", "/api/v1/games", Some(json!({"mode": "classic", "shape": [2, 2, 2]}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["code"], "unsupported");

    let (status, _) = call(&app, "POST", "/api/v1/games", Some(json!({"mode": "classic", "shape": [33, 2]}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let game = create(&app, json!({"mode": "classic", "shape": [3, 3], "seed": 2})).await;
    let moves = format!("/api/v1/games/{}/moves", id(&game));
    let (status, e) = call(&app, "POST", &moves, Some(json!({"kind": "rotate", "axis": 1, "index": 1, "angle": 1.0}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["code"], "mode_mismatch");
    let (status, e) = call(&app, "POST", &moves, Some(json!({"kind": "flip", "axis": 1, "index": 4}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["code"], "dimension");
    let (status, _) = call(&app, "POST", &moves, Some(json!({"kind": "flip"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/api/v1/games/nope/moves", Some(json!({"kind": "flip", "axis": 1, "index": 1}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (_, g) = call(&app, "GET", &format!("/api/v1/games/{}", id(&game)), None).await;
    assert_eq!(g["move_log"], json!([]));
}

#[tokio::test]
async fn oversized_classic_assist_falls_back() {
    let app = app();
    let game = create(&app, json!({"mode": "classic", "shape": [32, 32], "seed": 3})).await;
    let (status, a) = call(&app, "POST", &format!("/api/v1/games/{}/assist", id(&game)), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(a["exact"], false);
    assert!(a["best_value"].as_f64().unwrap() >= game["score"].as_f64().unwrap());
}

#[tokio::test]
async fn concurrent_moves_on_one_game_are_serialized() {
    let app = app();
    let game = create(&app, json!({"mode": "classic", "shape": [4, 4], "seed": 9})).await;
    let uri = format!("/api/v1/games/{}/moves", id(&game));
    let mut tasks = Vec::new();
    for i in 0..40 {
        let (app, uri) = (app.clone(), uri.clone());
        tasks.push(tokio::spawn(async move {
            call(&app, "POST", &uri, Some(json!({"kind": "flip", "axis": 1 + i % 2, "index": 1 + i % 4}))).await.0
        }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    let (_, g) = call(&app, "GET", &format!("/api/v1/games/{}", id(&game)), None).await;
    assert_eq!(g["move_log"].as_array().unwrap().len(), 40);
    // flips commute, so any arrival order lands on the same board
    let mut local = GameState::create("local", GameMode::Classic, Some("4,4".parse().unwrap()), PatternSource::Random { seed: 9 })
        .unwrap();
    for i in 0..40 {
        local.apply_move(Move::Flip { axis: 1 + i % 2, index: 1 + i % 4 }).unwrap();
    }
    assert_eq!(g["pattern"], serde_json::to_value(&local.pattern).unwrap());
    assert_eq!(g["score"].as_f64().unwrap(), local.score);
}
