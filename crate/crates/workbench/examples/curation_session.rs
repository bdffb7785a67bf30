//! A curation session against the HTTP API: tag samples, train in the
//! background, poll the trial log, query a filtered map and post a
//! correction. The server runs in-process on an ephemeral port.
//!
//! `cargo run --release -p gridsense-workbench --example curation_session`

use std::time::Duration;

use gridsense::features::{ChannelMode, FeatureRecipe};
use gridsense::synth;
use gridsense_workbench::server::router;
use gridsense_workbench::server::AppState;
use gridsense_workbench::Project;
use serde_json::{json, Value};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;

async fn request(addr: std::net::SocketAddr, method: &str, path: &str, body: Option<Value>) -> (u16, Value) {
    let body = body.map(|b| b.to_string()).unwrap_or_default();
    let mut stream = TcpStream::connect(addr).await.expect("connect");
    let head = format!(
        "{method} {path} HTTP/1.1\r\nhost: {addr}\r\nconnection: close\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n",
        body.len()
    );
    stream.write_all(head.as_bytes()).await.expect("write");
    stream.write_all(body.as_bytes()).await.expect("write");
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).await.expect("read");
    let text = String::from_utf8_lossy(&raw);
    let status = text[9..12].parse().expect("status code");
    let payload = text.split_once("\r\n\r\n").map_or("", |(_, b)| b);
    (status, serde_json::from_str(payload).unwrap_or(Value::Null))
}

#[tokio::main]
async fn main() -> gridsense_workbench::Result<()> {
    let dir = std::env::temp_dir().join(format!("gridsense-session-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let [noise, stripes, _] = synth::three_textures();
    synth::render_rgb(&noise, 128, 128, 1.0, 15.0, 1).save(dir.join("meadow.png"))?;
    synth::render_rgb(&stripes, 128, 128, 1.0, 15.0, 2).save(dir.join("fence.png"))?;
    synth::two_region_image(&noise, &stripes, 192, 96, 15.0, 3).save(dir.join("field.png"))?;

    let recipe = FeatureRecipe {
        channels: ChannelMode::Luma,
        radii: vec![12],
        ..FeatureRecipe::default()
    };
    let mut project = Project::create(
        dir.join("project.json"),
        "session",
        vec!["noise".into(), "stripes".into()],
        recipe,
    )?;
    for name in ["meadow.png", "fence.png", "field.png"] {
        project.register_image(dir.join(name))?;
    }
    project.save()?;

    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    tokio::spawn(async move { axum::serve(listener, router(AppState::new(project))).await });
    println!("serving on http://{addr}");

    for i in 0..10 {
        let (x, y) = (16 + (i * 37) % 96, 16 + (i * 53) % 96);
        request(
            addr,
            "POST",
            "/api/samples",
            Some(json!({"image": "meadow", "x": x, "y": y, "class": "noise"})),
        )
        .await;
        request(
            addr,
            "POST",
            "/api/samples",
            Some(json!({"image": "fence", "x": x, "y": y, "class": "stripes"})),
        )
        .await;
    }
    let (_, p) = request(addr, "GET", "/api/project", None).await;
    println!("{} samples tagged", p["sample_count"]);

    let (status, _) = request(
        addr,
        "POST",
        "/api/train",
        Some(json!({"search": "random", "budget": 15, "seed": 2})),
    )
    .await;
    println!("train -> {status}");
    let mut seen = 0;
    loop {
        let (_, s) = request(addr, "GET", &format!("/api/train/status?since={seen}"), None).await;
        for t in s["trials"].as_array().into_iter().flatten() {
            println!(
                "  trial {}: cv {:.4}",
                t["index"],
                t["cv_accuracy"].as_f64().unwrap_or(0.0)
            );
            seen += 1;
        }
        if s["state"] != "running" {
            println!("job {}", s["state"]);
            break;
        }
        tokio::time::sleep(Duration::from_millis(100)).await;
    }

    let (_, map) = request(addr, "GET", "/api/map?image=field&limiter=0.9", None).await;
    let records = map["records"].as_array().cloned().unwrap_or_default();
    let stripes_right = records
        .iter()
        .filter(|r| r["class"] == "stripes" && r["x"].as_i64() >= Some(96))
        .count();
    println!(
        "{} points pass limiter 0.9, {stripes_right} of them stripes on the right half",
        records.len()
    );

    let (status, c) = request(
        addr,
        "POST",
        "/api/corrections",
        Some(json!({"image": "field", "x": 150, "y": 48, "class": "stripes"})),
    )
    .await;
    println!("correction -> {status} {c}");
    let (_, p) = request(addr, "GET", "/api/project", None).await;
    println!("model stale after correction: {}", p["stale"]);
    println!("project saved in {}", dir.display());
    Ok(())
}
