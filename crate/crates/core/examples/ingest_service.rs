//! Runs the ingestion service in-process on an ephemeral port, submits a few
//! records over plain HTTP, and downloads the resulting dataset CSV.
//!
//!     cargo run --example ingest_service

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::{Arc, RwLock};

use locfuse::service::{serve_on, IngestRecord, IngestStore};
use locfuse::{generate_dataset, reference_scenario};

fn request(addr: std::net::SocketAddr, method: &str, path: &str, body: &str) -> std::io::Result<String> {
    let mut stream = TcpStream::connect(addr)?;
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\n\
         Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    let mut response = String::new();
    stream.read_to_string(&mut response)?;
    Ok(response)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = reference_scenario();
    let dir = std::env::temp_dir().join(format!("locfuse-ingest-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let store = IngestStore::open(
        dir.join("records.jsonl"),
        scenario.roster.clone(),
        scenario.zones.clone(),
    )?;
    let store = Arc::new(RwLock::new(store));

    let runtime = tokio::runtime::Runtime::new()?;
    let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let addr = listener.local_addr()?;
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = runtime.spawn(serve_on(listener, store, async {
        let _ = stopped.await;
    }));

    for sample in &generate_dataset(&scenario, 3, 5)?.samples {
        let body = serde_json::to_string(&IngestRecord::from_sample(sample))?;
        let status = request(addr, "POST", "/samples", &body)?;
        println!("POST {} -> {}", sample.id, status.lines().next().unwrap_or(""));
    }
    let bad = r#"{"sample_id":"x1","x":1,"y":1,"zone":"lab1","rssi":{"nope":-60}}"#;
    let response = request(addr, "POST", "/samples", bad)?;
    println!("POST x1 -> {}", response.lines().next().unwrap_or(""));
    println!("  {}", response.rsplit("\r\n\r\n").next().unwrap_or(""));

    let count = request(addr, "GET", "/samples/count", "")?;
    println!("count: {}", count.rsplit("\r\n\r\n").next().unwrap_or(""));
    let csv = request(addr, "GET", "/dataset", "")?;
    print!("{}", csv.rsplit("\r\n\r\n").next().unwrap_or(""));

    let _ = stop.send(());
    runtime.block_on(server)??;
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
