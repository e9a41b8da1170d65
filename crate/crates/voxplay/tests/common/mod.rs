#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::Path;

use tokio::sync::oneshot;
use voxplay::server::{serve, AppState, UploadEnvelope};
use voxplay::SessionStore;
use voxplay_core::analytics::RuleTable;
use voxplay_core::session::SessionRecord;

pub struct TestServer {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    handle: Option<tokio::task::JoinHandle<()>>,
}

impl TestServer {
    pub async fn start(data_dir: &Path, token: Option<&str>) -> Self {
        let state = AppState::new(
            SessionStore::open(data_dir).unwrap(),
            token.map(str::to_string),
            RuleTable::default(),
        );
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = oneshot::channel();
        let handle = tokio::spawn(async move {
            serve(listener, state, async {
                let _ = rx.await;
            })
            .await
            .unwrap();
        });
        Self {
            addr,
            shutdown: Some(tx),
            handle: Some(handle),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    pub async fn stop(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(h) = self.handle.take() {
            let _ = h.await;
        }
    }
}

pub async fn upload(client: &reqwest::Client, server: &TestServer, rec: &SessionRecord) -> reqwest::StatusCode {
    client
        .post(server.url("/api/v1/sessions"))
        .json(&UploadEnvelope::new(rec))
        .send()
        .await
        .unwrap()
        .status()
}

pub fn cli(args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_voxplay"))
        .args(args)
        .env_remove("VOXPLAY_DATA_DIR")
        .env_remove("VOXPLAY_RULES")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}
