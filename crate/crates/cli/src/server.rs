//! WebSocket session service. Every connection gets its own session on a
//! copy of the startup scene. Events are applied in arrival order; meshes are
//! computed on a worker that always takes the most recent request, so at
//! most one recompute per connection is in flight.

use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use midair_core::Scene;
use serde_json::Value;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, watch};

use crate::wire::{run_mesh_job, Connection, MeshJob, Outcome};

/// Routes: `/ws` speaks the session protocol, `/` describes the service.
pub fn router(scene: Scene) -> Router {
    Router::new()
        .route("/ws", get(upgrade))
        .route(
            "/",
            get(|| async { "midair session service: connect a WebSocket to /ws\n" }),
        )
        .with_state(Arc::new(scene))
}

pub async fn serve(listener: TcpListener, scene: Scene) -> std::io::Result<()> {
    axum::serve(listener, router(scene)).await
}

async fn upgrade(ws: WebSocketUpgrade, State(scene): State<Arc<Scene>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| run_connection(socket, scene))
}

async fn run_connection(socket: WebSocket, scene: Arc<Scene>) {
    let (mut sink, mut stream) = socket.split();
    let (out_tx, mut out_rx) = mpsc::unbounded_channel::<Value>();
    let writer = tokio::spawn(async move {
        while let Some(frame) = out_rx.recv().await {
            if sink
                .send(Message::Text(frame.to_string().into()))
                .await
                .is_err()
            {
                break;
            }
        }
    });
    let (job_tx, job_rx) = watch::channel::<Option<MeshJob>>(None);
    let worker = tokio::spawn(mesh_worker(job_rx, out_tx.clone()));

    let mut conn = Connection::new((*scene).clone());
    let deliver = |outcome: Outcome| {
        for reply in outcome.replies {
            let _ = out_tx.send(reply);
        }
        if let Some(job) = outcome.mesh_job {
            job_tx.send_replace(Some(job));
        }
    };
    deliver(conn.greeting());
    log::info!("client connected");

    while let Some(frame) = stream.next().await {
        match frame {
            Ok(Message::Text(text)) => {
                log::debug!("frame {}", text.as_str());
                deliver(conn.handle_text(text.as_str()));
            }
            Ok(Message::Binary(_)) => deliver(conn.handle_text("binary frame")),
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(_) => {}
        }
    }
    log::info!("client disconnected after {} events", conn.seq);
    drop(job_tx);
    let _ = worker.await;
    drop(out_tx);
    let _ = writer.await;
}

/// Computes the latest pending mesh job until the job channel closes.
async fn mesh_worker(
    mut jobs: watch::Receiver<Option<MeshJob>>,
    out: mpsc::UnboundedSender<Value>,
) {
    while jobs.changed().await.is_ok() {
        let Some(job) = jobs.borrow_and_update().clone() else {
            continue;
        };
        let seq = job.seq;
        match tokio::task::spawn_blocking(move || run_mesh_job(&job)).await {
            Ok(frame) => {
                log::debug!("mesh for event {seq} ready");
                if out.send(frame).is_err() {
                    break;
                }
            }
            Err(e) => log::error!("mesh worker failed: {e}"),
        }
    }
}
