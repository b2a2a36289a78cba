//! Command-line tools and the live session service for the midair engine.
//!
//! * [`commands`]: batch `replay`, `mesh` and `stats` subcommands.
//! * [`wire`]: JSON messages exchanged with browser clients.
//! * [`server`]: WebSocket service running one session per connection.

pub mod commands;
pub mod server;
pub mod wire;

pub use commands::{mesh, replay, stats, CliError, MeshSummary};
pub use server::{router, serve};
