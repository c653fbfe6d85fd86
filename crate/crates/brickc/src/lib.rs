//! Front ends for the diagram compiler: [`api`] holds the shared pipeline,
//! [`server`] exposes it over HTTP.

pub mod api;
pub mod server;
