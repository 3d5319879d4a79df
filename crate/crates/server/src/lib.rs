//! MyLibrary portal service.

pub mod admin;
pub mod alerts;
pub mod app;
pub mod auth;
pub mod clock;
pub mod config;
pub mod error;
pub mod http;
pub mod mail;
pub mod portal;
pub mod scheduler;
pub mod store;

pub use app::{App, Settings};
pub use error::{Error, Result};
