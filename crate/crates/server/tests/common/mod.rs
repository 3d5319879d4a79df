#![allow(dead_code)]

use std::sync::Arc;

use chrono::{DateTime, Utc};
use mylibrary::auth::StubAuthenticator;
use mylibrary::clock::FixedClock;
use mylibrary::config::Contact;
use mylibrary::mail::{MailTransport, Mailbox, MemoryTransport};
use mylibrary::portal::{LoginHints, Resolution};
use mylibrary::store::{load_seed, Store};
use mylibrary::{App, Settings};
use mylibrary_core::model::{DisciplineId, ResourceId, UserId};

pub const SEED: &str = include_str!("../fixtures/seed.jsonl");
pub const LOGIN_URL: &str = "https://login.example.test/mylibrary";

/// Wednesday of ISO week 2026-W42.
pub fn t0() -> DateTime<Utc> {
    at("2026-10-14T12:00:00Z")
}

pub fn at(text: &str) -> DateTime<Utc> {
    DateTime::parse_from_rfc3339(text).unwrap().to_utc()
}

pub fn settings() -> Settings {
    Settings {
        login_url: LOGIN_URL.into(),
        reference_contact: Contact {
            name: "LibRef".into(),
            phone: "515-2935".into(),
            email: "Libref@ncsu.edu".into(),
            url: String::new(),
        },
        mail_from: Mailbox::new("MyLibrary", "mylibrary@library.example.test"),
        access_log: None,
        ..Settings::default()
    }
}

pub struct World {
    pub app: Arc<App>,
    pub clock: Arc<FixedClock>,
    pub mail: Arc<MemoryTransport>,
}

pub fn empty_world() -> World {
    let mail = Arc::new(MemoryTransport::default());
    world_with(mail.clone(), mail)
}

pub fn world_with(mailer: Arc<dyn MailTransport>, mail: Arc<MemoryTransport>) -> World {
    let clock = Arc::new(FixedClock::new(t0()));
    let store = Arc::new(Store::in_memory_with_clock(clock.clone()));
    let app = Arc::new(App::new(store, settings(), Box::new(StubAuthenticator), mailer));
    World { app, clock, mail }
}

pub fn world() -> World {
    let w = empty_world();
    load_seed(&w.app.store, SEED).unwrap();
    w
}

impl World {
    pub fn discipline(&self, name: &str) -> DisciplineId {
        self.app
            .store
            .discipline_by_name(name)
            .unwrap_or_else(|| panic!("no discipline {name}"))
            .id
    }

    pub fn resource(&self, title: &str) -> ResourceId {
        self.app
            .store
            .resources()
            .into_iter()
            .find(|r| r.title == title)
            .unwrap_or_else(|| panic!("no resource {title}"))
            .id
    }

    /// Logs in through the stub authenticator, creating the account if needed.
    pub fn login(&self, auth_id: &str, discipline: Option<&str>) -> (String, UserId) {
        let hints = LoginHints {
            discipline: discipline.map(str::to_string),
            email: Some(format!("{auth_id}@example.test")),
            name: Some(format!("User {auth_id}")),
        };
        match self.app.resolve_session(None, Some(auth_id), &hints).unwrap() {
            Resolution::Session { session, user, .. } => (session.token, user.id),
            Resolution::Redirect(url) => panic!("unexpected redirect to {url}"),
        }
    }
}
