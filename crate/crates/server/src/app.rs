use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::AtomicBool;
use std::sync::{Arc, Mutex};

use anyhow::Context;
use chrono::{DateTime, Duration, FixedOffset, NaiveDate, Utc};
use mylibrary_core::model::UserId;

use crate::admin::MassEmailJob;
use crate::auth::{Authenticator, SessionTable, SignedAuthenticator, StubAuthenticator};
use crate::clock::{Clock, SystemClock};
use crate::config::{AuthMode, Config, Contact, TransportKind};
use crate::mail::{MailTransport, Mailbox, SmtpTransport, SpoolTransport, StdoutTransport};
use crate::store::{FileJournal, Store};

pub const USER_SESSION_DAYS: i64 = 30;
pub const ADMIN_SESSION_HOURS: i64 = 4;

#[derive(Debug, Clone)]
pub struct Settings {
    pub utc_offset: FixedOffset,
    pub login_url: String,
    pub default_discipline: Option<String>,
    pub reference_contact: Contact,
    pub mail_from: Mailbox,
    pub access_log: Option<PathBuf>,
    pub secure_cookies: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self::from(&Config::default())
    }
}

impl From<&Config> for Settings {
    fn from(c: &Config) -> Self {
        Self {
            utc_offset: c.utc_offset,
            login_url: c.auth.login_url.clone(),
            default_discipline: c.default_discipline.clone(),
            reference_contact: c.reference_contact.clone(),
            mail_from: Mailbox::new(c.mail.from_name.clone(), c.mail.from_address.clone()),
            access_log: Some(c.access_log()),
            secure_cookies: c.secure_cookies,
        }
    }
}

/// Everything a request handler needs, shared across threads.
pub struct App {
    pub store: Arc<Store>,
    pub settings: Settings,
    pub sessions: SessionTable<UserId>,
    pub admin_sessions: SessionTable<String>,
    pub(crate) authenticator: Box<dyn Authenticator>,
    pub(crate) mailer: Arc<dyn MailTransport>,
    pub(crate) weekly_running: AtomicBool,
    pub(crate) jobs: Mutex<BTreeMap<String, MassEmailJob>>,
}

impl App {
    pub fn new(
        store: Arc<Store>,
        settings: Settings,
        authenticator: Box<dyn Authenticator>,
        mailer: Arc<dyn MailTransport>,
    ) -> Self {
        Self {
            store,
            settings,
            sessions: SessionTable::new(Duration::days(USER_SESSION_DAYS), true),
            admin_sessions: SessionTable::new(Duration::hours(ADMIN_SESSION_HOURS), false),
            authenticator,
            mailer,
            weekly_running: AtomicBool::new(false),
            jobs: Mutex::new(BTreeMap::new()),
        }
    }

    /// Opens the data directory and wires up the configured components.
    pub fn from_config(config: &Config, clock: Arc<dyn Clock>) -> anyhow::Result<Self> {
        let journal = FileJournal::open(&config.data_dir)
            .with_context(|| format!("opening data directory {}", config.data_dir.display()))?;
        let store = Store::open(Box::new(journal), clock)?;
        let authenticator: Box<dyn Authenticator> = match config.auth.mode {
            AuthMode::Stub => Box::new(StubAuthenticator),
            AuthMode::Signed => Box::new(SignedAuthenticator::new(
                config.auth.secret.clone().unwrap_or_default(),
            )),
        };
        let mailer: Arc<dyn MailTransport> = match config.mail.transport {
            TransportKind::Stdout => Arc::new(StdoutTransport),
            TransportKind::Spool => Arc::new(SpoolTransport::new(config.spool_dir())?),
            TransportKind::Smtp => Arc::new(SmtpTransport::new(
                config.mail.smtp_host.clone(),
                config.mail.smtp_port,
            )),
        };
        Ok(Self::new(Arc::new(store), Settings::from(config), authenticator, mailer))
    }

    /// In-memory store, stub authenticator, system clock.
    pub fn in_memory(mailer: Arc<dyn MailTransport>) -> Self {
        Self::new(
            Arc::new(Store::in_memory_with_clock(Arc::new(SystemClock))),
            Settings::default(),
            Box::new(StubAuthenticator),
            mailer,
        )
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.store.clock().now()
    }

    pub fn local_now(&self) -> DateTime<FixedOffset> {
        self.now().with_timezone(&self.settings.utc_offset)
    }

    pub fn today(&self) -> NaiveDate {
        self.local_now().date_naive()
    }
}
