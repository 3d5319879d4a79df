//! Administrative plane: accounts, messages, mass email and usage reports.
//! Entity CRUD goes straight to the store, which enforces the rules.

use std::collections::BTreeSet;
use std::sync::Arc;

use chrono::{DateTime, NaiveDate, Utc};
use mylibrary_core::model::{DisciplineId, Message, UserId};
use mylibrary_core::usage::{usage_report, Period, UsageReport};
use serde::{Deserialize, Serialize};

use crate::app::App;
use crate::auth::{hash_password, new_token, verify_against_dummy, verify_password, Session, DEFAULT_PBKDF2_ROUNDS};
use crate::error::{Error, Result};
use crate::mail::{Email, Mailbox};
use crate::store::AdminAccount;

pub const MIN_PASSWORD_LEN: usize = 8;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassEmailReport {
    pub recipients: usize,
    pub skipped_opt_out: usize,
    pub skipped_no_address: usize,
    pub sent: usize,
    pub queued_for_retry: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum JobState {
    Running,
    Done { report: MassEmailReport },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MassEmailJob {
    pub id: String,
    pub started_at: DateTime<Utc>,
    #[serde(flatten)]
    pub state: JobState,
}

/// Users who would receive a mass email, and the opted-out ones skipped.
pub struct Audience {
    pub recipients: Vec<UserId>,
    pub opted_out: Vec<UserId>,
}

impl App {
    pub fn add_admin(&self, username: &str, password: &str) -> Result<()> {
        self.add_admin_with_rounds(username, password, DEFAULT_PBKDF2_ROUNDS)
    }

    pub fn add_admin_with_rounds(&self, username: &str, password: &str, rounds: u32) -> Result<()> {
        if password.chars().count() < MIN_PASSWORD_LEN {
            return Err(Error::invalid(format!(
                "password must be at least {MIN_PASSWORD_LEN} characters"
            )));
        }
        self.store.put_admin(AdminAccount {
            username: username.trim().to_string(),
            password_verifier: hash_password(password, rounds),
            created_at: self.now(),
        })
    }

    /// Same error, and the same work, whichever part was wrong.
    pub fn admin_login(&self, username: &str, password: &str) -> Result<Session<String>> {
        let ok = match self.store.admin(username) {
            Some(account) => verify_password(password, &account.password_verifier),
            None => {
                verify_against_dummy(password);
                false
            }
        };
        if !ok {
            return Err(Error::AuthenticationFailed);
        }
        Ok(self.admin_sessions.issue(username.to_string(), self.now()))
    }

    pub fn admin_session(&self, token: Option<&str>) -> Option<Session<String>> {
        self.admin_sessions.resolve(token?, self.now())
    }

    pub fn admin_logout(&self, token: &str) {
        self.admin_sessions.revoke(token);
    }

    pub fn set_global_message(&self, body: &str) -> Result<Message> {
        self.store.set_message(None, body)
    }

    pub fn set_discipline_message(&self, discipline: DisciplineId, body: &str) -> Result<Message> {
        self.store.set_message(Some(discipline), body)
    }

    pub fn mass_email_audience(&self, disciplines: &[DisciplineId]) -> Result<Audience> {
        if disciplines.is_empty() {
            return Err(Error::invalid("choose at least one discipline"));
        }
        for d in disciplines {
            self.store.discipline(*d)?;
        }
        let wanted: BTreeSet<DisciplineId> = disciplines.iter().copied().collect();
        let (recipients, opted_out) = self
            .store
            .users()
            .into_iter()
            .filter(|u| wanted.contains(&u.discipline_id))
            .partition::<Vec<_>, _>(|u| u.email_opt_in);
        Ok(Audience {
            recipients: recipients.into_iter().map(|u| u.id).collect(),
            opted_out: opted_out.into_iter().map(|u| u.id).collect(),
        })
    }

    /// One message per opted-in user in any of `disciplines`.
    pub fn mass_email(&self, disciplines: &[DisciplineId], subject: &str, body: &str) -> Result<MassEmailReport> {
        self.mass_email_job(&new_token(), disciplines, subject, body)
    }

    fn mass_email_job(
        &self,
        job: &str,
        disciplines: &[DisciplineId],
        subject: &str,
        body: &str,
    ) -> Result<MassEmailReport> {
        let audience = self.mass_email_audience(disciplines)?;
        let mut report = MassEmailReport {
            recipients: audience.recipients.len(),
            skipped_opt_out: audience.opted_out.len(),
            ..MassEmailReport::default()
        };
        let date = self.local_now();
        for id in audience.recipients {
            let user = self.store.user(id)?;
            if user.email.trim().is_empty() {
                report.skipped_no_address += 1;
                continue;
            }
            let mail = Email {
                id: format!("mass-{job}-{id}"),
                from: self.settings.mail_from.clone(),
                to: Mailbox::new(user.name, user.email),
                subject: subject.to_string(),
                body: body.to_string(),
                date,
            };
            if self.deliver(mail)? {
                report.sent += 1;
            } else {
                report.queued_for_retry += 1;
            }
        }
        Ok(report)
    }

    /// Validates up front, then sends on a background thread. Poll with
    /// [`App::mass_email_status`].
    pub fn start_mass_email(
        self: &Arc<Self>,
        disciplines: Vec<DisciplineId>,
        subject: String,
        body: String,
    ) -> Result<MassEmailJob> {
        if subject.trim().is_empty() {
            return Err(Error::invalid("subject must not be empty"));
        }
        self.mass_email_audience(&disciplines)?;
        let job = MassEmailJob {
            id: new_token(),
            started_at: self.now(),
            state: JobState::Running,
        };
        self.jobs.lock().unwrap().insert(job.id.clone(), job.clone());
        let app = Arc::clone(self);
        let id = job.id.clone();
        std::thread::spawn(move || {
            let state = match app.mass_email_job(&id, &disciplines, &subject, &body) {
                Ok(report) => JobState::Done { report },
                Err(e) => JobState::Failed { error: e.to_string() },
            };
            if let Some(job) = app.jobs.lock().unwrap().get_mut(&id) {
                job.state = state;
            }
        });
        Ok(job)
    }

    pub fn mass_email_status(&self, id: &str) -> Result<MassEmailJob> {
        self.jobs
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| Error::not_found(format!("job {id}")))
    }

    /// Tallies the access log, optionally limited to `from..=to`.
    pub fn usage_report(&self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Result<UsageReport> {
        let text = match &self.settings.access_log {
            Some(path) => match std::fs::read_to_string(path) {
                Ok(text) => text,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
                Err(e) => return Err(e.into()),
            },
            None => String::new(),
        };
        Ok(report_over(&text, from, to))
    }
}

pub fn report_over(log: &str, from: Option<NaiveDate>, to: Option<NaiveDate>) -> UsageReport {
    let period = match (from, to) {
        (None, None) => None,
        (from, to) => Some(Period {
            from: from.unwrap_or(NaiveDate::MIN),
            to: to.unwrap_or(NaiveDate::MAX),
        }),
    };
    usage_report(log.lines(), period)
}
