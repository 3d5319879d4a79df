//! Current-awareness profiles, window queries and the weekly digest run.

use std::sync::atomic::Ordering;

use mylibrary_core::callno::RangeList;
use mylibrary_core::model::{ProfileId, UserId};
use mylibrary_core::sdi::{format_digest, AlertResult, CaProfile, Delivery};
use mylibrary_core::window::{iso_week_label, TimeWindow};
use serde::{Deserialize, Serialize};

use crate::app::App;
use crate::error::{Error, Result};
use crate::mail::{Email, Mailbox};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeeklyReport {
    pub week: String,
    pub profiles_evaluated: usize,
    pub emails_sent: usize,
    pub emails_suppressed: usize,
    /// Already dispatched for this week by an earlier run.
    pub already_sent: usize,
    /// Send failed; the digest waits in the outbox for the next run.
    pub queued_for_retry: usize,
    /// Owner has no email address on file.
    pub skipped_no_address: usize,
    pub outbox_delivered: usize,
    pub outbox_pending: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutboxReport {
    pub delivered: usize,
    pub pending: usize,
}

struct RunGuard<'a>(&'a std::sync::atomic::AtomicBool);

impl Drop for RunGuard<'_> {
    fn drop(&mut self) {
        self.0.store(false, Ordering::Release);
    }
}

impl App {
    pub fn save_profile(&self, user: UserId, range_text: &str, delivery: Delivery) -> Result<CaProfile> {
        let ranges = RangeList::parse(range_text).map_err(|e| Error::invalid(format!("ranges: {e}")))?;
        self.store.save_profile(user, ranges, delivery)
    }

    pub fn delete_profile(&self, user: UserId, id: ProfileId) -> Result<()> {
        self.store.delete_profile(user, id)
    }

    pub fn run_window_query(&self, profile: &CaProfile, window: TimeWindow) -> AlertResult {
        let dates = window.resolve(self.today());
        let items = self
            .store
            .acquisitions_in(&profile.ranges, &dates)
            .iter()
            .map(|a| a.item())
            .collect();
        AlertResult {
            profile_id: profile.id,
            window,
            dates,
            items,
        }
    }

    /// One result per profile the user owns, or just `only` when given.
    pub fn window_query_for_user(
        &self,
        user: UserId,
        window: TimeWindow,
        only: Option<ProfileId>,
    ) -> Result<Vec<AlertResult>> {
        let profiles = match only {
            Some(id) => {
                let p = self.store.profile(id)?;
                if p.user_id != user {
                    return Err(Error::Forbidden);
                }
                vec![p]
            }
            None => self.store.profiles_for(user),
        };
        Ok(profiles.iter().map(|p| self.run_window_query(p, window)).collect())
    }

    /// Retries queued mail; whatever still fails stays queued.
    pub fn flush_outbox(&self) -> Result<OutboxReport> {
        let mut report = OutboxReport::default();
        for mail in self.store.outbox() {
            match self.mailer.send(&mail) {
                Ok(()) => {
                    self.store.dequeue_mail(&mail.id)?;
                    report.delivered += 1;
                }
                Err(e) => {
                    tracing::warn!(id = %mail.id, error = %e, "outbox delivery failed");
                    report.pending += 1;
                }
            }
        }
        Ok(report)
    }

    /// Sends or queues `mail`; true if it went out now.
    pub(crate) fn deliver(&self, mail: Email) -> Result<bool> {
        match self.mailer.send(&mail) {
            Ok(()) => Ok(true),
            Err(e) => {
                tracing::warn!(id = %mail.id, error = %e, "send failed, queued for retry");
                self.store.enqueue_mail(mail)?;
                Ok(false)
            }
        }
    }

    /// Emails every email-delivery profile its matches from the previous
    /// complete week. Each (profile, week) is sent at most once. Only one
    /// run may be active at a time.
    pub fn weekly_run(&self) -> Result<WeeklyReport> {
        if self
            .weekly_running
            .compare_exchange(false, true, Ordering::Acquire, Ordering::Relaxed)
            .is_err()
        {
            return Err(Error::Busy);
        }
        let _guard = RunGuard(&self.weekly_running);

        let outbox = self.flush_outbox()?;
        let window = TimeWindow::previous_week();
        let dates = window.resolve(self.today());
        let week = iso_week_label(dates.start);
        let mut report = WeeklyReport {
            week: week.clone(),
            outbox_delivered: outbox.delivered,
            outbox_pending: outbox.pending,
            ..WeeklyReport::default()
        };

        for profile in self.store.profiles() {
            if profile.delivery != Delivery::Email {
                continue;
            }
            report.profiles_evaluated += 1;
            if self.store.is_dispatched(profile.id, &week) {
                report.already_sent += 1;
                continue;
            }
            let result = self.run_window_query(&profile, window);
            let user = self.store.user(profile.user_id)?;
            let Some(digest) = format_digest(&result, &profile.ranges, &week, &user.name) else {
                report.emails_suppressed += 1;
                continue;
            };
            if user.email.trim().is_empty() {
                report.skipped_no_address += 1;
                continue;
            }
            let mail = Email {
                id: format!("{}_{}", profile.id, week),
                from: self.settings.mail_from.clone(),
                to: Mailbox::new(user.name.clone(), user.email.clone()),
                subject: digest.subject,
                body: digest.body,
                date: self.local_now(),
            };
            if self.deliver(mail)? {
                report.emails_sent += 1;
            } else {
                report.queued_for_retry += 1;
            }
            self.store.mark_dispatched(profile.id, &week)?;
        }
        tracing::info!(?report, "weekly run finished");
        Ok(report)
    }
}
