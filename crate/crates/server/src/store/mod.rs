//! Persistent tables with referential integrity.
//!
//! All writes go through [`Store::commit`]: the closure validates against
//! the current state and returns the events to record. Nothing changes
//! unless validation succeeds and the journal append succeeds, so a failed
//! mutation is invisible to readers. Writers are serialized by a single
//! lock; readers see a consistent state.

mod ingest;
mod persist;
mod seed;
mod state;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Bound;
use std::sync::{Arc, RwLock};

use chrono::NaiveDate;
use mylibrary_core::callno::RangeList;
use mylibrary_core::model::{
    validate_discipline, validate_librarian, validate_message, validate_resource, validate_user,
    Discipline, DisciplineId, Librarian, LibrarianId, LibrarianRole, Message, MessageId,
    MessageScope, ProfileId, Resource, ResourceId, ResourceKind, Section, User, UserId,
};
use mylibrary_core::sdi::{Acquisition, CaProfile, Delivery};
use mylibrary_core::window::DateRange;
use serde::{Deserialize, Serialize};

pub use ingest::{parse_acquisitions_tsv, AcquisitionRecord, IngestReport};
pub use persist::{FileJournal, JournalRecord, MemoryPersistence, Persistence};
pub use seed::{load_seed, SeedReport};
pub use state::{AdminAccount, Event, QuarantinedRecord, RecommendationSet, SelectionSet, State};

use crate::clock::{Clock, SystemClock};
use crate::error::{Error, Result};
use crate::mail::Email;
use state::acquisition_key;

/// Proposed writes plus id allocation against a read-only view.
pub struct Tx<'a> {
    pub state: &'a State,
    next_id: u64,
    events: Vec<Event>,
}

impl Tx<'_> {
    pub fn id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }

    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }
}

struct Inner {
    state: State,
    seq: u64,
    persistence: Box<dyn Persistence>,
}

pub struct Store {
    inner: RwLock<Inner>,
    clock: Arc<dyn Clock>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeletionReport {
    pub selections: usize,
    pub recommendations: usize,
    pub resources: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct DisciplineInput {
    #[serde(default)]
    pub id: Option<DisciplineId>,
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LibrarianInput {
    #[serde(default)]
    pub id: Option<LibrarianId>,
    pub name: String,
    #[serde(default)]
    pub phone: String,
    #[serde(default)]
    pub email: String,
    pub role: LibrarianRole,
    #[serde(default)]
    pub discipline_ids: BTreeSet<DisciplineId>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ResourceInput {
    #[serde(default)]
    pub id: Option<ResourceId>,
    pub kind: ResourceKind,
    pub title: String,
    pub url: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub url_template: Option<String>,
    #[serde(default)]
    pub discipline_ids: BTreeSet<DisciplineId>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct UserPatch {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub email: Option<String>,
    #[serde(default)]
    pub discipline_id: Option<DisciplineId>,
    #[serde(default)]
    pub email_opt_in: Option<bool>,
}

fn title_order(a: &Resource, b: &Resource) -> std::cmp::Ordering {
    a.title
        .to_lowercase()
        .cmp(&b.title.to_lowercase())
        .then(a.id.cmp(&b.id))
}

/// Sorts resources by title, ignoring case.
pub fn sort_by_title(resources: &mut [Resource]) {
    resources.sort_by(title_order);
}

fn dedup_ids(ids: &[ResourceId]) -> Vec<ResourceId> {
    let mut seen = BTreeSet::new();
    ids.iter().copied().filter(|id| seen.insert(*id)).collect()
}

impl Store {
    pub fn open(mut persistence: Box<dyn Persistence>, clock: Arc<dyn Clock>) -> Result<Self> {
        let (state, seq) = persistence.load()?;
        Ok(Self {
            inner: RwLock::new(Inner {
                state,
                seq,
                persistence,
            }),
            clock,
        })
    }

    pub fn in_memory() -> Self {
        Self::in_memory_with_clock(Arc::new(SystemClock))
    }

    pub fn in_memory_with_clock(clock: Arc<dyn Clock>) -> Self {
        Self::open(Box::new(MemoryPersistence), clock).expect("memory persistence cannot fail")
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn read<T>(&self, f: impl FnOnce(&State) -> T) -> T {
        let inner = self.inner.read().unwrap_or_else(|e| e.into_inner());
        f(&inner.state)
    }

    pub fn commit<T>(&self, f: impl FnOnce(&mut Tx<'_>) -> Result<T>) -> Result<T> {
        let mut inner = self.inner.write().unwrap_or_else(|e| e.into_inner());
        let mut tx = Tx {
            state: &inner.state,
            next_id: inner.state.next_id,
            events: Vec::new(),
        };
        let value = f(&mut tx)?;
        let events = tx.events;
        if events.is_empty() {
            return Ok(value);
        }
        let record = JournalRecord {
            seq: inner.seq + 1,
            at: self.clock.now(),
            events,
        };
        inner.persistence.append(&record)?;
        inner.seq = record.seq;
        for event in record.events {
            inner.state.apply(event);
        }
        let Inner {
            state,
            seq,
            persistence,
        } = &mut *inner;
        if let Err(e) = persistence.maybe_snapshot(state, *seq) {
            tracing::warn!(error = %e, "snapshot failed; journal remains authoritative");
        }
        Ok(value)
    }

    // ---- disciplines -----------------------------------------------------

    pub fn disciplines(&self) -> Vec<Discipline> {
        self.read(|s| s.disciplines.values().cloned().collect())
    }

    pub fn discipline(&self, id: DisciplineId) -> Result<Discipline> {
        self.read(|s| s.disciplines.get(&id).cloned())
            .ok_or_else(|| Error::not_found(format!("discipline {id}")))
    }

    pub fn discipline_by_name(&self, name: &str) -> Option<Discipline> {
        self.read(|s| {
            s.disciplines
                .values()
                .find(|d| d.name.eq_ignore_ascii_case(name.trim()))
                .cloned()
        })
    }

    pub fn upsert_discipline(&self, input: DisciplineInput) -> Result<Discipline> {
        self.commit(|tx| {
            let id = match input.id {
                Some(id) if tx.state.disciplines.contains_key(&id) => id,
                Some(id) => return Err(Error::not_found(format!("discipline {id}"))),
                None => DisciplineId(tx.id()),
            };
            let discipline = Discipline {
                id,
                name: input.name.trim().to_string(),
                description: input.description,
            };
            validate_discipline(&discipline).map_err(Error::Validation)?;
            let clash = tx.state.disciplines.values().any(|d| {
                d.id != id && d.name.to_lowercase() == discipline.name.to_lowercase()
            });
            if clash {
                return Err(Error::Conflict(format!(
                    "discipline `{}` already exists",
                    discipline.name
                )));
            }
            tx.push(Event::PutDiscipline {
                discipline: discipline.clone(),
            });
            Ok(discipline)
        })
    }

    /// Refused while any user or librarian still references the discipline.
    pub fn delete_discipline(&self, id: DisciplineId) -> Result<DeletionReport> {
        self.commit(|tx| {
            let s = tx.state;
            if !s.disciplines.contains_key(&id) {
                return Err(Error::not_found(format!("discipline {id}")));
            }
            let users = s.users.values().filter(|u| u.discipline_id == id).count();
            let librarians = s
                .librarians
                .values()
                .filter(|l| l.discipline_ids.contains(&id))
                .count();
            if users > 0 || librarians > 0 {
                return Err(Error::Referenced { users, librarians });
            }
            let report = DeletionReport {
                selections: 0,
                recommendations: s.recommendations.keys().filter(|(d, _)| *d == id).count(),
                resources: s
                    .resources
                    .values()
                    .filter(|r| r.discipline_ids.contains(&id))
                    .count(),
            };
            tx.push(Event::DeleteDiscipline { id });
            Ok(report)
        })
    }

    // ---- librarians ------------------------------------------------------

    pub fn librarians(&self) -> Vec<Librarian> {
        self.read(|s| s.librarians.values().cloned().collect())
    }

    /// Librarians serving `discipline`, reference librarians first, then by name.
    pub fn librarians_for(&self, discipline: DisciplineId) -> Vec<Librarian> {
        let mut out: Vec<Librarian> = self.read(|s| {
            s.librarians
                .values()
                .filter(|l| l.discipline_ids.contains(&discipline))
                .cloned()
                .collect()
        });
        out.sort_by(|a, b| {
            (a.role as u8, a.name.to_lowercase(), a.id).cmp(&(b.role as u8, b.name.to_lowercase(), b.id))
        });
        out
    }

    pub fn upsert_librarian(&self, input: LibrarianInput) -> Result<Librarian> {
        self.commit(|tx| {
            let id = match input.id {
                Some(id) if tx.state.librarians.contains_key(&id) => id,
                Some(id) => return Err(Error::not_found(format!("librarian {id}"))),
                None => LibrarianId(tx.id()),
            };
            let librarian = Librarian {
                id,
                name: input.name.trim().to_string(),
                phone: input.phone,
                email: input.email,
                role: input.role,
                discipline_ids: input.discipline_ids,
            };
            validate_librarian(&librarian).map_err(Error::Validation)?;
            for d in &librarian.discipline_ids {
                if !tx.state.disciplines.contains_key(d) {
                    return Err(Error::not_found(format!("discipline {d}")));
                }
            }
            tx.push(Event::PutLibrarian {
                librarian: librarian.clone(),
            });
            Ok(librarian)
        })
    }

    pub fn delete_librarian(&self, id: LibrarianId) -> Result<DeletionReport> {
        self.commit(|tx| {
            if !tx.state.librarians.contains_key(&id) {
                return Err(Error::not_found(format!("librarian {id}")));
            }
            tx.push(Event::DeleteLibrarian { id });
            Ok(DeletionReport::default())
        })
    }

    // ---- resources -------------------------------------------------------

    pub fn resources(&self) -> Vec<Resource> {
        self.read(|s| s.resources.values().cloned().collect())
    }

    pub fn resource(&self, id: ResourceId) -> Result<Resource> {
        self.read(|s| s.resources.get(&id).cloned())
            .ok_or_else(|| Error::not_found(format!("resource {id}")))
    }

    /// Creates or replaces a shared (librarian-managed) resource.
    pub fn upsert_resource(&self, input: ResourceInput) -> Result<Resource> {
        self.commit(|tx| {
            let id = match input.id {
                Some(id) => {
                    let existing = tx
                        .state
                        .resources
                        .get(&id)
                        .ok_or_else(|| Error::not_found(format!("resource {id}")))?;
                    if existing.kind != input.kind {
                        return Err(Error::invalid("a resource's kind cannot change"));
                    }
                    id
                }
                None => ResourceId(tx.id()),
            };
            let resource = Resource {
                id,
                kind: input.kind,
                title: input.title.trim().to_string(),
                url: input.url.trim().to_string(),
                description: input.description,
                url_template: input.url_template,
                owner_user_id: None,
                discipline_ids: input.discipline_ids,
            };
            validate_resource(&resource).map_err(Error::Validation)?;
            for d in &resource.discipline_ids {
                if !tx.state.disciplines.contains_key(d) {
                    return Err(Error::not_found(format!("discipline {d}")));
                }
            }
            tx.push(Event::PutResource {
                resource: resource.clone(),
            });
            Ok(resource)
        })
    }

    /// Removes a resource from every selection and recommendation set.
    pub fn delete_resource(&self, id: ResourceId) -> Result<DeletionReport> {
        self.commit(|tx| delete_resource_in(tx, id))
    }

    // ---- recommendations -------------------------------------------------

    pub fn recommendation_sets(&self) -> Vec<RecommendationSet> {
        self.read(|s| s.recommendations.values().cloned().collect())
    }

    pub fn recommendation_set(&self, discipline: DisciplineId, section: Section) -> RecommendationSet {
        self.read(|s| s.recommendations.get(&(discipline, section)).cloned())
            .unwrap_or(RecommendationSet {
                discipline_id: discipline,
                section,
                resource_ids: Vec::new(),
            })
    }

    pub fn set_recommendations(
        &self,
        discipline: DisciplineId,
        section: Section,
        resource_ids: &[ResourceId],
    ) -> Result<RecommendationSet> {
        self.commit(|tx| {
            if !tx.state.disciplines.contains_key(&discipline) {
                return Err(Error::not_found(format!("discipline {discipline}")));
            }
            check_customizable(section)?;
            let ids = dedup_ids(resource_ids);
            for id in &ids {
                let r = tx
                    .state
                    .resources
                    .get(id)
                    .ok_or_else(|| Error::not_found(format!("resource {id}")))?;
                if r.kind.section() != section || r.kind == ResourceKind::PersonalLink {
                    return Err(Error::invalid(format!(
                        "resource {id} cannot be recommended in {section}"
                    )));
                }
            }
            let set = RecommendationSet {
                discipline_id: discipline,
                section,
                resource_ids: ids,
            };
            tx.push(Event::SetRecommendations { set: set.clone() });
            Ok(set)
        })
    }

    /// Resources mapped to `discipline` whose kind belongs in `section`,
    /// sorted by title.
    pub fn list_recommendations(&self, discipline: DisciplineId, section: Section) -> Result<Vec<Resource>> {
        check_customizable(section)?;
        let mut out = self.read(|s| {
            if !s.disciplines.contains_key(&discipline) {
                return Err(Error::not_found(format!("discipline {discipline}")));
            }
            Ok(s.resources
                .values()
                .filter(|r| r.kind.section() == section && r.discipline_ids.contains(&discipline))
                .cloned()
                .collect::<Vec<_>>())
        })?;
        sort_by_title(&mut out);
        Ok(out)
    }

    // ---- users and selections ----------------------------------------------

    /// Creates an account whose selections start as copies of the
    /// discipline's recommendation sets.
    pub fn create_user(
        &self,
        auth_id: &str,
        name: &str,
        email: &str,
        discipline: DisciplineId,
    ) -> Result<User> {
        let now = self.clock.now();
        self.commit(|tx| {
            if tx.state.users_by_auth.contains_key(auth_id) {
                return Err(Error::Conflict(format!("auth id `{auth_id}` already has an account")));
            }
            if !tx.state.disciplines.contains_key(&discipline) {
                return Err(Error::not_found(format!("discipline {discipline}")));
            }
            let user = User {
                id: UserId(tx.id()),
                auth_id: auth_id.to_string(),
                name: name.trim().to_string(),
                email: email.trim().to_string(),
                discipline_id: discipline,
                email_opt_in: true,
                created_at: now,
            };
            validate_user(&user).map_err(Error::Validation)?;
            tx.push(Event::PutUser { user: user.clone() });
            for section in Section::ALL.into_iter().filter(|s| s.is_customizable()) {
                let resource_ids = tx
                    .state
                    .recommendations
                    .get(&(discipline, section))
                    .map(|r| r.resource_ids.clone())
                    .unwrap_or_default();
                tx.push(Event::SetSelections {
                    set: SelectionSet {
                        user_id: user.id,
                        section,
                        resource_ids,
                        customized: false,
                    },
                });
            }
            Ok(user)
        })
    }

    pub fn user(&self, id: UserId) -> Result<User> {
        self.read(|s| s.users.get(&id).cloned())
            .ok_or_else(|| Error::not_found(format!("user {id}")))
    }

    /// Exact, case-sensitive lookup.
    pub fn user_by_auth_id(&self, auth_id: &str) -> Option<User> {
        self.read(|s| s.users_by_auth.get(auth_id).and_then(|id| s.users.get(id)).cloned())
    }

    pub fn users(&self) -> Vec<User> {
        self.read(|s| s.users.values().cloned().collect())
    }

    /// Changing the discipline leaves every selection untouched.
    pub fn update_user(&self, id: UserId, patch: UserPatch) -> Result<User> {
        self.commit(|tx| {
            let mut user = tx
                .state
                .users
                .get(&id)
                .cloned()
                .ok_or_else(|| Error::not_found(format!("user {id}")))?;
            if let Some(d) = patch.discipline_id {
                if !tx.state.disciplines.contains_key(&d) {
                    return Err(Error::not_found(format!("discipline {d}")));
                }
                user.discipline_id = d;
            }
            if let Some(name) = patch.name {
                user.name = name.trim().to_string();
            }
            if let Some(email) = patch.email {
                user.email = email.trim().to_string();
            }
            if let Some(opt_in) = patch.email_opt_in {
                user.email_opt_in = opt_in;
            }
            if tx.state.users.get(&id) != Some(&user) {
                tx.push(Event::PutUser { user: user.clone() });
            }
            Ok(user)
        })
    }

    pub fn selection(&self, user: UserId, section: Section) -> Result<SelectionSet> {
        check_customizable(section)?;
        self.read(|s| {
            if !s.users.contains_key(&user) {
                return Err(Error::not_found(format!("user {user}")));
            }
            Ok(s.selections.get(&(user, section)).cloned().unwrap_or(SelectionSet {
                user_id: user,
                section,
                resource_ids: Vec::new(),
                customized: false,
            }))
        })
    }

    /// The user's selected resources in `section`, sorted by title.
    pub fn selected_resources(&self, user: UserId, section: Section) -> Result<Vec<Resource>> {
        let set = self.selection(user, section)?;
        let mut out: Vec<Resource> = self.read(|s| {
            set.resource_ids
                .iter()
                .filter_map(|id| s.resources.get(id).cloned())
                .collect()
        });
        sort_by_title(&mut out);
        Ok(out)
    }

    /// Replaces the user's selection for `section` with exactly `resource_ids`.
    pub fn set_selections(
        &self,
        user: UserId,
        section: Section,
        resource_ids: &[ResourceId],
    ) -> Result<SelectionSet> {
        self.commit(|tx| {
            if !tx.state.users.contains_key(&user) {
                return Err(Error::not_found(format!("user {user}")));
            }
            check_customizable(section)?;
            let ids = dedup_ids(resource_ids);
            for id in &ids {
                let r = tx
                    .state
                    .resources
                    .get(id)
                    .ok_or_else(|| Error::not_found(format!("resource {id}")))?;
                if r.kind.section() != section {
                    return Err(Error::invalid(format!("resource {id} does not belong in {section}")));
                }
                if r.kind == ResourceKind::PersonalLink && r.owner_user_id != Some(user) {
                    return Err(Error::invalid(format!("resource {id} is another user's personal link")));
                }
            }
            let set = SelectionSet {
                user_id: user,
                section,
                resource_ids: ids,
                customized: true,
            };
            tx.push(Event::SetSelections { set: set.clone() });
            Ok(set)
        })
    }

    pub fn add_personal_link(&self, user: UserId, title: &str, url: &str) -> Result<Resource> {
        self.commit(|tx| {
            if !tx.state.users.contains_key(&user) {
                return Err(Error::not_found(format!("user {user}")));
            }
            let resource = Resource {
                id: ResourceId(tx.id()),
                kind: ResourceKind::PersonalLink,
                title: title.trim().to_string(),
                url: url.trim().to_string(),
                description: String::new(),
                url_template: None,
                owner_user_id: Some(user),
                discipline_ids: BTreeSet::new(),
            };
            validate_resource(&resource).map_err(Error::Validation)?;
            let mut resource_ids = tx
                .state
                .selections
                .get(&(user, Section::PersonalLinks))
                .map(|s| s.resource_ids.clone())
                .unwrap_or_default();
            resource_ids.push(resource.id);
            tx.push(Event::PutResource {
                resource: resource.clone(),
            });
            tx.push(Event::SetSelections {
                set: SelectionSet {
                    user_id: user,
                    section: Section::PersonalLinks,
                    resource_ids,
                    customized: true,
                },
            });
            Ok(resource)
        })
    }

    pub fn delete_personal_link(&self, user: UserId, id: ResourceId) -> Result<DeletionReport> {
        self.commit(|tx| {
            let r = tx
                .state
                .resources
                .get(&id)
                .ok_or_else(|| Error::not_found(format!("resource {id}")))?;
            if r.kind != ResourceKind::PersonalLink || r.owner_user_id != Some(user) {
                return Err(Error::Forbidden);
            }
            delete_resource_in(tx, id)
        })
    }

    // ---- messages --------------------------------------------------------

    pub fn global_message(&self) -> Option<Message> {
        self.read(|s| s.global_message.clone())
    }

    pub fn discipline_message(&self, discipline: DisciplineId) -> Option<Message> {
        self.read(|s| s.discipline_messages.get(&discipline).cloned())
    }

    pub fn message_history(&self) -> Vec<Message> {
        self.read(|s| s.message_history.clone())
    }

    /// Replaces the live message for the scope; an empty body clears it.
    pub fn set_message(&self, discipline: Option<DisciplineId>, body: &str) -> Result<Message> {
        let now = self.clock.now();
        self.commit(|tx| {
            if let Some(d) = discipline {
                if !tx.state.disciplines.contains_key(&d) {
                    return Err(Error::not_found(format!("discipline {d}")));
                }
            }
            let message = Message {
                id: MessageId(tx.id()),
                scope: if discipline.is_some() {
                    MessageScope::Discipline
                } else {
                    MessageScope::Global
                },
                discipline_id: discipline,
                body: body.trim().to_string(),
                updated_at: now,
            };
            validate_message(&message).map_err(Error::Validation)?;
            tx.push(Event::SetMessage {
                message: message.clone(),
            });
            Ok(message)
        })
    }

    // ---- current-awareness profiles ----------------------------------------

    pub fn save_profile(&self, user: UserId, ranges: RangeList, delivery: Delivery) -> Result<CaProfile> {
        self.commit(|tx| {
            if !tx.state.users.contains_key(&user) {
                return Err(Error::not_found(format!("user {user}")));
            }
            let profile = CaProfile {
                id: ProfileId(tx.id()),
                user_id: user,
                ranges,
                delivery,
            };
            tx.push(Event::PutProfile {
                profile: profile.clone(),
            });
            Ok(profile)
        })
    }

    pub fn delete_profile(&self, user: UserId, id: ProfileId) -> Result<()> {
        self.commit(|tx| {
            let profile = tx
                .state
                .profiles
                .get(&id)
                .ok_or_else(|| Error::not_found(format!("profile {id}")))?;
            if profile.user_id != user {
                return Err(Error::Forbidden);
            }
            tx.push(Event::DeleteProfile { id });
            Ok(())
        })
    }

    pub fn profile(&self, id: ProfileId) -> Result<CaProfile> {
        self.read(|s| s.profiles.get(&id).cloned())
            .ok_or_else(|| Error::not_found(format!("profile {id}")))
    }

    pub fn profiles_for(&self, user: UserId) -> Vec<CaProfile> {
        self.read(|s| s.profiles.values().filter(|p| p.user_id == user).cloned().collect())
    }

    pub fn profiles(&self) -> Vec<CaProfile> {
        self.read(|s| s.profiles.values().cloned().collect())
    }

    // ---- acquisitions ----------------------------------------------------

    /// Stores parseable records, quarantines the rest and skips rows already
    /// present (same call number, accession date and title).
    pub fn record_acquisitions(&self, batch: Vec<AcquisitionRecord>) -> Result<IngestReport> {
        self.record_ingest(batch, Vec::new())
    }

    pub(crate) fn record_ingest(
        &self,
        batch: Vec<AcquisitionRecord>,
        mut quarantined: Vec<QuarantinedRecord>,
    ) -> Result<IngestReport> {
        self.commit(|tx| {
            let mut accepted = Vec::new();
            let mut seen = BTreeSet::new();
            let mut duplicates = 0;
            for record in batch {
                match record.parse() {
                    Ok(acq) => {
                        let key = acquisition_key(&acq);
                        if tx.state.acquisitions.contains_key(&key) || !seen.insert(key) {
                            duplicates += 1;
                        } else {
                            accepted.push(acq);
                        }
                    }
                    Err(q) => {
                        tracing::warn!(text = %q.text, reason = %q.reason, "quarantining acquisition");
                        quarantined.push(q);
                    }
                }
            }
            let report = IngestReport {
                accepted: accepted.len(),
                duplicates,
                quarantined: quarantined.len(),
                reasons: quarantined.clone(),
            };
            if !accepted.is_empty() {
                tx.push(Event::AddAcquisitions { items: accepted });
            }
            if !quarantined.is_empty() {
                tx.push(Event::Quarantine { items: quarantined });
            }
            Ok(report)
        })
    }

    pub fn acquisition_count(&self) -> usize {
        self.read(|s| s.acquisitions.len())
    }

    pub fn quarantine(&self) -> Vec<QuarantinedRecord> {
        self.read(|s| s.quarantine.clone())
    }

    /// Acquisitions in any of `ranges` accessioned within `dates`, in shelf
    /// order. Uses sort-key range scans rather than a full pass.
    pub fn acquisitions_in(&self, ranges: &RangeList, dates: &DateRange) -> Vec<Acquisition> {
        self.read(|s| {
            let mut hits: BTreeMap<&state::AcquisitionKey, &Acquisition> = BTreeMap::new();
            for range in ranges.ranges() {
                let (start, end) = range.key_bounds();
                let lower = (start, NaiveDate::MIN, String::new());
                let upper = (end, NaiveDate::MIN, String::new());
                for (key, acq) in s
                    .acquisitions
                    .range((Bound::Included(lower), Bound::Excluded(upper)))
                {
                    if dates.contains(acq.accession_date) {
                        hits.insert(key, acq);
                    }
                }
            }
            hits.into_values().cloned().collect()
        })
    }

    // ---- mail bookkeeping ------------------------------------------------

    pub fn is_dispatched(&self, profile: ProfileId, week: &str) -> bool {
        self.read(|s| s.dispatched.contains(&(profile, week.to_string())))
    }

    pub fn mark_dispatched(&self, profile: ProfileId, week: &str) -> Result<()> {
        self.commit(|tx| {
            tx.push(Event::MarkDispatched {
                profile_id: profile,
                week: week.to_string(),
            });
            Ok(())
        })
    }

    pub fn outbox(&self) -> Vec<Email> {
        self.read(|s| s.outbox.values().cloned().collect())
    }

    pub fn enqueue_mail(&self, mail: Email) -> Result<()> {
        self.commit(|tx| {
            tx.push(Event::Enqueue { mail });
            Ok(())
        })
    }

    pub fn dequeue_mail(&self, id: &str) -> Result<()> {
        self.commit(|tx| {
            tx.push(Event::Dequeue { id: id.to_string() });
            Ok(())
        })
    }

    // ---- admin accounts --------------------------------------------------

    pub fn admin(&self, username: &str) -> Option<AdminAccount> {
        self.read(|s| s.admins.get(username).cloned())
    }

    pub fn put_admin(&self, account: AdminAccount) -> Result<()> {
        if account.username.trim().is_empty() {
            return Err(Error::invalid("username must not be empty"));
        }
        self.commit(|tx| {
            tx.push(Event::PutAdmin { account });
            Ok(())
        })
    }

    /// Every broken reference in the current state; empty when consistent.
    pub fn integrity_violations(&self) -> Vec<String> {
        self.read(|s| {
            let mut out = Vec::new();
            for u in s.users.values() {
                if !s.disciplines.contains_key(&u.discipline_id) {
                    out.push(format!("user {} -> missing discipline {}", u.id, u.discipline_id));
                }
            }
            for l in s.librarians.values() {
                for d in &l.discipline_ids {
                    if !s.disciplines.contains_key(d) {
                        out.push(format!("librarian {} -> missing discipline {d}", l.id));
                    }
                }
            }
            for set in s.selections.values() {
                for id in &set.resource_ids {
                    if !s.resources.contains_key(id) {
                        out.push(format!("selection {}/{} -> missing resource {id}", set.user_id, set.section));
                    }
                }
            }
            for set in s.recommendations.values() {
                if !s.disciplines.contains_key(&set.discipline_id) {
                    out.push(format!("recommendation -> missing discipline {}", set.discipline_id));
                }
                for id in &set.resource_ids {
                    if !s.resources.contains_key(id) {
                        out.push(format!(
                            "recommendation {}/{} -> missing resource {id}",
                            set.discipline_id, set.section
                        ));
                    }
                }
            }
            for r in s.resources.values() {
                for d in &r.discipline_ids {
                    if !s.disciplines.contains_key(d) {
                        out.push(format!("resource {} -> missing discipline {d}", r.id));
                    }
                }
            }
            out
        })
    }
}

fn check_customizable(section: Section) -> Result<()> {
    if section.is_customizable() {
        Ok(())
    } else {
        Err(Error::invalid(format!("section {section} is not customizable")))
    }
}

fn delete_resource_in(tx: &mut Tx<'_>, id: ResourceId) -> Result<DeletionReport> {
    let s = tx.state;
    if !s.resources.contains_key(&id) {
        return Err(Error::not_found(format!("resource {id}")));
    }
    let report = DeletionReport {
        selections: s
            .selections
            .values()
            .filter(|set| set.resource_ids.contains(&id))
            .count(),
        recommendations: s
            .recommendations
            .values()
            .filter(|set| set.resource_ids.contains(&id))
            .count(),
        resources: 1,
    };
    tx.push(Event::DeleteResource { id });
    Ok(report)
}
