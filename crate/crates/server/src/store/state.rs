//! In-memory tables and the event vocabulary that mutates them.
//!
//! Every mutation is expressed as one or more [`Event`]s. The store
//! validates against the current state first and only then journals and
//! applies the events, so `apply` itself never fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, NaiveDate, Utc};
use mylibrary_core::model::{
    Discipline, DisciplineId, Librarian, LibrarianId, Message, MessageScope, ProfileId, Resource,
    ResourceId, Section, User, UserId,
};
use mylibrary_core::sdi::{Acquisition, CaProfile};
use serde::{Deserialize, Serialize};

use crate::mail::Email;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionSet {
    pub user_id: UserId,
    pub section: Section,
    pub resource_ids: Vec<ResourceId>,
    /// Set once the user has submitted this section's customization form.
    pub customized: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendationSet {
    pub discipline_id: DisciplineId,
    pub section: Section,
    pub resource_ids: Vec<ResourceId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdminAccount {
    pub username: String,
    pub password_verifier: String,
    pub created_at: DateTime<Utc>,
}

/// Acquisition row rejected at ingest, kept for inspection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarantinedRecord {
    pub line: Option<usize>,
    pub text: String,
    pub reason: String,
}

/// Acquisition index key: shelf-order bytes, then date and title so the
/// same call number may arrive more than once.
pub type AcquisitionKey = (Vec<u8>, NaiveDate, String);

pub fn acquisition_key(acq: &Acquisition) -> AcquisitionKey {
    (
        acq.call_number.sort_key().into_bytes(),
        acq.accession_date,
        acq.title.clone(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Event {
    PutDiscipline { discipline: Discipline },
    DeleteDiscipline { id: DisciplineId },
    PutLibrarian { librarian: Librarian },
    DeleteLibrarian { id: LibrarianId },
    PutResource { resource: Resource },
    DeleteResource { id: ResourceId },
    SetRecommendations { set: RecommendationSet },
    PutUser { user: User },
    SetSelections { set: SelectionSet },
    SetMessage { message: Message },
    PutProfile { profile: CaProfile },
    DeleteProfile { id: ProfileId },
    AddAcquisitions { items: Vec<Acquisition> },
    Quarantine { items: Vec<QuarantinedRecord> },
    MarkDispatched { profile_id: ProfileId, week: String },
    Enqueue { mail: Email },
    Dequeue { id: String },
    PutAdmin { account: AdminAccount },
}

#[derive(Debug, Clone, Default)]
pub struct State {
    pub next_id: u64,
    pub disciplines: BTreeMap<DisciplineId, Discipline>,
    pub librarians: BTreeMap<LibrarianId, Librarian>,
    pub resources: BTreeMap<ResourceId, Resource>,
    pub users: BTreeMap<UserId, User>,
    pub users_by_auth: HashMap<String, UserId>,
    pub selections: BTreeMap<(UserId, Section), SelectionSet>,
    pub recommendations: BTreeMap<(DisciplineId, Section), RecommendationSet>,
    pub message_history: Vec<Message>,
    pub global_message: Option<Message>,
    pub discipline_messages: BTreeMap<DisciplineId, Message>,
    pub profiles: BTreeMap<ProfileId, CaProfile>,
    pub acquisitions: BTreeMap<AcquisitionKey, Acquisition>,
    pub quarantine: Vec<QuarantinedRecord>,
    pub dispatched: BTreeSet<(ProfileId, String)>,
    pub outbox: BTreeMap<String, Email>,
    pub admins: BTreeMap<String, AdminAccount>,
}

impl State {
    pub fn allocate_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }

    fn see_id(&mut self, id: u64) {
        self.next_id = self.next_id.max(id);
    }

    pub fn apply(&mut self, event: Event) {
        match event {
            Event::PutDiscipline { discipline } => {
                self.see_id(discipline.id.0);
                self.disciplines.insert(discipline.id, discipline);
            }
            Event::DeleteDiscipline { id } => {
                self.disciplines.remove(&id);
                self.recommendations.retain(|(d, _), _| *d != id);
                self.discipline_messages.remove(&id);
                self.message_history.retain(|m| m.discipline_id != Some(id));
                for resource in self.resources.values_mut() {
                    resource.discipline_ids.remove(&id);
                }
            }
            Event::PutLibrarian { librarian } => {
                self.see_id(librarian.id.0);
                self.librarians.insert(librarian.id, librarian);
            }
            Event::DeleteLibrarian { id } => {
                self.librarians.remove(&id);
            }
            Event::PutResource { resource } => {
                self.see_id(resource.id.0);
                self.resources.insert(resource.id, resource);
            }
            Event::DeleteResource { id } => {
                self.resources.remove(&id);
                for set in self.selections.values_mut() {
                    set.resource_ids.retain(|r| *r != id);
                }
                for set in self.recommendations.values_mut() {
                    set.resource_ids.retain(|r| *r != id);
                }
            }
            Event::SetRecommendations { set } => {
                self.recommendations.insert((set.discipline_id, set.section), set);
            }
            Event::PutUser { user } => {
                self.see_id(user.id.0);
                if let Some(old) = self.users.get(&user.id) {
                    self.users_by_auth.remove(&old.auth_id);
                }
                self.users_by_auth.insert(user.auth_id.clone(), user.id);
                self.users.insert(user.id, user);
            }
            Event::SetSelections { set } => {
                self.selections.insert((set.user_id, set.section), set);
            }
            Event::SetMessage { message } => {
                self.see_id(message.id.0);
                let live = (!message.body.is_empty()).then(|| message.clone());
                match (message.scope, message.discipline_id) {
                    (MessageScope::Global, _) => self.global_message = live,
                    (MessageScope::Discipline, Some(d)) => match live {
                        Some(m) => {
                            self.discipline_messages.insert(d, m);
                        }
                        None => {
                            self.discipline_messages.remove(&d);
                        }
                    },
                    (MessageScope::Discipline, None) => {}
                }
                self.message_history.push(message);
            }
            Event::PutProfile { profile } => {
                self.see_id(profile.id.0);
                self.profiles.insert(profile.id, profile);
            }
            Event::DeleteProfile { id } => {
                self.profiles.remove(&id);
            }
            Event::AddAcquisitions { items } => {
                for acq in items {
                    self.acquisitions.insert(acquisition_key(&acq), acq);
                }
            }
            Event::Quarantine { items } => self.quarantine.extend(items),
            Event::MarkDispatched { profile_id, week } => {
                self.dispatched.insert((profile_id, week));
            }
            Event::Enqueue { mail } => {
                self.outbox.insert(mail.id.clone(), mail);
            }
            Event::Dequeue { id } => {
                self.outbox.remove(&id);
            }
            Event::PutAdmin { account } => {
                self.admins.insert(account.username.clone(), account);
            }
        }
    }

    /// Events that rebuild this state from scratch, used for snapshots.
    pub fn to_events(&self) -> Vec<Event> {
        let mut out = Vec::new();
        out.extend(self.disciplines.values().cloned().map(|discipline| Event::PutDiscipline { discipline }));
        out.extend(self.librarians.values().cloned().map(|librarian| Event::PutLibrarian { librarian }));
        out.extend(self.resources.values().cloned().map(|resource| Event::PutResource { resource }));
        out.extend(self.recommendations.values().cloned().map(|set| Event::SetRecommendations { set }));
        out.extend(self.users.values().cloned().map(|user| Event::PutUser { user }));
        out.extend(self.selections.values().cloned().map(|set| Event::SetSelections { set }));
        out.extend(self.message_history.iter().cloned().map(|message| Event::SetMessage { message }));
        out.extend(self.profiles.values().cloned().map(|profile| Event::PutProfile { profile }));
        for chunk in self.acquisitions.values().cloned().collect::<Vec<_>>().chunks(500) {
            out.push(Event::AddAcquisitions { items: chunk.to_vec() });
        }
        if !self.quarantine.is_empty() {
            out.push(Event::Quarantine { items: self.quarantine.clone() });
        }
        out.extend(self.dispatched.iter().cloned().map(|(profile_id, week)| Event::MarkDispatched { profile_id, week }));
        out.extend(self.outbox.values().cloned().map(|mail| Event::Enqueue { mail }));
        out.extend(self.admins.values().cloned().map(|account| Event::PutAdmin { account }));
        out
    }
}
