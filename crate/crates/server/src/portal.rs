//! The user-facing side: sessions, page assembly and customization.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use mylibrary_core::model::{
    classify, section_order, Discipline, DisciplineId, Librarian, Resource, ResourceId,
    ResourceKind, Section, ServiceClassification, User, UserId,
};
use mylibrary_core::quicksearch::{expand, QuickSearchError};
use mylibrary_core::sdi::{CaProfile, Delivery};
use serde::{Deserialize, Serialize};

use crate::app::App;
use crate::auth::Session;
use crate::config::Contact;
use crate::error::{Error, Result};
use crate::store::{sort_by_title, DeletionReport, UserPatch};

/// Optional onboarding details supplied alongside a login assertion.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct LoginHints {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub email: Option<String>,
    /// Discipline id or name.
    #[serde(default)]
    pub discipline: Option<String>,
}

#[derive(Debug, Clone)]
pub enum Resolution {
    Session {
        session: Session<UserId>,
        user: User,
        /// The account was created by this request.
        created: bool,
        /// A new token was issued and must be sent to the client.
        issued: bool,
    },
    Redirect(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PageDocument {
    pub user: UserSummary,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserSummary {
    pub id: UserId,
    pub name: String,
    pub email: String,
    pub email_opt_in: bool,
    pub discipline: Discipline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub section: Section,
    pub title: &'static str,
    pub classification: Option<ServiceClassification>,
    pub customizable: bool,
    pub customized: bool,
    pub content: BlockContent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NavItem {
    pub section: Section,
    pub title: &'static str,
    pub anchor: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowForm {
    pub from_weeks_ago: u32,
    pub to_weeks_ago: u32,
    pub deliveries: [Delivery; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BlockContent {
    Header {
        navigation: Vec<NavItem>,
        logout: &'static str,
    },
    Message {
        body: String,
        updated_at: Option<DateTime<Utc>>,
    },
    Librarians {
        librarians: Vec<Librarian>,
        reference_contact: Contact,
    },
    Resources {
        items: Vec<Resource>,
    },
    CurrentAwareness {
        profiles: Vec<CaProfile>,
        form: WindowForm,
    },
    Footer {
        version: &'static str,
        contact: Contact,
        logout: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormItem {
    pub resource: Resource,
    pub checked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormGroup {
    /// `None` for items not mapped to any discipline.
    pub discipline_id: Option<DisciplineId>,
    pub label: String,
    pub items: Vec<FormItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CustomizationForm {
    pub section: Section,
    pub selected: Vec<ResourceId>,
    pub groups: Vec<FormGroup>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DispatchResponse {
    Form(CustomizationForm),
    Page(PageDocument),
}

pub fn section_title(section: Section) -> &'static str {
    match section {
        Section::Header => "MyLibrary",
        Section::GlobalMessage => "Global message",
        Section::MessageFromLibrarian => "Message from your librarian",
        Section::YourLibrarians => "Your librarians",
        Section::LibraryLinks => "Library links",
        Section::UniversityLinks => "University links",
        Section::CurrentAwareness => "Current awareness",
        Section::PersonalLinks => "Personal links",
        Section::QuickSearches => "Quick searches",
        Section::ReferenceShelf => "Reference shelf",
        Section::BibliographicDatabases => "Bibliographic databases",
        Section::ElectronicJournals => "Electronic journals",
        Section::Footer => "Footer",
    }
}

pub fn parse_section(text: &str) -> Result<Section> {
    text.parse::<Section>().map_err(Error::invalid)
}

const LOGOUT_PATH: &str = "/logout";

impl App {
    /// A live token wins; otherwise an assertion logs the caller in,
    /// creating the account on first sight; otherwise redirect to log in.
    pub fn resolve_session(
        &self,
        token: Option<&str>,
        assertion: Option<&str>,
        hints: &LoginHints,
    ) -> Result<Resolution> {
        let now = self.now();
        if let Some(session) = token.and_then(|t| self.sessions.resolve(t, now)) {
            if let Ok(user) = self.store.user(session.subject) {
                return Ok(Resolution::Session {
                    session,
                    user,
                    created: false,
                    issued: false,
                });
            }
            self.sessions.revoke(&session.token);
        }
        let Some(assertion) = assertion else {
            return Ok(Resolution::Redirect(self.settings.login_url.clone()));
        };
        let identity = self.authenticator.verify(assertion, now)?;
        let (user, created) = match self.store.user_by_auth_id(&identity.auth_id) {
            Some(user) => (user, false),
            None => {
                let discipline = self.onboarding_discipline(hints.discipline.as_deref())?;
                let name = identity
                    .name
                    .clone()
                    .or_else(|| hints.name.clone())
                    .unwrap_or_else(|| identity.auth_id.clone());
                let email = identity.email.clone().or_else(|| hints.email.clone()).unwrap_or_default();
                match self.store.create_user(&identity.auth_id, &name, &email, discipline) {
                    Ok(user) => (user, true),
                    // Lost a race with a concurrent first login for the same id.
                    Err(Error::Conflict(_)) => (
                        self.store
                            .user_by_auth_id(&identity.auth_id)
                            .ok_or(Error::AuthenticationFailed)?,
                        false,
                    ),
                    Err(e) => return Err(e),
                }
            }
        };
        let session = self.sessions.issue(user.id, now);
        Ok(Resolution::Session {
            session,
            user,
            created,
            issued: true,
        })
    }

    /// Session lookup for every endpoint except login and logout.
    pub fn authenticate(&self, token: Option<&str>) -> Option<(Session<UserId>, User)> {
        let session = self.sessions.resolve(token?, self.now())?;
        let user = self.store.user(session.subject).ok()?;
        Some((session, user))
    }

    fn onboarding_discipline(&self, hint: Option<&str>) -> Result<DisciplineId> {
        if let Some(hint) = hint.map(str::trim).filter(|h| !h.is_empty()) {
            if let Ok(id) = hint.parse::<DisciplineId>() {
                return self.store.discipline(id).map(|d| d.id);
            }
            return self
                .store
                .discipline_by_name(hint)
                .map(|d| d.id)
                .ok_or_else(|| Error::not_found(format!("discipline `{hint}`")));
        }
        if let Some(d) = self
            .settings
            .default_discipline
            .as_deref()
            .and_then(|name| self.store.discipline_by_name(name))
        {
            return Ok(d.id);
        }
        self.store
            .disciplines()
            .first()
            .map(|d| d.id)
            .ok_or_else(|| Error::invalid("no disciplines are configured yet"))
    }

    pub fn logout(&self, token: Option<&str>) {
        if let Some(token) = token {
            self.sessions.revoke(token);
        }
    }

    pub fn assemble_page(&self, user_id: UserId) -> Result<PageDocument> {
        let user = self.store.user(user_id)?;
        let discipline = self.store.discipline(user.discipline_id)?;
        let mut blocks = Vec::with_capacity(section_order().len());
        for &section in section_order() {
            let mut customized = false;
            let content = match section {
                Section::Header => BlockContent::Header {
                    navigation: section_order()
                        .iter()
                        .filter(|s| s.is_service())
                        .map(|&s| NavItem {
                            section: s,
                            title: section_title(s),
                            anchor: format!("#{s}"),
                        })
                        .collect(),
                    logout: LOGOUT_PATH,
                },
                Section::GlobalMessage => message_block(self.store.global_message()),
                Section::MessageFromLibrarian => {
                    message_block(self.store.discipline_message(user.discipline_id))
                }
                Section::YourLibrarians => BlockContent::Librarians {
                    librarians: self.store.librarians_for(user.discipline_id),
                    reference_contact: self.settings.reference_contact.clone(),
                },
                Section::CurrentAwareness => {
                    let profiles = self.store.profiles_for(user.id);
                    customized = !profiles.is_empty();
                    BlockContent::CurrentAwareness {
                        profiles,
                        form: WindowForm {
                            from_weeks_ago: 2,
                            to_weeks_ago: 0,
                            deliveries: [Delivery::Screen, Delivery::Email],
                        },
                    }
                }
                Section::Footer => BlockContent::Footer {
                    version: env!("CARGO_PKG_VERSION"),
                    contact: self.settings.reference_contact.clone(),
                    logout: LOGOUT_PATH,
                },
                s => {
                    customized = self.store.selection(user.id, s)?.customized;
                    BlockContent::Resources {
                        items: self.store.selected_resources(user.id, s)?,
                    }
                }
            };
            blocks.push(Block {
                section,
                title: section_title(section),
                classification: classify(section).ok(),
                customizable: section.is_customizable(),
                customized,
                content,
            });
        }
        Ok(PageDocument {
            user: UserSummary {
                id: user.id,
                name: user.name,
                email: user.email,
                email_opt_in: user.email_opt_in,
                discipline,
            },
            blocks,
        })
    }

    /// The `get` command: every resource that may go in `section`, grouped by
    /// discipline with the user's own discipline first.
    pub fn customization_form(&self, user_id: UserId, section: Section) -> Result<CustomizationForm> {
        let user = self.store.user(user_id)?;
        let selected = self.store.selection(user_id, section)?.resource_ids;
        let checked: BTreeSet<ResourceId> = selected.iter().copied().collect();
        let item = |r: &Resource| FormItem {
            resource: r.clone(),
            checked: checked.contains(&r.id),
        };
        let Some(kind) = section.resource_kind() else {
            return Ok(CustomizationForm {
                section,
                selected,
                groups: Vec::new(),
            });
        };
        let mut candidates: Vec<Resource> = self
            .store
            .resources()
            .into_iter()
            .filter(|r| r.kind == kind)
            .filter(|r| kind != ResourceKind::PersonalLink || r.owner_user_id == Some(user_id))
            .collect();
        sort_by_title(&mut candidates);

        let mut disciplines = self.store.disciplines();
        disciplines.sort_by_key(|d| (d.id != user.discipline_id, d.name.to_lowercase(), d.id));
        let mut groups: Vec<FormGroup> = disciplines
            .into_iter()
            .map(|d| FormGroup {
                discipline_id: Some(d.id),
                items: candidates
                    .iter()
                    .filter(|r| r.discipline_ids.contains(&d.id))
                    .map(item)
                    .collect(),
                label: d.name,
            })
            .filter(|g| !g.items.is_empty())
            .collect();
        let unmapped: Vec<FormItem> = candidates
            .iter()
            .filter(|r| r.discipline_ids.is_empty())
            .map(item)
            .collect();
        if !unmapped.is_empty() {
            let label = if kind == ResourceKind::PersonalLink { "Your links" } else { "General" };
            groups.push(FormGroup {
                discipline_id: None,
                label: label.to_string(),
                items: unmapped,
            });
        }
        Ok(CustomizationForm {
            section,
            selected,
            groups,
        })
    }

    /// The `set` command.
    pub fn customize(&self, user_id: UserId, section: Section, ids: &[ResourceId]) -> Result<PageDocument> {
        if section == Section::CurrentAwareness && !ids.is_empty() {
            return Err(Error::invalid(
                "current awareness is customized through profiles, not resource ids",
            ));
        }
        self.store.set_selections(user_id, section, ids)?;
        self.assemble_page(user_id)
    }

    /// Program-style entry point: `get` returns a form, `set` stores and
    /// shows the page, anything else just shows the page.
    pub fn dispatch(
        &self,
        user_id: UserId,
        command: Option<&str>,
        section: Option<&str>,
        ids: &[ResourceId],
    ) -> Result<DispatchResponse> {
        let section = section.map(parse_section).transpose()?;
        let need = || section.ok_or_else(|| Error::invalid("this command needs a section"));
        match command {
            Some("get") => Ok(DispatchResponse::Form(self.customization_form(user_id, need()?)?)),
            Some("set") => Ok(DispatchResponse::Page(self.customize(user_id, need()?, ids)?)),
            _ => Ok(DispatchResponse::Page(self.assemble_page(user_id)?)),
        }
    }

    /// URL to redirect to for a quick search with one of the user's engines.
    pub fn quick_search(&self, user_id: UserId, engine: ResourceId, query: &str) -> Result<String> {
        let selected = self.store.selection(user_id, Section::QuickSearches)?;
        if !selected.resource_ids.contains(&engine) {
            return Err(Error::not_found(format!("quick-search engine {engine}")));
        }
        let resource = self.store.resource(engine)?;
        let template = resource
            .url_template
            .as_deref()
            .ok_or_else(|| Error::not_found(format!("quick-search engine {engine}")))?;
        expand(template, query).map_err(|e| match e {
            QuickSearchError::EmptyQuery => Error::invalid(e),
            QuickSearchError::BadTemplate { .. } => Error::Storage(e.to_string()),
        })
    }

    pub fn add_personal_link(&self, user_id: UserId, label: &str, link: &str) -> Result<Resource> {
        let parsed = url::Url::parse(link.trim()).map_err(|e| Error::invalid(format!("url: {e}")))?;
        if !matches!(parsed.scheme(), "http" | "https") || parsed.host_str().is_none() {
            return Err(Error::invalid("url must be an absolute http or https address"));
        }
        self.store.add_personal_link(user_id, label, parsed.as_str())
    }

    pub fn delete_personal_link(&self, user_id: UserId, id: ResourceId) -> Result<DeletionReport> {
        self.store.delete_personal_link(user_id, id)
    }

    pub fn set_discipline(&self, user_id: UserId, discipline: DisciplineId) -> Result<PageDocument> {
        self.store.update_user(
            user_id,
            UserPatch {
                discipline_id: Some(discipline),
                ..UserPatch::default()
            },
        )?;
        self.assemble_page(user_id)
    }

    pub fn update_preferences(&self, user_id: UserId, patch: UserPatch) -> Result<User> {
        self.store.update_user(user_id, patch)
    }
}

fn message_block(message: Option<mylibrary_core::model::Message>) -> BlockContent {
    match message {
        Some(m) => BlockContent::Message {
            body: m.body,
            updated_at: Some(m.updated_at),
        },
        None => BlockContent::Message {
            body: String::new(),
            updated_at: None,
        },
    }
}
