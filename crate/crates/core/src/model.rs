//! Domain vocabulary shared by every layer of the portal.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl FromStr for $name {
            type Err = core::num::ParseIntError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.parse().map($name)
            }
        }
    };
}

id_type!(UserId);
id_type!(DisciplineId);
id_type!(LibrarianId);
id_type!(ResourceId);
id_type!(MessageId);
id_type!(
    /// Identifier of a saved current-awareness profile.
    ProfileId
);

/// The thirteen blocks of a user's page, in display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Header,
    GlobalMessage,
    MessageFromLibrarian,
    YourLibrarians,
    LibraryLinks,
    UniversityLinks,
    CurrentAwareness,
    PersonalLinks,
    QuickSearches,
    ReferenceShelf,
    BibliographicDatabases,
    ElectronicJournals,
    Footer,
}

const SECTION_ORDER: [Section; 13] = [
    Section::Header,
    Section::GlobalMessage,
    Section::MessageFromLibrarian,
    Section::YourLibrarians,
    Section::LibraryLinks,
    Section::UniversityLinks,
    Section::CurrentAwareness,
    Section::PersonalLinks,
    Section::QuickSearches,
    Section::ReferenceShelf,
    Section::BibliographicDatabases,
    Section::ElectronicJournals,
    Section::Footer,
];

/// Every section, header first and footer last.
pub fn section_order() -> &'static [Section; 13] {
    &SECTION_ORDER
}

impl Section {
    pub const ALL: [Section; 13] = SECTION_ORDER;

    pub fn as_str(self) -> &'static str {
        match self {
            Section::Header => "header",
            Section::GlobalMessage => "global_message",
            Section::MessageFromLibrarian => "message_from_librarian",
            Section::YourLibrarians => "your_librarians",
            Section::LibraryLinks => "library_links",
            Section::UniversityLinks => "university_links",
            Section::CurrentAwareness => "current_awareness",
            Section::PersonalLinks => "personal_links",
            Section::QuickSearches => "quick_searches",
            Section::ReferenceShelf => "reference_shelf",
            Section::BibliographicDatabases => "bibliographic_databases",
            Section::ElectronicJournals => "electronic_journals",
            Section::Footer => "footer",
        }
    }

    /// Position in [`section_order`].
    pub fn position(self) -> usize {
        self as usize
    }

    /// Sections the user may customize (the dagger-marked eight).
    pub fn is_customizable(self) -> bool {
        matches!(
            self,
            Section::LibraryLinks
                | Section::UniversityLinks
                | Section::CurrentAwareness
                | Section::PersonalLinks
                | Section::QuickSearches
                | Section::ReferenceShelf
                | Section::BibliographicDatabases
                | Section::ElectronicJournals
        )
    }

    /// Header and footer frame the page; every other section is a service.
    pub fn is_service(self) -> bool {
        !matches!(self, Section::Header | Section::Footer)
    }

    /// The resource kind listed in this section, if the section lists resources.
    pub fn resource_kind(self) -> Option<ResourceKind> {
        match self {
            Section::LibraryLinks => Some(ResourceKind::LibraryLink),
            Section::UniversityLinks => Some(ResourceKind::UniversityLink),
            Section::PersonalLinks => Some(ResourceKind::PersonalLink),
            Section::QuickSearches => Some(ResourceKind::QuickSearchEngine),
            Section::ReferenceShelf => Some(ResourceKind::Reference),
            Section::BibliographicDatabases => Some(ResourceKind::BibliographicDatabase),
            Section::ElectronicJournals => Some(ResourceKind::ElectronicJournal),
            _ => None,
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownSection(pub String);

impl fmt::Display for UnknownSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown section `{}`", self.0)
    }
}

impl FromStr for Section {
    type Err = UnknownSection;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Section::ALL
            .iter()
            .copied()
            .find(|section| section.as_str() == s)
            .ok_or_else(|| UnknownSection(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Proactive,
    Reactive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agent {
    Human,
    Computer,
}

/// Which cell of the proactive/reactive by human/computer grid a service
/// occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ServiceClassification {
    pub mode: Mode,
    pub agent: Agent,
}

impl ServiceClassification {
    pub const fn new(mode: Mode, agent: Agent) -> Self {
        Self { mode, agent }
    }

    /// Classification once a user has customized the section. Librarian
    /// recommendations stop driving the content, so the service becomes
    /// reactive; the agent is unchanged.
    pub fn after_customization(self) -> Self {
        Self {
            mode: Mode::Reactive,
            agent: self.agent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotAService(pub Section);

impl fmt::Display for NotAService {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "section `{}` is not a service", self.0)
    }
}

/// Initial (pre-customization) classification of a service section.
pub fn classify(section: Section) -> Result<ServiceClassification, NotAService> {
    use Agent::*;
    use Mode::*;
    let class = match section {
        Section::Header | Section::Footer => return Err(NotAService(section)),
        Section::GlobalMessage | Section::MessageFromLibrarian => (Proactive, Computer),
        Section::YourLibrarians => (Reactive, Human),
        Section::LibraryLinks
        | Section::UniversityLinks
        | Section::QuickSearches
        | Section::ReferenceShelf
        | Section::BibliographicDatabases
        | Section::ElectronicJournals => (Proactive, Computer),
        Section::PersonalLinks | Section::CurrentAwareness => (Reactive, Computer),
    };
    Ok(ServiceClassification::new(class.0, class.1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: UserId,
    pub auth_id: String,
    pub name: String,
    pub email: String,
    pub discipline_id: DisciplineId,
    pub email_opt_in: bool,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discipline {
    pub id: DisciplineId,
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LibrarianRole {
    ReferenceLibrarian,
    CollectionManager,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Librarian {
    pub id: LibrarianId,
    pub name: String,
    pub phone: String,
    pub email: String,
    pub role: LibrarianRole,
    pub discipline_ids: BTreeSet<DisciplineId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    LibraryLink,
    UniversityLink,
    Reference,
    BibliographicDatabase,
    ElectronicJournal,
    QuickSearchEngine,
    PersonalLink,
}

impl ResourceKind {
    /// The page section that lists resources of this kind.
    pub fn section(self) -> Section {
        match self {
            ResourceKind::LibraryLink => Section::LibraryLinks,
            ResourceKind::UniversityLink => Section::UniversityLinks,
            ResourceKind::Reference => Section::ReferenceShelf,
            ResourceKind::BibliographicDatabase => Section::BibliographicDatabases,
            ResourceKind::ElectronicJournal => Section::ElectronicJournals,
            ResourceKind::QuickSearchEngine => Section::QuickSearches,
            ResourceKind::PersonalLink => Section::PersonalLinks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resource {
    pub id: ResourceId,
    pub kind: ResourceKind,
    pub title: String,
    pub url: String,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url_template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner_user_id: Option<UserId>,
    #[serde(default)]
    pub discipline_ids: BTreeSet<DisciplineId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageScope {
    Global,
    Discipline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: MessageId,
    pub scope: MessageScope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discipline_id: Option<DisciplineId>,
    pub body: String,
    pub updated_at: DateTime<Utc>,
}

/// A broken invariant found by one of the `validate_*` functions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    EmptyField { field: &'static str },
    MissingUrlTemplate,
    UnexpectedUrlTemplate,
    /// A quick-search template must hold exactly one `{query}`.
    PlaceholderCount { found: usize },
    PersonalLinkWithoutOwner,
    OwnerOnSharedResource,
    PersonalLinkWithDisciplines,
    NoDisciplines,
    ScopeMismatch,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyField { field } => write!(f, "`{field}` must not be empty"),
            Violation::MissingUrlTemplate => f.write_str("quick-search engine needs a url_template"),
            Violation::UnexpectedUrlTemplate => {
                f.write_str("url_template is only allowed on quick-search engines")
            }
            Violation::PlaceholderCount { found } => write!(
                f,
                "url_template must contain exactly one {{query}} placeholder, found {found}"
            ),
            Violation::PersonalLinkWithoutOwner => f.write_str("personal link needs an owner"),
            Violation::OwnerOnSharedResource => {
                f.write_str("only personal links may have an owner")
            }
            Violation::PersonalLinkWithDisciplines => {
                f.write_str("personal links are not mapped to disciplines")
            }
            Violation::NoDisciplines => f.write_str("at least one discipline is required"),
            Violation::ScopeMismatch => {
                f.write_str("discipline_id must be present exactly for discipline-scoped messages")
            }
        }
    }
}

/// Placeholder substituted by quick-search engines.
pub const QUERY_PLACEHOLDER: &str = "{query}";

fn check_non_empty(value: &str, field: &'static str, out: &mut Vec<Violation>) {
    if value.trim().is_empty() {
        out.push(Violation::EmptyField { field });
    }
}

fn finish(violations: Vec<Violation>) -> Result<(), Vec<Violation>> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Checks every [`Resource`] invariant, returning all violations at once.
pub fn validate_resource(resource: &Resource) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    check_non_empty(&resource.title, "title", &mut out);
    check_non_empty(&resource.url, "url", &mut out);

    match (&resource.kind, &resource.url_template) {
        (ResourceKind::QuickSearchEngine, None) => out.push(Violation::MissingUrlTemplate),
        (ResourceKind::QuickSearchEngine, Some(template)) => {
            let found = template.matches(QUERY_PLACEHOLDER).count();
            if found != 1 {
                out.push(Violation::PlaceholderCount { found });
            }
        }
        (_, Some(_)) => out.push(Violation::UnexpectedUrlTemplate),
        (_, None) => {}
    }

    let personal = resource.kind == ResourceKind::PersonalLink;
    match (personal, resource.owner_user_id.is_some()) {
        (true, false) => out.push(Violation::PersonalLinkWithoutOwner),
        (false, true) => out.push(Violation::OwnerOnSharedResource),
        _ => {}
    }
    if personal && !resource.discipline_ids.is_empty() {
        out.push(Violation::PersonalLinkWithDisciplines);
    }
    finish(out)
}

/// Storage-independent [`User`] checks; discipline existence is the store's job.
pub fn validate_user(user: &User) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    check_non_empty(&user.auth_id, "auth_id", &mut out);
    finish(out)
}

pub fn validate_discipline(discipline: &Discipline) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    check_non_empty(&discipline.name, "name", &mut out);
    finish(out)
}

pub fn validate_librarian(librarian: &Librarian) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    check_non_empty(&librarian.name, "name", &mut out);
    if librarian.discipline_ids.is_empty() {
        out.push(Violation::NoDisciplines);
    }
    finish(out)
}

pub fn validate_message(message: &Message) -> Result<(), Vec<Violation>> {
    let scoped = message.scope == MessageScope::Discipline;
    if scoped != message.discipline_id.is_some() {
        return Err(alloc::vec![Violation::ScopeMismatch]);
    }
    Ok(())
}
