//! Bulk loading of reference data from JSON lines.
//!
//! Each line is one object with a single key naming the record type:
//!
//! ```text
//! {"discipline": {"key": "chem", "name": "Chemistry"}}
//! {"librarian": {"name": "Ada", "email": "ada@lib", "role": "reference_librarian", "disciplines": ["chem"]}}
//! {"resource": {"key": "sf", "kind": "bibliographic_database", "title": "SciFinder", "url": "https://sf", "disciplines": ["chem"]}}
//! {"recommendation": {"discipline": "chem", "section": "bibliographic_databases", "resources": ["sf"]}}
//! {"message": {"discipline": "chem", "body": "Welcome"}}
//! ```
//!
//! Keys are local to the file. Records that already exist (disciplines by
//! name, librarians by name, resources by kind and title) are updated in
//! place, so loading the same file twice is harmless.

use std::collections::{BTreeSet, HashMap};

use mylibrary_core::model::{DisciplineId, LibrarianRole, ResourceId, ResourceKind, Section};
use serde::{Deserialize, Serialize};

use super::{DisciplineInput, LibrarianInput, ResourceInput, Store};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum SeedLine {
    Discipline {
        key: Option<String>,
        name: String,
        #[serde(default)]
        description: String,
    },
    Librarian {
        name: String,
        #[serde(default)]
        phone: String,
        #[serde(default)]
        email: String,
        role: LibrarianRole,
        #[serde(default)]
        disciplines: Vec<String>,
    },
    Resource {
        key: Option<String>,
        kind: ResourceKind,
        title: String,
        url: String,
        #[serde(default)]
        description: String,
        #[serde(default)]
        url_template: Option<String>,
        #[serde(default)]
        disciplines: Vec<String>,
    },
    Recommendation {
        discipline: String,
        section: Section,
        resources: Vec<String>,
    },
    Message {
        #[serde(default)]
        discipline: Option<String>,
        body: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SeedReport {
    pub disciplines: usize,
    pub librarians: usize,
    pub resources: usize,
    pub recommendations: usize,
    pub messages: usize,
}

#[derive(Default)]
struct Keys {
    disciplines: HashMap<String, DisciplineId>,
    resources: HashMap<String, ResourceId>,
}

impl Keys {
    fn discipline(&self, store: &Store, key: &str) -> Result<DisciplineId> {
        if let Some(id) = self.disciplines.get(key) {
            return Ok(*id);
        }
        store
            .discipline_by_name(key)
            .map(|d| d.id)
            .ok_or_else(|| Error::not_found(format!("discipline key `{key}`")))
    }

    fn disciplines(&self, store: &Store, keys: &[String]) -> Result<BTreeSet<DisciplineId>> {
        keys.iter().map(|k| self.discipline(store, k)).collect()
    }
}

fn at_line(n: usize, e: Error) -> Error {
    Error::invalid(format!("seed line {n}: {e}"))
}

/// Applies every line in order, stopping at the first failure.
pub fn load_seed(store: &Store, text: &str) -> Result<SeedReport> {
    let mut keys = Keys::default();
    let mut report = SeedReport::default();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let parsed: SeedLine =
            serde_json::from_str(line).map_err(|e| at_line(n, Error::invalid(e)))?;
        apply_line(store, &mut keys, &mut report, parsed).map_err(|e| at_line(n, e))?;
    }
    Ok(report)
}

fn apply_line(store: &Store, keys: &mut Keys, report: &mut SeedReport, line: SeedLine) -> Result<()> {
    match line {
        SeedLine::Discipline {
            key,
            name,
            description,
        } => {
            let id = store.discipline_by_name(&name).map(|d| d.id);
            let d = store.upsert_discipline(DisciplineInput {
                id,
                name: name.clone(),
                description,
            })?;
            keys.disciplines.insert(key.unwrap_or(name), d.id);
            report.disciplines += 1;
        }
        SeedLine::Librarian {
            name,
            phone,
            email,
            role,
            disciplines,
        } => {
            let id = store
                .librarians()
                .into_iter()
                .find(|l| l.name == name.trim())
                .map(|l| l.id);
            store.upsert_librarian(LibrarianInput {
                id,
                name,
                phone,
                email,
                role,
                discipline_ids: keys.disciplines(store, &disciplines)?,
            })?;
            report.librarians += 1;
        }
        SeedLine::Resource {
            key,
            kind,
            title,
            url,
            description,
            url_template,
            disciplines,
        } => {
            let id = store
                .resources()
                .into_iter()
                .find(|r| r.kind == kind && r.title == title.trim())
                .map(|r| r.id);
            let r = store.upsert_resource(ResourceInput {
                id,
                kind,
                title: title.clone(),
                url,
                description,
                url_template,
                discipline_ids: keys.disciplines(store, &disciplines)?,
            })?;
            keys.resources.insert(key.unwrap_or(title), r.id);
            report.resources += 1;
        }
        SeedLine::Recommendation {
            discipline,
            section,
            resources,
        } => {
            let d = keys.discipline(store, &discipline)?;
            let ids = resources
                .iter()
                .map(|k| {
                    keys.resources
                        .get(k)
                        .copied()
                        .ok_or_else(|| Error::not_found(format!("resource key `{k}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            store.set_recommendations(d, section, &ids)?;
            report.recommendations += 1;
        }
        SeedLine::Message { discipline, body } => {
            let d = discipline.map(|k| keys.discipline(store, &k)).transpose()?;
            store.set_message(d, &body)?;
            report.messages += 1;
        }
    }
    Ok(())
}
