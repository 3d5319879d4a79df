mod common;

use std::sync::Arc;

use common::{empty_world, world, SEED};
use mylibrary::clock::SystemClock;
use mylibrary::error::Error;
use mylibrary::store::{
    load_seed, AcquisitionRecord, DisciplineInput, Event, FileJournal, LibrarianInput, ResourceInput, Store,
    UserPatch,
};
use mylibrary_core::model::{DisciplineId, LibrarianRole, ResourceId, ResourceKind, Section, UserId};
use proptest::prelude::*;

fn events(store: &Store) -> Vec<Event> {
    store.read(|s| s.to_events())
}

fn acq(call_number: &str, title: &str, date: &str) -> AcquisitionRecord {
    AcquisitionRecord {
        line: None,
        call_number: call_number.into(),
        author: "Author".into(),
        title: title.into(),
        record_url: format!("https://catalog.example.test/record/{title}"),
        accession_date: date.into(),
    }
}

#[test]
fn new_user_gets_copies_of_every_recommendation_set() {
    let w = world();
    let store = &w.app.store;
    for name in ["Library and Information Science", "Philosophy", "Chemistry"] {
        let d = w.discipline(name);
        let user = store.create_user(&format!("u-{d}"), "U", "u@x", d).unwrap();
        for section in Section::ALL.into_iter().filter(|s| s.is_customizable()) {
            let sel = store.selection(user.id, section).unwrap();
            assert_eq!(sel.resource_ids, store.recommendation_set(d, section).resource_ids, "{name}/{section}");
            assert!(!sel.customized);
        }
    }
    let chem = w.discipline("Chemistry");
    let u = store.user_by_auth_id(&format!("u-{chem}")).unwrap();
    assert!(store.selection(u.id, Section::ReferenceShelf).unwrap().resource_ids.is_empty());
}

#[test]
fn create_user_errors() {
    let w = world();
    let d = w.discipline("Philosophy");
    w.app.store.create_user("jdoe", "J", "j@x", d).unwrap();
    assert!(matches!(w.app.store.create_user("jdoe", "J2", "j2@x", d), Err(Error::Conflict(_))));
    assert!(matches!(
        w.app.store.create_user("other", "O", "o@x", DisciplineId(999_999)),
        Err(Error::NotFound(_))
    ));
    assert!(w.app.store.user_by_auth_id("other").is_none());
}

#[test]
fn auth_id_lookup_is_exact() {
    let w = world();
    let d = w.discipline("Philosophy");
    let u = w.app.store.create_user("JDoe", "J", "j@x", d).unwrap();
    assert_eq!(w.app.store.user_by_auth_id("JDoe").unwrap().id, u.id);
    assert!(w.app.store.user_by_auth_id("jdoe").is_none());
    assert!(w.app.store.user_by_auth_id("nobody").is_none());
}

#[test]
fn set_selections_replaces_exactly() {
    let w = world();
    let store = &w.app.store;
    let d = w.discipline("Library and Information Science");
    let u = store.create_user("a", "A", "a@x", d).unwrap();
    let hours = w.resource("Library hours");
    let ill = w.resource("Interlibrary loan");

    store.set_selections(u.id, Section::LibraryLinks, &[hours]).unwrap();
    assert_eq!(store.selection(u.id, Section::LibraryLinks).unwrap().resource_ids, vec![hours]);
    store.set_selections(u.id, Section::LibraryLinks, &[ill, hours, ill]).unwrap();
    assert_eq!(store.selection(u.id, Section::LibraryLinks).unwrap().resource_ids, vec![ill, hours]);
    store.set_selections(u.id, Section::LibraryLinks, &[]).unwrap();
    let sel = store.selection(u.id, Section::LibraryLinks).unwrap();
    assert!(sel.resource_ids.is_empty());
    assert!(sel.customized);
}

#[test]
fn set_selections_rejections() {
    let w = world();
    let store = &w.app.store;
    let d = w.discipline("Philosophy");
    let a = store.create_user("a", "A", "a@x", d).unwrap();
    let b = store.create_user("b", "B", "b@x", d).unwrap();
    let blink = store.add_personal_link(b.id, "B's", "https://b.example.test/").unwrap();
    let alink = store.add_personal_link(a.id, "A's", "https://a.example.test/").unwrap();

    assert!(matches!(
        store.set_selections(a.id, Section::PersonalLinks, &[alink.id, blink.id]),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        store.set_selections(a.id, Section::LibraryLinks, &[ResourceId(123_456)]),
        Err(Error::NotFound(_))
    ));
    assert!(matches!(
        store.set_selections(a.id, Section::Header, &[]),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        store.set_selections(a.id, Section::LibraryLinks, &[w.resource("Mind")]),
        Err(Error::InvalidArgument(_))
    ));
    assert_eq!(store.selection(a.id, Section::PersonalLinks).unwrap().resource_ids, vec![alink.id]);
}

// Case-insensitive title order computed char by char, independent of the store.
fn title_oracle(mut titles: Vec<String>) -> Vec<String> {
    titles.sort_by(|a, b| {
        let fold = |s: &str| s.chars().flat_map(char::to_lowercase).collect::<Vec<char>>();
        fold(a).cmp(&fold(b))
    });
    titles
}

#[test]
fn list_recommendations_sorted_by_title() {
    let w = world();
    let store = &w.app.store;
    let phil = w.discipline("Philosophy");
    let got: Vec<String> = store
        .list_recommendations(phil, Section::ElectronicJournals)
        .unwrap()
        .into_iter()
        .map(|r| r.title)
        .collect();
    let expected = title_oracle(
        store
            .resources()
            .into_iter()
            .filter(|r| r.kind == ResourceKind::ElectronicJournal && r.discipline_ids.contains(&phil))
            .map(|r| r.title)
            .collect(),
    );
    assert_eq!(got.len(), 3);
    assert_eq!(got, expected);
    assert_eq!(got, ["Journal of Philosophy", "Mind", "noûs"]);

    assert!(store.list_recommendations(w.discipline("Chemistry"), Section::ReferenceShelf).unwrap().is_empty());
    assert!(matches!(
        store.list_recommendations(phil, Section::Header),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        store.list_recommendations(DisciplineId(424_242), Section::LibraryLinks),
        Err(Error::NotFound(_))
    ));
}

#[test]
fn delete_resource_cascades_and_reports() {
    let w = world();
    let store = &w.app.store;
    let lis = w.discipline("Library and Information Science");
    let ill = w.resource("Interlibrary loan");
    let home = w.resource("NCSU Libraries home page");
    store.set_recommendations(lis, Section::LibraryLinks, &[home, ill]).unwrap();
    let u1 = store.create_user("u1", "U1", "u1@x", lis).unwrap();
    let u2 = store.create_user("u2", "U2", "u2@x", lis).unwrap();

    let report = store.delete_resource(ill).unwrap();
    assert_eq!((report.selections, report.recommendations), (2, 1));
    for u in [u1.id, u2.id] {
        assert_eq!(store.selection(u, Section::LibraryLinks).unwrap().resource_ids, vec![home]);
    }
    assert_eq!(store.recommendation_set(lis, Section::LibraryLinks).resource_ids, vec![home]);
    assert!(matches!(store.delete_resource(ill), Err(Error::NotFound(_))));

    let unused = w.resource("Campus directory");
    let report = store.delete_resource(unused).unwrap();
    assert_eq!((report.selections, report.recommendations), (0, 0));
    assert!(store.integrity_violations().is_empty());
}

#[test]
fn acquisitions_ingest_and_dedupe() {
    let w = empty_world();
    let store = &w.app.store;
    let batch = vec![
        acq("BD41 .M67 1999", "Morgan", "2026-10-06"),
        acq("QA76 .R87", "Rust", "2026-10-07"),
        acq("Z671 .L7", "Lib", "2026-10-08"),
    ];
    let r = store.record_acquisitions(batch.clone()).unwrap();
    assert_eq!((r.accepted, r.quarantined, r.duplicates), (3, 0, 0));
    let r = store.record_acquisitions(vec![acq("!!!", "Bad", "2026-10-08")]).unwrap();
    assert_eq!((r.accepted, r.quarantined), (0, 1));
    assert!(r.reasons[0].reason.contains("call number"));
    let r = store.record_acquisitions(batch).unwrap();
    assert_eq!((r.accepted, r.duplicates), (0, 3));
    assert_eq!(store.acquisition_count(), 3);
    // Same call number and date, different title: a distinct item.
    let r = store.record_acquisitions(vec![acq("QA76 .R87", "Rust, 2nd ed.", "2026-10-07")]).unwrap();
    assert_eq!(r.accepted, 1);
    assert_eq!(store.quarantine().len(), 1);
}

#[test]
fn tsv_ingest_reports_line_numbers() {
    let w = empty_world();
    let text = "# weekly feed\nBD41 .M67 1999\tMorgan\tEthics\thttp://x/1\t2026-10-06\nnot enough\tcolumns\n!!!\ta\tb\tc\t2026-10-06\nZ671\tA\tT\tu\t06/10/2026\n";
    let r = w.app.store.ingest_tsv(text).unwrap();
    assert_eq!((r.accepted, r.quarantined), (1, 3));
    let lines: Vec<_> = r.reasons.iter().map(|q| q.line.unwrap()).collect();
    assert_eq!(lines, [3, 4, 5]);
}

#[test]
fn discipline_delete_is_refused_while_referenced() {
    let w = world();
    let store = &w.app.store;
    let chem = w.discipline("Chemistry");
    let phil = w.discipline("Philosophy");
    let u = store.create_user("c", "C", "c@x", chem).unwrap();
    match store.delete_discipline(chem) {
        Err(Error::Referenced { users, librarians }) => assert_eq!((users, librarians), (1, 1)),
        other => panic!("expected refusal, got {other:?}"),
    }
    store
        .update_user(u.id, UserPatch { discipline_id: Some(phil), ..UserPatch::default() })
        .unwrap();
    let dana = store.librarians().into_iter().find(|l| l.name == "Dana Ortiz").unwrap();
    store.delete_librarian(dana.id).unwrap();
    store.delete_discipline(chem).unwrap();
    assert!(store.integrity_violations().is_empty());
    assert!(store.recommendation_sets().iter().all(|r| r.discipline_id != chem));
}

#[test]
fn failed_mutations_change_nothing() {
    let w = world();
    let store = &w.app.store;
    let d = w.discipline("Philosophy");
    let u = store.create_user("a", "A", "a@x", d).unwrap();
    let before = events(store);

    let mind = w.resource("Mind");
    assert!(store.set_selections(u.id, Section::ElectronicJournals, &[mind, ResourceId(9_999_999)]).is_err());
    assert!(store.create_user("a", "Again", "a@x", d).is_err());
    assert!(store.add_personal_link(u.id, "", "https://x.example.test/").is_err());
    assert!(store
        .upsert_librarian(LibrarianInput {
            id: None,
            name: "Nobody".into(),
            phone: String::new(),
            email: String::new(),
            role: LibrarianRole::ReferenceLibrarian,
            discipline_ids: Default::default(),
        })
        .is_err());
    assert!(store
        .upsert_resource(ResourceInput {
            id: None,
            kind: ResourceKind::QuickSearchEngine,
            title: "Broken".into(),
            url: "https://x".into(),
            description: String::new(),
            url_template: Some("https://x?q={query}&r={query}".into()),
            discipline_ids: Default::default(),
        })
        .is_err());
    assert!(store
        .upsert_discipline(DisciplineInput { id: None, name: "philosophy".into(), description: String::new() })
        .is_err());
    assert_eq!(events(store), before);
}

#[test]
fn recommendation_edits_do_not_touch_existing_users() {
    let w = world();
    let store = &w.app.store;
    let phil = w.discipline("Philosophy");
    let u = store.create_user("a", "A", "a@x", phil).unwrap();
    let before = store.selection(u.id, Section::ElectronicJournals).unwrap();
    store.set_recommendations(phil, Section::ElectronicJournals, &[w.resource("Mind")]).unwrap();
    assert_eq!(store.selection(u.id, Section::ElectronicJournals).unwrap(), before);
    let v = store.create_user("b", "B", "b@x", phil).unwrap();
    assert_eq!(
        store.selection(v.id, Section::ElectronicJournals).unwrap().resource_ids,
        vec![w.resource("Mind")]
    );
}

#[test]
fn discipline_change_keeps_selections() {
    let w = world();
    let store = &w.app.store;
    let u = store.create_user("a", "A", "a@x", w.discipline("Philosophy")).unwrap();
    let snapshot = |id: UserId| {
        Section::ALL
            .into_iter()
            .filter(|s| s.is_customizable())
            .map(|s| store.selection(id, s).unwrap())
            .collect::<Vec<_>>()
    };
    let before = snapshot(u.id);
    store
        .update_user(u.id, UserPatch { discipline_id: Some(w.discipline("Chemistry")), ..UserPatch::default() })
        .unwrap();
    assert_eq!(snapshot(u.id), before);
    assert!(matches!(
        store.update_user(u.id, UserPatch { discipline_id: Some(DisciplineId(77_777)), ..UserPatch::default() }),
        Err(Error::NotFound(_))
    ));
}

#[test]
fn file_store_survives_reopen_snapshot_and_torn_tail() {
    let dir = tempfile::tempdir().unwrap();
    let open = |every: u64| {
        Store::open(
            Box::new(FileJournal::open(dir.path()).unwrap().snapshot_every(every).fsync(false)),
            Arc::new(SystemClock),
        )
        .unwrap()
    };
    let expected = {
        let store = open(7);
        load_seed(&store, SEED).unwrap();
        let d = store.discipline_by_name("Philosophy").unwrap().id;
        let u = store.create_user("a", "A", "a@x", d).unwrap();
        store.add_personal_link(u.id, "NY Times", "https://www.nytimes.com/").unwrap();
        store.record_acquisitions(vec![acq("BD41 .M67 1999", "Morgan", "2026-10-06")]).unwrap();
        store.mark_dispatched(mylibrary_core::model::ProfileId(5), "2026-W41").unwrap();
        assert!(dir.path().join("snapshot.jsonl").exists());
        events(&store)
    };
    let reopened = open(1000);
    assert_eq!(events(&reopened), expected);
    let next = reopened.upsert_discipline(DisciplineInput { id: None, name: "History".into(), description: String::new() }).unwrap();
    assert!(expected.iter().all(|e| match e {
        Event::PutDiscipline { discipline } => discipline.id < next.id,
        _ => true,
    }));
    drop(reopened);

    // A crash mid-append leaves a partial final line; it is discarded.
    let journal = dir.path().join("journal.jsonl");
    let mut text = std::fs::read_to_string(&journal).unwrap();
    text.push_str("{\"seq\": 99, \"at\": \"2026-");
    std::fs::write(&journal, text).unwrap();
    let store = open(1000);
    assert!(store.discipline_by_name("History").is_some());
    store.upsert_discipline(DisciplineInput { id: None, name: "Music".into(), description: String::new() }).unwrap();
    drop(store);
    let store = open(1000);
    assert!(store.discipline_by_name("Music").is_some());
}

#[test]
fn data_directory_is_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let first = FileJournal::open(dir.path()).unwrap();
    assert!(matches!(FileJournal::open(dir.path()), Err(Error::Storage(_))));
    drop(first);
    FileJournal::open(dir.path()).unwrap();
}

#[derive(Debug, Clone)]
enum Op {
    CreateUser(u8, u8),
    MoveUser(u8, u8),
    Select(u8, u8, Vec<u8>),
    Recommend(u8, u8, Vec<u8>),
    DeleteResource(u8),
    AddResource(u8, u8),
    AddLink(u8),
    DeleteLink(u8, u8),
    DeleteDiscipline(u8),
    AddDiscipline(u8),
    DeleteLibrarian(u8),
}

fn op() -> impl Strategy<Value = Op> {
    let ids = || prop::collection::vec(any::<u8>(), 0..4);
    prop_oneof![
        (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Op::CreateUser(a, b)),
        (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Op::MoveUser(a, b)),
        (any::<u8>(), any::<u8>(), ids()).prop_map(|(a, b, c)| Op::Select(a, b, c)),
        (any::<u8>(), any::<u8>(), ids()).prop_map(|(a, b, c)| Op::Recommend(a, b, c)),
        any::<u8>().prop_map(Op::DeleteResource),
        (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Op::AddResource(a, b)),
        any::<u8>().prop_map(Op::AddLink),
        (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Op::DeleteLink(a, b)),
        any::<u8>().prop_map(Op::DeleteDiscipline),
        any::<u8>().prop_map(Op::AddDiscipline),
        any::<u8>().prop_map(Op::DeleteLibrarian),
    ]
}

fn pick<T: Clone>(items: &[T], i: u8) -> Option<T> {
    (!items.is_empty()).then(|| items[i as usize % items.len()].clone())
}

const KINDS: [ResourceKind; 6] = [
    ResourceKind::LibraryLink,
    ResourceKind::UniversityLink,
    ResourceKind::Reference,
    ResourceKind::BibliographicDatabase,
    ResourceKind::ElectronicJournal,
    ResourceKind::QuickSearchEngine,
];

fn apply(store: &Store, op: &Op) -> Result<(), Error> {
    let ds: Vec<DisciplineId> = store.disciplines().iter().map(|d| d.id).collect();
    let users: Vec<UserId> = store.users().iter().map(|u| u.id).collect();
    let resources: Vec<ResourceId> = store.resources().iter().map(|r| r.id).collect();
    let sections: Vec<Section> = Section::ALL.into_iter().collect();
    let many = |xs: &[u8]| xs.iter().filter_map(|i| pick(&resources, *i)).collect::<Vec<_>>();
    let none = || Error::not_found("nothing to pick");
    match op {
        Op::CreateUser(a, d) => {
            // Sometimes an id that does not exist.
            let d = if *d == 255 { DisciplineId(1_000_000) } else { pick(&ds, *d).ok_or_else(none)? };
            store.create_user(&format!("user{a}"), "U", "u@x", d).map(drop)
        }
        Op::MoveUser(u, d) => {
            let u = pick(&users, *u).ok_or_else(none)?;
            let d = pick(&ds, *d).ok_or_else(none)?;
            store.update_user(u, UserPatch { discipline_id: Some(d), ..UserPatch::default() }).map(drop)
        }
        Op::Select(u, s, ids) => {
            let u = pick(&users, *u).ok_or_else(none)?;
            store.set_selections(u, pick(&sections, *s).unwrap(), &many(ids)).map(drop)
        }
        Op::Recommend(d, s, ids) => {
            let d = pick(&ds, *d).ok_or_else(none)?;
            store.set_recommendations(d, pick(&sections, *s).unwrap(), &many(ids)).map(drop)
        }
        Op::DeleteResource(r) => store.delete_resource(pick(&resources, *r).ok_or_else(none)?).map(drop),
        Op::AddResource(k, d) => {
            let kind = KINDS[*k as usize % KINDS.len()];
            store
                .upsert_resource(ResourceInput {
                    id: None,
                    kind,
                    title: format!("R{k}"),
                    url: "https://r.example.test/".into(),
                    description: String::new(),
                    url_template: (kind == ResourceKind::QuickSearchEngine)
                        .then(|| "https://r.example.test/?q={query}".to_string()),
                    discipline_ids: pick(&ds, *d).into_iter().collect(),
                })
                .map(drop)
        }
        Op::AddLink(u) => {
            let u = pick(&users, *u).ok_or_else(none)?;
            store.add_personal_link(u, "L", "https://l.example.test/").map(drop)
        }
        Op::DeleteLink(u, r) => {
            let u = pick(&users, *u).ok_or_else(none)?;
            store.delete_personal_link(u, pick(&resources, *r).ok_or_else(none)?).map(drop)
        }
        Op::DeleteDiscipline(d) => store.delete_discipline(pick(&ds, *d).ok_or_else(none)?).map(drop),
        Op::AddDiscipline(n) => store
            .upsert_discipline(DisciplineInput { id: None, name: format!("D{}", n % 6), description: String::new() })
            .map(drop),
        Op::DeleteLibrarian(l) => {
            let ls: Vec<_> = store.librarians().iter().map(|l| l.id).collect();
            store.delete_librarian(pick(&ls, *l).ok_or_else(none)?).map(drop)
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_crud_keeps_references_intact(ops in prop::collection::vec(op(), 1..60)) {
        let store = Store::in_memory();
        load_seed(&store, SEED).unwrap();
        for op in &ops {
            let before = events(&store);
            if apply(&store, op).is_err() {
                prop_assert_eq!(&events(&store), &before, "failed {:?} changed state", op);
            }
            let broken = store.integrity_violations();
            prop_assert!(broken.is_empty(), "after {:?}: {:?}", op, broken);
        }
    }

    #[test]
    fn ingest_replay_is_idempotent(rows in prop::collection::vec((0u8..5, 0u32..400, 0u8..3), 1..30)) {
        let store = Store::in_memory();
        let batch: Vec<AcquisitionRecord> = rows
            .iter()
            .map(|(c, n, t)| acq(&format!("{}{}", ["B", "BD", "QA", "Z", "!"][*c as usize], n), &format!("T{t}"), "2026-10-06"))
            .collect();
        store.record_acquisitions(batch.clone()).unwrap();
        let once = events(&store);
        let again = store.record_acquisitions(batch).unwrap();
        prop_assert_eq!(again.accepted, 0);
        let after: Vec<Event> = events(&store)
            .into_iter()
            .filter(|e| !matches!(e, Event::Quarantine { .. }))
            .collect();
        let once: Vec<Event> = once.into_iter().filter(|e| !matches!(e, Event::Quarantine { .. })).collect();
        prop_assert_eq!(after, once);
    }
}
