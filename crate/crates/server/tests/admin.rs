mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration as StdDuration, Instant};

use chrono::{Duration, NaiveDate};
use common::{settings, world, World};
use mylibrary::admin::{report_over, JobState};
use mylibrary::auth::StubAuthenticator;
use mylibrary::error::Error;
use mylibrary::mail::MemoryTransport;
use mylibrary::store::{LibrarianInput, Store, UserPatch};
use mylibrary::App;
use mylibrary_core::model::{DisciplineId, LibrarianRole, Section, UserId};

const ROUNDS: u32 = 1_000;

fn opt_out(w: &World, user: UserId) {
    let patch = UserPatch { email_opt_in: Some(false), ..UserPatch::default() };
    w.app.store.update_user(user, patch).unwrap();
}

#[test]
fn admin_login_accepts_only_the_right_pair() {
    let w = world();
    w.app.add_admin_with_rounds("root", "correct horse", ROUNDS).unwrap();
    let session = w.app.admin_login("root", "correct horse").unwrap();
    assert_eq!(session.subject, "root");
    assert!(w.app.admin_session(Some(&session.token)).is_some());

    let wrong = w.app.admin_login("root", "battery staple").unwrap_err();
    let unknown = w.app.admin_login("nobody", "correct horse").unwrap_err();
    assert!(matches!(wrong, Error::AuthenticationFailed));
    assert!(matches!(unknown, Error::AuthenticationFailed));
    assert_eq!(wrong.to_string(), unknown.to_string());

    assert!(matches!(w.app.add_admin_with_rounds("short", "1234567", ROUNDS), Err(Error::InvalidArgument(_))));
    let stored = w.app.store.admin("root").unwrap();
    assert!(!stored.password_verifier.contains("correct horse"));
}

#[test]
fn admin_sessions_last_four_hours_without_sliding() {
    let w = world();
    w.app.add_admin_with_rounds("root", "correct horse", ROUNDS).unwrap();
    let token = w.app.admin_login("root", "correct horse").unwrap().token;
    w.clock.advance(Duration::hours(3));
    assert!(w.app.admin_session(Some(&token)).is_some());
    w.clock.advance(Duration::minutes(61));
    assert!(w.app.admin_session(Some(&token)).is_none());

    let other = w.app.admin_login("root", "correct horse").unwrap().token;
    w.app.admin_logout(&other);
    assert!(w.app.admin_session(Some(&other)).is_none());
    // Portal tokens are not admin tokens.
    let (portal, _) = w.login("reader", None);
    assert!(w.app.admin_session(Some(&portal)).is_none());
}

#[test]
fn messages_reach_the_right_pages() {
    let w = world();
    let (_, lis) = w.login("lis", Some("Library and Information Science"));
    let (_, chem) = w.login("chem", Some("Chemistry"));
    let global = |u| message(&w, u, Section::GlobalMessage);
    let local = |u| message(&w, u, Section::MessageFromLibrarian);

    w.app.set_global_message("Closed Monday").unwrap();
    assert_eq!((global(lis), global(chem)), ("Closed Monday".into(), "Closed Monday".into()));

    w.app.set_discipline_message(w.discipline("Chemistry"), "New SciFinder seats").unwrap();
    assert_eq!(local(chem), "New SciFinder seats");
    assert_ne!(local(lis), "New SciFinder seats");

    w.app.set_global_message("").unwrap();
    assert_eq!(global(lis), "");
    assert!(matches!(
        w.app.set_discipline_message(DisciplineId(9_999), "x"),
        Err(Error::NotFound(_))
    ));
    assert!(w.app.store.message_history().len() >= 4);
}

fn message(w: &World, user: UserId, section: Section) -> String {
    let page = w.app.assemble_page(user).unwrap();
    match &page.blocks[section.position()].content {
        mylibrary::portal::BlockContent::Message { body, .. } => body.clone(),
        other => panic!("{other:?}"),
    }
}

#[test]
fn new_librarian_is_visible_on_next_page() {
    let w = world();
    let (_, u) = w.login("chem", Some("Chemistry"));
    let input = LibrarianInput {
        id: None,
        name: "Robin Wu".into(),
        phone: "515-0000".into(),
        email: "robin@library.example.test".into(),
        role: LibrarianRole::ReferenceLibrarian,
        discipline_ids: BTreeSet::from([w.discipline("Chemistry")]),
    };
    w.app.store.upsert_librarian(input.clone()).unwrap();
    let page = w.app.assemble_page(u).unwrap();
    let mylibrary::portal::BlockContent::Librarians { librarians, .. } =
        &page.blocks[Section::YourLibrarians.position()].content
    else {
        panic!()
    };
    assert!(librarians.iter().any(|l| l.name == "Robin Wu" && l.email == "robin@library.example.test"));

    let orphan = LibrarianInput { discipline_ids: BTreeSet::new(), name: "Nobody".into(), ..input };
    assert!(matches!(w.app.store.upsert_librarian(orphan), Err(Error::Validation(_))));
}

#[test]
fn mass_email_skips_opted_out() {
    let w = world();
    let chem = w.discipline("Chemistry");
    let users: Vec<_> = ["u1", "u2", "u3"].iter().map(|a| w.login(a, Some("Chemistry")).1).collect();
    opt_out(&w, users[1]);
    let report = w.app.mass_email(&[chem], "Lab safety", "Read this.").unwrap();
    assert_eq!((report.recipients, report.skipped_opt_out, report.sent), (2, 1, 2));
    let to: BTreeSet<_> = w.mail.sent().into_iter().map(|m| m.to.address).collect();
    assert_eq!(to, BTreeSet::from(["u1@example.test".to_string(), "u3@example.test".to_string()]));
}

#[test]
fn mass_email_union_sends_one_copy_each() {
    let w = world();
    let phil = w.discipline("Philosophy");
    let chem = w.discipline("Chemistry");
    w.login("p", Some("Philosophy"));
    w.login("c", Some("Chemistry"));
    w.login("l", Some("Library and Information Science"));
    let report = w.app.mass_email(&[phil, chem, phil], "Hi", "Body").unwrap();
    assert_eq!(report.recipients, 2);
    let sent = w.mail.sent();
    let distinct: BTreeSet<_> = sent.iter().map(|m| m.to.address.clone()).collect();
    assert_eq!(sent.len(), distinct.len());
    assert!(matches!(w.app.mass_email(&[], "Hi", "Body"), Err(Error::InvalidArgument(_))));
    assert!(matches!(w.app.mass_email(&[DisciplineId(4_242)], "Hi", "Body"), Err(Error::NotFound(_))));
}

#[test]
fn background_mass_email_can_be_polled() {
    let w = world();
    w.login("p", Some("Philosophy"));
    let job = w
        .app
        .start_mass_email(vec![w.discipline("Philosophy")], "Hi".into(), "Body".into())
        .unwrap();
    let deadline = Instant::now() + StdDuration::from_secs(10);
    let report = loop {
        match w.app.mass_email_status(&job.id).unwrap().state {
            JobState::Done { report } => break report,
            JobState::Running if Instant::now() < deadline => std::thread::sleep(StdDuration::from_millis(5)),
            other => panic!("{other:?}"),
        }
    };
    assert_eq!(report.sent, 1);
    assert!(matches!(w.app.mass_email_status("nope"), Err(Error::NotFound(_))));
    assert!(matches!(
        w.app.start_mass_email(vec![], "Hi".into(), "Body".into()),
        Err(Error::InvalidArgument(_))
    ));
}

const LOG: &str = "\
10.0.0.1 - alice [01/Feb/1999:08:00:00 +0000] \"GET /page HTTP/1.1\" 200 512
10.0.0.2 - bob [01/Feb/1999:08:01:00 +0000] \"GET /page HTTP/1.1\" 200 498
10.0.0.1 - alice [02/Feb/1999:09:00:00 +0000] \"GET /customize/library_links HTTP/1.1\" 200 77
";

#[test]
fn usage_report_examples() {
    let report = report_over(LOG, None, None);
    assert_eq!(report.counters.get("page"), Some(&2));
    assert_eq!(report.counters.get("customize.library_links"), Some(&1));
    assert_eq!(report.counters.len(), 2);
    assert_eq!((report.distinct_users, report.malformed), (2, 0));

    let empty = report_over("", None, None);
    assert_eq!((empty.requests, empty.distinct_users, empty.malformed), (0, 0, 0));
    assert!(empty.counters.is_empty());

    let with_garbage = report_over(&format!("{LOG}garbage here\n"), None, None);
    assert_eq!(with_garbage.malformed, 1);
    assert_eq!(with_garbage.counters, report.counters);

    let d = |day| NaiveDate::from_ymd_opt(1999, 2, day).unwrap();
    let first_day = report_over(LOG, Some(d(1)), Some(d(1)));
    assert_eq!((first_day.requests, first_day.out_of_period), (2, 1));
}

#[test]
fn usage_report_reads_configured_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("access.log");
    let mut s = settings();
    s.access_log = Some(log.clone());
    let app = App::new(
        Arc::new(Store::in_memory()),
        s,
        Box::new(StubAuthenticator),
        Arc::new(MemoryTransport::default()),
    );
    assert_eq!(app.usage_report(None, None).unwrap().requests, 0);
    std::fs::write(&log, LOG).unwrap();
    let report = app.usage_report(None, None).unwrap();
    assert_eq!(report, report_over(LOG, None, None));
}
