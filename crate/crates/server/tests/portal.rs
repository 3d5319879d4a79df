mod common;

use chrono::Duration;
use common::{world, LOGIN_URL};
use mylibrary::error::Error;
use mylibrary::portal::{BlockContent, DispatchResponse, LoginHints, PageDocument, Resolution};
use mylibrary_core::model::{section_order, Agent, Mode, ResourceId, Section};

fn block(page: &PageDocument, section: Section) -> &BlockContent {
    &page.blocks.iter().find(|b| b.section == section).unwrap().content
}

fn titles(page: &PageDocument, section: Section) -> Vec<String> {
    match block(page, section) {
        BlockContent::Resources { items } => items.iter().map(|r| r.title.clone()).collect(),
        other => panic!("{section} is not a resource block: {other:?}"),
    }
}

fn message(page: &PageDocument, section: Section) -> String {
    match block(page, section) {
        BlockContent::Message { body, .. } => body.clone(),
        other => panic!("{section} is not a message block: {other:?}"),
    }
}

fn librarian_names(page: &PageDocument) -> Vec<String> {
    match block(page, Section::YourLibrarians) {
        BlockContent::Librarians { librarians, .. } => librarians.iter().map(|l| l.name.clone()).collect(),
        other => panic!("{other:?}"),
    }
}

#[test]
fn no_cookie_no_assertion_redirects_to_login() {
    let w = world();
    match w.app.resolve_session(None, None, &LoginHints::default()).unwrap() {
        Resolution::Redirect(url) => assert_eq!(url, LOGIN_URL),
        other => panic!("{other:?}"),
    }
    match w.app.resolve_session(Some("deadbeef"), None, &LoginHints::default()).unwrap() {
        Resolution::Redirect(url) => assert_eq!(url, LOGIN_URL),
        other => panic!("{other:?}"),
    }
}

#[test]
fn first_assertion_creates_account_then_token_resolves() {
    let w = world();
    let hints = LoginHints {
        discipline: Some("Philosophy".into()),
        ..LoginHints::default()
    };
    let Resolution::Session { session, user, created, issued } =
        w.app.resolve_session(None, Some("kant"), &hints).unwrap()
    else {
        panic!("expected a session")
    };
    assert!(created && issued);
    assert_eq!(user.discipline_id, w.discipline("Philosophy"));

    let Resolution::Session { user: again, created, issued, .. } =
        w.app.resolve_session(Some(&session.token), None, &LoginHints::default()).unwrap()
    else {
        panic!("expected a session")
    };
    assert_eq!(again.id, user.id);
    assert!(!created && !issued);

    let Resolution::Session { created, .. } = w.app.resolve_session(None, Some("kant"), &hints).unwrap() else {
        panic!()
    };
    assert!(!created);
    assert!(matches!(
        w.app.resolve_session(None, Some("bad id"), &hints),
        Err(Error::AuthenticationFailed)
    ));
}

#[test]
fn onboarding_falls_back_to_lowest_id_discipline() {
    let w = world();
    let Resolution::Session { user, .. } = w.app.resolve_session(None, Some("x"), &LoginHints::default()).unwrap()
    else {
        panic!()
    };
    let first = w.app.store.disciplines()[0].id;
    assert_eq!(user.discipline_id, first);
    let bad = LoginHints { discipline: Some("Astrology".into()), ..LoginHints::default() };
    assert!(matches!(w.app.resolve_session(None, Some("y"), &bad), Err(Error::NotFound(_))));
}

#[test]
fn sessions_expire_after_thirty_idle_days() {
    let w = world();
    let (token, _) = w.login("idle", None);
    w.clock.advance(Duration::days(29));
    assert!(w.app.authenticate(Some(&token)).is_some());
    w.clock.advance(Duration::days(29));
    assert!(w.app.authenticate(Some(&token)).is_some());
    w.clock.advance(Duration::days(31));
    assert!(w.app.authenticate(Some(&token)).is_none());
}

#[test]
fn page_has_thirteen_blocks_in_order_with_classifications() {
    let w = world();
    let (_, u) = w.login("reader", Some("Library and Information Science"));
    let page = w.app.assemble_page(u).unwrap();
    let order: Vec<Section> = page.blocks.iter().map(|b| b.section).collect();
    assert_eq!(order, section_order().to_vec());
    for b in &page.blocks {
        assert_eq!(b.customizable, b.section.is_customizable());
        assert_eq!(b.classification.is_none(), matches!(b.section, Section::Header | Section::Footer));
    }
    let c = page.blocks[Section::YourLibrarians.position()].classification.unwrap();
    assert_eq!((c.mode, c.agent), (Mode::Reactive, Agent::Human));
}

#[test]
fn page_matches_sample_screen() {
    let w = world();
    let (_, u) = w.login("reader", Some("Library and Information Science"));
    let page = w.app.assemble_page(u).unwrap();
    assert_eq!(titles(&page, Section::LibraryLinks), ["NCSU Libraries home page"]);
    assert_eq!(
        titles(&page, Section::UniversityLinks),
        ["Outreach, Extension and Continuing Education", "Research"]
    );
    assert_eq!(
        titles(&page, Section::ReferenceShelf),
        ["Acq Web", "Internet Library for Librarians", "Library Resources on the Internet"]
    );
    assert_eq!(librarian_names(&page), ["Susan Baker", "Pat Leamon"]);
    match block(&page, Section::YourLibrarians) {
        BlockContent::Librarians { librarians, reference_contact } => {
            assert_eq!(librarians[0].phone, "515-2936");
            assert_eq!(librarians[0].email, "susan_baker@library.lib.ncsu.edu");
            assert_eq!(reference_contact.name, "LibRef");
        }
        _ => unreachable!(),
    }
    assert_eq!(message(&page, Section::MessageFromLibrarian), "Try the NORTH CAROLINA STATE UNIVERSITY AUTHORS DATABASE");
    assert!(message(&page, Section::GlobalMessage).starts_with("Who will own"));
    assert!(titles(&page, Section::PersonalLinks).is_empty());
}

#[test]
fn empty_message_blocks_are_present() {
    let w = world();
    w.app.set_global_message("").unwrap();
    let (_, u) = w.login("chemist", Some("Chemistry"));
    let page = w.app.assemble_page(u).unwrap();
    assert_eq!(message(&page, Section::GlobalMessage), "");
    assert_eq!(message(&page, Section::MessageFromLibrarian), "");
}

#[test]
fn dispatch_get_set_and_fallback() {
    let w = world();
    let (_, u) = w.login("reader", Some("Library and Information Science"));
    let home = w.resource("NCSU Libraries home page");
    let hours = w.resource("Library hours");

    let DispatchResponse::Form(form) = w.app.dispatch(u, Some("get"), Some("library_links"), &[]).unwrap() else {
        panic!()
    };
    assert_eq!(form.selected, vec![home]);
    let first = &form.groups[0];
    assert_eq!(first.discipline_id, Some(w.discipline("Library and Information Science")));
    let checked: Vec<_> = first.items.iter().filter(|i| i.checked).map(|i| i.resource.id).collect();
    assert_eq!(checked, vec![home]);
    let listed: Vec<_> = first.items.iter().map(|i| i.resource.title.as_str()).collect();
    assert_eq!(listed, ["Interlibrary loan", "Library hours", "NCSU Libraries home page"]);

    let DispatchResponse::Page(page) = w.app.dispatch(u, Some("set"), Some("library_links"), &[hours]).unwrap()
    else {
        panic!()
    };
    assert_eq!(titles(&page, Section::LibraryLinks), ["Library hours"]);
    assert!(page.blocks[Section::LibraryLinks.position()].customized);

    let DispatchResponse::Page(same) = w.app.dispatch(u, Some("frobnicate"), None, &[]).unwrap() else {
        panic!()
    };
    assert_eq!(same, page);
    assert!(matches!(w.app.dispatch(u, Some("get"), Some("lobby"), &[]), Err(Error::InvalidArgument(_))));
    assert!(matches!(w.app.dispatch(u, Some("set"), None, &[]), Err(Error::InvalidArgument(_))));
}

#[test]
fn quick_search_builds_encoded_urls() {
    let w = world();
    let (_, u) = w.login("reader", Some("Philosophy"));
    let dict = w.resource("Dictionary");
    assert_eq!(w.app.quick_search(u, dict, "hegel").unwrap(), "https://example.test/dict?q=hegel");
    assert_eq!(w.app.quick_search(u, dict, "free will").unwrap(), "https://example.test/dict?q=free%20will");
    assert!(matches!(w.app.quick_search(u, dict, ""), Err(Error::InvalidArgument(_))));
    // Philosophy does not recommend the catalog engine.
    let catalog = w.resource("Library catalog");
    assert!(matches!(w.app.quick_search(u, catalog, "x"), Err(Error::NotFound(_))));
    assert!(matches!(w.app.quick_search(u, ResourceId(88_888), "x"), Err(Error::NotFound(_))));
}

#[test]
fn personal_links_add_and_delete() {
    let w = world();
    let (_, a) = w.login("alex", None);
    let (_, b) = w.login("blair", None);
    let link = w.app.add_personal_link(a, "NY Times", "https://www.nytimes.com/").unwrap();
    let page = w.app.assemble_page(a).unwrap();
    assert_eq!(titles(&page, Section::PersonalLinks), ["NY Times"]);
    assert!(matches!(w.app.delete_personal_link(b, link.id), Err(Error::Forbidden)));
    for bad in ["not a url", "ftp://example.test/", "javascript:alert(1)", "mailto:a@b"] {
        assert!(matches!(w.app.add_personal_link(a, "x", bad), Err(Error::InvalidArgument(_))), "{bad}");
    }
    w.app.delete_personal_link(a, link.id).unwrap();
    assert!(titles(&w.app.assemble_page(a).unwrap(), Section::PersonalLinks).is_empty());
    assert!(matches!(w.app.delete_personal_link(a, link.id), Err(Error::NotFound(_))));
}

#[test]
fn discipline_change_swaps_librarians_but_not_selections() {
    let w = world();
    let (_, u) = w.login("reader", Some("Library and Information Science"));
    let before = w.app.assemble_page(u).unwrap();
    let same = w.app.set_discipline(u, w.discipline("Library and Information Science")).unwrap();
    assert_eq!(same, before);

    let after = w.app.set_discipline(u, w.discipline("Chemistry")).unwrap();
    assert_eq!(librarian_names(&after), ["Dana Ortiz"]);
    assert_eq!(message(&after, Section::MessageFromLibrarian), "");
    for s in Section::ALL.into_iter().filter(|s| s.resource_kind().is_some()) {
        assert_eq!(titles(&after, s), titles(&before, s), "{s}");
    }
    assert!(matches!(w.app.set_discipline(u, mylibrary_core::model::DisciplineId(5_555)), Err(Error::NotFound(_))));
}

#[test]
fn logout_is_per_token_and_idempotent() {
    let w = world();
    let (t1, _) = w.login("reader", None);
    let (t2, _) = w.login("reader", None);
    w.app.logout(Some(&t1));
    w.app.logout(Some(&t1));
    w.app.logout(None);
    assert!(w.app.authenticate(Some(&t1)).is_none());
    assert!(w.app.authenticate(Some(&t2)).is_some());
    assert!(matches!(
        w.app.resolve_session(Some(&t1), None, &LoginHints::default()).unwrap(),
        Resolution::Redirect(_)
    ));
}

#[test]
fn current_awareness_block_lists_profiles() {
    let w = world();
    let (_, u) = w.login("reader", None);
    w.app.save_profile(u, "b - bd, z - zz", mylibrary_core::sdi::Delivery::Screen).unwrap();
    let page = w.app.assemble_page(u).unwrap();
    match block(&page, Section::CurrentAwareness) {
        BlockContent::CurrentAwareness { profiles, form } => {
            assert_eq!(profiles.len(), 1);
            assert_eq!(profiles[0].ranges.to_string(), "B - BD, Z - ZZ");
            assert_eq!((form.from_weeks_ago, form.to_weeks_ago), (2, 0));
        }
        other => panic!("{other:?}"),
    }
    assert!(page.blocks[Section::CurrentAwareness.position()].customized);
}
