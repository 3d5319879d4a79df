use axum::extract::{Path, Query, State};
use axum::http::header::{LOCATION, SET_COOKIE};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use mylibrary_core::model::{DisciplineId, ProfileId, ResourceId};
use mylibrary_core::sdi::Delivery;
use mylibrary_core::window::TimeWindow;
use serde::Deserialize;
use serde_json::json;

use super::{
    clear_cookie, cookie, no_content, redirect, set_cookie, ApiError, ApiResult, AuthUser, Shared,
    UserSession, SESSION_COOKIE,
};
use crate::error::Error;
use crate::portal::{parse_section, LoginHints, Resolution};
use crate::store::UserPatch;

pub fn routes() -> Router<Shared> {
    Router::new()
        .route("/", get(dispatch))
        .route("/login", get(login))
        .route("/logout", post(logout))
        .route("/page", get(page))
        .route("/customize/{section}", get(customize_form).post(customize_set))
        .route("/personal-links", post(add_link))
        .route("/personal-links/{id}", delete(delete_link))
        .route("/quick-search", get(quick_search))
        .route("/discipline", post(set_discipline))
        .route("/disciplines", get(disciplines))
        .route("/preferences", post(preferences))
        .route("/current-awareness/profiles", get(profiles).post(save_profile))
        .route("/current-awareness/profiles/{id}", delete(delete_profile))
        .route("/current-awareness/search", get(window_search))
}

#[derive(Deserialize)]
struct LoginQuery {
    assertion: Option<String>,
    #[serde(flatten)]
    hints: LoginHints,
}

async fn login(State(s): State<Shared>, headers: HeaderMap, Query(q): Query<LoginQuery>) -> ApiResult<Response> {
    let token = cookie(&headers, SESSION_COOKIE);
    match s.app.resolve_session(token, q.assertion.as_deref(), &q.hints)? {
        Resolution::Redirect(url) => Ok(redirect(&url)),
        Resolution::Session {
            session,
            user,
            created,
            issued,
        } => {
            let mut response = Json(json!({
                "user_id": user.id,
                "auth_id": user.auth_id,
                "created": created,
                "expires_at": session.expires_at,
            }))
            .into_response();
            if issued {
                response.headers_mut().insert(
                    SET_COOKIE,
                    set_cookie(
                        SESSION_COOKIE,
                        &session.token,
                        s.app.sessions.lifetime(),
                        s.app.settings.secure_cookies,
                    ),
                );
            }
            response.extensions_mut().insert(AuthUser(user.auth_id));
            Ok(response)
        }
    }
}

async fn logout(State(s): State<Shared>, headers: HeaderMap) -> Response {
    s.app.logout(cookie(&headers, SESSION_COOKIE));
    let mut response = no_content();
    response
        .headers_mut()
        .insert(SET_COOKIE, clear_cookie(SESSION_COOKIE, s.app.settings.secure_cookies));
    response
}

async fn page(u: UserSession, State(s): State<Shared>) -> ApiResult<Response> {
    Ok(Json(s.app.assemble_page(u.user.id)?).into_response())
}

#[derive(Deserialize)]
struct DispatchQuery {
    cmd: Option<String>,
    section: Option<String>,
    /// Comma-separated resource ids for `set`.
    ids: Option<String>,
}

fn parse_ids(text: &str) -> Result<Vec<ResourceId>, Error> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::invalid(format!("bad resource id `{t}`"))))
        .collect()
}

async fn dispatch(u: UserSession, State(s): State<Shared>, Query(q): Query<DispatchQuery>) -> ApiResult<Response> {
    let ids = parse_ids(q.ids.as_deref().unwrap_or(""))?;
    let out = s
        .app
        .dispatch(u.user.id, q.cmd.as_deref(), q.section.as_deref(), &ids)?;
    Ok(Json(out).into_response())
}

async fn customize_form(u: UserSession, State(s): State<Shared>, Path(section): Path<String>) -> ApiResult<Response> {
    let section = parse_section(&section)?;
    Ok(Json(s.app.customization_form(u.user.id, section)?).into_response())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IdList {
    Bare(Vec<ResourceId>),
    Wrapped { resource_ids: Vec<ResourceId> },
}

impl IdList {
    fn into_vec(self) -> Vec<ResourceId> {
        match self {
            IdList::Bare(v) | IdList::Wrapped { resource_ids: v } => v,
        }
    }
}

async fn customize_set(
    u: UserSession,
    State(s): State<Shared>,
    Path(section): Path<String>,
    Json(ids): Json<IdList>,
) -> ApiResult<Response> {
    let section = parse_section(&section)?;
    Ok(Json(s.app.customize(u.user.id, section, &ids.into_vec())?).into_response())
}

#[derive(Deserialize)]
struct NewLink {
    label: String,
    url: String,
}

async fn add_link(u: UserSession, State(s): State<Shared>, Json(body): Json<NewLink>) -> ApiResult<Response> {
    let r = s.app.add_personal_link(u.user.id, &body.label, &body.url)?;
    Ok((StatusCode::CREATED, Json(r)).into_response())
}

async fn delete_link(u: UserSession, State(s): State<Shared>, Path(id): Path<ResourceId>) -> ApiResult<Response> {
    s.app.delete_personal_link(u.user.id, id)?;
    Ok(no_content())
}

#[derive(Deserialize)]
struct QuickSearchQuery {
    engine: ResourceId,
    #[serde(default)]
    q: String,
}

async fn quick_search(u: UserSession, State(s): State<Shared>, Query(q): Query<QuickSearchQuery>) -> ApiResult<Response> {
    let url = s.app.quick_search(u.user.id, q.engine, &q.q)?;
    let location = HeaderValue::from_str(&url).map_err(|_| Error::Storage("redirect url is not a valid header".into()))?;
    Ok((StatusCode::FOUND, [(LOCATION, location)]).into_response())
}

#[derive(Deserialize)]
struct DisciplineChoice {
    discipline_id: DisciplineId,
}

async fn set_discipline(u: UserSession, State(s): State<Shared>, Json(body): Json<DisciplineChoice>) -> ApiResult<Response> {
    Ok(Json(s.app.set_discipline(u.user.id, body.discipline_id)?).into_response())
}

async fn disciplines(_u: UserSession, State(s): State<Shared>) -> Response {
    Json(s.app.store.disciplines()).into_response()
}

#[derive(Deserialize)]
struct Preferences {
    name: Option<String>,
    email: Option<String>,
    email_opt_in: Option<bool>,
}

async fn preferences(u: UserSession, State(s): State<Shared>, Json(p): Json<Preferences>) -> ApiResult<Response> {
    let user = s.app.update_preferences(
        u.user.id,
        UserPatch {
            name: p.name,
            email: p.email,
            email_opt_in: p.email_opt_in,
            discipline_id: None,
        },
    )?;
    Ok(Json(user).into_response())
}

async fn profiles(u: UserSession, State(s): State<Shared>) -> Response {
    Json(s.app.store.profiles_for(u.user.id)).into_response()
}

#[derive(Deserialize)]
struct NewProfile {
    ranges: String,
    delivery: Delivery,
}

async fn save_profile(u: UserSession, State(s): State<Shared>, Json(body): Json<NewProfile>) -> ApiResult<Response> {
    let p = s.app.save_profile(u.user.id, &body.ranges, body.delivery)?;
    Ok((StatusCode::CREATED, Json(p)).into_response())
}

async fn delete_profile(u: UserSession, State(s): State<Shared>, Path(id): Path<ProfileId>) -> ApiResult<Response> {
    s.app.delete_profile(u.user.id, id)?;
    Ok(no_content())
}

#[derive(Deserialize)]
struct WindowQuery {
    #[serde(default = "two")]
    from: u32,
    #[serde(default)]
    to: u32,
    profile: Option<ProfileId>,
}

fn two() -> u32 {
    2
}

async fn window_search(u: UserSession, State(s): State<Shared>, Query(q): Query<WindowQuery>) -> ApiResult<Response> {
    let window = TimeWindow::new(q.from, q.to).map_err(|e| ApiError(Error::invalid(e)))?;
    Ok(Json(s.app.window_query_for_user(u.user.id, window, q.profile)?).into_response())
}
