use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::header::SET_COOKIE;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use mylibrary_core::model::{DisciplineId, LibrarianId, ResourceId, Section};
use serde::Deserialize;
use serde_json::json;

use super::{clear_cookie, no_content, set_cookie, AdminSession, ApiResult, Shared, ADMIN_COOKIE};
use crate::portal::parse_section;
use crate::store::{DisciplineInput, LibrarianInput, ResourceInput};

pub fn routes() -> Router<Shared> {
    Router::new()
        .route("/login", post(login))
        .route("/logout", post(logout))
        .route("/disciplines", get(list_disciplines).post(upsert_discipline))
        .route("/disciplines/{id}", delete(delete_discipline))
        .route("/librarians", get(list_librarians).post(upsert_librarian))
        .route("/librarians/{id}", delete(delete_librarian))
        .route("/resources", get(list_resources).post(upsert_resource))
        .route("/resources/{id}", delete(delete_resource))
        .route("/recommendations", get(list_recommendations).post(set_recommendations))
        .route("/recommendations/{discipline}/{section}", delete(clear_recommendations))
        .route("/users", get(list_users))
        .route("/messages", get(message_history))
        .route("/messages/global", post(global_message))
        .route("/messages/discipline/{id}", post(discipline_message))
        .route("/mass-email", post(mass_email))
        .route("/mass-email/{id}", get(mass_email_status))
        .route("/reports", get(reports))
        .route("/acquisitions", post(ingest))
        .route("/weekly-run", post(weekly_run))
}

#[derive(Deserialize)]
struct Credentials {
    username: String,
    password: String,
}

async fn login(State(s): State<Shared>, Json(c): Json<Credentials>) -> ApiResult<Response> {
    let app = Arc::clone(&s.app);
    let session = tokio::task::spawn_blocking(move || app.admin_login(&c.username, &c.password))
        .await
        .map_err(|e| crate::Error::Storage(e.to_string()))??;
    let mut response = Json(json!({
        "token": session.token,
        "username": session.subject,
        "expires_at": session.expires_at,
    }))
    .into_response();
    response.headers_mut().insert(
        SET_COOKIE,
        set_cookie(
            ADMIN_COOKIE,
            &session.token,
            s.app.admin_sessions.lifetime(),
            s.app.settings.secure_cookies,
        ),
    );
    Ok(response)
}

async fn logout(a: AdminSession, State(s): State<Shared>) -> Response {
    s.app.admin_logout(&a.0.token);
    let mut response = no_content();
    response
        .headers_mut()
        .insert(SET_COOKIE, clear_cookie(ADMIN_COOKIE, s.app.settings.secure_cookies));
    response
}

async fn list_disciplines(_a: AdminSession, State(s): State<Shared>) -> Response {
    Json(s.app.store.disciplines()).into_response()
}

async fn upsert_discipline(_a: AdminSession, State(s): State<Shared>, Json(d): Json<DisciplineInput>) -> ApiResult<Response> {
    Ok(Json(s.app.store.upsert_discipline(d)?).into_response())
}

async fn delete_discipline(_a: AdminSession, State(s): State<Shared>, Path(id): Path<DisciplineId>) -> ApiResult<Response> {
    Ok(Json(s.app.store.delete_discipline(id)?).into_response())
}

async fn list_librarians(_a: AdminSession, State(s): State<Shared>) -> Response {
    Json(s.app.store.librarians()).into_response()
}

async fn upsert_librarian(_a: AdminSession, State(s): State<Shared>, Json(l): Json<LibrarianInput>) -> ApiResult<Response> {
    Ok(Json(s.app.store.upsert_librarian(l)?).into_response())
}

async fn delete_librarian(_a: AdminSession, State(s): State<Shared>, Path(id): Path<LibrarianId>) -> ApiResult<Response> {
    Ok(Json(s.app.store.delete_librarian(id)?).into_response())
}

async fn list_resources(_a: AdminSession, State(s): State<Shared>) -> Response {
    Json(s.app.store.resources()).into_response()
}

async fn upsert_resource(_a: AdminSession, State(s): State<Shared>, Json(r): Json<ResourceInput>) -> ApiResult<Response> {
    Ok(Json(s.app.store.upsert_resource(r)?).into_response())
}

async fn delete_resource(_a: AdminSession, State(s): State<Shared>, Path(id): Path<ResourceId>) -> ApiResult<Response> {
    Ok(Json(s.app.store.delete_resource(id)?).into_response())
}

async fn list_recommendations(_a: AdminSession, State(s): State<Shared>) -> Response {
    Json(s.app.store.recommendation_sets()).into_response()
}

#[derive(Deserialize)]
struct RecommendationInput {
    discipline_id: DisciplineId,
    section: Section,
    resource_ids: Vec<ResourceId>,
}

async fn set_recommendations(
    _a: AdminSession,
    State(s): State<Shared>,
    Json(r): Json<RecommendationInput>,
) -> ApiResult<Response> {
    let set = s.app.store.set_recommendations(r.discipline_id, r.section, &r.resource_ids)?;
    Ok(Json(set).into_response())
}

async fn clear_recommendations(
    _a: AdminSession,
    State(s): State<Shared>,
    Path((discipline, section)): Path<(DisciplineId, String)>,
) -> ApiResult<Response> {
    let section = parse_section(&section)?;
    Ok(Json(s.app.store.set_recommendations(discipline, section, &[])?).into_response())
}

async fn list_users(_a: AdminSession, State(s): State<Shared>) -> Response {
    Json(s.app.store.users()).into_response()
}

async fn message_history(_a: AdminSession, State(s): State<Shared>) -> Response {
    Json(s.app.store.message_history()).into_response()
}

#[derive(Deserialize)]
struct MessageBody {
    body: String,
}

async fn global_message(_a: AdminSession, State(s): State<Shared>, Json(m): Json<MessageBody>) -> ApiResult<Response> {
    Ok(Json(s.app.set_global_message(&m.body)?).into_response())
}

async fn discipline_message(
    _a: AdminSession,
    State(s): State<Shared>,
    Path(id): Path<DisciplineId>,
    Json(m): Json<MessageBody>,
) -> ApiResult<Response> {
    Ok(Json(s.app.set_discipline_message(id, &m.body)?).into_response())
}

#[derive(Deserialize)]
struct MassEmailInput {
    discipline_ids: Vec<DisciplineId>,
    subject: String,
    body: String,
}

async fn mass_email(_a: AdminSession, State(s): State<Shared>, Json(m): Json<MassEmailInput>) -> ApiResult<Response> {
    let job = s.app.start_mass_email(m.discipline_ids, m.subject, m.body)?;
    Ok((StatusCode::ACCEPTED, Json(job)).into_response())
}

async fn mass_email_status(_a: AdminSession, State(s): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(s.app.mass_email_status(&id)?).into_response())
}

#[derive(Deserialize)]
struct ReportQuery {
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
}

async fn reports(_a: AdminSession, State(s): State<Shared>, Query(q): Query<ReportQuery>) -> ApiResult<Response> {
    Ok(Json(s.app.usage_report(q.from, q.to)?).into_response())
}

async fn ingest(_a: AdminSession, State(s): State<Shared>, body: String) -> ApiResult<Response> {
    Ok(Json(s.app.store.ingest_tsv(&body)?).into_response())
}

async fn weekly_run(_a: AdminSession, State(s): State<Shared>) -> ApiResult<Response> {
    let app = Arc::clone(&s.app);
    let report = tokio::task::spawn_blocking(move || app.weekly_run())
        .await
        .map_err(|e| crate::Error::Storage(e.to_string()))??;
    Ok(Json(report).into_response())
}
